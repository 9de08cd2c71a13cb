//! Small dense square matrices over `f64` or symbolic [`Expr`] entries.

use std::ops::{Add, Mul, Neg, Sub};

use crate::expr::{EvalError, Expr};

/// Ring operations shared by numeric and symbolic entries.
pub trait Scalar: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn zero() -> Self;
    fn from_f64(c: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(c: f64) -> Self {
        c
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn from_f64(c: f64) -> Self {
        Expr::constant(c)
    }
}

/// Row-major `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| T::from_f64(if i == j { 1.0 } else { 0.0 }))
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            acc = acc + self.get(i, i).clone();
        }
        acc
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        Self::from_fn(self.n, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.n {
                acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
            }
            acc
        })
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).clone() + other.get(i, j).clone())
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).clone() - other.get(i, j).clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_fn(self.n, |i, j| s.clone() * self.get(i, j).clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }
}

impl SquareMatrix<Expr> {
    pub fn eval(&self, point: &[f64]) -> Result<SquareMatrix<f64>, EvalError> {
        let data = self.data.iter().map(|e| e.eval_at(point)).collect::<Result<Vec<_>, _>>()?;
        Ok(SquareMatrix { n: self.n, data })
    }
}

impl SquareMatrix<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}
