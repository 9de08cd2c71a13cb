use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use crate::combinatorics::{increasing_tuples, shuffles, sort_with_sign};
use crate::expr::{EvalError, Expr};
use crate::{Error, Result};

/// Marker for contravariant (multivector) fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contra;
/// Marker for covariant (differential form) fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Co;

/// Alternating field of degree `r` on an `m`-dimensional chart.
///
/// Only strictly increasing index tuples are stored; zero components are
/// dropped. Evaluating a general tuple applies the permutation sign.
#[derive(Clone, PartialEq)]
pub struct Alternating<K> {
    dim: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Expr>,
    kind: PhantomData<K>,
}

/// r-multivector field `Q ∈ X^r(M)`.
pub type MultiVectorField = Alternating<Contra>;
/// r-form `λ ∈ Ω^r(M)`.
pub type DifferentialForm = Alternating<Co>;

impl<K> Alternating<K> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Alternating { dim, degree, comps: BTreeMap::new(), kind: PhantomData }
    }

    /// Build from arbitrary (possibly unsorted) tuples; values at tuples that
    /// sort to the same key are combined with their permutation signs.
    pub fn from_components<I>(dim: usize, degree: usize, comps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Expr)>,
    {
        let mut out = Self::zero(dim, degree);
        for (idx, value) in comps {
            if idx.len() != degree {
                return Err(Error::Index(format!("tuple {idx:?} has length != degree {degree}")));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::Index(format!("index {bad} out of range for dimension {dim}")));
            }
            if let Some((key, sign)) = sort_with_sign(&idx) {
                let signed = if sign < 0.0 { value.neg_expr() } else { value };
                let merged = match out.comps.remove(&key) {
                    Some(prev) => prev + signed,
                    None => signed,
                };
                out.insert(key, merged);
            }
        }
        Ok(out)
    }

    /// Degree-0 field.
    pub fn scalar(dim: usize, value: Expr) -> Self {
        let mut out = Self::zero(dim, 0);
        out.insert(Vec::new(), value);
        out
    }

    /// Degree-1 field from its `m` components.
    pub fn from_vec(comps: Vec<Expr>) -> Self {
        let dim = comps.len();
        let mut out = Self::zero(dim, 1);
        for (i, c) in comps.into_iter().enumerate() {
            out.insert(vec![i], c);
        }
        out
    }

    fn insert(&mut self, key: Vec<usize>, value: Expr) {
        if !value.is_zero() {
            self.comps.insert(key, value);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Stored (nonzero) components keyed by increasing tuples.
    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Component at an arbitrary index tuple.
    pub fn get(&self, idx: &[usize]) -> Expr {
        match sort_with_sign(idx) {
            None => Expr::zero(),
            Some((key, sign)) => match self.comps.get(&key) {
                None => Expr::zero(),
                Some(e) if sign < 0.0 => e.neg_expr(),
                Some(e) => e.clone(),
            },
        }
    }

    /// Dense component list of a degree-1 field.
    pub fn to_vec(&self) -> Vec<Expr> {
        assert_eq!(self.degree, 1, "to_vec requires a degree-1 field");
        (0..self.dim).map(|i| self.get(&[i])).collect()
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (k, v) in &self.comps {
            out.insert(k.clone(), f(v));
        }
        out
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.map(|v| s * v)
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, f: impl Fn(Expr, Expr) -> Expr) -> Self {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree), "field shapes differ");
        let mut out = Self::zero(self.dim, self.degree);
        for key in self.comps.keys().chain(other.comps.keys()) {
            if out.comps.contains_key(key) {
                continue;
            }
            let a = self.comps.get(key).cloned().unwrap_or_default();
            let b = other.comps.get(key).cloned().unwrap_or_default();
            out.insert(key.clone(), f(a, b));
        }
        out
    }

    /// Apply to `degree` arguments given by their components:
    /// `Σ_I c_I det[arg_a(I_b)]`.
    pub fn apply(&self, args: &[Vec<Expr>]) -> Expr {
        assert_eq!(args.len(), self.degree, "wrong number of arguments");
        let mut terms = Vec::new();
        for (key, c) in &self.comps {
            let minor = crate::matrix::SquareMatrix::from_fn(self.degree, |a, b| args[a][key[b]].clone());
            let det = symbolic_det(&minor);
            if !det.is_zero() {
                terms.push(c * det);
            }
        }
        Expr::add_all(terms)
    }

    /// Exterior product, determinant convention (no factorial prefactor).
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let r = self.degree;
        let degree = r + other.degree;
        let mut out = Self::zero(self.dim, degree);
        for key in increasing_tuples(self.dim, degree) {
            let terms: Vec<Expr> = shuffles(&key, r)
                .into_iter()
                .filter_map(|(left, right, sign)| {
                    let a = self.comps.get(&left)?;
                    let b = other.comps.get(&right)?;
                    Some(Expr::mul_all([Expr::constant(sign), a.clone(), b.clone()]))
                })
                .collect();
            out.insert(key, Expr::add_all(terms));
        }
        out
    }

    /// Numeric components at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<BTreeMap<Vec<usize>, f64>, EvalError> {
        self.comps.iter().map(|(k, v)| Ok((k.clone(), v.eval_at(point)?))).collect()
    }

    /// `max |component|` at a point.
    pub fn max_abs_at(&self, point: &[f64]) -> Result<f64, EvalError> {
        let mut m: f64 = 0.0;
        for v in self.comps.values() {
            m = m.max(v.eval_at(point)?.abs());
        }
        Ok(m)
    }

    /// `max |component|` over a set of points.
    pub fn max_abs_over(&self, points: &[Vec<f64>]) -> Result<f64, EvalError> {
        let mut m: f64 = 0.0;
        for p in points {
            m = m.max(self.max_abs_at(p)?);
        }
        Ok(m)
    }
}

impl<K> fmt::Debug for Alternating<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (k, v) in &self.comps {
            map.entry(k, &format_args!("{v}"));
        }
        map.finish()
    }
}

impl MultiVectorField {
    /// Vector field with the given components.
    pub fn vector(comps: Vec<Expr>) -> Self {
        Self::from_vec(comps)
    }

    /// Commutator of two vector fields, `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i`.
    pub fn vector_bracket(&self, other: &Self) -> Self {
        let x = self.to_vec();
        let y = other.to_vec();
        let m = x.len();
        Self::vector(
            (0..m)
                .map(|i| {
                    Expr::add_all((0..m).map(|j| &x[j] * y[i].d(j) - &y[j] * x[i].d(j)))
                })
                .collect(),
        )
    }

    /// Directional derivative `X(f)` of a function along a vector field.
    pub fn derivative_of(&self, f: &Expr) -> Expr {
        Expr::add_all(self.components().map(|(k, v)| v * f.d(k[0])))
    }

    /// Ordinary Lie derivative along the vector field `x`:
    /// `(L_X Q)^I = X(Q^I) − Σ_a ∂_l X^{i_a} Q^{i_1..l..i_r}`.
    pub fn lie_derivative_along(&self, x: &MultiVectorField) -> Result<MultiVectorField> {
        if x.degree != 1 || x.dim != self.dim {
            return Err(Error::Invalid("expected a vector field of matching dimension".into()));
        }
        let xs = x.to_vec();
        let mut out = Self::zero(self.dim, self.degree);
        for key in increasing_tuples(self.dim, self.degree) {
            let mut terms = vec![x.derivative_of(&self.get(&key))];
            for a in 0..key.len() {
                for l in 0..self.dim {
                    let dx = xs[key[a]].d(l);
                    if dx.is_zero() {
                        continue;
                    }
                    let mut sub = key.clone();
                    sub[a] = l;
                    terms.push(-(dx * self.get(&sub)));
                }
            }
            out.insert(key, Expr::add_all(terms));
        }
        Ok(out)
    }

    /// Contraction `i_α Q`, `(i_α Q)(α_1, …) = Q(α, α_1, …)`.
    pub fn contract(&self, alpha: &DifferentialForm) -> Result<MultiVectorField> {
        check_one_form(alpha, self.dim)?;
        if self.degree == 0 {
            return Err(Error::Invalid("cannot contract a degree-0 field".into()));
        }
        let a = alpha.to_vec();
        let r = self.degree - 1;
        let mut out = Self::zero(self.dim, r);
        for key in increasing_tuples(self.dim, r) {
            let terms = (0..self.dim).filter(|&c| !a[c].is_zero()).map(|c| {
                let mut idx = Vec::with_capacity(r + 1);
                idx.push(c);
                idx.extend_from_slice(&key);
                &a[c] * self.get(&idx)
            });
            let value = Expr::add_all(terms);
            out.insert(key, value);
        }
        Ok(out)
    }
}

impl DifferentialForm {
    pub fn one_form(comps: Vec<Expr>) -> Self {
        Self::from_vec(comps)
    }

    /// Exact 1-form `df`.
    pub fn exact(dim: usize, f: &Expr) -> Self {
        Self::one_form((0..dim).map(|i| f.d(i)).collect())
    }

    /// Basis covector `dx^{i+1}`.
    pub fn basis(dim: usize, i: usize) -> Self {
        Self::one_form((0..dim).map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 })).collect())
    }

    /// de Rham differential, determinant convention:
    /// `(dλ)_{i0..ir} = Σ_k (−1)^k ∂_{i_k} λ_{i0..î_k..ir}`.
    pub fn exterior_derivative(&self) -> Self {
        let r = self.degree;
        let mut out = Self::zero(self.dim, r + 1);
        for key in increasing_tuples(self.dim, r + 1) {
            let terms = (0..=r).map(|k| {
                let rest: Vec<usize> = key.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
                let d = self.get(&rest).d(key[k]);
                if k % 2 == 0 {
                    d
                } else {
                    d.neg_expr()
                }
            });
            let value = Expr::add_all(terms);
            out.insert(key, value);
        }
        out
    }
}

pub(crate) fn check_one_form<K>(alpha: &Alternating<K>, dim: usize) -> Result<()> {
    if alpha.degree() != 1 {
        return Err(Error::Invalid(format!("expected a 1-form, got degree {}", alpha.degree())));
    }
    if alpha.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: alpha.dim() });
    }
    Ok(())
}

/// Determinant by permutation expansion; arguments are tiny.
pub(crate) fn symbolic_det(m: &crate::matrix::SquareMatrix<Expr>) -> Expr {
    let n = m.dim();
    let terms = crate::combinatorics::permutations(n).into_iter().filter_map(|(perm, sign)| {
        let mut factors = vec![Expr::constant(sign)];
        for (i, &j) in perm.iter().enumerate() {
            let e = m.get(i, j);
            if e.is_zero() {
                return None;
            }
            factors.push(e.clone());
        }
        Some(Expr::mul_all(factors))
    });
    Expr::add_all(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_expr;

    fn e(s: &str) -> Expr {
        parse_expr(s, 3, false).unwrap()
    }

    #[test]
    fn storage_is_antisymmetric() {
        let q = MultiVectorField::from_components(3, 2, [(vec![1, 0], e("x1"))]).unwrap();
        assert_eq!(q.get(&[0, 1]).to_string(), "-x1");
        assert_eq!(q.get(&[1, 0]).to_string(), "x1");
        assert!(q.get(&[1, 1]).is_zero());
        assert!(MultiVectorField::from_components(3, 2, [(vec![0, 3], e("1"))]).is_err());
        let z = MultiVectorField::from_components(3, 2, [(vec![2, 2], e("x1"))]).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn wedge_of_vectors_is_determinant() {
        let x = MultiVectorField::vector(vec![e("1"), e("2"), e("0")]);
        let y = MultiVectorField::vector(vec![e("3"), e("4"), e("0")]);
        let w = x.wedge(&y);
        assert_eq!(w.get(&[0, 1]).as_const(), Some(-2.0));
        assert!(x.wedge(&x).is_zero());
    }

    #[test]
    fn contraction_twice_vanishes() {
        let q = MultiVectorField::from_components(
            3,
            3,
            [(vec![0, 1, 2], e("x1*x2 + 1"))],
        )
        .unwrap();
        let a = DifferentialForm::one_form(vec![e("x2"), e("1"), e("x3^2")]);
        let twice = q.contract(&a).unwrap().contract(&a).unwrap();
        assert!(twice.max_abs_at(&[0.3, -0.2, 0.9]).unwrap() < 1e-15);
    }

    #[test]
    fn exterior_derivative_squares_to_zero() {
        let l = DifferentialForm::one_form(vec![e("x1*x2^2"), e("sin(x3)"), e("x1*x3")]);
        let dd = l.exterior_derivative().exterior_derivative();
        assert!(dd.max_abs_at(&[0.1, 0.5, -0.4]).unwrap() < 1e-14);
        let df = DifferentialForm::exact(3, &e("x1*x2*x3")).exterior_derivative();
        assert!(df.max_abs_at(&[0.1, 0.5, -0.4]).unwrap() < 1e-14);
    }
}
