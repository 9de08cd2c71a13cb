//! Seeded point sampling and random polynomial test data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Expr;
use crate::multivec::{DifferentialForm, MultiVectorField};
use crate::combinatorics::increasing_tuples;

/// Axis-aligned box in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub bounds: Vec<(f64, f64)>,
}

impl Region {
    /// The cube `[-1, 1]^dim`.
    pub fn cube(dim: usize) -> Self {
        Region { bounds: vec![(-1.0, 1.0); dim] }
    }

    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Region { bounds }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Latin-hypercube sample of `n` points in `region`.
pub fn latin_hypercube(region: &Region, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; region.dim()]; n];
    for (axis, &(lo, hi)) in region.bounds.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            strata.swap(i, j);
        }
        for (p, s) in points.iter_mut().zip(strata) {
            let u = (s as f64 + rng.gen::<f64>()) / n as f64;
            p[axis] = lo + (hi - lo) * u;
        }
    }
    points
}

/// Seeded Latin-hypercube sample; the same `(region, n, seed)` always yields the same points.
pub fn sample_points(region: &Region, n: usize, seed: u64) -> Vec<Vec<f64>> {
    latin_hypercube(region, n, &mut rng(seed))
}

/// Random polynomial in `dim` coordinates with total degree at most `degree`
/// and coefficients uniform in `[-1, 1]`.
pub fn random_polynomial(dim: usize, degree: usize, terms: usize, rng: &mut impl Rng) -> Expr {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut factors = vec![Expr::constant(rng.gen_range(-1.0..1.0))];
        let d = rng.gen_range(0..=degree);
        let mut powers = vec![0i32; dim];
        for _ in 0..d {
            powers[rng.gen_range(0..dim)] += 1;
        }
        for (i, &p) in powers.iter().enumerate() {
            if p > 0 {
                factors.push(Expr::coord(i).powi(p));
            }
        }
        out.push(Expr::mul_all(factors));
    }
    Expr::add_all(out)
}

pub fn random_one_form(dim: usize, degree: usize, rng: &mut impl Rng) -> DifferentialForm {
    DifferentialForm::one_form((0..dim).map(|_| random_polynomial(dim, degree, 3, rng)).collect())
}

pub fn random_multivector(dim: usize, rank: usize, degree: usize, rng: &mut impl Rng) -> MultiVectorField {
    MultiVectorField::from_components(
        dim,
        rank,
        increasing_tuples(dim, rank).into_iter().map(|idx| (idx, random_polynomial(dim, degree, 3, rng))),
    )
    .expect("generated indices are valid")
}
