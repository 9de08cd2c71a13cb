//! Invariant polynomials, Poisson–Chern–Weil fields and secondary classes.
//!
//! `P_k` is the polarization of `σ_k(A) = e_k(eigenvalues of A/2π)`, so
//! `P_1 = tr/2π`. Matrices act on coframe components: `Λ(α)_{jl} = α_k Γ^{kl}_j`
//! and `R(α, β)_{lk} = α_i β_j R^{ijk}_l`.

use std::f64::consts::PI;

use crate::combinatorics::{increasing_tuples, permutations};
use crate::connection::{canonical_poisson_connection, curvature, levi_civita_contra, ConnectionSymbols, Metric, TensorField};
use crate::expr::Expr;
use crate::matrix::{Scalar, SquareMatrix};
use crate::multivec::{DensityField, MultiVectorField, PoissonStructure};
use crate::sampling::{sample_points, Region};
use crate::{Error, Result};

/// Flatness threshold gating even-degree secondary classes.
pub const FLATNESS_TOLERANCE: f64 = 1e-10;

/// Finite-dimensional real Lie algebra with `[e_i, e_j] = c^k_{ij} e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    // c[(i·n + j)·n + k] = c^k_{ij}
    c: Vec<f64>,
}

impl LieAlgebra {
    /// Structure constants as `(i, j, k, c^k_{ij})` for `i < j`, 0-based; the
    /// `(j, i)` entries follow by antisymmetry.
    pub fn from_brackets(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in entries {
            if i >= j || j >= dim || k >= dim {
                return Err(Error::Index(format!("structure constant ({}, {}, {}) needs i<j<=dim", i + 1, j + 1, k + 1)));
            }
            c[(i * dim + j) * dim + k] = v;
            c[(j * dim + i) * dim + k] = -v;
        }
        Self::new(dim, c)
    }

    pub fn new(dim: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, found: c.len() });
        }
        let g = LieAlgebra { dim, c };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if (g.c(i, j, k) + g.c(j, i, k)).abs() > 1e-12 {
                        return Err(Error::Invalid("structure constants are not antisymmetric".into()));
                    }
                    for l in 0..dim {
                        let s: f64 = (0..dim)
                            .map(|m| g.c(i, j, m) * g.c(m, k, l) + g.c(j, k, m) * g.c(m, i, l) + g.c(k, i, m) * g.c(m, j, l))
                            .sum();
                        if s.abs() > 1e-12 {
                            return Err(Error::Invalid(format!("structure constants violate Jacobi (residual {s:e})")));
                        }
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn so3() -> Self {
        Self::from_brackets(3, &[(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, 1.0)]).expect("so(3)")
    }

    /// `[ω1, ω2] = ω1`.
    pub fn aff1() -> Self {
        Self::from_brackets(2, &[(0, 1, 0, 1.0)]).expect("aff(1)")
    }

    pub fn sl2() -> Self {
        Self::from_brackets(3, &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)]).expect("sl(2)")
    }

    /// `[e3, e1] = e1`, `[e3, e2] = e1 + e2`.
    pub fn solvable3() -> Self {
        Self::from_brackets(3, &[(0, 2, 0, -1.0), (1, 2, 0, -1.0), (1, 2, 1, -1.0)]).expect("solvable")
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.dim + other.dim;
        let mut c = vec![0.0; n * n * n];
        for (g, off) in [(self, 0), (other, self.dim)] {
            for i in 0..g.dim {
                for j in 0..g.dim {
                    for k in 0..g.dim {
                        c[((i + off) * n + j + off) * n + k + off] = g.c(i, j, k);
                    }
                }
            }
        }
        LieAlgebra { dim: n, c }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c^k_{ij}`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += u[i] * v[j] * self.c(i, j, k);
                    }
                }
                s
            })
            .collect()
    }

    /// `(ad v)_{jl} = v_k c^j_{kl}`.
    pub fn ad(&self, v: &[f64]) -> SquareMatrix<f64> {
        let n = self.dim;
        SquareMatrix::from_fn(n, |j, l| (0..n).map(|k| v[k] * self.c(k, l, j)).sum())
    }

    /// Lie–Poisson structure `π^{ij} = c^k_{ij} x_k` on the dual.
    pub fn lie_poisson(&self) -> PoissonStructure {
        let n = self.dim;
        let mut comps = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let e = Expr::add_all((0..n).filter(|&k| self.c(i, j, k) != 0.0).map(|k| Expr::constant(self.c(i, j, k)) * Expr::coord(k)));
                if !e.is_zero() {
                    comps.push((i, j, e));
                }
            }
        }
        PoissonStructure::new(n, comps).expect("indices in range")
    }
}

/// `K_j(v_1, .., v_j) = tr(ad v_1 ⋯ ad v_j)`.
pub fn k_form(g: &LieAlgebra, vs: &[Vec<f64>]) -> f64 {
    let mut acc = SquareMatrix::<f64>::identity(g.dim());
    for v in vs {
        acc = acc.matmul(&g.ad(v));
    }
    acc.trace()
}

/// Full polarization of `σ_k` on `A_1..A_k`:
/// `(1/k!) Σ_{σ ∈ S_k} sign(σ) Π_{cycles} tr(A_{i_1} ⋯ A_{i_j}) / (2π)^k`.
pub fn sigma_polarized<T: Scalar>(mats: &[SquareMatrix<T>]) -> Result<T> {
    let k = mats.len();
    if k == 0 {
        return Ok(T::from_f64(1.0));
    }
    let n = mats[0].dim();
    if let Some(bad) = mats.iter().find(|a| a.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
    }
    let mut total = T::zero();
    let mut factorial = 1.0;
    for i in 2..=k {
        factorial *= i as f64;
    }
    for (perm, sign) in permutations(k) {
        let mut seen = vec![false; k];
        let mut term = T::from_f64(sign);
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut prod = mats[start].clone();
            seen[start] = true;
            let mut cur = perm[start];
            while cur != start {
                prod = prod.matmul(&mats[cur]);
                seen[cur] = true;
                cur = perm[cur];
            }
            term = term * prod.trace();
        }
        total = total + term;
    }
    Ok(total * T::from_f64(1.0 / (factorial * (2.0 * PI).powi(k as i32))))
}

/// Closed form of `P_3` with a symmetrized cubic trace:
/// `(1/24π³)[½(tr ABC + tr ACB) − ½(trA tr BC + trB tr CA + trC tr AB) + ½ trA trB trC]`.
pub fn p3_closed_form(a: &SquareMatrix<f64>, b: &SquareMatrix<f64>, c: &SquareMatrix<f64>) -> f64 {
    let tr = |m: &SquareMatrix<f64>| m.trace();
    let cubic = 0.5 * (tr(&a.matmul(b).matmul(c)) + tr(&a.matmul(c).matmul(b)));
    let mixed = tr(a) * tr(&b.matmul(c)) + tr(b) * tr(&c.matmul(a)) + tr(c) * tr(&a.matmul(b));
    (cubic - 0.5 * mixed + 0.5 * tr(a) * tr(b) * tr(c)) / (24.0 * PI.powi(3))
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let prev = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `R(dx^a, dx^b)` as a matrix, `M_{lk} = R^{abk}_l`.
pub fn curvature_matrix(r: &TensorField, a: usize, b: usize) -> SquareMatrix<Expr> {
    SquareMatrix::from_fn(r.dim(), |l, k| r.get(&[a, b, k, l]).clone())
}

/// `Λ(dx^a)_{jl} = λ^{al}_j` for symbols `λ` stored like [`ConnectionSymbols`].
pub fn connection_matrix(symbols: &[Expr], dim: usize, a: usize) -> SquareMatrix<Expr> {
    SquareMatrix::from_fn(dim, |j, l| symbols[(a * dim + l) * dim + j].clone())
}

/// `λ(R)(P_k)(α_1..α_{2k}) = Σ_{σ ∈ S_{2k}} sign(σ) P_k(R(α_{σ1}, α_{σ2}), …)`.
pub fn chern_weil(pi: &PoissonStructure, conn: &ConnectionSymbols, k: usize) -> Result<MultiVectorField> {
    let m = pi.dim();
    let deg = 2 * k;
    if k == 0 || deg > m {
        return Ok(MultiVectorField::zero(m, deg));
    }
    let r = curvature(pi, conn)?;
    let perms = permutations(deg);
    let comps = increasing_tuples(m, deg)
        .into_iter()
        .map(|idx| {
            let terms = perms
                .iter()
                .map(|(p, sign)| {
                    let mats: Vec<_> = (0..k).map(|s| curvature_matrix(&r, idx[p[2 * s]], idx[p[2 * s + 1]])).collect();
                    Ok(Expr::constant(*sign) * sigma_polarized(&mats)?)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((idx, Expr::add_all(terms)))
        })
        .collect::<Result<Vec<_>>>()?;
    MultiVectorField::from_components(m, deg, comps)
}

fn max_curvature(pi: &PoissonStructure, conn: &ConnectionSymbols, samples: &[Vec<f64>]) -> Result<f64> {
    Ok(curvature(pi, conn)?.max_abs_over(samples)?)
}

/// Secondary class
/// `λ(Γ¹, Γ⁰)(P_k)(α_1..α_{2k−1}) = k Σ_{σ} sign(σ) ∫₀¹ P_k(Λ^{1,0}(α_{σ1}), Ξ^t(α_{σ2}, α_{σ3}), …) dt`
/// with `Γ^t = tΓ¹ + (1 − t)Γ⁰` and `Ξ^t` its curvature. Even `k` requires both
/// connections to be flat.
pub fn secondary_class(pi: &PoissonStructure, conn1: &ConnectionSymbols, conn0: &ConnectionSymbols, k: usize) -> Result<MultiVectorField> {
    let m = pi.dim();
    for c in [conn1, conn0] {
        if c.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: c.dim() });
        }
    }
    if k == 0 {
        return Err(Error::Invalid("k must be positive".into()));
    }
    let deg = 2 * k - 1;
    if deg > m {
        return Ok(MultiVectorField::zero(m, deg));
    }
    if k % 2 == 0 {
        let samples = sample_points(&Region::cube(m), 32, 0);
        let worst = max_curvature(pi, conn1, &samples)?.max(max_curvature(pi, conn0, &samples)?);
        if worst > FLATNESS_TOLERANCE {
            return Err(Error::NotFlat(worst));
        }
    }
    let diff = conn1.minus(conn0);
    let lambdas: Vec<_> = (0..m).map(|a| connection_matrix(&diff, m, a)).collect();
    let perms = permutations(deg);
    let nodes = gauss_legendre(k + 1);
    let curvatures = if k == 1 {
        Vec::new()
    } else {
        nodes.iter().map(|&(t, _)| curvature(pi, &conn1.interpolate(conn0, t))).collect::<Result<Vec<_>>>()?
    };
    let comps = increasing_tuples(m, deg)
        .into_iter()
        .map(|idx| {
            let mut terms = Vec::new();
            for (node, &(_, w)) in nodes.iter().enumerate() {
                for (p, sign) in &perms {
                    let mut mats = vec![lambdas[idx[p[0]]].clone()];
                    for s in 0..k - 1 {
                        mats.push(curvature_matrix(&curvatures[node], idx[p[2 * s + 1]], idx[p[2 * s + 2]]));
                    }
                    terms.push(Expr::constant(sign * w * k as f64) * sigma_polarized(&mats)?);
                }
            }
            Ok((idx, Expr::add_all(terms)))
        })
        .collect::<Result<Vec<_>>>()?;
    MultiVectorField::from_components(m, deg, comps)
}

/// `(1/2π) Σ_j ∂_j π^{ij} ∂_i`, the first class with a flat reference connection.
pub fn m1_euclidean(pi: &PoissonStructure) -> MultiVectorField {
    let m = pi.dim();
    let c = Expr::constant(1.0 / (2.0 * PI));
    MultiVectorField::vector((0..m).map(|i| &c * Expr::add_all((0..m).map(|j| pi.pi(i, j).d(j)))).collect())
}

/// Measured ratio `secondary_class / lie_poisson_mk` for the canonical and flat
/// connections on a Lie-Poisson chart. `None` where no fixture has a nonzero class.
pub fn lie_poisson_ratio(k: usize) -> Option<f64> {
    match k {
        1 => Some(1.0),
        2 => Some(1.0 / 6.0),
        _ => None,
    }
}

/// `m_k(𝔤*)(v_1..v_{2k−1}) = (2π)^{−k} Σ_σ sign(σ) K_k(v_{σ1}, [v_{σ2}, v_{σ3}], …)` on basis vectors.
pub fn lie_poisson_mk(g: &LieAlgebra, k: usize) -> MultiVectorField {
    let n = g.dim();
    assert!(k > 0, "k must be positive");
    let deg = 2 * k - 1;
    if deg > n {
        return MultiVectorField::zero(n, deg);
    }
    let basis = |i: usize| -> Vec<f64> { (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
    let perms = permutations(deg);
    let norm = (2.0 * PI).powi(k as i32);
    let comps = increasing_tuples(n, deg).into_iter().map(|idx| {
        let mut total = 0.0;
        for (p, sign) in &perms {
            let mut vs = vec![basis(idx[p[0]])];
            for s in 0..k - 1 {
                vs.push(g.bracket(&basis(idx[p[2 * s + 1]]), &basis(idx[p[2 * s + 2]])));
            }
            total += sign * k_form(g, &vs);
        }
        (idx, Expr::constant(total / norm))
    });
    MultiVectorField::from_components(n, deg, comps).expect("increasing tuples")
}

/// Residual of `λ(D¹, D⁰)(tr) = v_μ` with `D¹` canonical, `D⁰` induced by the
/// Levi-Civita connection of `g` and `μ = √det g · dx`, maximized over
/// `samples` and basis covectors.
pub fn modular_comparison(pi: &PoissonStructure, g: &Metric, samples: &[Vec<f64>]) -> Result<f64> {
    let m = pi.dim();
    g.check_positive(samples)?;
    let d1 = canonical_poisson_connection(pi);
    let d0 = levi_civita_contra(pi, g)?;
    let sec = secondary_class(pi, &d1, &d0, 1)?.to_vec();
    let mu = DensityField::new(g.det().sqrt());
    let v = pi.modular_vector_field(&mu, samples)?.to_vec();
    let two_pi = 2.0 * PI;
    let mut worst = 0.0f64;
    for p in samples {
        for i in 0..m {
            let lhs = two_pi * sec[i].eval_at(p)?;
            let rhs = v[i].eval_at(p)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}
