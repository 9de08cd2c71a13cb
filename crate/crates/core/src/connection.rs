//! Linear contravariant connections given by Christoffel symbols.
//!
//! `Γ^{ij}_k` is defined by `D_{dx^i} dx^j = Γ^{ij}_k dx^k`. Contracting with the
//! anchor gives, for a tensor field of type `(r, s)`,
//!
//! ```text
//! (D_α K)^I_J = π^{kl} α_k ∂_l K^I_J − Σ_a Γ^{k i_a}_l α_k K^{..l..}_J + Σ_b Γ^{kl}_{j_b} α_k K^I_{..l..}
//! ```

use std::collections::BTreeMap;

use crate::expr::{EvalError, Expr};
use crate::matrix::SquareMatrix;
use crate::multivec::{symbolic_det, PoissonStructure};
use crate::{Error, Result};

/// Dense tensor field of type `(r, s)`; contravariant indices come first in
/// the flattened row-major layout.
#[derive(Clone, Debug)]
pub struct TensorField {
    dim: usize,
    contra: usize,
    co: usize,
    comps: Vec<Expr>,
}

impl TensorField {
    pub fn zeros(dim: usize, contra: usize, co: usize) -> Self {
        TensorField { dim, contra, co, comps: vec![Expr::zero(); dim.pow((contra + co) as u32)] }
    }

    pub fn from_fn(dim: usize, contra: usize, co: usize, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let n = contra + co;
        let comps = (0..dim.pow(n as u32)).map(|flat| f(&unflatten(flat, dim, n))).collect();
        TensorField { dim, contra, co, comps }
    }

    pub fn one_form(comps: Vec<Expr>) -> Self {
        TensorField { dim: comps.len(), contra: 0, co: 1, comps }
    }

    pub fn vector(comps: Vec<Expr>) -> Self {
        TensorField { dim: comps.len(), contra: 1, co: 0, comps }
    }

    /// The bivector `Π` as a `(2, 0)` tensor.
    pub fn from_poisson(pi: &PoissonStructure) -> Self {
        Self::from_fn(pi.dim(), 2, 0, |ix| pi.pi(ix[0], ix[1]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(r, s)`.
    pub fn rank(&self) -> (usize, usize) {
        (self.contra, self.co)
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.comps[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Expr) {
        let f = self.flat(idx);
        self.comps[f] = value;
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    fn flat(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.contra + self.co, "wrong number of indices");
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        TensorField { comps: self.comps.iter().map(f).collect(), ..self.clone() }
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.map(|e| s * e)
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(&Expr, &Expr) -> Expr) -> Self {
        assert_eq!(self.rank(), other.rank(), "tensor ranks differ");
        assert_eq!(self.dim, other.dim, "tensor dimensions differ");
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect();
        TensorField { comps, ..self.clone() }
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.comps.iter().map(|e| e.eval_at(point)).collect()
    }

    pub fn max_abs_over(&self, points: &[Vec<f64>]) -> Result<f64, EvalError> {
        let mut m = 0.0f64;
        for p in points {
            for e in &self.comps {
                if !e.is_zero() {
                    m = m.max(e.eval_at(p)?.abs());
                }
            }
        }
        Ok(m)
    }
}

fn unflatten(mut flat: usize, dim: usize, n: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for slot in (0..n).rev() {
        idx[slot] = flat % dim;
        flat /= dim;
    }
    idx
}

/// How a set of symbols was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionKind {
    CanonicalPoisson,
    Flat,
    LeviCivita,
    Explicit,
}

impl ConnectionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConnectionKind::CanonicalPoisson => "canonical_poisson",
            ConnectionKind::Flat => "flat",
            ConnectionKind::LeviCivita => "levi_civita",
            ConnectionKind::Explicit => "explicit",
        }
    }
}

/// Christoffel symbols `Γ^{ij}_k`, stored at `i·m² + j·m + k`.
#[derive(Clone, Debug)]
pub struct ConnectionSymbols {
    dim: usize,
    symbols: Vec<Expr>,
    kind: ConnectionKind,
}

impl ConnectionSymbols {
    pub fn new(dim: usize, symbols: Vec<Expr>, kind: ConnectionKind) -> Result<Self> {
        if symbols.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, found: symbols.len() });
        }
        if let Some(c) = symbols.iter().filter_map(Expr::max_coord).max() {
            if c >= dim {
                return Err(Error::Index(format!("x{} used in a {dim}-dimensional chart", c + 1)));
            }
        }
        Ok(ConnectionSymbols { dim, symbols, kind })
    }

    pub fn from_fn(dim: usize, kind: ConnectionKind, mut f: impl FnMut(usize, usize, usize) -> Expr) -> Self {
        let mut symbols = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    symbols.push(f(i, j, k));
                }
            }
        }
        ConnectionSymbols { dim, symbols, kind }
    }

    /// Sparse explicit symbols `(i, j, k, Γ^{ij}_k)`, 0-based.
    pub fn explicit<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, Expr)>,
    {
        let mut symbols = vec![Expr::zero(); dim * dim * dim];
        for (i, j, k, e) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Index(format!("symbol ({}, {}, {}) out of range for dimension {dim}", i + 1, j + 1, k + 1)));
            }
            symbols[(i * dim + j) * dim + k] = e;
        }
        Self::new(dim, symbols, ConnectionKind::Explicit)
    }

    pub fn flat(dim: usize) -> Self {
        Self::from_fn(dim, ConnectionKind::Flat, |_, _, _| Expr::zero())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.symbols[(i * self.dim + j) * self.dim + k]
    }

    pub fn symbols(&self) -> &[Expr] {
        &self.symbols
    }

    /// Nonzero symbols as `(i, j, k, Γ^{ij}_k)`.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, &Expr)> {
        let m = self.dim;
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(f, e)| (f / (m * m), (f / m) % m, f % m, e))
            .collect()
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.symbols.iter().map(|e| e.eval_at(point)).collect()
    }

    /// `t·self + (1 − t)·other`, an explicit connection.
    pub fn interpolate(&self, other: &Self, t: f64) -> Self {
        let (a, b) = (Expr::constant(t), Expr::constant(1.0 - t));
        let symbols = self.symbols.iter().zip(&other.symbols).map(|(x, y)| &a * x + &b * y).collect();
        ConnectionSymbols { dim: self.dim, symbols, kind: ConnectionKind::Explicit }
    }

    pub fn minus(&self, other: &Self) -> Vec<Expr> {
        self.symbols.iter().zip(&other.symbols).map(|(x, y)| x - y).collect()
    }
}

/// Symmetric metric `g_ij`.
#[derive(Clone, Debug)]
pub struct Metric {
    g: SquareMatrix<Expr>,
}

impl Metric {
    /// Upper-triangular entries `(i, j, g_ij)` with `i ≤ j`, 0-based.
    pub fn from_upper<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Expr)>,
    {
        let mut g = SquareMatrix::zeros(dim);
        for (i, j, e) in entries {
            if i > j || j >= dim {
                return Err(Error::Index(format!("metric entry ({}, {}) must satisfy i<=j<=dim", i + 1, j + 1)));
            }
            if let Some(c) = e.max_coord() {
                if c >= dim {
                    return Err(Error::Index(format!("x{} used in a {dim}-dimensional chart", c + 1)));
                }
            }
            g.set(j, i, e.clone());
            g.set(i, j, e);
        }
        Ok(Metric { g })
    }

    pub fn euclidean(dim: usize) -> Self {
        Metric { g: SquareMatrix::identity(dim) }
    }

    pub fn diagonal(entries: Vec<Expr>) -> Self {
        let n = entries.len();
        Metric { g: SquareMatrix::from_fn(n, |i, j| if i == j { entries[i].clone() } else { Expr::zero() }) }
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn g(&self, i: usize, j: usize) -> &Expr {
        self.g.get(i, j)
    }

    pub fn det(&self) -> Expr {
        symbolic_det(&self.g)
    }

    /// Symbolic inverse by cofactors.
    pub fn inverse(&self) -> SquareMatrix<Expr> {
        let n = self.dim();
        let det = self.det();
        SquareMatrix::from_fn(n, |i, j| {
            // (g^{-1})_{ij} = C_{ji} / det
            let minor = SquareMatrix::from_fn(n - 1, |a, b| {
                let r = if a < j { a } else { a + 1 };
                let c = if b < i { b } else { b + 1 };
                self.g.get(r, c).clone()
            });
            let cof = if n == 1 { Expr::one() } else { symbolic_det(&minor) };
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            cof.div_expr(&det)
        })
    }

    /// Fails with [`Error::IndefiniteMetric`] unless `g` is positive definite at every sample.
    pub fn check_positive(&self, samples: &[Vec<f64>]) -> Result<()> {
        for p in samples {
            let g = self.g.eval(p)?.to_nalgebra();
            if g.cholesky().is_none() {
                return Err(Error::IndefiniteMetric { point: p.clone() });
            }
        }
        Ok(())
    }

    /// Covariant Levi-Civita symbols `Γ^j_{lk}` stored at `[j][l][k]`.
    pub fn christoffel(&self) -> Vec<Expr> {
        let n = self.dim();
        let inv = self.inverse();
        let mut out = Vec::with_capacity(n * n * n);
        for j in 0..n {
            for l in 0..n {
                for k in 0..n {
                    let terms = (0..n).map(|r| {
                        let inner = self.g(r, k).d(l) + self.g(r, l).d(k) - self.g(l, k).d(r);
                        if inner.is_zero() {
                            Expr::zero()
                        } else {
                            inv.get(j, r) * inner
                        }
                    });
                    out.push(Expr::constant(0.5) * Expr::add_all(terms));
                }
            }
        }
        out
    }
}

fn check_dims(pi: &PoissonStructure, conn: &ConnectionSymbols) -> Result<()> {
    if pi.dim() != conn.dim() {
        return Err(Error::DimensionMismatch { expected: pi.dim(), found: conn.dim() });
    }
    Ok(())
}

/// Contravariant derivative `D_α K` of a tensor field of any type.
pub fn contra_derivative(pi: &PoissonStructure, conn: &ConnectionSymbols, alpha: &[Expr], k: &TensorField) -> Result<TensorField> {
    check_dims(pi, conn)?;
    let m = pi.dim();
    if alpha.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: alpha.len() });
    }
    if k.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: k.dim() });
    }
    let (r, s) = k.rank();
    let anchor = pi.sharp_components(alpha);
    // A^{i}_{l} = Γ^{k i}_l α_k, the connection matrix along α
    let mut a: BTreeMap<(usize, usize), Expr> = BTreeMap::new();
    for (kk, i, l, g) in conn.nonzero() {
        if alpha[kk].is_zero() {
            continue;
        }
        let term = g * &alpha[kk];
        a.entry((i, l)).and_modify(|e| *e = &*e + &term).or_insert(term);
    }
    Ok(TensorField::from_fn(m, r, s, |idx| {
        let base = k.get(idx);
        let mut terms: Vec<Expr> =
            (0..m).filter(|&l| !anchor[l].is_zero()).map(|l| &anchor[l] * base.d(l)).collect();
        let mut sub = idx.to_vec();
        for slot in 0..r + s {
            for (&(i, l), coeff) in &a {
                // contravariant slots read Γ^{k i_a}_l, covariant slots Γ^{k l}_{j_b}
                let (target, source) = if slot < r { (i, l) } else { (l, i) };
                if idx[slot] != target {
                    continue;
                }
                sub[slot] = source;
                let v = k.get(&sub);
                if !v.is_zero() {
                    terms.push(if slot < r { -(coeff * v) } else { coeff * v });
                }
                sub[slot] = idx[slot];
            }
        }
        Expr::add_all(terms)
    }))
}

/// `T^{ij}_k = Γ^{ij}_k − Γ^{ji}_k − ∂_k π^{ij}`.
pub fn torsion(pi: &PoissonStructure, conn: &ConnectionSymbols) -> Result<TensorField> {
    check_dims(pi, conn)?;
    Ok(TensorField::from_fn(pi.dim(), 2, 1, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        conn.gamma(i, j, k) - conn.gamma(j, i, k) - pi.pi(i, j).d(k)
    }))
}

/// `R^{ijk}_l = Γ^{ir}_l Γ^{jk}_r − Γ^{jr}_l Γ^{ik}_r + π^{ir} ∂_r Γ^{jk}_l − π^{jr} ∂_r Γ^{ik}_l − ∂_r π^{ij} Γ^{rk}_l`,
/// so that `R(α, β)γ = α_i β_j γ_k R^{ijk}_l dx^l`.
pub fn curvature(pi: &PoissonStructure, conn: &ConnectionSymbols) -> Result<TensorField> {
    check_dims(pi, conn)?;
    let m = pi.dim();
    Ok(TensorField::from_fn(m, 3, 1, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let mut terms = Vec::new();
        for r in 0..m {
            terms.push(conn.gamma(i, r, l) * conn.gamma(j, k, r));
            terms.push(-(conn.gamma(j, r, l) * conn.gamma(i, k, r)));
            terms.push(pi.pi(i, r) * conn.gamma(j, k, l).d(r));
            terms.push(-(pi.pi(j, r) * conn.gamma(i, k, l).d(r)));
            terms.push(-(pi.pi(i, j).d(r) * conn.gamma(r, k, l)));
        }
        Expr::add_all(terms)
    }))
}

fn derivative_of_form(pi: &PoissonStructure, conn: &ConnectionSymbols, alpha: &[Expr], beta: &[Expr]) -> Result<Vec<Expr>> {
    Ok(contra_derivative(pi, conn, alpha, &TensorField::one_form(beta.to_vec()))?.components().to_vec())
}

/// `T(α, β) = D_α β − D_β α − [α, β]`.
pub fn torsion_operator(pi: &PoissonStructure, conn: &ConnectionSymbols, alpha: &[Expr], beta: &[Expr]) -> Result<Vec<Expr>> {
    let ab = derivative_of_form(pi, conn, alpha, beta)?;
    let ba = derivative_of_form(pi, conn, beta, alpha)?;
    let br = pi.koszul_components(alpha, beta);
    Ok((0..pi.dim()).map(|k| &ab[k] - &ba[k] - &br[k]).collect())
}

/// `R(α, β)γ = D_α D_β γ − D_β D_α γ − D_{[α,β]} γ`.
pub fn curvature_operator(
    pi: &PoissonStructure,
    conn: &ConnectionSymbols,
    alpha: &[Expr],
    beta: &[Expr],
    gamma: &[Expr],
) -> Result<Vec<Expr>> {
    let bg = derivative_of_form(pi, conn, beta, gamma)?;
    let ag = derivative_of_form(pi, conn, alpha, gamma)?;
    let abg = derivative_of_form(pi, conn, alpha, &bg)?;
    let bag = derivative_of_form(pi, conn, beta, &ag)?;
    let br = pi.koszul_components(alpha, beta);
    let brg = derivative_of_form(pi, conn, &br, gamma)?;
    Ok((0..pi.dim()).map(|l| &abg[l] - &bag[l] - &brg[l]).collect())
}

/// `*Γ^{ij}_k = ½(Γ^{ij}_k + Γ^{ji}_k + ∂_k π^{ij})`: torsion-free, same geodesics.
pub fn symmetrize(pi: &PoissonStructure, conn: &ConnectionSymbols) -> Result<ConnectionSymbols> {
    check_dims(pi, conn)?;
    let half = Expr::constant(0.5);
    Ok(ConnectionSymbols::from_fn(pi.dim(), ConnectionKind::Explicit, |i, j, k| {
        &half * (conn.gamma(i, j, k) + conn.gamma(j, i, k) + pi.pi(i, j).d(k))
    }))
}

/// `Γ^{ij}_k = ∂_k π^{ij}`, i.e. `D_{dx^i} β = [dx^i, β]`.
pub fn canonical_poisson_connection(pi: &PoissonStructure) -> ConnectionSymbols {
    ConnectionSymbols::from_fn(pi.dim(), ConnectionKind::CanonicalPoisson, |i, j, k| pi.pi(i, j).d(k))
}

/// Contravariant connection `D_α = ∇_{#α}` induced by the Levi-Civita
/// connection of `g`: `Γ^{ij}_k = −π^{il} Γ^j_{lk}`.
pub fn levi_civita_contra(pi: &PoissonStructure, g: &Metric) -> Result<ConnectionSymbols> {
    let m = pi.dim();
    if g.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: g.dim() });
    }
    let chr = g.christoffel();
    Ok(ConnectionSymbols::from_fn(m, ConnectionKind::LeviCivita, |i, j, k| {
        -Expr::add_all((0..m).filter(|&l| l != i).map(|l| pi.pi(i, l) * &chr[(j * m + l) * m + k]))
    }))
}

/// `(DΠ)^{kij} = (D_{dx^k} Π)^{ij}`; vanishes exactly for Poisson connections.
pub fn d_pi_residual(pi: &PoissonStructure, conn: &ConnectionSymbols) -> Result<TensorField> {
    let m = pi.dim();
    let bivector = TensorField::from_poisson(pi);
    let mut out = TensorField::zeros(m, 3, 0);
    for k in 0..m {
        let mut alpha = vec![Expr::zero(); m];
        alpha[k] = Expr::one();
        let d = contra_derivative(pi, conn, &alpha, &bivector)?;
        for i in 0..m {
            for j in 0..m {
                out.set(&[k, i, j], d.get(&[i, j]).clone());
            }
        }
    }
    Ok(out)
}

/// Rewrites a Poisson tensor and connection in new coordinates `y = y(x)`.
///
/// `y_of_x` gives `y^l` in terms of `x`, `x_of_y` the inverse map in terms of `y`.
/// The symbols transform as
/// `Γ̃^{lm}_n = ∂_i y^l ∂_j y^m Γ^{ij}_k ∂x^k/∂y^n + ∂_i y^l π^{ik} ∂_k ∂_j y^m ∂x^j/∂y^n`.
pub fn change_coordinates(
    pi: &PoissonStructure,
    conn: &ConnectionSymbols,
    y_of_x: &[Expr],
    x_of_y: &[Expr],
) -> Result<(PoissonStructure, ConnectionSymbols)> {
    let m = pi.dim();
    check_dims(pi, conn)?;
    if y_of_x.len() != m || x_of_y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: y_of_x.len().min(x_of_y.len()) });
    }
    let dy: Vec<Vec<Expr>> = y_of_x.iter().map(|y| (0..m).map(|i| y.d(i)).collect()).collect();
    let dx: Vec<Vec<Expr>> = x_of_y.iter().map(|x| (0..m).map(|n| x.d(n)).collect()).collect();
    let pull = |e: Expr| e.substitute(x_of_y);

    let mut comps = Vec::new();
    for l in 0..m {
        for mm in l + 1..m {
            let mut terms = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        terms.push(Expr::mul_all([dy[l][i].clone(), dy[mm][j].clone(), pi.pi(i, j)]));
                    }
                }
            }
            comps.push((l, mm, pull(Expr::add_all(terms))));
        }
    }
    let new_pi = PoissonStructure::new(m, comps)?;

    // x-dependent factors are pulled back before multiplying by ∂x/∂y, which is already in y
    let new_conn = ConnectionSymbols::from_fn(m, ConnectionKind::Explicit, |l, mm, n| {
        let mut terms = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let outer = &dy[l][i] * &dy[mm][j];
                if outer.is_zero() {
                    continue;
                }
                for k in 0..m {
                    let g = conn.gamma(i, j, k);
                    if !g.is_zero() && !dx[k][n].is_zero() {
                        terms.push(pull(&outer * g) * &dx[k][n]);
                    }
                }
            }
        }
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    let second = dy[mm][j].d(k);
                    if second.is_zero() || i == k || dx[j][n].is_zero() {
                        continue;
                    }
                    terms.push(pull(Expr::mul_all([dy[l][i].clone(), pi.pi(i, k), second])) * &dx[j][n]);
                }
            }
        }
        Expr::add_all(terms)
    });
    Ok((new_pi, new_conn))
}
