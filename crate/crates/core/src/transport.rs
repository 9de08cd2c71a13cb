//! Geodesics, parallel transport, holonomy and line integrals along cotangent paths.
//!
//! All integrations use fixed-step classical RK4. From `D_{dx^i} dx^j = Γ^{ij}_k dx^k`:
//!
//! * geodesics: `ẋ^i = π^{ji} α_j`, `α̇_i = −Γ^{jk}_i α_j α_k`;
//! * covector transport along `(γ, α)`: `β̇_i = −Γ^{kl}_i(γ) α_k β_l`.
//!
//! Holonomy matrices act on covector components; column `j` is the transport of `dx^j`.

use crate::connection::ConnectionSymbols;
use crate::expr::{EvalError, Expr, Var};
use crate::matrix::SquareMatrix;
use crate::multivec::{MultiVectorField, PoissonStructure};
use crate::{Error, Result};

/// Compatibility threshold for cotangent paths.
pub const COTANGENT_TOLERANCE: f64 = 1e-8;
/// Grid used when measuring the compatibility residual.
pub const RESIDUAL_GRID: usize = 201;
/// Allowed gap between the endpoints of a loop.
pub const CLOSURE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntegratorConfig {
    pub steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { steps: 1000 }
    }
}

impl IntegratorConfig {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Invalid("integrator steps must be at least 1".into()));
        }
        Ok(IntegratorConfig { steps })
    }
}

/// One smooth piece `(γ(t), α(t))`, `t ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct PathLeg {
    pub gamma: Vec<Expr>,
    pub alpha: Vec<Expr>,
}

/// A piecewise smooth cotangent path; legs are traversed in order, each over
/// its own copy of `[0, 1]`.
#[derive(Clone, Debug)]
pub struct CotangentPath {
    dim: usize,
    legs: Vec<PathLeg>,
}

impl CotangentPath {
    pub fn new(gamma: Vec<Expr>, alpha: Vec<Expr>) -> Result<Self> {
        let dim = gamma.len();
        if alpha.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: alpha.len() });
        }
        for e in gamma.iter().chain(&alpha) {
            if let Some(c) = e.max_coord() {
                return Err(Error::Invalid(format!("path components depend on t only (found x{})", c + 1)));
            }
        }
        Ok(CotangentPath { dim, legs: vec![PathLeg { gamma, alpha }] })
    }

    /// Parse component strings in `t`.
    pub fn parse(gamma: &[&str], alpha: &[&str]) -> Result<Self> {
        let dim = gamma.len();
        let p = |s: &&str| crate::parse_expr(s, dim, true).map_err(Error::from);
        Self::new(gamma.iter().map(p).collect::<Result<_>>()?, alpha.iter().map(p).collect::<Result<_>>()?)
    }

    /// Constant loop `(x, α)`.
    pub fn constant(point: &[f64], alpha: &[f64]) -> Result<Self> {
        Self::new(
            point.iter().map(|&v| Expr::constant(v)).collect(),
            alpha.iter().map(|&v| Expr::constant(v)).collect(),
        )
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if next.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: next.dim });
        }
        let mut legs = self.legs.clone();
        legs.extend(next.legs.iter().cloned());
        Ok(CotangentPath { dim: self.dim, legs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn legs(&self) -> &[PathLeg] {
        &self.legs
    }

    pub fn start(&self) -> Result<Vec<f64>> {
        eval_at_t(&self.legs[0].gamma, 0.0)
    }

    pub fn end(&self) -> Result<Vec<f64>> {
        eval_at_t(&self.legs[self.legs.len() - 1].gamma, 1.0)
    }

    /// `|γ(1) − γ(0)|`.
    pub fn closure_gap(&self) -> Result<f64> {
        let (a, b) = (self.start()?, self.end()?);
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
    }
}

fn eval_at_t(exprs: &[Expr], t: f64) -> Result<Vec<f64>> {
    exprs.iter().map(|e| e.eval(&[], Some(t)).map_err(|source| Error::EvalAt { t, source })).collect()
}

fn located(t: f64) -> impl FnOnce(EvalError) -> Error {
    move |source| Error::EvalAt { t, source }
}

/// Numeric snapshot of the connection data at a point.
struct Frame {
    pi: Vec<Vec<f64>>,
    // (i, j, k, Γ^{ij}_k)
    gamma: Vec<(usize, usize, usize, f64)>,
}

struct Evaluator<'a> {
    pi: &'a PoissonStructure,
    conn_terms: Vec<(usize, usize, usize, &'a Expr)>,
}

impl<'a> Evaluator<'a> {
    fn new(pi: &'a PoissonStructure, conn: &'a ConnectionSymbols) -> Result<Self> {
        if pi.dim() != conn.dim() {
            return Err(Error::DimensionMismatch { expected: pi.dim(), found: conn.dim() });
        }
        Ok(Evaluator { pi, conn_terms: conn.nonzero() })
    }

    fn frame(&self, x: &[f64], t: f64) -> Result<Frame> {
        let pi = self.pi.eval(x).map_err(located(t))?;
        let gamma = self
            .conn_terms
            .iter()
            .map(|&(i, j, k, e)| Ok((i, j, k, e.eval_at(x).map_err(located(t))?)))
            .collect::<Result<_>>()?;
        Ok(Frame { pi, gamma })
    }
}

fn rk4_step<F>(t: f64, h: f64, y: &[f64], f: &mut F) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: f64, k: &[f64]| y.iter().zip(k).map(|(y, k)| y + a * k).collect::<Vec<_>>();
    let k1 = f(t, y)?;
    let k2 = f(t + h / 2.0, &axpy(h / 2.0, &k1))?;
    let k3 = f(t + h / 2.0, &axpy(h / 2.0, &k2))?;
    let k4 = f(t + h, &axpy(h, &k3))?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Sampled geodesic `(x(t), α(t))` on the step grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn end_point(&self) -> (&[f64], &[f64]) {
        (self.x.last().expect("nonempty"), self.alpha.last().expect("nonempty"))
    }
}

/// Integrates the geodesic system from `(x0, α0)` over `[0, T]`.
pub fn integrate_geodesic(
    pi: &PoissonStructure,
    conn: &ConnectionSymbols,
    x0: &[f64],
    alpha0: &[f64],
    t_end: f64,
    cfg: IntegratorConfig,
) -> Result<Trajectory> {
    let m = pi.dim();
    for v in [x0, alpha0] {
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: v.len() });
        }
    }
    let ev = Evaluator::new(pi, conn)?;
    let mut rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (x, a) = y.split_at(m);
        let fr = ev.frame(x, t)?;
        let mut out = vec![0.0; 2 * m];
        for i in 0..m {
            out[i] = (0..m).map(|j| fr.pi[j][i] * a[j]).sum();
        }
        for &(j, k, i, g) in &fr.gamma {
            out[m + i] -= g * a[j] * a[k];
        }
        Ok(out)
    };
    let h = t_end / cfg.steps as f64;
    let mut y: Vec<f64> = x0.iter().chain(alpha0).copied().collect();
    let mut traj = Trajectory { t: vec![0.0], x: vec![x0.to_vec()], alpha: vec![alpha0.to_vec()] };
    for n in 0..cfg.steps {
        let t = n as f64 * h;
        y = rk4_step(t, h, &y, &mut rhs)?;
        traj.t.push(if n + 1 == cfg.steps { t_end } else { (n + 1) as f64 * h });
        traj.x.push(y[..m].to_vec());
        traj.alpha.push(y[m..].to_vec());
    }
    Ok(traj)
}

/// Maximum of `|γ̇^i(t) − π^{ji}(γ(t)) α_j(t)|` over a uniform grid of each leg.
pub fn check_cotangent(pi: &PoissonStructure, path: &CotangentPath) -> Result<f64> {
    let m = pi.dim();
    if path.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: path.dim() });
    }
    let mut worst = 0.0f64;
    for leg in path.legs() {
        let velocity: Vec<Expr> = leg.gamma.iter().map(|g| g.diff(Var::T)).collect();
        for n in 0..RESIDUAL_GRID {
            let t = n as f64 / (RESIDUAL_GRID - 1) as f64;
            let x = eval_at_t(&leg.gamma, t)?;
            let a = eval_at_t(&leg.alpha, t)?;
            let v = eval_at_t(&velocity, t)?;
            let p = pi.eval(&x).map_err(located(t))?;
            for i in 0..m {
                let sharp: f64 = (0..m).map(|j| p[j][i] * a[j]).sum();
                worst = worst.max((v[i] - sharp).abs());
            }
        }
    }
    Ok(worst)
}

fn require_cotangent(pi: &PoissonStructure, path: &CotangentPath) -> Result<f64> {
    let residual = check_cotangent(pi, path)?;
    if !(residual <= COTANGENT_TOLERANCE) {
        return Err(Error::NotCotangent { residual, tolerance: COTANGENT_TOLERANCE });
    }
    Ok(residual)
}

/// Transport matrix along the path without the compatibility check.
fn transport_matrix(pi: &PoissonStructure, conn: &ConnectionSymbols, path: &CotangentPath, cfg: IntegratorConfig) -> Result<SquareMatrix<f64>> {
    let m = pi.dim();
    let ev = Evaluator::new(pi, conn)?;
    // row-major state B, dB/dt = −A(t) B with A_{il} = Γ^{kl}_i α_k
    let mut state: Vec<f64> = SquareMatrix::<f64>::identity(m).to_rows().concat();
    for leg in path.legs() {
        let mut rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
            let x = eval_at_t(&leg.gamma, t)?;
            let a = eval_at_t(&leg.alpha, t)?;
            let fr = ev.frame(&x, t)?;
            let mut gen = vec![0.0; m * m];
            for &(k, l, i, g) in &fr.gamma {
                gen[i * m + l] += g * a[k];
            }
            let mut out = vec![0.0; m * m];
            for i in 0..m {
                for l in 0..m {
                    let c = gen[i * m + l];
                    if c != 0.0 {
                        for j in 0..m {
                            out[i * m + j] -= c * y[l * m + j];
                        }
                    }
                }
            }
            Ok(out)
        };
        let h = 1.0 / cfg.steps as f64;
        for n in 0..cfg.steps {
            state = rk4_step(n as f64 * h, h, &state, &mut rhs)?;
        }
    }
    Ok(SquareMatrix::from_fn(m, |i, j| state[i * m + j]))
}

/// Parallel transport of the covector `β0` along a cotangent path.
pub fn parallel_transport_covector(
    pi: &PoissonStructure,
    conn: &ConnectionSymbols,
    path: &CotangentPath,
    beta0: &[f64],
    cfg: IntegratorConfig,
) -> Result<Vec<f64>> {
    let m = pi.dim();
    if beta0.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: beta0.len() });
    }
    require_cotangent(pi, path)?;
    let h = transport_matrix(pi, conn, path, cfg)?;
    Ok((0..m).map(|i| (0..m).map(|j| h.get(i, j) * beta0[j]).sum()).collect())
}

#[derive(Clone, Debug)]
pub struct HolonomyResult {
    /// Transport map on covector components.
    pub matrix: SquareMatrix<f64>,
    pub determinant: f64,
    pub path_residual: f64,
    pub steps: usize,
}

impl HolonomyResult {
    /// The contragredient `H^{-T}`, the induced map on vectors.
    pub fn normal_matrix(&self) -> Option<SquareMatrix<f64>> {
        let inv = self.matrix.to_nalgebra().try_inverse()?;
        let n = self.matrix.dim();
        Some(SquareMatrix::from_fn(n, |i, j| inv[(j, i)]))
    }
}

/// Holonomy of a cotangent loop: covector transport of the full basis.
pub fn linear_holonomy(pi: &PoissonStructure, conn: &ConnectionSymbols, path: &CotangentPath, cfg: IntegratorConfig) -> Result<HolonomyResult> {
    let gap = path.closure_gap()?;
    if !(gap <= CLOSURE_TOLERANCE) {
        return Err(Error::OpenPath { gap });
    }
    let path_residual = require_cotangent(pi, path)?;
    let matrix = transport_matrix(pi, conn, path, cfg)?;
    let determinant = matrix.to_nalgebra().determinant();
    Ok(HolonomyResult { matrix, determinant, path_residual, steps: cfg.steps * path.legs().len() })
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub endpoint: Vec<f64>,
    /// Central-difference Jacobian of the time-one map, `J[i][j] = ∂u^i(1)/∂u_0^j`.
    pub jacobian: SquareMatrix<f64>,
}

/// Step used for the flow Jacobian.
pub const FLOW_FD_STEP: f64 = 1e-5;

/// Time-one flow of `u̇ = #_u α(t)` near a zero-dimensional leaf at the origin.
pub fn zero_leaf_holonomy_flow(pi: &PoissonStructure, alpha: &[Expr], u0: &[f64], cfg: IntegratorConfig) -> Result<FlowResult> {
    let m = pi.dim();
    if alpha.len() != m || u0.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: if alpha.len() != m { alpha.len() } else { u0.len() } });
    }
    let at_origin = pi.eval(&vec![0.0; m])?;
    let worst = at_origin.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if worst > 1e-12 {
        return Err(Error::NotZeroLeaf(worst));
    }
    let flow = |start: &[f64]| -> Result<Vec<f64>> {
        let mut rhs = |t: f64, u: &[f64]| -> Result<Vec<f64>> {
            let a = eval_at_t(alpha, t)?;
            let p = pi.eval(u).map_err(located(t))?;
            Ok((0..m).map(|l| (0..m).map(|k| p[k][l] * a[k]).sum()).collect())
        };
        let h = 1.0 / cfg.steps as f64;
        let mut u = start.to_vec();
        for n in 0..cfg.steps {
            u = rk4_step(n as f64 * h, h, &u, &mut rhs)?;
        }
        Ok(u)
    };
    let endpoint = flow(u0)?;
    let mut jac = SquareMatrix::zeros(m);
    for j in 0..m {
        let mut plus = u0.to_vec();
        let mut minus = u0.to_vec();
        plus[j] += FLOW_FD_STEP;
        minus[j] -= FLOW_FD_STEP;
        let (fp, fm) = (flow(&plus)?, flow(&minus)?);
        for i in 0..m {
            jac.set(i, j, (fp[i] - fm[i]) / (2.0 * FLOW_FD_STEP));
        }
    }
    Ok(FlowResult { endpoint, jacobian: jac })
}

/// `∫_{(γ,α)} X = −∫₀¹ ⟨α(t), X(γ(t))⟩ dt` by composite Simpson on each leg.
pub fn line_integral(pi: &PoissonStructure, x: &MultiVectorField, path: &CotangentPath, cfg: IntegratorConfig) -> Result<f64> {
    let m = pi.dim();
    if x.degree() != 1 || x.dim() != m {
        return Err(Error::Invalid("line integrals take a vector field".into()));
    }
    require_cotangent(pi, path)?;
    let comps = x.to_vec();
    let n = cfg.steps + cfg.steps % 2;
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for leg in path.legs() {
        let integrand = |t: f64| -> Result<f64> {
            let g = eval_at_t(&leg.gamma, t)?;
            let a = eval_at_t(&leg.alpha, t)?;
            let mut s = 0.0;
            for i in 0..m {
                if !comps[i].is_zero() {
                    s += a[i] * comps[i].eval_at(&g).map_err(located(t))?;
                }
            }
            Ok(-s)
        };
        let mut acc = integrand(0.0)? + integrand(1.0)?;
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * integrand(k as f64 * h)?;
        }
        total += acc * h / 3.0;
    }
    Ok(total)
}
