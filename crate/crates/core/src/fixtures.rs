//! Named structures used throughout the tests, the CLI and the Python bindings.

use crate::connection::{ConnectionSymbols, Metric};
use crate::expr::Expr;
use crate::multivec::PoissonStructure;

fn parse(dim: usize, comps: &[(usize, usize, &str)]) -> PoissonStructure {
    PoissonStructure::parse(dim, comps).expect("fixture is well formed")
}

fn expr(src: &str, dim: usize) -> Expr {
    crate::parse_expr(src, dim, false).expect("fixture is well formed")
}

/// `so(3)*`: `π^{12} = x3`, `π^{13} = −x2`, `π^{23} = x1`.
pub fn so3() -> PoissonStructure {
    parse(3, &[(1, 2, "x3"), (1, 3, "-x2"), (2, 3, "x1")])
}

/// `aff(1)*` with `{x1, x2} = x1`.
pub fn aff1() -> PoissonStructure {
    parse(2, &[(1, 2, "x1")])
}

/// `sl(2)*`: `π^{12} = 2x2`, `π^{13} = −2x3`, `π^{23} = x1`.
pub fn sl2() -> PoissonStructure {
    parse(3, &[(1, 2, "2*x2"), (1, 3, "-2*x3"), (2, 3, "x1")])
}

/// Dual of the solvable algebra `[e3, e1] = e1`, `[e3, e2] = e1 + e2` (`tr ad e3 = 2`).
pub fn solvable3() -> PoissonStructure {
    parse(3, &[(1, 3, "-x1"), (2, 3, "-x1 - x2")])
}

/// `(so(3) ⊕ aff(1))*` on `x1..x5`.
pub fn so3_aff1() -> PoissonStructure {
    parse(5, &[(1, 2, "x3"), (1, 3, "-x2"), (2, 3, "x1"), (4, 5, "x4")])
}

/// Symplectic plane, `π^{12} = 1`.
pub fn symplectic_r2() -> PoissonStructure {
    parse(2, &[(1, 2, "1")])
}

/// Quadratic structure `π^{12} = x1·x2`.
pub fn quadratic_r2() -> PoissonStructure {
    parse(2, &[(1, 2, "x1*x2")])
}

/// Jacobian Poisson structure `{f, g} = dC ∧ df ∧ dg / dx` with `C = x1²x2 + x3³/3`.
pub fn nambu3() -> PoissonStructure {
    parse(3, &[(1, 2, "x3^2"), (1, 3, "-x1^2"), (2, 3, "2*x1*x2")])
}

pub fn nambu3_casimir() -> Expr {
    expr("x1^2*x2 + x3^3/3", 3)
}

/// `|x|²`, the Casimir of `so(3)*`.
pub fn so3_casimir() -> Expr {
    expr("x1^2 + x2^2 + x3^2", 3)
}

/// A bivector violating Jacobi: `J^{123} = x1`.
pub fn non_jacobi() -> PoissonStructure {
    parse(3, &[(1, 2, "x3"), (1, 3, "x3"), (2, 3, "x1")])
}

/// Every built-in Poisson structure, by name.
pub fn poisson_fixtures() -> Vec<(&'static str, PoissonStructure)> {
    vec![
        ("so3", so3()),
        ("aff1", aff1()),
        ("sl2", sl2()),
        ("solvable3", solvable3()),
        ("so3_aff1", so3_aff1()),
        ("symplectic_r2", symplectic_r2()),
        ("quadratic_r2", quadratic_r2()),
        ("nambu3", nambu3()),
    ]
}

/// The two-dimensional example connection on `aff(1)*` exactly as printed:
/// `D_{dx^1} dx^2 = dx^2`, all other derivatives of basis forms zero.
/// It has torsion and `DΠ ≠ 0`.
pub fn aff1_example_literal() -> ConnectionSymbols {
    ConnectionSymbols::explicit(2, [(0, 1, 1, Expr::one())]).expect("valid indices")
}

/// Torsion-free Poisson connection on `aff(1)*` matching the printed
/// symbol `Γ^{12}_1 = 1`: `D_{dx^1} dx^2 = dx^1`, `D_{dx^2} dx^2 = −dx^2`.
pub fn aff1_example_corrected() -> ConnectionSymbols {
    ConnectionSymbols::explicit(2, [(0, 1, 0, Expr::one()), (1, 1, 1, Expr::constant(-1.0))]).expect("valid indices")
}

/// `g = diag(1, x1² + 1)`.
pub fn curved_metric_r2() -> Metric {
    Metric::diagonal(vec![Expr::one(), expr("x1^2 + 1", 2)])
}
