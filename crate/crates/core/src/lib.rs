//! Contravariant geometry on a single Poisson chart.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] parses and exactly differentiates closed-form scalar expressions;
//! * [`multivec`] holds Poisson structures and the contravariant Cartan
//!   calculus (`#`, Koszul bracket, `δ`, contractions, Lie derivatives,
//!   modular vector fields);
//! * [`connection`] implements linear contravariant connections through their
//!   Christoffel symbols `Γ^{ij}_k`, defined by `D_{dx^i} dx^j = Γ^{ij}_k dx^k`;
//! * [`transport`] integrates geodesics, parallel transport and holonomy with
//!   fixed-step RK4;
//! * [`classes`] builds Chern–Weil and secondary characteristic multivector
//!   fields and the closed Lie–Poisson formulas.
//!
//! Coordinates are `x1..xm` in expression text and 0-based everywhere in the
//! API.

pub mod classes;
pub mod combinatorics;
pub mod connection;
mod error;
pub mod expr;
pub mod fixtures;
pub mod matrix;
pub mod multivec;
pub mod sampling;
pub mod transport;

pub use error::{Error, Result};
pub use expr::{parse_expr, EvalError, Expr, ParseError, Var};
