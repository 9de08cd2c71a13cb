//! Closed-form scalar expressions over chart coordinates.
//!
//! Coordinates are written `x1..xm` in source text and stored 0-based
//! (`x1` is `Var::Coord(0)`). A path parameter `t` may also appear.
//! Expressions are immutable, reference-counted trees; the smart
//! constructors perform structural constant folding only (`0*e -> 0`,
//! `e+0 -> e`, `1*e -> e`, constant arithmetic) and never try to reach a
//! canonical form.

mod parse;

use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

pub use parse::{parse_expr, ParseError};

/// A variable slot: a chart coordinate (0-based) or the path parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Coord(usize),
    T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Var(Var),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Neg(Expr),
    Func(Func, Expr),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("non-finite intermediate value")]
    NonFinite,
    #[error("coordinate x{index} requested but point has dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },
    #[error("expression uses t but no parameter value was supplied")]
    MissingParameter,
}

/// Immutable symbolic scalar expression.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Expr {
        Expr(Arc::new(Node::Const(c)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    /// Coordinate `x{index+1}`.
    pub fn coord(index: usize) -> Expr {
        Expr(Arc::new(Node::Var(Var::Coord(index))))
    }

    pub fn t() -> Expr {
        Expr(Arc::new(Node::Var(Var::T)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add_all<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut flat = Vec::new();
        let mut acc = 0.0;
        let mut saw_const = false;
        for term in terms {
            match term.node() {
                Node::Const(c) => {
                    acc += c;
                    saw_const = true;
                }
                Node::Add(children) => {
                    for c in children {
                        match c.as_const() {
                            Some(v) => {
                                acc += v;
                                saw_const = true;
                            }
                            None => flat.push(c.clone()),
                        }
                    }
                }
                _ => flat.push(term),
            }
        }
        if saw_const && acc != 0.0 {
            flat.push(Expr::constant(acc));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr(Arc::new(Node::Add(flat))),
        }
    }

    pub fn mul_all<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut flat = Vec::new();
        let mut acc = 1.0;
        for factor in factors {
            match factor.node() {
                Node::Const(c) => acc *= c,
                Node::Mul(children) => {
                    for c in children {
                        match c.as_const() {
                            Some(v) => acc *= v,
                            None => flat.push(c.clone()),
                        }
                    }
                }
                _ => flat.push(factor),
            }
        }
        if acc == 0.0 {
            return Expr::zero();
        }
        if flat.is_empty() {
            return Expr::constant(acc);
        }
        if acc == -1.0 && flat.len() == 1 {
            return flat.pop().unwrap().neg_expr();
        }
        if acc != 1.0 {
            flat.insert(0, Expr::constant(acc));
        }
        match flat.len() {
            1 => flat.pop().unwrap(),
            _ => Expr(Arc::new(Node::Mul(flat))),
        }
    }

    pub fn neg_expr(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr(Arc::new(Node::Neg(self.clone()))),
        }
    }

    pub fn div_expr(&self, den: &Expr) -> Expr {
        if den.is_one() {
            return self.clone();
        }
        if self.is_zero() {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (self.as_const(), den.as_const()) {
            if b != 0.0 {
                return Expr::constant(a / b);
            }
        }
        Expr(Arc::new(Node::Div(self.clone(), den.clone())))
    }

    pub fn powi(&self, n: i32) -> Expr {
        match n {
            0 => Expr::one(),
            1 => self.clone(),
            _ => match self.as_const() {
                Some(c) if c != 0.0 || n > 0 => Expr::constant(c.powi(n)),
                _ => Expr(Arc::new(Node::Pow(self.clone(), n))),
            },
        }
    }

    pub fn apply(func: Func, arg: &Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            let folded = match func {
                Func::Sin => Some(c.sin()),
                Func::Cos => Some(c.cos()),
                Func::Exp => Some(c.exp()),
                Func::Log if c > 0.0 => Some(c.ln()),
                Func::Sqrt if c >= 0.0 => Some(c.sqrt()),
                _ => None,
            };
            if let Some(v) = folded.filter(|v| v.is_finite()) {
                return Expr::constant(v);
            }
        }
        Expr(Arc::new(Node::Func(func, arg.clone())))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self)
    }
    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self)
    }
    pub fn ln(&self) -> Expr {
        Expr::apply(Func::Log, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::apply(Func::Sqrt, self)
    }

    /// Exact partial derivative with respect to `slot`.
    pub fn diff(&self, slot: Var) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(v) => {
                if *v == slot {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(terms) => Expr::add_all(terms.iter().map(|t| t.diff(slot))),
            Node::Mul(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    let df = f.diff(slot);
                    if df.is_zero() {
                        continue;
                    }
                    terms.push(Expr::mul_all(factors.iter().enumerate().map(|(j, g)| {
                        if i == j {
                            df.clone()
                        } else {
                            g.clone()
                        }
                    })));
                }
                Expr::add_all(terms)
            }
            Node::Div(num, den) => {
                let dn = num.diff(slot);
                let dd = den.diff(slot);
                if dd.is_zero() {
                    return dn.div_expr(den);
                }
                let top = &(&dn * den) - &(num * &dd);
                top.div_expr(&den.powi(2))
            }
            Node::Pow(base, n) => {
                let db = base.diff(slot);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::mul_all([Expr::constant(*n as f64), base.powi(n - 1), db])
            }
            Node::Neg(inner) => inner.diff(slot).neg_expr(),
            Node::Func(func, arg) => {
                let da = arg.diff(slot);
                if da.is_zero() {
                    return Expr::zero();
                }
                match func {
                    Func::Sin => &arg.cos() * &da,
                    Func::Cos => (&arg.sin() * &da).neg_expr(),
                    Func::Exp => &self.clone() * &da,
                    Func::Log => da.div_expr(arg),
                    Func::Sqrt => da.div_expr(&(&Expr::constant(2.0) * self)),
                }
            }
        }
    }

    /// Partial derivative with respect to coordinate `index` (0-based).
    pub fn d(&self, index: usize) -> Expr {
        self.diff(Var::Coord(index))
    }

    /// Evaluate at `point`; `t` must be supplied whenever the tree uses it.
    pub fn eval(&self, point: &[f64], t: Option<f64>) -> Result<f64, EvalError> {
        let v = match self.node() {
            Node::Const(c) => *c,
            Node::Var(Var::Coord(i)) => *point.get(*i).ok_or(EvalError::CoordOutOfRange {
                index: i + 1,
                dim: point.len(),
            })?,
            Node::Var(Var::T) => t.ok_or(EvalError::MissingParameter)?,
            Node::Add(terms) => {
                let mut acc = 0.0;
                for term in terms {
                    acc += term.eval(point, t)?;
                }
                acc
            }
            Node::Mul(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.eval(point, t)?;
                }
                acc
            }
            Node::Div(num, den) => {
                let d = den.eval(point, t)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num.eval(point, t)? / d
            }
            Node::Pow(base, n) => {
                let b = base.eval(point, t)?;
                if b == 0.0 && *n < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                b.powi(*n)
            }
            Node::Neg(inner) => -inner.eval(point, t)?,
            Node::Func(func, arg) => {
                let a = arg.eval(point, t)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::LogDomain(a));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::SqrtDomain(a));
                        }
                        a.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluate a coordinate-only expression.
    pub fn eval_at(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.eval(point, None)
    }

    pub fn uses_t(&self) -> bool {
        self.any_var(&|v| v == Var::T)
    }

    /// Largest coordinate index (0-based) appearing in the tree.
    pub fn max_coord(&self) -> Option<usize> {
        let mut best = None;
        self.visit_vars(&mut |v| {
            if let Var::Coord(i) = v {
                best = Some(best.map_or(i, |b: usize| b.max(i)));
            }
        });
        best
    }

    fn any_var(&self, pred: &dyn Fn(Var) -> bool) -> bool {
        let mut hit = false;
        self.visit_vars(&mut |v| hit |= pred(v));
        hit
    }

    fn visit_vars(&self, f: &mut dyn FnMut(Var)) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => f(*v),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.visit_vars(f)),
            Node::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Func(_, a) => a.visit_vars(f),
        }
    }

    /// Replace every coordinate `x{i+1}` by `subs[i]`; `t` is left alone.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Var(Var::T) => self.clone(),
            Node::Var(Var::Coord(i)) => subs.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(xs) => Expr::add_all(xs.iter().map(|x| x.substitute(subs))),
            Node::Mul(xs) => Expr::mul_all(xs.iter().map(|x| x.substitute(subs))),
            Node::Div(a, b) => a.substitute(subs).div_expr(&b.substitute(subs)),
            Node::Pow(a, n) => a.substitute(subs).powi(*n),
            Node::Neg(a) => a.substitute(subs).neg_expr(),
            Node::Func(func, a) => Expr::apply(*func, &a.substitute(subs)),
        }
    }

    /// Replace the path parameter by a constant.
    pub fn fix_t(&self, t: f64) -> Expr {
        match self.node() {
            Node::Var(Var::T) => Expr::constant(t),
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Add(xs) => Expr::add_all(xs.iter().map(|x| x.fix_t(t))),
            Node::Mul(xs) => Expr::mul_all(xs.iter().map(|x| x.fix_t(t))),
            Node::Div(a, b) => a.fix_t(t).div_expr(&b.fix_t(t)),
            Node::Pow(a, n) => a.fix_t(t).powi(*n),
            Node::Neg(a) => a.fix_t(t).neg_expr(),
            Node::Func(func, a) => Expr::apply(*func, &a.fix_t(t)),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().map(Expr::size).sum(),
            Node::Div(a, b) => a.size() + b.size(),
            Node::Pow(a, _) | Node::Neg(a) | Node::Func(_, a) => a.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(_) => 1,
            Node::Mul(_) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Const(c) if *c < 0.0 => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(Var::Coord(i)) => write!(f, "x{}", i + 1),
            Node::Var(Var::T) => write!(f, "t"),
            Node::Add(terms) => {
                for (i, term) in terms.iter().enumerate() {
                    match (i, term.node()) {
                        (0, _) => term.write_at(f, 2)?,
                        (_, Node::Neg(inner)) => {
                            write!(f, " - ")?;
                            inner.write_at(f, 2)?;
                        }
                        (_, Node::Const(c)) if *c < 0.0 => write!(f, " - {}", -c)?,
                        _ => {
                            write!(f, " + ")?;
                            term.write_at(f, 2)?;
                        }
                    }
                }
                Ok(())
            }
            Node::Mul(factors) => {
                for (i, factor) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    factor.write_at(f, 3)?;
                }
                Ok(())
            }
            Node::Div(num, den) => {
                num.write_at(f, 2)?;
                write!(f, "/")?;
                den.write_at(f, 3)
            }
            Node::Pow(base, n) => {
                base.write_at(f, 5)?;
                write!(f, "^{n}")
            }
            Node::Neg(inner) => {
                write!(f, "-")?;
                inner.write_at(f, 3)
            }
            Node::Func(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.write_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// Structural equality: two trees are equal when they print identically.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.to_string() == other.to_string()
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                ops::$trait::$method(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                ops::$trait::$method(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                ops::$trait::$method(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add_all([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| Expr::add_all([a.clone(), b.neg_expr()]));
binop!(Mul, mul, |a, b| Expr::mul_all([a.clone(), b.clone()]));
binop!(Div, div, |a, b| a.div_expr(b));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_expr()
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_expr()
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::add_all(iter)
    }
}
