use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[a, b]` with finite `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::BadArgument(format!("interval [{a}, {b}] is not finite")));
        }
        if a >= b {
            return Err(Error::BadArgument(format!("interval [{a}, {b}] is empty or degenerate")));
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn is_unit(&self) -> bool {
        self.a == 0.0 && self.b == 1.0
    }
}

impl TryFrom<(f64, f64)> for Interval {
    type Error = Error;

    fn try_from((a, b): (f64, f64)) -> Result<Self> {
        Interval::new(a, b)
    }
}

impl From<Interval> for (f64, f64) {
    fn from(i: Interval) -> Self {
        (i.a, i.b)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Anything that can be evaluated pointwise as a real function.
///
/// [`Expr`] is the serializable implementation; derived functions such as
/// operator outputs are wrapped with [`FnRef`].
pub trait RealFn: Sync {
    fn eval(&self, x: f64) -> Result<f64>;
}

/// Wraps a closure behind [`RealFn`].
pub struct FnRef<F>(pub F);

impl<F> RealFn for FnRef<F>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    fn eval(&self, x: f64) -> Result<f64> {
        (self.0)(x)
    }
}

impl<T: RealFn + ?Sized> RealFn for &T {
    fn eval(&self, x: f64) -> Result<f64> {
        (**self).eval(x)
    }
}

/// Expression tree for closed-form real functions of one variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Add(Vec<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    IntPow(Box<Expr>, u32),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Abs(Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn x() -> Self {
        Expr::X
    }

    pub fn powi(self, p: u32) -> Self {
        Expr::IntPow(Box::new(self), p)
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Self {
        Expr::Ln(Box::new(self))
    }

    pub fn abs(self) -> Self {
        Expr::Abs(Box::new(self))
    }

    /// `x^p`.
    pub fn monomial(p: u32) -> Self {
        match p {
            0 => Expr::Const(1.0),
            1 => Expr::X,
            _ => Expr::X.powi(p),
        }
    }

    /// `e^{mu x}`; `mu = 0` collapses to the constant 1.
    pub fn exp_linear(mu: f64) -> Self {
        if mu == 0.0 {
            Expr::Const(1.0)
        } else if mu == 1.0 {
            Expr::X.exp()
        } else if mu < 0.0 {
            Expr::Neg(Box::new(Expr::Const(-mu) * Expr::X)).exp()
        } else {
            (Expr::Const(mu) * Expr::X).exp()
        }
    }

    /// `|x - c|`.
    pub fn abs_shift(c: f64) -> Self {
        Expr::Add(vec![Expr::X, Expr::Neg(Box::new(Expr::Const(c)))]).abs()
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    }

    fn eval_raw(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Add(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval_raw(x)?;
                }
                acc
            }
            Expr::Mul(l, r) => l.eval_raw(x)? * r.eval_raw(x)?,
            Expr::Neg(e) => -e.eval_raw(x)?,
            Expr::IntPow(e, p) => {
                let base = e.eval_raw(x)?;
                match i32::try_from(*p) {
                    Ok(p) => base.powi(p),
                    Err(_) => base.powf(f64::from(*p)),
                }
            }
            Expr::Exp(e) => e.eval_raw(x)?.exp(),
            Expr::Ln(e) => {
                let arg = e.eval_raw(x)?;
                if !(arg > 0.0) {
                    return Err(Error::Domain(format!("ln({arg}) at x = {x}")));
                }
                arg.ln()
            }
            Expr::Abs(e) => e.eval_raw(x)?.abs(),
        })
    }

    /// Checks that the expression evaluates to finite values at `m` uniform
    /// points of `interval`.
    pub fn validate_on(&self, interval: Interval, m: usize) -> Result<()> {
        let grid = super::grid::uniform_grid(interval, m)?;
        for &x in grid.points() {
            self.evaluate(x)?;
        }
        Ok(())
    }
}

impl RealFn for Expr {
    fn eval(&self, x: f64) -> Result<f64> {
        self.evaluate(x)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;

    fn add(self, rhs: Expr) -> Expr {
        match self {
            Expr::Add(mut terms) => {
                terms.push(rhs);
                Expr::Add(terms)
            }
            lhs => Expr::Add(vec![lhs, rhs]),
        }
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Expr) -> Expr {
        self + Expr::Neg(Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;

    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// Printing precedence: expression < term < factor < atom.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Expr,
    Term,
    Factor,
    Atom,
}

fn fmt_number(c: f64) -> String {
    // Debug gives the shortest round-trip form and switches to exponent
    // notation for very large or small magnitudes.
    format!("{c:?}")
}

impl Expr {
    fn prec(&self) -> Prec {
        match self {
            Expr::Add(_) => Prec::Expr,
            Expr::Mul(..) => Prec::Term,
            Expr::Neg(_) | Expr::IntPow(..) => Prec::Factor,
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => Prec::Factor,
            _ => Prec::Atom,
        }
    }

    fn write_at(&self, out: &mut String, ctx: Prec) {
        if self.prec() < ctx {
            out.push('(');
            self.write_at(out, Prec::Expr);
            out.push(')');
            return;
        }
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    out.push('-');
                    out.push_str(&fmt_number(-c));
                } else {
                    out.push_str(&fmt_number(*c));
                }
            }
            Expr::X => out.push('x'),
            Expr::Add(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    match (i, t) {
                        (0, t) => t.write_at(out, Prec::Term),
                        (_, Expr::Neg(inner)) => {
                            out.push_str(" - ");
                            inner.write_at(out, Prec::Term);
                        }
                        (_, t) => {
                            out.push_str(" + ");
                            t.write_at(out, Prec::Term);
                        }
                    }
                }
            }
            Expr::Mul(l, r) => {
                l.write_at(out, Prec::Term);
                out.push('*');
                r.write_at(out, Prec::Factor);
            }
            Expr::Neg(e) => {
                out.push('-');
                e.write_at(out, Prec::Factor);
            }
            Expr::IntPow(e, p) => {
                e.write_at(out, Prec::Atom);
                out.push('^');
                out.push_str(&p.to_string());
            }
            Expr::Exp(e) => write_call(out, "exp", e),
            Expr::Ln(e) => write_call(out, "ln", e),
            Expr::Abs(e) => write_call(out, "abs", e),
        }
    }
}

fn write_call(out: &mut String, name: &str, arg: &Expr) {
    out.push_str(name);
    out.push('(');
    arg.write_at(out, Prec::Expr);
    out.push(')');
}

/// Canonical text form, accepted back by [`crate::function::parse_expression`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_at(&mut s, Prec::Expr);
        f.write_str(&s)
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        super::parse::parse_expression(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_basic_forms() {
        assert_eq!(Expr::X.exp().evaluate(0.0).unwrap(), 1.0);
        assert_eq!(Expr::X.powi(2).evaluate(0.5).unwrap(), 0.25);
        assert!(matches!(Expr::X.ln().evaluate(0.0), Err(Error::Domain(_))));
        assert_eq!(Expr::abs_shift(0.4).evaluate(0.1).unwrap(), 0.30000000000000004);
        assert!((Expr::exp_linear(-1.0).evaluate(2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn overflow_is_reported() {
        let e = (Expr::Const(1000.0) * Expr::X).exp();
        assert_eq!(e.evaluate(1.0), Err(Error::NonFinite { x: 1.0 }));
    }

    #[test]
    fn interval_rejects_degenerate() {
        assert!(Interval::new(2.0, 2.0).is_err());
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
        assert!(Interval::new(-1.0, 3.0).is_ok());
    }

    #[test]
    fn printer_parenthesizes() {
        let e = -(Expr::X * Expr::X);
        assert_eq!(e.to_string(), "-(x*x)");
        let e = Expr::X * (Expr::X * Expr::Const(2.0));
        assert_eq!(e.to_string(), "x*(x*2.0)");
        let e = (Expr::X - Expr::Const(1.0)).powi(3);
        assert_eq!(e.to_string(), "(x - 1.0)^3");
    }
}
