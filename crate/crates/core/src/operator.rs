//! A Bernstein-type operator in fixed-basis form, `B f = sum_k f(t_k) p_k`,
//! with the weights folded into the basis.

use serde::{Deserialize, Serialize};

use crate::classical::{classical_nodes, classical_row, combine, ln_binomial_row, power_nodes};
use crate::error::{Error, Result};
use crate::exponential::ExpMNParams;
use crate::function::{Expr, Interval, RealFn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorKind {
    Classical,
    PowerFix { j: usize },
    ExpMn { mu0: f64, mu1: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    n: usize,
    interval: Interval,
    kind: OperatorKind,
    nodes: Vec<f64>,
    ln_binom: Vec<f64>,
}

impl OperatorSpec {
    pub fn classical(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadArgument("degree n must be at least 1".into()));
        }
        Ok(Self::assemble(n, Interval::unit(), OperatorKind::Classical, classical_nodes(n)))
    }

    /// The operator fixing `1` and `x^j`, `1 <= j <= n`.
    pub fn power_fix(n: usize, j: usize) -> Result<Self> {
        let nodes = power_nodes(n, j)?;
        Ok(Self::assemble(n, Interval::unit(), OperatorKind::PowerFix { j }, nodes))
    }

    pub fn exp_mn(params: ExpMNParams) -> Result<Self> {
        let p = ExpMNParams::new(params.mu0, params.mu1, params.interval, params.n)?;
        Ok(Self::assemble(
            p.n,
            p.interval,
            OperatorKind::ExpMn { mu0: p.mu0, mu1: p.mu1 },
            p.nodes(),
        ))
    }

    pub fn new(n: usize, interval: Interval, kind: OperatorKind) -> Result<Self> {
        match kind {
            OperatorKind::Classical | OperatorKind::PowerFix { .. } if !interval.is_unit() => {
                Err(Error::BadArgument(format!("{kind:?} requires [0, 1], got {interval}")))
            }
            OperatorKind::Classical => Self::classical(n),
            OperatorKind::PowerFix { j } => Self::power_fix(n, j),
            OperatorKind::ExpMn { mu0, mu1 } => Self::exp_mn(ExpMNParams::new(mu0, mu1, interval, n)?),
        }
    }

    fn assemble(n: usize, interval: Interval, kind: OperatorKind, nodes: Vec<f64>) -> Self {
        debug_assert_eq!(nodes.len(), n + 1);
        debug_assert!(nodes[0] == interval.a() && nodes[n] == interval.b());
        debug_assert!(nodes.windows(2).all(|w| w[0] <= w[1]));
        Self { n, interval, kind, nodes, ln_binom: ln_binomial_row(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn exp_params(&self) -> Option<ExpMNParams> {
        match self.kind {
            OperatorKind::ExpMn { mu0, mu1 } => {
                Some(ExpMNParams { mu0, mu1, interval: self.interval, n: self.n })
            }
            _ => None,
        }
    }

    /// The pair `(f0, f1)` this operator reproduces.
    pub fn fixed_pair(&self) -> (Expr, Expr) {
        match self.kind {
            OperatorKind::Classical => (Expr::Const(1.0), Expr::X),
            OperatorKind::PowerFix { j } => (Expr::Const(1.0), Expr::monomial(j as u32)),
            OperatorKind::ExpMn { mu0, mu1 } => (Expr::exp_linear(mu0), Expr::exp_linear(mu1)),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            OperatorKind::Classical => format!("classical(n={})", self.n),
            OperatorKind::PowerFix { j } => format!("power(n={}, j={j})", self.n),
            OperatorKind::ExpMn { mu0, mu1 } => {
                format!("expmn(n={}, mu0={mu0}, mu1={mu1}, {})", self.n, self.interval)
            }
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if self.interval.contains(x) {
            Ok(())
        } else {
            Err(Error::BadArgument(format!("x = {x} outside {}", self.interval)))
        }
    }

    /// All basis values `p_0(x), ..., p_n(x)`.
    pub fn basis_row(&self, x: f64) -> Result<Vec<f64>> {
        self.check_x(x)?;
        Ok(match self.kind {
            OperatorKind::Classical | OperatorKind::PowerFix { .. } => classical_row(&self.ln_binom, x),
            OperatorKind::ExpMn { .. } => self.exp_params().unwrap().basis_row(&self.ln_binom, x),
        })
    }

    pub fn basis(&self, k: usize, x: f64) -> Result<f64> {
        if k > self.n {
            return Err(Error::BadArgument(format!("k = {k} outside 0..={}", self.n)));
        }
        Ok(self.basis_row(x)?[k])
    }

    /// Node samples `f(t_0), ..., f(t_n)`.
    pub fn coefficients(&self, f: &dyn RealFn) -> Result<Vec<f64>> {
        self.nodes.iter().map(|&t| f.eval(t)).collect()
    }

    /// `sum_k coeffs[k] p_k(x)`.
    pub fn combine(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        if coeffs.len() != self.n + 1 {
            return Err(Error::BadArgument(format!(
                "{} coefficients for degree {}",
                coeffs.len(),
                self.n
            )));
        }
        Ok(combine(coeffs, &self.basis_row(x)?))
    }

    pub fn apply(&self, f: &dyn RealFn, x: f64) -> Result<f64> {
        self.combine(&self.coefficients(f)?, x)
    }

    /// `B f` as a function, with the node samples taken once.
    pub fn image<'a>(&'a self, f: &dyn RealFn) -> Result<OperatorImage<'a>> {
        Ok(OperatorImage { op: self, coeffs: self.coefficients(f)? })
    }
}

/// `x -> sum_k coeffs[k] p_k(x)` for a fixed operator.
pub struct OperatorImage<'a> {
    op: &'a OperatorSpec,
    coeffs: Vec<f64>,
}

impl OperatorImage<'_> {
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }
}

impl RealFn for OperatorImage<'_> {
    fn eval(&self, x: f64) -> Result<f64> {
        self.op.combine(&self.coeffs, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{apply_classical, apply_power};
    use crate::exponential::apply_mn;
    use crate::function::uniform_grid;

    #[test]
    fn dispatch_matches_free_functions() {
        let f = Expr::X.exp() + Expr::abs_shift(0.3);
        let c = OperatorSpec::classical(7).unwrap();
        let p = OperatorSpec::power_fix(7, 3).unwrap();
        let params = ExpMNParams::new(-1.0, 2.0, Interval::unit(), 7).unwrap();
        let e = OperatorSpec::exp_mn(params).unwrap();
        for &x in uniform_grid(Interval::unit(), 33).unwrap().points() {
            assert_eq!(c.apply(&f, x).unwrap(), apply_classical(&f, 7, x).unwrap());
            assert_eq!(p.apply(&f, x).unwrap(), apply_power(&f, 7, 3, x).unwrap());
            assert_eq!(e.apply(&f, x).unwrap(), apply_mn(&params, &f, x).unwrap());
        }
    }

    #[test]
    fn structure_invariants() {
        assert!(OperatorSpec::new(3, Interval::new(0.0, 2.0).unwrap(), OperatorKind::Classical).is_err());
        let e = OperatorSpec::new(4, Interval::new(-1.0, 2.0).unwrap(), OperatorKind::ExpMn { mu0: 0.0, mu1: 1.0 })
            .unwrap();
        assert_eq!(e.nodes()[0], -1.0);
        assert_eq!(e.nodes()[4], 2.0);
        assert!(e.nodes().windows(2).all(|w| w[0] < w[1]));
        let p = OperatorSpec::power_fix(5, 3).unwrap();
        assert_eq!(&p.nodes()[..3], &[0.0, 0.0, 0.0]);
        assert!(p.basis(6, 0.5).is_err());
        assert!(p.apply(&Expr::X, 1.2).is_err());
    }

    #[test]
    fn kind_serializes_with_tag() {
        let k = OperatorKind::PowerFix { j: 2 };
        assert_eq!(serde_json::to_string(&k).unwrap(), r#"{"kind":"power-fix","j":2}"#);
    }
}
