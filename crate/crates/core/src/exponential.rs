//! The exponential Bernstein operator of Morigi and Neamtu.
//!
//! With `omega = (mu1 - mu0) / n` and `lambda_j = mu0 + j omega`, the basis
//!
//! ```text
//! p_k(x) = e^{-lambda_0 (k/n)(b-a)} e^{lambda_0 (x-a)} C(n,k) phi(x)^k (1 - phi(x))^{n-k}
//! phi(x) = (e^{omega (x-b)} - e^{omega (a-b)}) / (1 - e^{omega (a-b)})
//! ```
//!
//! spans `e^{lambda_0 x}, ..., e^{lambda_n x}`; sampled at equally spaced
//! nodes it reproduces `e^{mu0 x}` and `e^{mu1 x}`.

use serde::{Deserialize, Serialize};

use crate::classical::{apply_classical, combine, ln_binomial_row};
use crate::error::{Error, Result};
use crate::function::{uniform_grid, Expr, Interval, RealFn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMNParams {
    pub mu0: f64,
    pub mu1: f64,
    pub interval: Interval,
    pub n: usize,
}

impl ExpMNParams {
    pub fn new(mu0: f64, mu1: f64, interval: Interval, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadArgument("degree n must be at least 1".into()));
        }
        if !mu0.is_finite() || !mu1.is_finite() {
            return Err(Error::BadArgument(format!("exponents ({mu0}, {mu1}) must be finite")));
        }
        if mu0 == mu1 {
            return Err(Error::BadArgument(format!("mu0 = mu1 = {mu0}: exponents must differ")));
        }
        Ok(Self { mu0, mu1, interval, n })
    }

    /// `[0, 1]` with `mu0 = 0`, `mu1 = 1`: fixes `1` and `e^x`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(0.0, 1.0, Interval::unit(), n)
    }

    pub fn omega(&self) -> f64 {
        (self.mu1 - self.mu0) / self.n as f64
    }

    /// `lambda_j = mu0 + j omega`; the last entry is pinned to `mu1`.
    pub fn lambdas(&self) -> Vec<f64> {
        let w = self.omega();
        let mut l: Vec<f64> = (0..=self.n).map(|j| self.mu0 + j as f64 * w).collect();
        l[self.n] = self.mu1;
        l
    }

    /// Equally spaced nodes `a + (k/n)(b - a)`.
    pub fn nodes(&self) -> Vec<f64> {
        let (a, b) = (self.interval.a(), self.interval.b());
        let n = self.n;
        let mut t: Vec<f64> = (0..=n).map(|k| a + (k as f64 / n as f64) * (b - a)).collect();
        t[0] = a;
        t[n] = b;
        t
    }

    /// The two functions the operator reproduces, `e^{mu0 x}` and `e^{mu1 x}`.
    pub fn fixed_pair(&self) -> (Expr, Expr) {
        (Expr::exp_linear(self.mu0), Expr::exp_linear(self.mu1))
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if self.interval.contains(x) {
            Ok(())
        } else {
            Err(Error::BadArgument(format!("x = {x} outside {}", self.interval)))
        }
    }

    // (phi, 1 - phi), each formed from expm1 without subtracting from 1.
    fn phi_psi(&self, x: f64) -> (f64, f64) {
        let (a, b) = (self.interval.a(), self.interval.b());
        if x <= a {
            return (0.0, 1.0);
        }
        if x >= b {
            return (1.0, 0.0);
        }
        let w = self.omega();
        let den = (w * (a - b)).exp_m1();
        let phi = -(w * (a - b)).exp() * (w * (x - a)).exp_m1() / den;
        let psi = (w * (x - b)).exp_m1() / den;
        (phi.clamp(0.0, 1.0), psi.clamp(0.0, 1.0))
    }

    pub(crate) fn basis_row(&self, ln_binom: &[f64], x: f64) -> Vec<f64> {
        let n = self.n;
        let (a, b) = (self.interval.a(), self.interval.b());
        let l0 = self.mu0;
        let (phi, psi) = self.phi_psi(x);
        let mut row = vec![0.0; n + 1];
        if phi == 0.0 {
            row[0] = (l0 * (x - a)).exp();
            return row;
        }
        if psi == 0.0 {
            row[n] = (l0 * (x - a) - l0 * (b - a)).exp();
            return row;
        }
        let (ln_phi, ln_psi) = (phi.ln(), psi.ln());
        for (k, (slot, lc)) in row.iter_mut().zip(ln_binom).enumerate() {
            let shift = l0 * (x - a) - l0 * (k as f64 / n as f64) * (b - a);
            *slot = (shift + lc + k as f64 * ln_phi + (n - k) as f64 * ln_psi).exp();
        }
        row
    }
}

/// Returns `(omega, [lambda_0, ..., lambda_n])`.
pub fn omega_lambda(params: &ExpMNParams) -> Result<(f64, Vec<f64>)> {
    let p = ExpMNParams::new(params.mu0, params.mu1, params.interval, params.n)?;
    Ok((p.omega(), p.lambdas()))
}

/// `phi_n(x)`, evaluated as `-e^{omega(a-b)} expm1(omega(x-a)) / expm1(omega(a-b))`.
pub fn phi_n(params: &ExpMNParams, x: f64) -> Result<f64> {
    params.check_x(x)?;
    Ok(params.phi_psi(x).0)
}

pub fn mn_basis(params: &ExpMNParams, k: usize, x: f64) -> Result<f64> {
    if k > params.n {
        return Err(Error::BadArgument(format!("k = {k} outside 0..={}", params.n)));
    }
    params.check_x(x)?;
    Ok(params.basis_row(&ln_binomial_row(params.n), x)[k])
}

/// `sum_k f(t_k) p_k(x)`.
pub fn apply_mn(params: &ExpMNParams, f: &dyn RealFn, x: f64) -> Result<f64> {
    params.check_x(x)?;
    let coeffs = params
        .nodes()
        .into_iter()
        .map(|t| f.eval(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&coeffs, &params.basis_row(&ln_binomial_row(params.n), x)))
}

/// Max over an `m`-point grid of `|B^MN f(x) - B_n f(phi_n(x))|` for the
/// `[0, 1]`, `(mu0, mu1) = (0, 1)` operator.
pub fn mn_composition_check(n: usize, f: &dyn RealFn, grid_m: usize) -> Result<f64> {
    let params = ExpMNParams::unit(n)?;
    let grid = uniform_grid(Interval::unit(), grid_m)?;
    let mut worst = 0.0f64;
    for &x in grid.points() {
        let lhs = apply_mn(&params, f, x)?;
        let rhs = apply_classical(f, n, phi_n(&params, x)?)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceMetrics {
    pub n: usize,
    /// `max |phi_n(x) - x|` over 1001 uniform points of `[0, 1]`.
    pub sup_dev: f64,
    /// `phi_n'(1) = e^{1/n} / (n (e^{1/n} - 1))`.
    pub slope_at_1: f64,
}

pub fn convergence_metrics(n: usize) -> Result<ConvergenceMetrics> {
    let params = ExpMNParams::unit(n)?;
    let grid = uniform_grid(Interval::unit(), 1001)?;
    let mut sup_dev = 0.0f64;
    for &x in grid.points() {
        sup_dev = sup_dev.max((params.phi_psi(x).0 - x).abs());
    }
    let h = 1.0 / n as f64;
    Ok(ConvergenceMetrics { n, sup_dev, slope_at_1: h.exp() / (n as f64 * h.exp_m1()) })
}
