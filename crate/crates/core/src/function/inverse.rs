use serde::Serialize;

use crate::error::{Error, Result};

use super::expr::{Interval, RealFn};
use super::grid::{sweep, uniform_grid};

/// The quotient `num / den` as a function.
pub struct Ratio<'a> {
    pub num: &'a dyn RealFn,
    pub den: &'a dyn RealFn,
}

impl<'a> Ratio<'a> {
    pub fn new(num: &'a dyn RealFn, den: &'a dyn RealFn) -> Self {
        Self { num, den }
    }
}

impl RealFn for Ratio<'_> {
    fn eval(&self, x: f64) -> Result<f64> {
        let d = self.den.eval(x)?;
        if d == 0.0 {
            return Err(Error::Domain(format!("division by zero at x = {x}")));
        }
        let v = self.num.eval(x)? / d;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    }
}

/// Solves `r(x) = y` for strictly increasing `r` by bisection.
///
/// Stops once `|r(x) - y| <= tol * max(1, |y|)` or after
/// `ceil(log2((b - a) / eps))` halvings with `eps = 1e-14 (b - a)`, whichever
/// comes first; in the latter case the bracket end with the smaller residual
/// is returned. `y` equal to `r(a)` or `r(b)` maps to the endpoint exactly.
pub fn monotone_inverse(r: &dyn RealFn, interval: Interval, y: f64, tol: f64) -> Result<f64> {
    let (a, b) = (interval.a(), interval.b());
    let (ra, rb) = (r.eval(a)?, r.eval(b)?);
    if ra >= rb {
        return Err(Error::NotMonotone(format!("r(a) = {ra} >= r(b) = {rb}")));
    }
    if !(ra <= y && y <= rb) {
        return Err(Error::OutOfRange { y, lo: ra, hi: rb });
    }
    if y == ra {
        return Ok(a);
    }
    if y == rb {
        return Ok(b);
    }
    let target = tol * y.abs().max(1.0);
    // log2((b - a) / (1e-14 (b - a))) = log2(1e14)
    let max_iter = 1e14f64.log2().ceil() as usize;
    let (mut lo, mut hi) = (a, b);
    let (mut r_lo, mut r_hi) = (ra, rb);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let r_mid = r.eval(mid)?;
        if r_mid < r_lo || r_mid > r_hi {
            return Err(Error::NotMonotone(format!(
                "r({mid}) = {r_mid} outside bracket [{r_lo}, {r_hi}]"
            )));
        }
        if (r_mid - y).abs() <= target {
            return Ok(mid);
        }
        if r_mid < y {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
            r_hi = r_mid;
        }
    }
    Ok(if (y - r_lo).abs() <= (r_hi - y).abs() { lo } else { hi })
}

/// Grid certification of the standing assumptions on a Chebyshev pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub f0_positive: bool,
    pub ratio_increasing: bool,
    pub f0_min: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub grid: usize,
}

impl PairReport {
    pub fn is_valid(&self) -> bool {
        self.f0_positive && self.ratio_increasing
    }
}

/// Checks `f0 > 0` and strict increase of `f1 / f0` over consecutive points
/// of an `m`-point grid. Evaluation failures mark the pair invalid.
pub fn validate_pair(f0: &dyn RealFn, f1: &dyn RealFn, interval: Interval, m: usize) -> Result<PairReport> {
    if m < 16 {
        return Err(Error::BadArgument(format!("pair validation needs m >= 16, got {m}")));
    }
    let grid = uniform_grid(interval, m)?;
    let invalid = PairReport {
        f0_positive: false,
        ratio_increasing: false,
        f0_min: f64::NAN,
        ratio_min: f64::NAN,
        ratio_max: f64::NAN,
        grid: m,
    };
    let Ok(f0v) = sweep(grid.points(), |x| f0.eval(x)) else {
        return Ok(invalid);
    };
    let Ok(f1v) = sweep(grid.points(), |x| f1.eval(x)) else {
        return Ok(invalid);
    };
    let f0_min = f0v.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio: Vec<f64> = f0v.iter().zip(&f1v).map(|(d, n)| n / d).collect();
    let ratio_increasing = ratio.iter().all(|v| v.is_finite()) && ratio.windows(2).all(|w| w[0] < w[1]);
    Ok(PairReport {
        f0_positive: f0_min > 0.0,
        ratio_increasing,
        f0_min,
        ratio_min: ratio.iter().copied().fold(f64::INFINITY, f64::min),
        ratio_max: ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        grid: m,
    })
}
