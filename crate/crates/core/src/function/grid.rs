use rayon::prelude::*;

use crate::error::{Error, Result};

use super::expr::{Interval, RealFn};

/// Grid size used when certifying positivity and monotonicity.
pub const DEFAULT_CERT_GRID: usize = 2049;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    interval: Interval,
    points: Vec<f64>,
    values: Option<Vec<f64>>,
}

/// `m` equally spaced points; `point_i = a + i (b - a) / (m - 1)`, endpoints exact.
pub fn uniform_grid(interval: Interval, m: usize) -> Result<SampledGrid> {
    if m < 2 {
        return Err(Error::BadArgument(format!("grid needs at least 2 points, got {m}")));
    }
    let (a, b) = (interval.a(), interval.b());
    let h = (b - a) / (m - 1) as f64;
    let mut points: Vec<f64> = (0..m).map(|i| a + i as f64 * h).collect();
    points[0] = a;
    points[m - 1] = b;
    Ok(SampledGrid { interval, points, values: None })
}

impl SampledGrid {
    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.interval.len() / (self.points.len() - 1) as f64
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::BadArgument(format!(
                "{} values for {} grid points",
                values.len(),
                self.points.len()
            )));
        }
        self.values = Some(values);
        Ok(self)
    }

    /// Samples `f` at every grid point.
    pub fn sample(self, f: &dyn RealFn) -> Result<Self> {
        let values = sweep(&self.points, |x| f.eval(x))?;
        self.with_values(values)
    }
}

/// Point-parallel evaluation with results in grid order.
pub fn sweep<F>(points: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    points.par_iter().map(|&x| f(x)).collect()
}

/// Centered, unscaled second differences `v[i-1] - 2 v[i] + v[i+1]`.
pub fn second_differences(values: &[f64]) -> Vec<f64> {
    values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect()
}
