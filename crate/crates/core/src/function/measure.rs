use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::expr::{Interval, RealFn};
use super::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// A finite positive measure: atoms sorted by position, all weights > 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(mut atoms: Vec<Atom>, interval: Interval) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::BadArgument("measure has no atoms".into()));
        }
        for at in &atoms {
            if !(at.w > 0.0) || !at.w.is_finite() {
                return Err(Error::BadArgument(format!("atom weight {} is not positive", at.w)));
            }
            if !interval.contains(at.x) {
                return Err(Error::BadArgument(format!("atom at {} outside {interval}", at.x)));
            }
        }
        atoms.sort_by(|p, q| p.x.total_cmp(&q.x));
        Ok(Self { atoms })
    }

    /// Unit point mass at `x`.
    pub fn dirac(x: f64, interval: Interval) -> Result<Self> {
        Self::new(vec![Atom { x, w: 1.0 }], interval)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).collect::<CompensatedSum>().value()
    }

    /// True when the measure is a single atom within `tol` of `x`.
    pub fn is_dirac_at(&self, x: f64, tol: f64) -> bool {
        self.atoms.len() == 1 && (self.atoms[0].x - x).abs() <= tol
    }

    /// The measure with every weight multiplied by `density(x_i)`.
    pub fn reweighted(&self, density: &dyn RealFn) -> Result<Vec<Atom>> {
        self.atoms
            .iter()
            .map(|a| Ok(Atom { x: a.x, w: a.w * density.eval(a.x)? }))
            .collect()
    }
}

/// `sum_i w_i f(x_i)`, accumulated in ascending position order.
pub fn integrate(measure: &DiscreteMeasure, f: &dyn RealFn) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for a in measure.atoms() {
        acc.add(a.w * f.eval(a.x)?);
    }
    Ok(acc.value())
}
