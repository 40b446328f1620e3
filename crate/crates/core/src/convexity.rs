//! `(f0, f1)`-convexity.
//!
//! Two independent deciders:
//!
//! * [`is_gen_convex`] maps `phi` to `g = (phi / f0) o (f1 / f0)^{-1}` on
//!   `I = (f1 / f0)([a, b])` and tests `g` for ordinary convexity with second
//!   differences on a uniform grid in `I`;
//! * [`is_gen_convex_by_chords`] works from the definition: between two
//!   points `x < y`, `phi` must stay below the unique element of
//!   `span{f0, f1}` interpolating it at `x` and `y`.
//!
//! Both work on grids, so "strict" means strict with a positive margin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{
    monotone_inverse, second_differences, sweep, uniform_grid, validate_pair, Expr, Interval, Ratio,
    RealFn, SampledGrid, DEFAULT_CERT_GRID,
};

/// Grid size for the transformed function.
pub const DEFAULT_GRID: usize = 513;
/// Relative tolerance; absolute thresholds are `DEFAULT_TOL * max|g|`.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_CHORD_PAIRS: usize = 256;
pub const DEFAULT_CHORD_SUBGRID: usize = 33;
pub const DEFAULT_CHORD_SEED: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub convex: bool,
    pub strictly: bool,
    /// Grid triple at which `margin` was attained.
    pub witness: Option<[f64; 3]>,
    /// Smallest second difference (or chord gap) observed.
    pub margin: f64,
    pub tol: f64,
    pub strict_margin: f64,
}

fn check_pair(f0: &dyn RealFn, f1: &dyn RealFn, interval: Interval) -> Result<()> {
    let rep = validate_pair(f0, f1, interval, DEFAULT_CERT_GRID)?;
    if rep.is_valid() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "pair invalid on {interval}: f0 > 0 is {}, f1/f0 increasing is {}",
            rep.f0_positive, rep.ratio_increasing
        )))
    }
}

/// Samples `g = (phi / f0) o (f1 / f0)^{-1}` on `m` uniform points of
/// `[r(a), r(b)]`, `r = f1 / f0`.
pub fn transform_to_standard(
    phi: &dyn RealFn,
    f0: &dyn RealFn,
    f1: &dyn RealFn,
    interval: Interval,
    m: usize,
) -> Result<SampledGrid> {
    if m < 3 {
        return Err(Error::BadArgument(format!("transform needs m >= 3, got {m}")));
    }
    let r = Ratio::new(f1, f0);
    let image = Interval::new(r.eval(interval.a())?, r.eval(interval.b())?)
        .map_err(|_| Error::NotMonotone("f1/f0 does not increase across the interval".into()))?;
    let grid = uniform_grid(image, m)?;
    let values = sweep(grid.points(), |y| {
        // tol = 0 runs bisection to its full resolution
        let x = monotone_inverse(&r, interval, y, 0.0)?;
        Ok(phi.eval(x)? / f0.eval(x)?)
    })?;
    grid.with_values(values)
}

/// Ordinary convexity from centered second differences of a uniform sample.
pub fn is_convex_standard(g: &SampledGrid, tol: f64, strict_margin: f64) -> Result<ConvexityVerdict> {
    if g.len() < 3 {
        return Err(Error::BadArgument(format!("convexity test needs m >= 3, got {}", g.len())));
    }
    let values = g
        .values()
        .ok_or_else(|| Error::BadArgument("grid carries no values".into()))?;
    let d = second_differences(values);
    let (i, margin) = d
        .iter()
        .copied()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    let p = g.points();
    Ok(ConvexityVerdict {
        convex: margin >= -tol,
        strictly: margin >= strict_margin,
        witness: Some([p[i], p[i + 1], p[i + 2]]),
        margin,
        tol,
        strict_margin,
    })
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `(f0, f1)`-convexity through the change of variables. `tol` is relative:
/// both the violation tolerance and the strict margin are `tol * max|g|`.
pub fn is_gen_convex(
    phi: &dyn RealFn,
    f0: &dyn RealFn,
    f1: &dyn RealFn,
    interval: Interval,
    m: usize,
    tol: f64,
) -> Result<ConvexityVerdict> {
    check_pair(f0, f1, interval)?;
    let g = transform_to_standard(phi, f0, f1, interval, m)?;
    let scale = max_abs(g.values().unwrap());
    is_convex_standard(&g, tol * scale, tol * scale)
}

/// Ordinary convexity of `f` sampled on `m` uniform points, relative tolerance.
pub fn is_convex_on(f: &dyn RealFn, interval: Interval, m: usize, tol: f64) -> Result<ConvexityVerdict> {
    let g = uniform_grid(interval, m)?.sample(f)?;
    let scale = max_abs(g.values().unwrap());
    is_convex_standard(&g, tol * scale, tol * scale)
}

/// `(f0, f1)`-convexity from the chord definition.
///
/// Draws `pair_count` pairs `x < y` from a ChaCha8 stream seeded with
/// [`DEFAULT_CHORD_SEED`], builds `h = c0 f0 + c1 f1` with `h = phi` at `x` and
/// `y`, and requires `phi <= h + tol` on an `m`-point subgrid of `[x, y]`.
/// Strictness asks for a gap of at least the strict margin at every midpoint.
/// `margin` is the smallest gap when convex fails, else the smallest midpoint gap.
pub fn is_gen_convex_by_chords(
    phi: &dyn RealFn,
    f0: &dyn RealFn,
    f1: &dyn RealFn,
    interval: Interval,
    pair_count: usize,
    m: usize,
    tol: f64,
) -> Result<ConvexityVerdict> {
    check_pair(f0, f1, interval)?;
    chord_verdict(phi, f0, f1, interval, pair_count, m, tol, DEFAULT_CHORD_SEED)
}

/// [`is_gen_convex_by_chords`] without pair validation and with an explicit seed.
#[allow(clippy::too_many_arguments)]
pub fn chord_verdict(
    phi: &dyn RealFn,
    f0: &dyn RealFn,
    f1: &dyn RealFn,
    interval: Interval,
    pair_count: usize,
    m: usize,
    tol: f64,
    seed: u64,
) -> Result<ConvexityVerdict> {
    if m < 3 || pair_count == 0 {
        return Err(Error::BadArgument("chord check needs m >= 3 and at least one pair".into()));
    }
    let (a, b) = (interval.a(), interval.b());
    let min_gap = 1e-3 * interval.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(pair_count);
    while pairs.len() < pair_count {
        let (u, v): (f64, f64) = (rng.gen_range(a..=b), rng.gen_range(a..=b));
        let (x, y) = if u < v { (u, v) } else { (v, u) };
        if y - x >= min_gap {
            pairs.push((x, y));
        }
    }
    let r = Ratio::new(f1, f0);
    let q = Ratio::new(phi, f0);

    // per pair: (min gap, point of min gap, midpoint gap, max |phi|)
    let per_pair: Vec<(f64, f64, f64, f64)> = {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map(|&(x, y)| -> Result<(f64, f64, f64, f64)> {
                let (rx, ry) = (r.eval(x)?, r.eval(y)?);
                if !(ry > rx) {
                    return Err(Error::SingularInterpolant { x, y });
                }
                let (qx, qy) = (q.eval(x)?, q.eval(y)?);
                let c1 = (qy - qx) / (ry - rx);
                let c0 = qx - c1 * rx;
                let gap = |t: f64| -> Result<(f64, f64)> {
                    let ft = f0.eval(t)?;
                    let h = ft * (c0 + c1 * r.eval(t)?);
                    let p = phi.eval(t)?;
                    Ok((h - p, p.abs().max(h.abs())))
                };
                let sub = uniform_grid(Interval::new(x, y)?, m)?;
                let mut worst = (f64::INFINITY, x);
                let mut size = 0.0f64;
                for &t in sub.points() {
                    let (g, s) = gap(t)?;
                    size = size.max(s);
                    if g < worst.0 {
                        worst = (g, t);
                    }
                }
                let (mid_gap, _) = gap(0.5 * (x + y))?;
                Ok((worst.0, worst.1, mid_gap, size))
            })
            .collect::<Result<Vec<_>>>()?
    };

    let scale = per_pair.iter().fold(0.0f64, |m, p| m.max(p.3));
    let abs_tol = tol * scale;
    let (worst_idx, worst) = per_pair
        .iter()
        .enumerate()
        .min_by(|p, q| p.1 .0.total_cmp(&q.1 .0))
        .unwrap();
    let (mid_idx, mid) = per_pair
        .iter()
        .enumerate()
        .min_by(|p, q| p.1 .2.total_cmp(&q.1 .2))
        .unwrap();
    let convex = worst.0 >= -abs_tol;
    let strictly = convex && mid.2 >= abs_tol;
    let (witness, margin) = if convex {
        let (x, y) = pairs[mid_idx];
        ([x, 0.5 * (x + y), y], mid.2)
    } else {
        let (x, y) = pairs[worst_idx];
        ([x, worst.1, y], worst.0)
    };
    Ok(ConvexityVerdict { convex, strictly, witness: Some(witness), margin, tol: abs_tol, strict_margin: abs_tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyReport {
    pub direction: Direction,
    pub gen_convex: bool,
    pub convex: bool,
    /// The implication claimed for this direction, in words.
    pub implication: &'static str,
    pub holds: bool,
}

/// For increasing `phi`, `(1, f1)`-convexity implies convexity; for
/// decreasing `phi`, convexity implies `(1, f1)`-convexity. Requires `f1`
/// increasing and strictly convex on the grid.
pub fn hierarchy_check(
    phi: &dyn RealFn,
    f1: &dyn RealFn,
    interval: Interval,
    m: usize,
    tol: f64,
) -> Result<HierarchyReport> {
    let grid = uniform_grid(interval, m)?;
    let f1v = sweep(grid.points(), |x| f1.eval(x))?;
    let increasing = f1v.windows(2).all(|w| w[0] < w[1]);
    let strictly_convex = second_differences(&f1v).iter().all(|&d| d > 0.0);
    if !increasing || !strictly_convex {
        return Err(Error::Precondition("f1 must be increasing and strictly convex".into()));
    }
    let pv = sweep(grid.points(), |x| phi.eval(x))?;
    let direction = if pv.windows(2).all(|w| w[0] <= w[1]) {
        Direction::Increasing
    } else if pv.windows(2).all(|w| w[0] >= w[1]) {
        Direction::Decreasing
    } else {
        return Err(Error::NotMonotone("phi is not monotone on the grid".into()));
    };
    let one = Expr::Const(1.0);
    let gen_convex = is_gen_convex(phi, &one, f1, interval, m, tol)?.convex;
    let convex = is_convex_on(phi, interval, m, tol)?.convex;
    let (implication, holds) = match direction {
        Direction::Increasing => ("(1,f1)-convex => convex", !gen_convex || convex),
        Direction::Decreasing => ("convex => (1,f1)-convex", !convex || gen_convex),
    };
    Ok(HierarchyReport { direction, gen_convex, convex, implication, holds })
}
