//! Classical Bernstein operator on `[0, 1]` and the power-fixing variant
//! `B_{n,j}` that reproduces `1` and `x^j`.
//!
//! Basis values are computed in log space,
//! `exp(ln C(n,k) + k ln x + (n-k) ln(1-x))`, with `x = 0` and `x = 1`
//! special-cased exactly, so degrees up to a few thousand neither overflow
//! nor underflow prematurely.

use crate::error::{Error, Result};
use crate::function::{CompensatedSum, RealFn};

/// Largest `n` for which `C(n, k)` is computed as a float before taking the log.
const DIRECT_BINOMIAL_MAX_N: usize = 1000;

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n, "k = {k} > n = {n}");
    let m = k.min(n - k);
    if n <= DIRECT_BINOMIAL_MAX_N {
        let mut c = 1.0f64;
        for i in 1..=m {
            c = c * (n - m + i) as f64 / i as f64;
        }
        c.ln()
    } else {
        (1..=m)
            .map(|i| ((n - m + i) as f64 / i as f64).ln())
            .collect::<CompensatedSum>()
            .value()
    }
}

/// `[ln C(n, 0), ..., ln C(n, n)]`.
pub fn ln_binomial_row(n: usize) -> Vec<f64> {
    (0..=n).map(|k| ln_binomial(n, k)).collect()
}

/// Weights `C(n,k) s^k (1-s)^{n-k}` for all `k`, given `s` in `[0, 1]`.
///
/// `ln_s` and `ln_t` are `ln s` and `ln(1 - s)`; callers pass them so that
/// `1 - s` can be formed without cancellation where that matters.
pub(crate) fn bernstein_row(ln_binom: &[f64], s: f64, ln_s: f64, ln_t: f64) -> Vec<f64> {
    let n = ln_binom.len() - 1;
    let mut row = vec![0.0; n + 1];
    if s <= 0.0 {
        row[0] = 1.0;
    } else if s >= 1.0 {
        row[n] = 1.0;
    } else {
        for (k, (slot, lc)) in row.iter_mut().zip(ln_binom).enumerate() {
            *slot = (lc + k as f64 * ln_s + (n - k) as f64 * ln_t).exp();
        }
    }
    row
}

pub(crate) fn classical_row(ln_binom: &[f64], x: f64) -> Vec<f64> {
    bernstein_row(ln_binom, x, x.ln(), (-x).ln_1p())
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::BadArgument(format!("x = {x} outside [0, 1]")))
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::BadArgument("degree n must be at least 1".into()))
    }
}

/// `p_{n,k}(x) = C(n,k) x^k (1-x)^{n-k}`.
pub fn classical_basis(n: usize, k: usize, x: f64) -> Result<f64> {
    if k > n {
        return Err(Error::BadArgument(format!("k = {k} outside 0..={n}")));
    }
    check_unit(x)?;
    if x == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if x == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    Ok((ln_binomial(n, k) + k as f64 * x.ln() + (n - k) as f64 * (-x).ln_1p()).exp())
}

/// `sum_k coeffs[k] basis[k]` in ascending `k` with compensated accumulation.
pub(crate) fn combine(coeffs: &[f64], basis: &[f64]) -> f64 {
    coeffs
        .iter()
        .zip(basis)
        .map(|(c, p)| c * p)
        .collect::<CompensatedSum>()
        .value()
}

pub fn classical_nodes(n: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    nodes[n] = 1.0;
    nodes
}

/// `B_n f(x) = sum_k f(k/n) p_{n,k}(x)`.
pub fn apply_classical(f: &dyn RealFn, n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    check_unit(x)?;
    let coeffs = classical_nodes(n)
        .into_iter()
        .map(|t| f.eval(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&coeffs, &classical_row(&ln_binomial_row(n), x)))
}

/// Nodes `t_k = [k(k-1)...(k-j+1) / (n(n-1)...(n-j+1))]^{1/j}`.
///
/// The falling-factorial quotient is a running product of ratios, so it
/// stays in `[0, 1]` for any degree.
pub fn power_nodes(n: usize, j: usize) -> Result<Vec<f64>> {
    if j < 1 || j > n {
        return Err(Error::BadArgument(format!("power index j = {j} outside 1..={n}")));
    }
    let inv_j = 1.0 / j as f64;
    Ok((0..=n)
        .map(|k| {
            if k < j {
                return 0.0;
            }
            if k == n {
                return 1.0;
            }
            let q: f64 = (0..j).map(|i| (k - i) as f64 / (n - i) as f64).product();
            if j == 1 {
                q
            } else {
                q.powf(inv_j)
            }
        })
        .collect())
}

/// `B_{n,j} f(x) = sum_k f(t_k) p_{n,k}(x)` with the nodes of [`power_nodes`].
pub fn apply_power(f: &dyn RealFn, n: usize, j: usize, x: f64) -> Result<f64> {
    check_unit(x)?;
    let coeffs = power_nodes(n, j)?
        .into_iter()
        .map(|t| f.eval(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&coeffs, &classical_row(&ln_binomial_row(n), x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{uniform_grid, Expr, Interval};

    fn grid(m: usize) -> Vec<f64> {
        uniform_grid(Interval::unit(), m).unwrap().points().to_vec()
    }

    #[test]
    fn basis_values() {
        assert_eq!(classical_basis(2, 1, 0.5).unwrap(), 0.5);
        for n in [1, 5, 40] {
            assert_eq!(classical_basis(n, 0, 0.0).unwrap(), 1.0);
            for k in 1..=n {
                assert_eq!(classical_basis(n, k, 0.0).unwrap(), 0.0);
            }
        }
        assert!(classical_basis(3, 4, 0.5).is_err());
        assert!(classical_basis(3, 1, 1.5).is_err());
    }

    #[test]
    fn high_degree_is_finite() {
        let v = classical_basis(2000, 1000, 0.5).unwrap();
        // C(2000,1000) 2^-2000 ~ 1 / sqrt(pi * 1000)
        assert!((v / (1.0 / (std::f64::consts::PI * 1000.0).sqrt()) - 1.0).abs() < 1e-3);
        let total: f64 = (0..=2000).map(|k| classical_basis(2000, k, 0.3).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn basis_partition_of_unity() {
        for n in (1..=200).step_by(7).chain([200]) {
            let lb = ln_binomial_row(n);
            for x in grid(201) {
                let s = classical_row(&lb, x).into_iter().collect::<CompensatedSum>().value();
                assert!((s - 1.0).abs() <= 1e-13, "n={n} x={x} sum={s}");
            }
        }
    }

    #[test]
    fn applies_to_quadratic() {
        let sq = Expr::X.powi(2);
        assert!((apply_classical(&sq, 2, 0.5).unwrap() - 0.375).abs() < 1e-15);
        let e = Expr::X.exp();
        // brute-force summation oracle: 1.6903886013137508
        let v = apply_classical(&e, 5, 0.5).unwrap();
        assert!((v - 1.690_388_601_313_750_8).abs() < 1e-14);
        assert!(v > 0.5f64.exp());
    }

    #[test]
    fn fixes_affine_functions() {
        for n in [1, 3, 17, 200] {
            for x in grid(201) {
                assert!((apply_classical(&Expr::Const(1.0), n, x).unwrap() - 1.0).abs() <= 1e-12);
                let v = apply_classical(&Expr::X, n, x).unwrap();
                assert!((v - x).abs() <= 1e-12 * x.max(1e-300) + 1e-300, "n={n} x={x} v={v}");
            }
        }
    }

    #[test]
    fn moment_identity() {
        let sq = Expr::X.powi(2);
        for n in 1..=50 {
            for x in grid(201) {
                let v = apply_classical(&sq, n, x).unwrap();
                assert!((v - x * x - x * (1.0 - x) / n as f64).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn nodes_of_power_operator() {
        let n5 = power_nodes(5, 1).unwrap();
        for (k, t) in n5.iter().enumerate() {
            assert!((t - k as f64 / 5.0).abs() < 1e-15);
        }
        let n3 = power_nodes(3, 2).unwrap();
        assert_eq!(n3[0], 0.0);
        assert_eq!(n3[1], 0.0);
        assert!((n3[2] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((n3[2] - 0.5773503).abs() < 1e-7);
        assert_eq!(n3[3], 1.0);
        assert!(power_nodes(2, 3).is_err());
        assert!(power_nodes(2, 0).is_err());
        let big = power_nodes(2000, 7).unwrap();
        assert!(big.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(big[2000], 1.0);
    }

    #[test]
    fn power_operator_fixes_its_pair() {
        for n in [2, 6, 20, 50] {
            for j in 1..=n.min(5) {
                for x in grid(201) {
                    let one = apply_power(&Expr::Const(1.0), n, j, x).unwrap();
                    assert!((one - 1.0).abs() <= 1e-13);
                    let xj = x.powi(j as i32);
                    let v = apply_power(&Expr::monomial(j as u32), n, j, x).unwrap();
                    assert!((v - xj).abs() <= 1e-10 * xj.max(1e-300), "n={n} j={j} x={x}");
                }
            }
        }
    }

    #[test]
    fn power_operator_breaks_affine_convexity() {
        let one_minus_x = Expr::Const(1.0) - Expr::X;
        for (n, j) in [(4, 2), (6, 3), (10, 2)] {
            for x in grid(201).into_iter().filter(|x| (0.05..=0.95).contains(x)) {
                assert!(apply_power(&one_minus_x, n, j, x).unwrap() > 1.0 - x + 1e-12);
            }
        }
    }

    #[test]
    fn convex_dominance() {
        let fs = [Expr::X.powi(2), Expr::X.exp(), Expr::abs_shift(0.4)];
        for f in &fs {
            for n in [1, 2, 5, 13, 50] {
                for x in grid(201) {
                    assert!(apply_classical(f, n, x).unwrap() >= f.evaluate(x).unwrap() - 1e-12);
                }
            }
        }
    }

    #[test]
    fn power_operator_below_monomials_of_low_degree() {
        // B_{n,j} x^k <= x^k for 1 <= k <= j
        for (n, j) in [(6, 2), (8, 4), (12, 5)] {
            for k in 1..=j {
                let f = Expr::monomial(k as u32);
                for x in grid(201) {
                    let v = apply_power(&f, n, j, x).unwrap();
                    assert!(v <= x.powi(k as i32) + 1e-12, "n={n} j={j} k={k} x={x}");
                }
            }
        }
    }
}
