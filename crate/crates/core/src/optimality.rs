//! Competitor operators built from discrete measures.
//!
//! A family attaches a positive measure `mu_k` to every node of a base
//! operator and defines
//!
//! ```text
//! L f = sum_k lambda_k(f) p_k,    lambda_k(f) = f0(t_k) * integral f dmu_k
//! ```
//!
//! `L` fixes `f0` and `f1` exactly when every `P_k = f0 mu_k` is a
//! probability measure whose `r = f1 / f0` mean is `r(t_k)`. For such `L` and
//! any `(f0, f1)`-convex `phi`, `phi <= B phi <= L phi`, and equality at one
//! interior point for a strictly convex `psi` forces `mu_k` to be the point
//! mass at `t_k` for every `k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convexity::{is_gen_convex, DEFAULT_GRID, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::exponential::ExpMNParams;
use crate::function::{
    integrate, parse_expression, sweep, uniform_grid, Atom, DiscreteMeasure, Expr, Interval, Ratio,
    RealFn,
};
use crate::operator::{OperatorKind, OperatorSpec};

/// Positional tolerance for recognising a point mass at its node.
pub const DIRAC_POSITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalFamily {
    base: OperatorSpec,
    f0: Expr,
    f1: Expr,
    measures: Vec<DiscreteMeasure>,
}

impl FunctionalFamily {
    pub fn new(base: OperatorSpec, f0: Expr, f1: Expr, measures: Vec<DiscreteMeasure>) -> Result<Self> {
        if measures.len() != base.n() + 1 {
            return Err(Error::BadArgument(format!(
                "{} measures for degree {}",
                measures.len(),
                base.n()
            )));
        }
        Ok(Self { base, f0, f1, measures })
    }

    /// `mu_k = delta_{t_k} / f0(t_k)`, which realises the base operator itself.
    pub fn all_dirac(base: OperatorSpec) -> Result<Self> {
        let (f0, f1) = base.fixed_pair();
        let iv = base.interval();
        let measures = base
            .nodes()
            .iter()
            .map(|&t| DiscreteMeasure::new(vec![Atom { x: t, w: 1.0 / f0.evaluate(t)? }], iv))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, f0, f1, measures)
    }

    pub fn base(&self) -> &OperatorSpec {
        &self.base
    }

    pub fn f0(&self) -> &Expr {
        &self.f0
    }

    pub fn f1(&self) -> &Expr {
        &self.f1
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    /// `lambda_k(f) = f0(t_k) * integral f dmu_k` for every `k`.
    pub fn coefficients(&self, f: &dyn RealFn) -> Result<Vec<f64>> {
        self.base
            .nodes()
            .iter()
            .zip(&self.measures)
            .map(|(&t, mu)| Ok(self.f0.evaluate(t)? * integrate(mu, f)?))
            .collect()
    }

    pub fn is_all_dirac(&self) -> bool {
        self.base
            .nodes()
            .iter()
            .zip(&self.measures)
            .all(|(&t, mu)| mu.is_dirac_at(t, DIRAC_POSITION_TOL))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `|integral f0 dmu_k - 1|`
    pub residual_0: Vec<f64>,
    /// `|integral r dP_k - r(t_k)|`, `dP_k = f0 dmu_k`
    pub residual_1: Vec<f64>,
    pub tol: f64,
    pub admissible: bool,
}

pub fn admissibility(fam: &FunctionalFamily, tol: f64) -> Result<AdmissibilityReport> {
    let r = Ratio::new(&fam.f1, &fam.f0);
    let iv = fam.base.interval();
    let mut residual_0 = Vec::with_capacity(fam.measures.len());
    let mut residual_1 = Vec::with_capacity(fam.measures.len());
    for (&t, mu) in fam.base.nodes().iter().zip(&fam.measures) {
        residual_0.push((integrate(mu, &fam.f0)? - 1.0).abs());
        let p = DiscreteMeasure::new(mu.reweighted(&fam.f0)?, iv)?;
        residual_1.push((integrate(&p, &r)? - r.eval(t)?).abs());
    }
    let admissible = residual_0.iter().chain(&residual_1).all(|&v| v <= tol);
    Ok(AdmissibilityReport { residual_0, residual_1, tol, admissible })
}

/// Probability `w delta_u + (1 - w) delta_v` with `r`-mean `r(t)`, returned
/// as the atoms of `mu = P / f0`.
pub fn two_atom_measure(f0: &dyn RealFn, f1: &dyn RealFn, t: f64, u: f64, v: f64, interval: Interval) -> Result<DiscreteMeasure> {
    if !(u < t && t < v) {
        return Err(Error::DegenerateNode(t));
    }
    let r = Ratio::new(f1, f0);
    let (ru, rt, rv) = (r.eval(u)?, r.eval(t)?, r.eval(v)?);
    if !(ru < rt && rt < rv) {
        return Err(Error::NotMonotone(format!("r not increasing across ({u}, {t}, {v})")));
    }
    let w = (rv - rt) / (rv - ru);
    DiscreteMeasure::new(
        vec![Atom { x: u, w: w / f0.eval(u)? }, Atom { x: v, w: (1.0 - w) / f0.eval(v)? }],
        interval,
    )
}

/// Builds an admissible family with two atoms per interior node.
///
/// For node `t` with `d = min(t - a, b - t)` the atoms sit at
/// `u = t - spread * d * xi` and `v = t + spread * d * eta`. With `seed = None`
/// both factors are 1; otherwise `xi, eta` are drawn uniformly from
/// `[1/2, 1]`, one pair per node, from a ChaCha8 stream. Nodes on the
/// boundary get point masses.
pub fn make_two_atom_family(
    base: &OperatorSpec,
    f0: &Expr,
    f1: &Expr,
    spread: f64,
    seed: Option<u64>,
) -> Result<FunctionalFamily> {
    if !(spread > 0.0 && spread < 1.0) {
        return Err(Error::BadArgument(format!("spread {spread} outside (0, 1)")));
    }
    let iv = base.interval();
    let rep = crate::function::validate_pair(f0, f1, iv, crate::function::DEFAULT_CERT_GRID)?;
    if !rep.is_valid() {
        return Err(Error::Precondition("(f0, f1) fails positivity or monotonicity".into()));
    }
    let (a, b) = (iv.a(), iv.b());
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut measures = Vec::with_capacity(base.n() + 1);
    for &t in base.nodes() {
        let (xi, eta) = match rng.as_mut() {
            Some(r) => (r.gen_range(0.5..=1.0), r.gen_range(0.5..=1.0)),
            None => (1.0, 1.0),
        };
        if t <= a || t >= b {
            measures.push(DiscreteMeasure::new(vec![Atom { x: t, w: 1.0 / f0.evaluate(t)? }], iv)?);
            continue;
        }
        let d = (t - a).min(b - t);
        let (u, v) = (t - spread * d * xi, t + spread * d * eta);
        measures.push(two_atom_measure(f0, f1, t, u, v, iv)?);
    }
    FunctionalFamily::new(base.clone(), f0.clone(), f1.clone(), measures)
}

/// `L f(x)`.
pub fn apply_family(fam: &FunctionalFamily, f: &dyn RealFn, x: f64) -> Result<f64> {
    fam.base.combine(&fam.coefficients(f)?, x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    /// `min_x (L phi - B phi)` over the grid.
    pub min_l_minus_b: f64,
    pub argmin_l_minus_b: f64,
    /// `min_x (B phi - phi)` over the grid.
    pub min_b_minus_phi: f64,
    pub argmin_b_minus_phi: f64,
    /// `min (L phi - B phi)` over the grid without its two endpoints.
    pub interior_margin: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Rows `(x, phi, B phi, L phi)` on an `m`-point grid.
pub fn dominance_rows(fam: &FunctionalFamily, phi: &dyn RealFn, grid_m: usize) -> Result<Vec<[f64; 4]>> {
    let grid = uniform_grid(fam.base.interval(), grid_m)?;
    let bc = fam.base.coefficients(phi)?;
    let lc = fam.coefficients(phi)?;
    let pts = grid.points();
    let pv = sweep(pts, |x| phi.eval(x))?;
    let bv = sweep(pts, |x| fam.base.combine(&bc, x))?;
    let lv = sweep(pts, |x| fam.base.combine(&lc, x))?;
    Ok((0..pts.len()).map(|i| [pts[i], pv[i], bv[i], lv[i]]).collect())
}

/// Checks `phi <= B phi <= L phi` on a grid, to `tol`.
pub fn dominance_check(fam: &FunctionalFamily, phi: &dyn RealFn, grid_m: usize, tol: f64) -> Result<DominanceReport> {
    let rows = dominance_rows(fam, phi, grid_m)?;
    Ok(summarize_dominance(&rows, tol))
}

pub fn summarize_dominance(rows: &[[f64; 4]], tol: f64) -> DominanceReport {
    let argmin = |it: &mut dyn Iterator<Item = (f64, f64)>| {
        it.fold((f64::INFINITY, f64::NAN), |best, (x, v)| if v < best.0 { (v, x) } else { best })
    };
    let (min_lb, arg_lb) = argmin(&mut rows.iter().map(|r| (r[0], r[3] - r[2])));
    let (min_bp, arg_bp) = argmin(&mut rows.iter().map(|r| (r[0], r[2] - r[1])));
    let interior = if rows.len() > 2 { &rows[1..rows.len() - 1] } else { rows };
    let (margin, _) = argmin(&mut interior.iter().map(|r| (r[0], r[3] - r[2])));
    DominanceReport {
        min_l_minus_b: min_lb,
        argmin_l_minus_b: arg_lb,
        min_b_minus_phi: min_bp,
        argmin_b_minus_phi: arg_bp,
        interior_margin: margin,
        tol,
        holds: min_lb >= -tol && min_bp >= -tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityVerdict {
    pub t: f64,
    pub l_value: f64,
    pub b_value: f64,
    pub tol: f64,
    pub equal_at_t: bool,
    pub all_dirac: bool,
    /// `equal_at_t <=> all_dirac`; always expected to hold.
    pub consistent: bool,
}

/// Default probe tolerance `1e-12 * max(1, |B psi(t)|)`.
pub fn default_probe_tol(b_value: f64) -> f64 {
    1e-12 * b_value.abs().max(1.0)
}

/// Compares `L psi(t)` with `B psi(t)` at an interior `t` and checks the
/// outcome against whether the family is all point masses at the nodes.
/// `psi` must be strictly `(f0, f1)`-convex per [`is_gen_convex`].
pub fn equality_case_probe(fam: &FunctionalFamily, psi: &dyn RealFn, t: f64, tol: Option<f64>) -> Result<EqualityVerdict> {
    let iv = fam.base.interval();
    if !(iv.a() < t && t < iv.b()) {
        return Err(Error::BadArgument(format!("probe point {t} must lie strictly inside {iv}")));
    }
    let verdict = is_gen_convex(psi, &fam.f0, &fam.f1, iv, DEFAULT_GRID, DEFAULT_TOL)?;
    if !verdict.strictly {
        return Err(Error::Precondition(format!(
            "psi is not strictly (f0, f1)-convex (margin {:e})",
            verdict.margin
        )));
    }
    let l_value = apply_family(fam, psi, t)?;
    let b_value = fam.base.apply(psi, t)?;
    let tol = tol.unwrap_or_else(|| default_probe_tol(b_value));
    let equal_at_t = (l_value - b_value).abs() <= tol;
    let all_dirac = fam.is_all_dirac();
    Ok(EqualityVerdict { t, l_value, b_value, tol, equal_at_t, all_dirac, consistent: equal_at_t == all_dirac })
}

// JSON document form.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseDoc {
    pub kind: String,
    pub n: usize,
    pub interval: (f64, f64),
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub base: BaseDoc,
    pub f0: String,
    pub f1: String,
    pub measures: Vec<Vec<Atom>>,
}

impl From<&OperatorSpec> for BaseDoc {
    fn from(op: &OperatorSpec) -> Self {
        let mut params = serde_json::Map::new();
        let kind = match op.kind() {
            OperatorKind::Classical => "classical",
            OperatorKind::PowerFix { j } => {
                params.insert("j".into(), j.into());
                "power"
            }
            OperatorKind::ExpMn { mu0, mu1 } => {
                params.insert("mu0".into(), mu0.into());
                params.insert("mu1".into(), mu1.into());
                "expmn"
            }
        };
        let iv = op.interval();
        BaseDoc { kind: kind.into(), n: op.n(), interval: (iv.a(), iv.b()), params }
    }
}

impl TryFrom<&BaseDoc> for OperatorSpec {
    type Error = Error;

    fn try_from(doc: &BaseDoc) -> Result<Self> {
        let num = |key: &str| -> Result<f64> {
            doc.params
                .get(key)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| Error::BadArgument(format!("base.params.{key} missing or not a number")))
        };
        let iv = Interval::new(doc.interval.0, doc.interval.1)?;
        match doc.kind.as_str() {
            "classical" => OperatorSpec::new(doc.n, iv, OperatorKind::Classical),
            "power" => OperatorSpec::new(doc.n, iv, OperatorKind::PowerFix { j: num("j")? as usize }),
            "expmn" => OperatorSpec::exp_mn(ExpMNParams::new(num("mu0")?, num("mu1")?, iv, doc.n)?),
            other => Err(Error::BadArgument(format!("unknown operator kind '{other}'"))),
        }
    }
}

impl FunctionalFamily {
    pub fn to_doc(&self) -> FamilyDoc {
        FamilyDoc {
            base: BaseDoc::from(&self.base),
            f0: self.f0.to_string(),
            f1: self.f1.to_string(),
            measures: self.measures.iter().map(|m| m.atoms().to_vec()).collect(),
        }
    }

    pub fn from_doc(doc: &FamilyDoc) -> Result<Self> {
        let base = OperatorSpec::try_from(&doc.base)?;
        let iv = base.interval();
        let measures = doc
            .measures
            .iter()
            .map(|atoms| DiscreteMeasure::new(atoms.clone(), iv))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, parse_expression(&doc.f0)?, parse_expression(&doc.f1)?, measures)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("family document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FamilyDoc = serde_json::from_str(text)
            .map_err(|e| Error::BadArgument(format!("family document: {e}")))?;
        Self::from_doc(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn all_dirac_reproduces_base() {
        let base = OperatorSpec::power_fix(6, 2).unwrap();
        let fam = FunctionalFamily::all_dirac(base.clone()).unwrap();
        let rep = admissibility(&fam, 0.0).unwrap();
        assert!(rep.admissible);
        let f = e("exp(x) + abs(x - 0.3)");
        for x in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert_eq!(apply_family(&fam, &f, x).unwrap(), base.apply(&f, x).unwrap());
        }
        assert!(fam.is_all_dirac());
    }

    #[test]
    fn two_atom_weights() {
        let iv = Interval::unit();
        let mu = two_atom_measure(&e("1"), &e("x"), 0.5, 0.25, 0.75, iv).unwrap();
        assert_eq!(mu.atoms()[0].w, 0.5);
        let mu = two_atom_measure(&e("1"), &e("exp(x)"), 0.5, 0.25, 0.75, iv).unwrap();
        assert!((mu.atoms()[0].w - 0.562_176_500_885_798_1).abs() < 1e-15);
        assert!(matches!(
            two_atom_measure(&e("1"), &e("x"), 0.0, 0.0, 0.0, iv),
            Err(Error::DegenerateNode(_))
        ));
    }

    #[test]
    fn symmetric_family_matches_formula() {
        let base = OperatorSpec::classical(2).unwrap();
        let fam = make_two_atom_family(&base, &e("1"), &e("x"), 0.5, None).unwrap();
        let atoms = fam.measures()[1].atoms();
        assert_eq!((atoms[0].x, atoms[1].x), (0.25, 0.75));
        assert_eq!((atoms[0].w, atoms[1].w), (0.5, 0.5));
        assert!(fam.measures()[0].is_dirac_at(0.0, 0.0));
        assert!(fam.measures()[2].is_dirac_at(1.0, 0.0));
        assert!(make_two_atom_family(&base, &e("1"), &e("x"), 1.0, None).is_err());
        assert!(make_two_atom_family(&base, &e("1"), &e("x"), 0.0, None).is_err());
    }

    #[test]
    fn constructed_families_are_admissible() {
        let bases = [
            OperatorSpec::classical(9).unwrap(),
            OperatorSpec::power_fix(9, 3).unwrap(),
            OperatorSpec::exp_mn(ExpMNParams::new(-1.0, 2.0, Interval::new(-0.5, 1.0).unwrap(), 9).unwrap())
                .unwrap(),
        ];
        for base in &bases {
            let (f0, f1) = base.fixed_pair();
            for seed in 0..5 {
                let fam = make_two_atom_family(base, &f0, &f1, 0.6, Some(seed)).unwrap();
                let rep = admissibility(&fam, 1e-12).unwrap();
                assert!(rep.admissible, "{} {:?}", base.label(), rep);
                for (k, &t) in base.nodes().iter().enumerate() {
                    let c0 = fam.coefficients(&f0).unwrap()[k];
                    let c1 = fam.coefficients(&f1).unwrap()[k];
                    assert!((c0 - f0.evaluate(t).unwrap()).abs() <= 1e-10 * c0.abs().max(1.0));
                    assert!((c1 - f1.evaluate(t).unwrap()).abs() <= 1e-10 * c1.abs().max(1.0));
                }
                for &x in uniform_grid(base.interval(), 201).unwrap().points() {
                    for f in [&f0, &f1] {
                        let want = f.evaluate(x).unwrap();
                        let got = apply_family(&fam, f, x).unwrap();
                        assert!((got - want).abs() <= 1e-10 * want.abs().max(1e-300));
                    }
                }
            }
        }
    }

    #[test]
    fn perturbed_weight_is_detected() {
        let base = OperatorSpec::exp_mn(ExpMNParams::unit(4).unwrap()).unwrap();
        let (f0, f1) = base.fixed_pair();
        let fam = make_two_atom_family(&base, &f0, &f1, 0.5, None).unwrap();
        let mut doc = fam.to_doc();
        doc.measures[2][0].w += 1e-3;
        let x = doc.measures[2][0].x;
        let bad = FunctionalFamily::from_doc(&doc).unwrap();
        let rep = admissibility(&bad, 1e-10).unwrap();
        assert!(!rep.admissible);
        assert!((rep.residual_0[2] - 1e-3 * f0.evaluate(x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_measures_cannot_spread() {
        let base = OperatorSpec::classical(4).unwrap();
        let iv = base.interval();
        let mut fam = FunctionalFamily::all_dirac(base.clone()).unwrap().to_doc();
        // probability at k = 0 with mass off the endpoint
        fam.measures[0] = vec![Atom { x: 0.0, w: 0.9 }, Atom { x: 0.1, w: 0.1 }];
        let rep = admissibility(&FunctionalFamily::from_doc(&fam).unwrap(), 1e-10).unwrap();
        assert!(rep.residual_0[0] <= 1e-15);
        assert!(rep.residual_1[0] > 1e-10);
        fam.measures[0] = vec![Atom { x: 0.0, w: 1.0 }];
        fam.measures[4] = vec![Atom { x: 0.95, w: 0.5 }, Atom { x: 1.0, w: 0.5 }];
        let rep = admissibility(&FunctionalFamily::from_doc(&fam).unwrap(), 1e-10).unwrap();
        assert!(!rep.admissible);
        let _ = iv;
    }

    #[test]
    fn berens_devore_square() {
        let base = OperatorSpec::classical(5).unwrap();
        let fam = make_two_atom_family(&base, &e("1"), &e("x"), 0.4, Some(3)).unwrap();
        let rep = dominance_check(&fam, &e("x^2"), 201, 1e-12).unwrap();
        assert!(rep.holds);
        assert!(rep.interior_margin > 0.0);
        let fam = FunctionalFamily::all_dirac(base).unwrap();
        let rep = dominance_check(&fam, &e("x^2"), 201, 1e-12).unwrap();
        assert_eq!(rep.min_l_minus_b, 0.0);
        assert_eq!(rep.interior_margin, 0.0);
    }

    #[test]
    fn probe_cases() {
        let base = OperatorSpec::classical(6).unwrap();
        let dirac = FunctionalFamily::all_dirac(base.clone()).unwrap();
        let v = equality_case_probe(&dirac, &e("x^2"), 0.5, None).unwrap();
        assert!(v.equal_at_t && v.all_dirac && v.consistent);
        let fam = make_two_atom_family(&base, &e("1"), &e("x"), 0.5, None).unwrap();
        let v = equality_case_probe(&fam, &e("x^2"), 0.5, None).unwrap();
        assert!(!v.equal_at_t && !v.all_dirac && v.consistent);
        assert!(matches!(equality_case_probe(&fam, &e("x"), 0.5, None), Err(Error::Precondition(_))));
        assert!(matches!(equality_case_probe(&fam, &e("x^2"), 0.0, None), Err(Error::BadArgument(_))));
    }

    #[test]
    fn json_round_trip() {
        let base = OperatorSpec::exp_mn(ExpMNParams::new(-1.0, 2.0, Interval::unit(), 3).unwrap()).unwrap();
        let (f0, f1) = base.fixed_pair();
        let fam = make_two_atom_family(&base, &f0, &f1, 0.3, Some(11)).unwrap();
        let text = fam.to_json();
        let back = FunctionalFamily::from_json(&text).unwrap();
        assert_eq!(back, fam);
        assert!(FunctionalFamily::from_json("{\"base\":1}").is_err());
    }
}
