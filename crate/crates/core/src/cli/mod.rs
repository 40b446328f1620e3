//! Command-line front end.
//!
//! Every subcommand builds an [`ExperimentReport`] with per-point rows,
//! summary scalars and named checks. Exit status: 0 when every check
//! passes, 1 when one fails, 2 on usage or input errors.

mod config;
mod report;

use std::fs;
use std::io::Write;

use clap::Parser;

pub use config::{Cli, CommandName, ExperimentConfig, Flags, Format, OpName, Sub};
pub use report::{fmt_f64, Check, ExperimentReport};

use crate::classical::apply_power;
use crate::convexity::{
    is_gen_convex, is_gen_convex_by_chords, transform_to_standard, DEFAULT_CHORD_PAIRS,
    DEFAULT_CHORD_SEED, DEFAULT_CHORD_SUBGRID, DEFAULT_GRID, DEFAULT_TOL,
};
use crate::error::Error;
use crate::exponential::{apply_mn, convergence_metrics, phi_n, ExpMNParams};
use crate::function::{parse_expression, second_differences, uniform_grid, Expr, FnRef, Interval, RealFn};
use crate::operator::{OperatorKind, OperatorSpec};
use crate::optimality::{
    admissibility, dominance_rows, equality_case_probe, make_two_atom_family, summarize_dominance,
    FunctionalFamily,
};

pub const THREADS_ENV: &str = "GENBERN_THREADS";

pub use crate::function::parse_expression as parse;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = pool.install(|| execute(&cfg));
    match outcome.and_then(|rep| emit(&cfg, &rep).map(|_| rep)) {
        Ok(rep) if rep.passed => 0,
        Ok(_) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be an integer >= 1, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn resolve_config(cli: Cli) -> CliResult<ExperimentConfig> {
    let (command, flags) = cli.command.split();
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    flags.overlay(&mut cfg);
    cfg.command = command;
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, rep: &ExperimentReport) -> CliResult<()> {
    let body = match cfg.format {
        Format::Csv => rep.to_csv(),
        Format::Json => rep.to_json(),
    };
    match &cfg.out {
        Some(path) => {
            fs::write(path, body)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", rep.summary_text());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(body.as_bytes());
            eprint!("{}", rep.summary_text());
        }
    }
    Ok(())
}

/// Parses an expression flag, reporting the offending byte with a caret.
fn expr_arg(flag: &str, text: &str) -> CliResult<Expr> {
    parse_expression(text).map_err(|e| match e {
        Error::Parse { offset, message } => CliError::Usage(format!(
            "--{flag}: parse error at byte {offset}: {message}\n  {text}\n  {}^",
            " ".repeat(offset)
        )),
        other => CliError::Lib(other),
    })
}

fn required_expr(flag: &str, value: &Option<String>) -> CliResult<Expr> {
    match value {
        Some(text) => expr_arg(flag, text),
        None => Err(CliError::Usage(format!("--{flag} is required"))),
    }
}

fn interval(cfg: &ExperimentConfig) -> CliResult<Interval> {
    Interval::new(cfg.a, cfg.b).map_err(CliError::Lib)
}

pub fn build_operator(cfg: &ExperimentConfig) -> CliResult<OperatorSpec> {
    let iv = interval(cfg)?;
    let kind = match cfg.op {
        OpName::Classical => OperatorKind::Classical,
        OpName::Power => OperatorKind::PowerFix { j: cfg.j },
        OpName::Expmn => OperatorKind::ExpMn { mu0: cfg.mu0, mu1: cfg.mu1 },
    };
    Ok(OperatorSpec::new(cfg.n, iv, kind)?)
}

fn pair(cfg: &ExperimentConfig, op: &OperatorSpec) -> CliResult<(Expr, Expr)> {
    let (d0, d1) = op.fixed_pair();
    let f0 = cfg.f0.as_deref().map(|s| expr_arg("f0", s)).transpose()?.unwrap_or(d0);
    let f1 = cfg.f1.as_deref().map(|s| expr_arg("f1", s)).transpose()?.unwrap_or(d1);
    Ok((f0, f1))
}

/// Runs one experiment without touching the filesystem (except `--family`).
pub fn execute(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    match cfg.command {
        CommandName::Eval => eval(cfg),
        CommandName::Nodes => nodes(cfg),
        CommandName::Fixcheck => fixcheck(cfg),
        CommandName::Shapecheck => shapecheck(cfg),
        CommandName::Genconvex => genconvex(cfg),
        CommandName::Dominance => dominance(cfg),
        CommandName::EqualityProbe => equality_probe(cfg),
        CommandName::Converge => converge(cfg),
        CommandName::Counterexample => counterexample(cfg),
    }
}

const ENDPOINT_CLAIM: &str = "B f(a) = f(a) and B f(b) = f(b)";

fn endpoint_check(rep: &mut ExperimentReport, op: &OperatorSpec, f: &dyn RealFn) -> CliResult<()> {
    let iv = op.interval();
    let mut worst = 0.0f64;
    for x in [iv.a(), iv.b()] {
        let want = f.eval(x)?;
        worst = worst.max((op.apply(f, x)? - want).abs() / want.abs().max(1.0));
    }
    rep.check("endpoint-interpolation", ENDPOINT_CLAIM, worst <= 1e-12, worst, 1e-12);
    Ok(())
}

fn eval(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let op = build_operator(cfg)?;
    let f = required_expr("f", &cfg.f)?;
    let image = op.image(&f)?;
    let mut rep = ExperimentReport::new(cfg, &["x", "f", "Bf"]);
    for &x in uniform_grid(op.interval(), cfg.grid.unwrap_or(101))?.points() {
        rep.row(vec![x, f.evaluate(x)?, image.eval(x)?]);
    }
    rep.note("operator", op.label());
    endpoint_check(&mut rep, &op, &f)?;
    Ok(rep)
}

fn nodes(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let op = build_operator(cfg)?;
    let t = op.nodes();
    let mut rep = ExperimentReport::new(cfg, &["k", "t"]);
    for (k, &v) in t.iter().enumerate() {
        rep.row(vec![k as f64, v]);
    }
    let iv = op.interval();
    let n = op.n();
    rep.note("operator", op.label());
    rep.check("first-node", "t_0 = a", t[0] == iv.a(), t[0], iv.a());
    rep.check("last-node", "t_n = b", t[n] == iv.b(), t[n], iv.b());
    let min_step = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    match op.kind() {
        OperatorKind::PowerFix { .. } => {
            rep.check("nondecreasing", "t_k <= t_{k+1}", min_step >= 0.0, min_step, 0.0)
        }
        _ => rep.check("increasing", "t_k < t_{k+1}", min_step > 0.0, min_step, 0.0),
    }
    Ok(rep)
}

fn fixcheck(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let op = build_operator(cfg)?;
    let (f0, f1) = op.fixed_pair();
    let tol = cfg.tol.unwrap_or(1e-10);
    let i0 = op.image(&f0)?;
    let i1 = op.image(&f1)?;
    let mut rep = ExperimentReport::new(cfg, &["x", "f0", "Bf0", "f1", "Bf1"]);
    let (mut r0, mut r1) = (0.0f64, 0.0f64);
    let rel = |got: f64, want: f64| if want == 0.0 { got.abs() } else { (got - want).abs() / want.abs() };
    for &x in uniform_grid(op.interval(), cfg.grid.unwrap_or(201))?.points() {
        let (v0, v1) = (f0.evaluate(x)?, f1.evaluate(x)?);
        let (b0, b1) = (i0.eval(x)?, i1.eval(x)?);
        r0 = r0.max(rel(b0, v0));
        r1 = r1.max(rel(b1, v1));
        rep.row(vec![x, v0, b0, v1, b1]);
    }
    rep.note("operator", op.label());
    rep.note("f0", f0.to_string());
    rep.note("f1", f1.to_string());
    rep.check("fixes-f0", "B f0 = f0 (max relative residual)", r0 <= tol, r0, tol);
    rep.check("fixes-f1", "B f1 = f1 (max relative residual)", r1 <= tol, r1, tol);
    Ok(rep)
}

fn shapecheck(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let op = build_operator(cfg)?;
    let f = required_expr("f", &cfg.f)?;
    let (f0, f1) = pair(cfg, &op)?;
    let image = op.image(&f)?;
    let mut rep = ExperimentReport::new(cfg, &["x", "f", "Bf"]);
    let mut min_gap = f64::INFINITY;
    let mut scale = 1.0f64;
    for &x in uniform_grid(op.interval(), cfg.grid.unwrap_or(201))?.points() {
        let (v, b) = (f.evaluate(x)?, image.eval(x)?);
        min_gap = min_gap.min(b - v);
        scale = scale.max(v.abs());
        rep.row(vec![x, v, b]);
    }
    endpoint_check(&mut rep, &op, &f)?;
    let verdict = is_gen_convex(&f, &f0, &f1, op.interval(), DEFAULT_GRID, DEFAULT_TOL)?;
    rep.note("operator", op.label());
    rep.note("phi_gen_convex", verdict.convex);
    rep.note("min_B_minus_phi", min_gap);
    if verdict.convex {
        let tol = cfg.tol.unwrap_or(1e-12) * scale;
        rep.check("lower-bound", "phi <= B phi for (f0,f1)-convex phi", min_gap >= -tol, min_gap, -tol);
    }
    Ok(rep)
}

fn genconvex(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let f = required_expr("f", &cfg.f)?;
    let iv = interval(cfg)?;
    let (f0, f1) = match (&cfg.f0, &cfg.f1) {
        (None, None) if cfg.op != OpName::Classical || iv.is_unit() => pair(cfg, &build_operator(cfg)?)?,
        _ => (
            expr_arg("f0", cfg.f0.as_deref().unwrap_or("1"))?,
            expr_arg("f1", cfg.f1.as_deref().unwrap_or("x"))?,
        ),
    };
    let m = cfg.grid.unwrap_or(DEFAULT_GRID);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let by_transform = is_gen_convex(&f, &f0, &f1, iv, m, tol)?;
    let by_chords = is_gen_convex_by_chords(&f, &f0, &f1, iv, DEFAULT_CHORD_PAIRS, DEFAULT_CHORD_SUBGRID, tol)?;
    let g = transform_to_standard(&f, &f0, &f1, iv, m)?;
    let mut rep = ExperimentReport::new(cfg, &["y", "g"]);
    for (y, v) in g.points().iter().zip(g.values().unwrap()) {
        rep.row(vec![*y, *v]);
    }
    rep.note("f0", f0.to_string());
    rep.note("f1", f1.to_string());
    rep.note("transform_convex", by_transform.convex);
    rep.note("transform_strict", by_transform.strictly);
    rep.note("transform_margin", by_transform.margin);
    rep.note("chord_convex", by_chords.convex);
    rep.note("chord_strict", by_chords.strictly);
    rep.note("chord_margin", by_chords.margin);
    rep.note("chord_seed", DEFAULT_CHORD_SEED);
    let agree = by_transform.convex == by_chords.convex;
    rep.check(
        "checkers-agree",
        "phi is (f0,f1)-convex iff (phi/f0) o (f1/f0)^-1 is convex",
        agree,
        if agree { 0.0 } else { 1.0 },
        0.0,
    );
    Ok(rep)
}

fn load_family(cfg: &ExperimentConfig) -> CliResult<FunctionalFamily> {
    if let Some(path) = &cfg.family {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read family {}: {e}", path.display())))?;
        return Ok(FunctionalFamily::from_json(&text)?);
    }
    let op = build_operator(cfg)?;
    if cfg.spread == 0.0 {
        return Ok(FunctionalFamily::all_dirac(op)?);
    }
    let (f0, f1) = op.fixed_pair();
    Ok(make_two_atom_family(&op, &f0, &f1, cfg.spread, Some(cfg.seed))?)
}

/// `f1^2 / f0`, strictly generalized-convex for every built-in pair.
fn default_psi(op: &OperatorSpec) -> Expr {
    match op.kind() {
        OperatorKind::Classical => Expr::monomial(2),
        OperatorKind::PowerFix { j } => Expr::monomial(2 * j as u32),
        OperatorKind::ExpMn { mu0, mu1 } => Expr::exp_linear(2.0 * mu1 - mu0),
    }
}

fn dominance(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let fam = load_family(cfg)?;
    let phi = match &cfg.f {
        Some(s) => expr_arg("f", s)?,
        None => default_psi(fam.base()),
    };
    let iv = fam.base().interval();
    let verdict = is_gen_convex(&phi, fam.f0(), fam.f1(), iv, DEFAULT_GRID, DEFAULT_TOL)?;
    if !verdict.convex {
        return Err(CliError::Usage(format!(
            "--f {phi} is not (f0,f1)-convex (margin {:e}); the dominance chain is not claimed",
            verdict.margin
        )));
    }
    let tol = cfg.tol.unwrap_or(1e-11);
    let adm = admissibility(&fam, 1e-10)?;
    let rows = dominance_rows(&fam, &phi, cfg.grid.unwrap_or(201))?;
    let d = summarize_dominance(&rows, tol);
    let mut rep = ExperimentReport::new(cfg, &["x", "phi", "Bphi", "Lphi"]);
    for r in rows {
        rep.row(r.to_vec());
    }
    let worst_adm = adm.residual_0.iter().chain(&adm.residual_1).fold(0.0f64, |m, v| m.max(*v));
    rep.note("operator", fam.base().label());
    rep.note("phi", phi.to_string());
    rep.note("all_dirac", fam.is_all_dirac());
    rep.note("interior_margin", d.interior_margin);
    rep.note("argmin_L_minus_B", d.argmin_l_minus_b);
    rep.note("argmin_B_minus_phi", d.argmin_b_minus_phi);
    rep.check("admissible", "integral f0 dmu_k = 1 and r-mean of P_k = r(t_k)", adm.admissible, worst_adm, 1e-10);
    rep.check("B-over-phi", "phi <= B phi", d.min_b_minus_phi >= -tol, d.min_b_minus_phi, -tol);
    rep.check("L-over-B", "B phi <= L phi", d.min_l_minus_b >= -tol, d.min_l_minus_b, -tol);
    Ok(rep)
}

fn equality_probe(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let fam = load_family(cfg)?;
    let psi = match &cfg.psi {
        Some(s) => expr_arg("psi", s)?,
        None => default_psi(fam.base()),
    };
    let v = equality_case_probe(&fam, &psi, cfg.t, cfg.tol).map_err(|e| match e {
        Error::Precondition(m) | Error::BadArgument(m) => CliError::Usage(m),
        other => CliError::Lib(other),
    })?;
    let coeffs = fam.coefficients(&psi)?;
    let mut rep = ExperimentReport::new(cfg, &["k", "t_k", "atoms", "lambda_k", "psi_t_k"]);
    for (k, (&t, mu)) in fam.base().nodes().iter().zip(fam.measures()).enumerate() {
        rep.row(vec![k as f64, t, mu.atoms().len() as f64, coeffs[k], psi.evaluate(t)?]);
    }
    rep.note("operator", fam.base().label());
    rep.note("psi", psi.to_string());
    rep.note("L_psi_t", v.l_value);
    rep.note("B_psi_t", v.b_value);
    rep.note("equal_at_t", v.equal_at_t);
    rep.note("all_dirac", v.all_dirac);
    let gap = (v.l_value - v.b_value).abs();
    rep.check(
        "equality-rigidity",
        "L psi(t) = B psi(t) at interior t iff every mu_k is the point mass at t_k",
        v.consistent,
        gap,
        v.tol,
    );
    Ok(rep)
}

fn converge(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let mut ns = vec![1usize];
    while ns.last().unwrap() * 2 <= cfg.nmax {
        ns.push(ns.last().unwrap() * 2);
    }
    let metrics = ns.iter().map(|&n| convergence_metrics(n)).collect::<Result<Vec<_>, _>>()?;
    let mut rep = ExperimentReport::new(cfg, &["n", "sup_dev", "slope_at_1"]);
    for m in &metrics {
        rep.row(vec![m.n as f64, m.sup_dev, m.slope_at_1]);
    }
    let sup_dec = metrics.windows(2).all(|w| w[1].sup_dev < w[0].sup_dev);
    let slope_dec = metrics.windows(2).all(|w| w[1].slope_at_1 < w[0].slope_at_1 && w[1].slope_at_1 > 1.0);
    let e = std::f64::consts::E;
    let slope1 = metrics[0].slope_at_1;
    let m1000 = convergence_metrics(1000)?;
    rep.note("sup_dev_n1000", m1000.sup_dev);
    rep.note("slope_at_1_n1000", m1000.slope_at_1);
    rep.check("sup-decreasing", "sup|phi_n - x| strictly decreasing in n", sup_dec, metrics.last().unwrap().sup_dev, 0.0);
    rep.check("slope-decreasing", "phi_n'(1) decreases to 1", slope_dec, metrics.last().unwrap().slope_at_1, 1.0);
    rep.check("slope-n1", "phi_1'(1) = e/(e-1)", (slope1 - e / (e - 1.0)).abs() <= 1e-6, slope1, e / (e - 1.0));
    rep.check("sup-n1000", "sup|phi_1000 - x| <= 1e-3", m1000.sup_dev <= 1e-3, m1000.sup_dev, 1e-3);
    Ok(rep)
}

fn counterexample(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    match cfg.which.as_deref().unwrap_or("mn-convexity") {
        "mn-convexity" => mn_convexity(cfg),
        "classical-genconvexity" => classical_genconvexity(cfg),
        "power-affine" => power_affine(cfg),
        other => Err(CliError::Usage(format!(
            "--which '{other}': expected mn-convexity, classical-genconvexity or power-affine"
        ))),
    }
}

fn mn_convexity(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let params = ExpMNParams::unit(cfg.n)?;
    let h = -Expr::X;
    let grid = uniform_grid(Interval::unit(), cfg.grid.unwrap_or(201))?;
    let out = grid.points().iter().map(|&x| apply_mn(&params, &h, x)).collect::<Result<Vec<_>, _>>()?;
    let d2 = second_differences(&out);
    let mut rep = ExperimentReport::new(cfg, &["x", "B_neg_x", "neg_phi_n", "second_difference"]);
    let mut dev = 0.0f64;
    for (i, &x) in grid.points().iter().enumerate() {
        let neg_phi = -phi_n(&params, x)?;
        dev = dev.max((out[i] - neg_phi).abs());
        let d = if i == 0 || i + 1 == out.len() { f64::NAN } else { d2[i - 1] };
        rep.row(vec![x, out[i], neg_phi, d]);
    }
    let max_d2 = d2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.note("operator", format!("expmn(n={}, mu0=0, mu1=1, [0, 1])", cfg.n));
    rep.check("image-of-neg-x", "B(-x) = -phi_n", dev <= 1e-12, dev, 1e-12);
    rep.check(
        "strictly-concave-image",
        "second differences of B(-x) are negative: a convex function maps to a strictly concave one",
        max_d2 <= -1e-12,
        max_d2,
        -1e-12,
    );
    Ok(rep)
}

fn classical_genconvexity(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let ex = Expr::X.exp();
    let one = Expr::Const(1.0);
    let iv = Interval::unit();
    let image = FnRef(|x| crate::classical::apply_classical(&ex, cfg.n, x));
    let m = cfg.grid.unwrap_or(DEFAULT_GRID);
    let verdict = is_gen_convex(&image, &one, &ex, iv, m, DEFAULT_TOL)?;
    let g = transform_to_standard(&image, &one, &ex, iv, m)?;
    let mut rep = ExperimentReport::new(cfg, &["y", "g"]);
    for (y, v) in g.points().iter().zip(g.values().unwrap()) {
        rep.row(vec![*y, *v]);
    }
    rep.note("operator", format!("classical(n={})", cfg.n));
    if let Some(w) = verdict.witness {
        rep.note("witness", w.to_vec());
    }
    rep.check(
        "breaks-generalized-convexity",
        "B_n e^x is not (1,e^x)-convex although e^x is",
        !verdict.convex,
        verdict.margin,
        -verdict.tol,
    );
    Ok(rep)
}

fn power_affine(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let f = Expr::Const(1.0) - Expr::X;
    let mut rep = ExperimentReport::new(cfg, &["x", "B_one_minus_x", "one_minus_x"]);
    let mut min_gap = f64::INFINITY;
    for &x in uniform_grid(Interval::unit(), cfg.grid.unwrap_or(201))?.points() {
        let b = apply_power(&f, cfg.n, cfg.j, x)?;
        if (0.05..=0.95).contains(&x) {
            min_gap = min_gap.min(b - (1.0 - x));
        }
        rep.row(vec![x, b, 1.0 - x]);
    }
    rep.note("operator", format!("power(n={}, j={})", cfg.n, cfg.j));
    rep.check(
        "breaks-convexity",
        "B_{n,j}(1 - x) > 1 - x on the interior for j > 1",
        min_gap > 1e-12,
        min_gap,
        1e-12,
    );
    Ok(rep)
}
