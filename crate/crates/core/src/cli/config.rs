use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum CommandName {
    Eval,
    Nodes,
    Fixcheck,
    Shapecheck,
    Genconvex,
    Dominance,
    EqualityProbe,
    Converge,
    Counterexample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OpName {
    Classical,
    Power,
    Expmn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything a run depends on. Serialized verbatim into JSON reports
/// (minus the output path) and accepted back through `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandName,
    pub op: OpName,
    pub n: usize,
    pub j: usize,
    pub mu0: f64,
    pub mu1: f64,
    pub a: f64,
    pub b: f64,
    pub f: Option<String>,
    pub f0: Option<String>,
    pub f1: Option<String>,
    pub psi: Option<String>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub spread: f64,
    pub t: f64,
    pub which: Option<String>,
    pub nmax: usize,
    pub family: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: CommandName::Eval,
            op: OpName::Classical,
            n: 10,
            j: 2,
            mu0: 0.0,
            mu1: 1.0,
            a: 0.0,
            b: 1.0,
            f: None,
            f0: None,
            f1: None,
            psi: None,
            grid: None,
            tol: None,
            seed: 1,
            spread: 0.5,
            t: 0.5,
            which: None,
            nmax: 1024,
            family: None,
            out: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "genbern", version, about = "Generalized Bernstein operators: evaluation and certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Evaluate an operator image on a grid.
    Eval(Flags),
    /// List the nodes of an operator.
    Nodes(Flags),
    /// Check that an operator reproduces its fixed pair.
    Fixcheck(Flags),
    /// Endpoint interpolation and phi <= B phi for generalized-convex phi.
    Shapecheck(Flags),
    /// Decide (f0, f1)-convexity with both checkers.
    Genconvex(Flags),
    /// Verify phi <= B phi <= L phi for a competitor family.
    Dominance(Flags),
    /// Probe L psi(t) = B psi(t) against the point-mass structure.
    EqualityProbe(Flags),
    /// Convergence of the exponential operator on [0, 1].
    Converge(Flags),
    /// Reproduce a shape-preservation counterexample.
    Counterexample(Flags),
}

impl Sub {
    pub fn split(self) -> (CommandName, Flags) {
        match self {
            Sub::Eval(f) => (CommandName::Eval, f),
            Sub::Nodes(f) => (CommandName::Nodes, f),
            Sub::Fixcheck(f) => (CommandName::Fixcheck, f),
            Sub::Shapecheck(f) => (CommandName::Shapecheck, f),
            Sub::Genconvex(f) => (CommandName::Genconvex, f),
            Sub::Dominance(f) => (CommandName::Dominance, f),
            Sub::EqualityProbe(f) => (CommandName::EqualityProbe, f),
            Sub::Converge(f) => (CommandName::Converge, f),
            Sub::Counterexample(f) => (CommandName::Counterexample, f),
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// JSON file with an ExperimentConfig; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub op: Option<OpName>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub f0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub f1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub spread: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Competitor family document (JSON).
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Flags {
    pub fn overlay(self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if self.$field.is_some() { cfg.$field = self.$field; })*
            };
        }
        set!(op, n, j, mu0, mu1, a, b, seed, spread, t, nmax, format);
        set_opt!(f, f0, f1, psi, grid, tol, which, family, out);
    }
}
