use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "emc",
    version,
    about = "Entangled Markov chains: classification, density blocks, correlations and clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Transient states, recurrent classes, periods and stationary vectors.
    Classify,
    /// Reduced density matrix of k consecutive sites.
    Density,
    /// A finite correlation and optionally a shift-correlation curve.
    Correlate,
    /// Ergodic decomposition and the clustering verdict.
    Cluster,
    /// Random-walk matrix on a group and its equivariance checks.
    Groupwalk,
    /// Runs the invariant suite.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Density => "density",
            Command::Correlate => "correlate",
            Command::Cluster => "cluster",
            Command::Groupwalk => "groupwalk",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    SqrtCache,
    PhaseModulus,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Stochastic matrix file (CSV rows or sparse JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Group specification JSON file.
    #[arg(long, global = true)]
    pub group: Option<PathBuf>,
    /// Phases: a JSON file, inline JSON, or `{"seed": n}`.
    #[arg(long, global = true)]
    pub phases: Option<String>,
    /// Mixture coefficients over recurrent classes, comma separated.
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Block length for `density`.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Curve length for `correlate` and `cluster`.
    #[arg(long = "gap-max", global = true)]
    pub gap_max: Option<usize>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled test words and matrices (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Word for `correlate`, e.g. `e0:0,1,e1:1`.
    #[arg(long, global = true)]
    pub word: Option<String>,
    /// First observable of a curve, e.g. `e0:0`.
    #[arg(long, global = true)]
    pub a: Option<String>,
    /// Second observable of a curve.
    #[arg(long, global = true)]
    pub b: Option<String>,
    /// Negative control for `selftest`.
    #[arg(long, global = true, value_enum)]
    pub mutate: Option<Mutation>,
    /// Tolerance override `NAME=VALUE`; also accepted as `--tol.NAME VALUE`.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Key-value configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Options {
    /// Fills unset options from `other`; tolerance overrides from `other`
    /// come first so that ours win.
    pub fn or(self, other: Options) -> Options {
        let mut tol = other.tol;
        tol.extend(self.tol);
        Options {
            input: self.input.or(other.input),
            group: self.group.or(other.group),
            phases: self.phases.or(other.phases),
            alpha: self.alpha.or(other.alpha),
            k: self.k.or(other.k),
            gap_max: self.gap_max.or(other.gap_max),
            out: self.out.or(other.out),
            seed: self.seed.or(other.seed),
            word: self.word.or(other.word),
            a: self.a.or(other.a),
            b: self.b.or(other.b),
            mutate: self.mutate.or(other.mutate),
            tol,
            config: self.config,
        }
    }
}

/// Rewrites `--tol.NAME=V` and `--tol.NAME V` into `--tol NAME=V`.
pub fn normalize_tol_flags<I: IntoIterator<Item = String>>(args: I) -> Vec<String> {
    let mut out = Vec::new();
    let mut iter = args.into_iter().peekable();
    while let Some(arg) = iter.next() {
        match arg.strip_prefix("--tol.") {
            Some(rest) => {
                let pair = match rest.split_once('=') {
                    Some(_) => rest.to_string(),
                    None => format!("{rest}={}", iter.next().unwrap_or_default()),
                };
                out.push("--tol".into());
                out.push(pair);
            }
            None => out.push(arg),
        }
    }
    out
}
