use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use flowout_core::poly::{phase_names, position_names};
use flowout_core::Polynomial;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A polynomial given either as an expression (`"1+x^2+y^2"`) or as an
/// exponent/coefficient table (`[{"exp":[2,0],"c":1.0}, ...]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolySpec {
    Expr(String),
    Table(Polynomial),
}

impl FromStr for PolySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(PolySpec::Expr(s.to_string()))
    }
}

impl std::fmt::Display for PolySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolySpec::Expr(s) => f.write_str(s),
            PolySpec::Table(p) => write!(f, "{}", serde_json::to_string(p).unwrap_or_default()),
        }
    }
}

impl PolySpec {
    fn resolve(&self, names: &[&str], field: &str) -> Result<Polynomial, CliError> {
        let p = match self {
            PolySpec::Expr(s) => Polynomial::parse(s, names).map_err(|e| CliError::config(field, e.to_string()))?,
            PolySpec::Table(p) => p.clone(),
        };
        if p.nvars() != names.len() {
            return Err(CliError::config(
                field,
                format!("polynomial has {} variables, expected {}", p.nvars(), names.len()),
            ));
        }
        Ok(p)
    }

    pub fn position(&self, n: usize, field: &str) -> Result<Polynomial, CliError> {
        self.resolve(&position_names(n), field)
    }

    pub fn phase(&self, n: usize, field: &str) -> Result<Polynomial, CliError> {
        self.resolve(&phase_names(n), field)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "flowout",
    version,
    about = "Flow-outs of Lagrangian manifolds, glancing points and cusp normal forms"
)]
pub struct Cli {
    /// Directory for CSV/JSON artifacts and the manifest.
    #[arg(long, global = true, default_value = "flowout-out")]
    pub out: PathBuf,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 20240611)]
    pub seed: u64,

    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Run a JSON configuration file.
    Run { config: PathBuf },
    #[command(flatten)]
    Direct(Command),
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Dump a flow-out of the Bessel cylinder as CSV.
    Flow(FlowArgs),
    /// Search the Bessel cylinder for glancing points.
    Glancing(GlancingArgs),
    /// Classify a glancing pair by its bracket matrices.
    Classify(ClassifyArgs),
    /// Tabulate the invariant density against det(P, P_psi).
    Density(DensityArgs),
    /// Evaluate the time integral u_h(x, E) on a grid.
    Evaluate(EvaluateArgs),
    /// Sample the transition through a glancing extremum.
    Transition(TransitionArgs),
    /// Run the acceptance suite.
    VerifyAll(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Flow(_) => "flow",
            Command::Glancing(_) => "glancing",
            Command::Classify(_) => "classify",
            Command::Density(_) => "density",
            Command::Evaluate(_) => "evaluate",
            Command::Transition(_) => "transition",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub command: Command,
}

fn default_out() -> PathBuf {
    PathBuf::from("flowout-out")
}

fn default_seed() -> u64 {
    20240611
}

macro_rules! parsed_default {
    ($t:ty) => {
        impl Default for $t {
            fn default() -> Self {
                <$t as Parser>::parse_from(["flowout"])
            }
        }
    };
}

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowArgs {
    #[arg(long, default_value = "conformal1")]
    pub hamiltonian: String,
    #[arg(long, default_value = "1+x^2+y^2")]
    pub rho: PolySpec,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.2,1.5")]
    pub phi_range: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    /// Flow-out of `Lambda_0 cap {H = E}` instead of the space-time flow-out.
    #[arg(long = "E")]
    pub energy: Option<f64>,
    /// Grid nodes per chart parameter.
    #[arg(long, value_delimiter = ',', default_value = "5,8,6")]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}
parsed_default!(FlowArgs);

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlancingArgs {
    #[arg(long, default_value = "conformal1")]
    pub hamiltonian: String,
    #[arg(long, default_value = "0.5*(1+(x-1)^2+(y-0.5)^2)")]
    pub rho: PolySpec,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "-3,3")]
    pub phi_range: Vec<f64>,
    #[arg(long, default_value_t = 12)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}
parsed_default!(GlancingArgs);

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyArgs {
    /// Quadratic-phase family I, II or III against `g = p1^2 - x1 - p2`.
    #[arg(long)]
    pub case: Option<String>,
    /// Family parameter (`a`, `c` or `b` of cases I, II, III).
    #[arg(long, visible_aliases = ["b", "c"], allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Defining functions in `x1, x2, p1, p2` (used when `--case` is absent).
    #[arg(long)]
    pub f1: Option<PolySpec>,
    #[arg(long)]
    pub f2: Option<PolySpec>,
    #[arg(long)]
    pub g: Option<PolySpec>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}
parsed_default!(ClassifyArgs);

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityArgs {
    #[arg(long, default_value = "1+x^2+y^2")]
    pub rho: PolySpec,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-1.2,-0.5,0.3,0.8,1.3"
    )]
    pub phi: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub psi_count: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.16,0.32,0.48,0.64,0.8")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}
parsed_default!(DensityArgs);

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateArgs {
    #[arg(long, default_value = "conformal2")]
    pub hamiltonian: String,
    #[arg(long, default_value = "1+0.2*x^2+0.1*y^2")]
    pub rho: PolySpec,
    /// Range of `phi` on the Bessel cylinder; the initial amplitude is a
    /// smooth bump vanishing at both ends.
    #[arg(long, value_delimiter = ',', default_value = "0.6,1.4")]
    pub phi_range: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    pub t_max: f64,
    #[arg(long = "E", default_value_t = 0.87)]
    pub energy: f64,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Cutoff: 1 on `[0, t0]`, 0 beyond `2 t0`.
    #[arg(long, default_value_t = 0.15)]
    pub t0: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1.6,1.6")]
    pub bounds: Vec<f64>,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    /// Add the exact radial solution and its Helmholtz residual (H = p^2 only).
    #[arg(long)]
    pub compare_exact: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Relative tolerance of the time quadrature.
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
}
parsed_default!(EvaluateArgs);

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionArgs {
    #[arg(long, default_value = "conformal2")]
    pub hamiltonian: String,
    #[arg(long, default_value = "1+x^2+y^2")]
    pub rho: PolySpec,
    /// Momentum of the plane wave `Lambda_0 = {p = p0}`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub momentum: Vec<f64>,
    /// Glancing point in the parameters of `Lambda_0`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0")]
    pub u0: Vec<f64>,
    #[arg(long = "E", value_delimiter = ',', default_value = "0.9,1.0,1.1")]
    pub energies: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub window: f64,
    #[arg(long, default_value_t = 720)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Skip the gnuplot scripts.
    #[arg(long)]
    pub no_plots: bool,
}
parsed_default!(TransitionArgs);

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyArgs {
    /// Subset of criteria (1-10); all when empty.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<usize>,
}
parsed_default!(VerifyArgs);

pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::config(&field, e.into_inner().to_string())
    })?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::config(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", cfg.schema_version),
        ));
    }
    Ok(cfg)
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be positive, got {v}")))
    }
}

fn pair(field: &str, v: &[f64]) -> Result<(f64, f64), CliError> {
    match v {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(CliError::config(
            field,
            format!("expected an increasing pair, got {v:?}"),
        )),
    }
}

pub fn range(field: &str, v: &[f64]) -> Result<(f64, f64), CliError> {
    pair(field, v)
}

/// Field-level checks shared by flags and config files.
pub fn validate(cmd: &Command) -> Result<(), CliError> {
    let p = format!("command.{}", cmd.name());
    match cmd {
        Command::Flow(a) => {
            positive(&format!("{p}.tol"), a.tol)?;
            positive(&format!("{p}.t_max"), a.t_max)?;
            pair(&format!("{p}.phi_range"), &a.phi_range)?;
        }
        Command::Glancing(a) => {
            positive(&format!("{p}.tol"), a.tol)?;
            pair(&format!("{p}.phi_range"), &a.phi_range)?;
        }
        Command::Classify(a) => positive(&format!("{p}.tol"), a.tol)?,
        Command::Density(a) => {
            positive(&format!("{p}.tol"), a.tol)?;
            if a.psi_count == 0 || a.phi.is_empty() || a.t.is_empty() {
                return Err(CliError::config(&p, "empty grid".into()));
            }
        }
        Command::Evaluate(a) => {
            for (f, v) in [
                ("tol", a.tol),
                ("quad_tol", a.quad_tol),
                ("h", a.h),
                ("t0", a.t0),
                ("t_max", a.t_max),
            ] {
                positive(&format!("{p}.{f}"), v)?;
            }
            pair(&format!("{p}.phi_range"), &a.phi_range)?;
            pair(&format!("{p}.bounds"), &a.bounds)?;
            if a.grid < 2 {
                return Err(CliError::config(&format!("{p}.grid"), "need at least 2 nodes".into()));
            }
        }
        Command::Transition(a) => {
            positive(&format!("{p}.tol"), a.tol)?;
            positive(&format!("{p}.window"), a.window)?;
            if a.energies.is_empty() {
                return Err(CliError::config(&format!("{p}.energies"), "no energies".into()));
            }
        }
        Command::VerifyAll(a) => {
            if let Some(k) = a
                .criteria
                .iter()
                .find(|k| !(1..=flowout_core::verify::CRITERIA).contains(*k))
            {
                return Err(CliError::config(&format!("{p}.criteria"), format!("no criterion {k}")));
            }
        }
    }
    Ok(())
}
