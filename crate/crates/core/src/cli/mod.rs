//! `transonic` command line: flag and config-file parsing, the four
//! commands and their output files.
//!
//! Exit codes: 0 success, 1 internal error, 2 input out of range (including
//! usage errors), 3 invariant breach, 4 non-convergence.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::fbp2d::{FbpConfig, FbpError};
use crate::radial::{ExitKind, RadialError};

pub const OUT_DIR_ENV: &str = "TRANSONIC_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "transonic-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_RANGE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

/// Fully resolved inputs of one run. Written verbatim into `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gamma: f64,
    pub b0: f64,
    pub u0: f64,
    pub r0: f64,
    pub r1: f64,
    pub dim: u32,
    pub half_angle: f64,
    /// Exit datum: at most one of `v1`, `phi1`, `r_s`.
    pub v1: Option<f64>,
    pub phi1: Option<f64>,
    pub r_s: Option<f64>,
    /// Nodes per profile in `radial` output.
    pub profile_nodes: usize,
    /// Exit-map mismatch accepted by shock fitting.
    pub shock_tol: f64,
    /// Relative offset used for the interval endpoint limits.
    pub interval_tol: f64,
    /// Exit datum kind for `interval` and `map`.
    pub kind: ExitKind,
    pub samples: usize,
    pub fbp: FbpConfig,
    pub perturbation: PerturbationSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    pub mode: u32,
    /// Largest front displacement, in radius units.
    pub amplitude: f64,
    /// Seeded smooth noise instead of a cosine mode when set.
    pub seed: Option<u64>,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self { mode: 1, amplitude: 0.0, seed: None }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            b0: 2.5,
            u0: 1.5,
            r0: 1.0,
            r1: 2.0,
            dim: 3,
            half_angle: std::f64::consts::FRAC_PI_6,
            v1: None,
            phi1: None,
            r_s: None,
            profile_nodes: 201,
            shock_tol: 1e-12,
            interval_tol: 1e-10,
            kind: ExitKind::Speed,
            samples: 100,
            fbp: FbpConfig::default(),
            perturbation: PerturbationSpec::default(),
        }
    }
}

/// Run record. Passing it back through `--config` repeats the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
}

#[derive(Debug, Parser)]
#[command(name = "transonic", version, about = "Transonic shocks in divergent nozzles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radial shock solution for one exit datum or shock radius.
    Radial {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        datum: DatumArgs,
        /// Nodes per profile.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Admissible interval of the exit datum.
    Interval {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Table of the exit map over shock radii.
    Map {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Free-boundary run from a perturbed front in a 2D wedge.
    #[command(name = "verify2d")]
    Verify2d {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Speed,
    Potential,
}

impl From<KindArg> for ExitKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Speed => ExitKind::Speed,
            KindArg::Potential => ExitKind::Potential,
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run config or manifest; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (else $TRANSONIC_OUT_DIR, else ./transonic-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    u0: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    half_angle: Option<f64>,
    #[arg(long)]
    shock_tol: Option<f64>,
    #[arg(long)]
    interval_tol: Option<f64>,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct DatumArgs {
    /// Exit speed.
    #[arg(long)]
    v1: Option<f64>,
    /// Exit potential.
    #[arg(long)]
    phi1: Option<f64>,
    /// Shock radius.
    #[arg(long)]
    rs: Option<f64>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    ntheta: Option<usize>,
    #[arg(long)]
    picard_tol: Option<f64>,
    #[arg(long)]
    linear_tol: Option<f64>,
    #[arg(long)]
    front_tol: Option<f64>,
    /// Front under-relaxation.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    delta_clamp: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_picard: Option<usize>,
    /// Cosine mode of the initial perturbation.
    #[arg(long)]
    mode: Option<u32>,
    /// Largest initial front displacement.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Seeded smooth noise instead of a cosine mode.
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub(crate) fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<RadialError> for CliError {
    fn from(e: RadialError) -> Self {
        let code = match &e {
            RadialError::Gas(_)
            | RadialError::Geometry(_)
            | RadialError::EntrySpeed { .. }
            | RadialError::Radius { .. }
            | RadialError::ShockRadius { .. }
            | RadialError::GridSize(_)
            | RadialError::OutOfRange { .. } => EXIT_RANGE,
            RadialError::EmptyInterval { .. } => EXIT_INVARIANT,
            RadialError::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            RadialError::NoSolution { .. } | RadialError::NotSupersonic { .. } | RadialError::Root(_) => EXIT_INTERNAL,
        };
        Self::new(code, e.to_string())
    }
}

impl From<FbpError> for CliError {
    fn from(e: FbpError) -> Self {
        match e {
            FbpError::Radial(r) => r.into(),
            FbpError::PicardStagnation { .. } | FbpError::LinearSolver { .. } => {
                Self::new(EXIT_NO_CONVERGENCE, e.to_string())
            }
            _ => Self::new(EXIT_RANGE, e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_INTERNAL, format!("i/o: {e}"))
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Messages go to stdout, errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_RANGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Radial { common, datum, nodes } => {
            let (mut cfg, out) = resolve("radial", &common)?;
            apply_datum(&mut cfg, &datum);
            if let Some(n) = nodes {
                cfg.profile_nodes = n;
            }
            commands::radial(&cfg, &out)
        }
        Command::Interval { common, kind } => {
            let (mut cfg, out) = resolve("interval", &common)?;
            if let Some(k) = kind {
                cfg.kind = k.into();
            }
            commands::interval(&cfg, &out)
        }
        Command::Map { common, kind, samples } => {
            let (mut cfg, out) = resolve("map", &common)?;
            if let Some(k) = kind {
                cfg.kind = k.into();
            }
            if let Some(n) = samples {
                cfg.samples = n;
            }
            commands::map(&cfg, &out)
        }
        Command::Verify2d { common, datum, solver } => {
            let (mut cfg, out) = resolve("verify2d", &common)?;
            apply_datum(&mut cfg, &datum);
            apply_solver(&mut cfg, &solver);
            commands::verify2d(&cfg, &out)
        }
    }
}

/// Defaults, then the config file, then the common flags.
fn resolve(command: &str, args: &CommonArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = match &args.config {
        Some(path) => load_config(command, path)?,
        None => RunConfig::default(),
    };
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.gamma, args.gamma);
    set(&mut cfg.b0, args.b0);
    set(&mut cfg.u0, args.u0);
    set(&mut cfg.r0, args.r0);
    set(&mut cfg.r1, args.r1);
    set(&mut cfg.half_angle, args.half_angle);
    set(&mut cfg.shock_tol, args.shock_tol);
    set(&mut cfg.interval_tol, args.interval_tol);
    if let Some(d) = args.dim {
        cfg.dim = d;
    }
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok((cfg, out))
}

/// Accepts a bare [`RunConfig`] or a [`Manifest`] for the same command.
fn load_config(command: &str, path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_RANGE, format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::new(EXIT_RANGE, format!("config {} is not JSON: {e}", path.display())))?;
    let config = if value.get("command").is_some() && value.get("config").is_some() {
        let m: Manifest = serde_json::from_value(value)
            .map_err(|e| CliError::new(EXIT_RANGE, format!("bad manifest {}: {e}", path.display())))?;
        if m.command != command {
            return Err(CliError::new(
                EXIT_RANGE,
                format!("manifest {} records command `{}`, not `{command}`", path.display(), m.command),
            ));
        }
        m.config
    } else {
        serde_json::from_value(value)
            .map_err(|e| CliError::new(EXIT_RANGE, format!("bad config {}: {e}", path.display())))?
    };
    Ok(config)
}

fn apply_datum(cfg: &mut RunConfig, d: &DatumArgs) {
    if d.v1.is_some() || d.phi1.is_some() || d.rs.is_some() {
        cfg.v1 = d.v1;
        cfg.phi1 = d.phi1;
        cfg.r_s = d.rs;
    }
}

fn apply_solver(cfg: &mut RunConfig, s: &SolverArgs) {
    let f = &mut cfg.fbp;
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = s.$field { f.$field = v; })*};
    }
    set!(nr, ntheta, picard_tol, linear_tol, front_tol, omega, delta_clamp, max_outer, max_picard);
    let p = &mut cfg.perturbation;
    if let Some(m) = s.mode {
        p.mode = m;
    }
    if let Some(a) = s.amplitude {
        p.amplitude = a;
    }
    if s.seed.is_some() {
        p.seed = s.seed;
    }
}
