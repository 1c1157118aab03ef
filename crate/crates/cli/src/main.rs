mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{ConfigError, ExperimentConfig, FunctionSpec, Space};
use herzscope::verify::families::BumpParams;
use herzscope::verify::{format_float, run_suite, validate_hypotheses, CSV_COLUMNS};
use herzscope::{
    annulus_mask, ball_mask, herz_morrey_hardy_norm, herz_morrey_norm, luxemburg_norm, make_central_atom,
    make_exponent, riesz, Error, ExponentMode, GridFunction, HerzParams, RieszParams,
};

const REPORT_HELP: &str = "\
Exit codes: 0 every check passed, 1 a check failed, 2 configuration rejected, \
3 a solver did not converge.

verify writes report.json and report.csv into the output directory. The CSV \
columns are, in order: name, params_hash, measured, bound, pass. params_hash \
is the first 16 hex digits of the SHA-256 of the key-sorted JSON parameters; \
floats carry 17 significant digits.

riesz writes riesz.csv with columns x, value (x, y, value in two dimensions).

HERZSCOPE_THREADS caps the number of worker threads.";

#[derive(Parser)]
#[command(name = "herzscope", version, about = "Variable-exponent Herz-Morrey norms and Riesz potentials on a grid")]
#[command(after_help = REPORT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON); the bundled calibration config when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the grid points per axis.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Repeat the experiment at twice the resolution.
    #[arg(long, global = true)]
    refine: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the configured norm of the configured function.
    Norm,
    /// Write samples of I^beta applied to the configured function.
    Riesz,
    /// Run the full check suite and write report.json and report.csv.
    #[command(after_help = REPORT_HELP)]
    Verify,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Self { code: 2, message: message.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model(inner) => inner.into(),
            other => Self::config(other),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } => 3,
            Error::Hypothesis(_) | Error::Range { .. } | Error::Domain(_) | Error::Shape(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("herzscope: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("HERZSCOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("HERZSCOPE_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 1, message: e.to_string() })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    init_threads()?;
    let c = &cli.common;
    let mut cfg = ExperimentConfig::load(c.config.as_deref())?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(points) = c.points {
        cfg.grid.points_per_axis = points;
    }
    cfg.refine |= c.refine;
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("herzscope-out"));

    let setup = cfg.theorem()?;
    validate_hypotheses(&setup)?;
    match cli.command {
        Command::Norm => cmd_norm(&cfg),
        Command::Riesz => cmd_riesz(&cfg, &out),
        Command::Verify => cmd_verify(&cfg, &out),
    }
}

fn build_function(cfg: &ExperimentConfig) -> Result<GridFunction<f64>, Failure> {
    let grid = cfg.grid()?;
    let spec = cfg
        .function
        .as_ref()
        .ok_or_else(|| Failure::config("no function given in the config"))?;
    Ok(match *spec {
        FunctionSpec::Zero => GridFunction::zeros(grid),
        FunctionSpec::Ball { l } => ball_mask(&grid, l)?,
        FunctionSpec::Annulus { l } => annulus_mask(&grid, l)?,
        FunctionSpec::Bump { radius, seed } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Failure::config(format!("bump radius {radius} must be positive")));
            }
            BumpParams::seeded(seed, radius).sample(&grid)?
        }
        FunctionSpec::Atom { r, s, seed } => {
            let p = make_exponent(cfg.p1.clone(), &grid, ExponentMode::Lebesgue)?;
            let alpha = make_exponent(cfg.alpha.clone(), &grid, ExponentMode::Herz)?;
            make_central_atom(&grid, r, &p, &alpha, s, seed)?.function
        }
    })
}

fn cmd_norm(cfg: &ExperimentConfig) -> Result<u8, Failure> {
    let f = build_function(cfg)?;
    let grid = *f.grid();
    let p = make_exponent(cfg.p1.clone(), &grid, ExponentMode::Lebesgue)?;
    let report = match cfg.space {
        Space::Lebesgue => {
            let r = luxemburg_norm(&f, &p, cfg.tolerances.rel_tol)?;
            if !r.converged {
                return Err(Failure { code: 3, message: format!("Luxemburg bisection did not converge: {r:?}") });
            }
            json!({
                "space": "lebesgue",
                "value": r.value,
                "eta": r.eta,
                "modular_at_eta": r.modular_at_eta,
                "iterations": r.iterations,
                "converged": r.converged,
            })
        }
        Space::Herz | Space::HerzHardy => {
            let alpha = make_exponent(cfg.alpha.clone(), &grid, ExponentMode::Herz)?;
            let hp = HerzParams::new(alpha, p, cfg.q1, cfg.lambda)?.with_rel_tol(cfg.tolerances.rel_tol)?;
            let (name, value) = if cfg.space == Space::Herz {
                ("herz", herz_morrey_norm(&f, &hp)?)
            } else {
                ("herz_hardy", herz_morrey_hardy_norm(&f, &hp)?)
            };
            json!({
                "space": name,
                "value": value,
                "q": cfg.q1,
                "lambda": cfg.lambda,
                "levels": [grid.l_min(), grid.l_max()],
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("JSON values serialize"));
    Ok(0)
}

fn cmd_riesz(cfg: &ExperimentConfig, out: &Path) -> Result<u8, Failure> {
    let f = build_function(cfg)?;
    let image = riesz(&f, &RieszParams::new(cfg.beta, cfg.method))?;
    std::fs::create_dir_all(out)?;
    let path = out.join("riesz.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let grid = *image.grid();
    if grid.dim() == 1 {
        w.write_record(["x", "value"])?;
    } else {
        w.write_record(["x", "y", "value"])?;
    }
    for (i, &v) in image.values().iter().enumerate() {
        let [x, y] = grid.center(i);
        if grid.dim() == 1 {
            w.write_record([format_float(x), format_float(v)])?;
        } else {
            w.write_record([format_float(x), format_float(y), format_float(v)])?;
        }
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_verify(cfg: &ExperimentConfig, out: &Path) -> Result<u8, Failure> {
    let report = run_suite(&cfg.suite()?)?;
    report.write_to_dir(out)?;
    let failures: Vec<_> = report.failures().collect();
    for r in &failures {
        match &r.error {
            Some(e) => eprintln!("FAIL {}: {e}", r.name),
            None => eprintln!("FAIL {}: measured {} bound {}", r.name, format_float(r.measured), format_float(r.bound)),
        }
    }
    println!(
        "{} checks, {} failed; wrote {} ({})",
        report.records.len(),
        failures.len(),
        out.join("report.csv").display(),
        CSV_COLUMNS.join(",")
    );
    Ok(if report.non_convergence {
        3
    } else if failures.is_empty() {
        0
    } else {
        1
    })
}
