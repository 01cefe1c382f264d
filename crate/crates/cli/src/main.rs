//! `elliptic-lattice`: spectra, verification suites, special cases and sweeps.
//!
//! Exit codes: 0 success, 1 failed verification, 2 invalid parameters or
//! configuration, 3 numeric failure (labeling, conditioning, convergence).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elliptic_lattice::checks::run_suite;
use elliptic_lattice::io::{
    g1_report, m1_report, render_g1, render_m1, render_spectrum, render_sweep, render_verify, Format,
};
use elliptic_lattice::sweep::{p_grid, run_sweep};
use elliptic_lattice::{check_branch, spectrum, validate, Branch, CouplingParams, Error, SpectralOptions};

/// Thread-count override for sweeps; defaults to rayon's choice.
const THREADS_ENV: &str = "ELLIPTIC_LATTICE_THREADS";

#[derive(Parser)]
#[command(name = "elliptic-lattice", version, about = "Spectrum and eigenbasis of the elliptic lattice operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Labeled spectrum, eigenfunctions and norms.
    Spectrum(Common),
    /// Every invariant suite at the given point plus a random neighborhood.
    Verify(Common),
    /// Closed-form special cases.
    Special {
        #[arg(value_enum)]
        case: Special,
        #[command(flatten)]
        common: Common,
    },
    /// Independent spectra over a grid of nomes and/or parameter sets.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        p_from: f64,
        #[arg(long)]
        p_to: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        p_step: f64,
        /// Explicit nome values; overrides the range.
        #[arg(long, value_delimiter = ',')]
        p_values: Vec<f64>,
        /// JSON array of parameter objects; overrides the nome grid.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Special {
    M1,
    G1,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Generic,
    G1,
}

#[derive(Args)]
struct Common {
    /// JSON parameter file; individual flags are then ignored.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// Pair coupling; defaults to 0.5, or 1 on the g1 branch.
    #[arg(long)]
    g: Option<f64>,
    #[arg(long, default_value_t = 0.6)]
    g1: f64,
    #[arg(long, default_value_t = 0.7)]
    g2: f64,
    #[arg(long, default_value_t = 0.1)]
    g3: f64,
    #[arg(long, default_value_t = 0.1)]
    g4: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    gp1: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    gp2: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    gp3: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    gp4: f64,
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    p: f64,
    /// Relative truncation tolerance of the theta series.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "generic")]
    branch: BranchArg,
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the randomized neighborhood in `verify`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    gap_rel: Option<f64>,
    #[arg(long)]
    overlap_min: Option<f64>,
    #[arg(long)]
    initial_step: Option<f64>,
    #[arg(long)]
    min_step: Option<f64>,
    #[arg(long)]
    max_amplification: Option<f64>,
    #[arg(long)]
    zero_tol: Option<f64>,
}

/// Failure carrying its exit code and a JSON diagnostic for stderr.
struct Failure {
    code: u8,
    diagnostic: serde_json::Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::InvalidParams(_) => (2, "invalid_params"),
            Error::Domain(_) => (2, "domain"),
            Error::Branch(_) => (2, "branch"),
            Error::Pole(_) => (2, "pole"),
            Error::Labeling { .. } => (3, "labeling"),
            Error::Conditioning { .. } => (3, "conditioning"),
            Error::Numeric(_) => (3, "numeric"),
            Error::Internal(_) => (3, "internal"),
        };
        let mut diagnostic = serde_json::json!({ "error": kind, "detail": e.to_string() });
        if let Error::Labeling { p, .. } = e {
            diagnostic["p"] = serde_json::json!(p);
        }
        Failure { code, diagnostic }
    }
}

fn config_error(detail: impl Into<String>) -> Failure {
    Failure { code: 2, diagnostic: serde_json::json!({ "error": "config", "detail": detail.into() }) }
}

impl Common {
    fn format(&self) -> Result<Format, Failure> {
        self.format.parse().map_err(|e: Error| config_error(e.to_string()))
    }

    fn options(&self) -> Result<SpectralOptions, Failure> {
        let mut opts = SpectralOptions::default();
        let overrides = [
            (&mut opts.gap_rel, self.gap_rel, "gap-rel"),
            (&mut opts.overlap_min, self.overlap_min, "overlap-min"),
            (&mut opts.initial_step, self.initial_step, "initial-step"),
            (&mut opts.min_step, self.min_step, "min-step"),
            (&mut opts.max_amplification, self.max_amplification, "max-amplification"),
            (&mut opts.zero_tol, self.zero_tol, "zero-tol"),
        ];
        for (slot, value, name) in overrides {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(config_error(format!("--{name} must be positive, got {v}")));
                }
                *slot = v;
            }
        }
        if opts.min_step > opts.initial_step {
            return Err(config_error("--min-step exceeds --initial-step"));
        }
        Ok(opts)
    }

    fn params(&self) -> Result<CouplingParams, Failure> {
        let mut params = if let Some(path) = &self.params {
            let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            CouplingParams::from_json(&text).map_err(Failure::from)?
        } else {
            let branch = match self.branch {
                BranchArg::Generic => Branch::Generic,
                BranchArg::G1 => Branch::G1,
            };
            let g = self.g.unwrap_or(if branch == Branch::G1 { 1.0 } else { 0.5 });
            let mut params =
                CouplingParams::new(self.n, self.m, g, [self.g1, self.g2, self.g3, self.g4], [self.gp1, self.gp2, self.gp3, self.gp4], self.p);
            params.branch = branch;
            params
        };
        if let Some(tol) = self.tol {
            params.tol = tol;
        }
        Ok(params)
    }

    /// Parameters that passed validation; the report goes to stderr otherwise.
    fn valid_params(&self) -> Result<CouplingParams, Failure> {
        let params = self.params()?;
        check_branch(&params)?;
        let report = validate(&params);
        if !report.valid {
            return Err(Failure {
                code: 2,
                diagnostic: serde_json::json!({ "error": "invalid_params", "report": report }),
            });
        }
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        Ok(params)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: 3,
            diagnostic: serde_json::json!({ "error": "io", "detail": format!("{}: {e}", path.display()) }),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep_points(
    common: &Common,
    p_from: f64,
    p_to: Option<f64>,
    p_step: f64,
    p_values: &[f64],
    grid: Option<&Path>,
) -> Result<Vec<CouplingParams>, Failure> {
    if let Some(path) = grid {
        let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())));
    }
    let base = common.params()?;
    let ps = if !p_values.is_empty() {
        p_values.to_vec()
    } else {
        let to = p_to.unwrap_or(p_from);
        if !(p_step > 0.0) {
            return Err(config_error("--p-step must be positive"));
        }
        p_grid(p_from, to, p_step)
    };
    Ok(ps.into_iter().map(|p| base.with_p(p)).collect())
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| config_error(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| config_error(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Spectrum(common) => {
            let format = common.format()?;
            let opts = common.options()?;
            let params = common.valid_params()?;
            let (_, result) = spectrum(&params, &opts)?;
            emit(common.out.as_deref(), &render_spectrum(&result, format)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(common) => {
            let format = common.format()?;
            let opts = common.options()?;
            let params = common.valid_params()?;
            let report = run_suite(&params, &opts, common.seed)?;
            emit(common.out.as_deref(), &render_verify(&report, format)?)?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAIL {}: measured {:e}, tolerance {:e}", c.name, c.measured, c.tolerance);
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Special { case, common } => {
            let format = common.format()?;
            let opts = common.options()?;
            let mut params = common.params()?;
            if let Special::G1 = case {
                if common.params.is_none() {
                    params.branch = Branch::G1;
                    params.g = 1.0;
                }
            }
            let report = validate(&params);
            if !report.valid {
                return Err(Failure { code: 2, diagnostic: serde_json::json!({ "error": "invalid_params", "report": report }) });
            }
            let text = match case {
                Special::M1 => render_m1(&m1_report(&params, &opts)?, format)?,
                Special::G1 => render_g1(&g1_report(&params, &opts)?, format)?,
            };
            emit(common.out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, p_from, p_to, p_step, p_values, grid } => {
            let format = common.format()?;
            let opts = common.options()?;
            let points = sweep_points(&common, p_from, p_to, p_step, &p_values, grid.as_deref())?;
            let table = thread_pool()?.install(|| run_sweep(points, &opts));
            emit(common.out.as_deref(), &render_sweep(&table, format)?)?;
            if table.failures() > 0 {
                eprintln!("{} of {} grid points failed", table.failures(), table.points.len());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.diagnostic);
            ExitCode::from(f.code)
        }
    }
}
