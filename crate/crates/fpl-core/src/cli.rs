//! Command-line entry points: coefficient precomputation, simulation runs,
//! and the verification suite.
//!
//! Three subcommands cover the workflow:
//!
//! * `fpl precompute --gamma -3 --m0 9 --out coulomb.fplc` — build and cache
//!   the collision tensor (once per (γ, Λ, M₀));
//! * `fpl solve --config run.toml` — integrate a scenario against a cached
//!   tensor and emit CSV artifacts;
//! * `fpl validate --level fast|full` — run the quadrature-oracle and
//!   invariant suite and print a max-error table.
//!
//! The exit-code contract is scriptable: 0 on success, 1 when a validation
//! check or the integration itself fails numerically, 2 for usage and
//! configuration errors, 3 for I/O and cache-compatibility errors.
//!
//! `solve` writes `moments.csv` (one row per step: time, density, bulk
//! velocity, temperature, the five independent stress entries above the
//! diagonal, and the heat flux) plus, per snapshot time, the marginals
//! `g_t<T>.csv` (columns v1, g) and `h_t<T>.csv` (columns v1, v2, h) on the
//! configured grid.  Every file is written through plain string formatting
//! with the shortest-roundtrip float representation and sequential
//! reductions, so reruns of the same config against the same cache are
//! bit-identical.

use std::fmt::Write as _;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::collision_kernel::{
    build_tensor, load_tensor, save_tensor, CacheExpectation, KernelParams,
};
use crate::collision_models::{hybrid_rhs, quadratic_rhs, RhsVector, SpectralState};
use crate::dynamics::{evolve, RunConfig, Trajectory};
use crate::hermite_burnett::build_conversion;
use crate::observables::{marginal_1d, marginal_2d};
use crate::scenarios::Scenario;
use crate::validate::{run_suite, CheckReport, Level};
use crate::{Error, Result};

/// Spectral solver for the homogeneous Fokker–Planck–Landau equation.
#[derive(Parser, Debug)]
#[command(name = "fpl", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Precompute the collision tensor for one (γ, Λ, M0) and cache it.
    Precompute {
        /// Kernel exponent γ (must exceed −5).
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        /// Kernel strength Λ.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
        /// Truncation degree M0 of the quadratic model (at least 2).
        #[arg(long)]
        m0: usize,
        /// Destination file for the binary cache.
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate a scenario described by a TOML config file.
    Solve {
        /// Path of the run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the verification suite and print a max-error table.
    Validate {
        /// Suite depth: "fast" or "full".
        #[arg(long, default_value = "fast", value_parser = parse_level)]
        level: Level,
    },
}

fn parse_level(s: &str) -> Result<Level> {
    s.parse()
}

/// On-disk mirror of [`RunConfig`] plus output controls.  The `schema`
/// field versions the format; unknown keys are rejected so typos surface as
/// errors instead of silently falling back to defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    /// Config format version; currently always 1.
    pub schema: u32,
    pub scenario: Scenario,
    pub gamma: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "M0")]
    pub m0: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot times for the marginal files (may be empty).
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Path of the precomputed coefficient cache.
    pub cache: PathBuf,
    /// Output directory (created if missing).
    pub outdir: PathBuf,
    /// Marginal grid: [grid_min, grid_max] sampled at grid_points points.
    #[serde(default = "default_grid_min")]
    pub grid_min: f64,
    #[serde(default = "default_grid_max")]
    pub grid_max: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_grid_min() -> f64 {
    -6.0
}

fn default_grid_max() -> f64 {
    6.0
}

fn default_grid_points() -> usize {
    121
}

impl CliConfig {
    /// Read and parse a TOML config file.
    pub fn load(path: &Path) -> Result<CliConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("cannot read config {}: {e}", path.display()),
            ))
        })?;
        let config: CliConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Config(format!(
                "unsupported config schema {} (this build reads schema 1)",
                self.schema
            )));
        }
        if !(self.grid_min.is_finite()
            && self.grid_max.is_finite()
            && self.grid_min < self.grid_max)
        {
            return Err(Error::Config(format!(
                "marginal grid [{}, {}] must be a finite increasing interval",
                self.grid_min, self.grid_max
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::Config(format!(
                "marginal grid needs at least 2 points, got {}",
                self.grid_points
            )));
        }
        self.run_config().validate()
    }

    /// The domain-level run description.
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            scenario: self.scenario,
            gamma: self.gamma,
            lambda: self.lambda,
            m: self.m,
            m0: self.m0,
            dt: self.dt,
            t_end: self.t_end,
            snapshots: self.snapshots.clone(),
            cache: self.cache.clone(),
            outdir: self.outdir.clone(),
        }
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        let step = (self.grid_max - self.grid_min) / (n - 1) as f64;
        (0..n).map(|i| self.grid_min + step * i as f64).collect()
    }
}

/// Parse the process arguments, run the selected command, and return the
/// process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Precompute {
            gamma,
            lambda,
            m0,
            out,
        } => {
            cmd_precompute(gamma, lambda, m0, &out)?;
            Ok(0)
        }
        Command::Solve { config } => {
            cmd_solve(&config)?;
            Ok(0)
        }
        Command::Validate { level } => cmd_validate(level),
    }
}

/// Map an error to the exit-code contract: I/O and cache compatibility → 3,
/// usage and configuration → 2, numerical failures at run time → 1.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Format(_) | Error::Mismatch { .. } => 3,
        Error::Domain { .. }
        | Error::InvalidInput(_)
        | Error::Config(_)
        | Error::IndexNotFound { .. }
        | Error::Capacity(_) => 2,
        Error::Inconsistent(_) | Error::NonFinite { .. } | Error::Blowup { .. } => 1,
    }
}

fn cmd_precompute(gamma: f64, lambda: f64, m0: usize, out: &Path) -> Result<()> {
    let params = KernelParams::new(gamma, lambda)?;
    let start = Instant::now();
    let conv = build_conversion(2 * m0 + 1)?;
    let tensor = build_tensor(&params, m0, &conv)?;
    save_tensor(&tensor, out)?;
    println!(
        "wrote {} entries (gamma = {gamma}, lambda = {lambda}, M0 = {m0}) to {} in {:.2} s",
        tensor.entry_count(),
        out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Boxed right-hand side handed to the integrator once the model is chosen.
type BoxedRhs<'a> = Box<dyn FnMut(&SpectralState) -> Result<RhsVector> + 'a>;

fn cmd_solve(config_path: &Path) -> Result<()> {
    let config = CliConfig::load(config_path)?;
    let run = config.run_config();
    let expectation = CacheExpectation {
        gamma: run.gamma,
        lambda: run.lambda,
        m0: run.m0,
    };
    let tensor = load_tensor(&run.cache, Some(&expectation)).map_err(|err| match err {
        Error::Io(io) if io.kind() == ErrorKind::NotFound => Error::Io(std::io::Error::new(
            ErrorKind::NotFound,
            format!(
                "no coefficient cache at {}; run `fpl precompute --gamma {} --lambda {} --m0 {} --out {}` first",
                run.cache.display(),
                run.gamma,
                run.lambda,
                run.m0,
                run.cache.display()
            ),
        )),
        other => other,
    })?;

    let (initial, report) = run.scenario.initial_state(run.m)?;
    if !report.is_normalized() {
        eprintln!(
            "warning: projected initial state is off-normalized: rho = {}, u = [{}, {}, {}], theta = {}",
            report.rho, report.u[0], report.u[1], report.u[2], report.theta
        );
    }

    // Equal truncations run the pure quadratic model; a strict gap runs the
    // hybrid model with the linear tail.
    let mut rhs: BoxedRhs = if run.m == run.m0 {
        Box::new(|s: &SpectralState| quadratic_rhs(&tensor, s))
    } else {
        Box::new(|s: &SpectralState| hybrid_rhs(&tensor, s))
    };
    let trajectory = evolve(&initial, run.dt, run.t_end, &run.snapshots, &mut rhs)?;

    std::fs::create_dir_all(&run.outdir)?;
    std::fs::write(run.outdir.join("moments.csv"), moments_csv(&trajectory))?;
    let grid = config.grid();
    for (t, state) in &trajectory.snapshots {
        let stamp = format_time(*t);
        std::fs::write(
            run.outdir.join(format!("g_t{stamp}.csv")),
            marginal_1d_csv(state, &grid),
        )?;
        std::fs::write(
            run.outdir.join(format!("h_t{stamp}.csv")),
            marginal_2d_csv(state, &grid),
        )?;
    }

    let drift = trajectory.conservation_drift();
    println!(
        "integrated {} to t = {} in {} steps; conserved-moment drift: rho {:.3e}, u {:.3e}, theta {:.3e}",
        run.scenario,
        format_time(*trajectory.times.last().expect("at least the initial row")),
        trajectory.times.len() - 1,
        drift.rho,
        drift.velocity,
        drift.theta
    );
    println!(
        "wrote moments.csv and {} snapshot marginal pairs to {}",
        trajectory.snapshots.len(),
        run.outdir.display()
    );
    Ok(())
}

fn cmd_validate(level: Level) -> Result<i32> {
    let start = Instant::now();
    let reports = run_suite(level)?;
    print_report_table(&reports);
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!(
        "{} checks, {} failed ({} level, {:.1} s)",
        reports.len(),
        failed,
        level,
        start.elapsed().as_secs_f64()
    );
    Ok(if failed > 0 { 1 } else { 0 })
}

fn print_report_table(reports: &[CheckReport]) {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in reports {
        println!(
            "{:<width$}  max error {:>9.3e}  tolerance {:>7.1e}  {}",
            r.name,
            r.max_error,
            r.tolerance,
            if r.passed { "pass" } else { "FAIL" },
        );
    }
}

/// Time tag for file names and the CSV time column: fixed-point with up to
/// six decimals, trailing zeros and dot trimmed ("0", "0.4", "1.25").  Six
/// decimals comfortably separate any sensible step size while keeping the
/// grid times free of floating-point dust.
fn format_time(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Render the per-step moment table.  Columns are fixed; a state too short
/// for a moment (heat flux needs degree 3) reports the truncated value,
/// which is exactly zero.
fn moments_csv(trajectory: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (trajectory.times.len() + 1));
    out.push_str("t,rho,u1,u2,u3,theta,sigma11,sigma12,sigma13,sigma22,sigma23,q1,q2,q3\n");
    for (t, m) in trajectory.times.iter().zip(&trajectory.moments) {
        let u = m.u.unwrap_or_default();
        let theta = m.theta.unwrap_or_default();
        let sigma = m.sigma.unwrap_or_default();
        let q = m.q.unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            format_time(*t),
            m.rho,
            u[0],
            u[1],
            u[2],
            theta,
            sigma[0][0],
            sigma[0][1],
            sigma[0][2],
            sigma[1][1],
            sigma[1][2],
            q[0],
            q[1],
            q[2]
        )
        .expect("string writes cannot fail");
    }
    out
}

fn marginal_1d_csv(state: &SpectralState, grid: &[f64]) -> String {
    let values = marginal_1d(state, grid);
    let mut out = String::with_capacity(24 * (grid.len() + 1));
    out.push_str("v1,g\n");
    for (x, g) in grid.iter().zip(&values) {
        writeln!(out, "{x},{g}").expect("string writes cannot fail");
    }
    out
}

fn marginal_2d_csv(state: &SpectralState, grid: &[f64]) -> String {
    let values = marginal_2d(state, grid, grid);
    let mut out = String::with_capacity(32 * grid.len() * grid.len());
    out.push_str("v1,v2,h\n");
    for (x, row) in grid.iter().zip(&values) {
        for (y, h) in grid.iter().zip(row) {
            writeln!(out, "{x},{y},{h}").expect("string writes cannot fail");
        }
    }
    out
}
