//! Command-line front end: blocklength and power sweeps, CSV/SVG output and
//! the Monte Carlo verification report.

pub mod config;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_point, DispersionStats};
use crate::montecarlo::{
    simulate_information_density, simulate_st_controller, DensityStats, SimConfig, ViolationReport,
};
use crate::specfun::Probability;
use crate::{db_to_linear, Error};

pub use config::{Budget, ConfigError, ConfigFile, Mode, Overrides, SweepAxis, SweepConfig};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERIC: i32 = 2;
    pub const VERIFICATION: i32 = 3;
}

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 15] = [
    "n",
    "B",
    "n_c",
    "power_linear",
    "epsilon",
    "capacity",
    "rate_lb_st",
    "rate_lb_lt",
    "rate_ub_st",
    "rate_ub_lt",
    "rate_nocsit",
    "log_m_lb_st",
    "log_m_lb_lt",
    "log_m_ub_st",
    "log_m_ub_lt",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numeric failure: {0}")]
    Numeric(Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Numeric(_) => exit::NUMERIC,
            CliError::Verification(_) => exit::VERIFICATION,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => CliError::Numeric(e),
            Error::BudgetBackoff { min_blocks, .. } => CliError::Config(ConfigError::new(
                "blocks",
                format!("{e}; rerun with --blocks {min_blocks} or larger, or a larger --alpha"),
            )),
            Error::InvalidParameter { name, reason } => CliError::Config(ConfigError::new(name, reason)),
            Error::Domain { function, value } => {
                CliError::Config(ConfigError::new(function, format!("{value} is outside the domain")))
            }
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub blocks: u64,
    pub n_c: u32,
    pub power_linear: f64,
    pub epsilon: f64,
    pub capacity: f64,
    pub rate_lb_st: f64,
    pub rate_lb_lt: f64,
    pub rate_ub_st: f64,
    pub rate_ub_lt: f64,
    pub rate_nocsit: f64,
    pub log_m_lb_st: f64,
    pub log_m_lb_lt: f64,
    pub log_m_ub_st: f64,
    pub log_m_ub_lt: f64,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepRow {
    fn csv_line(&self) -> String {
        let floats = [
            self.power_linear,
            self.epsilon,
            self.capacity,
            self.rate_lb_st,
            self.rate_lb_lt,
            self.rate_ub_st,
            self.rate_ub_lt,
            self.rate_nocsit,
            self.log_m_lb_st,
            self.log_m_lb_lt,
            self.log_m_ub_st,
            self.log_m_ub_lt,
        ];
        let mut fields = vec![self.n.to_string(), self.blocks.to_string(), self.n_c.to_string()];
        fields.extend(floats.iter().map(|&x| fmt_f64(x)));
        fields.join(",")
    }
}

pub fn write_csv(rows: &[SweepRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.csv_line())?;
    }
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Computes one sweep point directly from the library.
pub fn sweep_point(cfg: &SweepConfig, budget: f64, blocks: u64) -> Result<SweepRow, Error> {
    let stats = DispersionStats::compute(&cfg.channel, budget)?;
    let n = blocks * u64::from(cfg.n_c);
    let eps = Probability::new(cfg.epsilon)?;
    let p = bound_point(&stats, n, cfg.n_c, cfg.channel.fading.len(), eps, cfg.beta)?;
    Ok(SweepRow {
        n,
        blocks,
        n_c: cfg.n_c,
        power_linear: budget,
        epsilon: cfg.epsilon,
        capacity: stats.capacity,
        rate_lb_st: p.rate_lb_st,
        rate_lb_lt: p.rate_lb_lt,
        rate_ub_st: p.rate_ub_st,
        rate_ub_lt: p.rate_ub_lt,
        rate_nocsit: p.rate_nocsit,
        log_m_lb_st: p.log_m_lb_st,
        log_m_lb_lt: p.log_m_lb_lt,
        log_m_ub_st: p.log_m_ub_st,
        log_m_ub_lt: p.log_m_ub_lt,
    })
}

/// Rows of the configured sweep, in axis order.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>, Error> {
    let points: Vec<(f64, u64)> = match &cfg.axis {
        Some(ax @ SweepAxis::Blocklength { .. }) => {
            let budget = cfg.budget.map(Budget::linear).unwrap_or_else(|| db_to_linear(5.0));
            ax.block_grid().into_iter().map(|b| (budget, b)).collect()
        }
        Some(ax @ SweepAxis::Power { blocks, .. }) => ax
            .power_grid_db()
            .into_iter()
            .map(|db| (db_to_linear(db), *blocks))
            .collect(),
        None => Vec::new(),
    };
    points
        .into_par_iter()
        .map(|(budget, blocks)| sweep_point(cfg, budget, blocks))
        .collect()
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn emit_csv(cfg: &SweepConfig, rows: &[SweepRow]) -> Result<(), CliError> {
    let text = csv_string(rows);
    match &cfg.out {
        Some(path) => write_file(path, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn emit_svg(cfg: &SweepConfig, rows: &[SweepRow], by_power: bool) -> Result<(), CliError> {
    let Some(path) = &cfg.svg else { return Ok(()) };
    let x = |r: &SweepRow| {
        if by_power {
            10.0 * r.power_linear.log10()
        } else {
            r.blocks as f64
        }
    };
    let series = |label, dashed, f: fn(&SweepRow) -> f64| svg::Series {
        label,
        dashed,
        points: rows.iter().map(|r| (x(r), f(r).max(0.0))).collect(),
    };
    let chart = svg::Chart {
        title: if by_power {
            "Rate versus input power"
        } else {
            "Rate versus blocklength"
        },
        x_label: if by_power { "average power (dB)" } else { "blocks B" },
        y_label: "rate (nats/channel use)",
        log_x: !by_power,
        series: vec![
            series("capacity", true, |r| r.capacity),
            series("UB LT", false, |r| r.rate_ub_lt),
            series("UB ST", false, |r| r.rate_ub_st),
            series("LB LT", false, |r| r.rate_lb_lt),
            series("LB ST", false, |r| r.rate_lb_st),
            series("no CSIT", true, |r| r.rate_nocsit),
        ],
    };
    write_file(path, chart.render().as_bytes())
}

pub fn cmd_rate_vs_blocklength(cfg: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    let rows = sweep_rows(cfg)?;
    emit_csv(cfg, &rows)?;
    emit_svg(cfg, &rows, false)?;
    Ok(rows)
}

pub fn cmd_rate_vs_power(cfg: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    let rows = sweep_rows(cfg)?;
    emit_csv(cfg, &rows)?;
    emit_svg(cfg, &rows, true)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub budget: f64,
    pub blocks: u64,
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
    pub controller: ViolationReport,
    pub density: DensityStats,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Thresholds applied by `verify`.
pub const DENSITY_MEAN_SIGMAS: f64 = 3.0;
pub const DENSITY_VAR_REL_TOL: f64 = 0.02;
pub const KS_MAX: f64 = 0.02;

pub fn verify_report(cfg: &SweepConfig) -> Result<VerifyReport, CliError> {
    let budget = cfg.budget.map(Budget::linear).unwrap_or(1.0);
    let sim = SimConfig {
        spec: cfg.channel.clone(),
        budget,
        blocks: cfg.mc_blocks,
        alpha: cfg.alpha,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let controller = simulate_st_controller(&sim)?;
    let density = simulate_information_density(&sim)?;

    let checks = vec![
        Check {
            name: "controller_violation_within_hoeffding",
            value: controller.empirical_prob,
            threshold: controller.hoeffding_bound + 3.0 * controller.binomial_sigma(),
            passed: controller.within_bound(),
        },
        Check {
            name: "density_mean_within_3_std_errors",
            value: (density.empirical_mean_per_use - density.analytic_mean).abs(),
            threshold: DENSITY_MEAN_SIGMAS * density.mean_std_error,
            passed: density.mean_within(DENSITY_MEAN_SIGMAS),
        },
        Check {
            name: "density_variance_relative_error",
            value: density.var_relative_error(),
            threshold: DENSITY_VAR_REL_TOL,
            passed: density.var_relative_error() <= DENSITY_VAR_REL_TOL,
        },
        Check {
            name: "density_ks_distance",
            value: density.ks_distance,
            threshold: KS_MAX,
            passed: density.ks_distance <= KS_MAX,
        },
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        budget,
        blocks: cfg.mc_blocks,
        alpha: cfg.alpha,
        trials: cfg.trials,
        seed: cfg.seed,
        controller,
        density,
        checks,
        passed,
    })
}

/// Runs both simulations, writes the JSON report and fails if any check fails.
pub fn cmd_verify(cfg: &SweepConfig) -> Result<VerifyReport, CliError> {
    let report = verify_report(cfg)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match &cfg.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if report.passed {
        Ok(report)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bfrate",
    version,
    about = "Finite-blocklength rate bounds for block-fading AWGN channels with CSIT"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the number of blocks at a fixed average power.
    RateVsBlocklength(CommonArgs),
    /// Sweep the average power at a fixed number of blocks.
    RateVsPower(CommonArgs),
    /// Monte Carlo check of the power controller and the information density.
    Verify(CommonArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset name (paper-rayleigh, two-state), inline JSON or a JSON file.
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Average power budget in dB.
    #[arg(long, conflicts_with = "power_linear", allow_negative_numbers = true)]
    pub power_db: Option<f64>,
    /// Average power budget in linear units.
    #[arg(long)]
    pub power_linear: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Channel uses per coherence block.
    #[arg(long)]
    pub nc: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub b_min: Option<u64>,
    #[arg(long)]
    pub b_max: Option<u64>,
    /// Linear instead of logarithmic spacing of the block grid.
    #[arg(long)]
    pub linear: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub p_min_db: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p_max_db: Option<f64>,
    /// Number of blocks (power sweep, verification).
    #[arg(long)]
    pub blocks: Option<u64>,
    /// Output file (CSV for sweeps, JSON for verify); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl CommonArgs {
    pub fn resolve(&self, mode: Mode) -> Result<SweepConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = Overrides {
            channel: self.channel.clone(),
            noise_var: self.noise_var,
            power_db: self.power_db,
            power_linear: self.power_linear,
            epsilon: self.epsilon,
            n_c: self.nc,
            beta: self.beta,
            points: self.points,
            b_min: self.b_min,
            b_max: self.b_max,
            linear_spacing: self.linear,
            p_min_db: self.p_min_db,
            p_max_db: self.p_max_db,
            blocks: self.blocks,
            out: self.out.clone(),
            svg: self.svg.clone(),
            seed: self.seed,
            trials: self.trials,
            alpha: self.alpha,
        };
        SweepConfig::resolve(file, flags, mode)
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::RateVsBlocklength(args) => args
            .resolve(Mode::RateVsBlocklength)
            .map_err(CliError::from)
            .and_then(|cfg| cmd_rate_vs_blocklength(&cfg).map(drop)),
        Command::RateVsPower(args) => args
            .resolve(Mode::RateVsPower)
            .map_err(CliError::from)
            .and_then(|cfg| cmd_rate_vs_power(&cfg).map(drop)),
        Command::Verify(args) => args
            .resolve(Mode::Verify)
            .map_err(CliError::from)
            .and_then(|cfg| cmd_verify(&cfg).map(drop)),
    };
    match result {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("bfrate: {e}");
            e.exit_code()
        }
    }
}
