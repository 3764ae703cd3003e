//! Sweep and verification configuration: JSON file plus flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fading::{ChannelSpec, FadingDistribution};
use crate::{db_to_linear, Error};

/// Configuration problem, reported with the offending field.
#[derive(Debug, thiserror::Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Named channel presets accepted wherever a channel is expected.
pub const PRESETS: &[&str] = &["paper-rayleigh", "two-state"];

/// A channel given by preset name or as an inline fading profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSource {
    Preset(String),
    Inline(FadingDistribution),
}

impl ChannelSource {
    /// Parses a `--channel` argument: a preset name, inline JSON or a path to
    /// a JSON file.
    pub fn parse_arg(arg: &str) -> Result<Self, ConfigError> {
        let trimmed = arg.trim();
        if PRESETS.contains(&trimmed) {
            return Ok(ChannelSource::Preset(trimmed.to_owned()));
        }
        let text = if trimmed.starts_with('{') {
            trimmed.to_owned()
        } else {
            std::fs::read_to_string(trimmed).map_err(|e| {
                ConfigError::new(
                    "channel",
                    format!(
                        "`{trimmed}` is not a preset ({}) and cannot be read: {e}",
                        PRESETS.join(", ")
                    ),
                )
            })?
        };
        serde_json::from_str::<FadingDistribution>(&text)
            .map(ChannelSource::Inline)
            .map_err(|e| ConfigError::new("channel", e.to_string()))
    }

    pub fn resolve(&self, noise_var: Option<f64>, n_c: u32) -> Result<ChannelSpec, ConfigError> {
        let (fading, default_noise) = match self {
            ChannelSource::Preset(name) => match name.as_str() {
                "paper-rayleigh" => (ChannelSpec::paper_rayleigh().fading, 1.0),
                "two-state" => (ChannelSpec::two_state().fading, 1.0),
                other => {
                    return Err(ConfigError::new(
                        "channel",
                        format!("unknown preset `{other}` (expected one of {})", PRESETS.join(", ")),
                    ))
                }
            },
            ChannelSource::Inline(d) => (d.clone(), 1.0),
        };
        ChannelSpec::new(noise_var.unwrap_or(default_noise), n_c, fading).map_err(|e| match e {
            Error::InvalidParameter { name, reason } => ConfigError::new(name, reason),
            other => ConfigError::new("channel", other.to_string()),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocklengthAxis {
    pub b_min: Option<u64>,
    pub b_max: Option<u64>,
    pub points: Option<usize>,
    pub log_spaced: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerAxis {
    pub p_min_db: Option<f64>,
    pub p_max_db: Option<f64>,
    pub points: Option<usize>,
    pub blocks: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McOptions {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub blocks: Option<u64>,
}

/// On-disk configuration. Every field is optional; flags override fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub channel: Option<ChannelSource>,
    pub noise_var: Option<f64>,
    pub budget_db: Option<f64>,
    pub budget_linear: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_c: Option<u32>,
    pub beta: Option<f64>,
    pub blocklength: Option<BlocklengthAxis>,
    pub power: Option<PowerAxis>,
    pub mc: Option<McOptions>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new(field_of(&e), e.to_string()))
    }
}

fn field_of(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    msg.split('`').nth(1).unwrap_or("config").to_owned()
}

/// Average power budget in one of its two accepted forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Db(f64),
    Linear(f64),
}

impl Budget {
    pub fn linear(self) -> f64 {
        match self {
            Budget::Db(db) => db_to_linear(db),
            Budget::Linear(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Blocklength {
        b_min: u64,
        b_max: u64,
        points: usize,
        log_spaced: bool,
    },
    Power {
        p_min_db: f64,
        p_max_db: f64,
        points: usize,
        blocks: u64,
    },
}

impl SweepAxis {
    /// Block counts of a blocklength sweep, deduplicated, in increasing order.
    pub fn block_grid(&self) -> Vec<u64> {
        let SweepAxis::Blocklength {
            b_min,
            b_max,
            points,
            log_spaced,
        } = *self
        else {
            return Vec::new();
        };
        if points == 1 {
            return vec![b_min];
        }
        let mut grid: Vec<u64> = (0..points)
            .map(|i| {
                let t = i as f64 / (points - 1) as f64;
                let b = if log_spaced {
                    ((b_min as f64).ln() + t * ((b_max as f64).ln() - (b_min as f64).ln())).exp()
                } else {
                    b_min as f64 + t * (b_max - b_min) as f64
                };
                (b.round() as u64).clamp(b_min, b_max)
            })
            .collect();
        grid.dedup();
        grid
    }

    /// Budgets in dB of a power sweep.
    pub fn power_grid_db(&self) -> Vec<f64> {
        let SweepAxis::Power {
            p_min_db,
            p_max_db,
            points,
            ..
        } = *self
        else {
            return Vec::new();
        };
        if points == 1 {
            return vec![p_min_db];
        }
        (0..points)
            .map(|i| p_min_db + (p_max_db - p_min_db) * i as f64 / (points - 1) as f64)
            .collect()
    }
}

/// Fully resolved configuration of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub channel: ChannelSpec,
    pub budget: Option<Budget>,
    pub epsilon: f64,
    pub n_c: u32,
    pub beta: f64,
    pub axis: Option<SweepAxis>,
    pub trials: u64,
    pub seed: u64,
    pub alpha: f64,
    pub mc_blocks: u64,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Which command the configuration is being resolved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    RateVsBlocklength,
    RateVsPower,
    Verify,
}

/// Command-line overrides, applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub channel: Option<String>,
    pub noise_var: Option<f64>,
    pub power_db: Option<f64>,
    pub power_linear: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_c: Option<u32>,
    pub beta: Option<f64>,
    pub points: Option<usize>,
    pub b_min: Option<u64>,
    pub b_max: Option<u64>,
    pub linear_spacing: bool,
    pub p_min_db: Option<f64>,
    pub p_max_db: Option<f64>,
    pub blocks: Option<u64>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub alpha: Option<f64>,
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("{v} is not positive")))
    }
}

impl SweepConfig {
    pub fn resolve(file: ConfigFile, flags: Overrides, mode: Mode) -> Result<Self, ConfigError> {
        let n_c = flags.n_c.or(file.n_c).unwrap_or(1);
        if n_c == 0 {
            return Err(ConfigError::new("n_c", "must be at least 1"));
        }
        let source = match flags.channel.as_deref() {
            Some(arg) => ChannelSource::parse_arg(arg)?,
            None => file.channel.clone().unwrap_or_else(|| {
                ChannelSource::Preset(
                    if mode == Mode::Verify {
                        "two-state"
                    } else {
                        "paper-rayleigh"
                    }
                    .into(),
                )
            }),
        };
        if let Some(s) = flags.noise_var.or(file.noise_var) {
            positive("noise_var", s)?;
        }
        let channel = source.resolve(flags.noise_var.or(file.noise_var), n_c)?;

        // Flags replace the file's budget form entirely.
        let (db, lin) = if flags.power_db.is_some() || flags.power_linear.is_some() {
            (flags.power_db, flags.power_linear)
        } else {
            (file.budget_db, file.budget_linear)
        };
        let budget = match (db, lin) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "budget",
                    "give exactly one of budget_db and budget_linear",
                ))
            }
            (Some(d), None) if d.is_finite() => Some(Budget::Db(d)),
            (Some(d), None) => return Err(ConfigError::new("budget_db", format!("{d} is not finite"))),
            (None, Some(p)) => Some(Budget::Linear(positive("budget_linear", p)?)),
            (None, None) => None,
        };
        let budget = match (mode, budget) {
            (Mode::RateVsPower, Some(_)) => {
                return Err(ConfigError::new(
                    "budget",
                    "rate-vs-power sweeps the budget; remove budget_db/budget_linear",
                ))
            }
            (Mode::RateVsPower, None) => None,
            (Mode::RateVsBlocklength, b) => Some(b.unwrap_or(Budget::Db(5.0))),
            (Mode::Verify, b) => Some(b.unwrap_or(Budget::Linear(1.0))),
        };

        let epsilon = flags.epsilon.or(file.epsilon).unwrap_or(0.01);
        if mode != Mode::Verify && !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(ConfigError::new("epsilon", format!("{epsilon} is outside (0, 1/2)")));
        }
        let beta = flags.beta.or(file.beta).unwrap_or(crate::bounds::DEFAULT_BETA);
        if !(beta > 0.0 && beta < 1.0) {
            return Err(ConfigError::new("beta", format!("{beta} is outside (0, 1)")));
        }

        if file.blocklength.is_some() && file.power.is_some() {
            return Err(ConfigError::new(
                "sweep",
                "give exactly one of `blocklength` and `power`",
            ));
        }
        let axis = match mode {
            Mode::RateVsBlocklength => {
                if file.power.is_some() {
                    return Err(ConfigError::new(
                        "power",
                        "rate-vs-blocklength needs a `blocklength` axis",
                    ));
                }
                let ax = file.blocklength.clone().unwrap_or_default();
                let b_min = flags.b_min.or(ax.b_min).unwrap_or(100);
                let b_max = flags.b_max.or(ax.b_max).unwrap_or(10_000);
                let points = flags.points.or(ax.points).unwrap_or(50);
                let log_spaced = if flags.linear_spacing {
                    false
                } else {
                    ax.log_spaced.unwrap_or(true)
                };
                if b_min == 0 {
                    return Err(ConfigError::new("b_min", "must be at least 1"));
                }
                if b_max < b_min {
                    return Err(ConfigError::new("b_max", format!("{b_max} < b_min = {b_min}")));
                }
                if points == 0 {
                    return Err(ConfigError::new("points", "must be at least 1"));
                }
                Some(SweepAxis::Blocklength {
                    b_min,
                    b_max,
                    points,
                    log_spaced,
                })
            }
            Mode::RateVsPower => {
                if file.blocklength.is_some() {
                    return Err(ConfigError::new("blocklength", "rate-vs-power needs a `power` axis"));
                }
                let ax = file.power.clone().unwrap_or_default();
                let p_min_db = flags.p_min_db.or(ax.p_min_db).unwrap_or(0.0);
                let p_max_db = flags.p_max_db.or(ax.p_max_db).unwrap_or(20.0);
                let points = flags.points.or(ax.points).unwrap_or(21);
                let blocks = flags.blocks.or(ax.blocks).unwrap_or(4000);
                if !(p_min_db.is_finite() && p_max_db.is_finite()) || p_max_db < p_min_db {
                    return Err(ConfigError::new(
                        "p_max_db",
                        format!("[{p_min_db}, {p_max_db}] is not a valid range"),
                    ));
                }
                if points == 0 {
                    return Err(ConfigError::new("points", "must be at least 1"));
                }
                if blocks == 0 {
                    return Err(ConfigError::new("blocks", "must be at least 1"));
                }
                Some(SweepAxis::Power {
                    p_min_db,
                    p_max_db,
                    points,
                    blocks,
                })
            }
            Mode::Verify => None,
        };

        let mc = file.mc.clone().unwrap_or_default();
        let trials = flags.trials.or(mc.trials).unwrap_or(10_000);
        let seed = flags.seed.or(mc.seed).unwrap_or(42);
        let alpha = flags.alpha.or(mc.alpha).unwrap_or(0.1);
        let mc_blocks = if mode == Mode::Verify { flags.blocks } else { None }
            .or(mc.blocks)
            .unwrap_or(1000);
        if mode == Mode::Verify {
            if trials < 100 {
                return Err(ConfigError::new(
                    "trials",
                    format!("{trials} < 100 (the density check needs at least 100)"),
                ));
            }
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(ConfigError::new("alpha", format!("{alpha} is outside (0, 1)")));
            }
            if mc_blocks == 0 {
                return Err(ConfigError::new("blocks", "must be at least 1"));
            }
        }

        Ok(SweepConfig {
            channel,
            budget,
            epsilon,
            n_c,
            beta,
            axis,
            trials,
            seed,
            alpha,
            mc_blocks,
            out: flags.out.or(file.out),
            svg: flags.svg.or(file.svg),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_for_blocklength_sweep() {
        let c = SweepConfig::resolve(ConfigFile::default(), Overrides::default(), Mode::RateVsBlocklength).unwrap();
        assert_eq!(c.channel, ChannelSpec::paper_rayleigh());
        assert_eq!(c.budget, Some(Budget::Db(5.0)));
        assert!((c.budget.unwrap().linear() - 3.1622776601683795).abs() < 1e-15);
        assert_eq!(c.beta, 0.01);
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::from_json(r#"{"epsilon": 0.1, "budget_db": 3, "blocklength": {"points": 7}}"#).unwrap();
        let flags = Overrides {
            epsilon: Some(0.05),
            power_linear: Some(2.0),
            ..Default::default()
        };
        let c = SweepConfig::resolve(file, flags, Mode::RateVsBlocklength).unwrap();
        assert_eq!(c.epsilon, 0.05);
        assert_eq!(c.budget, Some(Budget::Linear(2.0)));
        assert_eq!(c.axis.unwrap().block_grid().len(), 7);
    }

    #[test]
    fn exactly_one_budget_and_axis() {
        let file = ConfigFile::from_json(r#"{"budget_db": 3, "budget_linear": 2}"#).unwrap();
        let e = SweepConfig::resolve(file, Overrides::default(), Mode::RateVsBlocklength).unwrap_err();
        assert_eq!(e.field, "budget");
        let file = ConfigFile::from_json(r#"{"blocklength": {}, "power": {}}"#).unwrap();
        let e = SweepConfig::resolve(file, Overrides::default(), Mode::RateVsBlocklength).unwrap_err();
        assert_eq!(e.field, "sweep");
    }

    #[test]
    fn unknown_field_is_named() {
        let e = ConfigFile::from_json(r#"{"epsilonn": 0.1}"#).unwrap_err();
        assert_eq!(e.field, "epsilonn");
    }

    #[test]
    fn inline_channel_and_validation() {
        let file = ConfigFile::from_json(r#"{"channel": {"gains": [1, 2], "probs": [0.5, 0.5]}}"#).unwrap();
        let c = SweepConfig::resolve(file, Overrides::default(), Mode::Verify).unwrap();
        assert_eq!(c.channel, ChannelSpec::two_state());
        assert!(ConfigFile::from_json(r#"{"channel": {"gains": [1, 2], "probs": [0.6, 0.6]}}"#).is_err());
        let flags = Overrides {
            channel: Some("nope".into()),
            ..Default::default()
        };
        assert_eq!(
            SweepConfig::resolve(ConfigFile::default(), flags, Mode::Verify)
                .unwrap_err()
                .field,
            "channel"
        );
    }

    #[test]
    fn verify_rejects_zero_trials() {
        let flags = Overrides {
            trials: Some(0),
            ..Default::default()
        };
        let e = SweepConfig::resolve(ConfigFile::default(), flags, Mode::Verify).unwrap_err();
        assert_eq!(e.field, "trials");
    }

    #[test]
    fn grids() {
        let ax = SweepAxis::Blocklength {
            b_min: 100,
            b_max: 10_000,
            points: 3,
            log_spaced: true,
        };
        assert_eq!(ax.block_grid(), vec![100, 1000, 10_000]);
        let ax = SweepAxis::Blocklength {
            b_min: 10,
            b_max: 12,
            points: 10,
            log_spaced: false,
        };
        assert_eq!(ax.block_grid(), vec![10, 11, 12]);
        let ax = SweepAxis::Power {
            p_min_db: 0.0,
            p_max_db: 20.0,
            points: 5,
            blocks: 4000,
        };
        assert_eq!(ax.power_grid_db(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
    }
}
