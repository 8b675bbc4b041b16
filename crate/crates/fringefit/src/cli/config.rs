//! Scenario configuration: defaults, config-file parsing, flag merging.

use crate::error::{Error, Result};
use std::path::{Path, PathBuf};

/// Fully resolved scenario parameters for the pipeline commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub i_o: f64,
    pub i_h: f64,
    pub i_v: f64,
    pub theta: f64,
    pub positions: usize,
    pub samples: usize,
    pub runs: usize,
    pub seed: u64,
    pub windows: usize,
    pub out: PathBuf,
}

/// Partial configuration: every field optional so that a config file and
/// command-line flags can be layered over the defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub i_o: Option<f64>,
    pub i_h: Option<f64>,
    pub i_v: Option<f64>,
    pub theta: Option<f64>,
    pub positions: Option<usize>,
    pub samples: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub windows: Option<usize>,
    pub out: Option<PathBuf>,
}

impl PartialConfig {
    /// Overlay `other` on top of `self` (fields set in `other` win).
    pub fn overlaid(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            i_o: other.i_o.or(self.i_o),
            i_h: other.i_h.or(self.i_h),
            i_v: other.i_v.or(self.i_v),
            theta: other.theta.or(self.theta),
            positions: other.positions.or(self.positions),
            samples: other.samples.or(self.samples),
            runs: other.runs.or(self.runs),
            seed: other.seed.or(self.seed),
            windows: other.windows.or(self.windows),
            out: other.out.or(self.out),
        }
    }

    /// Resolve against defaults, requiring the model intensities and phase
    /// plus an output path.
    pub fn resolve(self) -> Result<ScenarioConfig> {
        let need = |name: &str| Error::Config(format!("missing required setting `{name}`"));
        Ok(ScenarioConfig {
            i_o: self.i_o.ok_or_else(|| need("i_o"))?,
            i_h: self.i_h.ok_or_else(|| need("i_h"))?,
            i_v: self.i_v.ok_or_else(|| need("i_v"))?,
            theta: self.theta.ok_or_else(|| need("theta"))?,
            positions: self.positions.unwrap_or(8),
            samples: self.samples.unwrap_or(690),
            runs: self.runs.unwrap_or(20),
            seed: self.seed.unwrap_or(42),
            windows: self.windows.unwrap_or(32),
            out: self.out.ok_or_else(|| need("out"))?,
        })
    }
}

/// Parse a flat `key = value` config file.  `#` starts a comment, blank
/// lines are ignored, and unknown keys are rejected.  On repeated keys the
/// last assignment wins.
pub fn parse_config_file(path: &Path) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = PartialConfig::default();
    // A bad config file is a configuration error (exit code 1), unlike
    // malformed data files.
    let at = |line: usize, msg: String| {
        Error::Config(format!("{}:{line}: {msg}", path.display()))
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        macro_rules! num {
            ($ty:ty) => {
                value.parse::<$ty>().map_err(|e| {
                    at(line_no, format!("bad value `{value}` for `{key}`: {e}"))
                })?
            };
        }
        match key {
            "i_o" => cfg.i_o = Some(num!(f64)),
            "i_h" => cfg.i_h = Some(num!(f64)),
            "i_v" => cfg.i_v = Some(num!(f64)),
            "theta" => cfg.theta = Some(num!(f64)),
            "positions" => cfg.positions = Some(num!(usize)),
            "samples" => cfg.samples = Some(num!(usize)),
            "runs" => cfg.runs = Some(num!(usize)),
            "seed" => cfg.seed = Some(num!(u64)),
            "windows" => cfg.windows = Some(num!(usize)),
            "out" => cfg.out = Some(PathBuf::from(value)),
            other => {
                return Err(at(line_no, format!("unknown config key `{other}`")));
            }
        }
    }
    Ok(cfg)
}
