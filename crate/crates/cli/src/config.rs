use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use mvsync::cooccurrence::{DEFAULT_SIGMA_FRAMES, DEFAULT_TRUNCATION_SIGMAS};
use mvsync::duration::DEFAULT_TAU;
use mvsync::report::DEFAULT_MIN_GENRE_COUNT;
use mvsync::{AnalysisConfig, HalfWindow, ScoreWindow};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `half-bar` or a number of seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HalfWindowSetting(pub HalfWindow);

impl FromStr for HalfWindowSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("half-bar") {
            return Ok(Self(HalfWindow::HalfBar));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(Self(HalfWindow::Seconds(v))),
            _ => Err(format!("expected `half-bar` or a positive number of seconds, got {s:?}")),
        }
    }
}

impl Serialize for HalfWindowSetting {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            HalfWindow::HalfBar => s.serialize_str("half-bar"),
            HalfWindow::Seconds(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for HalfWindowSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Number(v) => v.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Run settings. Loaded from an optional TOML file; command-line flags win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tau: f64,
    pub sigma_frames: f64,
    pub truncation_sigmas: f64,
    pub min_genre_count: usize,
    pub half_window: HalfWindowSetting,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 means one per available core.
    #[serde(skip_serializing)]
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            sigma_frames: DEFAULT_SIGMA_FRAMES,
            truncation_sigmas: DEFAULT_TRUNCATION_SIGMAS,
            min_genre_count: DEFAULT_MIN_GENRE_COUNT,
            half_window: HalfWindowSetting::default(),
            out: None,
            jobs: 0,
        }
    }
}

/// Flag values; `None` leaves the file or default value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tau: Option<f64>,
    pub sigma_frames: Option<f64>,
    pub min_genre_count: Option<usize>,
    pub half_window: Option<HalfWindowSetting>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn resolve(file: Option<&Path>, flags: Overrides) -> anyhow::Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(v) = flags.tau {
            cfg.tau = v;
        }
        if let Some(v) = flags.sigma_frames {
            cfg.sigma_frames = v;
        }
        if let Some(v) = flags.min_genre_count {
            cfg.min_genre_count = v;
        }
        if let Some(v) = flags.half_window {
            cfg.half_window = v;
        }
        if flags.out.is_some() {
            cfg.out = flags.out;
        }
        if let Some(v) = flags.jobs {
            cfg.jobs = v;
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> anyhow::Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            bail!("tau must lie strictly between 0 and 1, got {}", self.tau);
        }
        if !(self.sigma_frames.is_finite() && self.sigma_frames > 0.0) {
            bail!("sigma-frames must be positive, got {}", self.sigma_frames);
        }
        if !(self.truncation_sigmas.is_finite() && self.truncation_sigmas > 0.0) {
            bail!("truncation_sigmas must be positive, got {}", self.truncation_sigmas);
        }
        Ok(())
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            tau: self.tau,
            window: ScoreWindow {
                sigma_frames: self.sigma_frames,
                truncation_sigmas: self.truncation_sigmas,
            },
            half_window: self.half_window.0,
        }
    }

    pub fn worker_threads(&self) -> usize {
        if self.jobs > 0 {
            self.jobs
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}
