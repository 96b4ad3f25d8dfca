use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Every setting of a pipeline run. Loaded from a TOML file of top-level
/// keys, then overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tweets: Option<PathBuf>,
    /// Video export with statuses, titles and channels.
    pub videos: Option<PathBuf>,
    /// JSON map of video id to availability, queried like a status service.
    pub statuses: Option<PathBuf>,
    pub codesheet: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Time of the status check; defaults to now when statuses are queried.
    pub checked_at: Option<DateTime<Utc>>,
    pub min_age_days: i64,
    pub originals_only: bool,
    pub pcs: usize,
    pub kmin: usize,
    pub kmax: usize,
    pub restarts: usize,
    pub binarize: bool,
    pub heatmap_top: usize,
    pub min_daily_shares: u32,
    pub threshold: f64,
    pub resolution: f64,
    pub top_videos: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tweets: None,
            videos: None,
            statuses: None,
            codesheet: None,
            out: None,
            seed: None,
            checked_at: None,
            min_age_days: 60,
            originals_only: false,
            pcs: 3,
            kmin: 1,
            kmax: 25,
            restarts: 10,
            binarize: false,
            heatmap_top: 50,
            min_daily_shares: 5,
            threshold: 0.5,
            resolution: 1.0,
            top_videos: 3,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    /// Relative paths in the file are taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.tweets,
            &mut config.videos,
            &mut config.statuses,
            &mut config.codesheet,
            &mut config.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.kmin == 0 || self.kmin > self.kmax {
            return usage(format!("k range {}..={} is empty or starts at 0", self.kmin, self.kmax));
        }
        if self.pcs == 0 {
            return usage("pcs must be at least 1".into());
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return usage(format!("resolution must be positive, got {}", self.resolution));
        }
        if !self.threshold.is_finite() {
            return usage("threshold must be finite".into());
        }
        if self.min_age_days < 0 {
            return usage("min_age_days must not be negative".into());
        }
        Ok(())
    }

    /// The seed, which every stochastic stage requires.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage("a seed is required (--seed or `seed` in the config)".into()))
    }

    pub fn require_out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("an output directory is required (--out or `out` in the config)".into()))
    }

    pub fn k_range(&self) -> Vec<usize> {
        (self.kmin..=self.kmax).collect()
    }
}
