//! Optional `key=value` configuration file. Command-line flags override it.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use padic_resolvent::suite::SuiteConfig;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PADIC_RESOLVENT_OUT_DIR";

/// Values read from a config file; absent keys stay `None`.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub random_samples: Option<usize>,
    pub uniformizer_samples: Option<usize>,
    pub extra_precision: Option<u32>,
    pub include_timing: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = FileConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value, got {raw:?}", lineno + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = || format!("line {}: bad value {value:?} for {key}", lineno + 1);
            match key {
                "seed" => cfg.seed = Some(value.parse().with_context(bad)?),
                "random_samples" => cfg.random_samples = Some(value.parse().with_context(bad)?),
                "uniformizer_samples" => {
                    cfg.uniformizer_samples = Some(value.parse().with_context(bad)?)
                }
                "extra_precision" => cfg.extra_precision = Some(value.parse().with_context(bad)?),
                "include_timing" => cfg.include_timing = Some(value.parse().with_context(bad)?),
                other => bail!("line {}: unknown key {other:?}", lineno + 1),
            }
        }
        Ok(cfg)
    }

    /// Layers the file values over the library defaults.
    pub fn apply(&self, base: SuiteConfig) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed.unwrap_or(base.seed),
            random_samples: self.random_samples.unwrap_or(base.random_samples),
            uniformizer_samples: self.uniformizer_samples.unwrap_or(base.uniformizer_samples),
            extra_precision: self.extra_precision.or(base.extra_precision),
            include_timing: self.include_timing.unwrap_or(base.include_timing),
        }
    }
}
