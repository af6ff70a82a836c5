//! Run configuration and the `key = value` config file format.

use std::path::Path;

use crate::dsl::Platform;

use super::PipelineError;

/// Everything a training/evaluation run depends on besides the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub platform: Platform,
    pub pruned: bool,
    /// Model input side (64 desk scale, 256 full scale).
    pub image_size: usize,
    /// Canvas side for synthetic renders.
    pub render_size: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Fixed decision threshold; when absent the calibrated one is used.
    pub threshold_override: Option<f64>,
    pub calib_sample: usize,
    pub seed: u64,
    /// Comparison mode: region-wise softmax output instead of per-bit
    /// logistic.
    pub softmax_regions: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            platform: Platform::Ios,
            pruned: true,
            image_size: 64,
            render_size: 256,
            n_train: 1500,
            n_test: 250,
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-3,
            momentum: 0.9,
            threshold_override: None,
            calib_sample: 128,
            seed: 0,
            softmax_regions: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !matches!(self.image_size, 64 | 128 | 256) {
            return Err(PipelineError::Config(format!(
                "image_size must be 64, 128 or 256, got {}",
                self.image_size
            )));
        }
        if let Some(t) = self.threshold_override {
            if !(t > 0.0 && t < 1.0) {
                return Err(PipelineError::Config(format!(
                    "threshold must lie strictly between 0 and 1, got {t}"
                )));
            }
        }
        if self.epochs == 0 || self.batch_size == 0 || self.n_train == 0 {
            return Err(PipelineError::Config(
                "epochs, batch_size and n_train must be positive".to_string(),
            ));
        }
        if self.render_size < self.image_size {
            return Err(PipelineError::Config(format!(
                "render_size {} is smaller than image_size {}",
                self.render_size, self.image_size
            )));
        }
        Ok(())
    }

    /// Apply one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let bad = |what: &str, v: &str| PipelineError::Config(format!("bad {what}: `{v}`"));
        match key {
            "platform" => self.platform = value.parse().map_err(PipelineError::Config)?,
            "pruned" => self.pruned = value.parse().map_err(|_| bad("bool", value))?,
            "image_size" => self.image_size = value.parse().map_err(|_| bad("integer", value))?,
            "render_size" => self.render_size = value.parse().map_err(|_| bad("integer", value))?,
            "n_train" => self.n_train = value.parse().map_err(|_| bad("integer", value))?,
            "n_test" => self.n_test = value.parse().map_err(|_| bad("integer", value))?,
            "epochs" => self.epochs = value.parse().map_err(|_| bad("integer", value))?,
            "batch_size" => self.batch_size = value.parse().map_err(|_| bad("integer", value))?,
            "learning_rate" => {
                self.learning_rate = value.parse().map_err(|_| bad("number", value))?
            }
            "momentum" => self.momentum = value.parse().map_err(|_| bad("number", value))?,
            "threshold" => {
                self.threshold_override = Some(value.parse().map_err(|_| bad("number", value))?)
            }
            "calib_sample" => {
                self.calib_sample = value.parse().map_err(|_| bad("integer", value))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("integer", value))?,
            "softmax_regions" => {
                self.softmax_regions = value.parse().map_err(|_| bad("bool", value))?
            }
            other => {
                return Err(PipelineError::Config(format!("unknown config key `{other}`")));
            }
        }
        Ok(())
    }

    /// Load assignments from a config file: one `key = value` per line,
    /// `#` comments.
    pub fn load_file(&mut self, path: &Path) -> Result<(), PipelineError> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(PipelineError::Config(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                )));
            };
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# experiment defaults\nplatform = web\nepochs = 4\nthreshold = 0.01\nseed = 9\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(&path).unwrap();
        assert_eq!(cfg.platform, Platform::Web);
        assert_eq!(cfg.epochs, 4);
        assert_eq!(cfg.threshold_override, Some(0.01));
        assert_eq!(cfg.seed, 9);
        cfg.validate().unwrap();
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut cfg = RunConfig::default();
        assert!(matches!(
            cfg.apply("platform", "amiga"),
            Err(PipelineError::Config(_))
        ));
        assert!(matches!(
            cfg.apply("frobnication", "1"),
            Err(PipelineError::Config(_))
        ));
        cfg.threshold_override = Some(1.5);
        assert!(matches!(cfg.validate(), Err(PipelineError::Config(_))));
        cfg.threshold_override = Some(0.01);
        cfg.image_size = 100;
        assert!(matches!(cfg.validate(), Err(PipelineError::Config(_))));
    }
}
