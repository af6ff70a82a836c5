//! Mini-batch SGD with momentum, plus threshold-calibration records.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::num::Scalar;

use super::{Grads, NnError, TrainItem, VisionModel};

/// Fixed number of parallel gradient chunks per batch. Chunk results reduce
/// in index order, so training is bit-reproducible regardless of how many
/// threads actually run.
pub const GRAD_CHUNKS: usize = 4;

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    /// Calibration sample size drawn from the training set each epoch in
    /// the second half of training.
    pub calib_sample: usize,
    /// Optional CSV log: epoch, loss, calib min-for-1, calib max-for-0.
    pub log_path: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-3,
            momentum: 0.9,
            seed: 0,
            calib_sample: 128,
            log_path: None,
        }
    }
}

/// Observed score extremes on a calibration sample after one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibRecord {
    pub epoch: usize,
    /// Smallest score among bits whose target is 1.
    pub min_one: f64,
    /// Largest score among bits whose target is 0.
    pub max_zero: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Train in place. Records one [`CalibRecord`] per epoch once training is
/// past the halfway point, each on a freshly drawn calibration sample.
pub fn train<F: Scalar>(
    model: &mut VisionModel<F>,
    data: &[TrainItem],
    config: &TrainConfig,
) -> Result<Vec<CalibRecord>, NnError> {
    assert!(!data.is_empty(), "empty training set");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut velocity = Grads::zeros_like(model);
    let mut records = Vec::new();
    let mut log = match &config.log_path {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            writeln!(f, "epoch,loss,calib_min_one,calib_max_zero")?;
            Some(f)
        }
        None => None,
    };

    let mut order: Vec<usize> = (0..data.len()).collect();
    let lr = F::from_f64_lossy(config.learning_rate);
    let mu = F::from_f64_lossy(config.momentum);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        let mut batch: Vec<TrainItem> = Vec::with_capacity(config.batch_size);
        for ids in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(ids.iter().map(|&i| data[i].clone()));
            let (loss, grads) = model.loss_and_grad(&batch)?;
            if !loss.is_finite() {
                return Err(NnError::Divergence { epoch, loss });
            }
            loss_sum += loss * ids.len() as f64;
            seen += ids.len();
            // v = mu*v - lr*g; w += v
            velocity.scale(mu);
            let mut step = grads;
            step.scale(-lr);
            velocity.add_assign(&step);
            apply_velocity(model, &velocity);
        }
        let epoch_loss = loss_sum / seen as f64;

        let mut calib: Option<CalibRecord> = None;
        if epoch > config.epochs / 2 {
            let record = calibration_record(model, data, config, epoch)?;
            calib = Some(record);
            records.push(record);
        }
        if let Some(f) = log.as_mut() {
            match calib {
                Some(c) => writeln!(f, "{epoch},{epoch_loss},{},{}", c.min_one, c.max_zero)?,
                None => writeln!(f, "{epoch},{epoch_loss},,")?,
            }
        }
    }
    Ok(records)
}

fn calibration_record<F: Scalar>(
    model: &VisionModel<F>,
    data: &[TrainItem],
    config: &TrainConfig,
    epoch: usize,
) -> Result<CalibRecord, NnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(config.seed ^ (epoch as u64) << 17));
    let n = config.calib_sample.min(data.len());
    let picks = rand::seq::index::sample(&mut rng, data.len(), n);
    let images: Vec<_> = picks.iter().map(|i| data[i].image.clone()).collect();
    let scores = model.forward_batch(&images)?;
    let mut min_one = f64::INFINITY;
    let mut max_zero = f64::NEG_INFINITY;
    for (scored, i) in scores.iter().zip(picks.iter()) {
        let target = &data[i].target;
        for b in 0..scored.width() {
            let v = scored.get(b).to_f64().unwrap_or(f64::NAN);
            if target.get(b) {
                min_one = min_one.min(v);
            } else {
                max_zero = max_zero.max(v);
            }
        }
    }
    Ok(CalibRecord {
        epoch,
        min_one,
        max_zero,
    })
}

fn apply_velocity<F: Scalar>(model: &mut VisionModel<F>, velocity: &Grads<F>) {
    for (weights, step) in model.param_slices_mut().into_iter().zip(velocity.slices()) {
        for (w, &v) in weights.iter_mut().zip(step) {
            *w = *w + v;
        }
    }
}
