//! End-to-end orchestration: image -> scores -> bits -> tree -> code, plus
//! the experiment harness (training runs, evaluation, baselines, sweeps).

mod config;
mod report;

pub use config::RunConfig;
pub use report::{report_csv, report_table, sweep_csv, EvalReport};

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{decode, sample_tree, BitVector, CodecError, VectorLayout};
use crate::codegen::{compile, CodegenError, Target};
use crate::dsl::{parse, serialize, DslError, DslTree};
use crate::nn::{
    build_model, calibrate_threshold, train, CalibRecord, NnError, OutputMode, ScoreVector,
    TrainConfig, TrainItem,
};
use crate::render::{
    read_manifest, standardize_image_to, RasterImage, RenderError, Sample,
};
use crate::standardize::{binarize, resolve};
use crate::stm::similarity;
use crate::VisionModelF32;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Bad flags, config file or asset combination; CLI exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Checkpoint layout differs from the requested layout; CLI exit code 3.
    #[error("checkpoint mismatch: model is for `{found}`, expected `{expected}`")]
    CheckpointMismatch { expected: String, found: String },
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Result of one inference: the DSL text, its tree, and compiled source.
#[derive(Debug, Clone)]
pub struct InferOutput {
    pub tree: DslTree,
    pub dsl: String,
    pub code: String,
}

/// Run the full pipeline on one image.
///
/// Standardizes the image to the model input size, scores it, thresholds and
/// repairs the vector, decodes the tree and compiles it. Total for any image
/// content: the output DSL is always grammar-valid.
pub fn infer(
    model: &VisionModelF32,
    layout: &VectorLayout,
    image: &RasterImage,
    threshold: f64,
    target: Target,
) -> Result<InferOutput, PipelineError> {
    let standardized = standardize_image_to(image, model.spec().input_size);
    let scores = model.forward(&standardized)?;
    let tree = scores_to_tree(&scores, layout, threshold)?;
    let dsl = serialize(&tree)?;
    let code = compile(&tree, target)?;
    Ok(InferOutput { tree, dsl, code })
}

fn scores_to_tree(
    scores: &ScoreVector<f32>,
    layout: &VectorLayout,
    threshold: f64,
) -> Result<DslTree, PipelineError> {
    let raw = binarize(scores, threshold);
    let fixed = resolve(&raw, scores, layout);
    Ok(decode(&fixed, layout)?)
}

/// Uniform random grammar-valid tree; the comparison floor.
pub fn baseline_generate(layout: &VectorLayout, seed: u64) -> DslTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_tree(layout, &mut rng)
}

/// Score generated DSL texts against target trees.
///
/// Generated text is re-parsed; anything that fails to parse scores 0 and
/// counts as a syntax error. The mean includes those zeros.
pub fn evaluate_pairs(
    system: &str,
    layout: &VectorLayout,
    threshold: f64,
    model_id: &str,
    pairs: &[(String, DslTree)],
) -> EvalReport {
    let per_sample: Vec<f64> = pairs
        .par_iter()
        .map(|(generated, target)| match parse(generated) {
            Ok(tree) => similarity(&tree, target),
            Err(_) => 0.0,
        })
        .collect();
    let syntax_errors = pairs
        .iter()
        .filter(|(generated, _)| parse(generated).is_err())
        .count();
    let mean = per_sample.iter().sum::<f64>() / per_sample.len().max(1) as f64;
    EvalReport {
        system: system.to_string(),
        platform: layout.platform().name().to_string(),
        layout: layout.id(),
        model_id: model_id.to_string(),
        threshold,
        samples: per_sample.len(),
        mean_similarity: mean,
        syntax_errors,
        per_sample,
    }
}

/// Evaluate a trained model on (image, target tree) pairs.
pub fn eval_model(
    model: &VisionModelF32,
    layout: &VectorLayout,
    items: &[(RasterImage, DslTree)],
    threshold: f64,
    model_id: &str,
) -> Result<EvalReport, PipelineError> {
    let images: Vec<RasterImage> = items
        .iter()
        .map(|(img, _)| standardize_image_to(img, model.spec().input_size))
        .collect();
    let scores = model.forward_batch(&images)?;
    eval_scores(&scores, layout, items, threshold, model_id)
}

/// Evaluate pre-computed score vectors; lets threshold sweeps reuse one
/// forward pass.
pub fn eval_scores(
    scores: &[ScoreVector<f32>],
    layout: &VectorLayout,
    items: &[(RasterImage, DslTree)],
    threshold: f64,
    model_id: &str,
) -> Result<EvalReport, PipelineError> {
    let pairs: Result<Vec<(String, DslTree)>, PipelineError> = scores
        .iter()
        .zip(items)
        .map(|(score, (_, target))| {
            let tree = scores_to_tree(score, layout, threshold)?;
            Ok((serialize(&tree)?, target.clone()))
        })
        .collect();
    Ok(evaluate_pairs("pixcoder", layout, threshold, model_id, &pairs?))
}

/// Evaluate the random baseline against target trees.
pub fn eval_baseline(
    layout: &VectorLayout,
    targets: &[DslTree],
    seed: u64,
) -> Result<EvalReport, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Result<Vec<(String, DslTree)>, PipelineError> = targets
        .iter()
        .map(|target| {
            let tree = sample_tree(layout, &mut rng);
            Ok((serialize(&tree)?, target.clone()))
        })
        .collect();
    Ok(evaluate_pairs("baseline", layout, 0.0, "random", &pairs?))
}

/// A finished training run.
pub struct TrainedArtifacts {
    pub model: VisionModelF32,
    pub records: Vec<CalibRecord>,
    /// Calibrated (or overridden) decision threshold.
    pub threshold: f64,
}

/// Train a model per the run config on in-memory samples.
pub fn train_from_samples(
    layout: &VectorLayout,
    train_samples: &[Sample],
    cfg: &RunConfig,
    log_path: Option<std::path::PathBuf>,
) -> Result<TrainedArtifacts, PipelineError> {
    cfg.validate()?;
    let items: Vec<TrainItem> = train_samples
        .par_iter()
        .map(|s| TrainItem {
            image: standardize_image_to(&s.image, cfg.image_size),
            target: s.bits.clone(),
        })
        .collect();
    let mut model = build_model::<f32>(layout.width(), cfg.image_size, cfg.seed);
    if cfg.softmax_regions {
        let spans = layout
            .regions()
            .iter()
            .map(|r| (r.offset, r.patterns.len()))
            .collect();
        model.set_output_mode(OutputMode::RegionSoftmax { spans });
    }
    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        momentum: cfg.momentum,
        seed: cfg.seed,
        calib_sample: cfg.calib_sample,
        log_path,
    };
    let records = train(&mut model, &items, &train_cfg)?;
    let threshold = match cfg.threshold_override {
        Some(t) => t,
        None => calibrate_threshold(&records),
    };
    model.set_threshold(threshold);
    Ok(TrainedArtifacts {
        model,
        records,
        threshold,
    })
}

/// Mean similarity at each threshold, reusing a single forward pass.
pub fn sweep_thresholds(
    model: &VisionModelF32,
    layout: &VectorLayout,
    items: &[(RasterImage, DslTree)],
    thresholds: &[f64],
) -> Result<Vec<(f64, f64)>, PipelineError> {
    let images: Vec<RasterImage> = items
        .iter()
        .map(|(img, _)| standardize_image_to(img, model.spec().input_size))
        .collect();
    let scores = model.forward_batch(&images)?;
    thresholds
        .iter()
        .map(|&t| {
            let report = eval_scores(&scores, layout, items, t, "sweep")?;
            Ok((t, report.mean_similarity))
        })
        .collect()
}

/// Load a dataset split from its manifest into (image, target, bits) rows.
pub fn load_split(
    dir: &Path,
    split: &str,
    expected_layout: &VectorLayout,
) -> Result<Vec<(RasterImage, DslTree, BitVector)>, PipelineError> {
    let manifest = dir.join(format!("{split}.jsonl"));
    let entries = read_manifest(&manifest)?;
    for entry in &entries {
        if entry.layout != expected_layout.id() {
            return Err(PipelineError::CheckpointMismatch {
                expected: expected_layout.id(),
                found: entry.layout.clone(),
            });
        }
    }
    entries
        .par_iter()
        .map(|entry| {
            let image = RasterImage::load(&dir.join(&entry.image))?;
            let tree = parse(&entry.dsl)?;
            let bits = BitVector::from_bit_string(&entry.bits)?;
            Ok((image, tree, bits))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode, layout_for};
    use crate::dsl::Platform;
    use crate::render::{gen_dataset, RenderTheme};

    #[test]
    fn perfect_generator_scores_mean_one() {
        let layout = layout_for(Platform::Web, true);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let targets: Vec<DslTree> = (0..50).map(|_| sample_tree(&layout, &mut rng)).collect();
        // Stub pipeline: decode the true label back to text.
        let pairs: Vec<(String, DslTree)> = targets
            .iter()
            .map(|t| {
                let bits = encode(t, &layout).unwrap();
                let tree = decode(&bits, &layout).unwrap();
                (serialize(&tree).unwrap(), t.clone())
            })
            .collect();
        let report = evaluate_pairs("stub", &layout, 0.5, "oracle", &pairs);
        assert_eq!(report.mean_similarity, 1.0);
        assert_eq!(report.syntax_errors, 0);
    }

    #[test]
    fn syntax_errors_score_zero_and_are_counted() {
        let layout = layout_for(Platform::Web, true);
        let target = baseline_generate(&layout, 1);
        let pairs = vec![
            ("row { title".to_string(), target.clone()),
            (serialize(&target).unwrap(), target.clone()),
        ];
        let report = evaluate_pairs("stub", &layout, 0.5, "x", &pairs);
        assert_eq!(report.syntax_errors, 1);
        assert_eq!(report.per_sample[0], 0.0);
        assert_eq!(report.per_sample[1], 1.0);
        assert_eq!(report.mean_similarity, 0.5);
    }

    #[test]
    fn baseline_is_valid_and_imperfect() {
        let layout = layout_for(Platform::Ios, true);
        for seed in 0..50 {
            let tree = baseline_generate(&layout, seed);
            assert!(layout.grammar().accepts(&tree));
        }
        let targets: Vec<DslTree> = (0..80)
            .map(|i| baseline_generate(&layout, 1000 + i))
            .collect();
        let report = eval_baseline(&layout, &targets, 7).unwrap();
        assert_eq!(report.syntax_errors, 0);
        assert!(report.mean_similarity > 0.1 && report.mean_similarity < 0.999);
    }

    #[test]
    fn untrained_pipeline_is_total() {
        let layout = layout_for(Platform::Web, true);
        let theme = RenderTheme::default();
        let (samples, _) = gen_dataset(3, 1, &layout, &theme, 21, 64).unwrap();
        let model = build_model::<f32>(layout.width(), 64, 0);
        for s in &samples {
            let out = infer(&model, &layout, &s.image, 0.5, Target::Html).unwrap();
            assert!(layout.grammar().accepts(&out.tree));
            assert!(crate::codegen::check_wellformed(&out.code, Target::Html).is_empty());
            // Determinism: same image, same checkpoint, same output.
            let again = infer(&model, &layout, &s.image, 0.5, Target::Html).unwrap();
            assert_eq!(again.dsl, out.dsl);
            assert_eq!(again.code, out.code);
        }
    }
}
