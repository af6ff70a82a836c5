//! Model-level unit tests: determinism, output ranges, gradient checks,
//! smoke training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::BitVector;
use crate::render::RasterImage;

use super::gradcheck::{max_relative_error, numeric_gradient};
use super::*;

fn random_image<R: Rng>(rng: &mut R, size: usize) -> RasterImage {
    let mut img = RasterImage::new(size, size);
    for y in 0..size {
        for x in 0..size {
            img.set_pixel(x, y, [rng.gen(), rng.gen(), rng.gen()]);
        }
    }
    img
}

fn random_batch<R: Rng>(rng: &mut R, n: usize, size: usize, width: usize) -> Vec<TrainItem> {
    (0..n)
        .map(|_| {
            let image = random_image(rng, size);
            let mut target = BitVector::zeros(width);
            for i in 0..width {
                if rng.gen_bool(0.25) {
                    target.set(i, true);
                }
            }
            TrainItem { image, target }
        })
        .collect()
}

#[test]
fn builds_are_deterministic_and_sized_for_the_layout() {
    let a = build_model::<f32>(72, 64, 7);
    let b = build_model::<f32>(72, 64, 7);
    assert_eq!(a, b);
    assert_eq!(a.spec().output_width, 72);
    let c = build_model::<f32>(72, 64, 8);
    assert_ne!(a, c, "different seeds give different weights");
}

#[test]
fn untrained_forward_stays_in_unit_range() {
    let model = build_model::<f32>(40, 64, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let img = random_image(&mut rng, 64);
    let scores = model.forward(&img).unwrap();
    assert_eq!(scores.width(), 40);
    assert!(scores.values().iter().all(|v| (0.0..=1.0).contains(v) && v.is_finite()));
}

#[test]
fn wrong_input_size_is_a_shape_error() {
    let model = build_model::<f32>(40, 64, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let img = random_image(&mut rng, 32);
    assert!(matches!(model.forward(&img), Err(NnError::ShapeMismatch { .. })));
}

#[test]
fn batched_forward_equals_per_image_forward() {
    let model = build_model::<f32>(40, 64, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let images: Vec<RasterImage> = (0..5).map(|_| random_image(&mut rng, 64)).collect();
    let batched = model.forward_batch(&images).unwrap();
    for (img, b) in images.iter().zip(&batched) {
        let single = model.forward(img).unwrap();
        for (x, y) in single.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}

#[test]
fn perfect_predictions_give_near_zero_loss() {
    // Drive the output bias so far that sigmoid saturates to the target.
    let mut model = VisionModel::<f64>::build(ModelSpec::downsized(6), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let batch = random_batch(&mut rng, 2, 8, 6);
    let slices = model.param_slices_mut();
    let fc2_b = slices.into_iter().last().unwrap();
    for (i, b) in fc2_b.iter_mut().enumerate() {
        *b = if batch[0].target.get(i) { 50.0 } else { -50.0 };
    }
    // Zero the fc2 weights so the bias decides alone.
    {
        let mut slices = model.param_slices_mut();
        let fc2_w = slices.swap_remove(slices.len() - 2);
        fc2_w.fill(0.0);
    }
    let loss = model.loss(&batch[..1]).unwrap();
    assert!(loss < 1e-6, "loss {loss}");
}

#[test]
fn analytic_gradients_match_finite_differences() {
    // Downsized architecture in f64; five fixed seeds.
    for seed in [11u64, 12, 13, 14, 15] {
        let mut model = VisionModel::<f64>::build(ModelSpec::downsized(12), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let batch = random_batch(&mut rng, 2, 8, 12);
        let (_, grads) = model.loss_and_grad(&batch).unwrap();
        let analytic = grads.flat();
        let numeric = numeric_gradient(&mut model, &batch, 1e-5).unwrap();
        let err = max_relative_error(&analytic, &numeric);
        assert!(err < 1e-3, "seed {seed}: max relative error {err}");
    }
}

#[test]
fn gradients_match_in_region_softmax_mode() {
    let mut model = VisionModel::<f64>::build(ModelSpec::downsized(10), 21);
    model.set_output_mode(OutputMode::RegionSoftmax {
        spans: vec![(0, 4), (4, 6)],
    });
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    // One-hot per span in the first sample; empty first span in the second.
    let mut t1 = BitVector::zeros(10);
    t1.set(2, true);
    t1.set(7, true);
    let mut t2 = BitVector::zeros(10);
    t2.set(4, true);
    let batch = vec![
        TrainItem { image: random_image(&mut rng, 8), target: t1 },
        TrainItem { image: random_image(&mut rng, 8), target: t2 },
    ];
    let (_, grads) = model.loss_and_grad(&batch).unwrap();
    let numeric = numeric_gradient(&mut model, &batch, 1e-5).unwrap();
    let err = max_relative_error(&grads.flat(), &numeric);
    assert!(err < 1e-3, "max relative error {err}");
}

#[test]
fn loss_decreases_over_ten_steps_on_a_small_batch() {
    let mut model = VisionModel::<f32>::build(ModelSpec::downsized(12), 31);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let batch = random_batch(&mut rng, 4, 8, 12);
    let before = model.loss(&batch).unwrap();
    let cfg = TrainConfig {
        epochs: 10,
        batch_size: 4,
        learning_rate: 0.05,
        momentum: 0.9,
        seed: 33,
        calib_sample: 4,
        log_path: None,
    };
    train(&mut model, &batch, &cfg).unwrap();
    let after = model.loss(&batch).unwrap();
    assert!(after < before, "loss {before} -> {after}");
}

#[test]
fn training_is_reproducible_and_counts_calibration_epochs() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let data = random_batch(&mut rng, 12, 8, 12);
    let cfg = TrainConfig {
        epochs: 10,
        batch_size: 4,
        learning_rate: 0.01,
        momentum: 0.9,
        seed: 42,
        calib_sample: 8,
        log_path: None,
    };
    let mut m1 = VisionModel::<f32>::build(ModelSpec::downsized(12), 40);
    let r1 = train(&mut m1, &data, &cfg).unwrap();
    let mut m2 = VisionModel::<f32>::build(ModelSpec::downsized(12), 40);
    let r2 = train(&mut m2, &data, &cfg).unwrap();
    assert_eq!(m1, m2, "same seed, same weights");
    assert_eq!(r1.len(), 5, "epochs 6..=10 record calibration");
    assert_eq!(r1, r2);
    assert_eq!(r1[0].epoch, 6);
}

#[test]
fn divergence_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let data = random_batch(&mut rng, 4, 8, 12);
    let mut model = VisionModel::<f32>::build(ModelSpec::downsized(12), 50);
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 4,
        learning_rate: 1e30,
        momentum: 0.9,
        seed: 52,
        calib_sample: 4,
        log_path: None,
    };
    assert!(matches!(
        train(&mut model, &data, &cfg),
        Err(NnError::Divergence { .. })
    ));
}
