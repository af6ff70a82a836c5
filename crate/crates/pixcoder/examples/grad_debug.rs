//! Throwaway: locate which parameter group disagrees with finite differences.

use pixcoder::codec::BitVector;
use pixcoder::nn::gradcheck::numeric_gradient;
use pixcoder::nn::{ModelSpec, TrainItem, VisionModel};
use pixcoder::render::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut model = VisionModel::<f64>::build(ModelSpec::downsized(12), 11);
    let mut rng = ChaCha8Rng::seed_from_u64(11 ^ 0xABCD);
    let mut batch = Vec::new();
    for _ in 0..2 {
        let mut image = RasterImage::new(8, 8);
        for y in 0..8 {
            for x in 0..8 {
                image.set_pixel(x, y, [rng.gen(), rng.gen(), rng.gen()]);
            }
        }
        let mut target = BitVector::zeros(12);
        for i in 0..12 {
            if rng.gen_bool(0.25) {
                target.set(i, true);
            }
        }
        batch.push(TrainItem { image, target });
    }
    let (_, grads) = model.loss_and_grad(&batch).unwrap();
    let analytic = grads.flat();
    let numeric = numeric_gradient(&mut model, &batch, 1e-5).unwrap();

    // Slice boundaries in parameter order.
    let names = [
        "conv0.w", "conv0.b", "conv1.w", "conv1.b", "conv2.w", "conv2.b",
        "conv3.w", "conv3.b", "conv4.w", "conv4.b", "conv5.w", "conv5.b",
        "fc1.w", "fc1.b", "fc2.w", "fc2.b",
    ];
    let sizes = [
        2 * 27, 2, 2 * 18, 2, 2 * 18, 2, 2 * 18, 2, 2 * 18, 2, 2 * 18, 2,
        8 * 2, 8, 12 * 8, 12,
    ];
    let mut off = 0;
    for (name, size) in names.iter().zip(sizes) {
        let mut worst = 0.0f64;
        let mut worst_pair = (0.0, 0.0);
        for i in off..off + size {
            let (a, b) = (analytic[i], numeric[i]);
            let err = (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
            if err > worst {
                worst = err;
                worst_pair = (a, b);
            }
        }
        println!("{name:8} max_err {worst:.2e}   (analytic {:.6e}, numeric {:.6e})", worst_pair.0, worst_pair.1);
        off += size;
    }
    println!("total params: {off} vs {}", analytic.len());
}
