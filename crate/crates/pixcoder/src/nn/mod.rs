//! The vision model: a VGG-style CNN mapping standardized GUI images to
//! per-bit style scores, trained from scratch on dense arrays.
//!
//! Three blocks of two 3x3 stride-1 convolutions followed by 2x2 max
//! pooling, widths 32/64/128, then a 1024-wide hidden layer and an output
//! layer as wide as the vector layout. Hidden activations are ReLU. The
//! output is per-bit logistic by default; a region-wise softmax mode exists
//! for comparison but cannot express all-zero regions, so thresholded
//! logistic scores drive the shipped pipeline.

mod calibrate;
mod checkpoint;
pub mod gradcheck;
mod layers;
mod tensor;
#[cfg(test)]
mod tests;
mod train;

pub use calibrate::calibrate_threshold;
pub use checkpoint::{load_model, save_model};
pub use train::{train, CalibRecord, TrainConfig, GRAD_CHUNKS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::codec::BitVector;
use crate::num::Scalar;
use crate::render::RasterImage;

use layers::{maxpool2, maxpool2_backward, ConvLayer, DenseLayer};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raw per-bit scores in [0, 1] produced by the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector<F: Scalar> {
    values: Vec<F>,
}

impl<F: Scalar> ScoreVector<F> {
    pub fn from_values(values: Vec<F>) -> Self {
        Self { values }
    }

    pub fn width(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn get(&self, i: usize) -> F {
        self.values[i]
    }
}

/// Output activation of the final layer.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputMode {
    /// Independent sigmoid per bit, binary cross-entropy loss.
    Logistic,
    /// Softmax inside each region span; only occupied regions are scored.
    /// Kept for comparison; it cannot represent absent rows.
    RegionSoftmax { spans: Vec<(usize, usize)> },
}

/// Architecture parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    /// Square input side; must be divisible by 8.
    pub input_size: usize,
    /// Channel width of each conv block.
    pub conv_widths: [usize; 3],
    /// Hidden fully connected width.
    pub fc_width: usize,
    /// Output width = vector layout width.
    pub output_width: usize,
}

impl ModelSpec {
    /// The paper-scale architecture.
    pub fn standard(output_width: usize, input_size: usize) -> Self {
        assert!(
            matches!(input_size, 64 | 128 | 256),
            "supported input sizes are 64, 128, 256"
        );
        Self {
            input_size,
            conv_widths: [32, 64, 128],
            fc_width: 1024,
            output_width,
        }
    }

    /// Tiny variant for gradient verification: 8x8 input, widths 2/2/2, FC 8.
    pub fn downsized(output_width: usize) -> Self {
        Self {
            input_size: 8,
            conv_widths: [2, 2, 2],
            fc_width: 8,
            output_width,
        }
    }

    fn conv_plan(&self) -> [(usize, usize, usize); 6] {
        let s = self.input_size;
        let [w0, w1, w2] = self.conv_widths;
        [
            (3, w0, s),
            (w0, w0, s),
            (w0, w1, s / 2),
            (w1, w1, s / 2),
            (w1, w2, s / 4),
            (w2, w2, s / 4),
        ]
    }

    fn flat_len(&self) -> usize {
        let s = self.input_size / 8;
        self.conv_widths[2] * s * s
    }
}

/// One training example: a standardized image and its label vector.
#[derive(Debug, Clone)]
pub struct TrainItem {
    pub image: RasterImage,
    pub target: BitVector,
}

/// The CNN with its calibrated threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct VisionModel<F: Scalar> {
    spec: ModelSpec,
    output_mode: OutputMode,
    conv: Vec<ConvLayer<F>>,
    fc1: DenseLayer<F>,
    fc2: DenseLayer<F>,
    threshold: Option<f64>,
}

/// Build the standard architecture for a layout width; deterministic
/// He-style uniform initialization from the seed.
pub fn build_model<F: Scalar>(layout_width: usize, image_size: usize, seed: u64) -> VisionModel<F> {
    VisionModel::build(ModelSpec::standard(layout_width, image_size), seed)
}

impl<F: Scalar> VisionModel<F> {
    pub fn build(spec: ModelSpec, seed: u64) -> Self {
        assert!(spec.input_size % 8 == 0, "input size must be divisible by 8");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv = spec
            .conv_plan()
            .iter()
            .map(|&(in_c, out_c, size)| ConvLayer::init(in_c, out_c, size, &mut rng))
            .collect();
        let fc1 = DenseLayer::init(spec.flat_len(), spec.fc_width, &mut rng);
        let fc2 = DenseLayer::init(spec.fc_width, spec.output_width, &mut rng);
        Self {
            spec,
            output_mode: OutputMode::Logistic,
            conv,
            fc1,
            fc2,
            threshold: None,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn output_mode(&self) -> &OutputMode {
        &self.output_mode
    }

    pub fn set_output_mode(&mut self, mode: OutputMode) {
        if let OutputMode::RegionSoftmax { spans } = &mode {
            let covered: usize = spans.iter().map(|&(_, w)| w).sum();
            assert_eq!(covered, self.spec.output_width, "spans must cover the output");
        }
        self.output_mode = mode;
    }

    /// Calibrated decision threshold, once trained.
    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn set_threshold(&mut self, threshold: f64) {
        self.threshold = Some(threshold);
    }

    fn image_to_input(&self, image: &RasterImage) -> Result<Vec<F>, NnError> {
        let s = self.spec.input_size;
        if image.width() != s || image.height() != s {
            return Err(NnError::ShapeMismatch {
                expected: format!("{s}x{s}"),
                found: format!("{}x{}", image.width(), image.height()),
            });
        }
        let mut x = vec![F::zero(); 3 * s * s];
        let data = image.data();
        let half = F::from_f64_lossy(0.5);
        for c in 0..3 {
            for i in 0..s * s {
                // Center to [-0.5, 0.5]; the bright UI background would
                // otherwise dominate every first-layer activation.
                x[c * s * s + i] = F::from_f64_lossy(data[i * 3 + c] as f64) - half;
            }
        }
        Ok(x)
    }

    /// Score a standardized image.
    pub fn forward(&self, image: &RasterImage) -> Result<ScoreVector<F>, NnError> {
        let x = self.image_to_input(image)?;
        let mut ws = Workspace::new(&self.spec);
        self.forward_ws(&x, &mut ws);
        Ok(ScoreVector::from_values(ws.scores.clone()))
    }

    /// Score many images; identical to per-image [`forward`] and ordered.
    pub fn forward_batch(&self, images: &[RasterImage]) -> Result<Vec<ScoreVector<F>>, NnError> {
        images
            .par_iter()
            .map_init(
                || Workspace::new(&self.spec),
                |ws, image| {
                    let x = self.image_to_input(image)?;
                    self.forward_ws(&x, ws);
                    Ok(ScoreVector::from_values(ws.scores.clone()))
                },
            )
            .collect()
    }

    fn forward_ws(&self, input: &[F], ws: &mut Workspace<F>) {
        for block in 0..3 {
            let (lo, hi) = (2 * block, 2 * block + 1);
            let block_input: &[F] = if block == 0 { input } else { &ws.pool[block - 1] };
            self.conv[lo].forward(block_input, &mut ws.col[lo], &mut ws.act[lo]);
            let (head, tail) = ws.act.split_at_mut(hi);
            self.conv[hi].forward(&head[lo], &mut ws.col[hi], &mut tail[0]);
            let (c, s) = (self.conv[hi].out_c, self.conv[hi].size);
            maxpool2(&tail[0], &mut ws.pool[block], &mut ws.pool_idx[block], c, s, s);
        }
        self.fc1.forward(&ws.pool[2], &mut ws.fc1_out, true);
        self.fc2.forward(&ws.fc1_out, &mut ws.logits, false);
        self.activate(&ws.logits, &mut ws.scores);
    }

    fn activate(&self, logits: &[F], scores: &mut [F]) {
        match &self.output_mode {
            OutputMode::Logistic => {
                for (s, &z) in scores.iter_mut().zip(logits) {
                    *s = sigmoid(z)
                }
            }
            OutputMode::RegionSoftmax { spans } => {
                for &(offset, width) in spans {
                    let span = &logits[offset..offset + width];
                    let max = span.iter().copied().fold(F::neg_infinity(), F::max);
                    let mut denom = F::zero();
                    for (s, &z) in scores[offset..offset + width].iter_mut().zip(span) {
                        *s = (z - max).exp();
                        denom = denom + *s;
                    }
                    for s in &mut scores[offset..offset + width] {
                        *s = *s / denom;
                    }
                }
            }
        }
    }

    /// Loss (mean over the batch, summed over bits) plus the output-layer
    /// gradient written into `dlogits`.
    fn loss_and_dlogits(&self, scores: &[F], logits: &[F], target: &BitVector, dlogits: &mut [F]) -> f64 {
        let mut loss = 0.0f64;
        match &self.output_mode {
            OutputMode::Logistic => {
                for i in 0..scores.len() {
                    let z = logits[i].to_f64().unwrap_or(f64::NAN);
                    let y = target.get(i);
                    // Stable BCE: softplus(-z) + (1-y) z.
                    let sp = (-z.abs()).exp().ln_1p() + (-z).max(0.0);
                    loss += sp + if y { 0.0 } else { z };
                    let yv = if y { F::one() } else { F::zero() };
                    dlogits[i] = scores[i] - yv;
                }
            }
            OutputMode::RegionSoftmax { spans } => {
                dlogits.fill(F::zero());
                for &(offset, width) in spans {
                    let hot = (offset..offset + width).find(|&i| target.get(i));
                    let Some(hot) = hot else { continue };
                    let p = scores[hot].to_f64().unwrap_or(0.0).max(1e-12);
                    loss -= p.ln();
                    for i in offset..offset + width {
                        let yv = if i == hot { F::one() } else { F::zero() };
                        dlogits[i] = scores[i] - yv;
                    }
                }
            }
        }
        loss
    }

    /// Forward-only batch loss; the reference the gradient check perturbs.
    pub fn loss(&self, batch: &[TrainItem]) -> Result<f64, NnError> {
        let mut ws = Workspace::new(&self.spec);
        let mut dlogits = vec![F::zero(); self.spec.output_width];
        let mut total = 0.0;
        for item in batch {
            let x = self.image_to_input(&item.image)?;
            self.forward_ws(&x, &mut ws);
            total += self.loss_and_dlogits(&ws.scores, &ws.logits, &item.target, &mut dlogits);
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean loss and gradients over a batch.
    ///
    /// The batch is split into [`GRAD_CHUNKS`] fixed chunks reduced in index
    /// order, so results do not depend on thread scheduling.
    pub fn loss_and_grad(&self, batch: &[TrainItem]) -> Result<(f64, Grads<F>), NnError> {
        assert!(!batch.is_empty(), "empty batch");
        let chunk_len = batch.len().div_ceil(train::GRAD_CHUNKS);
        let partials: Vec<Result<(f64, Grads<F>), NnError>> = batch
            .par_chunks(chunk_len)
            .map(|chunk| {
                let mut ws = Workspace::new(&self.spec);
                let mut grads = Grads::zeros_like(self);
                let mut loss = 0.0;
                for item in chunk {
                    let x = self.image_to_input(&item.image)?;
                    loss += self.sample_grad(&x, &item.target, &mut ws, &mut grads);
                }
                Ok((loss, grads))
            })
            .collect();
        let mut total_loss = 0.0;
        let mut grads: Option<Grads<F>> = None;
        for partial in partials {
            let (loss, g) = partial?;
            total_loss += loss;
            match &mut grads {
                None => grads = Some(g),
                Some(acc) => acc.add_assign(&g),
            }
        }
        let mut grads = grads.expect("at least one chunk");
        let scale = F::from_f64_lossy(1.0 / batch.len() as f64);
        grads.scale(scale);
        Ok((total_loss / batch.len() as f64, grads))
    }

    /// Forward + backward for one sample; returns the sample loss and
    /// accumulates unscaled gradients.
    fn sample_grad(&self, input: &[F], target: &BitVector, ws: &mut Workspace<F>, g: &mut Grads<F>) -> f64 {
        self.forward_ws(input, ws);
        let loss = self.loss_and_dlogits(&ws.scores, &ws.logits, target, &mut ws.dlogits);

        self.fc2.backward(&ws.fc1_out, &ws.dlogits, Some(&mut ws.dfc1), &mut g.fc2_w, &mut g.fc2_b);
        for (dv, &ov) in ws.dfc1.iter_mut().zip(&ws.fc1_out) {
            if ov <= F::zero() {
                *dv = F::zero();
            }
        }
        self.fc1.backward(&ws.pool[2], &ws.dfc1, Some(&mut ws.dpool[2]), &mut g.fc1_w, &mut g.fc1_b);

        // Conv blocks in reverse; the gradient w.r.t. the image itself is
        // never materialized.
        for block in (0..3).rev() {
            let (lo, hi) = (2 * block, 2 * block + 1);
            let c = self.conv[hi].out_c;
            let s = self.conv[hi].size;
            maxpool2_backward(&ws.dpool[block], &ws.pool_idx[block], &mut ws.dact[hi], c, s, s);
            {
                let (head, tail) = ws.dact.split_at_mut(hi);
                self.conv[hi].backward(
                    &ws.col[hi],
                    &ws.act[hi],
                    &mut tail[0],
                    &mut ws.dcol,
                    Some(&mut head[lo]),
                    &mut g.conv_w[hi],
                    &mut g.conv_b[hi],
                );
            }
            let dinput = if block > 0 {
                Some(ws.dpool[block - 1].as_mut_slice())
            } else {
                None
            };
            self.conv[lo].backward(
                &ws.col[lo],
                &ws.act[lo],
                &mut ws.dact[lo],
                &mut ws.dcol,
                dinput,
                &mut g.conv_w[lo],
                &mut g.conv_b[lo],
            );
        }
        loss
    }

    /// Flattened view of every parameter, in checkpoint order.
    pub(crate) fn param_slices(&self) -> Vec<&[F]> {
        let mut out: Vec<&[F]> = Vec::new();
        for c in &self.conv {
            out.push(&c.w);
            out.push(&c.b);
        }
        out.push(&self.fc1.w);
        out.push(&self.fc1.b);
        out.push(&self.fc2.w);
        out.push(&self.fc2.b);
        out
    }

    pub(crate) fn param_slices_mut(&mut self) -> Vec<&mut [F]> {
        let mut out: Vec<&mut [F]> = Vec::new();
        for c in &mut self.conv {
            out.push(&mut c.w);
            out.push(&mut c.b);
        }
        out.push(&mut self.fc1.w);
        out.push(&mut self.fc1.b);
        out.push(&mut self.fc2.w);
        out.push(&mut self.fc2.b);
        out
    }

    pub fn param_count(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }
}

fn sigmoid<F: Scalar>(z: F) -> F {
    F::one() / (F::one() + (-z).exp())
}

/// Gradient (or momentum) storage mirroring the model parameters.
#[derive(Debug, Clone)]
pub struct Grads<F: Scalar> {
    conv_w: Vec<Vec<F>>,
    conv_b: Vec<Vec<F>>,
    fc1_w: Vec<F>,
    fc1_b: Vec<F>,
    fc2_w: Vec<F>,
    fc2_b: Vec<F>,
}

impl<F: Scalar> Grads<F> {
    pub fn zeros_like(model: &VisionModel<F>) -> Self {
        Self {
            conv_w: model.conv.iter().map(|c| vec![F::zero(); c.w.len()]).collect(),
            conv_b: model.conv.iter().map(|c| vec![F::zero(); c.b.len()]).collect(),
            fc1_w: vec![F::zero(); model.fc1.w.len()],
            fc1_b: vec![F::zero(); model.fc1.b.len()],
            fc2_w: vec![F::zero(); model.fc2.w.len()],
            fc2_b: vec![F::zero(); model.fc2.b.len()],
        }
    }

    fn slices(&self) -> Vec<&[F]> {
        let mut out: Vec<&[F]> = Vec::new();
        for (w, b) in self.conv_w.iter().zip(&self.conv_b) {
            out.push(w);
            out.push(b);
        }
        out.push(&self.fc1_w);
        out.push(&self.fc1_b);
        out.push(&self.fc2_w);
        out.push(&self.fc2_b);
        out
    }

    fn slices_mut(&mut self) -> Vec<&mut [F]> {
        let mut out: Vec<&mut [F]> = Vec::new();
        for (w, b) in self.conv_w.iter_mut().zip(self.conv_b.iter_mut()) {
            out.push(w);
            out.push(b);
        }
        out.push(&mut self.fc1_w);
        out.push(&mut self.fc1_b);
        out.push(&mut self.fc2_w);
        out.push(&mut self.fc2_b);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = *d + s;
            }
        }
    }

    pub fn scale(&mut self, factor: F) {
        for slice in self.slices_mut() {
            for v in slice {
                *v = *v * factor;
            }
        }
    }

    /// All gradient values flattened, in parameter order.
    pub fn flat(&self) -> Vec<F> {
        self.slices().into_iter().flatten().copied().collect()
    }
}

/// Per-thread forward/backward buffers.
struct Workspace<F: Scalar> {
    col: Vec<Vec<F>>,
    act: Vec<Vec<F>>,
    dact: Vec<Vec<F>>,
    pool: Vec<Vec<F>>,
    dpool: Vec<Vec<F>>,
    pool_idx: Vec<Vec<u8>>,
    dcol: Vec<F>,
    fc1_out: Vec<F>,
    dfc1: Vec<F>,
    logits: Vec<F>,
    dlogits: Vec<F>,
    scores: Vec<F>,
}

impl<F: Scalar> Workspace<F> {
    fn new(spec: &ModelSpec) -> Self {
        let plan = spec.conv_plan();
        let col: Vec<Vec<F>> = plan
            .iter()
            .map(|&(in_c, _, s)| vec![F::zero(); in_c * 9 * s * s])
            .collect();
        let act: Vec<Vec<F>> = plan
            .iter()
            .map(|&(_, out_c, s)| vec![F::zero(); out_c * s * s])
            .collect();
        let pool: Vec<Vec<F>> = [1usize, 3, 5]
            .iter()
            .map(|&l| {
                let (_, out_c, s) = plan[l];
                vec![F::zero(); out_c * (s / 2) * (s / 2)]
            })
            .collect();
        let pool_idx: Vec<Vec<u8>> = pool.iter().map(|p| vec![0u8; p.len()]).collect();
        let dcol_len = col.iter().map(|c| c.len()).max().unwrap();
        Self {
            dact: act.clone(),
            dpool: pool.clone(),
            col,
            act,
            pool,
            pool_idx,
            dcol: vec![F::zero(); dcol_len],
            fc1_out: vec![F::zero(); spec.fc_width],
            dfc1: vec![F::zero(); spec.fc_width],
            logits: vec![F::zero(); spec.output_width],
            dlogits: vec![F::zero(); spec.output_width],
            scores: vec![F::zero(); spec.output_width],
        }
    }
}
