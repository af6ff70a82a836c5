//! Convolution, pooling and dense layers with explicit backward passes.

use rand::Rng;

use crate::num::Scalar;

use super::tensor::{axpy, col2im, dot, im2col, matmul_nn, matmul_nt_acc, matmul_tn};

/// 3x3 stride-1 pad-1 convolution. Weights are stored GEMM-ready as
/// `[out_c][in_c * 9]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ConvLayer<F: Scalar> {
    pub w: Vec<F>,
    pub b: Vec<F>,
    pub in_c: usize,
    pub out_c: usize,
    /// Square spatial side this layer runs at.
    pub size: usize,
}

impl<F: Scalar> ConvLayer<F> {
    pub fn init<R: Rng>(in_c: usize, out_c: usize, size: usize, rng: &mut R) -> Self {
        let fan_in = in_c * 9;
        let limit = (6.0 / fan_in as f64).sqrt();
        let w = (0..out_c * fan_in)
            .map(|_| F::from_f64_lossy(rng.gen_range(-limit..limit)))
            .collect();
        // Small nonzero biases keep pre-activations off the exact ReLU kink
        // when a unit's whole receptive field is zero.
        let b = (0..out_c)
            .map(|_| F::from_f64_lossy(rng.gen_range(-0.05..0.05)))
            .collect();
        Self {
            w,
            b,
            in_c,
            out_c,
            size,
        }
    }

    #[cfg(test)]
    pub fn col_len(&self) -> usize {
        self.in_c * 9 * self.size * self.size
    }

    #[cfg(test)]
    pub fn out_len(&self) -> usize {
        self.out_c * self.size * self.size
    }

    /// Forward with ReLU. Fills `col` (kept for backward) and `out`.
    pub fn forward(&self, input: &[F], col: &mut [F], out: &mut [F]) {
        im2col(input, col, self.in_c, self.size, self.size);
        matmul_nn(&self.w, col, out, self.out_c, self.in_c * 9, self.size * self.size);
        let plane = self.size * self.size;
        for (o, &bias) in self.b.iter().enumerate() {
            for v in &mut out[o * plane..(o + 1) * plane] {
                *v = (*v + bias).max(F::zero());
            }
        }
    }

    /// Backward from the post-ReLU gradient `dout` (clobbered in place).
    /// Accumulates into `gw`/`gb`; writes `dinput` when given (the first
    /// layer skips it).
    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        col: &[F],
        out: &[F],
        dout: &mut [F],
        dcol: &mut [F],
        dinput: Option<&mut [F]>,
        gw: &mut [F],
        gb: &mut [F],
    ) {
        let plane = self.size * self.size;
        let k = self.in_c * 9;
        for (dv, &ov) in dout.iter_mut().zip(out) {
            if ov <= F::zero() {
                *dv = F::zero();
            }
        }
        for o in 0..self.out_c {
            let mut s = F::zero();
            for &dv in &dout[o * plane..(o + 1) * plane] {
                s = s + dv;
            }
            gb[o] += s;
        }
        matmul_nt_acc(dout, col, gw, self.out_c, plane, k);
        if let Some(dx) = dinput {
            matmul_tn(&self.w, dout, &mut dcol[..k * plane], self.out_c, k, plane);
            col2im(&dcol[..k * plane], dx, self.in_c, self.size, self.size);
        }
    }
}

/// Fully connected layer; weights `[out_d][in_d]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseLayer<F: Scalar> {
    pub w: Vec<F>,
    pub b: Vec<F>,
    pub in_d: usize,
    pub out_d: usize,
}

impl<F: Scalar> DenseLayer<F> {
    pub fn init<R: Rng>(in_d: usize, out_d: usize, rng: &mut R) -> Self {
        let limit = (6.0 / in_d as f64).sqrt();
        let w = (0..out_d * in_d)
            .map(|_| F::from_f64_lossy(rng.gen_range(-limit..limit)))
            .collect();
        let b = (0..out_d)
            .map(|_| F::from_f64_lossy(rng.gen_range(-0.05..0.05)))
            .collect();
        Self {
            w,
            b,
            in_d,
            out_d,
        }
    }

    pub fn forward(&self, x: &[F], out: &mut [F], relu: bool) {
        for (o, ov) in out.iter_mut().enumerate() {
            let z = dot(&self.w[o * self.in_d..(o + 1) * self.in_d], x) + self.b[o];
            *ov = if relu { z.max(F::zero()) } else { z };
        }
    }

    /// Backward from `dout` (already masked by ReLU if applicable).
    pub fn backward(&self, x: &[F], dout: &[F], dx: Option<&mut [F]>, gw: &mut [F], gb: &mut [F]) {
        for (o, &dv) in dout.iter().enumerate() {
            axpy(&mut gw[o * self.in_d..(o + 1) * self.in_d], dv, x);
            gb[o] += dv;
        }
        if let Some(dx) = dx {
            dx.fill(F::zero());
            for (o, &dv) in dout.iter().enumerate() {
                axpy(dx, dv, &self.w[o * self.in_d..(o + 1) * self.in_d]);
            }
        }
    }
}

/// 2x2 max pooling with stride 2. Records the winning position (0..4) per
/// output cell for the backward scatter.
pub(crate) fn maxpool2<F: Scalar>(input: &[F], out: &mut [F], idx: &mut [u8], c: usize, h: usize, w: usize) {
    let (h2, w2) = (h / 2, w / 2);
    debug_assert_eq!(out.len(), c * h2 * w2);
    for ci in 0..c {
        let plane = &input[ci * h * w..(ci + 1) * h * w];
        for y in 0..h2 {
            for x in 0..w2 {
                let candidates = [
                    plane[(2 * y) * w + 2 * x],
                    plane[(2 * y) * w + 2 * x + 1],
                    plane[(2 * y + 1) * w + 2 * x],
                    plane[(2 * y + 1) * w + 2 * x + 1],
                ];
                let mut best = 0usize;
                for i in 1..4 {
                    if candidates[i] > candidates[best] {
                        best = i;
                    }
                }
                out[ci * h2 * w2 + y * w2 + x] = candidates[best];
                idx[ci * h2 * w2 + y * w2 + x] = best as u8;
            }
        }
    }
}

/// Scatter pooled gradients back; overwrites `dinput`.
pub(crate) fn maxpool2_backward<F: Scalar>(
    dout: &[F],
    idx: &[u8],
    dinput: &mut [F],
    c: usize,
    h: usize,
    w: usize,
) {
    let (h2, w2) = (h / 2, w / 2);
    dinput.fill(F::zero());
    for ci in 0..c {
        for y in 0..h2 {
            for x in 0..w2 {
                let i = ci * h2 * w2 + y * w2 + x;
                let (dy, dx) = ((idx[i] / 2) as usize, (idx[i] % 2) as usize);
                dinput[ci * h * w + (2 * y + dy) * w + 2 * x + dx] = dout[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxpool_picks_maxima_and_routes_gradient() {
        let input: Vec<f32> = vec![
            1.0, 2.0, 3.0, 4.0, //
            5.0, 6.0, 7.0, 8.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 9.0, 0.0, 0.5,
        ];
        let mut out = vec![0.0f32; 4];
        let mut idx = vec![0u8; 4];
        maxpool2(&input, &mut out, &mut idx, 1, 4, 4);
        assert_eq!(out, vec![6.0, 8.0, 9.0, 1.0]);
        let mut dinput = vec![0.0f32; 16];
        maxpool2_backward(&[1.0, 2.0, 3.0, 4.0], &idx, &mut dinput, 1, 4, 4);
        assert_eq!(dinput[5], 1.0);
        assert_eq!(dinput[7], 2.0);
        assert_eq!(dinput[13], 3.0);
        assert_eq!(dinput[10], 4.0);
        assert_eq!(dinput.iter().filter(|&&v| v != 0.0).count(), 4);
    }

    #[test]
    fn conv_forward_matches_direct_convolution() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let layer = ConvLayer::<f64>::init(2, 3, 5, &mut rng);
        let input: Vec<f64> = (0..2 * 25).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut col = vec![0.0; layer.col_len()];
        let mut out = vec![0.0; layer.out_len()];
        layer.forward(&input, &mut col, &mut out);
        // Direct 3x3 convolution with zero padding.
        for o in 0..3 {
            for y in 0..5i32 {
                for x in 0..5i32 {
                    let mut acc = layer.b[o];
                    for ci in 0..2 {
                        for ky in 0..3i32 {
                            for kx in 0..3i32 {
                                let (sy, sx) = (y + ky - 1, x + kx - 1);
                                if (0..5).contains(&sy) && (0..5).contains(&sx) {
                                    acc += layer.w[o * 18 + (ci * 9 + ky as usize * 3 + kx as usize)]
                                        * input[ci * 25 + (sy * 5 + sx) as usize];
                                }
                            }
                        }
                    }
                    let want = acc.max(0.0);
                    let got = out[o * 25 + (y * 5 + x) as usize];
                    assert!((want - got).abs() < 1e-12, "{want} vs {got}");
                }
            }
        }
    }
}

#[cfg(test)]
mod fd_isolation {
    use super::*;
    use rand::{Rng, SeedableRng};

    // Loss = sum(out). FD on each bias vs analytic backward.
    #[test]
    fn conv_bias_gradient_matches_fd_in_isolation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut layer = ConvLayer::<f64>::init(2, 3, 4, &mut rng);
        let input: Vec<f64> = (0..2 * 16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut col = vec![0.0; layer.col_len()];
        let mut out = vec![0.0; layer.out_len()];
        layer.forward(&input, &mut col, &mut out);
        let mut dout = vec![1.0f64; out.len()];
        let mut dcol = vec![0.0; layer.col_len()];
        let mut gw = vec![0.0; layer.w.len()];
        let mut gb = vec![0.0; layer.b.len()];
        let mut dx = vec![0.0; input.len()];
        layer.backward(&col, &out, &mut dout, &mut dcol, Some(&mut dx), &mut gw, &mut gb);

        let h = 1e-6;
        for o in 0..3 {
            let orig = layer.b[o];
            layer.b[o] = orig + h;
            layer.forward(&input, &mut col, &mut out);
            let plus: f64 = out.iter().sum();
            layer.b[o] = orig - h;
            layer.forward(&input, &mut col, &mut out);
            let minus: f64 = out.iter().sum();
            layer.b[o] = orig;
            let fd = (plus - minus) / (2.0 * h);
            assert!(
                (fd - gb[o]).abs() < 1e-6,
                "bias {o}: analytic {} vs fd {fd}",
                gb[o]
            );
        }
    }
}
