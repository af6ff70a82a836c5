//! Dense kernels the CNN is built from: blocked matrix multiply, dot
//! products with explicit accumulator lanes, and im2col/col2im for 3x3
//! stride-1 convolutions with unit padding.
//!
//! Inner loops run over contiguous slices with independent lanes so they
//! autovectorize; no unsafe, no external BLAS.

use crate::num::Scalar;

/// Column-block width for L2 reuse of the B operand.
const NB: usize = 512;
/// Accumulator lanes for dot products.
const LANES: usize = 16;

/// c (m x n) = a (m x k) * b (k x n), overwriting c.
pub fn matmul_nn<F: Scalar>(a: &[F], b: &[F], c: &mut [F], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    let mut nb = 0;
    while nb < n {
        let ne = (nb + NB).min(n);
        for i in 0..m {
            let crow = &mut c[i * n + nb..i * n + ne];
            crow.fill(F::zero());
            let arow = &a[i * k..(i + 1) * k];
            for (kk, &aik) in arow.iter().enumerate() {
                let brow = &b[kk * n + nb..kk * n + ne];
                for (cv, &bv) in crow.iter_mut().zip(brow) {
                    *cv = aik.mul_add(bv, *cv);
                }
            }
        }
        nb = ne;
    }
}

/// c (k x n) = a (m x k)^T * b (m x n), overwriting c.
pub fn matmul_tn<F: Scalar>(a: &[F], b: &[F], c: &mut [F], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(c.len(), k * n);
    let mut nb = 0;
    while nb < n {
        let ne = (nb + NB).min(n);
        for kk in 0..k {
            c[kk * n + nb..kk * n + ne].fill(F::zero());
        }
        for i in 0..m {
            let brow = &b[i * n + nb..i * n + ne];
            for kk in 0..k {
                let aik = a[i * k + kk];
                let crow = &mut c[kk * n + nb..kk * n + ne];
                for (cv, &bv) in crow.iter_mut().zip(brow) {
                    *cv = aik.mul_add(bv, *cv);
                }
            }
        }
        nb = ne;
    }
}

/// c (m x r) += a (m x n) * b (r x n)^T, i.e. pairwise row dots.
/// Rows of `b` are processed in small blocks so they stay cache-resident.
pub fn matmul_nt_acc<F: Scalar>(a: &[F], b: &[F], c: &mut [F], m: usize, n: usize, r: usize) {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(b.len(), r * n);
    debug_assert_eq!(c.len(), m * r);
    const RB: usize = 16;
    let mut jb = 0;
    while jb < r {
        let je = (jb + RB).min(r);
        for i in 0..m {
            let arow = &a[i * n..(i + 1) * n];
            for j in jb..je {
                let brow = &b[j * n..(j + 1) * n];
                c[i * r + j] += dot(arow, brow);
            }
        }
        jb = je;
    }
}

/// Dot product with independent accumulator lanes.
pub fn dot<F: Scalar>(x: &[F], y: &[F]) -> F {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [F::zero(); LANES];
    let chunks = x.len() / LANES;
    for ci in 0..chunks {
        let xo = &x[ci * LANES..(ci + 1) * LANES];
        let yo = &y[ci * LANES..(ci + 1) * LANES];
        for l in 0..LANES {
            acc[l] = xo[l].mul_add(yo[l], acc[l]);
        }
    }
    let mut s = F::zero();
    for l in 0..LANES {
        s = s + acc[l];
    }
    for i in chunks * LANES..x.len() {
        s = x[i].mul_add(y[i], s);
    }
    s
}

/// y += alpha * x
pub fn axpy<F: Scalar>(y: &mut [F], alpha: F, x: &[F]) {
    debug_assert_eq!(y.len(), x.len());
    for (yv, &xv) in y.iter_mut().zip(x) {
        *yv = alpha.mul_add(xv, *yv);
    }
}

/// Unfold a CHW image for a 3x3 stride-1 pad-1 convolution.
///
/// `col` has `in_c * 9` rows of `h * w` columns: row `ci*9 + ky*3 + kx`
/// holds the input channel `ci` shifted by `(ky-1, kx-1)`, zero at borders.
pub fn im2col<F: Scalar>(input: &[F], col: &mut [F], in_c: usize, h: usize, w: usize) {
    debug_assert_eq!(input.len(), in_c * h * w);
    debug_assert_eq!(col.len(), in_c * 9 * h * w);
    let plane = h * w;
    for ci in 0..in_c {
        let src = &input[ci * plane..(ci + 1) * plane];
        for ky in 0..3usize {
            for kx in 0..3usize {
                let row = &mut col[(ci * 9 + ky * 3 + kx) * plane..(ci * 9 + ky * 3 + kx + 1) * plane];
                for y in 0..h {
                    let dst = &mut row[y * w..(y + 1) * w];
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= h as isize {
                        dst.fill(F::zero());
                        continue;
                    }
                    let srow = &src[sy as usize * w..(sy as usize + 1) * w];
                    match kx {
                        0 => {
                            dst[0] = F::zero();
                            dst[1..].copy_from_slice(&srow[..w - 1]);
                        }
                        1 => dst.copy_from_slice(srow),
                        _ => {
                            dst[..w - 1].copy_from_slice(&srow[1..]);
                            dst[w - 1] = F::zero();
                        }
                    }
                }
            }
        }
    }
}

/// Fold a column gradient back onto the input gradient (adjoint of
/// [`im2col`]). Overwrites `dx`.
pub fn col2im<F: Scalar>(dcol: &[F], dx: &mut [F], in_c: usize, h: usize, w: usize) {
    debug_assert_eq!(dx.len(), in_c * h * w);
    debug_assert_eq!(dcol.len(), in_c * 9 * h * w);
    dx.fill(F::zero());
    let plane = h * w;
    for ci in 0..in_c {
        let dst = &mut dx[ci * plane..(ci + 1) * plane];
        for ky in 0..3usize {
            for kx in 0..3usize {
                let row = &dcol[(ci * 9 + ky * 3 + kx) * plane..(ci * 9 + ky * 3 + kx + 1) * plane];
                for y in 0..h {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let srow = &row[y * w..(y + 1) * w];
                    let drow = &mut dst[sy as usize * w..(sy as usize + 1) * w];
                    match kx {
                        0 => {
                            for (d, &s) in drow[..w - 1].iter_mut().zip(&srow[1..]) {
                                *d = *d + s;
                            }
                        }
                        1 => {
                            for (d, &s) in drow.iter_mut().zip(srow) {
                                *d = *d + s;
                            }
                        }
                        _ => {
                            for (d, &s) in drow[1..].iter_mut().zip(&srow[..w - 1]) {
                                *d = *d + s;
                            }
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for kk in 0..k {
                    c[i * n + j] += a[i * k + kk] * b[kk * n + j];
                }
            }
        }
        c
    }

    #[test]
    fn matmul_nn_agrees_with_naive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for &(m, k, n) in &[(3, 4, 5), (7, 9, 1030), (17, 33, 40)] {
            let a: Vec<f64> = (0..m * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..k * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let want = naive_matmul(&a, &b, m, k, n);
            let mut c = vec![0.0; m * n];
            matmul_nn(&a, &b, &mut c, m, k, n);
            for (x, y) in c.iter().zip(&want) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matmul_tn_agrees_with_naive_transpose() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for &(m, k, n) in &[(4, 6, 9), (5, 3, 700)] {
            let a: Vec<f64> = (0..m * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut at = vec![0.0; k * m];
            for i in 0..m {
                for j in 0..k {
                    at[j * m + i] = a[i * k + j];
                }
            }
            let want = naive_matmul(&at, &b, k, m, n);
            let mut c = vec![0.0; k * n];
            matmul_tn(&a, &b, &mut c, m, k, n);
            for (x, y) in c.iter().zip(&want) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matmul_nt_accumulates_row_dots() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (m, n, r) = (5usize, 230usize, 19usize);
        let a: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..r * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut c = vec![1.0; m * r]; // accumulate on top of ones
        matmul_nt_acc(&a, &b, &mut c, m, n, r);
        for i in 0..m {
            for j in 0..r {
                let want: f64 = 1.0 + (0..n).map(|t| a[i * n + t] * b[j * n + t]).sum::<f64>();
                assert!((c[i * r + j] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn im2col_col2im_are_adjoint() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let (c, h, w) = (2usize, 5usize, 4usize);
        let x: Vec<f64> = (0..c * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..c * 9 * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut col = vec![0.0; c * 9 * h * w];
        im2col(&x, &mut col, c, h, w);
        let mut back = vec![0.0; c * h * w];
        col2im(&y, &mut back, c, h, w);
        // <im2col(x), y> == <x, col2im(y)> characterizes the adjoint pair.
        let lhs: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn im2col_center_row_is_the_image() {
        let (c, h, w) = (1usize, 3usize, 3usize);
        let x: Vec<f32> = (0..9).map(|i| i as f32).collect();
        let mut col = vec![0.0f32; 9 * 9];
        im2col(&x, &mut col, c, h, w);
        // Row ky=1,kx=1 is the unshifted image.
        assert_eq!(&col[4 * 9..5 * 9], x.as_slice());
        // Row ky=0,kx=1 shifts rows down: first output row is zero padding.
        assert_eq!(&col[9..12], &[0.0, 0.0, 0.0]);
        assert_eq!(&col[12..18], &x[..6]);
    }
}
