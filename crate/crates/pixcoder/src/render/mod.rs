//! Deterministic synthetic GUI rendering and image standardization.
//!
//! The renderer is the data source for training: it draws a grammar-valid
//! tree into fixed canvas blocks (row slots stacked over a footer strip), so
//! each vector bit stays tied to one image region. Rendering is a pure
//! function of (tree, theme, seed).

mod dataset;
mod draw;
mod theme;

pub use dataset::{
    gen_dataset, gen_dataset_standardized, generate_to_dir, read_manifest, sample_trees,
    write_dataset, ManifestEntry, Sample, DEFAULT_RENDER_SIZE,
};
pub use draw::render;
pub use theme::RenderTheme;

use thiserror::Error;

use crate::codec::CodecError;
use crate::dsl::DslError;

/// Side length of the standardized image fed to the vision model.
pub const DEFAULT_STANDARD_SIZE: usize = 256;

#[derive(Debug, Error)]
pub enum RenderError {
    /// A row's rendered controls exceed the row width. Cannot happen for
    /// trees from pruned layouts; the pruning rules exist to rule it out.
    #[error("row {row}: rendered controls exceed the row width")]
    LayoutOverflow { row: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// An RGB raster with values in [0, 1], interleaved row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RasterImage {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height * Self::CHANNELS],
        }
    }

    pub fn filled(width: usize, height: usize, color: [f32; 3]) -> Self {
        let mut img = Self::new(width, height);
        for px in img.data.chunks_exact_mut(Self::CHANNELS) {
            px.copy_from_slice(&color);
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * Self::CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, color: [f32; 3]) {
        let i = (y * self.width + x) * Self::CHANNELS;
        self.data[i..i + 3].copy_from_slice(&color);
    }

    /// Quantize to 8-bit RGB and write a PNG.
    pub fn save_png(&self, path: &std::path::Path) -> Result<(), RenderError> {
        let mut out = image::RgbImage::new(self.width as u32, self.height as u32);
        for (y, row) in self.data.chunks_exact(self.width * Self::CHANNELS).enumerate() {
            for (x, px) in row.chunks_exact(Self::CHANNELS).enumerate() {
                let q = |v: f32| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
                out.put_pixel(x as u32, y as u32, image::Rgb([q(px[0]), q(px[1]), q(px[2])]));
            }
        }
        out.save(path)?;
        Ok(())
    }

    /// Load any supported image file as normalized RGB.
    pub fn load(path: &std::path::Path) -> Result<Self, RenderError> {
        let img = image::open(path)?.to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut out = Self::new(w, h);
        for (x, y, px) in img.enumerate_pixels() {
            out.set_pixel(
                x as usize,
                y as usize,
                [
                    px.0[0] as f32 / 255.0,
                    px.0[1] as f32 / 255.0,
                    px.0[2] as f32 / 255.0,
                ],
            );
        }
        Ok(out)
    }
}

/// Resize to the default standard size and clamp values into [0, 1].
pub fn standardize_image(img: &RasterImage) -> RasterImage {
    standardize_image_to(img, DEFAULT_STANDARD_SIZE)
}

/// Resize to `size` x `size` with bilinear resampling; output values stay in
/// [0, 1]. Same-size input passes through unchanged.
pub fn standardize_image_to(img: &RasterImage, size: usize) -> RasterImage {
    let mut out = RasterImage::new(size, size);
    let sx = img.width as f32 / size as f32;
    let sy = img.height as f32 / size as f32;
    for y in 0..size {
        // Pixel-center mapping keeps equal-size resampling exact.
        let fy = ((y as f32 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f32);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let wy = fy - y0 as f32;
        for x in 0..size {
            let fx = ((x as f32 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f32);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let wx = fx - x0 as f32;
            let mut px = [0.0f32; 3];
            let (p00, p10, p01, p11) = (
                img.pixel(x0, y0),
                img.pixel(x1, y0),
                img.pixel(x0, y1),
                img.pixel(x1, y1),
            );
            for c in 0..3 {
                let top = p00[c] * (1.0 - wx) + p10[c] * wx;
                let bot = p01[c] * (1.0 - wx) + p11[c] * wx;
                px[c] = (top * (1.0 - wy) + bot * wy).clamp(0.0, 1.0);
            }
            out.set_pixel(x, y, px);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_standardization_is_identity() {
        let mut img = RasterImage::filled(256, 256, [0.25, 0.5, 0.75]);
        img.set_pixel(13, 200, [0.9, 0.1, 0.3]);
        assert_eq!(standardize_image(&img), img);
    }

    #[test]
    fn constant_image_stays_constant_after_downscale() {
        let img = RasterImage::filled(512, 512, [0.2, 0.4, 0.6]);
        let std = standardize_image(&img);
        assert_eq!(std.width(), 256);
        for y in 0..256 {
            for x in 0..256 {
                let px = std.pixel(x, y);
                assert!((px[0] - 0.2).abs() < 1e-6 && (px[2] - 0.6).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn standardized_values_stay_in_unit_range() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let w = rng.gen_range(3..90);
            let h = rng.gen_range(3..90);
            let mut img = RasterImage::new(w, h);
            for v in img.data.iter_mut() {
                // Out-of-range inputs must still standardize into [0, 1].
                *v = rng.gen_range(-0.2..1.3);
            }
            let std = standardize_image_to(&img, 64);
            assert!(std.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
