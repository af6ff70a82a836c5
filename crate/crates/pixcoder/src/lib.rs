//! PixCoder: a self-contained screenshot-to-code pipeline.
//!
//! A GUI screenshot is standardized, passed through a convolutional vision
//! model that scores a fixed-width style vector, the score vector is
//! standardized into a valid one-hot-per-region bit vector, the bit vector is
//! decoded into a layout DSL tree, and the tree is compiled to front-end code.
//! Every bit of the vector is tied to one styling choice in one fixed block of
//! the image, which decomposes the recognition task into small per-region
//! classifications.
//!
//! Module map:
//! - [`dsl`]: the layout DSL (ordered labeled trees), grammar, parser, printer
//! - [`codec`]: bit-vector layouts and the tree <-> vector bijection
//! - [`render`]: deterministic synthetic GUI renderer and dataset generator
//! - [`nn`]: the from-scratch CNN, training loop, threshold calibration
//! - [`standardize`]: score-vector thresholding and ambiguity repair
//! - [`codegen`]: template-based compilation of DSL trees to HTML/XML targets
//! - [`stm`]: Simple Tree Matching similarity between DSL trees
//! - [`pipeline`]: end-to-end inference, evaluation, baselines and reports
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the shipped
//! pipeline runs in `f32` while tests check gradients against `f64` finite
//! differences. Concrete aliases live at the crate root.

pub mod codec;
pub mod codegen;
pub mod dsl;
pub mod nn;
pub mod num;
pub mod pipeline;
pub mod render;
pub mod standardize;
pub mod stm;

pub use dsl::{DslTree, Grammar, Platform};
pub use num::Scalar;

/// Vision model in the precision the pipeline ships with.
pub type VisionModelF32 = nn::VisionModel<f32>;
/// Vision model in double precision, used for gradient verification.
pub type VisionModelF64 = nn::VisionModel<f64>;
/// Score vector produced by the shipped pipeline.
pub type ScoreVectorF32 = nn::ScoreVector<f32>;
