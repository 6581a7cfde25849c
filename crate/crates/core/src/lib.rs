//! Inference engine for weave-style multi-scale feature fusion on top of a
//! single-shot detector.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: a dense `C × H × W` tensor of `f64` and the handful of
//!   primitives the architecture needs (3×3 convolution, ReLU, bilinear ×2
//!   upsampling, 2×2 max pooling, channel concat/split).
//! - [`weave`]: per-scale growing states, adjacent-only message passing, the
//!   naive block and the simplified block that consumes precomputed raw-feature
//!   sources, plus analytic FLOP accounting.
//! - [`detect`]: anchors, prediction heads, box decoding, greedy NMS and
//!   score-weighted box refinement.
//! - [`eval`]: VOC-style 11-point AP with per-class small/medium/large
//!   stratification.
//! - [`bench`]: warmup/repetition timing of naive vs simplified forward passes.
//! - [`synth`]: seeded synthetic feature pyramids standing in for a backbone.

pub mod bench;
pub mod detect;
mod error;
pub mod eval;
pub mod synth;
pub mod tensor;
pub mod weave;

pub use error::{Error, Result};
pub use tensor::{ConvKernel, Tensor};
