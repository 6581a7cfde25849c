//! Iterative weaving of adjacent pyramid scales.
//!
//! Each woven scale keeps a growing state: its raw feature map plus every
//! message received so far, concatenated in a fixed canonical order
//!
//! ```text
//! [up_t; ...; up_1; raw; down_1; ...; down_t]
//! ```
//!
//! where `up_*` arrive from the next finer scale (max-pooled) and `down_*`
//! from the next coarser scale (bilinearly upsampled). At iteration `t`
//! every woven block reads the state from `t - 1` and emits a `k`-channel
//! message per enabled direction; messages are exchanged synchronously
//! after all blocks have run.
//!
//! Two block implementations share one kernel set:
//!
//! - [`BlockMode::Naive`] convolves the full state with `W^t`.
//! - [`BlockMode::Simplified`] convolves only the message channels with the
//!   `W_a^t` part of `W^t` and adds `raw * W_b^t`, taken from a single grouped
//!   convolution of the raw features computed once per forward pass.

mod block;
mod config;
mod flops;
mod forward;
mod params;
mod state;

pub use block::{block_naive, block_simplified, precompute_sources, BlockOutput, PrecomputedSources};
pub use config::{ScaleLinks, WeaveConfig};
pub use flops::{baseline_conv_flops, conv3x3_flops, flops_weave, message_conv_flops, FlopCount};
pub use forward::{weave_forward, weave_forward_with, ForwardOptions, WeaveEvent};
pub use params::{init_params, BlockParams, IterationKernel, WeaveParams};
pub use state::ScaleState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockMode {
    Naive,
    Simplified,
}

impl BlockMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockMode::Naive => "naive",
            BlockMode::Simplified => "simplified",
        }
    }
}

impl std::fmt::Display for BlockMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BlockMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(BlockMode::Naive),
            "simplified" => Ok(BlockMode::Simplified),
            other => Err(crate::Error::Config(format!("unknown block mode {other:?}"))),
        }
    }
}
