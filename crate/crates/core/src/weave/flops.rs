//! Analytic convolution cost. Only 3×3 convolutions are charged
//! (`2 · Cin · Cout · 9 · H · W`); bias, ReLU, resampling and elementwise
//! sums are not counted.

use super::config::WeaveConfig;
use super::params::{BlockParams, WeaveParams};
use super::BlockMode;
use crate::Result;

pub fn conv3x3_flops(in_channels: usize, out_channels: usize, height: usize, width: usize) -> u64 {
    2 * in_channels as u64 * out_channels as u64 * 9 * height as u64 * width as u64
}

/// A plain 256 → 256 3×3 layer at the given spatial size.
pub fn baseline_conv_flops(height: usize, width: usize) -> u64 {
    conv3x3_flops(256, 256, height, width)
}

/// Cost of the `W_a^t` convolution of a simplified block.
pub fn message_conv_flops(block: &BlockParams, t: usize, height: usize, width: usize) -> Result<u64> {
    Ok(match block.kernel(t)? {
        Some(ik) => conv3x3_flops(ik.message_channels(), ik.kernel.out_channels(), height, width),
        None => 0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlopCount {
    pub mode: BlockMode,
    /// Grouped raw-feature convolution, charged once (simplified mode only).
    pub precompute: u64,
    /// Block convolutions per iteration, index `t - 1`.
    pub per_iteration: Vec<u64>,
    pub total: u64,
}

pub fn flops_weave(config: &WeaveConfig, params: &WeaveParams, mode: BlockMode) -> Result<FlopCount> {
    config.validate()?;
    params.check(config)?;
    let mut per_iteration = vec![0u64; config.iterations];
    let mut precompute = 0u64;
    for block in &params.blocks {
        let (h, w) = config.scale_sizes[block.scale()];
        for (i, ik) in block.iterations.iter().enumerate() {
            let out = ik.kernel.out_channels();
            match mode {
                BlockMode::Naive => {
                    per_iteration[i] += conv3x3_flops(ik.kernel.in_channels(), out, h, w);
                }
                BlockMode::Simplified => {
                    per_iteration[i] += conv3x3_flops(ik.message_channels(), out, h, w);
                    precompute += conv3x3_flops(ik.raw_columns.len(), out, h, w);
                }
            }
        }
    }
    let total = precompute + per_iteration.iter().sum::<u64>();
    Ok(FlopCount { mode, precompute, per_iteration, total })
}
