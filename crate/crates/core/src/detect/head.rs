use rand::Rng;

use crate::error::shape_err;
use crate::synth::uniform_kernel;
use crate::tensor::conv3x3;
use crate::{ConvKernel, Result, Tensor};

/// Location and confidence kernels of one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub loc: ConvKernel,
    pub conf: ConvKernel,
    pub anchors_per_cell: usize,
    pub num_classes: usize,
}

pub fn init_head(
    rng: &mut impl Rng,
    in_channels: usize,
    anchors_per_cell: usize,
    num_classes: usize,
) -> HeadParams {
    HeadParams {
        loc: uniform_kernel(rng, 4 * anchors_per_cell, in_channels),
        conf: uniform_kernel(rng, (num_classes + 1) * anchors_per_cell, in_channels),
        anchors_per_cell,
        num_classes,
    }
}

/// Per-anchor predictions in cell-major order (row, column, anchor).
#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutput {
    pub loc_map: Tensor,
    pub conf_map: Tensor,
    /// `(dx, dy, dw, dh)` per anchor.
    pub offsets: Vec<[f64; 4]>,
    /// Softmax over `num_classes + 1` entries per anchor; index 0 is background.
    pub scores: Vec<Vec<f64>>,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Location channels are laid out `anchor * 4 + j`, confidence channels
/// `anchor * (num_classes + 1) + class`.
pub fn head_forward(
    state: &Tensor,
    loc_kernel: &ConvKernel,
    conf_kernel: &ConvKernel,
    anchors_per_cell: usize,
    num_classes: usize,
) -> Result<HeadOutput> {
    let classes = num_classes + 1;
    if loc_kernel.out_channels() != 4 * anchors_per_cell {
        return Err(shape_err!(
            "loc kernel has {} outputs, expected {}",
            loc_kernel.out_channels(),
            4 * anchors_per_cell
        ));
    }
    if conf_kernel.out_channels() != classes * anchors_per_cell {
        return Err(shape_err!(
            "conf kernel has {} outputs, expected {}",
            conf_kernel.out_channels(),
            classes * anchors_per_cell
        ));
    }
    let loc_map = conv3x3(state, loc_kernel)?;
    let conf_map = conv3x3(state, conf_kernel)?;
    let (h, w) = (state.height(), state.width());
    let mut offsets = Vec::with_capacity(h * w * anchors_per_cell);
    let mut scores = Vec::with_capacity(h * w * anchors_per_cell);
    for y in 0..h {
        for x in 0..w {
            for a in 0..anchors_per_cell {
                offsets.push(std::array::from_fn(|j| loc_map.get(a * 4 + j, y, x)));
                let logits: Vec<f64> = (0..classes).map(|c| conf_map.get(a * classes + c, y, x)).collect();
                scores.push(softmax(&logits));
            }
        }
    }
    Ok(HeadOutput { loc_map, conf_map, offsets, scores })
}
