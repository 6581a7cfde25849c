use super::params::{BlockParams, WeaveParams};
use super::state::ScaleState;
use super::config::WeaveConfig;
use crate::error::shape_err;
use crate::tensor::{conv3x3, relu_in_place, slice_channels, split_channels};
use crate::{ConvKernel, Error, Result, Tensor};

/// Messages a block emits in one iteration. A direction is `None` when it is
/// masked off or has no receiver.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockOutput {
    /// Top-down message, sent to the finer neighbor.
    pub down: Option<Tensor>,
    /// Bottom-up message, sent to the coarser neighbor.
    pub up: Option<Tensor>,
}

impl BlockOutput {
    fn from_activation(params: &BlockParams, mut pre: Tensor) -> Result<Self> {
        relu_in_place(&mut pre);
        let (down, up) = (params.links.emits_down, params.links.emits_up);
        Ok(match (down, up) {
            (true, true) => {
                let mut parts = split_channels(&pre, &[params.k, params.k])?.into_iter();
                BlockOutput { down: parts.next(), up: parts.next() }
            }
            (true, false) => BlockOutput { down: Some(pre), up: None },
            (false, true) => BlockOutput { down: None, up: Some(pre) },
            (false, false) => BlockOutput::default(),
        })
    }

    pub fn messages(&self) -> impl Iterator<Item = &Tensor> {
        self.down.iter().chain(&self.up)
    }
}

/// Full-state block: `relu(state * W^t + b^t)`, split into directions.
pub fn block_naive(state: &ScaleState, params: &BlockParams, t: usize) -> Result<BlockOutput> {
    let Some(ik) = params.kernel(t)? else {
        return Ok(BlockOutput::default());
    };
    if state.channels() != ik.kernel.in_channels() {
        return Err(shape_err!(
            "scale {} iteration {t}: state has {} channels, kernel expects {}",
            params.scale(),
            state.channels(),
            ik.kernel.in_channels()
        ));
    }
    let pre = conv3x3(&state.tensor(), &ik.kernel)?;
    BlockOutput::from_activation(params, pre)
}

/// Message-only block: `relu(messages * W_a^t + b^t + source_slice)`.
///
/// `source_slice` must be `raw * W_b^t`, i.e. slice `t` of
/// [`PrecomputedSources`].
pub fn block_simplified(
    messages_only: Option<&Tensor>,
    source_slice: &Tensor,
    params: &BlockParams,
    t: usize,
) -> Result<BlockOutput> {
    let Some(ik) = params.kernel(t)? else {
        return Ok(BlockOutput::default());
    };
    let out = params.out_channels();
    if source_slice.channels() != out {
        return Err(shape_err!(
            "scale {} iteration {t}: source slice has {} channels, block emits {out}",
            params.scale(),
            source_slice.channels()
        ));
    }
    let mut pre = match (messages_only, ik.message_kernel()?) {
        (Some(m), Some(wa)) => {
            if m.channels() != wa.in_channels() {
                return Err(shape_err!(
                    "scale {} iteration {t}: {} message channels, W_a expects {}",
                    params.scale(),
                    m.channels(),
                    wa.in_channels()
                ));
            }
            if (m.height(), m.width()) != (source_slice.height(), source_slice.width()) {
                return Err(shape_err!("messages and source slice differ spatially"));
            }
            conv3x3(m, &wa)?
        }
        (None, None) => {
            let (h, w) = (source_slice.height(), source_slice.width());
            Tensor::from_fn(out, h, w, |c, _, _| ik.kernel.bias()[c])
        }
        (Some(m), None) => {
            return Err(shape_err!(
                "scale {} iteration {t}: got {} message channels, W_a has none",
                params.scale(),
                m.channels()
            ))
        }
        (None, Some(wa)) => {
            return Err(shape_err!(
                "scale {} iteration {t}: no messages, W_a expects {}",
                params.scale(),
                wa.in_channels()
            ))
        }
    };
    pre = pre.add(source_slice)?;
    BlockOutput::from_activation(params, pre)
}

/// `raw_i * [W_b^1; ...; W_b^T]` for every woven scale, each computed with a
/// single grouped convolution. Bias is not included.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecomputedSources {
    /// Per woven position; `None` for blocks that emit nothing.
    sources: Vec<Option<Tensor>>,
    block_out: Vec<usize>,
}

impl PrecomputedSources {
    pub fn source(&self, position: usize) -> Option<&Tensor> {
        self.sources.get(position).and_then(Option::as_ref)
    }

    /// Slice `t` (1-based) for woven position `position`.
    pub fn slice(&self, position: usize, t: usize) -> Result<Tensor> {
        let src = self
            .source(position)
            .ok_or_else(|| Error::Config(format!("no precomputed source for woven position {position}")))?;
        let out = self.block_out[position];
        if t == 0 || t * out > src.channels() {
            return Err(shape_err!("source slice {t} outside {} iterations", src.channels() / out));
        }
        slice_channels(src, (t - 1) * out..t * out)
    }
}

pub fn precompute_sources(
    raw: &[Tensor],
    config: &WeaveConfig,
    params: &WeaveParams,
) -> Result<PrecomputedSources> {
    let mut sources = Vec::with_capacity(params.blocks.len());
    let mut block_out = Vec::with_capacity(params.blocks.len());
    for block in &params.blocks {
        let feature = raw
            .get(block.scale())
            .ok_or_else(|| Error::Geometry(format!("pyramid has no scale {}", block.scale())))?;
        if feature.channels() != block.raw_channels {
            return Err(shape_err!(
                "scale {} raw feature has {} channels, W_b expects {}",
                block.scale(),
                feature.channels(),
                block.raw_channels
            ));
        }
        block_out.push(block.out_channels());
        if block.iterations.is_empty() || config.iterations == 0 {
            sources.push(None);
            continue;
        }
        let raw_kernels = block
            .iterations
            .iter()
            .map(|ik| ik.raw_kernel())
            .collect::<Result<Vec<_>>>()?;
        let stacked = ConvKernel::stack(&raw_kernels.iter().collect::<Vec<_>>())?;
        sources.push(Some(conv3x3(feature, &stacked)?));
    }
    Ok(PrecomputedSources { sources, block_out })
}
