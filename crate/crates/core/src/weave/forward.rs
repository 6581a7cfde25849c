use super::block::{block_naive, block_simplified, precompute_sources, BlockOutput, PrecomputedSources};
use super::config::WeaveConfig;
use super::params::WeaveParams;
use super::state::ScaleState;
use super::BlockMode;
use crate::tensor::{maxpool_2x2_s2, upsample_bilinear_x2};
use crate::{Error, Result, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForwardOptions {
    pub mode: BlockMode,
    /// Run the blocks of one iteration on scoped threads, one per scale.
    pub parallel: bool,
}

impl From<BlockMode> for ForwardOptions {
    fn from(mode: BlockMode) -> Self {
        Self { mode, parallel: false }
    }
}

/// Progress notifications from [`weave_forward_with`].
#[derive(Debug)]
pub enum WeaveEvent<'a> {
    /// A block finished iteration `iteration`.
    Block { iteration: usize, scale: usize, output: &'a BlockOutput },
    /// All states after the exchange at the end of `iteration`.
    Exchanged { iteration: usize, states: &'a [ScaleState] },
}

/// Runs `config.iterations` rounds of weaving and returns the final state of
/// every scale. Unwoven scales are returned unchanged.
pub fn weave_forward(
    raw: &[Tensor],
    config: &WeaveConfig,
    params: &WeaveParams,
    mode: BlockMode,
) -> Result<Vec<Tensor>> {
    weave_forward_with(raw, config, params, mode.into(), &mut |_| {})
}

fn check_pyramid(raw: &[Tensor], config: &WeaveConfig) -> Result<()> {
    if raw.len() != config.num_scales() {
        return Err(Error::Geometry(format!(
            "pyramid has {} scales, config expects {}",
            raw.len(),
            config.num_scales()
        )));
    }
    for (i, t) in raw.iter().enumerate() {
        let (h, w) = config.scale_sizes[i];
        let c = config.raw_channels[i];
        if t.shape() != (c, h, w) {
            return Err(Error::Geometry(format!(
                "scale {i} is {:?}, config expects ({c}, {h}, {w})",
                t.shape()
            )));
        }
    }
    Ok(())
}

pub fn weave_forward_with(
    raw: &[Tensor],
    config: &WeaveConfig,
    params: &WeaveParams,
    options: ForwardOptions,
    observer: &mut dyn FnMut(WeaveEvent<'_>),
) -> Result<Vec<Tensor>> {
    config.validate()?;
    params.check(config)?;
    check_pyramid(raw, config)?;

    let links = config.links();
    let mut states: Vec<ScaleState> =
        links.iter().map(|l| ScaleState::new(l.scale, raw[l.scale].clone())).collect();
    let sources = match options.mode {
        BlockMode::Simplified => Some(precompute_sources(raw, config, params)?),
        BlockMode::Naive => None,
    };

    for t in 1..=config.iterations {
        let outputs = run_blocks(&states, params, sources.as_ref(), t, options.parallel)?;
        for (state, output) in states.iter().zip(&outputs) {
            observer(WeaveEvent::Block { iteration: t, scale: state.scale(), output });
        }
        for (p, l) in links.iter().enumerate() {
            let missing = |dir| Error::Config(format!("scale {} expected a {dir} message", l.scale));
            let below = if l.receives_from_below {
                let m = outputs[p - 1].up.as_ref().ok_or_else(|| missing("bottom-up"))?;
                Some(maxpool_2x2_s2(m)?)
            } else {
                None
            };
            let above = if l.receives_from_above {
                let m = outputs[p + 1].down.as_ref().ok_or_else(|| missing("top-down"))?;
                Some(upsample_bilinear_x2(m))
            } else {
                None
            };
            states[p].receive(below, above)?;
        }
        observer(WeaveEvent::Exchanged { iteration: t, states: &states });
    }

    let mut out: Vec<Tensor> = raw.to_vec();
    for s in &states {
        out[s.scale()] = s.tensor();
    }
    Ok(out)
}

fn run_blocks(
    states: &[ScaleState],
    params: &WeaveParams,
    sources: Option<&PrecomputedSources>,
    t: usize,
    parallel: bool,
) -> Result<Vec<BlockOutput>> {
    let compute = |p: usize| -> Result<BlockOutput> {
        let block = &params.blocks[p];
        match sources {
            None => block_naive(&states[p], block, t),
            Some(src) => {
                if block.iterations.is_empty() {
                    return Ok(BlockOutput::default());
                }
                let msgs = states[p].messages_only();
                block_simplified(msgs.as_ref(), &src.slice(p, t)?, block, t)
            }
        }
    };
    if !parallel {
        return (0..states.len()).map(compute).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..states.len()).map(|p| scope.spawn(move || compute(p))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("block thread panicked"))
            .collect()
    })
}
