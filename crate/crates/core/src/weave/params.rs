use std::ops::Range;

use super::config::{ScaleLinks, WeaveConfig};
use crate::error::shape_err;
use crate::synth::{rng, uniform_kernel};
use crate::{ConvKernel, Error, Result};

/// `W^t = [W_down; W_up]` for one iteration, together with the input-channel
/// range that multiplies the raw feature map (`W_b^t`). All remaining
/// columns form `W_a^t`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationKernel {
    pub kernel: ConvKernel,
    pub raw_columns: Range<usize>,
}

impl IterationKernel {
    fn message_ranges(&self) -> [Range<usize>; 2] {
        [0..self.raw_columns.start, self.raw_columns.end..self.kernel.in_channels()]
    }

    pub fn message_channels(&self) -> usize {
        self.kernel.in_channels() - self.raw_columns.len()
    }

    /// `W_a^t` with the full bias, or `None` when the state holds no messages.
    pub fn message_kernel(&self) -> Result<Option<ConvKernel>> {
        if self.message_channels() == 0 {
            return Ok(None);
        }
        self.kernel.select_inputs(&self.message_ranges()).map(Some)
    }

    /// `W_b^t` without bias.
    pub fn raw_kernel(&self) -> Result<ConvKernel> {
        Ok(self.kernel.select_inputs(std::slice::from_ref(&self.raw_columns))?.without_bias())
    }
}

/// Per-scale parameters across all iterations. Blocks that emit no
/// direction carry no kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub links: ScaleLinks,
    pub k: usize,
    pub raw_channels: usize,
    pub iterations: Vec<IterationKernel>,
}

impl BlockParams {
    pub fn scale(&self) -> usize {
        self.links.scale
    }

    pub fn out_channels(&self) -> usize {
        self.k * self.links.emitted_directions()
    }

    /// Kernel for iteration `t` (1-based).
    pub fn kernel(&self, t: usize) -> Result<Option<&IterationKernel>> {
        if self.out_channels() == 0 {
            return Ok(None);
        }
        if t == 0 || t > self.iterations.len() {
            return Err(Error::Config(format!(
                "scale {} has kernels for iterations 1..={}, asked for {t}",
                self.scale(),
                self.iterations.len()
            )));
        }
        Ok(Some(&self.iterations[t - 1]))
    }

    fn check(&self, cfg: &WeaveConfig) -> Result<()> {
        let out = self.out_channels();
        let expected_iters = if out == 0 { 0 } else { cfg.iterations };
        if self.iterations.len() != expected_iters {
            return Err(shape_err!(
                "scale {} has {} iteration kernels, expected {expected_iters}",
                self.scale(),
                self.iterations.len()
            ));
        }
        for (i, ik) in self.iterations.iter().enumerate() {
            let t = i + 1;
            let want_in = cfg.state_channels(self.scale(), t - 1);
            let (ko, ki) = (ik.kernel.out_channels(), ik.kernel.in_channels());
            if ko != out || ki != want_in {
                return Err(shape_err!(
                    "scale {} iteration {t}: kernel is {ko}x{ki}, expected {out}x{want_in}",
                    self.scale()
                ));
            }
            if ik.raw_columns.len() != self.raw_channels || ik.raw_columns.end > ki {
                return Err(shape_err!(
                    "scale {} iteration {t}: raw column range {:?} does not fit {} raw channels in {ki}",
                    self.scale(),
                    ik.raw_columns,
                    self.raw_channels
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeaveParams {
    /// One entry per woven scale, in woven order.
    pub blocks: Vec<BlockParams>,
}

impl WeaveParams {
    pub fn block(&self, scale: usize) -> Option<&BlockParams> {
        self.blocks.iter().find(|b| b.scale() == scale)
    }

    pub fn block_mut(&mut self, scale: usize) -> Option<&mut BlockParams> {
        self.blocks.iter_mut().find(|b| b.scale() == scale)
    }

    /// Checks that every block's kernel shapes agree with `cfg`.
    pub fn check(&self, cfg: &WeaveConfig) -> Result<()> {
        let links = cfg.links();
        if self.blocks.len() != links.len() {
            return Err(shape_err!(
                "{} parameter blocks for {} woven scales",
                self.blocks.len(),
                links.len()
            ));
        }
        for (b, l) in self.blocks.iter().zip(&links) {
            if b.links != *l || b.k != cfg.k || b.raw_channels != cfg.raw_channels[l.scale] {
                return Err(shape_err!("parameter block for scale {} does not match config", l.scale));
            }
            b.check(cfg)?;
        }
        Ok(())
    }
}

/// Samples every block kernel from `config.seed`.
///
/// Draw order is scale-major, then iteration, then weights before biases, so
/// a given seed always yields the same parameters.
pub fn init_params(config: &WeaveConfig) -> Result<WeaveParams> {
    config.validate()?;
    let mut rng = rng(config.seed);
    let blocks = config
        .links()
        .into_iter()
        .map(|links| {
            let raw = config.raw_channels[links.scale];
            let out = config.k * links.emitted_directions();
            let iterations = if out == 0 {
                Vec::new()
            } else {
                (1..=config.iterations)
                    .map(|t| {
                        let prior = t - 1;
                        let in_channels = config.state_channels(links.scale, prior);
                        let raw_start = config.k * links.receives_from_below as usize * prior;
                        IterationKernel {
                            kernel: uniform_kernel(&mut rng, out, in_channels),
                            raw_columns: raw_start..raw_start + raw,
                        }
                    })
                    .collect()
            };
            BlockParams { links, k: config.k, raw_channels: raw, iterations }
        })
        .collect();
    Ok(WeaveParams { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_shaped() {
        let cfg = WeaveConfig { iterations: 3, ..WeaveConfig::default() };
        let p = init_params(&cfg).unwrap();
        assert_eq!(p, init_params(&cfg).unwrap());
        assert_ne!(p, init_params(&WeaveConfig { seed: 1, ..cfg.clone() }).unwrap());
        p.check(&cfg).unwrap();

        let interior = p.block(1).unwrap().kernel(2).unwrap().unwrap();
        assert_eq!(interior.kernel.in_channels(), 32 + 2 * 16);
        assert_eq!(interior.kernel.out_channels(), 32);
        assert_eq!(interior.raw_columns, 16..48);

        let lowest = p.block(0).unwrap().kernel(1).unwrap().unwrap();
        assert_eq!(lowest.kernel.out_channels(), 16);
        assert_eq!(lowest.raw_columns, 0..32);
        // Scale 0 only hears from above, so raw stays at the front.
        assert_eq!(p.block(0).unwrap().kernel(3).unwrap().unwrap().raw_columns, 0..32);
        assert_eq!(p.block(3).unwrap().kernel(3).unwrap().unwrap().raw_columns, 32..64);
    }

    #[test]
    fn partition_tiles_kernel() {
        let cfg = WeaveConfig { iterations: 4, k: 8, ..WeaveConfig::default() };
        let p = init_params(&cfg).unwrap();
        for b in &p.blocks {
            for ik in &b.iterations {
                let wa = ik.message_kernel().unwrap();
                let wb = ik.raw_kernel().unwrap();
                let wa_in = wa.as_ref().map_or(0, |k| k.in_channels());
                assert_eq!(wa_in + wb.in_channels(), ik.kernel.in_channels());
                assert!(wb.bias().iter().all(|&b| b == 0.0));
            }
        }
        let first = p.blocks[1].kernel(1).unwrap().unwrap();
        assert!(first.message_kernel().unwrap().is_none());
    }

    #[test]
    fn silent_blocks_have_no_kernels() {
        let cfg = WeaveConfig { enable_top_down: false, ..WeaveConfig::default() };
        let p = init_params(&cfg).unwrap();
        assert!(p.block(3).unwrap().iterations.is_empty());
        assert_eq!(p.block(3).unwrap().kernel(1).unwrap(), None);
        p.check(&cfg).unwrap();
    }

    #[test]
    fn check_catches_mismatch() {
        let cfg = WeaveConfig::default();
        let p = init_params(&cfg).unwrap();
        assert!(p.check(&WeaveConfig { k: 32, ..cfg.clone() }).is_err());
        assert!(p.check(&WeaveConfig { iterations: 2, ..cfg }).is_err());
    }
}
