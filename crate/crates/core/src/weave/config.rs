use crate::{Error, Result};

/// Architecture hyperparameters for the weave stage.
#[derive(Debug, Clone, PartialEq)]
pub struct WeaveConfig {
    /// Channels per message and direction.
    pub k: usize,
    pub iterations: usize,
    /// Contiguous, ascending pyramid indices that take part in weaving.
    pub woven_scales: Vec<usize>,
    /// `(height, width)` of every pyramid scale, finest first.
    pub scale_sizes: Vec<(usize, usize)>,
    pub raw_channels: Vec<usize>,
    /// Coarse-to-fine messages (upsampled).
    pub enable_top_down: bool,
    /// Fine-to-coarse messages (max-pooled).
    pub enable_bottom_up: bool,
    pub seed: u64,
}

impl Default for WeaveConfig {
    fn default() -> Self {
        Self {
            k: 16,
            iterations: 1,
            woven_scales: vec![0, 1, 2, 3],
            scale_sizes: [40, 20, 10, 5, 3, 1].iter().map(|&s| (s, s)).collect(),
            raw_channels: vec![32; 6],
            enable_top_down: true,
            enable_bottom_up: true,
            seed: 0,
        }
    }
}

/// Which neighbors a woven scale talks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleLinks {
    pub scale: usize,
    /// Position within `woven_scales`.
    pub position: usize,
    /// Emits a top-down message to the next finer woven scale.
    pub emits_down: bool,
    /// Emits a bottom-up message to the next coarser woven scale.
    pub emits_up: bool,
    /// Receives bottom-up messages from the next finer woven scale.
    pub receives_from_below: bool,
    /// Receives top-down messages from the next coarser woven scale.
    pub receives_from_above: bool,
}

impl ScaleLinks {
    pub fn emitted_directions(&self) -> usize {
        self.emits_down as usize + self.emits_up as usize
    }

    pub fn received_directions(&self) -> usize {
        self.receives_from_below as usize + self.receives_from_above as usize
    }
}

impl WeaveConfig {
    pub fn num_scales(&self) -> usize {
        self.scale_sizes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.scale_sizes.is_empty() {
            return Err(Error::Config("pyramid has no scales".into()));
        }
        if self.raw_channels.len() != self.scale_sizes.len() {
            return Err(Error::Config(format!(
                "{} raw channel counts for {} scales",
                self.raw_channels.len(),
                self.scale_sizes.len()
            )));
        }
        if self.raw_channels.contains(&0) {
            return Err(Error::Config("raw channel counts must be positive".into()));
        }
        if let Some(&(h, w)) = self.scale_sizes.iter().find(|&&(h, w)| h == 0 || w == 0) {
            return Err(Error::Geometry(format!("scale size {h}x{w} is empty")));
        }
        let Some(&first) = self.woven_scales.first() else {
            return Ok(());
        };
        for (offset, &s) in self.woven_scales.iter().enumerate() {
            if s != first + offset {
                return Err(Error::Config(format!(
                    "woven scales must be contiguous and ascending, got {:?}",
                    self.woven_scales
                )));
            }
            if s >= self.num_scales() {
                return Err(Error::Config(format!(
                    "woven scale {s} outside a {}-scale pyramid",
                    self.num_scales()
                )));
            }
        }
        for pair in self.woven_scales.windows(2) {
            let (fine, coarse) = (self.scale_sizes[pair[0]], self.scale_sizes[pair[1]]);
            if fine.0 != 2 * coarse.0 || fine.1 != 2 * coarse.1 {
                return Err(Error::Geometry(format!(
                    "woven scales {} ({}x{}) and {} ({}x{}) must differ by exactly 2x",
                    pair[0], fine.0, fine.1, pair[1], coarse.0, coarse.1
                )));
            }
        }
        Ok(())
    }

    /// Link structure of every woven scale, in woven order.
    pub fn links(&self) -> Vec<ScaleLinks> {
        let n = self.woven_scales.len();
        self.woven_scales
            .iter()
            .enumerate()
            .map(|(p, &scale)| {
                let has_finer = p > 0;
                let has_coarser = p + 1 < n;
                ScaleLinks {
                    scale,
                    position: p,
                    emits_down: self.enable_top_down && has_finer,
                    emits_up: self.enable_bottom_up && has_coarser,
                    receives_from_below: self.enable_bottom_up && has_finer,
                    receives_from_above: self.enable_top_down && has_coarser,
                }
            })
            .collect()
    }

    pub fn is_woven(&self, scale: usize) -> bool {
        self.woven_scales.contains(&scale)
    }

    /// Channel count of scale `scale`'s state after `t` iterations.
    pub fn state_channels(&self, scale: usize, t: usize) -> usize {
        let raw = self.raw_channels[scale];
        match self.links().iter().find(|l| l.scale == scale) {
            Some(l) => raw + self.k * l.received_directions() * t,
            None => raw,
        }
    }
}
