use std::path::Path;

use serde::{Deserialize, Serialize};
use weavenet::detect::{AnchorMode, AnchorSpec, PostprocessConfig};
use weavenet::weave::{BlockMode, WeaveConfig};

use crate::error::{invalid, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorChoice {
    A,
    B,
}

impl From<AnchorChoice> for AnchorMode {
    fn from(c: AnchorChoice) -> Self {
        match c {
            AnchorChoice::A => AnchorMode::A,
            AnchorChoice::B => AnchorMode::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Naive,
    Simplified,
}

impl From<ModeChoice> for BlockMode {
    fn from(c: ModeChoice) -> Self {
        match c {
            ModeChoice::Naive => BlockMode::Naive,
            ModeChoice::Simplified => BlockMode::Simplified,
        }
    }
}

/// `(k, iterations)` grid swept by `verify` and `bench`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub k: Vec<usize>,
    pub iterations: Vec<usize>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self { k: vec![16, 32, 64], iterations: vec![1, 3, 5] }
    }
}

/// Deliberately misplaces the raw-column range of one block kernel so the
/// simplified path splits `W^t` at the wrong place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFault {
    pub scale: usize,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub input_size: f64,
    /// Square spatial size of each pyramid scale, finest first.
    pub pyramid_sizes: Vec<usize>,
    pub raw_channels: Vec<usize>,
    pub woven_scales: Vec<usize>,
    pub k: usize,
    pub iterations: usize,
    pub enable_top_down: bool,
    pub enable_bottom_up: bool,
    pub anchor_mode: AnchorChoice,
    /// Overrides the default per-level anchor scales.
    pub anchor_scale_fractions: Option<Vec<f64>>,
    pub nms_iou: f64,
    pub refine: bool,
    pub refine_iou: f64,
    pub score_floor: f64,
    pub top_k: usize,
    pub keep_top_k: usize,
    pub seed: u64,
    pub num_classes: usize,
    pub mode: ModeChoice,
    pub sweep: Sweep,
    pub inject_partition_fault: Option<PartitionFault>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pp = PostprocessConfig::default();
        Self {
            input_size: 320.0,
            pyramid_sizes: vec![40, 20, 10, 5, 3, 1],
            raw_channels: vec![32; 6],
            woven_scales: vec![0, 1, 2, 3],
            k: 16,
            iterations: 1,
            enable_top_down: true,
            enable_bottom_up: true,
            anchor_mode: AnchorChoice::B,
            anchor_scale_fractions: None,
            nms_iou: pp.nms_iou,
            refine: pp.refine,
            refine_iou: pp.refine_iou,
            score_floor: pp.score_floor,
            top_k: pp.top_k,
            keep_top_k: pp.keep_top_k,
            seed: 0,
            num_classes: 20,
            mode: ModeChoice::Simplified,
            sweep: Sweep::default(),
            inject_partition_fault: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_json(&text).map_err(|e| invalid!("{}: {e}", path.display()))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| invalid!("config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.input_size > 0.0 && self.input_size.is_finite()) {
            return Err(invalid!("input_size must be positive"));
        }
        for (name, v) in [
            ("nms_iou", self.nms_iou),
            ("refine_iou", self.refine_iou),
            ("score_floor", self.score_floor),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid!("{name} = {v} is outside [0, 1]"));
            }
        }
        if self.num_classes == 0 {
            return Err(invalid!("num_classes must be at least 1"));
        }
        if self.sweep.k.is_empty() || self.sweep.iterations.is_empty() {
            return Err(invalid!("sweep lists must be non-empty"));
        }
        self.weave().validate()?;
        for &k in &self.sweep.k {
            WeaveConfig { k, ..self.weave() }.validate()?;
        }
        let spec = self.anchor_spec();
        spec.validate()?;
        if spec.levels() != self.pyramid_sizes.len() {
            return Err(invalid!(
                "{} anchor levels for {} pyramid scales; set anchor_scale_fractions",
                spec.levels(),
                self.pyramid_sizes.len()
            ));
        }
        Ok(())
    }

    pub fn scale_sizes(&self) -> Vec<(usize, usize)> {
        self.pyramid_sizes.iter().map(|&s| (s, s)).collect()
    }

    pub fn weave(&self) -> WeaveConfig {
        WeaveConfig {
            k: self.k,
            iterations: self.iterations,
            woven_scales: self.woven_scales.clone(),
            scale_sizes: self.scale_sizes(),
            raw_channels: self.raw_channels.clone(),
            enable_top_down: self.enable_top_down,
            enable_bottom_up: self.enable_bottom_up,
            seed: self.seed,
        }
    }

    pub fn anchor_spec(&self) -> AnchorSpec {
        match &self.anchor_scale_fractions {
            Some(f) => AnchorSpec::new(self.anchor_mode.into(), f.clone()),
            None => AnchorSpec::default_for(self.anchor_mode.into()),
        }
    }

    pub fn postprocess(&self) -> PostprocessConfig {
        PostprocessConfig {
            image_size: self.input_size,
            score_floor: self.score_floor,
            nms_iou: self.nms_iou,
            top_k: self.top_k,
            keep_top_k: self.keep_top_k,
            refine: self.refine,
            refine_iou: self.refine_iou,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn shipped_default_lists_every_key() {
        let text = include_str!("../../../configs/default.json");
        assert_eq!(RunConfig::from_json(text).unwrap(), RunConfig::default());
        let shipped: serde_json::Value = serde_json::from_str(text).unwrap();
        let all = serde_json::to_value(RunConfig::default()).unwrap();
        let keys = |v: &serde_json::Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
        assert_eq!(keys(&shipped), keys(&all));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"k": 16, "kk": 3}"#).unwrap_err();
        assert!(err.to_string().contains("kk"), "{err}");
    }

    #[test]
    fn thresholds_are_range_checked() {
        assert!(RunConfig::from_json(r#"{"nms_iou": 1.5}"#).is_err());
        assert!(RunConfig::from_json(r#"{"score_floor": -0.1}"#).is_err());
    }

    #[test]
    fn geometry_is_checked() {
        let err = RunConfig::from_json(r#"{"pyramid_sizes": [40, 21, 10, 5, 3, 1]}"#).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(RunConfig::from_json(r#"{"raw_channels": [32, 32]}"#).is_err());
    }

    #[test]
    fn modes_and_anchors_parse() {
        let c = RunConfig::from_json(r#"{"mode": "naive", "anchor_mode": "A"}"#).unwrap();
        assert_eq!(c.mode, ModeChoice::Naive);
        assert_eq!(c.anchor_mode, AnchorChoice::A);
        assert!(RunConfig::from_json(r#"{"mode": "fast"}"#).is_err());
    }

    #[test]
    fn anchor_levels_must_match_pyramid() {
        let json = r#"{"pyramid_sizes": [8, 4, 2, 1], "raw_channels": [4, 4, 4, 4], "woven_scales": [0, 1]"#;
        assert!(RunConfig::from_json(&format!("{json}}}")).is_err());
        let fixed = format!(r#"{json}, "anchor_scale_fractions": [0.2, 0.4, 0.6, 0.8]}}"#);
        assert_eq!(RunConfig::from_json(&fixed).unwrap().anchor_spec().levels(), 4);
    }
}
