use weavenet::detect::{generate_anchors, head_forward, init_head, postprocess, Detection};
use weavenet::synth::{rng, synthetic_pyramid};
use weavenet::weave::{init_params, weave_forward};
use weavenet::Tensor;

use crate::config::RunConfig;
use crate::error::{invalid, CliResult};
use crate::formats::DetectionRecord;

/// Keeps head parameters independent of the weave parameter stream.
const HEAD_SEED_OFFSET: u64 = 0x4ead;

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOutput {
    pub image_id: String,
    pub anchors: usize,
    /// Class-score pairs above the score floor, before NMS.
    pub candidates: usize,
    pub detections: Vec<Detection>,
}

impl DemoOutput {
    pub fn records(&self) -> Vec<DetectionRecord> {
        self.detections.iter().map(|d| DetectionRecord::new(&self.image_id, d)).collect()
    }
}

/// Synthetic end-to-end pass: pyramid → weave → per-scale head → decode,
/// floor, NMS, refinement. `pyramid` replaces the seeded synthetic input.
pub fn demo(cfg: &RunConfig, pyramid: Option<Vec<Tensor>>) -> CliResult<DemoOutput> {
    let weave = cfg.weave();
    let raw = match pyramid {
        Some(p) => p,
        None => synthetic_pyramid(&weave.scale_sizes, &weave.raw_channels, cfg.seed),
    };
    let params = init_params(&weave)?;
    let states = weave_forward(&raw, &weave, &params, cfg.mode.into())?;

    let spec = cfg.anchor_spec();
    let anchors = generate_anchors(&spec, &weave.scale_sizes, cfg.input_size)?;
    let mut head_rng = rng(cfg.seed.wrapping_add(HEAD_SEED_OFFSET));
    let mut offsets = Vec::with_capacity(anchors.len());
    let mut scores = Vec::with_capacity(anchors.len());
    for (level, state) in states.iter().enumerate() {
        let a = spec.anchors_per_cell(level);
        let head = init_head(&mut head_rng, state.channels(), a, cfg.num_classes);
        let out = head_forward(state, &head.loc, &head.conf, a, cfg.num_classes)?;
        offsets.extend(out.offsets);
        scores.extend(out.scores);
    }
    if offsets.len() != anchors.len() {
        return Err(invalid!("{} predictions for {} anchors", offsets.len(), anchors.len()));
    }
    let result = postprocess(&anchors, &offsets, &scores, cfg.num_classes, &cfg.postprocess())?;
    Ok(DemoOutput {
        image_id: format!("synthetic-{}", cfg.seed),
        anchors: anchors.len(),
        candidates: result.candidates,
        detections: result.detections,
    })
}
