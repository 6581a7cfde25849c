use super::boxes::{decode_box, BBox, Detection};
use super::nms::{nms_greedy, refine_boxes, sort_ranked};
use crate::error::shape_err;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PostprocessConfig {
    pub image_size: f64,
    /// Class scores below this are discarded before NMS.
    pub score_floor: f64,
    pub nms_iou: f64,
    /// Per-class cap on boxes entering NMS.
    pub top_k: usize,
    /// Cap on detections kept across all classes.
    pub keep_top_k: usize,
    pub refine: bool,
    pub refine_iou: f64,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self {
            image_size: 320.0,
            score_floor: 0.01,
            nms_iou: 0.45,
            top_k: 400,
            keep_top_k: 200,
            refine: true,
            refine_iou: 0.6,
        }
    }
}

/// Result of [`postprocess`].
#[derive(Debug, Clone, PartialEq)]
pub struct Postprocessed {
    /// Detections above the score floor, before NMS.
    pub candidates: usize,
    pub detections: Vec<Detection>,
}

/// Decode, score-floor, per-class NMS, global cap, optional refinement.
///
/// `scores[i]` holds `num_classes + 1` probabilities for anchor `i`, with the
/// background at index 0; emitted class ids are `0..num_classes`.
pub fn postprocess(
    anchors: &[BBox],
    offsets: &[[f64; 4]],
    scores: &[Vec<f64>],
    num_classes: usize,
    cfg: &PostprocessConfig,
) -> Result<Postprocessed> {
    if anchors.len() != offsets.len() || anchors.len() != scores.len() {
        return Err(shape_err!(
            "{} anchors, {} offsets, {} score rows",
            anchors.len(),
            offsets.len(),
            scores.len()
        ));
    }
    for t in [cfg.score_floor, cfg.nms_iou, cfg.refine_iou] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
        }
    }
    let boxes = anchors
        .iter()
        .zip(offsets)
        .map(|(a, o)| decode_box(a, *o, cfg.image_size))
        .collect::<Result<Vec<_>>>()?;

    let mut pools = Vec::with_capacity(num_classes);
    let mut kept = Vec::new();
    for class_id in 0..num_classes {
        let mut pool: Vec<Detection> = boxes
            .iter()
            .zip(scores)
            .filter_map(|(b, s)| {
                let score = *s.get(class_id + 1)?;
                (score >= cfg.score_floor).then_some(Detection { bbox: *b, score, class_id })
            })
            .collect();
        let mut ranked = pool.clone();
        sort_ranked(&mut ranked);
        ranked.truncate(cfg.top_k);
        kept.extend(nms_greedy(&ranked, cfg.nms_iou, true));
        pool.shrink_to_fit();
        pools.push(pool);
    }
    let candidates = pools.iter().map(Vec::len).sum();
    sort_ranked(&mut kept);
    kept.truncate(cfg.keep_top_k);

    if cfg.refine && !kept.is_empty() {
        let mut refined = Vec::with_capacity(kept.len());
        for d in &kept {
            refined.extend(refine_boxes(std::slice::from_ref(d), &pools[d.class_id], cfg.refine_iou)?);
        }
        kept = refined;
    }
    Ok(Postprocessed { candidates, detections: kept })
}
