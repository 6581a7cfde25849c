use std::cmp::Ordering;

use super::boxes::{iou, Detection};
use crate::{Error, Result};

fn rank(a: &(usize, &Detection), b: &(usize, &Detection)) -> Ordering {
    b.1.score
        .total_cmp(&a.1.score)
        .then(a.1.bbox.xmin.total_cmp(&b.1.bbox.xmin))
        .then(a.1.bbox.ymin.total_cmp(&b.1.bbox.ymin))
        .then(a.0.cmp(&b.0))
}

/// Stable ranking used by NMS: score descending, then `xmin`, `ymin`, input
/// index ascending.
pub(crate) fn sort_ranked(dets: &mut Vec<Detection>) {
    let mut order: Vec<(usize, &Detection)> = dets.iter().enumerate().collect();
    order.sort_by(rank);
    *dets = order.into_iter().map(|(_, d)| *d).collect();
}

/// Greedy suppression. Detections are visited by score descending (ties by
/// `xmin`, then `ymin`, then input index); each kept box suppresses later
/// boxes with IoU above `iou_threshold`, restricted to its own class when
/// `per_class` is set.
pub fn nms_greedy(dets: &[Detection], iou_threshold: f64, per_class: bool) -> Vec<Detection> {
    let mut order: Vec<(usize, &Detection)> = dets.iter().enumerate().collect();
    order.sort_by(rank);
    let mut suppressed = vec![false; order.len()];
    let mut kept = Vec::new();
    for i in 0..order.len() {
        if suppressed[i] {
            continue;
        }
        let current = order[i].1;
        kept.push(*current);
        for j in i + 1..order.len() {
            let other = order[j].1;
            if suppressed[j] || (per_class && other.class_id != current.class_id) {
                continue;
            }
            if iou(&current.bbox, &other.bbox) > iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    kept
}

/// Replaces each kept box by the score-weighted mean of itself and every
/// same-class candidate overlapping it by more than `iou_threshold`. Scores
/// and classes are untouched.
pub fn refine_boxes(
    kept: &[Detection],
    candidates: &[Detection],
    iou_threshold: f64,
) -> Result<Vec<Detection>> {
    if candidates.is_empty() {
        return Err(Error::Empty("refinement candidates"));
    }
    Ok(kept
        .iter()
        .map(|b| {
            let mut weight = 0.0;
            let mut acc = [0.0; 4];
            let mut saw_self = false;
            let mut add = |d: &Detection| {
                weight += d.score;
                for (a, v) in acc.iter_mut().zip(d.bbox.coords()) {
                    *a += d.score * v;
                }
            };
            for c in candidates.iter().filter(|c| c.class_id == b.class_id) {
                if iou(&c.bbox, &b.bbox) > iou_threshold {
                    saw_self |= c == b;
                    add(c);
                }
            }
            if !saw_self {
                add(b);
            }
            if weight <= 0.0 {
                return *b;
            }
            Detection { bbox: super::BBox::from_coords(acc.map(|a| a / weight)), ..*b }
        })
        .collect())
}
