//! VOC-style detection evaluation with per-class size strata.
//!
//! Ground-truth boxes of each class are split by area into small
//! (`area < p25`), medium (`p25 <= area < p75`) and large (`area >= p75`),
//! where `pK` is the area at sorted position `floor(K/100 · n)`. Evaluating a
//! stratum marks every other stratum's boxes as ignored: detections matched to
//! them leave the precision/recall curve entirely.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::detect::{iou, BBox, Detection};
use crate::{Error, Result};

pub const MATCH_IOU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub bbox: BBox,
    pub class_id: usize,
    pub ignored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageDetection {
    pub image_id: String,
    pub detection: Detection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    Small,
    Medium,
    Large,
    Overall,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [Stratum::Small, Stratum::Medium, Stratum::Large, Stratum::Overall];

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::Small => "small",
            Stratum::Medium => "medium",
            Stratum::Large => "large",
            Stratum::Overall => "overall",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrataMode {
    /// Small, medium, large and overall.
    Stratified,
    OverallOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchLabel {
    TruePositive,
    FalsePositive,
    /// Matched an ignored ground truth; excluded from the PR curve.
    Ignored,
}

/// Size stratum of every ground truth, computed per class.
pub fn stratify_by_area(gts: &[GroundTruth]) -> Vec<Stratum> {
    let mut by_class: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for g in gts {
        by_class.entry(g.class_id).or_default().push(g.bbox.area());
    }
    let thresholds: HashMap<usize, (f64, f64)> = by_class
        .into_iter()
        .map(|(class, mut areas)| {
            areas.sort_by(f64::total_cmp);
            let n = areas.len();
            let at = |i: usize| areas[i.min(n - 1)];
            (class, (at(n / 4), at(3 * n / 4)))
        })
        .collect();
    gts.iter()
        .map(|g| {
            let (p25, p75) = thresholds[&g.class_id];
            let a = g.bbox.area();
            if a < p25 {
                Stratum::Small
            } else if a < p75 {
                Stratum::Medium
            } else {
                Stratum::Large
            }
        })
        .collect()
}

/// Greedy matching of score-sorted detections.
///
/// Each detection takes the unmatched same-image, same-class ground truth of
/// highest IoU (at least `iou_threshold`; ties go to the earlier ground
/// truth). Ignored ground truths are consumed like any other but turn the
/// detection into [`MatchLabel::Ignored`].
pub fn match_detections(dets: &[ImageDetection], gts: &[GroundTruth], iou_threshold: f64) -> Vec<MatchLabel> {
    let mut index: HashMap<(&str, usize), Vec<usize>> = HashMap::new();
    for (i, g) in gts.iter().enumerate() {
        index.entry((g.image_id.as_str(), g.class_id)).or_default().push(i);
    }
    let mut used = vec![false; gts.len()];
    dets.iter()
        .map(|d| {
            let key = (d.image_id.as_str(), d.detection.class_id);
            let mut best: Option<(usize, f64)> = None;
            for &gi in index.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                if used[gi] {
                    continue;
                }
                let v = iou(&d.detection.bbox, &gts[gi].bbox);
                if v >= iou_threshold && best.is_none_or(|(_, b)| v > b) {
                    best = Some((gi, v));
                }
            }
            match best {
                Some((gi, _)) => {
                    used[gi] = true;
                    if gts[gi].ignored {
                        MatchLabel::Ignored
                    } else {
                        MatchLabel::TruePositive
                    }
                }
                None => MatchLabel::FalsePositive,
            }
        })
        .collect()
}

/// 11-point interpolated AP of a score-ordered TP (`true`) / FP (`false`)
/// sequence.
pub fn average_precision_11pt(is_tp: &[bool], num_positive: usize) -> f64 {
    if num_positive == 0 {
        return 0.0;
    }
    let mut tp = 0usize;
    let mut curve = Vec::with_capacity(is_tp.len());
    for (i, &hit) in is_tp.iter().enumerate() {
        tp += hit as usize;
        curve.push((tp as f64 / num_positive as f64, tp as f64 / (i + 1) as f64));
    }
    let sum: f64 = (0..=10)
        .map(|r| {
            let r = r as f64 / 10.0;
            curve
                .iter()
                .filter(|(recall, _)| *recall >= r)
                .map(|&(_, p)| p)
                .fold(0.0, f64::max)
        })
        .sum();
    sum / 11.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class_id: usize,
    /// Indexed by [`Stratum`]: small, medium, large, overall.
    pub gt_counts: [usize; 4],
    pub true_positives: [usize; 4],
    pub false_positives: [usize; 4],
    /// `None` for strata without ground truth (or not evaluated).
    pub ap: [Option<f64>; 4],
}

impl ClassReport {
    pub fn ap(&self, s: Stratum) -> Option<f64> {
        self.ap[s.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: Vec<ClassReport>,
    /// Unweighted mean of per-class AP over classes with ground truth in the
    /// stratum.
    pub map: [Option<f64>; 4],
    pub num_gt: usize,
    pub num_detections: usize,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn map(&self, s: Stratum) -> Option<f64> {
        self.map[s.index()]
    }

    pub fn class(&self, class_id: usize) -> Option<&ClassReport> {
        self.classes.iter().find(|c| c.class_id == class_id)
    }
}

pub fn evaluate(dets: &[ImageDetection], gts: &[GroundTruth], mode: StrataMode) -> Result<EvalReport> {
    if gts.is_empty() {
        return Err(Error::Empty("ground truth"));
    }
    if let Some(g) = gts.iter().find(|g| g.bbox.area().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::Shape(format!("ground truth in {} has zero area", g.image_id)));
    }
    if dets.iter().any(|d| !d.detection.score.is_finite()) {
        return Err(Error::NonFinite("detection score"));
    }

    let mut sorted: Vec<ImageDetection> = dets.to_vec();
    // Stable: equal scores keep input order.
    sorted.sort_by(|a, b| b.detection.score.total_cmp(&a.detection.score));

    let strata = stratify_by_area(gts);
    let gt_classes: BTreeSet<usize> = gts.iter().map(|g| g.class_id).collect();
    let det_classes: BTreeSet<usize> = sorted.iter().map(|d| d.detection.class_id).collect();
    let notes = det_classes
        .difference(&gt_classes)
        .map(|c| format!("class {c} has detections but no ground truth; skipped"))
        .collect();

    let evaluated: &[Stratum] = match mode {
        StrataMode::Stratified => &Stratum::ALL,
        StrataMode::OverallOnly => &[Stratum::Overall],
    };

    let mut classes: Vec<ClassReport> = gt_classes
        .iter()
        .map(|&class_id| ClassReport {
            class_id,
            gt_counts: [0; 4],
            true_positives: [0; 4],
            false_positives: [0; 4],
            ap: [None; 4],
        })
        .collect();

    for &stratum in evaluated {
        let marked: Vec<GroundTruth> = gts
            .iter()
            .zip(&strata)
            .map(|(g, &s)| GroundTruth {
                ignored: stratum != Stratum::Overall && s != stratum,
                ..g.clone()
            })
            .collect();
        let labels = match_detections(&sorted, &marked, MATCH_IOU);
        for report in &mut classes {
            let c = report.class_id;
            let npos = marked.iter().filter(|g| g.class_id == c && !g.ignored).count();
            let seq: Vec<bool> = sorted
                .iter()
                .zip(&labels)
                .filter(|(d, l)| d.detection.class_id == c && **l != MatchLabel::Ignored)
                .map(|(_, l)| *l == MatchLabel::TruePositive)
                .collect();
            let si = stratum.index();
            report.gt_counts[si] = npos;
            report.true_positives[si] = seq.iter().filter(|&&t| t).count();
            report.false_positives[si] = seq.len() - report.true_positives[si];
            report.ap[si] = (npos > 0).then(|| average_precision_11pt(&seq, npos));
        }
    }

    let mut map = [None; 4];
    for &s in evaluated {
        let aps: Vec<f64> = classes.iter().filter_map(|c| c.ap(s)).collect();
        if !aps.is_empty() {
            map[s.index()] = Some(aps.iter().sum::<f64>() / aps.len() as f64);
        }
    }

    Ok(EvalReport { classes, map, num_gt: gts.len(), num_detections: dets.len(), notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(image: &str, class_id: usize, x0: f64, y0: f64, x1: f64, y1: f64) -> GroundTruth {
        GroundTruth { image_id: image.into(), bbox: BBox::new(x0, y0, x1, y1).unwrap(), class_id, ignored: false }
    }

    fn det(image: &str, class_id: usize, score: f64, b: BBox) -> ImageDetection {
        ImageDetection { image_id: image.into(), detection: Detection { bbox: b, score, class_id } }
    }

    fn square(side: f64) -> GroundTruth {
        gt("img", 0, 0.0, 0.0, side, 1.0)
    }

    #[test]
    fn stratify_quartiles() {
        let gts: Vec<_> = [1.0, 2.0, 3.0, 4.0].map(square).to_vec();
        assert_eq!(
            stratify_by_area(&gts),
            vec![Stratum::Small, Stratum::Medium, Stratum::Medium, Stratum::Large]
        );
        let equal = vec![square(2.0); 5];
        assert!(stratify_by_area(&equal).iter().all(|&s| s == Stratum::Large));
        assert_eq!(stratify_by_area(&[square(3.0)]), vec![Stratum::Large]);

        let twelve: Vec<_> = (1..=12).map(|a| square(a as f64)).collect();
        let s = stratify_by_area(&twelve);
        assert_eq!(s.iter().filter(|&&x| x == Stratum::Small).count(), 3);
        assert_eq!(s.iter().filter(|&&x| x == Stratum::Medium).count(), 6);
        assert_eq!(s.iter().filter(|&&x| x == Stratum::Large).count(), 3);
    }

    #[test]
    fn stratify_is_per_class() {
        let mut gts: Vec<_> = [1.0, 2.0, 3.0, 4.0].map(square).to_vec();
        gts.push(gt("img", 1, 0.0, 0.0, 1.0, 1.0));
        assert_eq!(stratify_by_area(&gts)[4], Stratum::Large);
    }

    #[test]
    fn matching_cases() {
        let g = gt("a", 0, 0.0, 0.0, 10.0, 10.0);
        let exact = det("a", 0, 0.9, g.bbox);
        assert_eq!(match_detections(std::slice::from_ref(&exact), std::slice::from_ref(&g), 0.5), vec![MatchLabel::TruePositive]);
        assert_eq!(match_detections(std::slice::from_ref(&exact), &[], 0.5), vec![MatchLabel::FalsePositive]);

        let near = det("a", 0, 0.8, BBox::new(1.0, 0.0, 11.0, 10.0).unwrap());
        assert_eq!(
            match_detections(&[exact.clone(), near], std::slice::from_ref(&g), 0.5),
            vec![MatchLabel::TruePositive, MatchLabel::FalsePositive]
        );

        let other_image = det("b", 0, 0.9, g.bbox);
        let other_class = det("a", 1, 0.9, g.bbox);
        assert_eq!(
            match_detections(&[other_image, other_class], std::slice::from_ref(&g), 0.5),
            vec![MatchLabel::FalsePositive; 2]
        );

        let ignored = GroundTruth { ignored: true, ..g };
        assert_eq!(match_detections(&[exact], &[ignored], 0.5), vec![MatchLabel::Ignored]);
    }

    #[test]
    fn matching_prefers_unmatched_highest_iou() {
        let g1 = gt("a", 0, 0.0, 0.0, 10.0, 10.0);
        let g2 = gt("a", 0, 2.0, 0.0, 12.0, 10.0);
        // First detection sits on g1; the second overlaps g1 best but g1 is taken.
        let d1 = det("a", 0, 0.9, g1.bbox);
        let d2 = det("a", 0, 0.8, BBox::new(0.5, 0.0, 10.5, 10.0).unwrap());
        assert_eq!(
            match_detections(&[d1, d2], &[g1, g2], 0.5),
            vec![MatchLabel::TruePositive, MatchLabel::TruePositive]
        );
    }

    #[test]
    fn ap_hand_cases() {
        assert_eq!(average_precision_11pt(&[true], 1), 1.0);
        assert_eq!(average_precision_11pt(&[false, false], 3), 0.0);
        assert_eq!(average_precision_11pt(&[], 2), 0.0);
        assert_eq!(average_precision_11pt(&[true], 0), 0.0);
        assert!((average_precision_11pt(&[true, false], 2) - 6.0 / 11.0).abs() < 1e-12);
        // FP first: precision 0.5 at recall 1.
        assert!((average_precision_11pt(&[false, true], 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_detections_score_one_everywhere() {
        let gts: Vec<GroundTruth> = (1..=8)
            .flat_map(|i| {
                let s = i as f64 * 5.0;
                [gt("x", 0, 0.0, 0.0, s, s), gt("y", 1, 10.0, 10.0, 10.0 + s, 10.0 + 2.0 * s)]
            })
            .collect();
        let dets: Vec<_> = gts.iter().map(|g| det(&g.image_id, g.class_id, 1.0, g.bbox)).collect();
        let r = evaluate(&dets, &gts, StrataMode::Stratified).unwrap();
        for s in Stratum::ALL {
            assert_eq!(r.map(s), Some(1.0), "{s:?}");
        }
        assert_eq!(r.num_gt, 16);
    }

    #[test]
    fn no_detections_gives_zero() {
        let gts = vec![gt("x", 0, 0.0, 0.0, 5.0, 5.0)];
        let r = evaluate(&[], &gts, StrataMode::Stratified).unwrap();
        assert_eq!(r.map(Stratum::Overall), Some(0.0));
        assert_eq!(r.map(Stratum::Small), None);
        assert!(evaluate(&[], &[], StrataMode::OverallOnly).is_err());
    }

    #[test]
    fn dropping_small_detections_only_hurts_small() {
        // Each image holds a single stratum of one class.
        let mut gts = Vec::new();
        let layout: [(&str, &[f64]); 3] = [("s", &[1.0, 2.0]), ("m", &[3.0, 4.0, 5.0, 6.0]), ("l", &[7.0, 8.0])];
        for (img, sides) in layout {
            for (j, side) in sides.iter().enumerate() {
                let x = j as f64 * 100.0;
                gts.push(gt(img, 0, x, 0.0, x + side * 3.0, side * 3.0));
            }
        }
        let strata = stratify_by_area(&gts);
        assert_eq!(&strata[..2], &[Stratum::Small, Stratum::Small]);
        let all: Vec<_> = gts.iter().map(|g| det(&g.image_id, 0, 0.9, g.bbox)).collect();
        let full = evaluate(&all, &gts, StrataMode::Stratified).unwrap();
        let without: Vec<_> = all.iter().filter(|d| d.image_id != "s").cloned().collect();
        let partial = evaluate(&without, &gts, StrataMode::Stratified).unwrap();
        assert!(partial.map(Stratum::Small).unwrap() < full.map(Stratum::Small).unwrap());
        assert_eq!(partial.map(Stratum::Medium), full.map(Stratum::Medium));
        assert_eq!(partial.map(Stratum::Large), full.map(Stratum::Large));
    }

    #[test]
    fn notes_classes_without_ground_truth() {
        let gts = vec![gt("x", 0, 0.0, 0.0, 5.0, 5.0)];
        let dets = vec![det("x", 3, 0.5, gts[0].bbox)];
        let r = evaluate(&dets, &gts, StrataMode::OverallOnly).unwrap();
        assert_eq!(r.notes.len(), 1);
        assert!(r.class(3).is_none());
    }
}
