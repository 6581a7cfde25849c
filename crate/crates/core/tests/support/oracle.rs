//! Slow reference evaluator: quadratic scans everywhere, no shared code with
//! the library besides the plain data types.

use std::collections::BTreeMap;

use weavenet::detect::BBox;
use weavenet::eval::{GroundTruth, ImageDetection, Stratum};

fn area(b: &BBox) -> f64 {
    (b.xmax - b.xmin) * (b.ymax - b.ymin)
}

fn overlap(a: &BBox, b: &BBox) -> f64 {
    let iw = a.xmax.min(b.xmax) - a.xmin.max(b.xmin);
    let ih = a.ymax.min(b.ymax) - a.ymin.max(b.ymin);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    inter / (area(a) + area(b) - inter)
}

/// Value at 0-based sorted position `k`: the smallest area whose count of
/// areas not above it exceeds `k`.
fn order_statistic(areas: &[f64], k: usize) -> f64 {
    let mut best = f64::INFINITY;
    for &v in areas {
        let at_most = areas.iter().filter(|&&a| a <= v).count();
        if at_most > k && v < best {
            best = v;
        }
    }
    best
}

pub fn oracle_strata(gts: &[GroundTruth]) -> Vec<Stratum> {
    gts.iter()
        .map(|g| {
            let areas: Vec<f64> = gts.iter().filter(|o| o.class_id == g.class_id).map(|o| area(&o.bbox)).collect();
            let n = areas.len();
            let p25 = order_statistic(&areas, (n / 4).min(n - 1));
            let p75 = order_statistic(&areas, (3 * n / 4).min(n - 1));
            let a = area(&g.bbox);
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

fn ap11(seq: &[bool], npos: usize) -> f64 {
    let mut total = 0.0;
    for step in 0..=10 {
        let r = step as f64 / 10.0;
        let mut best = 0.0f64;
        for end in 1..=seq.len() {
            let tp = seq[..end].iter().filter(|&&t| t).count();
            let recall = tp as f64 / npos as f64;
            let precision = tp as f64 / end as f64;
            if recall >= r && precision > best {
                best = precision;
            }
        }
        total += best;
    }
    total / 11.0
}

/// `(class, stratum) -> AP` plus per-stratum mAP.
pub struct OracleReport {
    pub ap: BTreeMap<(usize, Stratum), f64>,
    pub map: BTreeMap<Stratum, f64>,
}

pub fn oracle_evaluate(dets: &[ImageDetection], gts: &[GroundTruth]) -> OracleReport {
    let strata = oracle_strata(gts);
    // Selection sort by score descending, input order on ties.
    let mut order = Vec::new();
    let mut taken = vec![false; dets.len()];
    for _ in 0..dets.len() {
        let mut pick: Option<usize> = None;
        for i in 0..dets.len() {
            if !taken[i] && pick.is_none_or(|p| dets[i].detection.score > dets[p].detection.score) {
                pick = Some(i);
            }
        }
        let p = pick.unwrap();
        taken[p] = true;
        order.push(p);
    }

    let mut classes: Vec<usize> = gts.iter().map(|g| g.class_id).collect();
    classes.sort();
    classes.dedup();

    let mut ap = BTreeMap::new();
    let mut map = BTreeMap::new();
    for stratum in Stratum::ALL {
        let counts = |g: usize| stratum == Stratum::Overall || strata[g] == stratum;
        let mut used = vec![false; gts.len()];
        // label per detection: Some(true)=TP, Some(false)=FP, None=ignored
        let mut label = vec![None; dets.len()];
        for &d in &order {
            let det = &dets[d];
            let mut best: Option<(usize, f64)> = None;
            for g in 0..gts.len() {
                let gt = &gts[g];
                if used[g] || gt.image_id != det.image_id || gt.class_id != det.detection.class_id {
                    continue;
                }
                let v = overlap(&det.detection.bbox, &gt.bbox);
                if v >= 0.5 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((g, v));
                }
            }
            label[d] = match best {
                Some((g, _)) => {
                    used[g] = true;
                    counts(g).then_some(true)
                }
                None => Some(false),
            };
        }
        let mut class_aps = Vec::new();
        for &c in &classes {
            let npos = (0..gts.len()).filter(|&g| gts[g].class_id == c && counts(g)).count();
            if npos == 0 {
                continue;
            }
            let seq: Vec<bool> = order
                .iter()
                .filter(|&&d| dets[d].detection.class_id == c)
                .filter_map(|&d| label[d])
                .collect();
            let v = ap11(&seq, npos);
            ap.insert((c, stratum), v);
            class_aps.push(v);
        }
        if !class_aps.is_empty() {
            map.insert(stratum, class_aps.iter().sum::<f64>() / class_aps.len() as f64);
        }
    }
    OracleReport { ap, map }
}
