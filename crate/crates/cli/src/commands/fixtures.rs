//! Seeded evaluation fixtures: a raw pyramid, ground truth with a controlled
//! area spread, and detections derived from it.

use std::path::{Path, PathBuf};

use rand::Rng;
use weavenet::detect::{iou, BBox, Detection};
use weavenet::eval::GroundTruth;
use weavenet::synth::{rng, synthetic_pyramid};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::formats::{to_jsonl, write_text, DetectionRecord, GroundTruthRecord, PyramidFile};

pub const IMAGES: usize = 3;
pub const CLASSES: usize = 2;
pub const BOXES_PER_CLASS: usize = 12;

/// Each edge moves by at most this fraction of the box side, which keeps
/// the IoU with the source box above 0.66.
const MAX_EDGE_SHIFT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Fixtures {
    pub pyramid: PyramidFile,
    pub ground_truth: Vec<GroundTruth>,
    /// One well-localized detection per ground truth.
    pub detections: Vec<(String, Detection)>,
    /// `detections` with every fourth box dropped, plus duplicates and
    /// far-off false positives.
    pub noisy_detections: Vec<(String, Detection)>,
}

pub fn make_fixtures(cfg: &RunConfig, seed: u64) -> Fixtures {
    let w = cfg.weave();
    let pyramid = PyramidFile::new(seed, &synthetic_pyramid(&w.scale_sizes, &w.raw_channels, seed));
    let mut r = rng(seed);

    // Sides grow with the box index, so the twelve areas of a class are
    // distinct and the percentile cut points are unambiguous.
    let mut ground_truth = Vec::new();
    for class_id in 0..CLASSES {
        for j in 0..BOXES_PER_CLASS {
            let side = 8.0 + 3.0 * j as f64 + r.gen_range(0.0..1.0);
            let slot = j / IMAGES;
            let x = 10.0 + 60.0 * slot as f64 + r.gen_range(0.0..5.0);
            let y = 10.0 + 80.0 * class_id as f64 + r.gen_range(0.0..5.0);
            ground_truth.push(GroundTruth {
                image_id: format!("img{}", j % IMAGES),
                bbox: BBox::new(x, y, x + side, y + side).expect("positive side"),
                class_id,
                ignored: false,
            });
        }
    }

    let detections: Vec<(String, Detection)> = ground_truth
        .iter()
        .map(|g| {
            let s = g.bbox.width() * MAX_EDGE_SHIFT;
            let mut d = || r.gen_range(-s..=s);
            let bbox = BBox::new(g.bbox.xmin + d(), g.bbox.ymin + d(), g.bbox.xmax + d(), g.bbox.ymax + d())
                .expect("shift is smaller than half the side");
            debug_assert!(iou(&bbox, &g.bbox) >= 0.5);
            let score = r.gen_range(0.5..1.0);
            (g.image_id.clone(), Detection { bbox, score, class_id: g.class_id })
        })
        .collect();

    let mut noisy_detections = Vec::new();
    for (i, (image, det)) in detections.iter().enumerate() {
        if i % 4 != 3 {
            noisy_detections.push((image.clone(), *det));
        }
        if i % 5 == 0 {
            let dup = Detection { score: det.score * 0.9, ..*det };
            noisy_detections.push((image.clone(), dup));
        }
    }
    for i in 0..6 {
        let x = r.gen_range(0.0..260.0);
        let y = 200.0 + r.gen_range(0.0..60.0);
        noisy_detections.push((
            format!("img{}", i % IMAGES),
            Detection {
                bbox: BBox::new(x, y, x + 20.0, y + 20.0).expect("positive side"),
                score: r.gen_range(0.0..1.0),
                class_id: i % CLASSES,
            },
        ));
    }
    Fixtures { pyramid, ground_truth, detections, noisy_detections }
}

fn records(dets: &[(String, Detection)]) -> Vec<DetectionRecord> {
    dets.iter().map(|(img, d)| DetectionRecord::new(img, d)).collect()
}

/// Writes `pyramid.json`, `gt.jsonl`, `dets.jsonl` and `dets_noisy.jsonl`.
pub fn write_fixtures(f: &Fixtures, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let files = [
        ("pyramid.json", serde_json::to_string(&f.pyramid).expect("pyramid serializes") + "\n"),
        ("gt.jsonl", to_jsonl(&f.ground_truth.iter().map(GroundTruthRecord::new).collect::<Vec<_>>())),
        ("dets.jsonl", to_jsonl(&records(&f.detections))),
        ("dets_noisy.jsonl", to_jsonl(&records(&f.noisy_detections))),
    ];
    let mut paths = Vec::new();
    for (name, text) in files {
        let p = dir.join(name);
        write_text(&p, &text)?;
        paths.push(p);
    }
    Ok(paths)
}
