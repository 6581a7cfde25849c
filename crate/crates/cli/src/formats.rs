//! JSON Lines detection/ground-truth files and the JSON pyramid file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use weavenet::detect::{BBox, Detection};
use weavenet::eval::{GroundTruth, ImageDetection};
use weavenet::Tensor;

use crate::error::{invalid, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub image_id: String,
    pub class_id: usize,
    pub score: f64,
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthRecord {
    pub image_id: String,
    pub class_id: usize,
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
    /// VOC-style "difficult" flag: neither rewarded nor penalized.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ignored: bool,
}

impl DetectionRecord {
    pub fn new(image_id: &str, d: &Detection) -> Self {
        Self {
            image_id: image_id.to_string(),
            class_id: d.class_id,
            score: d.score,
            xmin: d.bbox.xmin,
            ymin: d.bbox.ymin,
            xmax: d.bbox.xmax,
            ymax: d.bbox.ymax,
        }
    }

    fn into_detection(self) -> weavenet::Result<ImageDetection> {
        if !self.score.is_finite() {
            return Err(weavenet::Error::NonFinite("score"));
        }
        Ok(ImageDetection {
            detection: Detection {
                bbox: BBox::new(self.xmin, self.ymin, self.xmax, self.ymax)?,
                score: self.score,
                class_id: self.class_id,
            },
            image_id: self.image_id,
        })
    }
}

impl GroundTruthRecord {
    pub fn new(g: &GroundTruth) -> Self {
        Self {
            image_id: g.image_id.clone(),
            class_id: g.class_id,
            xmin: g.bbox.xmin,
            ymin: g.bbox.ymin,
            xmax: g.bbox.xmax,
            ymax: g.bbox.ymax,
            ignored: g.ignored,
        }
    }

    fn into_ground_truth(self) -> weavenet::Result<GroundTruth> {
        Ok(GroundTruth {
            bbox: BBox::new(self.xmin, self.ymin, self.xmax, self.ymax)?,
            image_id: self.image_id,
            class_id: self.class_id,
            ignored: self.ignored,
        })
    }
}

fn parse_lines<R, T>(
    path: &Path,
    convert: impl Fn(R) -> weavenet::Result<T>,
) -> CliResult<Vec<T>>
where
    R: for<'de> Deserialize<'de>,
{
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = |e: &dyn std::fmt::Display| invalid!("{} line {}: {e}", path.display(), i + 1);
        let rec: R = serde_json::from_str(line).map_err(|e| at(&e))?;
        out.push(convert(rec).map_err(|e| at(&e))?);
    }
    Ok(out)
}

pub fn read_detections(path: &Path) -> CliResult<Vec<ImageDetection>> {
    parse_lines(path, DetectionRecord::into_detection)
}

pub fn read_ground_truth(path: &Path) -> CliResult<Vec<GroundTruth>> {
    parse_lines(path, GroundTruthRecord::into_ground_truth)
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).expect("plain records serialize"));
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    std::fs::write(path, text).map_err(CliError::io(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorRecord {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    /// Channel-major, then row, then column.
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PyramidFile {
    pub seed: u64,
    pub scales: Vec<TensorRecord>,
}

impl PyramidFile {
    pub fn new(seed: u64, scales: &[Tensor]) -> Self {
        let scales = scales
            .iter()
            .map(|t| TensorRecord { channels: t.channels(), height: t.height(), width: t.width(), data: t.data().to_vec() })
            .collect();
        Self { seed, scales }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| invalid!("{}: {e}", path.display()))
    }

    pub fn tensors(&self) -> CliResult<Vec<Tensor>> {
        self.scales
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Tensor::from_vec(r.channels, r.height, r.width, r.data.clone())
                    .map_err(|e| invalid!("pyramid scale {i}: {e}"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn detections_roundtrip() {
        let d = Detection { bbox: BBox::new(1.0, 2.0, 3.5, 4.25).unwrap(), score: 0.7, class_id: 3 };
        let f = write_tmp(&to_jsonl(&[DetectionRecord::new("a", &d)]));
        let back = read_detections(f.path()).unwrap();
        assert_eq!(back, vec![ImageDetection { image_id: "a".into(), detection: d }]);
    }

    #[test]
    fn errors_name_the_line() {
        let good = r#"{"image_id":"a","class_id":0,"xmin":0,"ymin":0,"xmax":1,"ymax":1}"#;
        let f = write_tmp(&format!("{good}\n{good}\n{{\"image_id\":\"a\"}}\n"));
        let err = read_ground_truth(f.path()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");

        let f = write_tmp(&format!("{good}\n{}\n", good.replace("\"xmax\":1", "\"xmax\":-1")));
        let err = read_ground_truth(f.path()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");

        let f = write_tmp(&good.replace('}', r#","score":1}"#));
        assert!(read_ground_truth(f.path()).is_err(), "unknown key accepted");
    }

    #[test]
    fn missing_file_is_io() {
        let err = read_detections(Path::new("/nonexistent/dets.jsonl")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn pyramid_roundtrip() {
        let t = Tensor::from_fn(2, 3, 1, |c, y, _| (c * 10 + y) as f64 / 7.0);
        let p = PyramidFile::new(4, std::slice::from_ref(&t));
        let json = serde_json::to_string(&p).unwrap();
        let back: PyramidFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.tensors().unwrap(), vec![t]);
    }
}
