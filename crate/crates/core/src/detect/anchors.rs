use super::boxes::BBox;
use crate::{Error, Result};

/// Anchor side as a fraction of the input size, finest level first.
pub const DEFAULT_SCALE_FRACTIONS: [f64; 6] = [0.1, 0.2, 0.375, 0.55, 0.725, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorMode {
    /// Ratios `{1, 2, 1/2}` on the first and last two levels, adding `{3, 1/3}`
    /// on the middle levels.
    A,
    /// Ratios `{1, 2, 1/2, 3, 1/3}` on every level.
    B,
}

impl std::str::FromStr for AnchorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(AnchorMode::A),
            "B" | "b" => Ok(AnchorMode::B),
            other => Err(Error::Config(format!("unknown anchor mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSpec {
    pub scale_fractions: Vec<f64>,
    pub aspect_ratios: Vec<Vec<f64>>,
    /// Adds a square box of side `sqrt(s_k · s_{k+1})` per cell.
    pub extra_geometric_mean_box: bool,
    pub mode: AnchorMode,
}

const THREE: [f64; 3] = [1.0, 2.0, 0.5];
const FIVE: [f64; 5] = [1.0, 2.0, 0.5, 3.0, 1.0 / 3.0];

impl AnchorSpec {
    pub fn new(mode: AnchorMode, scale_fractions: Vec<f64>) -> Self {
        let levels = scale_fractions.len();
        let aspect_ratios = (0..levels)
            .map(|l| {
                let narrow = l == 0 || l + 2 >= levels;
                match mode {
                    AnchorMode::A if narrow => THREE.to_vec(),
                    _ => FIVE.to_vec(),
                }
            })
            .collect();
        Self { scale_fractions, aspect_ratios, extra_geometric_mean_box: true, mode }
    }

    /// Six-level spec with the default scale fractions.
    pub fn default_for(mode: AnchorMode) -> Self {
        Self::new(mode, DEFAULT_SCALE_FRACTIONS.to_vec())
    }

    pub fn levels(&self) -> usize {
        self.scale_fractions.len()
    }

    pub fn anchors_per_cell(&self, level: usize) -> usize {
        self.aspect_ratios[level].len() + self.extra_geometric_mean_box as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.aspect_ratios.len() != self.scale_fractions.len() {
            return Err(Error::Config("one aspect-ratio list per level required".into()));
        }
        if self.scale_fractions.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config("scale fractions must be positive".into()));
        }
        if self.scale_fractions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("scale fractions must increase across levels".into()));
        }
        if self.aspect_ratios.iter().flatten().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("aspect ratios must be positive".into()));
        }
        if self.aspect_ratios.iter().any(Vec::is_empty) && !self.extra_geometric_mean_box {
            return Err(Error::Config("a level has no anchors".into()));
        }
        Ok(())
    }
}

/// Anchors for every cell of every level, ordered level, row, column, then
/// ratio (with the geometric-mean box last).
pub fn generate_anchors(
    spec: &AnchorSpec,
    pyramid_sizes: &[(usize, usize)],
    input_size: f64,
) -> Result<Vec<BBox>> {
    spec.validate()?;
    if pyramid_sizes.len() != spec.levels() {
        return Err(Error::Config(format!(
            "{} pyramid levels, anchor spec has {}",
            pyramid_sizes.len(),
            spec.levels()
        )));
    }
    let mut anchors = Vec::new();
    for (level, &(h, w)) in pyramid_sizes.iter().enumerate() {
        let s = spec.scale_fractions[level];
        let next = spec.scale_fractions.get(level + 1).copied().unwrap_or(1.0);
        let mut shapes: Vec<(f64, f64)> = spec.aspect_ratios[level]
            .iter()
            .map(|r| (s * r.sqrt() * input_size, s / r.sqrt() * input_size))
            .collect();
        if spec.extra_geometric_mean_box {
            let side = (s * next).sqrt() * input_size;
            shapes.push((side, side));
        }
        for y in 0..h {
            let cy = (y as f64 + 0.5) / h as f64 * input_size;
            for x in 0..w {
                let cx = (x as f64 + 0.5) / w as f64 * input_size;
                anchors.extend(shapes.iter().map(|&(bw, bh)| BBox::from_center(cx, cy, bw, bh)));
            }
        }
    }
    Ok(anchors)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIZES: [(usize, usize); 6] = [(40, 40), (20, 20), (10, 10), (5, 5), (3, 3), (1, 1)];

    #[test]
    fn counts() {
        let b = generate_anchors(&AnchorSpec::default_for(AnchorMode::B), &SIZES, 320.0).unwrap();
        assert_eq!(b.len(), 6 * (1600 + 400 + 100 + 25 + 9 + 1));
        assert_eq!(b.len(), 12_810);
        let a = generate_anchors(&AnchorSpec::default_for(AnchorMode::A), &SIZES, 320.0).unwrap();
        assert_eq!(a.len(), 4 * 1600 + 6 * 400 + 6 * 100 + 6 * 25 + 4 * 9 + 4);
    }

    #[test]
    fn ratio_one_is_square_of_scale_side() {
        let anchors = generate_anchors(&AnchorSpec::default_for(AnchorMode::B), &SIZES, 320.0).unwrap();
        let first = anchors[0];
        assert!((first.width() - 32.0).abs() < 1e-12 && (first.height() - 32.0).abs() < 1e-12);
        assert_eq!(first.center(), (4.0, 4.0));
        // Geometric-mean box of level 0 is the sixth anchor of the cell.
        assert!((anchors[5].width() - (0.1f64 * 0.2).sqrt() * 320.0).abs() < 1e-12);
        let last = anchors.last().unwrap();
        assert_eq!(last.center(), (160.0, 160.0));
    }

    #[test]
    fn centers_inside_image() {
        for mode in [AnchorMode::A, AnchorMode::B] {
            for a in generate_anchors(&AnchorSpec::default_for(mode), &SIZES, 320.0).unwrap() {
                let (cx, cy) = a.center();
                assert!((0.0..320.0).contains(&cx) && (0.0..320.0).contains(&cy));
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = AnchorSpec::default_for(AnchorMode::B);
        spec.scale_fractions.swap(0, 1);
        assert!(spec.validate().is_err());
        let mut spec = AnchorSpec::default_for(AnchorMode::B);
        spec.aspect_ratios[2][0] = -1.0;
        assert!(spec.validate().is_err());
        assert!(generate_anchors(&AnchorSpec::default_for(AnchorMode::B), &SIZES[..5], 320.0).is_err());
    }
}
