use crate::{Error, Result};

/// Center-size encoding variances `(x, y, w, h)`.
pub const BOX_VARIANCES: [f64; 4] = [0.1, 0.1, 0.2, 0.2];

/// Axis-aligned box in input-image pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let b = Self { xmin, ymin, xmax, ymax };
        if ![xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("box coordinates"));
        }
        if xmin > xmax || ymin > ymax {
            return Err(Error::Shape(format!("inverted box {b:?}")));
        }
        Ok(b)
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self { xmin: cx - w / 2.0, ymin: cy - h / 2.0, xmax: cx + w / 2.0, ymax: cy + h / 2.0 }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.xmin, self.ymin, self.xmax, self.ymax]
    }

    pub fn from_coords(c: [f64; 4]) -> Self {
        Self { xmin: c[0], ymin: c[1], xmax: c[2], ymax: c[3] }
    }

    pub fn clip(&self, size: f64) -> Self {
        let c = |v: f64| v.clamp(0.0, size);
        Self { xmin: c(self.xmin), ymin: c(self.ymin), xmax: c(self.xmax), ymax: c(self.ymax) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
    pub class_id: usize,
}

/// Intersection over union; 0 when the union is empty.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let w = (a.xmax.min(b.xmax) - a.xmin.max(b.xmin)).max(0.0);
    let h = (a.ymax.min(b.ymax) - a.ymin.max(b.ymin)).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Applies regression offsets `(dx, dy, dw, dh)` to an anchor and clips the
/// result to `[0, image_size]`.
pub fn decode_box(anchor: &BBox, offsets: [f64; 4], image_size: f64) -> Result<BBox> {
    if offsets.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("box offsets"));
    }
    let (acx, acy) = anchor.center();
    let (aw, ah) = (anchor.width(), anchor.height());
    let [vx, vy, vw, vh] = BOX_VARIANCES;
    let cx = acx + offsets[0] * vx * aw;
    let cy = acy + offsets[1] * vy * ah;
    let w = aw * (offsets[2] * vw).exp();
    let h = ah * (offsets[3] * vh).exp();
    let b = BBox::from_center(cx, cy, w, h).clip(image_size);
    if !b.coords().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("decoded box"));
    }
    Ok(b)
}

/// Inverse of [`decode_box`] without clipping. Both boxes need positive size.
pub fn encode_box(anchor: &BBox, target: &BBox) -> [f64; 4] {
    let (acx, acy) = anchor.center();
    let (tcx, tcy) = target.center();
    let [vx, vy, vw, vh] = BOX_VARIANCES;
    [
        (tcx - acx) / (vx * anchor.width()),
        (tcy - acy) / (vy * anchor.height()),
        (target.width() / anchor.width()).ln() / vw,
        (target.height() / anchor.height()).ln() / vh,
    ]
}
