//! SSD-style prediction and post-processing: anchors, prediction heads, box
//! decoding, greedy NMS and score-weighted refinement of the kept boxes.

mod anchors;
mod boxes;
mod head;
mod nms;
mod pipeline;

pub use anchors::{generate_anchors, AnchorMode, AnchorSpec, DEFAULT_SCALE_FRACTIONS};
pub use boxes::{decode_box, encode_box, iou, BBox, Detection, BOX_VARIANCES};
pub use head::{head_forward, init_head, HeadOutput, HeadParams};
pub use nms::{nms_greedy, refine_boxes};
pub use pipeline::{postprocess, PostprocessConfig, Postprocessed};
