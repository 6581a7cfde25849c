use std::fmt::Write as _;

use weavenet::eval::{evaluate, EvalReport, GroundTruth, ImageDetection, StrataMode, Stratum};

use crate::error::CliResult;

pub const EVAL_CSV_HEADER: &str = "class_id,stratum,num_gt,true_positives,false_positives,ap";

pub fn eval(dets: &[ImageDetection], gts: &[GroundTruth]) -> CliResult<EvalReport> {
    Ok(evaluate(dets, gts, StrataMode::Stratified)?)
}

fn fmt_ap(ap: Option<f64>) -> String {
    ap.map_or_else(String::new, |v| format!("{v:.12}"))
}

/// One row per class and stratum, then one `mAP` row per stratum.
pub fn report_csv(report: &EvalReport) -> String {
    let mut s = format!("{EVAL_CSV_HEADER}\n");
    for c in &report.classes {
        for (i, st) in Stratum::ALL.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                c.class_id,
                st.as_str(),
                c.gt_counts[i],
                c.true_positives[i],
                c.false_positives[i],
                fmt_ap(c.ap[i])
            );
        }
    }
    for st in Stratum::ALL {
        let _ = writeln!(s, "mAP,{},,,,{}", st.as_str(), fmt_ap(report.map(st)));
    }
    s
}

/// AP in percent per class and stratum.
pub fn report_table(report: &EvalReport) -> String {
    let pct = |ap: Option<f64>| ap.map_or_else(|| "-".to_string(), |v| format!("{:.2}", 100.0 * v));
    let mut s = format!("{:<8} {:>8} {:>8} {:>8} {:>8}\n", "class", "small", "medium", "large", "overall");
    for c in &report.classes {
        let _ = writeln!(
            s,
            "{:<8} {:>8} {:>8} {:>8} {:>8}",
            c.class_id,
            pct(c.ap[0]),
            pct(c.ap[1]),
            pct(c.ap[2]),
            pct(c.ap[3])
        );
    }
    let m = |st| pct(report.map(st));
    let _ = writeln!(
        s,
        "{:<8} {:>8} {:>8} {:>8} {:>8}",
        "mAP",
        m(Stratum::Small),
        m(Stratum::Medium),
        m(Stratum::Large),
        m(Stratum::Overall)
    );
    let _ = writeln!(s, "{} ground truths, {} detections", report.num_gt, report.num_detections);
    for n in &report.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}
