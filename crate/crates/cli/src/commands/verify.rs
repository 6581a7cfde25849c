use std::fmt::Write as _;

use weavenet::bench::{bench_inputs, EQUIVALENCE_TOLERANCE};
use weavenet::weave::{init_params, weave_forward_with, BlockMode, WeaveConfig, WeaveEvent, WeaveParams};
use weavenet::Tensor;

use crate::config::{PartitionFault, RunConfig};
use crate::error::{invalid, CliResult};

/// First block output whose modes disagree beyond tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    pub iteration: usize,
    pub scale: usize,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyLine {
    pub k: usize,
    pub iterations: usize,
    pub top_down: bool,
    pub bottom_up: bool,
    /// Worst deviation over every block output and every final state.
    pub max_abs_diff: f64,
    pub first_mismatch: Option<Mismatch>,
}

impl VerifyLine {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_abs_diff <= tolerance
    }

    pub fn masks(&self) -> &'static str {
        match (self.top_down, self.bottom_up) {
            (true, true) => "both",
            (true, false) => "top-down-only",
            (false, true) => "bottom-up-only",
            (false, false) => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub lines: Vec<VerifyLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed(self.tolerance))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            let status = if l.passed(self.tolerance) { "ok" } else { "FAIL" };
            let _ = write!(
                s,
                "k={:<3} T={} masks={:<14} max_abs_diff={:.3e} {status}",
                l.k,
                l.iterations,
                l.masks(),
                l.max_abs_diff
            );
            if let (false, Some(m)) = (l.passed(self.tolerance), l.first_mismatch) {
                let _ = write!(s, " (first at scale {} iteration {}, |diff|={:.3e})", m.scale, m.iteration, m.abs_diff);
            }
            s.push('\n');
        }
        let failed = self.lines.iter().filter(|l| !l.passed(self.tolerance)).count();
        let _ = writeln!(
            s,
            "{} of {} combinations within {:e}",
            self.lines.len() - failed,
            self.lines.len(),
            self.tolerance
        );
        s
    }
}

/// Mask settings exercised: all three when the config enables both
/// directions, otherwise only the config's own setting.
fn mask_settings(cfg: &RunConfig) -> Vec<(bool, bool)> {
    if cfg.enable_top_down && cfg.enable_bottom_up {
        vec![(true, true), (true, false), (false, true)]
    } else {
        vec![(cfg.enable_top_down, cfg.enable_bottom_up)]
    }
}

/// Shifts the raw-column range of one kernel by a single channel. Returns
/// false when the kernel does not exist or holds no message columns.
pub fn inject_fault(params: &mut WeaveParams, fault: PartitionFault) -> CliResult<bool> {
    let Some(block) = params.block_mut(fault.scale) else {
        return Err(invalid!("partition fault: scale {} is not woven", fault.scale));
    };
    let Some(ik) = fault.iteration.checked_sub(1).and_then(|i| block.iterations.get_mut(i)) else {
        return Ok(false);
    };
    let r = ik.raw_columns.clone();
    ik.raw_columns = if r.end < ik.kernel.in_channels() {
        r.start + 1..r.end + 1
    } else if r.start > 0 {
        r.start - 1..r.end - 1
    } else {
        return Ok(false);
    };
    Ok(true)
}

type BlockLog = Vec<(usize, usize, Vec<Tensor>)>;

fn run_logged(raw: &[Tensor], cfg: &WeaveConfig, params: &WeaveParams, mode: BlockMode) -> CliResult<(BlockLog, Vec<Tensor>)> {
    let mut log = Vec::new();
    let out = weave_forward_with(raw, cfg, params, mode.into(), &mut |e| {
        if let WeaveEvent::Block { iteration, scale, output } = e {
            log.push((iteration, scale, output.messages().cloned().collect()));
        }
    })?;
    Ok((log, out))
}

fn worst(a: &[Tensor], b: &[Tensor]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y).map_or(0.0, |d| d.0)).fold(0.0, f64::max)
}

/// Compares both modes block by block; the flag reports whether `fault`
/// was actually injected.
pub fn verify_combination(weave: &WeaveConfig, fault: Option<PartitionFault>) -> CliResult<(VerifyLine, bool)> {
    let mut params = init_params(weave)?;
    let faulted = match fault {
        Some(f) => inject_fault(&mut params, f)?,
        None => false,
    };
    let raw = bench_inputs(weave);
    let (naive_log, naive_out) = run_logged(&raw, weave, &params, BlockMode::Naive)?;
    let (simple_log, simple_out) = run_logged(&raw, weave, &params, BlockMode::Simplified)?;

    let mut max_abs_diff = worst(&naive_out, &simple_out);
    let mut first_mismatch = None;
    for ((t, scale, a), (_, _, b)) in naive_log.iter().zip(&simple_log) {
        let d = worst(a, b);
        max_abs_diff = max_abs_diff.max(d);
        if d > EQUIVALENCE_TOLERANCE && first_mismatch.is_none() {
            first_mismatch = Some(Mismatch { iteration: *t, scale: *scale, abs_diff: d });
        }
    }
    let line = VerifyLine {
        k: weave.k,
        iterations: weave.iterations,
        top_down: weave.enable_top_down,
        bottom_up: weave.enable_bottom_up,
        max_abs_diff,
        first_mismatch,
    };
    Ok((line, faulted))
}

pub fn verify(cfg: &RunConfig) -> CliResult<VerifyReport> {
    let mut lines = Vec::new();
    let mut any_faulted = false;
    for &k in &cfg.sweep.k {
        for &iterations in &cfg.sweep.iterations {
            for (enable_top_down, enable_bottom_up) in mask_settings(cfg) {
                let weave = WeaveConfig { k, iterations, enable_top_down, enable_bottom_up, ..cfg.weave() };
                let (line, faulted) = verify_combination(&weave, cfg.inject_partition_fault)?;
                any_faulted |= faulted;
                lines.push(line);
            }
        }
    }
    if let (Some(f), false) = (cfg.inject_partition_fault, any_faulted) {
        return Err(invalid!(
            "partition fault at scale {} iteration {} applies to no swept combination",
            f.scale,
            f.iteration
        ));
    }
    Ok(VerifyReport { tolerance: EQUIVALENCE_TOLERANCE, lines })
}
