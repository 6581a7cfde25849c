//! Wall-clock and analytic-cost benchmarking of the weave stage.
//!
//! Each measured run executes `batch` independent forward passes back to back
//! on a fixed synthetic pyramid; warmup runs are executed first and
//! discarded. FLOP figures come from [`flops_weave`] and are exact.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use crate::synth::synthetic_pyramid;
use crate::weave::{
    baseline_conv_flops, flops_weave, init_params, weave_forward_with, BlockMode, ForwardOptions, WeaveConfig,
};
use crate::{Error, Result, Tensor};

pub const DEFAULT_WARMUP: usize = 3;
pub const DEFAULT_REPS: usize = 20;
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// Seed offset separating input features from parameters.
const INPUT_SEED_OFFSET: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub warmup: usize,
    pub reps: usize,
    pub batch: usize,
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { warmup: DEFAULT_WARMUP, reps: DEFAULT_REPS, batch: 1, parallel: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub mode: BlockMode,
    pub k: usize,
    pub iterations: usize,
    pub top_down: bool,
    pub bottom_up: bool,
    pub parallel: bool,
    pub warmup: usize,
    pub reps: usize,
    pub batch: usize,
    /// Seconds per measured run (each run is `batch` passes).
    pub run_seconds: Vec<f64>,
    pub mean_seconds: f64,
    pub stddev_seconds: f64,
    /// Forward passes per second over all measured runs.
    pub throughput: f64,
    /// FLOPs of one forward pass.
    pub flops: u64,
    pub flops_per_second: f64,
    /// 256 → 256 3×3 convolution at the finest woven scale.
    pub baseline_flops: u64,
    /// FNV-1a over the bits of the last pass's output.
    pub output_checksum: u64,
}

/// Inputs shared by every benchmark of one config.
pub fn bench_inputs(config: &WeaveConfig) -> Vec<Tensor> {
    synthetic_pyramid(&config.scale_sizes, &config.raw_channels, config.seed.wrapping_add(INPUT_SEED_OFFSET))
}

pub fn checksum(outputs: &[Tensor]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in outputs {
        for v in t.data() {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    h
}

/// Runs `warmup` unmeasured and `reps` measured runs of `batch` calls to `f`;
/// returns per-run seconds and the last value produced.
pub fn time_passes<T>(
    warmup: usize,
    reps: usize,
    batch: usize,
    mut f: impl FnMut() -> Result<T>,
) -> Result<(Vec<f64>, T)> {
    if reps == 0 || batch == 0 {
        return Err(Error::Config("reps and batch must be at least 1".into()));
    }
    for _ in 0..warmup * batch {
        black_box(f()?);
    }
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let start = Instant::now();
        for _ in 0..batch {
            last = Some(black_box(f()?));
        }
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((times, last.expect("at least one pass")))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_bench(config: &WeaveConfig, mode: BlockMode, warmup: usize, reps: usize, batch: usize) -> Result<BenchReport> {
    run_bench_with(config, mode, &BenchOptions { warmup, reps, batch, parallel: false })
}

pub fn run_bench_with(config: &WeaveConfig, mode: BlockMode, opts: &BenchOptions) -> Result<BenchReport> {
    let params = init_params(config)?;
    let raw = bench_inputs(config);
    let flops = flops_weave(config, &params, mode)?.total;
    let fwd = ForwardOptions { mode, parallel: opts.parallel };
    let (run_seconds, last) = time_passes(opts.warmup, opts.reps, opts.batch, || {
        weave_forward_with(&raw, config, &params, fwd, &mut |_| {})
    })?;
    let (mean_seconds, stddev_seconds) = mean_std(&run_seconds);
    let total: f64 = run_seconds.iter().sum();
    let passes = (opts.batch * opts.reps) as f64;
    let finest = config.woven_scales.first().copied().unwrap_or(0);
    let (h, w) = config.scale_sizes[finest];
    Ok(BenchReport {
        mode,
        k: config.k,
        iterations: config.iterations,
        top_down: config.enable_top_down,
        bottom_up: config.enable_bottom_up,
        parallel: opts.parallel,
        warmup: opts.warmup,
        reps: opts.reps,
        batch: opts.batch,
        run_seconds,
        mean_seconds,
        stddev_seconds,
        throughput: passes / total,
        flops,
        flops_per_second: flops as f64 * passes / total,
        baseline_flops: baseline_conv_flops(h, w),
        output_checksum: checksum(&last),
    })
}

/// Largest elementwise deviation between two pyramids, failing with the
/// worst location when it exceeds `tolerance`.
pub fn check_equivalence(naive: &[Tensor], simplified: &[Tensor], tolerance: f64) -> Result<f64> {
    if naive.len() != simplified.len() {
        return Err(Error::Shape(format!("{} vs {} scales", naive.len(), simplified.len())));
    }
    let mut worst: Option<(f64, usize, (usize, usize, usize))> = None;
    for (scale, (a, b)) in naive.iter().zip(simplified).enumerate() {
        let (d, at) = a
            .max_abs_diff(b)
            .ok_or_else(|| Error::Shape(format!("scale {scale}: {:?} vs {:?}", a.shape(), b.shape())))?;
        if worst.is_none_or(|(w, _, _)| d > w || d.is_nan()) {
            worst = Some((d, scale, at));
        }
    }
    let Some((d, scale, (channel, y, x))) = worst else {
        return Ok(0.0);
    };
    if d > tolerance || d.is_nan() {
        return Err(Error::Equivalence {
            max_abs_diff: d,
            scale,
            channel,
            y,
            x,
            naive: naive[scale].get(channel, y, x),
            simplified: simplified[scale].get(channel, y, x),
        });
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub naive: BenchReport,
    pub simplified: BenchReport,
    pub max_abs_diff: f64,
    /// naive / simplified FLOPs.
    pub flop_ratio: f64,
    /// naive / simplified mean wall time.
    pub wall_ratio: f64,
}

/// Verifies naive/simplified equivalence on the benchmark inputs, then times
/// both modes.
pub fn compare_modes(config: &WeaveConfig, warmup: usize, reps: usize) -> Result<ModeComparison> {
    compare_modes_with(config, &BenchOptions { warmup, reps, ..BenchOptions::default() })
}

pub fn compare_modes_with(config: &WeaveConfig, opts: &BenchOptions) -> Result<ModeComparison> {
    let params = init_params(config)?;
    let raw = bench_inputs(config);
    let run = |mode: BlockMode| weave_forward_with(&raw, config, &params, mode.into(), &mut |_| {});
    let max_abs_diff = check_equivalence(&run(BlockMode::Naive)?, &run(BlockMode::Simplified)?, EQUIVALENCE_TOLERANCE)?;
    let naive = run_bench_with(config, BlockMode::Naive, opts)?;
    let simplified = run_bench_with(config, BlockMode::Simplified, opts)?;
    let flop_ratio = if simplified.flops == 0 { 1.0 } else { naive.flops as f64 / simplified.flops as f64 };
    let wall_ratio = naive.mean_seconds / simplified.mean_seconds;
    Ok(ModeComparison { naive, simplified, max_abs_diff, flop_ratio, wall_ratio })
}

impl BenchReport {
    /// Columns that depend only on config and seed.
    pub const FLOP_CSV_HEADER: &'static str =
        "mode,k,iterations,top_down,bottom_up,batch,flops,baseline_flops,output_checksum";

    pub const TIMING_CSV_HEADER: &'static str = "mode,k,iterations,top_down,bottom_up,parallel,warmup,reps,batch,\
mean_seconds,stddev_seconds,throughput_pps,flops,flops_per_second,baseline_flops";

    pub fn flop_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:016x}",
            self.mode,
            self.k,
            self.iterations,
            self.top_down,
            self.bottom_up,
            self.batch,
            self.flops,
            self.baseline_flops,
            self.output_checksum
        )
    }

    pub fn timing_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.9},{:.9},{:.3},{},{:.1},{}",
            self.mode,
            self.k,
            self.iterations,
            self.top_down,
            self.bottom_up,
            self.parallel,
            self.warmup,
            self.reps,
            self.batch,
            self.mean_seconds,
            self.stddev_seconds,
            self.throughput,
            self.flops,
            self.flops_per_second,
            self.baseline_flops
        )
    }
}

/// Aligned human-readable table.
pub fn format_table(reports: &[BenchReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<11} {:>4} {:>4} {:>5} {:>5} {:>4} {:>12} {:>11} {:>10} {:>15} {:>11}",
        "mode", "k", "T", "td", "bu", "par", "mean_ms", "stddev_ms", "pass/s", "flops", "GFLOP/s"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<11} {:>4} {:>4} {:>5} {:>5} {:>4} {:>12.3} {:>11.3} {:>10.2} {:>15} {:>11.3}",
            r.mode.as_str(),
            r.k,
            r.iterations,
            r.top_down,
            r.bottom_up,
            if r.parallel { "yes" } else { "no" },
            r.mean_seconds * 1e3,
            r.stddev_seconds * 1e3,
            r.throughput,
            r.flops,
            r.flops_per_second / 1e9
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weave::weave_forward;

    fn small() -> WeaveConfig {
        WeaveConfig {
            k: 4,
            iterations: 2,
            scale_sizes: vec![(8, 8), (4, 4), (2, 2), (1, 1)],
            raw_channels: vec![3; 4],
            woven_scales: vec![0, 1, 2],
            ..WeaveConfig::default()
        }
    }

    #[test]
    fn single_sample_report() {
        let r = run_bench(&small(), BlockMode::Naive, 0, 1, 1).unwrap();
        assert_eq!(r.run_seconds.len(), 1);
        assert_eq!(r.stddev_seconds, 0.0);
        assert!((r.throughput - 1.0 / r.run_seconds[0]).abs() / r.throughput < 1e-9);
    }

    #[test]
    fn report_fields() {
        let r = run_bench(&small(), BlockMode::Simplified, 1, 3, 2).unwrap();
        assert_eq!((r.warmup, r.reps, r.batch), (1, 3, 2));
        assert_eq!(r.run_seconds.len(), 3);
        let total: f64 = r.run_seconds.iter().sum();
        assert!((r.throughput - 6.0 / total).abs() / r.throughput < 1e-9);
        assert!(r.stddev_seconds >= 0.0);
        assert_eq!(r.baseline_flops, baseline_conv_flops(8, 8));
        assert!(run_bench(&small(), BlockMode::Naive, 0, 0, 1).is_err());
    }

    #[test]
    fn flops_and_outputs_are_deterministic() {
        let a = run_bench(&small(), BlockMode::Simplified, 0, 2, 1).unwrap();
        let b = run_bench(&small(), BlockMode::Simplified, 1, 1, 1).unwrap();
        assert_eq!(a.flop_csv_row(), b.flop_csv_row());
    }

    #[test]
    fn timing_does_not_alter_outputs() {
        let cfg = small();
        let params = init_params(&cfg).unwrap();
        let out = weave_forward(&bench_inputs(&cfg), &cfg, &params, BlockMode::Naive).unwrap();
        let r = run_bench(&cfg, BlockMode::Naive, 1, 2, 1).unwrap();
        assert_eq!(r.output_checksum, checksum(&out));
    }

    #[test]
    fn single_iteration_flop_ratio_is_one() {
        let cfg = WeaveConfig { iterations: 1, ..small() };
        let c = compare_modes(&cfg, 0, 1).unwrap();
        assert_eq!(c.flop_ratio, 1.0);
        assert!(c.max_abs_diff <= EQUIVALENCE_TOLERANCE);
        assert!(c.wall_ratio > 0.0);
    }

    #[test]
    fn equivalence_failure_reports_location() {
        let a = vec![Tensor::zeros(2, 3, 3)];
        let mut b = a.clone();
        b[0].set(1, 2, 0, 1e-6);
        match check_equivalence(&a, &b, 1e-9) {
            Err(Error::Equivalence { scale: 0, channel: 1, y: 2, x: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(check_equivalence(&a, &a, 1e-9), Ok(0.0));
    }

    #[test]
    fn table_has_one_line_per_report() {
        let r = run_bench(&small(), BlockMode::Naive, 0, 1, 1).unwrap();
        assert_eq!(format_table(&[r.clone(), r]).lines().count(), 3);
    }
}
