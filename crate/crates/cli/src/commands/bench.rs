use std::fmt::Write as _;

use weavenet::bench::{compare_modes_with, format_table, BenchOptions, BenchReport, ModeComparison};
use weavenet::weave::WeaveConfig;

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub comparisons: Vec<ModeComparison>,
}

impl BenchOutcome {
    /// Naive then simplified for every `(k, T)`.
    pub fn reports(&self) -> Vec<&BenchReport> {
        self.comparisons.iter().flat_map(|c| [&c.naive, &c.simplified]).collect()
    }

    /// Independent of timing: identical across runs with the same config.
    pub fn flop_csv(&self) -> String {
        let mut s = format!("{}\n", BenchReport::FLOP_CSV_HEADER);
        for r in self.reports() {
            let _ = writeln!(s, "{}", r.flop_csv_row());
        }
        s
    }

    pub fn timing_csv(&self) -> String {
        let mut s = format!("{}\n", BenchReport::TIMING_CSV_HEADER);
        for r in self.reports() {
            let _ = writeln!(s, "{}", r.timing_csv_row());
        }
        s
    }

    pub fn summary(&self) -> String {
        let reports: Vec<BenchReport> = self.reports().into_iter().cloned().collect();
        let mut s = format_table(&reports);
        s.push('\n');
        let _ = writeln!(s, "{:>4} {:>4} {:>12} {:>12} {:>12}", "k", "T", "flop_ratio", "wall_ratio", "max_diff");
        for c in &self.comparisons {
            let _ = writeln!(
                s,
                "{:>4} {:>4} {:>12.6} {:>12.3} {:>12.3e}",
                c.naive.k, c.naive.iterations, c.flop_ratio, c.wall_ratio, c.max_abs_diff
            );
        }
        s
    }
}

pub fn bench(cfg: &RunConfig, opts: &BenchOptions) -> CliResult<BenchOutcome> {
    let mut comparisons = Vec::new();
    for &k in &cfg.sweep.k {
        for &iterations in &cfg.sweep.iterations {
            let weave = WeaveConfig { k, iterations, ..cfg.weave() };
            comparisons.push(compare_modes_with(&weave, opts)?);
        }
    }
    Ok(BenchOutcome { comparisons })
}
