use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weavenet::bench::{BenchOptions, DEFAULT_REPS, DEFAULT_WARMUP};
use weavenet_cli::commands::{bench, demo, evaluate, fixtures, verify};
use weavenet_cli::config::{AnchorChoice, ModeChoice};
use weavenet_cli::formats::{read_detections, read_ground_truth, to_jsonl, write_text, PyramidFile};
use weavenet_cli::{CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "weavenet", version, about = "Multi-scale weave fusion: verification, demo, evaluation, benchmarks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (directory for `fixtures`); standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<ModeChoice>,
    #[arg(long, global = true, value_parser = parse_anchors)]
    anchors: Option<AnchorChoice>,
    #[arg(long, global = true)]
    no_refine: bool,
    #[arg(long, global = true, conflicts_with = "bottom_up_only")]
    top_down_only: bool,
    #[arg(long, global = true)]
    bottom_up_only: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check naive and simplified blocks agree over the k × T × mask sweep.
    Verify,
    /// Run the synthetic end-to-end pipeline and write detections (JSON Lines).
    Demo {
        /// Raw pyramid file (as written by `fixtures`) instead of a seeded one.
        #[arg(long)]
        pyramid: Option<PathBuf>,
    },
    /// Score detections against ground truth; CSV plus a summary table.
    Eval {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        gt: PathBuf,
    },
    /// Time naive vs simplified over the sweep; FLOP CSV to --out.
    Bench {
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        warmup: usize,
        #[arg(long, default_value_t = DEFAULT_REPS)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        batch: usize,
        /// Run the blocks of each iteration on one thread per scale.
        #[arg(long)]
        parallel: bool,
        /// Sweep values for k, overriding the config (comma separated).
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        iterations: Option<Vec<usize>>,
        /// Wall-clock CSV; timings vary between runs, so they are kept apart
        /// from the FLOP file.
        #[arg(long)]
        timing_out: Option<PathBuf>,
    },
    /// Write seeded fixture files into the --out directory.
    Fixtures,
}

fn parse_mode(s: &str) -> Result<ModeChoice, String> {
    match s {
        "naive" => Ok(ModeChoice::Naive),
        "simplified" => Ok(ModeChoice::Simplified),
        _ => Err(format!("expected naive or simplified, got {s:?}")),
    }
}

fn parse_anchors(s: &str) -> Result<AnchorChoice, String> {
    match s {
        "A" | "a" => Ok(AnchorChoice::A),
        "B" | "b" => Ok(AnchorChoice::B),
        _ => Err(format!("expected A or B, got {s:?}")),
    }
}

impl Common {
    fn run_config(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(a) = self.anchors {
            cfg.anchor_mode = a;
        }
        if self.no_refine {
            cfg.refine = false;
        }
        if self.top_down_only {
            cfg.enable_bottom_up = false;
        }
        if self.bottom_up_only {
            cfg.enable_top_down = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(p) => write_text(p, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Sibling of `path` with the given extension.
fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.to_path_buf();
    p.set_extension(ext);
    p
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let common = &cli.common;
    let mut cfg = common.run_config()?;
    match cli.command {
        Command::Verify => {
            let report = verify::verify(&cfg)?;
            let text = report.render();
            print!("{text}");
            if let Some(p) = &common.out {
                write_text(p, &text)?;
            }
            if !report.passed() {
                if let Some(l) = report.lines.iter().find(|l| !l.passed(report.tolerance)) {
                    eprintln!(
                        "error: equivalence failed for k={} T={} masks={}{}",
                        l.k,
                        l.iterations,
                        l.masks(),
                        l.first_mismatch
                            .map(|m| format!(" at scale {} iteration {}", m.scale, m.iteration))
                            .unwrap_or_default()
                    );
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Demo { pyramid } => {
            let raw = pyramid.map(|p| PyramidFile::read(&p)?.tensors()).transpose()?;
            let out = demo::demo(&cfg, raw)?;
            common.emit(&to_jsonl(&out.records()))?;
            eprintln!(
                "{} anchors, {} candidates, {} detections",
                out.anchors,
                out.candidates,
                out.detections.len()
            );
        }
        Command::Eval { dets, gt } => {
            let report = evaluate::eval(&read_detections(&dets)?, &read_ground_truth(&gt)?)?;
            let table = evaluate::report_table(&report);
            match &common.out {
                Some(p) => {
                    write_text(p, &evaluate::report_csv(&report))?;
                    write_text(&with_extension(p, "txt"), &table)?;
                    print!("{table}");
                }
                None => print!("{}", evaluate::report_csv(&report)),
            }
        }
        Command::Bench { warmup, reps, batch, parallel, k, iterations, timing_out } => {
            if reps == 0 || batch == 0 {
                return Err(CliError::Validation("--reps and --batch must be at least 1".into()));
            }
            if let Some(k) = k {
                cfg.sweep.k = k;
            }
            if let Some(t) = iterations {
                cfg.sweep.iterations = t;
            }
            cfg.validate()?;
            let outcome = bench::bench(&cfg, &BenchOptions { warmup, reps, batch, parallel })?;
            match &common.out {
                Some(p) => {
                    write_text(p, &outcome.flop_csv())?;
                    print!("{}", outcome.summary());
                }
                None => print!("{}", outcome.flop_csv()),
            }
            if let Some(p) = timing_out {
                write_text(&p, &outcome.timing_csv())?;
            }
        }
        Command::Fixtures => {
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
            let f = fixtures::make_fixtures(&cfg, cfg.seed);
            for p in fixtures::write_fixtures(&f, &dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
