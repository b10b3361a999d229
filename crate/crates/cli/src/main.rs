use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use sstml_cli::bench::{run_timing_benchmark, write_timing_csv, BenchConfig};
use sstml_cli::config::ExperimentConfig;
use sstml_cli::plot::emit_plot;
use sstml_cli::results::{build_rank_report, write_rank_report, Manifest};
use sstml_cli::runner::run_experiment;
use sstml_cli::{resolve_threads, CliError, Result, THREADS_ENV};

#[derive(Debug, Parser)]
#[command(name = "sstml", version, about = "Streaming tabular-to-image benchmark workbench")]
struct Cli {
    /// Worker threads for the run grid; overrides the config and SSTML_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (stream, method, seed) triple of an experiment config.
    Run { config: PathBuf },
    /// Draw smoothed BAC curves from a results directory.
    Plot {
        results_dir: PathBuf,
        #[arg(long)]
        sigma: f64,
        /// Only this stream id.
        #[arg(long)]
        stream: Option<String>,
        /// Where to write the SVG files; defaults to the results directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Recompute the rank report of a results directory.
    Ranks {
        results_dir: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Per-chunk timing over a feature-count grid.
    Bench {
        config: PathBuf,
        /// Overrides the output path from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    let env = std::env::var(THREADS_ENV).ok();
    match cli.command {
        Command::Run { config } => {
            let (cfg, bytes) = ExperimentConfig::load(&config)?;
            let threads = resolve_threads(cli.threads, cfg.threads, env.as_deref())?;
            let s = run_experiment(&cfg, &bytes, threads)?;
            if s.failed > 0 {
                return Err(CliError::RunsFailed {
                    failed: s.failed,
                    total: s.failed + s.succeeded,
                });
            }
            Ok(json!({
                "command": "run",
                "output_dir": s.output_dir,
                "manifest": s.manifest,
                "ranks": s.ranks,
                "runs": s.succeeded,
                "threads": threads,
            }))
        }
        Command::Plot {
            results_dir,
            sigma,
            stream,
            out_dir,
        } => {
            let files = emit_plot(&results_dir, sigma, out_dir.as_deref(), stream.as_deref())?;
            Ok(json!({ "command": "plot", "files": files }))
        }
        Command::Ranks { results_dir, alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {alpha}")));
            }
            let manifest = Manifest::read(&results_dir)?;
            let report = build_rank_report(&results_dir, &manifest, alpha)?;
            let path = write_rank_report(&results_dir, &report)?;
            Ok(json!({
                "command": "ranks",
                "file": path,
                "status": report.status,
                "methods": report.methods,
                "average_ranks": report.average_ranks,
                "inferior": report.inferior,
            }))
        }
        Command::Bench { config, output } => {
            let mut cfg = BenchConfig::load(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            let rows = run_timing_benchmark(&cfg)?;
            write_timing_csv(&cfg.output, &rows)?;
            Ok(json!({ "command": "bench", "file": cfg.output, "rows": rows.len() }))
        }
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "status": "error", "kind": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail("usage", first, 2);
        }
    };
    match execute(cli) {
        Ok(v) => {
            let mut v = v;
            v["status"] = json!("ok");
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), &e.to_string(), e.exit_code() as u8),
    }
}
