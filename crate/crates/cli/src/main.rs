use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use pentomo::fsio::{read_json, write_json};
use pentomo::wigner_out::{wigner_blocks, write_wigner};
use pentomo::{
    compare, reconstruct, simulate, RecordSet, ReportDoc, TomographyConfig, PAPER_SCALE_EVENTS,
};
use pentomo_core::measurement::RngSpec;
use pentomo_core::wigner::GridSpec;

#[derive(Parser)]
#[command(
    name = "pentomo",
    version,
    about = "Phase-swept displacement tomography of an entangled cyclotron/spin state"
)]
struct Cli {
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long, global = true, env = "PENTOMO_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the measurement records of a config into `<out>/records`.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write analytic probabilities instead of Monte-Carlo counts.
        #[arg(long)]
        exact: bool,
        /// 10^6 events per phase.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long, default_value_t = 0)]
        replicate: u32,
    },
    /// Reconstruct `<out>/report.json` from a record directory.
    Reconstruct {
        /// Defaults to `<out>/records`.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Evaluate the Wigner-function matrix of a report into `<out>/wigner`.
    Wigner {
        /// Defaults to `<out>/report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Half width of the square grid.
        #[arg(long, default_value_t = 4.0)]
        extent: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 81)]
        points: usize,
    },
    /// Compare a report with the true state of a config; exit code 1 if a
    /// tolerance fails.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `<out>/report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<&Path>, config: Option<&TomographyConfig>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let start = Instant::now();
    let out_flag = cli.out.as_deref();
    let pass = match cli.command {
        Command::Simulate {
            config,
            seed,
            exact,
            paper_scale,
            replicate,
        } => {
            let mut cfg = TomographyConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cfg.exact_mode |= exact;
            if paper_scale {
                cfg.events_per_phase = PAPER_SCALE_EVENTS;
                cfg.pulse_events = None;
            }
            let out = out_dir(out_flag, Some(&cfg));
            let records = simulate(&cfg, RngSpec::new(cfg.seed).with_replicate(replicate))?;
            let dir = out.join("records");
            records.write(&dir)?;
            eprintln!(
                "simulate: {} phase files, {} pulse files in {}",
                records.phases.len(),
                records.pulses.len(),
                dir.display()
            );
            true
        }
        Command::Reconstruct { records } => {
            let out = out_dir(out_flag, None);
            let dir = records.unwrap_or_else(|| out.join("records"));
            let set = RecordSet::read(&dir)?;
            let report = reconstruct(&set)?;
            let path = out.join("report.json");
            write_json(&path, &ReportDoc::new(&report, &set.config))?;
            eprintln!("reconstruct: wrote {}", path.display());
            true
        }
        Command::Wigner {
            report,
            extent,
            points,
        } => {
            let out = out_dir(out_flag, None);
            let path = report.unwrap_or_else(|| out.join("report.json"));
            let doc: ReportDoc = read_json(&path)?;
            let spec = GridSpec::square(extent, points);
            let grids = wigner_blocks(&doc, &spec).context("wigner grid")?;
            let dir = out.join("wigner");
            let meta = write_wigner(&dir, &grids)?;
            for b in &meta.blocks {
                eprintln!(
                    "wigner: {} min {:.4} integral {:.6}",
                    b.name, b.min_re, b.integral_re
                );
            }
            true
        }
        Command::Report { config, report } => {
            let cfg = TomographyConfig::load(&config)?;
            let out = out_dir(out_flag, Some(&cfg));
            let path = report.unwrap_or_else(|| out.join("report.json"));
            let doc: ReportDoc = read_json(&path)?;
            let cmp = compare(&doc, &cfg)?;
            write_json(&out.join("comparison.json"), &cmp)?;
            for c in &cmp.checks {
                eprintln!(
                    "{} {}: {:.3e} (limit {:.3e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.limit
                );
            }
            cmp.pass
        }
    };
    eprintln!("runtime: {:.3} s", start.elapsed().as_secs_f64());
    Ok(pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
