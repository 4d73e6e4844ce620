use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use irl_tracker::harness::{
    load_config, metrics_from_dir, run_experiment, write_outputs, ControllerKind, ExperimentConfig,
    JointMetrics,
};

#[derive(Parser)]
#[command(
    name = "irl-tracker",
    version,
    about = "Run and evaluate joint tracking experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its logs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's controller.
        #[arg(long, value_enum)]
        controller: Option<ControllerKind>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute metrics from a run directory.
    Metrics {
        #[arg(long)]
        log: PathBuf,
    },
    /// Run every config matching a glob, in parallel, one directory each.
    Sweep {
        #[arg(long)]
        configs: String,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        #[arg(long, value_enum)]
        controller: Option<ControllerKind>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn print_metrics(ms: &[JointMetrics]) {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    println!(
        "{:<8} {:>5} {:>10} {:>10} {:>12} {:>12} {:>10}",
        "ctrl", "joint", "overshoot%", "settle_s", "rms_deg", "final20_deg", "status"
    );
    for m in ms {
        println!(
            "{:<8} {:>5} {:>10} {:>10} {:>12.4} {:>12.4} {:>10}",
            m.controller,
            m.joint,
            opt(m.overshoot_pct),
            opt(m.settling_s),
            m.rms_rad.to_degrees(),
            m.final20_max_abs_rad.to_degrees(),
            m.status
        );
    }
}

/// Runs one config; returns the abort reason, if any.
fn run_one(
    cfg: &ExperimentConfig,
    controller: Option<ControllerKind>,
    seed: Option<u64>,
    out: &Path,
) -> anyhow::Result<(Vec<JointMetrics>, Option<String>)> {
    let exp = cfg.validate()?;
    let ctrl = controller.unwrap_or(cfg.controller);
    let seed = seed.unwrap_or(cfg.seed);
    let result = run_experiment(&exp, ctrl, seed)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    write_outputs(out, cfg, &result)
        .with_context(|| format!("writing logs to {}", out.display()))?;
    Ok((result.metrics.clone(), result.abort_reason()))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Run {
            config,
            controller,
            seed,
            out,
        } => {
            let cfg =
                load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            let (ms, abort) = run_one(&cfg, controller, seed, &out)?;
            print_metrics(&ms);
            if let Some(reason) = abort {
                eprintln!("aborted: {reason}");
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Metrics { log } => {
            let ms =
                metrics_from_dir(&log).with_context(|| format!("reading {}", log.display()))?;
            print_metrics(&ms);
        }
        Cmd::Sweep {
            configs,
            out,
            controller,
            seed,
        } => {
            let mut paths: Vec<PathBuf> = glob::glob(&configs)
                .with_context(|| format!("bad glob {configs}"))?
                .collect::<Result<_, _>>()?;
            paths.sort();
            if paths.is_empty() {
                bail!("no configs match {configs}");
            }
            let mut jobs = Vec::new();
            for p in &paths {
                let cfg = load_config(p).with_context(|| format!("loading {}", p.display()))?;
                let stem = p
                    .file_stem()
                    .map_or("run".into(), |s| s.to_string_lossy().into_owned());
                jobs.push((cfg, out.join(stem)));
            }
            let results: Vec<_> = std::thread::scope(|s| {
                let handles: Vec<_> = jobs
                    .iter()
                    .map(|(cfg, dir)| s.spawn(move || run_one(cfg, controller, seed, dir)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
            let mut failed = false;
            for ((_, dir), res) in jobs.iter().zip(results) {
                println!("== {}", dir.display());
                match res {
                    Ok((ms, abort)) => {
                        print_metrics(&ms);
                        if let Some(reason) = abort {
                            eprintln!("aborted: {reason}");
                            failed = true;
                        }
                    }
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        failed = true;
                    }
                }
            }
            if failed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
