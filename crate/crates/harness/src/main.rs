use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swarmsec_harness::export::export_plotdata;
use swarmsec_harness::{load_config, parse_config, run, HarnessError, Result};

#[derive(Parser)]
#[command(name = "swarmsec", version, about = "UAV-swarm secure downlink: training and evaluation campaigns")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides any key by dotted path, e.g. `--set scenario.n_uavs=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Train agents, then evaluate the learned policy.
    Train(RunArgs),
    /// Evaluate a saved policy or the random baseline.
    Eval(RunArgs),
    /// Train and evaluate once per swarm size in `run.sweep_n_uavs`.
    Sweep(RunArgs),
    /// Write plot tables for an existing run directory.
    Export {
        /// Run output directory.
        #[arg(long)]
        out: PathBuf,
        /// Moving-average window of the convergence curve.
        #[arg(long, default_value_t = 20)]
        window: usize,
    },
}

fn execute(args: RunArgs, mode: &str) -> Result<()> {
    let mut overrides = args.set;
    overrides.push(format!("run.mode=\"{mode}\""));
    if let Some(s) = args.seed {
        overrides.push(format!("run.seed={s}"));
    }
    if let Some(o) = args.out {
        let o = toml::Value::String(o.display().to_string());
        overrides.push(format!("run.out_dir={o}"));
    }
    let cfg = match &args.config {
        Some(p) => load_config(p, &overrides)?,
        None => parse_config("", &overrides)?,
    };
    let m = run(&cfg)?;
    println!("{} {} -> {}", m.run_id, m.config_hash, cfg.run.out_dir.display());
    if let Some(e) = &m.evaluation {
        println!(
            "reward {:.4} ± {:.4}  secrecy {:.4} Mbit/s  energy {:.3} kJ  sll {:.3}",
            e.reward.mean, e.reward.stderr, e.secrecy_mbps.mean, e.energy_kj.mean, e.max_sll.mean
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.verb {
        Verb::Train(a) => execute(a, "train"),
        Verb::Eval(a) => execute(a, "eval"),
        Verb::Sweep(a) => execute(a, "sweep"),
        Verb::Export { out, window } => {
            if window == 0 {
                Err(HarnessError::Config("--window must be >= 1".into()))
            } else {
                export_plotdata(&out, window).map(|files| {
                    for f in files {
                        println!("{}", f.display());
                    }
                })
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swarmsec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
