use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;
use widthlab_core::harness::{self, ExperimentConfig, RunOutput, Task};

/// Volume, radius and width experiments for norm bodies.
#[derive(Debug, Parser)]
#[command(name = "widthlab", version)]
struct Cli {
    /// expect, volume, radius, widths, verify or scaling.
    task: Task,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output` or the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run every verification check.
    #[arg(long, conflicts_with = "check")]
    all: bool,
    /// Run one verification check by name.
    #[arg(long)]
    check: Option<String>,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("WIDTHLAB_THREADS") {
        let n: usize = v.parse().with_context(|| format!("WIDTHLAB_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("WIDTHLAB_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let c = ExperimentConfig::load(path)?;
            if c.task != cli.task {
                bail!("{}: config task is {}, command line says {}", path.display(), c.task.name(), cli.task.name());
            }
            c
        }
        None if cli.task == Task::Verify && (cli.all || cli.check.is_some()) => ExperimentConfig::for_task(Task::Verify, 0),
        None => bail!("task {} needs --config", cli.task.name()),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.all {
        config.check = Some("all".into());
    } else if let Some(check) = &cli.check {
        config.check = Some(check.clone());
    }
    Ok(config)
}

fn print_summary(out: &RunOutput) {
    if out.task == Task::Verify {
        if let Some(reports) = out.summary["reports"].as_array() {
            for r in reports {
                println!(
                    "{} {:<20} trials={:<3} violations={:<3} worst_margin={}",
                    if r["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                    r["check"].as_str().unwrap_or_default(),
                    r["trials"],
                    r["violations"],
                    r["worst_margin"],
                );
            }
        }
    }
    println!("{}: {}", out.task.name(), if out.pass { "pass" } else { "fail" });
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    let config = load_config(cli)?;
    let out = harness::run(&config)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    out.write(&dir)?;
    print_summary(&out);
    Ok(out.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
