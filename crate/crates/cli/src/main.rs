mod catalog;
mod config;
mod error;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::catalog::{catalog, render};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "torsionlab", version, about = "Torsion and Witten-deformation experiments on circle models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment named in a TOML config.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, env = "TORSIONLAB_JOBS")]
        jobs: Option<usize>,
        /// Treat validation residuals of the models as errors.
        #[arg(long)]
        strict: bool,
    },
    /// List the experiments.
    List {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { json } => {
            let entries = catalog();
            if json {
                println!("{}", serde_json::to_string_pretty(&entries).expect("catalog serializes"));
            } else {
                print!("{}", render(&entries));
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, jobs, strict } => match run(&config, out.as_deref(), jobs, strict) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(3),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}

/// Returns whether every assertion passed.
fn run(path: &Path, out: Option<&Path>, jobs: Option<usize>, strict: bool) -> Result<bool, CliError> {
    let mut config = ExperimentConfig::load(path)?;
    if strict {
        config.make_strict();
    }
    if let Some(dir) = out {
        config.output.dir = dir.to_path_buf();
    }
    config.validate()?;
    if let Some(n) = jobs.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Runtime(e.to_string()))?;
    }

    let name = config.experiment.name();
    let start = std::time::Instant::now();
    let outcome = experiments::run(&config).map_err(|source| CliError::Experiment { experiment: name.into(), source })?;
    let total = start.elapsed().as_secs_f64();

    let passed = outcome.assertions.iter().all(|a| a.passed);
    let report = json!({
        "experiment": name,
        "criterion": config.experiment.criterion(),
        "config": config,
        "results": outcome.results,
        "assertions": outcome.assertions,
        "passed": passed,
    });
    let dir = &config.output.dir;
    let json_text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    write_atomic(&dir.join(format!("{name}.json")), json_text.as_bytes())?;
    for table in &outcome.tables {
        write_atomic(&dir.join(format!("{}.csv", table.name)), table.to_csv().as_bytes())?;
    }
    let stages: serde_json::Map<String, serde_json::Value> = outcome.stages.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let timings = json!({ "total_seconds": total, "stages": stages });
    write_atomic(&dir.join(format!("{name}.timings.json")), (timings.to_string() + "\n").as_bytes())?;

    for a in &outcome.assertions {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    println!("{name} (criterion {}): {} in {total:.1}s, reports in {}", config.experiment.criterion(), if passed { "passed" } else { "failed" }, dir.display());
    Ok(passed)
}
