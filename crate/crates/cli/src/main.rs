use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;
use tvopt::output::{log_table, read_csv, render_svg, write_csv, write_meta};
use tvopt::scenario::{parse_scenario, preset, with_overrides};
use tvopt::{check_scenario, integrate, summarize, Error, ScenarioConfig, Summary};

/// Simulate distributed time-varying optimization on multi-agent teams.
#[derive(Parser)]
#[command(name = "tvopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write <name>.csv, <name>.meta.json and <name>.svg.
    Run {
        /// Scenario JSON file, or a preset name (fig1 to fig5).
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print connectivity, gain conditions and certified bounds without running.
    Check {
        #[arg(long)]
        scenario: String,
    },
    /// Re-plot a CSV log as SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every combination of parameter values in parallel.
    Sweep {
        #[arg(long)]
        scenario: String,
        /// Dotted config path and comma-separated values, e.g.
        /// `gains.layer.epsilon=2,1,0.5`. Repeat for a grid.
        #[arg(long = "param", required = true)]
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit codes: 1 for a bad scenario or arguments, 2 for a run that aborted.
enum Failure {
    Invalid(String),
    Aborted(String),
}

impl Failure {
    fn from_run(e: Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Aborted(e.to_string())
        }
    }
}

fn load(arg: &str) -> Result<ScenarioConfig, Failure> {
    let path = Path::new(arg);
    let loaded = match preset(arg) {
        Some(cfg) if !path.exists() => cfg.resolve(),
        _ => parse_scenario(path),
    };
    loaded.map_err(|e| Failure::Invalid(e.to_string()))
}

fn io(e: impl std::fmt::Display) -> Failure {
    Failure::Aborted(e.to_string())
}

fn run_one(cfg: &ScenarioConfig, out: &Path) -> Result<Summary, Failure> {
    let report = check_scenario(cfg).map_err(Failure::from_run)?;
    for w in &report.warnings {
        let tag = if cfg.expect_violation { "expected violation" } else { "warning" };
        eprintln!("{}: {tag}: {w}", cfg.name);
    }
    let log = integrate(cfg).map_err(Failure::from_run)?;
    let summary = summarize(&log, cfg);
    fs::create_dir_all(out).map_err(io)?;
    let table = log_table(&log);
    write_csv(&table, out.join(format!("{}.csv", cfg.name))).map_err(io)?;
    write_meta(out.join(format!("{}.meta.json", cfg.name)), cfg, &report, &summary).map_err(io)?;
    fs::write(out.join(format!("{}.svg", cfg.name)), render_svg(&table, &cfg.name)).map_err(io)?;
    Ok(summary)
}

fn summary_line(name: &str, s: &Summary) -> String {
    format!(
        "{name}: t = {}, tracking {:.3e} (steady max {:.3e}), consensus {:.3e} (steady max {:.3e}), ‖Σ∇f‖ {:.3e}",
        s.t_end,
        s.final_metrics.tracking,
        s.steady_tracking,
        s.final_metrics.consensus_x,
        s.steady_consensus,
        s.final_metrics.grad_sum
    )
}

fn parse_param(spec: &str) -> Result<(String, Vec<Value>), Failure> {
    let (path, values) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Invalid(format!("--param `{spec}` must look like path=v1,v2")))?;
    let values: Vec<Value> = values
        .split(',')
        .filter(|v| !v.is_empty())
        .map(|v| serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string())))
        .collect();
    if values.is_empty() {
        return Err(Failure::Invalid(format!("--param `{spec}` lists no values")));
    }
    Ok((path.to_string(), values))
}

fn label(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn sweep(base: &ScenarioConfig, params: &[String], out: &Path) -> Result<(), Failure> {
    let axes = params.iter().map(|p| parse_param(p)).collect::<Result<Vec<_>, _>>()?;
    let mut grid: Vec<Vec<(String, Value)>> = vec![Vec::new()];
    for (path, values) in &axes {
        grid = grid
            .into_iter()
            .flat_map(|combo| {
                values.iter().map(move |v| {
                    let mut c = combo.clone();
                    c.push((path.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let configs = grid
        .iter()
        .map(|combo| {
            let suffix: Vec<String> = combo
                .iter()
                .map(|(p, v)| format!("{}-{}", p.rsplit('.').next().unwrap_or(p), label(v)))
                .collect();
            let mut changes: Vec<(&str, Value)> = combo.iter().map(|(p, v)| (p.as_str(), v.clone())).collect();
            changes.push(("name", Value::String(format!("{}_{}", base.name, suffix.join("_")))));
            with_overrides(base, changes).map_err(|e| Failure::Invalid(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let results: Vec<_> = configs.par_iter().map(|cfg| run_one(cfg, out)).collect();
    let mut aborted = false;
    for (cfg, r) in configs.iter().zip(results) {
        match r {
            Ok(s) => println!("{}", summary_line(&cfg.name, &s)),
            Err(Failure::Invalid(m) | Failure::Aborted(m)) => {
                aborted = true;
                eprintln!("{}: abort: {m}", cfg.name);
            }
        }
    }
    if aborted {
        Err(Failure::Aborted("one or more sweep runs aborted".into()))
    } else {
        Ok(())
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, out } => {
            let cfg = load(&scenario)?;
            let s = run_one(&cfg, &out)?;
            println!("{}", summary_line(&cfg.name, &s));
        }
        Command::Check { scenario } => {
            let cfg = load(&scenario)?;
            let report = check_scenario(&cfg).map_err(Failure::from_run)?;
            print!("{report}");
        }
        Command::Plot { csv, out } => {
            let table = read_csv(&csv).map_err(|e| Failure::Invalid(e.to_string()))?;
            let title = csv.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            fs::write(&out, render_svg(&table, &title)).map_err(io)?;
        }
        Command::Sweep { scenario, params, out } => {
            let cfg = load(&scenario)?;
            sweep(&cfg, &params, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Aborted(m)) => {
            eprintln!("abort: {m}");
            ExitCode::from(2)
        }
    }
}
