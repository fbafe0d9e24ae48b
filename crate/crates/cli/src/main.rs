//! Command-line driver: mesh construction, basis extraction, solves, the
//! verification suites, and report aggregation.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or config error,
//! 3 numerical failure.

mod config;
mod report;
mod suites;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use config::RunConfig;
use suites::SuiteReport;

#[derive(Parser)]
#[command(name = "hit3", about = "Numerical verification suites on the Bolza surface")]
struct Cli {
    /// Path to a key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Mesh refinement level (overrides the config).
    #[arg(long, global = true)]
    level: Option<u32>,
    /// Output directory for run reports (overrides config and HIT3_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the triangulated surface and run the mesh checks.
    MeshBuild,
    /// Extract the holomorphic bases and run the dimension checks.
    Basis,
    /// Run the scalar solver suite.
    Solve,
    /// Run the connection suite (curvature and holonomy oracles).
    Holonomy,
    /// Run the signature suite at the hyperbolic base point.
    Signature,
    /// Run every suite in order and write one report per suite.
    VerifyAll,
    /// Summarize existing run reports and emit CSV tables.
    Report,
}

fn load_config(cli: &Cli) -> Result<RunConfig, config::ConfigParseError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config::ConfigParseError(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var("HIT3_OUT") {
        cfg.out_dir = PathBuf::from(dir);
    }
    if let Some(level) = cli.level {
        cfg.level = level;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reports are append-only: each invocation gets a fresh run-NNNN directory.
fn new_run_dir(out_dir: &Path) -> std::io::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let mut next = 1usize;
    for entry in fs::read_dir(out_dir)? {
        let name = entry?.file_name();
        if let Some(n) = name
            .to_str()
            .and_then(|s| s.strip_prefix("run-"))
            .and_then(|s| s.parse::<usize>().ok())
        {
            next = next.max(n + 1);
        }
    }
    let dir = out_dir.join(format!("run-{next:04}"));
    fs::create_dir(&dir)?;
    Ok(dir)
}

fn write_report(dir: &Path, cfg: &RunConfig, suite: &SuiteReport) -> std::io::Result<()> {
    // The timestamp lives alone on the first line so the rest of the file
    // is byte-identical across reruns with the same config and seed.
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut text = format!("timestamp {ts}\n");
    text.push_str(&suite.body);
    text.push_str("config\n");
    text.push_str(&cfg.to_string());
    fs::write(dir.join(format!("{}.txt", suite.name)), text)
}

fn run_suites(
    cfg: &RunConfig,
    which: &[fn(&RunConfig) -> hit3_core::error::Result<SuiteReport>],
) -> Result<ExitCode, String> {
    let run_dir = new_run_dir(&cfg.out_dir).map_err(|e| format!("cannot create run dir: {e}"))?;
    let mut failed = 0usize;
    for suite_fn in which {
        let suite = suite_fn(cfg).map_err(|e| format!("numerical failure: {e}"))?;
        write_report(&run_dir, cfg, &suite)
            .map_err(|e| format!("cannot write report: {e}"))?;
        for line in suite.body.lines() {
            if line.starts_with("check ") {
                println!("{line}");
            }
        }
        println!(
            "suite {}: {}",
            suite.name,
            if suite.failed == 0 {
                "all checks passed".to_string()
            } else {
                format!("{} check(s) FAILED", suite.failed)
            }
        );
        failed += suite.failed;
    }
    println!("reports in {}", run_dir.display());
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Command::Report = cli.command {
        let out_dir = match load_config(&cli) {
            Ok(cfg) => cfg.out_dir,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        };
        return match report::summarize(&out_dir) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        };
    }

    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    let suites: Vec<fn(&RunConfig) -> hit3_core::error::Result<SuiteReport>> = match cli.command {
        Command::MeshBuild => vec![suites::mesh_suite],
        Command::Basis => vec![suites::basis_suite],
        Command::Solve => vec![suites::solver_suite],
        Command::Holonomy => vec![suites::connection_suite],
        Command::Signature => vec![suites::fuchsian_suite],
        Command::VerifyAll => vec![
            suites::mesh_suite,
            suites::basis_suite,
            suites::fuchsian_suite,
            suites::solver_suite,
            suites::connection_suite,
            suites::goldman_suite,
        ],
        Command::Report => unreachable!(),
    };

    match run_suites(&cfg, &suites) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}
