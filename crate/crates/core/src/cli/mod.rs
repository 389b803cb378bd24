//! Configuration-driven command-line runner.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! configuration errors, 3 for numerical-domain errors.

pub mod config;
pub mod report;
pub mod schema;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::FpkError;
use config::{RunConfig, Task};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "FPK_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "fpk", version, about = "Evolve, invert and verify solutions of the nonlocal Fokker-Planck equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the task named in the config.
    Run { config: PathBuf },
    /// Run the verification suite for the config, whatever its task.
    Verify { config: PathBuf },
    /// Print the JSON Schema of the config format.
    PrintSchema,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    name: &'static str,
    version: &'static str,
    task: Task,
    config: &'a RunConfig,
    wall_time_s: f64,
}

fn fail(e: &FpkError) -> i32 {
    eprintln!("error[{}]: {e}", e.code());
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Runs one parsed command and returns the process exit code.
pub fn dispatch(cmd: &Command) -> i32 {
    let (path, forced) = match cmd {
        Command::PrintSchema => {
            print!("{}", schema::SCHEMA);
            return EXIT_PASS;
        }
        Command::Run { config } => (config, None),
        Command::Verify { config } => (config, Some(Task::Verify)),
    };
    let started = Instant::now();
    let cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let prep = match cfg.prepare(base) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let task = forced.unwrap_or(cfg.task);
    let outcome = match tasks::execute(&cfg, &prep, task) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };

    let dir = std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| base.join(&cfg.output.dir));
    let meta = RunMeta {
        name: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        task,
        config: &cfg,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let meta_json = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    let writes = std::fs::create_dir_all(&dir)
        .and_then(|_| std::fs::write(dir.join(&cfg.output.snapshots), report::snapshots_csv(&outcome.snapshots)))
        .and_then(|_| std::fs::write(dir.join(&cfg.output.report), outcome.report.to_json()))
        .and_then(|_| std::fs::write(dir.join(&cfg.output.meta), meta_json));
    if let Err(e) = writes {
        return fail(&FpkError::Config(format!("cannot write outputs to {}: {e}", dir.display())));
    }

    for c in &outcome.report.checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        match c.upper {
            Some(hi) => println!("{status} {} = {:e} in [{}, {}]", c.name, c.value, c.tolerance, hi),
            None => println!("{status} {} = {:e} <= {:e}", c.name, c.value, c.tolerance),
        }
    }
    if outcome.report.passed {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
