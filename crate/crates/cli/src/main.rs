use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msa_lab::runner::{run_path, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK};
use msa_lab::verify::{verify, Suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "msa-lab", version, about = "Finite-volume multi-scale analysis laboratory")]
struct Cli {
    /// Worker threads for trial execution.
    #[arg(long, global = true, env = "THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a property-verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Randomized instances per check; 0 runs the deterministic checks only.
        #[arg(long, default_value_t = 20)]
        instances: u64,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        /// Override every contraction factor q (negative testing).
        #[arg(long)]
        inject_q: Option<f64>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG as u8) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
        }
    }
    let code = match cli.command {
        Command::Run { config } => run_path(&config),
        Command::Verify { suite, instances, seed_base, inject_q, json } => {
            let report = verify(suite, &VerifyOptions { instances, seed_base, inject_q });
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            } else {
                for s in &report.suites {
                    for c in &s.checks {
                        let status = if c.failed == 0 { "ok" } else { "FAILED" };
                        println!("{:<10} {:<55} {status} ({} passed, {} failed)", s.suite, c.name, c.passed, c.failed);
                        if let Some(f) = &c.first_failure {
                            println!("{:<10}   first failure: {f}", "");
                        }
                    }
                }
                println!("total: {} passed, {} failed", report.passed, report.failed);
            }
            if report.ok() {
                EXIT_OK
            } else {
                EXIT_INVARIANT
            }
        }
    };
    ExitCode::from(code as u8)
}
