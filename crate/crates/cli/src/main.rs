use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use holovol_core::constants::constants_for;
use holovol_core::harness::{self, emit, load_scenario, run_scenario, Format, RunOptions};
use holovol_core::normalization::check_lemma;

/// Certified volume-element and Bergman-kernel estimates on convex and
/// C-convex domains.
#[derive(Parser)]
#[command(name = "holovol", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// CSV of the radial sweep, if the scenario defines one.
        #[arg(long)]
        sweep_csv: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the dimension constants in exact and decimal form.
    Constants {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=64))]
        n: u64,
        #[arg(long)]
        json: bool,
    },
    /// Test the ball inclusion on random admissible lower-triangular matrices.
    CheckLemma {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=16))]
        n: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Outcome {
    Clean,
    Violations,
}

fn run(cli: Cli) -> Result<Outcome, String> {
    match cli.command {
        Command::Run {
            config,
            out,
            csv,
            sweep_csv,
            workers,
            seed,
        } => {
            let scenario = load_scenario(&config).map_err(|e| e.to_string())?;
            log::info!("running scenario '{}'", scenario.id);
            let report = run_scenario(&scenario, &RunOptions { workers, seed }).map_err(|e| e.to_string())?;
            emit(&report, Format::Json, &out).map_err(|e| e.to_string())?;
            if let Some(path) = csv {
                emit(&report, Format::Csv, &path).map_err(|e| e.to_string())?;
            }
            if let Some(path) = sweep_csv {
                let file = std::fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                harness::write_sweep_csv(&report, file).map_err(|e| e.to_string())?;
            }
            let s = &report.summary;
            println!(
                "{}: {} points, {} failures, {} errors, {} ms",
                report.id,
                s.points,
                s.failures.len(),
                s.errors,
                s.runtime_ms
            );
            for f in &s.failures {
                println!(
                    "  FAIL point {} {} margin {:?} {}",
                    f.index,
                    f.check.as_str(),
                    f.margin,
                    f.detail.as_deref().unwrap_or("")
                );
            }
            if !s.failures.is_empty() {
                Ok(Outcome::Violations)
            } else if s.errors > 0 {
                Err(format!("{} points stopped with errors", s.errors))
            } else {
                Ok(Outcome::Clean)
            }
        }
        Command::Constants { n, json } => {
            let constants = constants_for(n);
            if json {
                println!("{}", serde_json::to_string_pretty(&constants).map_err(|e| e.to_string())?);
            } else {
                println!("n = {n}");
                for c in &constants {
                    println!("{:<24} = {:<28} ~ {:.12e}   {}", c.key, c.exact, c.value, c.description);
                }
            }
            Ok(Outcome::Clean)
        }
        Command::CheckLemma { n, trials, points, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = check_lemma(&mut rng, n as usize, trials, points);
            println!(
                "n = {}: {} matrices x {} points, max l1 = {:.9}, max beta ratio = {:.9}, violations: l1 {} beta {}",
                r.n, r.trials, r.points_per_trial, r.max_l1, r.max_beta_ratio, r.l1_violations, r.beta_violations
            );
            Ok(if r.passed() { Outcome::Clean } else { Outcome::Violations })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HOLOVOL_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
