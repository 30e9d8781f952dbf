use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ibac::analysis::{bench_verification, model_mu, BenchRow, ServiceModelParams};
use ibac::harness::{resolve_scenario, run_scenario, HarnessError, RunOptions, BUNDLED};

#[derive(Parser)]
#[command(
    name = "ibac",
    version,
    about = "Interest-based access control simulator and analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or bundled scenario and write its outputs.
    Run {
        scenario: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; results go to <out>/<scenario name>.
        #[arg(long, env = "IBAC_OUT_DIR", default_value = "ibac-out")]
        out: PathBuf,
        /// Run independent sweep points in parallel.
        #[arg(long)]
        parallel: bool,
    },
    /// Check a scenario and list every problem found.
    Validate { scenario: String },
    /// List the bundled scenarios.
    List,
    /// Time individual against batch signature verification.
    Bench {
        #[arg(long = "key-bits", default_values_t = [1024u32])]
        key_bits: Vec<u32>,
        #[arg(long = "batch", default_values_t = [10usize])]
        batch: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Bytes of each signed message.
        #[arg(long = "sig-size", default_value_t = 512 * 1024)]
        sig_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write bench.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the analytic service rate.
    ModelMu {
        /// Fractions of protected interests; defaults to 0, 0.1, ..., 1.
        #[arg(long)]
        delta: Vec<f64>,
        #[arg(long = "tau-process", default_value_t = 0.005)]
        tau_process: f64,
        #[arg(long = "tau-verify", default_value_t = 0.599)]
        tau_verify: f64,
        /// Arrival rate to compare against.
        #[arg(long)]
        lambda: Option<f64>,
    },
}

fn fail(e: HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            seed,
            out,
            parallel,
        } => {
            let mut cfg = match resolve_scenario(&scenario) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out.join(&cfg.name);
            match run_scenario(&cfg, Some(&dir), RunOptions { parallel }) {
                Ok(r) => {
                    let s = &r.summary;
                    println!("scenario {} (seed {})", s.scenario, s.seed);
                    println!(
                        "  injected {}  served {}  fetches ok {} failed {}  in flight {}",
                        s.injected, s.served, s.fetch_successes, s.fetch_failures, s.in_flight
                    );
                    println!(
                        "  producer interests {}  cache hits {}",
                        s.producer_interests, s.cache_hits
                    );
                    for (reason, n) in &s.dropped {
                        println!("  dropped {reason}: {n}");
                    }
                    for (kind, n) in &s.attack_success {
                        println!("  attack {kind}: {n} delivered");
                    }
                    for p in &s.sweep {
                        println!(
                            "  delta {:.2}  lambda {:.3}  mu_model {:.3}  mu_measured {:.3}  error {:.1}%",
                            p.delta,
                            p.lambda,
                            p.mu_model,
                            p.mu_measured,
                            100.0 * p.relative_error
                        );
                    }
                    println!("  outputs in {}", dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { scenario } => match resolve_scenario(&scenario) {
            Ok(cfg) => {
                println!("{}: ok", cfg.name);
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::List => {
            for (name, _) in BUNDLED {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Bench {
            key_bits,
            batch,
            trials,
            sig_size,
            seed,
            out,
        } => {
            let mut rows: Vec<BenchRow> = Vec::new();
            println!("key_size  batch_size  sig_size  t_individual  t_batch  improvement_pct");
            for &k in &key_bits {
                for &b in &batch {
                    match bench_verification(k, b, sig_size, trials, seed) {
                        Ok(r) => {
                            println!(
                                "{:>8}  {:>10}  {:>8}  {:>12.6}  {:>7.6}  {:>15.1}",
                                r.key_size,
                                r.batch_size,
                                r.sig_size,
                                r.t_individual,
                                r.t_batch,
                                r.improvement_pct
                            );
                            rows.push(r);
                        }
                        Err(e) => {
                            eprintln!("error: {e}");
                            return ExitCode::from(2);
                        }
                    }
                }
            }
            if let Some(dir) = out {
                let path = dir.join("bench.csv");
                let written = std::fs::create_dir_all(&dir)
                    .map_err(|e| e.to_string())
                    .and_then(|_| {
                        let mut w = csv::Writer::from_path(&path).map_err(|e| e.to_string())?;
                        for r in &rows {
                            w.serialize(r).map_err(|e| e.to_string())?;
                        }
                        w.flush().map_err(|e| e.to_string())
                    });
                if let Err(e) = written {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Command::ModelMu {
            delta,
            tau_process,
            tau_verify,
            lambda,
        } => {
            let deltas = if delta.is_empty() {
                (0..=10).map(|i| i as f64 / 10.0).collect()
            } else {
                delta
            };
            for d in deltas {
                match model_mu(&ServiceModelParams {
                    delta: d,
                    tau_process,
                    tau_verify,
                }) {
                    Ok(mu) => match lambda {
                        Some(l) => {
                            let verdict = if l < mu { "stable" } else { "unstable" };
                            println!("delta {d}  mu {mu}  lambda {l}  {verdict}");
                        }
                        None => println!("delta {d}  mu {mu}"),
                    },
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::SUCCESS
        }
    }
}
