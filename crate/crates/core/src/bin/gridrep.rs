// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gridrep::config::SimConfig;
use gridrep::golden::run_golden;
use gridrep::sim::{compare_strategies, run_simulation, write_outputs};
use gridrep::strategy::StrategyKind;
use gridrep::Error;

#[derive(Parser)]
#[command(name = "gridrep", version, about = "Multi-tier data grid replication simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy and write metrics and logs.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<StrategyKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        intervals: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several strategies over one request stream.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        strategies: Vec<StrategyKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        intervals: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the worked example.
    Golden,
}

fn load(path: Option<&PathBuf>, seed: Option<u64>, intervals: Option<u32>) -> gridrep::Result<SimConfig> {
    let mut cfg = match path {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = intervals {
        cfg.intervals = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    if err.is_config() {
        ExitCode::from(1)
    } else {
        ExitCode::from(3)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, strategy, seed, intervals, out } => {
            let mut cfg = match load(config.as_ref(), seed, intervals) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if let Some(s) = strategy {
                cfg.strategy = s;
            }
            let result = run_simulation(&cfg).and_then(|run| {
                write_outputs(&out, &cfg, &run)?;
                Ok(run)
            });
            match result {
                Ok(run) => {
                    let r = &run.runs[0].report;
                    println!(
                        "{}: avg_replica_usage {:.4}, mean_hops {:.4}, replicas_created {}",
                        cfg.strategy,
                        r.avg_replica_usage(),
                        r.overall_mean_hops(),
                        r.last().map_or(0, |m| m.cum_replicas_created)
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Compare { config, strategies, seed, intervals, out } => {
            let cfg = match load(config.as_ref(), seed, intervals) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let result = compare_strategies(&cfg, &strategies).and_then(|run| {
                write_outputs(&out, &cfg, &run)?;
                Ok(run)
            });
            match result {
                Ok(run) => {
                    println!("{:<18} {:>18} {:>10} {:>10}", "strategy", "avg_replica_usage", "mean_hops", "created");
                    for r in &run.runs {
                        println!(
                            "{:<18} {:>18.4} {:>10.4} {:>10}",
                            r.strategy.name(),
                            r.report.avg_replica_usage(),
                            r.report.overall_mean_hops(),
                            r.report.last().map_or(0, |m| m.cum_replicas_created)
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Golden => match run_golden() {
            Ok(cases) => {
                let mut ok = true;
                for c in &cases {
                    println!("{} {} ({}, {:?})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail, c.elapsed);
                    ok &= c.passed;
                }
                if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
