use anyhow::Context;
use clap::{Parser, Subcommand};
use georent_cli::config::BenchmarkConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "georent", about = "Spatial rent-prediction benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark described by a TOML config file.
    Run {
        /// Benchmark configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated model filter (subset of the config's models).
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render SVG charts after the run.
        #[arg(long)]
        plots: bool,
    },
    /// Render SVG charts from an existing results directory.
    Plot {
        /// Directory holding results.csv / bands.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            models,
            out,
            plots,
        } => {
            let mut cfg = BenchmarkConfig::from_path(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(models) = models {
                cfg.models = models;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            let report = georent_cli::run_benchmark(&cfg)?;
            println!(
                "wrote {} result rows ({} failures) to {}",
                report.results.len(),
                report.failures.len(),
                cfg.out_dir.display()
            );
            if plots {
                for f in georent_cli::plots::emit_plots(&cfg.out_dir)? {
                    println!("wrote {f}");
                }
            }
        }
        Command::Plot { out } => {
            for f in georent_cli::plots::emit_plots(&out)? {
                println!("wrote {f}");
            }
        }
    }
    Ok(())
}
