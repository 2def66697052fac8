//! Benchmark harness: seeded sampling, train/test split, per-model tuning
//! and scoring, CSV/JSON reports and SVG charts.

pub mod config;
pub mod pipeline;
pub mod plots;
pub mod run;

pub use config::{BenchmarkConfig, Model};
pub use run::{run_benchmark, RunReport};
