//! Benchmark orchestration: per size, subsample, split 80/20, tune and fit
//! every requested model on the training split, score the test split, and
//! write results.csv / bands.csv / results.json / config_echo.json.

use crate::config::{BenchmarkConfig, DataConfig, Model, RuntimeMode};
use crate::pipeline;
use georent_core::dataset::{self, DesignMatrix, PropertyRecord, SynthConfig};
use georent_core::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub model: String,
    pub n: usize,
    pub metric: String,
    pub scale: String,
    pub value: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandRow {
    pub model: String,
    pub n: usize,
    pub band_low: f64,
    pub band_high: f64,
    pub mape: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelFailure {
    pub model: String,
    pub n: usize,
    pub error: String,
}

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub results: Vec<ResultRow>,
    pub bands: Vec<BandRow>,
    pub tuned: Vec<serde_json::Value>,
    pub failures: Vec<ModelFailure>,
}

fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(salt.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn load_pool(config: &BenchmarkConfig) -> Result<Vec<PropertyRecord>> {
    let max_n = *config.sample_sizes.iter().max().unwrap();
    match &config.data {
        DataConfig::Csv { path } => {
            let report = dataset::load_csv(path)?;
            if report.records.len() < max_n {
                return Err(Error::Capacity(format!(
                    "requested n = {max_n} but {path:?} holds {} usable rows",
                    report.records.len()
                )));
            }
            Ok(report.records)
        }
        DataConfig::Synthetic {
            sigma2,
            phi,
            tau2,
            nonlinear,
        } => {
            let synth = SynthConfig {
                sigma2: *sigma2,
                phi: *phi,
                tau2: *tau2,
                nonlinear: *nonlinear,
                ..SynthConfig::new(max_n)
            };
            dataset::synthesize(&synth, derive_seed(config.seed, 0))
        }
    }
}

/// Keeps the intercept plus every column that varies on the training split;
/// the same column selection is applied to the test split.
fn prune_constant_columns(train: &mut DesignMatrix, test: &mut DesignMatrix) {
    let keep: Vec<usize> = (0..train.x.ncols())
        .filter(|&j| {
            if j == 0 {
                return true;
            }
            let col = train.x.column(j);
            col.max() > col.min()
        })
        .collect();
    if keep.len() == train.x.ncols() {
        return;
    }
    for dm in [train, test] {
        dm.x = nalgebra::DMatrix::from_fn(dm.x.nrows(), keep.len(), |r, c| dm.x[(r, keep[c])]);
        dm.column_names = keep.iter().map(|&j| dm.column_names[j].clone()).collect();
    }
}

fn subsample(pool: &[PropertyRecord], n: usize, seed: u64) -> Vec<PropertyRecord> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx.truncate(n);
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i].clone()).collect()
}

/// Runs the full benchmark and writes all result files under
/// `config.out_dir`. Deterministic given the master seed (runtime column
/// aside, unless `runtime = "zero"`).
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<RunReport> {
    let models = config.validate()?;
    let pool = load_pool(config)?;
    let mut report = RunReport::default();

    for (si, &n) in config.sample_sizes.iter().enumerate() {
        if n > pool.len() {
            return Err(Error::Capacity(format!(
                "sample size {n} exceeds {} available rows",
                pool.len()
            )));
        }
        if n < 10 {
            return Err(Error::Config(format!("sample size {n} too small")));
        }
        let records = subsample(&pool, n, derive_seed(config.seed, 1000 + si as u64));
        let dm = dataset::encode(&records)?;
        let split = dataset::split(n, config.split_ratio, derive_seed(config.seed, 2000 + si as u64))?;
        let mut train = dm.subset(&split.train);
        let mut test = dm.subset(&split.test);
        // at small n some category levels never occur in the training split;
        // drop the resulting constant dummy columns from both splits
        prune_constant_columns(&mut train, &mut test);
        let y_test: Vec<f64> = test.y.iter().copied().collect();

        for (mi, &model) in models.iter().enumerate() {
            let seed = derive_seed(config.seed, (si as u64) << 16 | mi as u64);
            let started = Instant::now();
            match run_one(model, &train, &test, &y_test, config, seed) {
                Ok((metrics, bands, tuned)) => {
                    let runtime = match config.runtime {
                        RuntimeMode::Measured => started.elapsed().as_secs_f64(),
                        RuntimeMode::Zero => 0.0,
                    };
                    push_rows(&mut report, model, n, runtime, &metrics, &bands);
                    report.tuned.push(json!({
                        "model": model.name(),
                        "n": n,
                        "hyperparameters": tuned,
                    }));
                }
                Err(e) => {
                    eprintln!("warning: {model} at n = {n} failed: {e}");
                    report.failures.push(ModelFailure {
                        model: model.name().to_string(),
                        n,
                        error: e.to_string(),
                    });
                }
            }
        }
    }
    write_outputs(config, &report)?;
    Ok(report)
}

type ModelOutput = (
    georent_core::eval::MetricsReport,
    georent_core::eval::BandReport,
    serde_json::Value,
);

fn run_one(
    model: Model,
    train: &DesignMatrix,
    test: &DesignMatrix,
    y_test: &[f64],
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<ModelOutput> {
    let outcome = pipeline::run_model(model, train, test, config, seed)?;
    let (metrics, bands) = pipeline::score(y_test, &outcome.predictions)?;
    Ok((metrics, bands, outcome.tuned))
}

fn push_rows(
    report: &mut RunReport,
    model: Model,
    n: usize,
    runtime_s: f64,
    metrics: &georent_core::eval::MetricsReport,
    bands: &georent_core::eval::BandReport,
) {
    let name = model.name().to_string();
    for (metric, scale, value) in [
        ("mae", "log", metrics.mae),
        ("rmse", "log", metrics.rmse),
        ("mape", "log", metrics.mape_log),
        ("mape", "real", metrics.mape_real),
    ] {
        report.results.push(ResultRow {
            model: name.clone(),
            n,
            metric: metric.to_string(),
            scale: scale.to_string(),
            value,
            runtime_s,
        });
    }
    for band in &bands.bands {
        report.bands.push(BandRow {
            model: name.clone(),
            n,
            band_low: band.low,
            band_high: band.high,
            mape: band.mape,
            count: band.count,
        });
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_outputs(config: &BenchmarkConfig, report: &RunReport) -> Result<()> {
    let out = &config.out_dir;
    std::fs::create_dir_all(out)?;

    let mut results = String::from("model,n,metric,scale,value,runtime_s\n");
    for r in &report.results {
        results.push_str(&format!(
            "{},{},{},{},{},{:.3}\n",
            r.model, r.n, r.metric, r.scale, r.value, r.runtime_s
        ));
    }
    write_atomic(&out.join("results.csv"), results.as_bytes())?;

    let mut bands = String::from("model,n,band_low,band_high,mape,count\n");
    for b in &report.bands {
        bands.push_str(&format!(
            "{},{},{},{},{},{}\n",
            b.model, b.n, b.band_low, b.band_high, b.mape, b.count
        ));
    }
    write_atomic(&out.join("bands.csv"), bands.as_bytes())?;

    let json = serde_json::to_vec_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(&out.join("results.json"), &json)?;

    let echo = serde_json::to_vec_pretty(config).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(&out.join("config_echo.json"), &echo)?;
    Ok(())
}
