//! Error measures (MAE, RMSE, MAPE on log and real scale), price-band
//! breakdowns, and the k-fold cross-validation engine shared by the tuners.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// MAE / RMSE / MAPE evaluated on the log scale, plus real-scale MAPE
/// (back-transformed by exponentiation).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub rmse: f64,
    pub mape_log: f64,
    /// MAPE in percent on the yen scale. MAE/RMSE stay on the log scale: on
    /// the skewed real scale they are dominated by the largest observations.
    pub mape_real: f64,
    pub m: usize,
}

/// Direct MAE / RMSE / MAPE over one pair of vectors, on whatever scale the
/// inputs carry. MAPE is in percent; zero targets are rejected.
pub fn point_metrics(y: &[f64], yhat: &[f64]) -> Result<(f64, f64, f64)> {
    if y.is_empty() || y.len() != yhat.len() {
        return Err(Error::Schema(format!(
            "metric inputs must be equal nonzero lengths (got {} and {})",
            y.len(),
            yhat.len()
        )));
    }
    let m = y.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut pct_sum = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        if *a == 0.0 {
            return Err(Error::InvalidInput(
                "zero target in MAPE denominator".into(),
            ));
        }
        let e = a - b;
        abs_sum += e.abs();
        sq_sum += e * e;
        pct_sum += (e / a).abs();
    }
    Ok((abs_sum / m, (sq_sum / m).sqrt(), 100.0 * pct_sum / m))
}

/// Full report for log-scale observations and predictions.
pub fn metrics(y_log: &[f64], yhat_log: &[f64]) -> Result<MetricsReport> {
    let (mae, rmse, mape_log) = point_metrics(y_log, yhat_log)?;
    let y_real: Vec<f64> = y_log.iter().map(|v| v.exp()).collect();
    let yhat_real: Vec<f64> = yhat_log.iter().map(|v| v.exp()).collect();
    let (_, _, mape_real) = point_metrics(&y_real, &yhat_real)?;
    Ok(MetricsReport {
        mae,
        rmse,
        mape_log,
        mape_real,
        m: y_log.len(),
    })
}

/// One price band: [low, high) on the log-rent axis (the last band includes
/// its upper edge). Empty bands are absent from the report.
#[derive(Debug, Clone, Serialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
    pub mape: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandReport {
    pub edges: Vec<f64>,
    pub bands: Vec<Band>,
}

/// Per-band MAPE over half-open bands defined by strictly increasing edges.
pub fn band_mape(y: &[f64], yhat: &[f64], edges: &[f64]) -> Result<BandReport> {
    if y.is_empty() || y.len() != yhat.len() {
        return Err(Error::Schema("band inputs must align".into()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "edges must be strictly increasing with at least 2 entries".into(),
        ));
    }
    let n_bands = edges.len() - 1;
    let mut sums = vec![(0.0f64, 0usize); n_bands];
    for (a, b) in y.iter().zip(yhat) {
        if *a == 0.0 {
            return Err(Error::InvalidInput(
                "zero target in MAPE denominator".into(),
            ));
        }
        let band = if *a == edges[n_bands] {
            n_bands - 1
        } else if *a >= edges[0] && *a < edges[n_bands] {
            edges[..n_bands].partition_point(|e| *e <= *a) - 1
        } else {
            return Err(Error::Coverage(format!(
                "observation {a} outside band edges [{}, {}]",
                edges[0], edges[n_bands]
            )));
        };
        sums[band].0 += ((a - b) / a).abs();
        sums[band].1 += 1;
    }
    let bands = sums
        .into_iter()
        .enumerate()
        .filter(|(_, (_, count))| *count > 0)
        .map(|(i, (sum, count))| Band {
            low: edges[i],
            high: edges[i + 1],
            mape: 100.0 * sum / count as f64,
            count,
        })
        .collect();
    Ok(BandReport {
        edges: edges.to_vec(),
        bands,
    })
}

/// Decile edges of the observed values, slightly widened so every
/// observation is covered; used as the default band layout.
pub fn decile_edges(y: &[f64]) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::InvalidInput("no observations".into()));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut edges = vec![sorted[0]];
    for d in 1..10 {
        let q = sorted[(d * n / 10).min(n - 1)];
        if q > *edges.last().unwrap() {
            edges.push(q);
        }
    }
    let top = sorted[n - 1];
    if top > *edges.last().unwrap() {
        edges.push(top);
    } else {
        edges.push(*edges.last().unwrap() + 1e-9);
    }
    Ok(edges)
}

/// Seeded partition of {0..n-1} into K folds of near-equal size.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidInput(format!(
            "folds must satisfy 2 <= K <= n (K = {k}, n = {n})"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut cursor = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = idx[cursor..cursor + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        cursor += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, Serialize)]
pub struct CvOutcome {
    pub mean: f64,
    pub per_fold: Vec<f64>,
}

/// Scoring metric for cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMetric {
    Rmse,
    Mae,
    Mse,
}

impl CvMetric {
    pub fn score(&self, y: &[f64], yhat: &[f64]) -> Result<f64> {
        if y.is_empty() || y.len() != yhat.len() {
            return Err(Error::Schema("score inputs must align".into()));
        }
        let m = y.len() as f64;
        Ok(match self {
            CvMetric::Mae => {
                y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / m
            }
            CvMetric::Rmse => {
                (y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m).sqrt()
            }
            CvMetric::Mse => {
                y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m
            }
        })
    }
}

/// Generic CV engine: `fit_predict(train_idx, test_idx)` returns held-out
/// predictions aligned with `test_idx`. Spatial features must be rebuilt
/// inside the closure from the training indices only.
pub fn cv_score<F>(fit_predict: F, y: &[f64], folds: &[Vec<usize>], metric: CvMetric) -> Result<CvOutcome>
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<f64>>,
{
    if folds.is_empty() {
        return Err(Error::InvalidInput("no folds".into()));
    }
    let n = y.len();
    let mut per_fold = Vec::with_capacity(folds.len());
    for (fi, fold) in folds.iter().enumerate() {
        let mut in_fold = vec![false; n];
        for &i in fold {
            in_fold[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
        let preds = fit_predict(&train, fold).map_err(|e| {
            Error::Config(format!("fold {fi}: {e}"))
        })?;
        if preds.len() != fold.len() {
            return Err(Error::Schema(format!(
                "fold {fi}: expected {} predictions, got {}",
                fold.len(),
                preds.len()
            )));
        }
        let truth: Vec<f64> = fold.iter().map(|&i| y[i]).collect();
        per_fold.push(metric.score(&truth, &preds)?);
    }
    let mean = per_fold.iter().sum::<f64>() / per_fold.len() as f64;
    Ok(CvOutcome { mean, per_fold })
}
