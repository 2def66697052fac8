//! CART regression trees, bagged random forests, and second-order
//! gradient-boosted trees with squared-error loss.
//!
//! Split candidates are exact midpoints between sorted unique feature values
//! (no histogram binning). Per-tree RNG streams are derived by hashing the
//! master seed with the tree index, so forests are bit-deterministic however
//! the tree fits are scheduled.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Regression tree node: interior split or leaf value. Rows with
/// `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    pub fn predict_row(&self, x: &DMatrix<f64>, row: usize) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[(row, *feature)] < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

/// Random-forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Minimum observations in a terminal node.
    pub node_size: usize,
    /// Candidate variables drawn at each split.
    pub mtry: usize,
    pub seed: u64,
    pub bootstrap: bool,
}

impl ForestConfig {
    pub fn new(mtry: usize, seed: u64) -> Self {
        ForestConfig {
            n_trees: 500,
            node_size: 5,
            mtry,
            seed,
            bootstrap: true,
        }
    }

    fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 || self.node_size == 0 {
            return Err(Error::InvalidInput(
                "n_trees and node_size must be at least 1".into(),
            ));
        }
        if self.mtry == 0 || self.mtry > n_features {
            return Err(Error::InvalidInput(format!(
                "mtry = {} outside [1, {n_features}]",
                self.mtry
            )));
        }
        Ok(())
    }
}

/// Gradient-boosting hyperparameters (xgboost naming).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub nround: usize,
    pub eta: f64,
    pub max_depth: usize,
    /// Split-gain penalty.
    pub gamma: f64,
    /// Leaf L2 penalty.
    pub lambda: f64,
    pub colsample_bytree: f64,
    pub min_child_weight: f64,
    pub subsample: f64,
    pub seed: u64,
}

impl BoostConfig {
    pub fn new(seed: u64) -> Self {
        BoostConfig {
            nround: 100,
            eta: 0.1,
            max_depth: 6,
            gamma: 0.0,
            lambda: 1.0,
            colsample_bytree: 1.0,
            min_child_weight: 1.0,
            subsample: 1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidInput(format!("eta = {} outside (0, 1]", self.eta)));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0)
            || !(self.colsample_bytree > 0.0 && self.colsample_bytree <= 1.0)
        {
            return Err(Error::InvalidInput(
                "subsample and colsample_bytree must lie in (0, 1]".into(),
            ));
        }
        if self.gamma < 0.0 || self.lambda < 0.0 {
            return Err(Error::InvalidInput("gamma and lambda must be >= 0".into()));
        }
        if self.nround == 0 || self.max_depth == 0 {
            return Err(Error::InvalidInput(
                "nround and max_depth must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 over (master, index)
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn sample_features(allowed: &[usize], mtry: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if mtry >= allowed.len() {
        return allowed.to_vec();
    }
    // partial Fisher-Yates
    let mut pool = allowed.to_vec();
    for i in 0..mtry {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(mtry);
    pool
}

// ---------------------------------------------------------------------------
// CART with variance-reduction splits (RF mode)

struct VarianceTreeParams {
    node_size: usize,
    mtry: usize,
}

/// Single CART regression tree with variance-reduction splits and mean
/// leaves. `rows` selects the training rows, `features` the allowed columns.
pub fn fit_variance_tree(
    x: &DMatrix<f64>,
    y: &[f64],
    rows: &[usize],
    features: &[usize],
    node_size: usize,
    mtry: usize,
    seed: u64,
) -> Result<TreeNode> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if y.len() != x.nrows() {
        return Err(Error::Schema("y length must match X rows".into()));
    }
    let params = VarianceTreeParams { node_size, mtry };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(grow_variance(x, y, rows.to_vec(), features, &params, &mut rng))
}

fn grow_variance(
    x: &DMatrix<f64>,
    y: &[f64],
    rows: Vec<usize>,
    features: &[usize],
    params: &VarianceTreeParams,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let n = rows.len();
    let sum: f64 = rows.iter().map(|&r| y[r]).sum();
    let mean = sum / n as f64;
    // a split must leave node_size rows in each child
    if n < 2 * params.node_size {
        return TreeNode::Leaf { value: mean };
    }

    let candidates = sample_features(features, params.mtry, rng);
    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    // guard against round-off producing a spurious positive gain on a
    // constant target
    let min_gain = 1e-12 * (sum * sum / n as f64 + 1.0);
    let mut scratch: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &f in &candidates {
        scratch.clear();
        scratch.extend(rows.iter().map(|&r| (x[(r, f)], y[r])));
        scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += scratch[i].1;
            if scratch[i].0 == scratch[i + 1].0 {
                continue;
            }
            let n_l = i + 1;
            let n_r = n - n_l;
            if n_l < params.node_size || n_r < params.node_size {
                continue;
            }
            let right_sum = sum - left_sum;
            let gain = left_sum * left_sum / n_l as f64 + right_sum * right_sum / n_r as f64
                - sum * sum / n as f64;
            if gain > best.map_or(min_gain, |(g, _, _)| g) {
                best = Some((gain, f, (scratch[i].0 + scratch[i + 1].0) / 2.0));
            }
        }
    }

    match best {
        None => TreeNode::Leaf { value: mean },
        Some((_, feature, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.into_iter().partition(|&r| x[(r, feature)] < threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow_variance(x, y, left_rows, features, params, rng)),
                right: Box::new(grow_variance(x, y, right_rows, features, params, rng)),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Second-order gradient tree (boost mode)

struct GradientTreeParams {
    lambda: f64,
    gamma: f64,
    min_child_weight: f64,
    max_depth: usize,
}

/// Single boosting tree on gradients/hessians: split gain
/// `0.5 * [GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)] - gamma`,
/// leaf weight `-G/(H+lambda)`.
pub fn fit_gradient_tree(
    x: &DMatrix<f64>,
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    features: &[usize],
    config: &BoostConfig,
) -> Result<TreeNode> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if grad.len() != x.nrows() || hess.len() != x.nrows() {
        return Err(Error::Schema("gradient length must match X rows".into()));
    }
    let params = GradientTreeParams {
        lambda: config.lambda,
        gamma: config.gamma,
        min_child_weight: config.min_child_weight,
        max_depth: config.max_depth,
    };
    Ok(grow_gradient(x, grad, hess, rows.to_vec(), features, &params, 0))
}

fn grow_gradient(
    x: &DMatrix<f64>,
    grad: &[f64],
    hess: &[f64],
    rows: Vec<usize>,
    features: &[usize],
    params: &GradientTreeParams,
    depth: usize,
) -> TreeNode {
    let g_sum: f64 = rows.iter().map(|&r| grad[r]).sum();
    let h_sum: f64 = rows.iter().map(|&r| hess[r]).sum();
    let leaf = || TreeNode::Leaf {
        value: -g_sum / (h_sum + params.lambda),
    };
    if depth >= params.max_depth || rows.len() < 2 {
        return leaf();
    }

    let parent_score = g_sum * g_sum / (h_sum + params.lambda);
    let mut best: Option<(f64, usize, f64)> = None;
    let n = rows.len();
    let mut scratch: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    for &f in features {
        scratch.clear();
        scratch.extend(rows.iter().map(|&r| (x[(r, f)], grad[r], hess[r])));
        scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut gl = 0.0;
        let mut hl = 0.0;
        for i in 0..n - 1 {
            gl += scratch[i].1;
            hl += scratch[i].2;
            if scratch[i].0 == scratch[i + 1].0 {
                continue;
            }
            let hr = h_sum - hl;
            if hl < params.min_child_weight || hr < params.min_child_weight {
                continue;
            }
            let gr = g_sum - gl;
            let gain = 0.5
                * (gl * gl / (hl + params.lambda) + gr * gr / (hr + params.lambda) - parent_score)
                - params.gamma;
            if gain > best.map_or(0.0, |(g, _, _)| g) {
                best = Some((gain, f, (scratch[i].0 + scratch[i + 1].0) / 2.0));
            }
        }
    }

    match best {
        None => leaf(),
        Some((_, feature, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.into_iter().partition(|&r| x[(r, feature)] < threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow_gradient(
                    x, grad, hess, left_rows, features, params, depth + 1,
                )),
                right: Box::new(grow_gradient(
                    x, grad, hess, right_rows, features, params, depth + 1,
                )),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Random forest

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub config: ForestConfig,
    pub n_features: usize,
}

pub fn fit_random_forest(x: &DMatrix<f64>, y: &[f64], config: &ForestConfig) -> Result<ForestModel> {
    let n = x.nrows();
    let k = x.ncols();
    config.validate(k)?;
    if n == 0 || y.len() != n {
        return Err(Error::Schema("X and y must align and be non-empty".into()));
    }
    let features: Vec<usize> = (0..k).collect();
    let trees: Vec<Result<TreeNode>> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(config.seed, t as u64);
            let rows: Vec<usize> = if config.bootstrap {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_variance_tree(
                x,
                y,
                &rows,
                &features,
                config.node_size,
                config.mtry,
                derive_seed(seed, 1),
            )
        })
        .collect();
    let trees = trees.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        config: config.clone(),
        n_features: k,
    })
}

/// Unweighted mean of the per-tree predictions.
pub fn predict_forest(model: &ForestModel, x0: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x0.ncols() != model.n_features {
        return Err(Error::Schema(format!(
            "query has {} features, model expects {}",
            x0.ncols(),
            model.n_features
        )));
    }
    let inv = 1.0 / model.trees.len() as f64;
    Ok((0..x0.nrows())
        .map(|r| {
            model
                .trees
                .iter()
                .map(|t| t.predict_row(x0, r))
                .sum::<f64>()
                * inv
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Gradient boosting

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostModel {
    pub base_score: f64,
    pub trees: Vec<TreeNode>,
    pub config: BoostConfig,
    pub n_features: usize,
    /// Training MSE after each round.
    pub train_mse: Vec<f64>,
}

/// Squared-error gradient boosting: per round g = yhat - y, h = 1
/// (the 1/2 (y - yhat)^2 convention), row subsampling and per-tree column
/// sampling by seed, update yhat += eta * tree(x).
pub fn fit_gbt(x: &DMatrix<f64>, y: &[f64], config: &BoostConfig) -> Result<BoostModel> {
    config.validate()?;
    let n = x.nrows();
    let k = x.ncols();
    if n == 0 || y.len() != n {
        return Err(Error::Schema("X and y must align and be non-empty".into()));
    }
    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut yhat = vec![base_score; n];
    let mut trees = Vec::with_capacity(config.nround);
    let mut train_mse = Vec::with_capacity(config.nround);
    let hess = vec![1.0f64; n];

    for round in 0..config.nround {
        let grad: Vec<f64> = yhat.iter().zip(y).map(|(p, t)| p - t).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, round as u64));

        let all_features: Vec<usize> = (0..k).collect();
        let n_cols = ((config.colsample_bytree * k as f64).ceil() as usize).clamp(1, k);
        let mut features = sample_features(&all_features, n_cols, &mut rng);
        features.sort_unstable();

        let rows: Vec<usize> = if config.subsample < 1.0 {
            let n_rows = ((config.subsample * n as f64).floor() as usize).max(1);
            let all: Vec<usize> = (0..n).collect();
            let mut sampled = sample_features(&all, n_rows, &mut rng);
            sampled.sort_unstable();
            sampled
        } else {
            (0..n).collect()
        };

        let tree = fit_gradient_tree(x, &grad, &hess, &rows, &features, config)?;
        for (r, p) in yhat.iter_mut().enumerate() {
            *p += config.eta * tree.predict_row(x, r);
        }
        trees.push(tree);
        train_mse.push(
            yhat.iter()
                .zip(y)
                .map(|(p, t)| (p - t).powi(2))
                .sum::<f64>()
                / n as f64,
        );
    }
    Ok(BoostModel {
        base_score,
        trees,
        config: config.clone(),
        n_features: k,
        train_mse,
    })
}

/// Base score plus the eta-weighted sum of tree outputs.
pub fn predict_gbt(model: &BoostModel, x0: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x0.ncols() != model.n_features {
        return Err(Error::Schema(format!(
            "query has {} features, model expects {}",
            x0.ncols(),
            model.n_features
        )));
    }
    Ok((0..x0.nrows())
        .map(|r| {
            model.base_score
                + model.config.eta
                    * model
                        .trees
                        .iter()
                        .map(|t| t.predict_row(x0, r))
                        .sum::<f64>()
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Tuning

#[derive(Debug, Clone, Serialize)]
pub struct TuneCell<C> {
    pub config: C,
    pub cv_rmse: f64,
}

/// Grid search over mtry via k-fold CV; ties resolved toward smaller mtry.
pub fn tune_mtry(
    x: &DMatrix<f64>,
    y: &[f64],
    folds: usize,
    range: &[usize],
    base: &ForestConfig,
    seed: u64,
) -> Result<(usize, Vec<TuneCell<usize>>)> {
    if range.is_empty() {
        return Err(Error::InvalidInput("empty mtry range".into()));
    }
    if range.iter().any(|&m| m == 0 || m > x.ncols()) {
        return Err(Error::InvalidInput(format!(
            "mtry range must lie within [1, {}]",
            x.ncols()
        )));
    }
    let fold_sets = crate::eval::kfold(x.nrows(), folds, seed)?;
    let mut table = Vec::with_capacity(range.len());
    let mut best: Option<(usize, f64)> = None;
    for &mtry in range {
        let config = ForestConfig {
            mtry,
            ..base.clone()
        };
        let outcome = crate::eval::cv_score(
            |train, test| {
                let xt = subset_rows(x, train);
                let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                let model = fit_random_forest(&xt, &yt, &config)?;
                predict_forest(&model, &subset_rows(x, test))
            },
            y,
            &fold_sets,
            crate::eval::CvMetric::Rmse,
        )?;
        table.push(TuneCell {
            config: mtry,
            cv_rmse: outcome.mean,
        });
        let better = match best {
            None => true,
            Some((bm, bs)) => outcome.mean < bs || (outcome.mean == bs && mtry < bm),
        };
        if better {
            best = Some((mtry, outcome.mean));
        }
    }
    Ok((best.unwrap().0, table))
}

/// Grid search over boosting configurations; ties resolved toward the
/// earlier grid entry.
pub fn tune_gbt(
    x: &DMatrix<f64>,
    y: &[f64],
    folds: usize,
    grid: &[BoostConfig],
    seed: u64,
) -> Result<(BoostConfig, Vec<TuneCell<BoostConfig>>)> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty boosting grid".into()));
    }
    let fold_sets = crate::eval::kfold(x.nrows(), folds, seed)?;
    let mut table = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (gi, config) in grid.iter().enumerate() {
        let outcome = crate::eval::cv_score(
            |train, test| {
                let xt = subset_rows(x, train);
                let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                let model = fit_gbt(&xt, &yt, config)?;
                predict_gbt(&model, &subset_rows(x, test))
            },
            y,
            &fold_sets,
            crate::eval::CvMetric::Rmse,
        )?;
        table.push(TuneCell {
            config: config.clone(),
            cv_rmse: outcome.mean,
        });
        if best.map_or(true, |(_, bs)| outcome.mean < bs) {
            best = Some((gi, outcome.mean));
        }
    }
    Ok((grid[best.unwrap().0].clone(), table))
}

fn subset_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |r, c| x[(rows[r], c)])
}
