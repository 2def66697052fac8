//! Feedforward regression network: affine layers with ReLU hidden
//! activations and a linear output, MSE loss, exact backpropagation, and
//! SGD / RMSprop / Adam optimizers. Hyperparameters come from a seeded
//! random search.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Layer widths m_1..m_L (input first, scalar output last) plus the
/// initialization seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layer_widths: Vec<usize>,
    pub seed: u64,
}

impl NetworkSpec {
    pub fn new(layer_widths: Vec<usize>, seed: u64) -> Result<Self> {
        if layer_widths.len() < 2 {
            return Err(Error::InvalidInput(
                "network needs at least input and output layers".into(),
            ));
        }
        if layer_widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidInput("layer widths must be positive".into()));
        }
        if *layer_widths.last().unwrap() != 1 {
            return Err(Error::InvalidInput("output layer width must be 1".into()));
        }
        Ok(NetworkSpec { layer_widths, seed })
    }
}

/// Weight matrices (m_{l+1} x m_l, so u = W z + b) and bias vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl NetworkParams {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        let w = spec.layer_widths.windows(2).map(|p| DMatrix::zeros(p[1], p[0])).collect();
        let b = spec.layer_widths[1..].iter().map(|&m| DVector::zeros(m)).collect();
        NetworkParams { weights: w, biases: b }
    }

    /// He-scaled Gaussian initialization: sd = sqrt(2 / fan_in), zero biases.
    pub fn he_init(spec: &NetworkSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut params = NetworkParams::zeros(spec);
        for w in &mut params.weights {
            let sd = (2.0 / w.ncols() as f64).sqrt();
            for v in w.iter_mut() {
                *v = sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        params
    }

    fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_width(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Rmsprop,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidInput("learning_rate must be >= 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Forward / loss / backward

fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Layer outputs z_0..z_L for a batch (rows = observations); the last entry
/// is the linear network output.
fn forward_cached(params: &NetworkParams, x: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    if x.ncols() != params.input_width() {
        return Err(Error::Schema(format!(
            "input width {} does not match network input {}",
            x.ncols(),
            params.input_width()
        )));
    }
    let layers = params.n_layers();
    let mut zs = Vec::with_capacity(layers + 1);
    zs.push(x.clone());
    for l in 0..layers {
        let mut u = zs[l].clone() * params.weights[l].transpose();
        for mut row in u.row_iter_mut() {
            row += params.biases[l].transpose();
        }
        if l + 1 < layers {
            u.apply(|v| *v = relu(*v));
        }
        zs.push(u);
    }
    Ok(zs)
}

/// Network predictions for a batch of inputs.
pub fn forward(params: &NetworkParams, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let zs = forward_cached(params, x)?;
    Ok(zs.last().unwrap().column(0).iter().copied().collect())
}

/// Mean squared error (1/n) Σ (y_i - yhat_i)^2.
pub fn mse_loss(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::Schema(format!(
            "length mismatch: {} targets vs {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("empty evaluation set".into()));
    }
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

/// Exact gradients of `mse_loss` over the batch; the ReLU subgradient at 0
/// is taken as 0.
pub fn backward(params: &NetworkParams, x: &DMatrix<f64>, y: &[f64]) -> Result<Gradients> {
    if y.len() != x.nrows() {
        return Err(Error::Schema("target length must match batch rows".into()));
    }
    let zs = forward_cached(params, x)?;
    let layers = params.n_layers();
    let n = x.nrows() as f64;

    // delta at the output: d loss / d u_L
    let mut delta = zs[layers].clone();
    for (i, &t) in y.iter().enumerate() {
        delta[(i, 0)] = 2.0 * (delta[(i, 0)] - t) / n;
    }

    let mut dw = vec![DMatrix::zeros(0, 0); layers];
    let mut db = vec![DVector::zeros(0); layers];
    for l in (0..layers).rev() {
        dw[l] = delta.transpose() * &zs[l];
        db[l] = delta.row_sum().transpose();
        if l > 0 {
            let mut prev = delta * &params.weights[l];
            // relu'(u) = 1 where z > 0 (subgradient 0 at u = 0)
            for (p, z) in prev.iter_mut().zip(zs[l].iter()) {
                if *z <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    Ok(Gradients {
        weights: dw,
        biases: db,
    })
}

// ---------------------------------------------------------------------------
// Training

struct OptimizerState {
    m_w: Vec<DMatrix<f64>>,
    v_w: Vec<DMatrix<f64>>,
    m_b: Vec<DVector<f64>>,
    v_b: Vec<DVector<f64>>,
    step: usize,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const RMSPROP_RHO: f64 = 0.9;
const OPT_EPS: f64 = 1e-8;

impl OptimizerState {
    fn new(params: &NetworkParams) -> Self {
        OptimizerState {
            m_w: params.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            v_w: params.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            m_b: params.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
            v_b: params.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
            step: 0,
        }
    }

    fn apply(&mut self, params: &mut NetworkParams, grads: &Gradients, config: &TrainConfig) {
        self.step += 1;
        let lr = config.learning_rate;
        match config.optimizer {
            Optimizer::Sgd => {
                for l in 0..params.weights.len() {
                    params.weights[l] -= lr * &grads.weights[l];
                    params.biases[l] -= lr * &grads.biases[l];
                }
            }
            Optimizer::Rmsprop => {
                for l in 0..params.weights.len() {
                    rmsprop_update(&mut self.v_w[l], &mut params.weights[l], &grads.weights[l], lr);
                    rmsprop_update_vec(&mut self.v_b[l], &mut params.biases[l], &grads.biases[l], lr);
                }
            }
            Optimizer::Adam => {
                let bc1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
                let bc2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
                for l in 0..params.weights.len() {
                    adam_update(
                        &mut self.m_w[l],
                        &mut self.v_w[l],
                        &mut params.weights[l],
                        &grads.weights[l],
                        lr,
                        bc1,
                        bc2,
                    );
                    adam_update_vec(
                        &mut self.m_b[l],
                        &mut self.v_b[l],
                        &mut params.biases[l],
                        &grads.biases[l],
                        lr,
                        bc1,
                        bc2,
                    );
                }
            }
        }
    }
}

fn rmsprop_update(v: &mut DMatrix<f64>, p: &mut DMatrix<f64>, g: &DMatrix<f64>, lr: f64) {
    for ((v, p), g) in v.iter_mut().zip(p.iter_mut()).zip(g.iter()) {
        *v = RMSPROP_RHO * *v + (1.0 - RMSPROP_RHO) * g * g;
        *p -= lr * g / (v.sqrt() + OPT_EPS);
    }
}

fn rmsprop_update_vec(v: &mut DVector<f64>, p: &mut DVector<f64>, g: &DVector<f64>, lr: f64) {
    for ((v, p), g) in v.iter_mut().zip(p.iter_mut()).zip(g.iter()) {
        *v = RMSPROP_RHO * *v + (1.0 - RMSPROP_RHO) * g * g;
        *p -= lr * g / (v.sqrt() + OPT_EPS);
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update(
    m: &mut DMatrix<f64>,
    v: &mut DMatrix<f64>,
    p: &mut DMatrix<f64>,
    g: &DMatrix<f64>,
    lr: f64,
    bc1: f64,
    bc2: f64,
) {
    for (((m, v), p), g) in m.iter_mut().zip(v.iter_mut()).zip(p.iter_mut()).zip(g.iter()) {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + OPT_EPS);
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update_vec(
    m: &mut DVector<f64>,
    v: &mut DVector<f64>,
    p: &mut DVector<f64>,
    g: &DVector<f64>,
    lr: f64,
    bc1: f64,
    bc2: f64,
) {
    for (((m, v), p), g) in m.iter_mut().zip(v.iter_mut()).zip(p.iter_mut()).zip(g.iter()) {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + OPT_EPS);
    }
}

/// Mini-batch training from a seeded He initialization; returns the final
/// parameters and the full-data MSE trace per epoch.
pub fn train(
    spec: &NetworkSpec,
    x: &DMatrix<f64>,
    y: &[f64],
    config: &TrainConfig,
) -> Result<(NetworkParams, Vec<f64>)> {
    config.validate()?;
    if y.len() != x.nrows() || y.is_empty() {
        return Err(Error::Schema("X and y must align and be non-empty".into()));
    }
    if x.ncols() != spec.layer_widths[0] {
        return Err(Error::Schema(format!(
            "{} input columns for input width {}",
            x.ncols(),
            spec.layer_widths[0]
        )));
    }
    let n = x.nrows();
    let mut params = NetworkParams::he_init(spec);
    let mut state = OptimizerState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let xb = DMatrix::from_fn(batch.len(), x.ncols(), |r, c| x[(batch[r], c)]);
            let yb: Vec<f64> = batch.iter().map(|&i| y[i]).collect();
            let grads = backward(&params, &xb, &yb)?;
            state.apply(&mut params, &grads, config);
        }
        let loss = mse_loss(y, &forward(&params, x)?)?;
        if !loss.is_finite() || !params.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        trace.push(loss);
    }
    Ok((params, trace))
}

// ---------------------------------------------------------------------------
// Standardization

/// Per-column mean/sd scaling fitted on the training fold only.
#[derive(Debug, Clone)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InvalidInput("cannot standardize empty matrix".into()));
        }
        let n = x.nrows() as f64;
        let mean: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).sum() / n).collect();
        let sd: Vec<f64> = (0..x.ncols())
            .map(|j| {
                let v = x.column(j).iter().map(|&e| (e - mean[j]).powi(2)).sum::<f64>() / n;
                let s = v.sqrt();
                if s < 1e-12 {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Ok(Standardizer { mean, sd })
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::Schema("column count changed since fit".into()));
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            (x[(i, j)] - self.mean[j]) / self.sd[j]
        }))
    }
}

// ---------------------------------------------------------------------------
// Random hyperparameter search

/// Declared random-search space; every list must be non-empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Number of hidden layers.
    pub depths: Vec<usize>,
    /// Hidden-layer width options (drawn per network, shared across layers).
    pub widths: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub optimizers: Vec<Optimizer>,
    pub epochs: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            depths: vec![1, 2, 3, 4],
            widths: vec![16, 64, 256],
            learning_rates: vec![1e-3, 1e-2],
            batch_sizes: vec![32, 128],
            optimizers: vec![Optimizer::Sgd, Optimizer::Rmsprop, Optimizer::Adam],
            epochs: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub spec: NetworkSpec,
    pub config: TrainConfig,
    pub cv_mse: f64,
}

fn pick<'a, T>(list: &'a [T], rng: &mut ChaCha8Rng) -> &'a T {
    &list[rng.gen_range(0..list.len())]
}

/// Uniform random search: samples `trials` (spec, config) pairs, scores each
/// by k-fold CV MSE with fold-local standardization, returns the argmin and
/// the full trial table. Inputs are the raw (unstandardized) design matrix.
pub fn random_search_tune(
    x: &DMatrix<f64>,
    y: &[f64],
    space: &SearchSpace,
    trials: usize,
    folds: usize,
    seed: u64,
) -> Result<(Trial, Vec<Trial>)> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    if space.depths.is_empty()
        || space.widths.is_empty()
        || space.learning_rates.is_empty()
        || space.batch_sizes.is_empty()
        || space.optimizers.is_empty()
        || space.epochs == 0
    {
        return Err(Error::InvalidInput("empty search space".into()));
    }
    let fold_sets = crate::eval::kfold(x.nrows(), folds, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Vec::with_capacity(trials);
    let mut best: Option<usize> = None;

    for t in 0..trials {
        let depth = *pick(&space.depths, &mut rng);
        let width = *pick(&space.widths, &mut rng);
        let mut layer_widths = vec![x.ncols()];
        layer_widths.extend(std::iter::repeat(width).take(depth));
        layer_widths.push(1);
        let spec = NetworkSpec::new(layer_widths, seed.wrapping_add(t as u64))?;
        let config = TrainConfig {
            optimizer: *pick(&space.optimizers, &mut rng),
            learning_rate: *pick(&space.learning_rates, &mut rng),
            batch_size: *pick(&space.batch_sizes, &mut rng),
            epochs: space.epochs,
            seed: seed.wrapping_add(t as u64),
        };

        let outcome = crate::eval::cv_score(
            |train, test| {
                let xt = DMatrix::from_fn(train.len(), x.ncols(), |r, c| x[(train[r], c)]);
                let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                let scaler = Standardizer::fit(&xt)?;
                let (params, _) = train_fold(&spec, &scaler.transform(&xt)?, &yt, &config)?;
                let xq = DMatrix::from_fn(test.len(), x.ncols(), |r, c| x[(test[r], c)]);
                forward(&params, &scaler.transform(&xq)?)
            },
            y,
            &fold_sets,
            crate::eval::CvMetric::Mse,
        )?;
        table.push(Trial {
            spec,
            config,
            cv_mse: outcome.mean,
        });
        if best.map_or(true, |b| outcome.mean < table[b].cv_mse) {
            best = Some(t);
        }
    }
    Ok((table[best.unwrap()].clone(), table))
}

fn train_fold(
    spec: &NetworkSpec,
    x: &DMatrix<f64>,
    y: &[f64],
    config: &TrainConfig,
) -> Result<(NetworkParams, Vec<f64>)> {
    train(spec, x, y, config)
}
