//! Per-model fit/tune/predict pipelines. Every pipeline consumes the train
//! split only for all tuning decisions and returns log-scale predictions for
//! the test split plus an echo of the tuned hyperparameters.

use crate::config::{BenchmarkConfig, Model};
use georent_core::dataset::DesignMatrix;
use georent_core::{eval, gp, mlp, spatial_features as sf, trees};
use georent_core::{Error, Result};
use nalgebra::DMatrix;
use serde_json::json;

pub struct FitOutcome {
    /// Log-scale predictions for the test rows.
    pub predictions: Vec<f64>,
    /// Tuned hyperparameters / fit diagnostics for the results report.
    pub tuned: serde_json::Value,
}

pub fn run_model(
    model: Model,
    train: &DesignMatrix,
    test: &DesignMatrix,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<FitOutcome> {
    match model {
        Model::Ols => fit_ols(train, test),
        Model::Nngp => fit_nngp(train, test, config, seed),
        Model::Gbt => fit_gbt(train, test, config, seed),
        Model::Mlp => fit_mlp(train, test, config, seed),
        _ => fit_rf_family(model, train, test, config, seed),
    }
}

fn fit_ols(train: &DesignMatrix, test: &DesignMatrix) -> Result<FitOutcome> {
    let (beta, adj_r2, _) = gp::ols_fit(train)?;
    let predictions: Vec<f64> = (&test.x * &beta).iter().copied().collect();
    Ok(FitOutcome {
        predictions,
        tuned: json!({ "adj_r2": adj_r2 }),
    })
}

fn fit_nngp(
    train: &DesignMatrix,
    test: &DesignMatrix,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<FitOutcome> {
    let c = &config.nngp;
    let neighbors = c.neighbors.min(train.n() - 1);
    let (alpha, phi, _) = gp::grid_search_alpha_phi(
        &train.x,
        &train.y,
        &train.coords,
        &c.alphas,
        &c.phis,
        neighbors,
        c.folds,
        seed,
    )?;
    let sets = gp::build_neighbor_sets(&train.coords, neighbors)?;
    let factors = gp::vecchia_factors(&sets, alpha, phi)?;
    let prior = gp::NigPrior::vague(train.k());
    let posterior = gp::conjugate_nngp_fit(&train.x, &train.y, &factors, &prior)?;
    let preds = gp::conjugate_nngp_predict(
        &posterior,
        &factors,
        &train.x,
        &train.y,
        &train.coords,
        &test.x,
        &test.coords,
        neighbors.min(train.n()),
    )?;
    Ok(FitOutcome {
        predictions: preds.iter().map(|p| p.mean).collect(),
        tuned: json!({ "alpha": alpha, "phi": phi, "neighbors": neighbors }),
    })
}

/// Feature matrices for the random-forest family. All spatial features are
/// built from the training split only.
fn rf_features(
    model: Model,
    train: &DesignMatrix,
    test: &DesignMatrix,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, serde_json::Value)> {
    let (mut xt, _) = train.without_intercept();
    let (mut xq, _) = test.without_intercept();
    let mut extra = json!({});

    match model {
        Model::RfNonSpatial => {}
        Model::RfCoordinates => {
            xt = sf::add_coordinates(&xt, &train.coords)?;
            xq = sf::add_coordinates(&xq, &test.coords)?;
        }
        Model::RfSar | Model::RfSarCoordinates => {
            let k = config.rf_sar.k.min(train.n() - 1);
            let w_train = sf::spatial_weights(&train.coords, &train.coords, k, true)?;
            let w_test = sf::spatial_weights(&train.coords, &test.coords, k, false)?;
            let y_train: Vec<f64> = train.y.iter().copied().collect();
            append_column(&mut xt, &sf::spatial_lag(&w_train, &y_train)?);
            append_column(&mut xq, &sf::spatial_lag(&w_test, &y_train)?);
            if config.rf_sar.lag_covariates {
                let base_t = train.without_intercept().0;
                for j in 0..base_t.ncols() {
                    let col: Vec<f64> = base_t.column(j).iter().copied().collect();
                    append_column(&mut xt, &sf::spatial_lag(&w_train, &col)?);
                    append_column(&mut xq, &sf::spatial_lag(&w_test, &col)?);
                }
            }
            if model == Model::RfSarCoordinates {
                xt = sf::add_coordinates(&xt, &train.coords)?;
                xq = sf::add_coordinates(&xq, &test.coords)?;
            }
            extra = json!({ "w_neighbors": k });
        }
        Model::RfSi => {
            let k = config.rf_si.k.min(train.n() - 1);
            let y_train: Vec<f64> = train.y.iter().copied().collect();
            let ft = sf::rfsi_features(&train.coords, &y_train, &train.coords, k, true)?;
            let fq = sf::rfsi_features(&train.coords, &y_train, &test.coords, k, false)?;
            xt = hstack(&xt, &ft);
            xq = hstack(&xq, &fq);
            extra = json!({ "si_neighbors": k });
        }
        Model::RfEsf | Model::RfEsfApp => {
            let h = config.esf.h.min(train.n() - 1);
            let (basis, map) = if model == Model::RfEsf {
                sf::moran_exact_with_extension(&train.coords, h)?
            } else {
                sf::moran_nystrom(&train.coords, h, seed)?
            };
            // positive eigenvalues only: the Moran patterns of positive
            // spatial autocorrelation
            let keep: Vec<usize> = (0..basis.h)
                .filter(|&j| basis.eigenvalues[j] > 0.0)
                .collect();
            if keep.is_empty() {
                return Err(Error::Numerical(
                    "no positive Moran eigenvalues on the training sites".into(),
                ));
            }
            let eq = map.extend(&test.coords)?;
            xt = hstack(&xt, &select_columns(&basis.eigenvectors, &keep));
            xq = hstack(&xq, &select_columns(&eq, &keep));
            extra = json!({ "h": h, "positive_columns": keep.len() });
        }
        _ => unreachable!("rf_features called for {model}"),
    }
    Ok((xt, xq, extra))
}

fn fit_rf_family(
    model: Model,
    train: &DesignMatrix,
    test: &DesignMatrix,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<FitOutcome> {
    let (xt, xq, extra) = rf_features(model, train, test, config, seed)?;
    let y: Vec<f64> = train.y.iter().copied().collect();

    let mut range: Vec<usize> = config
        .rf
        .mtry
        .iter()
        .map(|&m| m.min(xt.ncols()).max(1))
        .collect();
    range.sort_unstable();
    range.dedup();

    let base = trees::ForestConfig {
        n_trees: config.rf.n_trees,
        node_size: config.rf.node_size,
        mtry: range[0],
        seed,
        bootstrap: true,
    };
    let (mtry, _) = if range.len() > 1 {
        trees::tune_mtry(&xt, &y, config.rf.folds, &range, &base, seed)?
    } else {
        (range[0], Vec::new())
    };
    let forest = trees::fit_random_forest(
        &xt,
        &y,
        &trees::ForestConfig {
            mtry,
            ..base.clone()
        },
    )?;
    let predictions = trees::predict_forest(&forest, &xq)?;
    let mut tuned = json!({
        "mtry": mtry,
        "n_trees": config.rf.n_trees,
        "node_size": config.rf.node_size,
        "features": xt.ncols(),
    });
    merge(&mut tuned, extra);
    Ok(FitOutcome { predictions, tuned })
}

fn fit_gbt(
    train: &DesignMatrix,
    test: &DesignMatrix,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<FitOutcome> {
    let (xt, _) = train.without_intercept();
    let (xq, _) = test.without_intercept();
    let y: Vec<f64> = train.y.iter().copied().collect();

    let c = &config.gbt;
    let mut grid = Vec::new();
    for &max_depth in &c.max_depth {
        for &eta in &c.eta {
            for &colsample_bytree in &c.colsample_bytree {
                for &min_child_weight in &c.min_child_weight {
                    for &subsample in &c.subsample {
                        grid.push(trees::BoostConfig {
                            nround: c.nround,
                            eta,
                            max_depth,
                            gamma: c.gamma,
                            lambda: c.lambda,
                            colsample_bytree,
                            min_child_weight,
                            subsample,
                            seed,
                        });
                    }
                }
            }
        }
    }
    let best = if grid.len() > 1 {
        trees::tune_gbt(&xt, &y, c.folds, &grid, seed)?.0
    } else {
        grid.into_iter()
            .next()
            .ok_or_else(|| Error::Config("empty gbt grid".into()))?
    };
    let model = trees::fit_gbt(&xt, &y, &best)?;
    let predictions = trees::predict_gbt(&model, &xq)?;
    Ok(FitOutcome {
        predictions,
        tuned: serde_json::to_value(&best).map_err(|e| Error::Config(e.to_string()))?,
    })
}

fn fit_mlp(
    train: &DesignMatrix,
    test: &DesignMatrix,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<FitOutcome> {
    let (xt, _) = train.without_intercept();
    let (xq, _) = test.without_intercept();
    let y: Vec<f64> = train.y.iter().copied().collect();
    let c = &config.mlp;
    let space = mlp::SearchSpace {
        depths: c.depths.clone(),
        widths: c.widths.clone(),
        learning_rates: c.learning_rates.clone(),
        batch_sizes: c.batch_sizes.clone(),
        optimizers: c.optimizers.clone(),
        epochs: c.epochs,
    };
    let (best, _) = mlp::random_search_tune(&xt, &y, &space, c.trials, c.folds, seed)?;
    let scaler = mlp::Standardizer::fit(&xt)?;
    let (params, _) = mlp::train(&best.spec, &scaler.transform(&xt)?, &y, &best.config)?;
    let predictions = mlp::forward(&params, &scaler.transform(&xq)?)?;
    Ok(FitOutcome {
        predictions,
        tuned: json!({
            "layer_widths": best.spec.layer_widths,
            "optimizer": best.config.optimizer,
            "learning_rate": best.config.learning_rate,
            "batch_size": best.config.batch_size,
            "epochs": best.config.epochs,
            "cv_mse": best.cv_mse,
        }),
    })
}

// ---------------------------------------------------------------------------
// small matrix helpers

fn append_column(m: &mut DMatrix<f64>, col: &[f64]) {
    debug_assert_eq!(m.nrows(), col.len());
    let old = m.ncols();
    m.resize_horizontally_mut(old + 1, 0.0);
    for (i, &v) in col.iter().enumerate() {
        m[(i, old)] = v;
    }
}

fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    let old = out.ncols();
    out.resize_horizontally_mut(old + b.ncols(), 0.0);
    out.view_mut((0, old), (b.nrows(), b.ncols())).copy_from(b);
    out
}

fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

fn merge(dst: &mut serde_json::Value, src: serde_json::Value) {
    if let (Some(d), Some(s)) = (dst.as_object_mut(), src.as_object()) {
        for (k, v) in s {
            d.insert(k.clone(), v.clone());
        }
    }
}

/// Test-set evaluation shared by the runner: log metrics, real-scale MAPE,
/// and the decile band table.
pub fn score(
    y_test: &[f64],
    predictions: &[f64],
) -> Result<(eval::MetricsReport, eval::BandReport)> {
    let report = eval::metrics(y_test, predictions)?;
    let edges = eval::decile_edges(y_test)?;
    let bands = eval::band_mape(y_test, predictions, &edges)?;
    Ok((report, bands))
}
