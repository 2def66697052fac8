//! Acceptance suite: the ten release criteria, one test each, every test
//! printing a single PASS/FAIL line. Numerical criteria are checked against
//! independently coded dense-matrix oracles inside this file.

use georent_cli::config::{BenchmarkConfig, Model, RuntimeMode};
use georent_cli::pipeline;
use georent_core::dataset::{self, SynthConfig};
use georent_core::geom::Point;
use georent_core::{eval, gp, mlp, spatial_features as sf, trees};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {id:02} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id:02} {name} failed: {detail}");
}

fn scatter(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)))
        .collect()
}

// ---------------------------------------------------------------------------
// Dense conjugate oracle: same NIG model, straight dense linear algebra.

struct DenseOracle {
    mu_beta: DVector<f64>,
    v_beta: DMatrix<f64>,
    a_post: f64,
    b_post: f64,
    m_inv: DMatrix<f64>,
}

fn dense_conjugate_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    coords: &[Point],
    alpha: f64,
    phi: f64,
) -> DenseOracle {
    let n = coords.len();
    let k = x.ncols();
    let mut m = DMatrix::from_fn(n, n, |i, j| {
        let d = ((coords[i].x - coords[j].x).powi(2) + (coords[i].y - coords[j].y).powi(2)).sqrt();
        (-phi * d).exp()
    });
    for i in 0..n {
        m[(i, i)] += alpha;
    }
    let m_inv = m.clone().try_inverse().unwrap();

    // vague prior: mu0 = 0, V0 = 1e6 I, a0 = 2, b0 = 1
    let v0_inv = DMatrix::<f64>::identity(k, k) * 1e-6;
    let (a0, b0) = (2.0, 1.0);
    let xtmx = x.transpose() * &m_inv * x;
    let v_beta = (&v0_inv + xtmx).try_inverse().unwrap();
    let mu_beta = &v_beta * (x.transpose() * &m_inv * y);
    let a_post = a0 + n as f64 / 2.0;
    let quad = (y.transpose() * &m_inv * y)[(0, 0)]
        - (mu_beta.transpose() * (&v0_inv + x.transpose() * &m_inv * x) * &mu_beta)[(0, 0)];
    let b_post = b0 + 0.5 * quad;
    DenseOracle {
        mu_beta,
        v_beta,
        a_post,
        b_post,
        m_inv,
    }
}

fn dense_predict(
    oracle: &DenseOracle,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    coords: &[Point],
    x0: &DVector<f64>,
    c0: Point,
    alpha: f64,
    phi: f64,
) -> (f64, f64) {
    let n = coords.len();
    let p0 = DVector::from_fn(n, |i, _| {
        let d = ((coords[i].x - c0.x).powi(2) + (coords[i].y - c0.y).powi(2)).sqrt();
        (-phi * d).exp()
    });
    let w = &oracle.m_inv * &p0;
    let resid = y - x * &oracle.mu_beta;
    let mean = x0.dot(&oracle.mu_beta) + w.dot(&resid);
    let g = x0 - x.transpose() * &w;
    let scaled = (1.0 + alpha) - p0.dot(&w) + (g.transpose() * &oracle.v_beta * &g)[(0, 0)];
    let var = oracle.b_post / oracle.a_post * scaled;
    (mean, var)
}

fn random_instance(
    seed: u64,
) -> (
    DMatrix<f64>,
    DVector<f64>,
    Vec<Point>,
    DMatrix<f64>,
    Vec<Point>,
    f64,
    f64,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(30..=200);
    let k = rng.gen_range(1..=5);
    let n_test = 10;
    let coords = scatter(&mut rng, n, 10.0);
    let coords_test = scatter(&mut rng, n_test, 10.0);
    let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { rng.gen_range(-1.0..1.0) });
    let x_test =
        DMatrix::from_fn(n_test, k, |_, j| if j == 0 { 1.0 } else { rng.gen_range(-1.0..1.0) });
    let y = DVector::from_fn(n, |_, _| rng.gen_range(-2.0f64..2.0));
    let alpha = rng.gen_range(0.05..0.8);
    let phi = rng.gen_range(0.2..2.0);
    (x, y, coords, x_test, coords_test, alpha, phi)
}

#[test]
fn criterion_01_nngp_equals_dense_gp_at_full_neighbors() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let (x, y, coords, x_test, coords_test, alpha, phi) = random_instance(seed);
        let n = coords.len();

        let oracle = dense_conjugate_fit(&x, &y, &coords, alpha, phi);
        let sets = gp::build_neighbor_sets(&coords, n - 1).unwrap();
        let factors = gp::vecchia_factors(&sets, alpha, phi).unwrap();
        let prior = gp::NigPrior::vague(x.ncols());
        let posterior = gp::conjugate_nngp_fit(&x, &y, &factors, &prior).unwrap();

        for j in 0..x.ncols() {
            let rel = (posterior.mu_beta[j] - oracle.mu_beta[j]).abs()
                / (1.0 + oracle.mu_beta[j].abs());
            worst = worst.max(rel);
        }
        worst = worst.max((posterior.b_post - oracle.b_post).abs() / oracle.b_post.abs());

        let preds = gp::conjugate_nngp_predict(
            &posterior, &factors, &x, &y, &coords, &x_test, &coords_test, n,
        )
        .unwrap();
        for (i, p) in preds.iter().enumerate() {
            let x0 = x_test.row(i).transpose();
            let (mean, var) =
                dense_predict(&oracle, &x, &y, &coords, &x0, coords_test[i], alpha, phi);
            worst = worst.max((p.mean - mean).abs() / (1.0 + mean.abs()));
            worst = worst.max((p.var - var).abs() / var.abs());
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        1,
        "conjugate NNGP matches dense conjugate GP at k = n-1",
        worst < 1e-8 && elapsed < 30.0,
        &format!("worst relative error {worst:.3e}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_02_zero_nugget_interpolates_training_sites() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100;
    let coords = scatter(&mut rng, n, 8.0);
    let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.gen_range(-1.0..1.0) });
    let y = DVector::from_fn(n, |_, _| rng.gen_range(-2.0f64..2.0));
    let (alpha, phi) = (0.0, 0.7);

    let sets = gp::build_neighbor_sets(&coords, n - 1).unwrap();
    let factors = gp::vecchia_factors(&sets, alpha, phi).unwrap();
    let posterior =
        gp::conjugate_nngp_fit(&x, &y, &factors, &gp::NigPrior::vague(2)).unwrap();
    let preds =
        gp::conjugate_nngp_predict(&posterior, &factors, &x, &y, &coords, &x, &coords, n)
            .unwrap();
    let worst = preds
        .iter()
        .zip(y.iter())
        .map(|(p, &t)| (p.mean - t).abs())
        .fold(0.0f64, f64::max);
    verdict(
        2,
        "zero-nugget kriging interpolates training data",
        worst < 1e-6,
        &format!("max |prediction - observation| = {worst:.3e}"),
    );
}

#[test]
fn criterion_03_discrepancy_vs_dense_non_increasing_in_k() {
    let mut ok = true;
    let mut detail = String::new();
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 150;
        let coords = scatter(&mut rng, n, 6.0);
        let coords_test = scatter(&mut rng, 20, 6.0);
        let x = DMatrix::from_fn(n, 3, |_, j| if j == 0 { 1.0 } else { rng.gen_range(-1.0..1.0) });
        let x_test =
            DMatrix::from_fn(20, 3, |_, j| if j == 0 { 1.0 } else { rng.gen_range(-1.0..1.0) });
        let y = DVector::from_fn(n, |_, _| rng.gen_range(-2.0f64..2.0));
        let (alpha, phi) = (0.15, 0.8);

        let dense_pred = {
            let sets = gp::build_neighbor_sets(&coords, n - 1).unwrap();
            let factors = gp::vecchia_factors(&sets, alpha, phi).unwrap();
            let posterior =
                gp::conjugate_nngp_fit(&x, &y, &factors, &gp::NigPrior::vague(3)).unwrap();
            gp::conjugate_nngp_predict(
                &posterior, &factors, &x, &y, &coords, &x_test, &coords_test, n,
            )
            .unwrap()
        };

        let mut last = f64::INFINITY;
        for &k in &[5usize, 10, 20, n - 1] {
            let sets = gp::build_neighbor_sets(&coords, k).unwrap();
            let factors = gp::vecchia_factors(&sets, alpha, phi).unwrap();
            let posterior =
                gp::conjugate_nngp_fit(&x, &y, &factors, &gp::NigPrior::vague(3)).unwrap();
            let neighbors = k.min(n);
            let preds = gp::conjugate_nngp_predict(
                &posterior, &factors, &x, &y, &coords, &x_test, &coords_test, neighbors,
            )
            .unwrap();
            let disc = preds
                .iter()
                .zip(&dense_pred)
                .map(|(a, b)| (a.mean - b.mean).abs())
                .fold(0.0f64, f64::max);
            if disc > last + 1e-12 {
                ok = false;
            }
            detail.push_str(&format!("s{seed} k{k}: {disc:.2e}; "));
            last = disc;
        }
    }
    verdict(
        3,
        "NNGP-to-dense discrepancy non-increasing in k",
        ok,
        detail.trim_end_matches("; "),
    );
}

#[test]
fn criterion_04_nystrom_fidelity_at_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 300;
    let coords = scatter(&mut rng, n, 12.0);
    let exact = sf::moran_exact(&coords, n).unwrap();
    let (approx, _) = sf::moran_exact_with_extension(&coords, n).unwrap();

    // residual check on the exact pairs
    let q = exact.kernel_scale;
    let mut c = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let d = ((coords[i].x - coords[j].x).powi(2) + (coords[i].y - coords[j].y).powi(2))
                .sqrt();
            (-d / q).exp()
        }
    });
    let row_means: Vec<f64> = (0..n).map(|i| c.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] += grand - row_means[i] - row_means[j];
        }
    }
    let mut worst_resid: f64 = 0.0;
    let mut worst_corr: f64 = 1.0;
    for j in 0..n {
        let e = exact.eigenvectors.column(j).into_owned();
        if e.norm() < 1e-8 {
            continue; // annihilated constant direction (lambda = 0)
        }
        worst_resid = worst_resid.max((&c * &e - exact.eigenvalues[j] * &e).norm());
        let a = approx.eigenvectors.column(j);
        let r = a.dot(&e) / (a.norm() * e.norm());
        worst_corr = worst_corr.min(r.abs());
    }
    verdict(
        4,
        "Nystrom basis at h = n matches exact Moran eigenvectors",
        worst_corr >= 0.999 && worst_resid < 1e-8,
        &format!("min |corr| {worst_corr:.6}, max residual {worst_resid:.3e}"),
    );
}

#[test]
fn criterion_05_tree_ensemble_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 200;
    let x = DMatrix::from_fn(n, 4, |_, _| rng.gen_range(-3.0f64..3.0));
    let y: Vec<f64> = (0..n)
        .map(|i| x[(i, 0)] - 0.5 * x[(i, 1)].powi(2) + rng.gen_range(-0.3..0.3))
        .collect();

    // RF degenerate case == single CART: mtry = K and no bootstrap leave no
    // randomness, so the forest's only tree is the deterministic CART fit
    let config = trees::ForestConfig {
        n_trees: 1,
        node_size: 5,
        mtry: 4,
        seed: 99,
        bootstrap: false,
    };
    let forest = trees::fit_random_forest(&x, &y, &config).unwrap();
    let rows: Vec<usize> = (0..n).collect();
    let cart = trees::fit_variance_tree(&x, &y, &rows, &[0, 1, 2, 3], 5, 4, 12345).unwrap();
    let forest_pred = trees::predict_forest(&forest, &x).unwrap();
    let rf_exact = forest_pred
        .iter()
        .enumerate()
        .all(|(i, &p)| p == cart.predict_row(&x, i));

    // GBT single round == base score + residual tree
    let boost = trees::BoostConfig {
        nround: 1,
        eta: 1.0,
        max_depth: 30,
        gamma: 0.0,
        lambda: 0.0,
        colsample_bytree: 1.0,
        min_child_weight: 0.0,
        subsample: 1.0,
        seed: 5,
    };
    let model = trees::fit_gbt(&x, &y, &boost).unwrap();
    let base = y.iter().sum::<f64>() / n as f64;
    let resid: Vec<f64> = y.iter().map(|v| v - base).collect();
    let resid_tree = trees::fit_variance_tree(&x, &resid, &rows, &[0, 1, 2, 3], 1, 4, 0).unwrap();
    let gbt_pred = trees::predict_gbt(&model, &x).unwrap();
    let gbt_exact = gbt_pred
        .iter()
        .enumerate()
        .all(|(i, &p)| (p - (base + resid_tree.predict_row(&x, i))).abs() < 1e-12);

    // 100-round training MSE trace never increases
    let long = trees::BoostConfig {
        nround: 100,
        ..trees::BoostConfig::new(7)
    };
    let trace = trees::fit_gbt(&x, &y, &long).unwrap().train_mse;
    let monotone = trace.windows(2).all(|w| w[1] <= w[0] + 1e-12);

    verdict(
        5,
        "forest and boosting reduce to their CART oracles",
        rf_exact && gbt_exact && monotone,
        &format!("rf_exact {rf_exact}, gbt_exact {gbt_exact}, mse_monotone {monotone}"),
    );
}

#[test]
fn criterion_06_backprop_matches_finite_differences() {
    let mut worst: f64 = 0.0;
    for s in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
        let input = rng.gen_range(2..=4);
        let hidden: Vec<usize> = (0..rng.gen_range(1..=2))
            .map(|_| rng.gen_range(3..=8))
            .collect();
        let mut widths = vec![input];
        widths.extend(hidden);
        widths.push(1);
        let spec = mlp::NetworkSpec::new(widths, s).unwrap();
        let params = mlp::NetworkParams::he_init(&spec);

        let nb = 6;
        let x = DMatrix::from_fn(nb, input, |_, _| rng.gen_range(-1.0f64..1.0));
        let y: Vec<f64> = (0..nb).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let grads = mlp::backward(&params, &x, &y).unwrap();

        let h = 1e-5;
        let mut probe = |analytic: f64, perturb: &dyn Fn(f64) -> mlp::NetworkParams| {
            let lp = mlp::mse_loss(&y, &mlp::forward(&perturb(h), &x).unwrap()).unwrap();
            let lm = mlp::mse_loss(&y, &mlp::forward(&perturb(-h), &x).unwrap()).unwrap();
            let fd = (lp - lm) / (2.0 * h);
            let rel = (fd - analytic).abs() / analytic.abs().max(1e-3);
            worst = worst.max(rel);
        };
        for l in 0..params.weights.len() {
            for r in 0..params.weights[l].nrows() {
                for c in 0..params.weights[l].ncols() {
                    probe(grads.weights[l][(r, c)], &|eps| {
                        let mut p = params.clone();
                        p.weights[l][(r, c)] += eps;
                        p
                    });
                }
            }
            for r in 0..params.biases[l].len() {
                probe(grads.biases[l][r], &|eps| {
                    let mut p = params.clone();
                    p.biases[l][r] += eps;
                    p
                });
            }
        }
    }
    verdict(
        6,
        "MLP backprop matches central finite differences",
        worst < 1e-5,
        &format!("worst relative error {worst:.3e}"),
    );
}

#[test]
fn criterion_07_metrics_match_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst: f64 = 0.0;
    let mut recombine_worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.gen_range(5..60);
        // log-rent scale around log(63000) ~ 11
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(10.0f64..12.0)).collect();
        let yhat: Vec<f64> = (0..m).map(|_| rng.gen_range(10.0f64..12.0)).collect();

        let report = eval::metrics(&y, &yhat).unwrap();
        let mae = y.iter().zip(&yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / m as f64;
        let rmse =
            (y.iter().zip(&yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / m as f64).sqrt();
        let mape = 100.0 / m as f64
            * y.iter()
                .zip(&yhat)
                .map(|(a, b)| ((a - b) / a).abs())
                .sum::<f64>();
        let mape_real = 100.0 / m as f64
            * y.iter()
                .zip(&yhat)
                .map(|(a, b)| ((a.exp() - b.exp()) / a.exp()).abs())
                .sum::<f64>();
        worst = worst.max((report.mae - mae).abs() / mae.abs().max(1.0));
        worst = worst.max((report.rmse - rmse).abs() / rmse.abs().max(1.0));
        worst = worst.max((report.mape_log - mape).abs() / mape.abs().max(1.0));
        worst = worst.max((report.mape_real - mape_real).abs() / mape_real.abs().max(1.0));

        let edges = eval::decile_edges(&y).unwrap();
        let bands = eval::band_mape(&y, &yhat, &edges).unwrap();
        let weighted: f64 = bands
            .bands
            .iter()
            .map(|b| b.mape * b.count as f64)
            .sum::<f64>()
            / m as f64;
        recombine_worst = recombine_worst.max((weighted - mape).abs() / mape.abs().max(1.0));
    }
    verdict(
        7,
        "error measures match direct formula evaluation",
        worst < 1e-12 && recombine_worst < 1e-12,
        &format!("metric error {worst:.3e}, recombination error {recombine_worst:.3e}"),
    );
}

fn directional_config() -> BenchmarkConfig {
    let mut config = BenchmarkConfig::default();
    config.rf.n_trees = 60;
    config.rf.node_size = 5;
    config.rf.mtry = vec![15];
    config.rf.folds = 2;
    config.gbt.nround = 40;
    config.gbt.eta = vec![0.1, 0.2];
    config.gbt.max_depth = vec![6];
    config.gbt.colsample_bytree = vec![1.0];
    config.gbt.min_child_weight = vec![1.0];
    config.gbt.subsample = vec![1.0];
    config.gbt.folds = 2;
    config
}

fn synth_split(
    synth: &SynthConfig,
    seed: u64,
) -> (dataset::DesignMatrix, dataset::DesignMatrix) {
    let records = dataset::synthesize(synth, seed).unwrap();
    let dm = dataset::encode(&records).unwrap();
    let split = dataset::split(records.len(), 0.8, seed ^ 0xabcd).unwrap();
    (dm.subset(&split.train), dm.subset(&split.test))
}

fn model_mae(
    model: Model,
    train: &dataset::DesignMatrix,
    test: &dataset::DesignMatrix,
    config: &BenchmarkConfig,
    seed: u64,
) -> f64 {
    let outcome = pipeline::run_model(model, train, test, config, seed).unwrap();
    let y_test: Vec<f64> = test.y.iter().copied().collect();
    eval::metrics(&y_test, &outcome.predictions).unwrap().mae
}

#[test]
fn criterion_08_coordinates_beat_non_spatial_rf_under_strong_field() {
    let started = Instant::now();
    let config = directional_config();
    let mut synth = SynthConfig::new(5_000);
    synth.sigma2 = 0.4; // strong spatial field
    synth.phi = 0.5;
    synth.tau2 = 0.02;

    let mut wins = 0;
    let mut detail = String::new();
    for seed in 0..5u64 {
        let (train, test) = synth_split(&synth, 9000 + seed);
        let mae_coord = model_mae(Model::RfCoordinates, &train, &test, &config, seed);
        let mae_plain = model_mae(Model::RfNonSpatial, &train, &test, &config, seed);
        if mae_coord < mae_plain {
            wins += 1;
        }
        detail.push_str(&format!("s{seed}: {mae_coord:.4} vs {mae_plain:.4}; "));
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        8,
        "coordinate covariates beat non-spatial RF on spatial data",
        wins >= 4 && elapsed < 600.0,
        &format!("{wins}/5 wins, {elapsed:.0}s; {}", detail.trim_end_matches("; ")),
    );
}

#[test]
fn criterion_09_gbt_vs_rf_coordinates_reported() {
    let config = directional_config();
    let mut synth = SynthConfig::new(10_000);
    synth.sigma2 = 0.1;
    synth.phi = 0.5;
    synth.tau2 = 0.02;
    synth.nonlinear = 1.0; // bend the covariate effects

    let mut wins = 0;
    let mut detail = String::new();
    for seed in 0..5u64 {
        let (train, test) = synth_split(&synth, 7000 + seed);
        let mae_gbt = model_mae(Model::Gbt, &train, &test, &config, seed);
        let mae_rf = model_mae(Model::RfCoordinates, &train, &test, &config, seed);
        if mae_gbt <= mae_rf {
            wins += 1;
        }
        detail.push_str(&format!("s{seed}: gbt {mae_gbt:.4} rf {mae_rf:.4}; "));
    }
    // a finding, not a law: reported either way without failing the build
    println!(
        "criterion 09 tuned GBT vs tuned RF_coordinates: {} (gbt wins {wins}/5; {})",
        if wins >= 3 { "REPRODUCED" } else { "NOT REPRODUCED" },
        detail.trim_end_matches("; ")
    );
    verdict(9, "directional GBT comparison completed", true, &format!("gbt wins {wins}/5"));
}

#[test]
fn criterion_10_benchmark_runs_are_byte_identical() {
    let base = std::env::temp_dir().join(format!("georent-acc-{}", std::process::id()));
    let dir_a = base.join("a");
    let dir_b = base.join("b");
    let mut config = BenchmarkConfig::default();
    config.seed = 2024;
    config.sample_sizes = vec![400];
    config.models = vec!["ols".into(), "nngp".into(), "rf_coordinates".into(), "gbt".into()];
    config.rf.n_trees = 20;
    config.rf.mtry = vec![10];
    config.gbt.nround = 10;
    config.gbt.eta = vec![0.2];
    config.gbt.max_depth = vec![4];
    config.gbt.colsample_bytree = vec![1.0];
    config.gbt.min_child_weight = vec![1.0];
    config.gbt.subsample = vec![1.0];
    // wall time is the one legitimately non-reproducible output; pin it
    config.runtime = RuntimeMode::Zero;

    config.out_dir = dir_a.clone();
    let report = georent_cli::run_benchmark(&config).unwrap();
    config.out_dir = dir_b.clone();
    georent_cli::run_benchmark(&config).unwrap();

    let a = std::fs::read(dir_a.join("results.csv")).unwrap();
    let b = std::fs::read(dir_b.join("results.csv")).unwrap();
    let bands_a = std::fs::read(dir_a.join("bands.csv")).unwrap();
    let bands_b = std::fs::read(dir_b.join("bands.csv")).unwrap();
    std::fs::remove_dir_all(&base).ok();
    verdict(
        10,
        "repeated benchmark runs are byte-identical",
        a == b && bands_a == bands_b && report.failures.is_empty(),
        &format!(
            "results.csv {} bytes, bands.csv {} bytes, {} failures",
            a.len(),
            bands_a.len(),
            report.failures.len()
        ),
    );
}
