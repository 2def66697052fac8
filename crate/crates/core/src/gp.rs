//! Regression-based spatial prediction: OLS baseline, a dense Gaussian-process
//! kriging oracle, and the conjugate nearest-neighbor GP.
//!
//! The NNGP path factors the unit-sill covariance M = P + alpha*I through
//! nearest-neighbor conditionals into sparse rows `a_i` and conditional
//! variances `d_i` so that (I - A)' D^-1 (I - A) = M^-1 when every prior point
//! is a neighbor, and a sparse approximation otherwise. With (alpha, phi)
//! fixed, a normal-inverse-gamma prior on (beta, sigma2) stays conjugate on
//! the whitened data and predictions are Student-t.

use crate::dataset::DesignMatrix;
use crate::error::{Error, Result};
use crate::geom::{KdTree, Point};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exponential-covariance parameters: partial sill, inverse range, nugget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub sigma2: f64,
    pub phi: f64,
    pub tau2: f64,
}

impl CovarianceSpec {
    pub fn new(sigma2: f64, phi: f64, tau2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && phi > 0.0 && tau2 >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "covariance spec needs sigma2 > 0, phi > 0, tau2 >= 0 (got {sigma2}, {phi}, {tau2})"
            )));
        }
        Ok(CovarianceSpec { sigma2, phi, tau2 })
    }

    /// Noise-to-sill ratio alpha = tau2 / sigma2.
    pub fn alpha(&self) -> f64 {
        self.tau2 / self.sigma2
    }

    /// Spatial correlation at distance d.
    pub fn corr(&self, d: f64) -> f64 {
        (-self.phi * d).exp()
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

const JITTER_LADDER: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];

fn cholesky_jittered(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    for &eps in &JITTER_LADDER {
        let mut attempt = m.clone();
        if eps > 0.0 {
            for i in 0..attempt.nrows() {
                attempt[(i, i)] += eps;
            }
        }
        if let Some(chol) = attempt.cholesky() {
            return Ok(chol);
        }
    }
    Err(Error::Numerical(
        "matrix not positive definite within jitter ladder".into(),
    ))
}

// ---------------------------------------------------------------------------
// OLS

/// Least-squares fit returning coefficients, adjusted R^2 and t-values.
pub fn ols_fit(dm: &DesignMatrix) -> Result<(DVector<f64>, f64, DVector<f64>)> {
    let x = &dm.x;
    let y = &dm.y;
    let (n, k) = (x.nrows(), x.ncols());
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "need n > K for OLS (n = {n}, K = {k})"
        )));
    }
    check_full_rank(x, &dm.column_names)?;

    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let chol = xtx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularDesign("X'X not positive definite".into()))?;
    let beta = chol.solve(&xty);

    let resid = y - x * &beta;
    let rss: f64 = resid.norm_squared();
    let ybar = y.mean();
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    // K counts the constant term, so the residual df is n - K
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - k as f64);

    let s2 = rss / (n as f64 - k as f64);
    let xtx_inv = chol.inverse();
    let t_values = DVector::from_fn(k, |j, _| {
        let se = (s2 * xtx_inv[(j, j)]).sqrt();
        if se > 0.0 {
            beta[j] / se
        } else {
            f64::INFINITY * beta[j].signum()
        }
    });
    Ok((beta, adj_r2, t_values))
}

/// Modified Gram-Schmidt rank check; errors name the dependent columns.
fn check_full_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let k = x.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut dependent = Vec::new();
    for j in 0..k {
        let mut col = x.column(j).into_owned();
        let scale = col.norm();
        for b in &basis {
            let proj = b.dot(&col);
            col -= b * proj;
        }
        if col.norm() <= 1e-10 * scale.max(1.0) {
            dependent.push(names.get(j).cloned().unwrap_or_else(|| format!("col{j}")));
        } else {
            let norm = col.norm();
            basis.push(col / norm);
        }
    }
    if dependent.is_empty() {
        Ok(())
    } else {
        Err(Error::SingularDesign(format!(
            "linearly dependent columns: {}",
            dependent.join(", ")
        )))
    }
}

// ---------------------------------------------------------------------------
// Dense GP (exact kriging oracle, n capped)

pub const DENSE_CAP: usize = 2_000;

/// Universal-kriging predictor backed by the dense covariance matrix.
/// Exact but O(n^3); serves as the oracle the NNGP is checked against.
pub struct DenseGp {
    spec: CovarianceSpec,
    coords: Vec<Point>,
    x: DMatrix<f64>,
    beta: DVector<f64>,
    /// Lambda^-1 (y - X beta)
    resid_weights: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    /// (X' Lambda^-1 X)^-1
    beta_cov: DMatrix<f64>,
    /// Lambda^-1 X
    lam_inv_x: DMatrix<f64>,
}

impl DenseGp {
    pub fn fit(
        x: &DMatrix<f64>,
        y: &DVector<f64>,
        coords: &[Point],
        spec: CovarianceSpec,
    ) -> Result<Self> {
        let n = x.nrows();
        if n > DENSE_CAP {
            return Err(Error::Capacity(format!(
                "dense GP capped at n = {DENSE_CAP}, got {n}"
            )));
        }
        if coords.len() != n || y.len() != n {
            return Err(Error::Schema("rows of X, y and coords must align".into()));
        }
        let mut lambda = DMatrix::from_fn(n, n, |i, j| {
            spec.sigma2 * spec.corr(dist(coords[i], coords[j]))
        });
        for i in 0..n {
            lambda[(i, i)] += spec.tau2;
        }
        let chol = cholesky_jittered(&lambda)?;

        let lam_inv_x = chol.solve(x);
        let xtlx = x.transpose() * &lam_inv_x;
        let xtly = lam_inv_x.transpose() * y;
        let xtlx_chol = cholesky_jittered(&xtlx)?;
        let beta = xtlx_chol.solve(&xtly);
        let beta_cov = xtlx_chol.inverse();
        let resid_weights = chol.solve(&(y - x * &beta));
        Ok(DenseGp {
            spec,
            coords: coords.to_vec(),
            x: x.clone(),
            beta,
            resid_weights,
            chol,
            beta_cov,
            lam_inv_x,
        })
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    /// Predictive mean and variance at one site.
    pub fn predict(&self, x0: &DVector<f64>, coord0: Point) -> Result<(f64, f64)> {
        if !coord0.is_finite() {
            return Err(Error::InvalidInput("non-finite query coordinate".into()));
        }
        if x0.len() != self.x.ncols() {
            return Err(Error::Schema(format!(
                "query has {} features, model expects {}",
                x0.len(),
                self.x.ncols()
            )));
        }
        let n = self.coords.len();
        let c0 = DVector::from_fn(n, |i, _| {
            self.spec.sigma2 * self.spec.corr(dist(self.coords[i], coord0))
        });
        let mean = x0.dot(&self.beta) + c0.dot(&self.resid_weights);
        let lam_inv_c0 = self.chol.solve(&c0);
        let u = x0 - self.lam_inv_x.transpose() * &c0;
        let var = (self.spec.sigma2 + self.spec.tau2) - c0.dot(&lam_inv_c0)
            + (self.beta_cov.clone() * &u).dot(&u);
        Ok((mean, var.max(0.0)))
    }
}

// ---------------------------------------------------------------------------
// Neighbor sets under x-ordering

/// Row ordering (ascending x, ties by y then index) and per-row sets of
/// nearest neighbors among previously ordered rows.
#[derive(Debug, Clone)]
pub struct NeighborSets {
    /// ordered position -> original index
    pub order: Vec<usize>,
    /// coordinates in ordered sequence
    pub coords: Vec<Point>,
    /// per ordered row, neighbor positions (into the ordered sequence)
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
}

/// k nearest prior-ordered neighbors of every row under the x-ordering.
pub fn build_neighbor_sets(coords: &[Point], k: usize) -> Result<NeighborSets> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if coords.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let n = coords.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (coords[a].x, coords[a].y, a)
            .partial_cmp(&(coords[b].x, coords[b].y, b))
            .unwrap()
    });
    let ordered: Vec<Point> = order.iter().map(|&i| coords[i]).collect();

    let mut sets = Vec::with_capacity(n);
    for i in 0..n {
        let m = k.min(i);
        if m == 0 {
            sets.push(Vec::new());
            continue;
        }
        // backward scan with x-distance pruning: prior rows sorted by x, so
        // once (x_i - x_j)^2 exceeds the current k-th best we can stop
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(m + 1);
        let mut worst = f64::INFINITY;
        for j in (0..i).rev() {
            let dx2 = (ordered[i].x - ordered[j].x).powi(2);
            if best.len() == m && dx2 > worst {
                break;
            }
            let d2 = dx2 + (ordered[i].y - ordered[j].y).powi(2);
            if best.len() < m || (d2, j) < (best[best.len() - 1].0, best[best.len() - 1].1) {
                let pos = best.partition_point(|&(d, jj)| (d, jj) < (d2, j));
                best.insert(pos, (d2, j));
                if best.len() > m {
                    best.pop();
                }
                worst = best[best.len() - 1].0;
            }
        }
        sets.push(best.into_iter().map(|(_, j)| j).collect());
    }
    Ok(NeighborSets {
        order,
        coords: ordered,
        sets,
        k,
    })
}

// ---------------------------------------------------------------------------
// Vecchia factorization

/// Sparse factorization of the unit-sill matrix M = P + alpha*I:
/// per-row coefficients (rows of the strictly lower-triangular A) and
/// conditional variances (diagonal of D).
#[derive(Debug, Clone)]
pub struct VecchiaFactors {
    pub ordering: Vec<usize>,
    pub neighbor_sets: Vec<Vec<usize>>,
    pub a_rows: Vec<Vec<f64>>,
    pub d_diag: Vec<f64>,
    pub alpha: f64,
    pub phi: f64,
    pub k: usize,
}

pub fn vecchia_factors(sets: &NeighborSets, alpha: f64, phi: f64) -> Result<VecchiaFactors> {
    if alpha < 0.0 || phi <= 0.0 {
        return Err(Error::InvalidInput(
            "vecchia factors need alpha >= 0 and phi > 0".into(),
        ));
    }
    let corr = |a: Point, b: Point| (-phi * dist(a, b)).exp();
    let rows: Vec<Result<(Vec<f64>, f64)>> = sets
        .sets
        .par_iter()
        .enumerate()
        .map(|(i, neighbors)| {
            let m = neighbors.len();
            if m == 0 {
                return Ok((Vec::new(), 1.0 + alpha));
            }
            let mut m_nn = DMatrix::from_fn(m, m, |r, c| {
                corr(sets.coords[neighbors[r]], sets.coords[neighbors[c]])
            });
            for r in 0..m {
                m_nn[(r, r)] += alpha;
            }
            let m_ni =
                DVector::from_fn(m, |r, _| corr(sets.coords[neighbors[r]], sets.coords[i]));
            let chol = cholesky_jittered(&m_nn)?;
            let a = chol.solve(&m_ni);
            let d = (1.0 + alpha) - m_ni.dot(&a);
            if !(d > 0.0) {
                return Err(Error::Numerical(format!(
                    "nonpositive conditional variance at row {i}: {d}"
                )));
            }
            Ok((a.iter().copied().collect(), d))
        })
        .collect();

    let mut a_rows = Vec::with_capacity(rows.len());
    let mut d_diag = Vec::with_capacity(rows.len());
    for row in rows {
        let (a, d) = row?;
        a_rows.push(a);
        d_diag.push(d);
    }
    Ok(VecchiaFactors {
        ordering: sets.order.clone(),
        neighbor_sets: sets.sets.clone(),
        a_rows,
        d_diag,
        alpha,
        phi,
        k: sets.k,
    })
}

impl VecchiaFactors {
    pub fn n(&self) -> usize {
        self.d_diag.len()
    }

    /// Apply D^{-1/2}(I - A) to a vector given in ordered sequence.
    pub fn whiten_vec(&self, v_ordered: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(n, |i, _| {
            let mut acc = v_ordered[i];
            for (j, a) in self.neighbor_sets[i].iter().zip(&self.a_rows[i]) {
                acc -= a * v_ordered[*j];
            }
            acc / self.d_diag[i].sqrt()
        })
    }

    /// Apply D^{-1/2}(I - A) row-wise to a matrix given in ordered sequence.
    pub fn whiten_mat(&self, m_ordered: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let k = m_ordered.ncols();
        let mut out = DMatrix::zeros(n, k);
        for i in 0..n {
            let scale = self.d_diag[i].sqrt();
            for c in 0..k {
                let mut acc = m_ordered[(i, c)];
                for (j, a) in self.neighbor_sets[i].iter().zip(&self.a_rows[i]) {
                    acc -= a * m_ordered[(*j, c)];
                }
                out[(i, c)] = acc / scale;
            }
        }
        out
    }

    /// Quadratic form v' M^-1 v through the factorization, for a vector in
    /// original row order.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        let ordered = DVector::from_fn(self.n(), |i, _| v[self.ordering[i]]);
        self.whiten_vec(&ordered).norm_squared()
    }
}

// ---------------------------------------------------------------------------
// Conjugate fit and prediction

/// Normal-inverse-gamma prior on (beta, sigma2).
#[derive(Debug, Clone)]
pub struct NigPrior {
    pub mu: DVector<f64>,
    pub v: DMatrix<f64>,
    pub a: f64,
    pub b: f64,
}

impl NigPrior {
    /// Vague default: zero mean, 10^6 I coefficient covariance, IG(2, 1).
    pub fn vague(k: usize) -> Self {
        NigPrior {
            mu: DVector::zeros(k),
            v: DMatrix::identity(k, k) * 1e6,
            a: 2.0,
            b: 1.0,
        }
    }
}

/// Posterior of the conjugate model.
#[derive(Debug, Clone)]
pub struct NigPosterior {
    pub mu_beta: DVector<f64>,
    pub v_beta: DMatrix<f64>,
    pub a_post: f64,
    pub b_post: f64,
}

/// Conjugate update on Vecchia-whitened data. `x` and `y` are in original
/// row order; the factors carry the ordering.
pub fn conjugate_nngp_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    factors: &VecchiaFactors,
    prior: &NigPrior,
) -> Result<NigPosterior> {
    let n = factors.n();
    if x.nrows() != n || y.len() != n {
        return Err(Error::Schema("rows of X/y must match the factors".into()));
    }
    let k = x.ncols();
    if prior.mu.len() != k || prior.v.nrows() != k || prior.v.ncols() != k {
        return Err(Error::InvalidInput("prior dimensions must match K".into()));
    }
    let v0_chol = prior
        .v
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("prior V_beta not positive definite".into()))?;
    let v0_inv = v0_chol.inverse();

    let x_ord = DMatrix::from_fn(n, k, |i, c| x[(factors.ordering[i], c)]);
    let y_ord = DVector::from_fn(n, |i, _| y[factors.ordering[i]]);
    let xw = factors.whiten_mat(&x_ord);
    let yw = factors.whiten_vec(&y_ord);

    let precision = &v0_inv + xw.transpose() * &xw;
    let rhs = &v0_inv * &prior.mu + xw.transpose() * &yw;
    let prec_chol = cholesky_jittered(&precision)?;
    let mu_beta = prec_chol.solve(&rhs);
    let v_beta = prec_chol.inverse();

    let a_post = prior.a + n as f64 / 2.0;
    let b_post = prior.b
        + 0.5
            * (prior.mu.dot(&(&v0_inv * &prior.mu)) + yw.norm_squared()
                - mu_beta.dot(&(&precision * &mu_beta)));
    if !(b_post > 0.0) {
        return Err(Error::Numerical(format!(
            "nonpositive posterior scale {b_post}"
        )));
    }
    Ok(NigPosterior {
        mu_beta,
        v_beta,
        a_post,
        b_post,
    })
}

/// Student-t predictive at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TPrediction {
    pub mean: f64,
    /// Squared scale of the t distribution.
    pub var: f64,
    pub dof: f64,
}

/// Conjugate NNGP prediction: each query site is conditioned on its
/// `neighbors` nearest training sites. `neighbors = n_train` reproduces the
/// dense conjugate predictive exactly.
pub fn conjugate_nngp_predict(
    posterior: &NigPosterior,
    factors: &VecchiaFactors,
    x_train: &DMatrix<f64>,
    y_train: &DVector<f64>,
    coords_train: &[Point],
    x0: &DMatrix<f64>,
    coords0: &[Point],
    neighbors: usize,
) -> Result<Vec<TPrediction>> {
    let n = coords_train.len();
    if neighbors == 0 || neighbors > n {
        return Err(Error::Capacity(format!(
            "neighbors = {neighbors} outside [1, {n}]"
        )));
    }
    if x0.nrows() != coords0.len() {
        return Err(Error::Schema("query rows and coords must align".into()));
    }
    if x0.ncols() != x_train.ncols() {
        return Err(Error::Schema("query feature count mismatch".into()));
    }
    if coords0.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("non-finite query coordinate".into()));
    }
    let alpha = factors.alpha;
    let phi = factors.phi;
    let tree = KdTree::build(coords_train)?;
    let sigma2_hat = posterior.b_post / posterior.a_post;
    let dof = 2.0 * posterior.a_post;

    let out: Vec<Result<TPrediction>> = (0..coords0.len())
        .into_par_iter()
        .map(|q| {
            let row = tree.knn(coords0[q], neighbors, false)?;
            let m = row.indices.len();
            let mut m_nn = DMatrix::from_fn(m, m, |r, c| {
                (-phi * dist(coords_train[row.indices[r]], coords_train[row.indices[c]])).exp()
            });
            for r in 0..m {
                m_nn[(r, r)] += alpha;
            }
            let p0 = DVector::from_fn(m, |r, _| (-phi * row.distances[r]).exp());
            let chol = cholesky_jittered(&m_nn)?;
            let a0 = chol.solve(&p0);

            let x0_row = x0.row(q).transpose();
            let mut mean = x0_row.dot(&posterior.mu_beta);
            let mut g = x0_row.clone();
            for (r, &j) in row.indices.iter().enumerate() {
                let xj = x_train.row(j).transpose();
                mean += a0[r] * (y_train[j] - xj.dot(&posterior.mu_beta));
                g -= xj * a0[r];
            }
            let scaled = (1.0 + alpha) - p0.dot(&a0) + (&posterior.v_beta * &g).dot(&g);
            Ok(TPrediction {
                mean,
                var: (sigma2_hat * scaled).max(0.0),
                dof,
            })
        })
        .collect();
    out.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Grid search over (alpha, phi)

#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub alpha: f64,
    pub phi: f64,
    pub rmse: f64,
}

/// K-fold CV over the (alpha, phi) grid; returns the cell with the smallest
/// mean held-out RMSE (ties: smaller phi, then smaller alpha) and the full
/// table.
#[allow(clippy::too_many_arguments)]
pub fn grid_search_alpha_phi(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    coords: &[Point],
    alphas: &[f64],
    phis: &[f64],
    k_neighbors: usize,
    folds: usize,
    seed: u64,
) -> Result<(f64, f64, Vec<GridCell>)> {
    if alphas.is_empty() || phis.is_empty() {
        return Err(Error::InvalidInput("empty (alpha, phi) grid".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidInput("need at least 2 folds".into()));
    }
    let n = coords.len();
    let fold_sets = crate::eval::kfold(n, folds, seed)?;

    let mut table: Vec<GridCell> = Vec::new();
    let mut sums = vec![0.0f64; alphas.len() * phis.len()];

    for fold in &fold_sets {
        let test: &[usize] = fold;
        let train: Vec<usize> = (0..n).filter(|i| !test.contains(i)).collect();
        let coords_tr: Vec<Point> = train.iter().map(|&i| coords[i]).collect();
        let x_tr = DMatrix::from_fn(train.len(), x.ncols(), |r, c| x[(train[r], c)]);
        let y_tr = DVector::from_fn(train.len(), |r, _| y[train[r]]);
        let x_te = DMatrix::from_fn(test.len(), x.ncols(), |r, c| x[(test[r], c)]);
        let coords_te: Vec<Point> = test.iter().map(|&i| coords[i]).collect();
        let k_eff = k_neighbors.min(train.len() - 1).max(1);
        let sets = build_neighbor_sets(&coords_tr, k_eff)?;
        for (pi, &phi) in phis.iter().enumerate() {
            for (ai, &alpha) in alphas.iter().enumerate() {
                let factors = vecchia_factors(&sets, alpha, phi)?;
                let prior = NigPrior::vague(x.ncols());
                let post = conjugate_nngp_fit(&x_tr, &y_tr, &factors, &prior)?;
                let preds = conjugate_nngp_predict(
                    &post,
                    &factors,
                    &x_tr,
                    &y_tr,
                    &coords_tr,
                    &x_te,
                    &coords_te,
                    k_eff.min(train.len()),
                )?;
                let mse: f64 = preds
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.mean - y[test[i]]).powi(2))
                    .sum::<f64>()
                    / test.len() as f64;
                sums[pi * alphas.len() + ai] += mse.sqrt();
            }
        }
    }

    let mut best: Option<(f64, f64, f64)> = None;
    for (pi, &phi) in phis.iter().enumerate() {
        for (ai, &alpha) in alphas.iter().enumerate() {
            let rmse = sums[pi * alphas.len() + ai] / fold_sets.len() as f64;
            table.push(GridCell { alpha, phi, rmse });
            let better = match best {
                None => true,
                Some((_, bphi, brmse)) => {
                    rmse < brmse
                        || (rmse == brmse && phi < bphi)
                        || (rmse == brmse && phi == bphi && alpha < best.unwrap().0)
                }
            };
            if better {
                best = Some((alpha, phi, rmse));
            }
        }
    }
    let (alpha, phi, _) = best.unwrap();
    Ok((alpha, phi, table))
}

// ---------------------------------------------------------------------------
// Field simulation (used by the synthetic generator)

/// Draw one realization of a zero-mean exponential-covariance GP at the given
/// sites: dense Cholesky at small n, sequential NNGP sampling above.
pub fn simulate_gp_field(
    coords: &[Point],
    sigma2: f64,
    phi: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let n = coords.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let sigma = sigma2.sqrt();
    if n <= DENSE_CAP {
        let p = DMatrix::from_fn(n, n, |i, j| (-phi * dist(coords[i], coords[j])).exp());
        let chol = cholesky_jittered(&p)?;
        let z = DVector::from_fn(n, |_, _| standard_normal(rng));
        let w = chol.l() * z;
        return Ok(w.iter().map(|v| sigma * v).collect());
    }
    let sets = build_neighbor_sets(coords, 30.min(n - 1))?;
    let factors = vecchia_factors(&sets, 0.0, phi)?;
    let mut w_ord = vec![0.0f64; n];
    for i in 0..n {
        let mut mean = 0.0;
        for (j, a) in factors.neighbor_sets[i].iter().zip(&factors.a_rows[i]) {
            mean += a * w_ord[*j];
        }
        w_ord[i] = mean + factors.d_diag[i].sqrt() * standard_normal(rng);
    }
    let mut w = vec![0.0f64; n];
    for (pos, &orig) in factors.ordering.iter().enumerate() {
        w[orig] = sigma * w_ord[pos];
    }
    Ok(w)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the draw count per sample fixed
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
