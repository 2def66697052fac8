//! Spatial-dependence features for the tree and network models: coordinate
//! covariates, spatial-lag variables from a row-standardized k-NN weight
//! matrix, nearest-neighbor observation/distance columns, and Moran
//! eigenvector bases (exact and Nyström-approximated).

use crate::error::{Error, Result};
use crate::geom::{self, KdTree, Point};
use nalgebra::{DMatrix, SymmetricEigen};

/// Dense eigendecomposition cap for the exact Moran basis.
pub const MORAN_DENSE_CAP: usize = 10_000;

const MIN_DISTANCE: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Coordinate covariates

/// Appends the x and y coordinates (km) as two extra design-matrix columns.
pub fn add_coordinates(x: &DMatrix<f64>, coords: &[Point]) -> Result<DMatrix<f64>> {
    if coords.len() != x.nrows() {
        return Err(Error::Schema(format!(
            "{} coordinate rows for {} design rows",
            coords.len(),
            x.nrows()
        )));
    }
    let mut out = DMatrix::zeros(x.nrows(), x.ncols() + 2);
    out.view_mut((0, 0), (x.nrows(), x.ncols())).copy_from(x);
    for (i, p) in coords.iter().enumerate() {
        out[(i, x.ncols())] = p.x;
        out[(i, x.ncols() + 1)] = p.y;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Spatial lag

/// Row-standardized k-NN weights: w_ij = (1/d_ij) / Σ_j (1/d_ij) over the k
/// nearest training sites, with no self-weight on training rows.
#[derive(Debug, Clone)]
pub struct SpatialWeights {
    pub k: usize,
    /// Per query site: (training index, weight) with weights summing to 1.
    pub rows: Vec<Vec<(usize, f64)>>,
}

/// Builds weights for `query` sites against the `train` sites. Training rows
/// pass their own coordinates with `exclude_self = true`.
pub fn spatial_weights(
    train: &[Point],
    query: &[Point],
    k: usize,
    exclude_self: bool,
) -> Result<SpatialWeights> {
    let tree = KdTree::build(train)?;
    let mut rows = Vec::with_capacity(query.len());
    for &q in query {
        let nn = tree.knn(q, k, exclude_self)?;
        let raw: Vec<f64> = nn
            .distances
            .iter()
            .map(|&d| 1.0 / d.max(MIN_DISTANCE))
            .collect();
        let total: f64 = raw.iter().sum();
        rows.push(
            nn.indices
                .iter()
                .zip(&raw)
                .map(|(&i, &w)| (i, w / total))
                .collect(),
        );
    }
    Ok(SpatialWeights { k, rows })
}

/// lag_i = Σ_j w_ij · value_j over the training values.
pub fn spatial_lag(weights: &SpatialWeights, values: &[f64]) -> Result<Vec<f64>> {
    weights
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(j, w)| {
                    values
                        .get(j)
                        .map(|v| w * v)
                        .ok_or_else(|| Error::Schema(format!("neighbor index {j} out of range")))
                })
                .sum()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// RF-SI features

/// Per query row: (obs_1, dist_1, ..., obs_k, dist_k) by ascending distance
/// to the k nearest training sites. Training rows use `exclude_self = true`.
pub fn rfsi_features(
    train: &[Point],
    train_y: &[f64],
    query: &[Point],
    k: usize,
    exclude_self: bool,
) -> Result<DMatrix<f64>> {
    if train_y.len() != train.len() {
        return Err(Error::Schema("training y must match coordinates".into()));
    }
    let eligible = if exclude_self {
        train.len().saturating_sub(1)
    } else {
        train.len()
    };
    if k == 0 || k > eligible {
        return Err(Error::Capacity(format!(
            "k = {k} outside [1, {eligible}] eligible neighbors"
        )));
    }
    let tree = KdTree::build(train)?;
    let mut out = DMatrix::zeros(query.len(), 2 * k);
    for (i, &q) in query.iter().enumerate() {
        let nn = tree.knn(q, k, exclude_self)?;
        for (j, (&idx, &d)) in nn.indices.iter().zip(&nn.distances).enumerate() {
            out[(i, 2 * j)] = train_y[idx];
            out[(i, 2 * j + 1)] = d;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Moran eigenvector basis

/// Eigenvectors/eigenvalues of the doubly-centered distance kernel
/// C_ij = exp(-d_ij / q) (zero diagonal), q the longest minimum-spanning-tree
/// edge. Eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct MoranBasis {
    pub h: usize,
    pub eigenvectors: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub kernel_scale: f64,
}

fn kernel_scale(coords: &[Point]) -> Result<f64> {
    let q = geom::mst_max_edge(coords)?;
    if q <= 0.0 {
        return Err(Error::InvalidInput(
            "degenerate site set: all coordinates coincide".into(),
        ));
    }
    Ok(q)
}

/// C between `rows` and `cols` with exp(-d/q); when the slices are the same
/// site set the diagonal is zeroed.
fn kernel_matrix(rows: &[Point], cols: &[Point], q: f64, zero_diagonal: bool) -> DMatrix<f64> {
    let mut c = DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        let d = ((rows[i].x - cols[j].x).powi(2) + (rows[i].y - cols[j].y).powi(2)).sqrt();
        (-d / q).exp()
    });
    if zero_diagonal {
        for i in 0..rows.len().min(cols.len()) {
            c[(i, i)] = 0.0;
        }
    }
    c
}

/// In-place double centering: C <- M C M with M = I - 11'/n.
fn double_center(c: &mut DMatrix<f64>) {
    let n = c.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| c.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    // symmetric input, so column means equal row means
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] += grand - row_means[i] - row_means[j];
        }
    }
}

fn sorted_eigen(c: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = c.nrows();
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    (vectors, values)
}

/// Exact top-h Moran eigenpairs via dense symmetric eigendecomposition.
pub fn moran_exact(coords: &[Point], h: usize) -> Result<MoranBasis> {
    let n = coords.len();
    if n >= MORAN_DENSE_CAP {
        return Err(Error::Capacity(format!(
            "{n} sites exceeds the dense eigendecomposition cap {MORAN_DENSE_CAP}; use moran_nystrom"
        )));
    }
    if h == 0 || h > n {
        return Err(Error::Capacity(format!("h = {h} outside [1, {n}]")));
    }
    let q = kernel_scale(coords)?;
    let mut c = kernel_matrix(coords, coords, q, true);
    double_center(&mut c);
    let (vectors, values) = sorted_eigen(c);
    let mut eigenvectors = vectors.columns(0, h).into_owned();
    // the centered kernel annihilates constants, so its null space holds the
    // constant vector; center each returned column and zero out the one that
    // was the constant (its eigenvalue is 0, so downstream identities hold)
    for mut col in eigenvectors.column_iter_mut() {
        let mean = col.sum() / n as f64;
        col.add_scalar_mut(-mean);
        if col.norm() < 1e-8 {
            col.fill(0.0);
        }
    }
    Ok(MoranBasis {
        h,
        eigenvectors,
        eigenvalues: values[..h].to_vec(),
        kernel_scale: q,
    })
}

/// Out-of-sample extension map for a Nyström Moran basis: query columns are
/// `[c(s0, anchors) - colmean(C_h + I_h)'] E_h (Λ_h + I_h)^{-1}`, then the
/// same centering offset and unit-norm scale fitted on the training sites.
#[derive(Debug, Clone)]
pub struct NystromMap {
    pub anchors: Vec<Point>,
    pub kernel_scale: f64,
    e_h: DMatrix<f64>,
    inv_shift: Vec<f64>,
    col_means: Vec<f64>,
    offset: Vec<f64>,
    scale: Vec<f64>,
}

impl NystromMap {
    /// Basis values at arbitrary query sites, consistent with the training
    /// columns (extending the training coordinates reproduces them).
    pub fn extend(&self, query: &[Point]) -> Result<DMatrix<f64>> {
        if query.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite query coordinate".into()));
        }
        let raw = self.extend_raw(query);
        let h = self.e_h.ncols();
        Ok(DMatrix::from_fn(query.len(), h, |i, j| {
            (raw[(i, j)] - self.offset[j]) / self.scale[j]
        }))
    }

    fn extend_raw(&self, query: &[Point]) -> DMatrix<f64> {
        let mut c = kernel_matrix(query, &self.anchors, self.kernel_scale, false);
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                c[(i, j)] -= self.col_means[j];
            }
        }
        let mut e = c * &self.e_h;
        for j in 0..e.ncols() {
            let s = self.inv_shift[j];
            e.column_mut(j).scale_mut(s);
        }
        e
    }
}

/// Nyström approximation of the first h Moran eigenpairs with k-means anchor
/// sites; eigenvalues rescaled by (n/h)(Λ_h + I_h) - I_h.
pub fn moran_nystrom(coords: &[Point], h: usize, seed: u64) -> Result<(MoranBasis, NystromMap)> {
    let n = coords.len();
    if h == 0 || h > n {
        return Err(Error::Capacity(format!("h = {h} outside [1, {n}]")));
    }
    let anchors = geom::kmeans_anchors(coords, h, seed)?;
    nystrom_from_anchors(coords, anchors, h)
}

/// Exact top-h Moran basis together with the anchors-at-sites extension map,
/// so held-out sites receive consistent eigenvector values. Subject to the
/// same dense cap as `moran_exact`.
pub fn moran_exact_with_extension(
    coords: &[Point],
    h: usize,
) -> Result<(MoranBasis, NystromMap)> {
    let n = coords.len();
    if n >= MORAN_DENSE_CAP {
        return Err(Error::Capacity(format!(
            "{n} sites exceeds the dense eigendecomposition cap {MORAN_DENSE_CAP}; use moran_nystrom"
        )));
    }
    if h == 0 || h > n {
        return Err(Error::Capacity(format!("h = {h} outside [1, {n}]")));
    }
    nystrom_from_anchors(coords, coords.to_vec(), h)
}

fn nystrom_from_anchors(
    coords: &[Point],
    anchors: Vec<Point>,
    keep: usize,
) -> Result<(MoranBasis, NystromMap)> {
    let n = coords.len();
    let n_anchors = anchors.len();
    let q = kernel_scale(coords)?;

    let mut c_h = kernel_matrix(&anchors, &anchors, q, true);
    let col_means: Vec<f64> = (0..n_anchors)
        .map(|j| (c_h.column(j).sum() + 1.0) / n_anchors as f64) // +1 for the identity
        .collect();
    double_center(&mut c_h);
    let (e_full, lam_full) = sorted_eigen(c_h);
    let e_h = e_full.columns(0, keep).into_owned();
    let lam_kept = lam_full[..keep].to_vec();
    let inv_shift: Vec<f64> = lam_kept
        .iter()
        .map(|&l| {
            let s = l + 1.0;
            if s.abs() < 1e-12 {
                0.0
            } else {
                1.0 / s
            }
        })
        .collect();

    let mut map = NystromMap {
        anchors,
        kernel_scale: q,
        e_h,
        inv_shift,
        col_means,
        offset: vec![0.0; keep],
        scale: vec![1.0; keep],
    };

    // fit the centering/normalization of each column on the training sites
    let raw = map.extend_raw(coords);
    for j in 0..keep {
        let mean = raw.column(j).sum() / n as f64;
        let norm = raw
            .column(j)
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            .sqrt();
        map.offset[j] = mean;
        map.scale[j] = if norm < 1e-12 { 1.0 } else { norm };
    }
    let eigenvectors = map.extend(coords)?;
    let eigenvalues: Vec<f64> = lam_kept
        .iter()
        .map(|&l| (n as f64 / n_anchors as f64) * (l + 1.0) - 1.0)
        .collect();
    Ok((
        MoranBasis {
            h: keep,
            eigenvectors,
            eigenvalues,
            kernel_scale: q,
        },
        map,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scatter(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
            .collect()
    }

    #[test]
    fn add_coordinates_appends_two_columns() {
        let x = DMatrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64);
        let coords = vec![
            Point::new(1.0, 2.0),
            Point::new(3.0, 4.0),
            Point::new(5.0, 6.0),
        ];
        let out = add_coordinates(&x, &coords).unwrap();
        assert_eq!(out.ncols(), 6);
        assert_eq!(out.view((0, 0), (3, 4)), x.view((0, 0), (3, 4)));
        assert_eq!(out[(1, 4)], 3.0);
        assert_eq!(out[(2, 5)], 6.0);
    }

    #[test]
    fn add_coordinates_zero_coords() {
        let x = DMatrix::from_element(2, 1, 7.0);
        let coords = vec![Point::new(0.0, 0.0); 2];
        let out = add_coordinates(&x, &coords).unwrap();
        assert_eq!(out.column(1).sum(), 0.0);
        assert_eq!(out.column(2).sum(), 0.0);
    }

    #[test]
    fn add_coordinates_row_mismatch() {
        let x = DMatrix::zeros(3, 2);
        assert!(matches!(
            add_coordinates(&x, &[Point::new(0.0, 0.0)]),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn lag_two_points_swaps_values() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let w = spatial_weights(&pts, &pts, 1, true).unwrap();
        let lag = spatial_lag(&w, &[3.0, 5.0]).unwrap();
        assert_eq!(lag, vec![5.0, 3.0]);
    }

    #[test]
    fn lag_three_equidistant_is_mean_of_others() {
        // equilateral triangle
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.75f64.sqrt()),
        ];
        let w = spatial_weights(&pts, &pts, 2, true).unwrap();
        let y = [1.0, 5.0, 9.0];
        let lag = spatial_lag(&w, &y).unwrap();
        assert_relative_eq!(lag[0], 7.0, epsilon = 1e-12);
        assert_relative_eq!(lag[1], 5.0, epsilon = 1e-12);
        assert_relative_eq!(lag[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn lag_of_constant_is_constant() {
        let pts = scatter(25, 0);
        let w = spatial_weights(&pts, &pts, 5, true).unwrap();
        for v in spatial_lag(&w, &vec![2.5; 25]).unwrap() {
            assert_relative_eq!(v, 2.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn lag_rows_standardized_and_convex() {
        let pts = scatter(40, 1);
        let w = spatial_weights(&pts, &pts, 6, true).unwrap();
        for row in &w.rows {
            let s: f64 = row.iter().map(|&(_, w)| w).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-12);
            assert!(row.iter().all(|&(_, w)| w >= 0.0));
        }
        let y: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &v| {
            (a.0.min(v), a.1.max(v))
        });
        for v in spatial_lag(&w, &y).unwrap() {
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn lag_bad_index_is_schema_error() {
        let w = SpatialWeights {
            k: 1,
            rows: vec![vec![(5, 1.0)]],
        };
        assert!(matches!(spatial_lag(&w, &[1.0]), Err(Error::Schema(_))));
    }

    #[test]
    fn rfsi_query_at_training_point() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        let y = [10.0, 20.0];
        let f = rfsi_features(&pts, &y, &[pts[1]], 1, false).unwrap();
        assert_eq!(f[(0, 0)], 20.0);
        assert_eq!(f[(0, 1)], 0.0);
    }

    #[test]
    fn rfsi_collinear_matches_brute_force() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(4.0, 0.0),
        ];
        let y = [1.0, 2.0, 3.0];
        let q = Point::new(1.5, 0.0); // nearest 1 (d 0.5), then 0 (d 1.5)
        let f = rfsi_features(&pts, &y, &[q], 2, false).unwrap();
        assert_eq!(f.row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn rfsi_exclude_self_omits_own_row() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(3.0, 0.0),
        ];
        let y = [7.0, 8.0, 9.0];
        let f = rfsi_features(&pts, &y, &pts, 2, true).unwrap();
        // row 0: neighbors are points 1 and 2, never 7.0 at distance 0
        assert_eq!(f[(0, 0)], 8.0);
        assert_eq!(f[(0, 1)], 1.0);
        assert_eq!(f[(0, 2)], 9.0);
        assert_eq!(f[(0, 3)], 3.0);
    }

    #[test]
    fn rfsi_distances_ascending() {
        let pts = scatter(30, 2);
        let y: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let f = rfsi_features(&pts, &y, &scatter(10, 3), 5, false).unwrap();
        for i in 0..10 {
            for j in 0..4 {
                assert!(f[(i, 2 * j + 1)] <= f[(i, 2 * j + 3)]);
            }
        }
    }

    #[test]
    fn rfsi_k_too_large_is_capacity_error() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert!(matches!(
            rfsi_features(&pts, &[1.0, 2.0], &pts, 2, true),
            Err(Error::Capacity(_))
        ));
    }

    fn mcm(coords: &[Point]) -> DMatrix<f64> {
        let q = kernel_scale(coords).unwrap();
        let mut c = kernel_matrix(coords, coords, q, true);
        double_center(&mut c);
        c
    }

    #[test]
    fn moran_exact_two_points() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let basis = moran_exact(&pts, 2).unwrap();
        // q = 1, kernel off-diagonal exp(-1); centered spectrum {0, -exp(-1)}
        assert_relative_eq!(basis.eigenvalues[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(basis.eigenvalues[1], -(-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn moran_exact_columns_centered() {
        let pts = scatter(30, 4);
        let basis = moran_exact(&pts, 10).unwrap();
        for j in 0..10 {
            assert!(basis.eigenvectors.column(j).sum().abs() / 30.0 < 1e-10);
        }
    }

    #[test]
    fn moran_exact_eigenpair_residuals() {
        let pts = scatter(25, 5);
        let basis = moran_exact(&pts, 25).unwrap();
        let m = mcm(&pts);
        for j in 0..25 {
            let e = basis.eigenvectors.column(j).into_owned();
            let resid = &m * &e - basis.eigenvalues[j] * &e;
            assert!(resid.norm() < 1e-8, "residual {} at pair {j}", resid.norm());
        }
    }

    #[test]
    fn moran_exact_full_reconstruction() {
        let pts = scatter(15, 6);
        let basis = moran_exact(&pts, 15).unwrap();
        let m = mcm(&pts);
        let mut rec = DMatrix::zeros(15, 15);
        for j in 0..15 {
            let e = basis.eigenvectors.column(j).into_owned();
            rec += basis.eigenvalues[j] * &e * e.transpose();
        }
        assert!((rec - m).norm() < 1e-8);
    }

    #[test]
    fn moran_exact_eigenvalues_descending() {
        let pts = scatter(20, 7);
        let basis = moran_exact(&pts, 20).unwrap();
        for w in basis.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn moran_exact_capacity() {
        let pts = vec![Point::new(0.0, 0.0); MORAN_DENSE_CAP];
        assert!(matches!(moran_exact(&pts, 1), Err(Error::Capacity(_))));
        let small = scatter(5, 0);
        assert!(matches!(moran_exact(&small, 6), Err(Error::Capacity(_))));
    }

    #[test]
    fn nystrom_full_rank_matches_exact() {
        let pts = scatter(40, 8);
        let exact = moran_exact(&pts, 40).unwrap();
        let (approx, _) = moran_nystrom(&pts, 40, 11).unwrap();
        // compare the leading well-separated pairs by absolute correlation;
        // the lambda = 0 pair is the annihilated constant and carries no
        // defined direction, so skip it
        for j in 0..10 {
            if exact.eigenvalues[j].abs() < 1e-8 {
                continue;
            }
            let a = approx.eigenvectors.column(j);
            let b = exact.eigenvectors.column(j);
            let r = a.dot(&b) / (a.norm() * b.norm());
            assert!(r.abs() >= 0.999, "column {j} correlation {r}");
        }
    }

    #[test]
    fn nystrom_h1_unit_norm() {
        let pts = scatter(20, 9);
        let (basis, _) = moran_nystrom(&pts, 1, 0).unwrap();
        assert_eq!(basis.eigenvectors.ncols(), 1);
        assert_relative_eq!(basis.eigenvectors.column(0).norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn nystrom_deterministic() {
        let pts = scatter(30, 10);
        let (a, _) = moran_nystrom(&pts, 8, 42).unwrap();
        let (b, _) = moran_nystrom(&pts, 8, 42).unwrap();
        assert_eq!(a.eigenvectors, b.eigenvectors);
        assert_eq!(a.eigenvalues, b.eigenvalues);
    }

    #[test]
    fn nystrom_extension_reproduces_training_columns() {
        let pts = scatter(35, 11);
        let (basis, map) = moran_nystrom(&pts, 6, 3).unwrap();
        let again = map.extend(&pts).unwrap();
        assert!((again - &basis.eigenvectors).norm() < 1e-10);
    }

    #[test]
    fn exact_with_extension_matches_exact_basis() {
        let pts = scatter(30, 13);
        let exact = moran_exact(&pts, 30).unwrap();
        let (basis, map) = moran_exact_with_extension(&pts, 8).unwrap();
        assert_eq!(basis.eigenvectors.ncols(), 8);
        for j in 0..8 {
            assert_relative_eq!(basis.eigenvalues[j], exact.eigenvalues[j], epsilon = 1e-8);
            let a = basis.eigenvectors.column(j);
            let b = exact.eigenvectors.column(j);
            if b.norm() < 1e-8 {
                continue; // annihilated constant direction
            }
            let r = a.dot(&b) / (a.norm() * b.norm());
            assert!(r.abs() > 1.0 - 1e-8, "column {j} correlation {r}");
        }
        // held-out extension agrees with training columns at training sites
        let again = map.extend(&pts).unwrap();
        assert!((again - &basis.eigenvectors).norm() < 1e-10);
    }

    #[test]
    fn nystrom_h_above_n_is_capacity_error() {
        let pts = scatter(5, 12);
        assert!(matches!(moran_nystrom(&pts, 6, 0), Err(Error::Capacity(_))));
    }
}
