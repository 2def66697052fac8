//! Spatial prediction models for large hedonic (rent price) datasets.
//!
//! The crate provides the full model roster of a spatial benchmark study:
//!
//! - [`gp`] — OLS baseline, a dense Gaussian-process kriging oracle, and the
//!   conjugate nearest-neighbor GP (Vecchia factorization, normal-inverse-gamma
//!   update, Student-t prediction, grid search over the noise/range ratio).
//! - [`trees`] — CART regression trees, bagged random forests, and
//!   second-order gradient-boosted trees.
//! - [`mlp`] — a feedforward ReLU network trained by backpropagation with
//!   SGD / RMSprop / Adam.
//! - [`spatial_features`] — the spatial-dependence injection schemes for tree
//!   models: coordinate covariates, spatial lag, nearest-observation features,
//!   and Moran eigenvector bases (exact and Nystrom).
//! - [`geom`] — distance, k-nearest-neighbor, minimum-spanning-tree and
//!   k-means primitives the rest of the crate builds on.
//! - [`dataset`] — the property-record schema, CSV ingestion, one-hot
//!   encoding, and a seeded synthetic generator.
//! - [`eval`] — MAE/RMSE/MAPE metrics, price-band breakdowns, k-fold CV.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod geom;
pub mod gp;
pub mod mlp;
pub mod spatial_features;
pub mod trees;

pub use error::{Error, Result};
