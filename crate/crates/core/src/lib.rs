//! Density-based clustering with automatic radius selection.
//!
//! The number of DBSCAN clusters as a function of the neighborhood radius is
//! close to unimodal, so its mode can be located by ternary search instead
//! of an exhaustive sweep. This crate provides exact DBSCAN, the search and
//! its sampling-based bounds, sweep and dip-test tooling for checking the
//! unimodality assumption, closed-form predictions for uniform data, and
//! clustering agreement metrics.

pub mod curve;
pub mod data;
pub mod dbscan;
pub mod dip;
pub mod error;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod search;
pub mod synth;
pub mod theory;

pub use data::{distance, DataMatrix, Metric};
pub use dbscan::{
    approximate_diameter_ub, count_clusters, dbscan, noise_fraction, region_query, DbscanParams, Label, Labeling,
    PointRole,
};
pub use error::{Error, Result};
pub use search::{ternary_search, ts_clustering, tse_estimate, SearchBounds, TuneConfig};
