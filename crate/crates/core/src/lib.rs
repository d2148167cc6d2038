//! Streaming Isomap toolkit.
//!
//! Learn an Isomap embedding from an initial batch, measure manifold quality
//! with Procrustes-based error metrics, find the sample size at which the
//! manifold stops changing, and map the rest of a stream onto the frozen
//! manifold with a cheap out-of-sample step.
//!
//! Pipeline modules, bottom up: [`data`] (datasets), [`knn`] (neighbor
//! graphs), [`geodesic`] (shortest paths), [`embed`] (classical scaling and
//! Isomap), [`procrustes`] (alignment and error metrics), [`stability`]
//! (error curves and transition detection) and [`stream`] (out-of-sample
//! mapping).

pub mod data;
pub mod eigen;
pub mod embed;
pub mod error;
pub mod geodesic;
pub mod knn;
mod matrix;
pub mod procrustes;
pub mod stability;
pub mod stream;

pub use data::{gen_swiss_roll, load_idx, make_stream, GroundTruth, StreamSource, SwissRoll};
pub use embed::{
    classical_mds, estimate_dim, isomap, isomap_full, residual_variance, DimDiagnostic, Embedding,
};
pub use error::{Error, ErrorKind, IdxError, Result};
pub use geodesic::{geodesic_matrix, largest_component, GeodesicMatrix};
pub use knn::{knn_graph, knn_query, NeighborGraph, NeighborQuery};
pub use matrix::DataMatrix;
pub use procrustes::{direct_error, procrustes_align, reference_sample_error, AlignmentResult};
pub use stability::{
    detect_transition, error_curve, fit_power_law, CurveConfig, ErrorCurve, ErrorMode,
    PowerLawFit, TransitionReport,
};
pub use stream::{approx_geodesics, map_point, run_stream, BatchModel, StreamMapping};

/// Re-exported so downstream crates share the matrix type used for
/// low-dimensional coordinates.
pub use nalgebra::{DMatrix, DVector};

/// Builds a [`BatchModel`] from a batch by running Isomap on it.
pub fn build_batch_model(batch: DataMatrix, k: usize, d: usize) -> Result<BatchModel> {
    BatchModel::build(batch, k, d)
}
