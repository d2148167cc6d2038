//! Streaming Isomap: map new samples onto a frozen batch manifold.
//!
//! A [`BatchModel`] holds the batch samples, their geodesic matrix and
//! embedding. Each stream point is placed by approximating its geodesic
//! distances to the batch through its `k` nearest batch neighbors, turning
//! those into inner products with the batch embedding by classical-scaling
//! centering, and solving a small least-squares problem. Per point this costs
//! `O(n·(D + k + d))` for a batch of `n` samples; the model is never updated.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::dense::fmt_f64;
use crate::eigen::LeastSquares;
use crate::embed::{isomap_full, Embedding};
use crate::error::{Error, Result};
use crate::geodesic::GeodesicMatrix;
use crate::knn::{knn_query, NeighborQuery};
use crate::matrix::DataMatrix;

/// Relative rank tolerance for the batch embedding's least-squares factor.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BatchModel {
    batch: DataMatrix,
    geodesics: GeodesicMatrix,
    embedding: Embedding,
    k: usize,
    /// Row means of the elementwise-squared geodesic matrix.
    sq_row_means: Vec<f64>,
    sq_grand_mean: f64,
    /// Column sums of the batch embedding (zero up to round-off).
    col_sums: DVector<f64>,
    solver: LeastSquares,
}

impl BatchModel {
    /// Learns the batch manifold with Isomap and freezes it.
    pub fn build(batch: DataMatrix, k: usize, d: usize) -> Result<Self> {
        if d == 0 || d >= batch.rows() {
            return Err(Error::invalid(format!(
                "embedding dimension must be in [1, {}), got {d}",
                batch.rows()
            )));
        }
        let out = isomap_full(&batch, k, d)?;
        Self::from_parts(batch, out.geodesics, out.embedding, k)
    }

    /// Freezes an already computed batch manifold.
    pub fn from_parts(
        batch: DataMatrix,
        geodesics: GeodesicMatrix,
        embedding: Embedding,
        k: usize,
    ) -> Result<Self> {
        let n = batch.rows();
        if geodesics.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: geodesics.n() });
        }
        if embedding.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: embedding.n() });
        }
        if k == 0 || k > n {
            return Err(Error::invalid(format!("k must be in [1, {n}], got {k}")));
        }
        let solver = LeastSquares::new(&embedding.coords, RANK_TOL)?;
        let sq_row_means: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| geodesics.row(i).iter().map(|v| v * v).sum::<f64>() / n as f64)
            .collect();
        let sq_grand_mean = sq_row_means.iter().sum::<f64>() / n as f64;
        let col_sums = embedding.coords.row_sum().transpose();
        Ok(Self { batch, geodesics, embedding, k, sq_row_means, sq_grand_mean, col_sums, solver })
    }

    pub fn batch(&self) -> &DataMatrix {
        &self.batch
    }

    pub fn geodesics(&self) -> &GeodesicMatrix {
        &self.geodesics
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.batch.rows()
    }

    pub fn d(&self) -> usize {
        self.embedding.d()
    }

    /// Condition number of `Y_bᵀY_b`.
    pub fn normal_condition(&self) -> f64 {
        self.solver.normal_condition()
    }
}

/// Approximate geodesic distances from a query to every batch sample:
/// `g_i = min_j (kDist_j + G_b[kNN_j, i])`.
pub fn approx_geodesics(model: &BatchModel, q: &NeighborQuery) -> Vec<f64> {
    let mut g = vec![f64::INFINITY; model.n()];
    for (j, dist) in q.iter() {
        for (gi, &gb) in g.iter_mut().zip(model.geodesics.row(j)) {
            let via = dist + gb;
            if via < *gi {
                *gi = via;
            }
        }
    }
    g
}

/// Target inner products `c` between the new point and the batch embedding,
/// from classical-scaling centering of squared geodesics.
pub fn inner_products(model: &BatchModel, g: &[f64]) -> DVector<f64> {
    let n = g.len();
    let sq_mean = g.iter().map(|v| v * v).sum::<f64>() / n as f64;
    DVector::from_iterator(
        n,
        g.iter().zip(&model.sq_row_means).map(|(gi, rm)| {
            0.5 * (sq_mean - gi * gi - model.sq_grand_mean + rm)
        }),
    )
}

/// One mapped stream point with its least-squares diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedPoint {
    pub coords: Vec<f64>,
    /// Least-squares solution `p` before recentring.
    pub projection: Vec<f64>,
    /// `‖Y_b·p − c‖`.
    pub residual: f64,
    /// `‖c‖`.
    pub target_norm: f64,
}

pub fn map_point_detailed(model: &BatchModel, x: &[f64]) -> Result<MappedPoint> {
    let q = knn_query(&model.batch, x, model.k)?;
    let g = approx_geodesics(model, &q);
    let c = inner_products(model, &g);
    let p = model.solver.solve(&c);
    let residual = (&model.embedding.coords * &p - &c).norm();
    // Recentre the stacked embedding [Y_b; p] and keep the new row.
    let n1 = (model.n() + 1) as f64;
    let coords = p.iter().zip(model.col_sums.iter()).map(|(pi, s)| pi - (s + pi) / n1).collect();
    Ok(MappedPoint { coords, projection: p.iter().copied().collect(), residual, target_norm: c.norm() })
}

/// Embeds a single stream sample; the model is not modified.
pub fn map_point(model: &BatchModel, x: &[f64]) -> Result<Vec<f64>> {
    map_point_detailed(model, x).map(|m| m.coords)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamMapping {
    /// `m × d`, one row per stream point in arrival order.
    pub coords: DMatrix<f64>,
    /// Wall-clock time per point, nanoseconds.
    pub per_point_nanos: Vec<u64>,
    pub residuals: Vec<f64>,
    pub target_norms: Vec<f64>,
}

impl StreamMapping {
    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn total_nanos(&self) -> u64 {
        self.per_point_nanos.iter().sum()
    }

    /// CSV: `d` coordinate columns followed by the per-point latency in ns.
    pub fn write_csv<W: Write>(&self, mut w: W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            writeln!(w, "# {c}")?;
        }
        let mut line = String::new();
        for (r, ns) in self.per_point_nanos.iter().enumerate() {
            line.clear();
            for c in 0..self.coords.ncols() {
                line.push_str(&fmt_f64(self.coords[(r, c)]));
                line.push(',');
            }
            line.push_str(&ns.to_string());
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn assemble(model: &BatchModel, mapped: Vec<MappedPoint>, nanos: Vec<u64>) -> StreamMapping {
    let d = model.d();
    let coords = DMatrix::from_fn(mapped.len(), d, |r, c| mapped[r].coords[c]);
    StreamMapping {
        coords,
        per_point_nanos: nanos,
        residuals: mapped.iter().map(|m| m.residual).collect(),
        target_norms: mapped.iter().map(|m| m.target_norm).collect(),
    }
}

/// Maps stream points one at a time in arrival order, timing each.
pub fn run_stream<'a, I>(model: &BatchModel, points: I) -> Result<StreamMapping>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut mapped = Vec::new();
    let mut nanos = Vec::new();
    for x in points {
        let start = Instant::now();
        let m = map_point_detailed(model, x)?;
        nanos.push(start.elapsed().as_nanos() as u64);
        mapped.push(m);
    }
    Ok(assemble(model, mapped, nanos))
}

/// Maps all rows of `points` in parallel; output rows keep arrival order.
/// Per-point times are measured inside each worker.
pub fn run_stream_par(model: &BatchModel, points: &DataMatrix) -> Result<StreamMapping> {
    let out: Vec<(MappedPoint, u64)> = (0..points.rows())
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let m = map_point_detailed(model, points.row(i))?;
            Ok((m, start.elapsed().as_nanos() as u64))
        })
        .collect::<Result<_>>()?;
    let (mapped, nanos) = out.into_iter().unzip();
    Ok(assemble(model, mapped, nanos))
}
