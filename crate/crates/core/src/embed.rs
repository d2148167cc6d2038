//! Classical scaling of geodesic distances and the Isomap pipeline.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::eigen::{top_eigenpairs, EigenSolver, SymView};
use crate::error::{Error, Result};
use crate::geodesic::{geodesic_matrix, GeodesicMatrix};
use crate::knn::knn_graph;
use crate::matrix::DataMatrix;

/// Low-dimensional coordinates, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: DMatrix<f64>,
    /// Retained eigenvalues, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues as returned by the solver, before clamping.
    pub raw_eigenvalues: Vec<f64>,
    /// Columns whose eigenvalue was not positive; these are zero-filled.
    pub clamped: Vec<usize>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn d(&self) -> usize {
        self.coords.ncols()
    }

    /// True when fewer than `d` positive eigenvalues were available.
    pub fn is_degenerate(&self) -> bool {
        !self.clamped.is_empty()
    }

    /// The first `d` dimensions. Eigenpairs are nested, so this equals a
    /// fresh `d`-dimensional embedding.
    pub fn truncate(&self, d: usize) -> Self {
        let d = d.min(self.d());
        Self {
            coords: self.coords.columns(0, d).into_owned(),
            eigenvalues: self.eigenvalues[..d].to_vec(),
            raw_eigenvalues: self.raw_eigenvalues[..d].to_vec(),
            clamped: self.clamped.iter().copied().filter(|&c| c < d).collect(),
        }
    }

    /// CSV with `d` columns per row, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, w: W, header_comment: Option<&str>) -> Result<()> {
        let rows: Vec<Vec<f64>> =
            self.coords.row_iter().map(|r| r.iter().copied().collect()).collect();
        crate::data::dense::write_rows(w, header_comment, rows.iter().map(|r| r.as_slice()))
    }
}

/// `B = −½·H·S·H` with `S` the elementwise-squared distances, row-major.
pub fn double_center(g: &GeodesicMatrix) -> Vec<f64> {
    let n = g.n();
    let row_means: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| g.row(i).iter().map(|v| v * v).sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    b.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let gi = g.row(i);
        let ri = row_means[i];
        for (j, out) in row.iter_mut().enumerate() {
            *out = -0.5 * (gi[j] * gi[j] - ri - row_means[j] + grand);
        }
    });
    b
}

pub fn classical_mds(g: &GeodesicMatrix, d: usize) -> Result<Embedding> {
    classical_mds_with(g, d, EigenSolver::Auto)
}

pub fn classical_mds_with(g: &GeodesicMatrix, d: usize, solver: EigenSolver) -> Result<Embedding> {
    let n = g.n();
    if d == 0 || d >= n {
        return Err(Error::invalid(format!("embedding dimension must be in [1, {n}), got {d}")));
    }
    let b = double_center(g);
    let top = top_eigenpairs(SymView { n, data: &b }, d, solver)?;
    drop(b);

    let mut coords = DMatrix::zeros(n, d);
    let mut eigenvalues = Vec::with_capacity(d);
    let mut clamped = Vec::new();
    let scale = top.values.first().copied().unwrap_or(0.0).abs();
    for (c, &lambda) in top.values.iter().enumerate() {
        // Values at round-off level relative to the leading one are zero.
        if !(lambda > 1e-12 * scale) {
            clamped.push(c);
            eigenvalues.push(0.0);
            continue;
        }
        eigenvalues.push(lambda);
        let v = top.vectors.column(c);
        // Sign convention: the largest-magnitude entry is positive.
        let pivot = v.iter().fold(0.0f64, |best, &x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        let s = sign * lambda.sqrt();
        let mean = v.iter().sum::<f64>() / n as f64;
        for r in 0..n {
            coords[(r, c)] = s * (v[r] - mean);
        }
    }
    if !clamped.is_empty() {
        log::warn!(
            "only {} of {d} eigenvalues are positive; columns {clamped:?} zero-filled",
            d - clamped.len()
        );
    }
    Ok(Embedding { coords, eigenvalues, raw_eigenvalues: top.values, clamped })
}

/// Pairwise Euclidean distance between embedding rows `i` and `j`.
#[inline]
fn coord_dist(c: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..c.ncols() {
        let d = c[(i, k)] - c[(j, k)];
        s += d * d;
    }
    s.sqrt()
}

/// `1 − ρ²`, with `ρ` the Pearson correlation between geodesic distances and
/// embedding distances over all unordered pairs.
pub fn residual_variance(g: &GeodesicMatrix, e: &Embedding) -> Result<f64> {
    let n = g.n();
    if e.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: e.n() });
    }
    if n < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    // Per-row sums, merged afterwards; keeps the accumulation parallel.
    let sums = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = [0.0f64; 5];
            let gi = g.row(i);
            for j in i + 1..n {
                let x = gi[j];
                let y = coord_dist(&e.coords, i, j);
                acc[0] += x;
                acc[1] += y;
                acc[2] += x * x;
                acc[3] += y * y;
                acc[4] += x * y;
            }
            acc
        })
        .reduce(|| [0.0; 5], |a, b| std::array::from_fn(|k| a[k] + b[k]));
    let m = (n * (n - 1) / 2) as f64;
    let (mx, my) = (sums[0] / m, sums[1] / m);
    let vx = sums[2] / m - mx * mx;
    let vy = sums[3] / m - my * my;
    let cov = sums[4] / m - mx * my;
    let tiny = 1e-14;
    if !(vx > tiny * mx * mx) || !(vy > tiny * my * my) || vx <= 0.0 || vy <= 0.0 {
        return Err(Error::Degenerate("distance vector has zero variance".into()));
    }
    let rho = cov / (vx.sqrt() * vy.sqrt());
    Ok((1.0 - rho * rho).clamp(0.0, 1.0))
}

/// Default decrease in residual variance below which another dimension is
/// not worth keeping.
pub const DEFAULT_ELBOW: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct DimDiagnostic {
    /// `residual_variances[i]` belongs to dimension `i + 1`.
    pub residual_variances: Vec<f64>,
    pub chosen_d: usize,
}

pub fn estimate_dim(g: &GeodesicMatrix, d_max: usize) -> Result<DimDiagnostic> {
    estimate_dim_with(g, d_max, DEFAULT_ELBOW)
}

/// Sweeps `d = 1..=d_max` and picks the smallest `d` after which adding a
/// dimension lowers the residual variance by less than `elbow`.
pub fn estimate_dim_with(g: &GeodesicMatrix, d_max: usize, elbow: f64) -> Result<DimDiagnostic> {
    if d_max == 0 || d_max >= g.n() {
        return Err(Error::invalid(format!("d_max must be in [1, {}), got {d_max}", g.n())));
    }
    let full = classical_mds(g, d_max)?;
    let residual_variances = (1..=d_max)
        .map(|d| residual_variance(g, &full.truncate(d)))
        .collect::<Result<Vec<_>>>()?;
    let chosen_d = residual_variances
        .windows(2)
        .position(|w| w[0] - w[1] < elbow)
        .map_or(d_max, |i| i + 1);
    Ok(DimDiagnostic { residual_variances, chosen_d })
}

/// Geodesics and embedding produced by one Isomap run.
#[derive(Debug, Clone)]
pub struct IsomapOutput {
    pub geodesics: GeodesicMatrix,
    pub embedding: Embedding,
}

pub fn isomap_full(x: &DataMatrix, k: usize, d: usize) -> Result<IsomapOutput> {
    let graph = knn_graph(x, k)?;
    let geodesics = geodesic_matrix(&graph)?;
    drop(graph);
    let embedding = classical_mds(&geodesics, d)?;
    Ok(IsomapOutput { geodesics, embedding })
}

/// k-NN graph → geodesic matrix → classical scaling.
pub fn isomap(x: &DataMatrix, k: usize, d: usize) -> Result<Embedding> {
    isomap_full(x, k, d).map(|o| o.embedding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procrustes::procrustes_align;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_points(points: &[Vec<f64>]) -> GeodesicMatrix {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = crate::matrix::euclidean(&points[i], &points[j]);
            }
        }
        GeodesicMatrix::from_dense(n, dist).unwrap()
    }

    #[test]
    fn two_points() {
        let g = GeodesicMatrix::from_dense(2, vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        let e = classical_mds(&g, 1).unwrap();
        let mut c: Vec<f64> = e.coords.iter().copied().collect();
        c.sort_by(f64::total_cmp);
        assert!((c[0] + 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_collinear_points() {
        let g = from_points(&[vec![0.0], vec![1.0], vec![2.0]]);
        let e = classical_mds(&g, 1).unwrap();
        let c: Vec<f64> = e.coords.iter().copied().collect();
        let sign = c[0].signum();
        for (got, want) in c.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got * -sign - want).abs() < 1e-12, "{c:?}");
        }
        assert!((e.eigenvalues[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_recovered() {
        let corners = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let e = classical_mds(&from_points(&corners), 2).unwrap();
        let truth = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let r = procrustes_align(&truth, &e.coords).unwrap();
        assert!(r.error < 1e-9);
        assert!((r.scale - 1.0).abs() < 1e-9, "isometric, scale {}", r.scale);
    }

    #[test]
    fn clamps_missing_positive_eigenvalues() {
        let g = from_points(&[vec![0.0], vec![1.0], vec![2.0], vec![5.0]]);
        let e = classical_mds(&g, 2).unwrap();
        assert!(e.is_degenerate());
        assert_eq!(e.clamped, vec![1]);
        assert!(e.coords.column(1).iter().all(|&v| v == 0.0));
        assert_eq!(e.eigenvalues[1], 0.0);
    }

    #[test]
    fn centered_and_sign_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<Vec<f64>> =
            (0..60).map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let e = classical_mds(&from_points(&pts), 3).unwrap();
        for c in 0..3 {
            let col = e.coords.column(c);
            let scale = col.amax();
            assert!(col.sum().abs() / 60.0 <= 1e-9 * scale);
            let pivot = col.iter().fold(0.0f64, |b, &x| if x.abs() > b.abs() { x } else { b });
            assert!(pivot > 0.0);
        }
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn dimension_bounds() {
        let g = from_points(&[vec![0.0], vec![1.0], vec![2.0]]);
        assert!(classical_mds(&g, 0).is_err());
        assert!(classical_mds(&g, 3).is_err());
    }

    #[test]
    fn residual_variance_zero_for_exact_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> =
            (0..50).map(|_| (0..2).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let g = from_points(&pts);
        let e = classical_mds(&g, 2).unwrap();
        assert!(residual_variance(&g, &e).unwrap() < 1e-12);
    }

    #[test]
    fn residual_variance_high_for_unrelated_coordinates() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> =
                (0..500).map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
            let g = from_points(&pts);
            let coords = DMatrix::from_fn(500, 2, |_, _| rng.random_range(0.0..1.0));
            let e = Embedding {
                coords,
                eigenvalues: vec![1.0, 1.0],
                raw_eigenvalues: vec![1.0, 1.0],
                clamped: vec![],
            };
            assert!(residual_variance(&g, &e).unwrap() > 0.8);
        }
    }

    #[test]
    fn residual_variance_rejects_degenerate_input() {
        let g = from_points(&[vec![0.0], vec![1.0], vec![2.0]]);
        let e = Embedding {
            coords: DMatrix::zeros(3, 1),
            eigenvalues: vec![0.0],
            raw_eigenvalues: vec![0.0],
            clamped: vec![0],
        };
        assert!(matches!(residual_variance(&g, &e), Err(Error::Degenerate(_))));
        let short = Embedding { coords: DMatrix::zeros(2, 1), ..e };
        assert!(matches!(residual_variance(&g, &short), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn line_has_dimension_one() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 * 0.5, i as f64 * 0.25]).collect();
        let diag = estimate_dim(&from_points(&pts), 3).unwrap();
        assert_eq!(diag.chosen_d, 1);
        let diag = estimate_dim(&from_points(&pts), 1).unwrap();
        assert_eq!(diag.chosen_d, 1);
        assert_eq!(diag.residual_variances.len(), 1);
    }
}
