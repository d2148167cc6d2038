//! Procrustes alignment and the two manifold error metrics built on it.
//!
//! `procrustes_align(A, B)` finds the similarity transform `b ↦ s·R·b + t`
//! (with `R` in the full orthogonal group, reflections included) that best
//! maps the rows of `B` onto the rows of `A` in the Frobenius sense. The
//! reported error is the residual normalized by the centered norm of `A`, so
//! it is scale-free and lies in `[0, 1]`.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embed::isomap;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    /// `d × d` orthogonal matrix acting on column vectors.
    pub rotation: DMatrix<f64>,
    pub scale: f64,
    pub translation: DVector<f64>,
    /// `‖s·R·B + t − A‖²_F / ‖A − Ā‖²_F`.
    pub error: f64,
    /// Unnormalized minimum `‖s·R·B + t − A‖_F`.
    pub frobenius: f64,
}

impl AlignmentResult {
    /// Applies the fitted transform to the rows of `b`.
    pub fn apply(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = b * self.rotation.transpose() * self.scale;
        for mut row in out.row_iter_mut() {
            row += self.translation.transpose();
        }
        out
    }
}

fn centered(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let mean = m.row_mean().transpose();
    let mut c = m.clone();
    for mut row in c.row_iter_mut() {
        row -= mean.transpose();
    }
    (c, mean)
}

pub fn procrustes_align(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<AlignmentResult> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (n, d) = a.shape();
    if d == 0 || n < d.max(1) {
        return Err(Error::invalid(format!("need n >= d >= 1 rows, got {n}x{d}")));
    }
    let (ac, a_mean) = centered(a);
    let (bc, b_mean) = centered(b);
    let a_norm2 = ac.norm_squared();
    let b_norm2 = bc.norm_squared();
    // Tolerances relative to the raw magnitudes, so translated-but-collapsed
    // point sets count as degenerate.
    let a_scale = a.norm_squared().max(f64::MIN_POSITIVE);
    let b_scale = b.norm_squared().max(f64::MIN_POSITIVE);
    if !(a_norm2 > 1e-24 * a_scale) {
        return Err(Error::invalid("reference point set has zero spread after centering"));
    }
    if !(b_norm2 > 1e-24 * b_scale) {
        return Err(Error::invalid("point set to align has zero spread after centering"));
    }

    let m = bc.tr_mul(&ac);
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let trace: f64 = svd.singular_values.iter().sum();
    // Row form: aligned = s·B̂·Q with Q = U·Vᵀ; column form uses R = Qᵀ.
    let q = &u * &v_t;
    let scale = trace / b_norm2;
    let residual = (&ac - &bc * &q * scale).norm_squared();
    let rotation = q.transpose();
    let translation = &a_mean - &rotation * &b_mean * scale;
    Ok(AlignmentResult {
        rotation,
        scale,
        translation,
        error: (residual / a_norm2).clamp(0.0, 1.0),
        frobenius: residual.sqrt(),
    })
}

/// Error of an embedding against known low-dimensional coordinates.
pub fn direct_error(truth: &DMatrix<f64>, embedded: &DMatrix<f64>) -> Result<f64> {
    if truth.shape() != embedded.shape() {
        return Err(Error::invalid(format!(
            "ground truth is {:?} but embedding is {:?}",
            truth.shape(),
            embedded.shape()
        )));
    }
    procrustes_align(truth, embedded).map(|r| r.error)
}

/// Index sets for one reference-sample evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceSplit {
    pub reference: Vec<usize>,
    pub sample_1: Vec<usize>,
    pub sample_2: Vec<usize>,
}

impl ReferenceSplit {
    /// Disjoint uniform draws without replacement.
    pub fn draw(n: usize, f_size: usize, r_size: usize, seed: u64) -> Result<Self> {
        let need = f_size + 2 * r_size;
        if f_size == 0 || need > n {
            return Err(Error::invalid(format!(
                "reference split needs 1 <= f_size and f_size + 2*r_size <= n ({f_size} + 2*{r_size} > {n})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = sample(&mut rng, n, need).into_vec();
        Ok(Self {
            reference: idx[..f_size].to_vec(),
            sample_1: idx[f_size..f_size + r_size].to_vec(),
            sample_2: idx[f_size + r_size..].to_vec(),
        })
    }

    /// Rows of `D_i = F ∪ R_i`; the reference rows always come first, so
    /// positions `0..|F|` hold `F` in both datasets.
    pub fn dataset_indices(&self, which: usize) -> Vec<usize> {
        let sample = if which == 1 { &self.sample_1 } else { &self.sample_2 };
        self.reference.iter().chain(sample).copied().collect()
    }
}

/// Procrustes error between the two embeddings of the reference rows learned
/// from `F ∪ R₁` and `F ∪ R₂`.
pub fn reference_sample_error_for(
    x: &DataMatrix,
    split: &ReferenceSplit,
    k: usize,
    d: usize,
) -> Result<f64> {
    let f = split.reference.len();
    let mut embeddings = Vec::with_capacity(2);
    for run in [1, 2] {
        let rows = x.select_rows(&split.dataset_indices(run))?;
        let e = isomap(&rows, k, d)
            .map_err(|e| Error::ReferenceRun { run, source: Box::new(e) })?;
        embeddings.push(e.coords.rows(0, f).into_owned());
    }
    procrustes_align(&embeddings[0], &embeddings[1]).map(|r| r.error)
}

pub fn reference_sample_error(
    x: &DataMatrix,
    f_size: usize,
    r_size: usize,
    k: usize,
    d: usize,
    seed: u64,
) -> Result<f64> {
    let split = ReferenceSplit::draw(x.rows(), f_size, r_size, seed)?;
    reference_sample_error_for(x, &split, k, d)
}
