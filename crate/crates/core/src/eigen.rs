//! Leading eigenpairs of dense symmetric matrices.
//!
//! Small problems go straight to a full symmetric decomposition. Larger ones
//! use Lanczos iteration with full reorthogonalization, which needs only
//! matrix-vector products and converges quickly to the extreme eigenvalues
//! that classical scaling keeps.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Matrices up to this order use the dense solver under [`EigenSolver::Auto`].
pub const DENSE_CUTOFF: usize = 400;

/// Relative residual `‖Av − θv‖ / max|θ|` accepted for Lanczos Ritz pairs.
pub const LANCZOS_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// The `d` algebraically largest eigenpairs, eigenvalues descending,
/// eigenvectors as unit columns.
#[derive(Debug, Clone)]
pub struct TopEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Row-major symmetric matrix view.
#[derive(Debug, Clone, Copy)]
pub struct SymView<'a> {
    pub n: usize,
    pub data: &'a [f64],
}

impl SymView<'_> {
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = dot(&self.data[i * self.n..(i + 1) * self.n], x);
        });
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent accumulators let the compiler vectorize.
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let o = 4 * c;
        acc[0] += a[o] * b[o];
        acc[1] += a[o + 1] * b[o + 1];
        acc[2] += a[o + 2] * b[o + 2];
        acc[3] += a[o + 3] * b[o + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for o in 4 * chunks..a.len() {
        s += a[o] * b[o];
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn top_eigenpairs(a: SymView<'_>, d: usize, solver: EigenSolver) -> Result<TopEigen> {
    if a.data.len() != a.n * a.n {
        return Err(Error::DimensionMismatch { expected: a.n * a.n, found: a.data.len() });
    }
    if d == 0 || d > a.n {
        return Err(Error::invalid(format!("requested {d} eigenpairs of a {0}x{0} matrix", a.n)));
    }
    match solver {
        EigenSolver::Dense => Ok(dense_top(a, d)),
        EigenSolver::Lanczos => lanczos_top(a, d),
        EigenSolver::Auto if a.n <= DENSE_CUTOFF => Ok(dense_top(a, d)),
        EigenSolver::Auto => lanczos_top(a, d),
    }
}

/// Indices of `values` sorted descending.
fn descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

fn dense_top(a: SymView<'_>, d: usize) -> TopEigen {
    let m = DMatrix::from_row_slice(a.n, a.n, a.data);
    let eig = SymmetricEigen::new(m);
    let order = descending(eig.eigenvalues.as_slice());
    let values = order[..d].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.n, d, |r, c| eig.eigenvectors[(r, order[c])]);
    TopEigen { values, vectors }
}

fn lanczos_top(a: SymView<'_>, d: usize) -> Result<TopEigen> {
    let n = a.n;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_305e);
    let mut steps = n.min((2 * d + 40).max(60));
    let mut w = vec![0.0; n];
    loop {
        // Krylov basis stored row by row (one basis vector per row).
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut alpha = Vec::with_capacity(steps);
        let mut beta: Vec<f64> = Vec::with_capacity(steps);
        let mut q = random_unit(&mut rng, n, &basis).expect("fresh start vector");
        let mut scale = 0.0f64;
        for j in 0..steps {
            a.matvec(&q, &mut w);
            let aj = dot(&q, &w);
            alpha.push(aj);
            basis.push(q);
            // Full reorthogonalization, twice for stability.
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let b = norm(&w);
            scale = scale.max(aj.abs()).max(b);
            if j + 1 == steps {
                beta.push(b);
                break;
            }
            if b > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                beta.push(b);
                q = w.iter().map(|v| v / b).collect();
            } else {
                // Invariant subspace found; continue from a fresh direction.
                match random_unit(&mut rng, n, &basis) {
                    Some(fresh) => {
                        beta.push(0.0);
                        q = fresh;
                    }
                    None => {
                        beta.push(0.0);
                        break;
                    }
                }
            }
        }

        let m = basis.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let order = descending(eig.eigenvalues.as_slice());
        let take = d.min(m);
        let mut vectors = DMatrix::zeros(n, d);
        let mut values = Vec::with_capacity(d);
        for (c, &idx) in order[..take].iter().enumerate() {
            values.push(eig.eigenvalues[idx]);
            let mut col = vec![0.0; n];
            for (r, v) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(r, idx)], v, &mut col);
            }
            let nc = norm(&col);
            for (r, v) in col.iter().enumerate() {
                vectors[(r, c)] = v / nc;
            }
        }

        let spectral = eig.eigenvalues.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let mut worst = 0.0f64;
        let mut av = vec![0.0; n];
        for c in 0..take {
            let v: Vec<f64> = vectors.column(c).iter().copied().collect();
            a.matvec(&v, &mut av);
            axpy(-values[c], &v, &mut av);
            worst = worst.max(norm(&av));
        }
        let converged = take == d && worst <= LANCZOS_TOL * spectral.max(f64::MIN_POSITIVE);
        if converged || m >= n {
            if take < d {
                return Err(Error::Degenerate(format!(
                    "Krylov space exhausted after {m} vectors, {d} eigenpairs requested"
                )));
            }
            if !converged {
                log::debug!("lanczos stopped at full dimension with residual {worst:e}");
            }
            return Ok(TopEigen { values, vectors });
        }
        log::debug!("lanczos with {m} steps: residual {worst:e}, growing basis");
        steps = n.min(2 * steps);
    }
}

/// Random unit vector orthogonal to `basis`, or `None` if the basis already
/// spans the space numerically.
fn random_unit(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let before = norm(&v);
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let after = norm(&v);
        if after > 1e-8 * before {
            v.iter_mut().for_each(|x| *x /= after);
            return Some(v);
        }
    }
    None
}

/// Solves `min ‖A p − c‖` for tall `A` through a cached thin QR factorization.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl LeastSquares {
    /// Factorizes `a` (n × d, n ≥ d). Fails when `a` is rank deficient
    /// relative to `rcond`.
    pub fn new(a: &DMatrix<f64>, rcond: f64) -> Result<Self> {
        let (n, d) = a.shape();
        if n < d || d == 0 {
            return Err(Error::invalid(format!("least squares needs a tall matrix, got {n}x{d}")));
        }
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diag_min = r.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(diag_min > rcond * diag_max) {
            return Err(Error::Singular(format!(
                "normal matrix is singular (|R| diagonal ratio {:e})",
                diag_min / diag_max
            )));
        }
        Ok(Self { q: qr.q(), r })
    }

    pub fn solve(&self, c: &DVector<f64>) -> DVector<f64> {
        let rhs = self.q.tr_mul(c);
        self.r
            .solve_upper_triangular(&rhs)
            .expect("triangular factor checked non-singular at construction")
    }

    /// Condition number of `AᵀA`, from the triangular factor.
    pub fn normal_condition(&self) -> f64 {
        let sv = self.r.singular_values();
        let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), v| (a.max(*v), b.min(*v)));
        (mx / mn).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic Jacobi eigenvalue iteration, an independent dense reference.
    pub(crate) fn jacobi_eigenvalues(n: usize, data: &[f64]) -> Vec<f64> {
        let mut a = data.to_vec();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ev
    }

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    #[test]
    fn both_solvers_match_jacobi() {
        for (n, seed) in [(8, 1), (40, 2), (120, 3)] {
            let a = random_symmetric(n, seed);
            let view = SymView { n, data: &a };
            let reference = jacobi_eigenvalues(n, &a);
            for solver in [EigenSolver::Dense, EigenSolver::Lanczos] {
                let top = top_eigenpairs(view, 5.min(n), solver).unwrap();
                for (got, want) in top.values.iter().zip(&reference) {
                    assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{solver:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn lanczos_vectors_are_eigenvectors() {
        let n = 200;
        let a = random_symmetric(n, 9);
        let view = SymView { n, data: &a };
        let top = top_eigenpairs(view, 4, EigenSolver::Lanczos).unwrap();
        let mut av = vec![0.0; n];
        for c in 0..4 {
            let v: Vec<f64> = top.vectors.column(c).iter().copied().collect();
            assert!((norm(&v) - 1.0).abs() < 1e-12);
            view.matvec(&v, &mut av);
            axpy(-top.values[c], &v, &mut av);
            assert!(norm(&av) < 1e-8);
        }
    }

    #[test]
    fn lanczos_handles_low_rank() {
        // Rank-2 matrix: the Krylov space collapses after two steps.
        let n = 50;
        let u: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 3.0 * u[i] * u[j] + v[i] * v[j];
            }
        }
        let view = SymView { n, data: &a };
        let dense = top_eigenpairs(view, 3, EigenSolver::Dense).unwrap();
        let lz = top_eigenpairs(view, 3, EigenSolver::Lanczos).unwrap();
        for (a, b) in dense.values.iter().zip(&lz.values) {
            assert!((a - b).abs() < 1e-9 * dense.values[0]);
        }
    }

    #[test]
    fn least_squares_minimizer() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, -1.0]);
        let c = DVector::from_row_slice(&[1.0, 2.0, 0.5, 3.0]);
        let ls = LeastSquares::new(&a, 1e-12).unwrap();
        let p = ls.solve(&c);
        // Normal equations as the reference route.
        let ata = a.tr_mul(&a);
        let want = ata.try_inverse().unwrap() * a.tr_mul(&c);
        assert!((p - want).norm() < 1e-12);
        let singular = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(LeastSquares::new(&singular, 1e-10), Err(Error::Singular(_))));
    }
}
