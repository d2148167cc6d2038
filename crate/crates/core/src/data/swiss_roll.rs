//! Euler isometric Swiss roll.
//!
//! Ground-truth points `(t, r)` are drawn uniformly from a rectangle and
//! lifted to 3-D through the Euler spiral. The spiral has unit speed in `t`,
//! so the surface `(c·x(t), c·y(t), c·r)` is isometric to the rectangle
//! scaled by `c`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::fresnel::fresnel;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Quadrature tolerance used when lifting samples onto the spiral.
pub const SPIRAL_TOL: f64 = 1e-12;

pub const DEFAULT_AMPLITUDE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub t_min: f64,
    pub t_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self { t_min: 1.0, t_max: 3.0, r_min: 0.0, r_max: 1.0 }
    }
}

/// True low-dimensional coordinates, row `i` is `(t_i, r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub coords: DMatrix<f64>,
    pub param_ranges: ParamRanges,
}

impl GroundTruth {
    pub fn rows(&self) -> usize {
        self.coords.nrows()
    }

    /// Ground truth restricted to `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self { coords: self.coords.select_rows(indices), param_ranges: self.param_ranges }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwissRoll {
    pub n: usize,
    pub seed: u64,
    pub noise_sd: f64,
    pub amplitude: f64,
    pub ranges: ParamRanges,
}

impl SwissRoll {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            noise_sd: 0.0,
            amplitude: DEFAULT_AMPLITUDE,
            ranges: ParamRanges::default(),
        }
    }

    pub fn with_noise(mut self, noise_sd: f64) -> Self {
        self.noise_sd = noise_sd;
        self
    }

    /// 3-D image of a single ground-truth point, without noise.
    pub fn lift(&self, t: f64, r: f64) -> Result<[f64; 3]> {
        let (x, y) = fresnel(t, SPIRAL_TOL)?;
        let c = self.amplitude;
        Ok([c * x, c * y, c * r])
    }

    pub fn generate(&self) -> Result<(DataMatrix, GroundTruth)> {
        if self.n == 0 {
            return Err(Error::invalid("swiss roll needs n >= 1"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::invalid(format!("noise_sd must be >= 0, got {}", self.noise_sd)));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid(format!("amplitude must be > 0, got {}", self.amplitude)));
        }
        let ParamRanges { t_min, t_max, r_min, r_max } = self.ranges;
        if !(t_min <= t_max && r_min <= r_max) {
            return Err(Error::invalid("empty parameter rectangle"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut truth = DMatrix::zeros(self.n, 2);
        let mut values = Vec::with_capacity(self.n * 3);
        for i in 0..self.n {
            let t = rng.random_range(t_min..=t_max);
            let r = rng.random_range(r_min..=r_max);
            truth[(i, 0)] = t;
            truth[(i, 1)] = r;
            values.extend_from_slice(&self.lift(t, r)?);
        }
        // Noise is drawn after all parameters so that the clean surface is the
        // same for every noise level at a given seed.
        if self.noise_sd > 0.0 {
            let normal = Normal::new(0.0, self.noise_sd)
                .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
            for v in &mut values {
                *v += normal.sample(&mut rng);
            }
        }
        let data = DataMatrix::new(self.n, 3, values)?;
        Ok((data, GroundTruth { coords: truth, param_ranges: self.ranges }))
    }
}

/// Swiss roll with the default amplitude and parameter rectangle.
pub fn gen_swiss_roll(n: usize, seed: u64, noise_sd: f64) -> Result<(DataMatrix, GroundTruth)> {
    SwissRoll::new(n, seed).with_noise(noise_sd).generate()
}
