//! Deterministic sample sets: polar grids on the disk, seeded random disk and
//! ball points, quasi-random sphere directions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The random generator used everywhere a seed is accepted.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    Uniform,
    /// r_k = 1 - (1 - k/N)^2, denser near the unit circle.
    BoundaryConcentrated,
}

/// A polar grid with `radial` rings and `angular` rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
    pub spacing: RadialSpacing,
    /// Rings are scaled into [0, r_max].
    pub r_max: f64,
}

impl PolarGrid {
    pub fn boundary(radial: usize, angular: usize) -> Self {
        Self { radial, angular, spacing: RadialSpacing::BoundaryConcentrated, r_max: 1.0 }
    }

    pub fn uniform(radial: usize, angular: usize, r_max: f64) -> Self {
        Self { radial, angular, spacing: RadialSpacing::Uniform, r_max }
    }

    pub fn radius(&self, k: usize) -> f64 {
        let n = self.radial.max(1) as f64;
        let s = k as f64 / n;
        let r = match self.spacing {
            RadialSpacing::Uniform => (k as f64) / (self.radial.saturating_sub(1).max(1) as f64),
            RadialSpacing::BoundaryConcentrated => 1.0 - (1.0 - s) * (1.0 - s),
        };
        r * self.r_max
    }

    pub fn len(&self) -> usize {
        self.radial * self.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> Complex64 {
        let (k, j) = (index / self.angular, index % self.angular);
        Complex64::from_polar(self.radius(k), std::f64::consts::TAU * j as f64 / self.angular as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// Uniform point in the disk of radius `r_max`.
pub fn random_disk_point<R: Rng>(rng: &mut R, r_max: f64) -> Complex64 {
    let rho = r_max * rng.random::<f64>().sqrt();
    Complex64::from_polar(rho, std::f64::consts::TAU * rng.random::<f64>())
}

/// Standard complex Gaussian (independent N(0,1) parts) by Box-Muller.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random::<f64>();
    Complex64::from_polar((-2.0 * u.ln()).sqrt(), std::f64::consts::TAU * v)
}

/// Additive-recurrence (Kronecker) sequence in [0,1)^dim built on the
/// generalised golden ratio.
#[derive(Debug, Clone)]
pub struct KroneckerSequence {
    alpha: Vec<f64>,
    state: Vec<f64>,
}

impl KroneckerSequence {
    pub fn new(dim: usize) -> Self {
        // phi_d is the positive root of x^{d+1} = x + 1
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha = (1..=dim).map(|k| (1.0 / phi.powi(k as i32)).fract()).collect();
        Self { alpha, state: vec![0.5; dim] }
    }

    pub fn next_point(&mut self) -> &[f64] {
        for (s, a) in self.state.iter_mut().zip(&self.alpha) {
            *s = (*s + a).fract();
        }
        &self.state
    }
}
