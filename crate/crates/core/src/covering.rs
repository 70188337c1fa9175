//! Sampled verification of covering bounds: the image of
//! Omega_alpha = { x : alpha |h'(x0)| (1 - |x0|^2) < |h'(x)| (1 - |x|^2) }
//! contains a disk around h(x0) (or beta h(x0)) of explicit radius.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::PolarGrid;
use crate::report::{VerificationReport, Witness};
use crate::sampling::{random_disk_point, seeded_rng};
use crate::univalent::{check_disk, distortion_bounds, normalize_at, NormalizedMap, UnivalentMap};

/// Radius offset of the circle used to probe the image boundary from inside.
pub const BOUNDARY_EPS: f64 = 1e-3;

/// Points on the probe circle |x| = 1 - BOUNDARY_EPS.
const BOUNDARY_SAMPLES: usize = 8192;

/// Hyperbolic length density |h'(x)| (1 - |x|^2).
fn density(h: &UnivalentMap, x: Complex64) -> f64 {
    h.deriv_raw(x).norm() * (1.0 - x.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaSpec {
    pub x0: Complex64,
    pub alpha: f64,
    /// alpha |h'(x0)| (1 - |x0|^2)
    pub threshold: f64,
}

impl OmegaSpec {
    pub fn new(h: &UnivalentMap, x0: Complex64, alpha: f64) -> Result<Self> {
        check_disk(x0)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let threshold = alpha * density(h, x0);
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::DerivativeVanishes(x0));
        }
        Ok(Self { x0, alpha, threshold })
    }
}

pub fn omega_contains(h: &UnivalentMap, spec: &OmegaSpec, x: Complex64) -> Result<bool> {
    check_disk(x)?;
    Ok(spec.threshold < density(h, x))
}

/// Membership in the transformed region { z : |g'(z)| > alpha / (1 - |z|^2) }
/// for the map g normalised at x0.
pub fn omega_tilde_contains(g: &NormalizedMap, alpha: f64, z: Complex64) -> Result<bool> {
    Ok(g.deriv(z)?.norm() > alpha / (1.0 - z.norm_sqr()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub radius: f64,
    /// Sample attaining the minimum (a complement point, or a point on the
    /// probe circle when the clamp is active).
    pub witness: Complex64,
    /// Distance from the center to the image of the probe circle.
    pub boundary_clamp: f64,
    /// No grid sample fell outside Omega_alpha.
    pub complement_empty: bool,
}

/// Sampled radius of the largest disk around `center` inside h(Omega_alpha):
/// the minimum of |h(x) - center| over grid samples outside Omega_alpha,
/// clamped by the distance to h(|x| = 1 - eps).
pub fn covered_radius_estimate(
    h: &UnivalentMap,
    spec: &OmegaSpec,
    center: Complex64,
    grid: &PolarGrid,
) -> Result<RadiusEstimate> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sampling grid".into()));
    }
    let per_ring: Vec<Option<(f64, Complex64)>> = (0..grid.radial)
        .into_par_iter()
        .map(|k| {
            let mut best: Option<(f64, Complex64)> = None;
            for j in 0..grid.angular {
                let x = grid.point(k * grid.angular + j);
                if spec.threshold < density(h, x) {
                    continue;
                }
                let d = (h.value_raw(x) - center).norm();
                if best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, x));
                }
            }
            best
        })
        .collect();
    let complement = per_ring
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(f64, Complex64)>, cur| match acc {
            Some(a) if a.0 <= cur.0 => Some(a),
            _ => Some(cur),
        });

    let rho = 1.0 - BOUNDARY_EPS;
    let (clamp, clamp_at) = (0..BOUNDARY_SAMPLES)
        .into_par_iter()
        .map(|j| {
            let x = Complex64::from_polar(rho, std::f64::consts::TAU * j as f64 / BOUNDARY_SAMPLES as f64);
            ((h.value_raw(x) - center).norm(), x)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, Complex64::new(rho, 0.0)), |a, b| if b.0 < a.0 { b } else { a });

    let (radius, witness) = match complement {
        Some((d, x)) if d <= clamp => (d, x),
        _ => (clamp, clamp_at),
    };
    Ok(RadiusEstimate { radius, witness, boundary_clamp: clamp, complement_empty: complement.is_none() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringKind {
    /// Disk around h(x0) of radius (1 - alpha)/4 |h'(x0)| (1 - |x0|^2).
    Centered,
    /// Disk around beta h(x0) of radius (|beta| - alpha)/(4|beta|) |h'(x1)| (1 - |x1|^2).
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub kind: CoveringKind,
    pub map: String,
    pub x0: Complex64,
    pub alpha: f64,
    pub beta: Option<Complex64>,
    pub x1: Option<Complex64>,
    pub center: Complex64,
    pub predicted_radius: f64,
    /// (|beta| - alpha)/4 |h'(x0)| (1 - |x0|^2), which the scaled radius must dominate.
    pub secondary_bound: Option<f64>,
    pub measured_radius_lower: f64,
    pub grid_tolerance: f64,
    pub grid: (usize, usize),
    pub min_witness: Complex64,
    pub boundary_clamp: f64,
    pub complement_empty: bool,
    pub pass: bool,
}

pub fn grid_tolerance(predicted: f64) -> f64 {
    5e-3 * predicted + 1e-6
}

pub fn verify_centered_covering(h: &UnivalentMap, x0: Complex64, alpha: f64, grid: &PolarGrid) -> Result<CoveringReport> {
    let spec = OmegaSpec::new(h, x0, alpha)?;
    let predicted = (1.0 - alpha) / 4.0 * density(h, x0);
    let center = h.eval(x0)?;
    let est = covered_radius_estimate(h, &spec, center, grid)?;
    let tol = grid_tolerance(predicted);
    Ok(CoveringReport {
        kind: CoveringKind::Centered,
        map: h.describe(),
        x0,
        alpha,
        beta: None,
        x1: None,
        center,
        predicted_radius: predicted,
        secondary_bound: None,
        measured_radius_lower: est.radius,
        grid_tolerance: tol,
        grid: (grid.radial, grid.angular),
        min_witness: est.witness,
        boundary_clamp: est.boundary_clamp,
        complement_empty: est.complement_empty,
        pass: est.radius >= predicted - tol,
    })
}

/// Scaled covering; the caller asserts beta h(disk) is contained in h(disk).
pub fn verify_scaled_covering(
    h: &UnivalentMap,
    x0: Complex64,
    alpha: f64,
    beta: Complex64,
    grid: &PolarGrid,
) -> Result<CoveringReport> {
    let modulus = beta.norm();
    if !(alpha > 0.0 && alpha < modulus && modulus < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "scaled covering needs 0 < alpha < |beta| < 1, got alpha = {alpha}, |beta| = {modulus}"
        )));
    }
    let spec = OmegaSpec::new(h, x0, alpha)?;
    let center = beta * h.eval(x0)?;
    let x1 = h.invert(center, x0).map_err(|e| Error::InversionFailed { w: center, source: Box::new(e) })?;
    let predicted = (modulus - alpha) / (4.0 * modulus) * density(h, x1);
    let secondary = (modulus - alpha) / 4.0 * density(h, x0);
    let est = covered_radius_estimate(h, &spec, center, grid)?;
    let tol = grid_tolerance(predicted);
    Ok(CoveringReport {
        kind: CoveringKind::Scaled,
        map: h.describe(),
        x0,
        alpha,
        beta: Some(beta),
        x1: Some(x1),
        center,
        predicted_radius: predicted,
        secondary_bound: Some(secondary),
        measured_radius_lower: est.radius,
        grid_tolerance: tol,
        grid: (grid.radial, grid.angular),
        min_witness: est.witness,
        boundary_clamp: est.boundary_clamp,
        complement_empty: est.complement_empty,
        pass: est.radius >= predicted - tol && predicted >= secondary - 1e-12,
    })
}

/// (x, in Omega_alpha) for every grid sample, for plotting.
pub fn region_samples(h: &UnivalentMap, spec: &OmegaSpec, grid: &PolarGrid) -> Vec<(Complex64, bool)> {
    grid.points().map(|x| (x, spec.threshold < density(h, x))).collect()
}

/// Relative slack on the Koebe distortion lower bounds.
pub const DISTORTION_REL_TOL: f64 = 1e-10;

/// Koebe lower bounds for the map normalised at random base points, at
/// random z. Both x0 and z are uniform in the disk of radius 1 - BOUNDARY_EPS.
pub fn verify_distortion(h: &UnivalentMap, samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = seeded_rng(seed);
    let rmax = 1.0 - BOUNDARY_EPS;
    let pairs: Vec<(Complex64, Complex64)> =
        (0..samples).map(|_| (random_disk_point(&mut rng, rmax), random_disk_point(&mut rng, rmax))).collect();
    let results: Vec<Result<(f64, Option<Witness>)>> = pairs
        .par_iter()
        .map(|&(x0, z)| {
            let g = normalize_at(h, x0)?;
            let (dlow, vlow) = distortion_bounds(z)?;
            let d = g.deriv(z)?.norm();
            let v = g.eval(z)?.norm();
            let rd = d / dlow;
            let rv = if vlow > 0.0 { v / vlow } else { f64::INFINITY };
            let ratio = rd.min(rv);
            let witness = (!(ratio >= 1.0 - DISTORTION_REL_TOL)).then(|| Witness {
                t: None,
                x: x0,
                y: vec![z],
                gamma: None,
                value: ratio,
                reason: if rd < rv {
                    format!("|g'(z)| = {d:e} below {dlow:e}")
                } else {
                    format!("|g(z)| = {v:e} below {vlow:e}")
                },
            });
            Ok((ratio, witness))
        })
        .collect();
    let mut report = VerificationReport::new("koebe_distortion");
    let mut worst = f64::INFINITY;
    for r in results {
        let (ratio, w) = r?;
        worst = worst.min(ratio);
        if let Some(w) = w {
            report.record_failure(w);
        }
    }
    report.samples = samples;
    report.measured = worst;
    report.predicted = 1.0;
    report.margin = worst - 1.0;
    report.detail("map", h.describe());
    report.detail("seed", seed);
    report.detail("witness_layout", "x = base point x0, y[0] = z, value = min ratio to the bound");
    Ok(report.finish())
}
