//! Roper-Suffridge and Muir extension operators on the ball
//! { |x|^2 + ||y||^r < 1 }, the linear semigroups acting on their images,
//! and sampled invariance checks.

pub mod ball;
pub mod homogeneous;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ball::{ball_contains, BallPoint, BallSpace, YNorm};
pub use homogeneous::{sup_norm_q, HomogeneousPolynomial, Monomial, SupNormEstimate};

use crate::error::{Error, Result};
use crate::report::{VerificationReport, Witness};
use crate::sampling::{seeded_rng, PolarGrid};
use crate::semigroups::spirallike_margin;
use crate::univalent::{BranchedPower, UnivalentMap};

/// Interior margin for ball samples and the gamma-circle radius.
pub const INTERIOR_EPS: f64 = 1e-3;

/// diag(mu, (lambda + mu/r) id)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralMatrix {
    pub mu: Complex64,
    pub lambda: Complex64,
    pub r: f64,
}

impl SpiralMatrix {
    pub fn new(mu: Complex64, lambda: Complex64, r: f64) -> Result<Self> {
        if !(mu.re > 0.0 && mu.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("Re mu must be positive, got {mu}")));
        }
        if !(lambda.re > 0.0 && lambda.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("Re lambda must be positive, got {lambda}")));
        }
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::InvalidParameter(format!("r must be >= 1, got {r}")));
        }
        Ok(Self { mu, lambda, r })
    }

    /// Exponent of the fiber block, lambda + mu/r.
    pub fn fiber_rate(&self) -> Complex64 {
        self.lambda + self.mu / self.r
    }

    pub fn spectrum(&self) -> [Complex64; 2] {
        [self.mu, self.fiber_rate()]
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")))
    }
}

/// The extension x -> (h(x) + h'(x) Q(y), h'(x)^{1/r} y); Q = 0 gives the
/// Roper-Suffridge operator.
#[derive(Debug, Clone)]
pub struct Extension {
    power: BranchedPower,
    space: BallSpace,
    q: Option<HomogeneousPolynomial>,
}

impl Extension {
    pub fn roper_suffridge(h: UnivalentMap, space: BallSpace) -> Result<Self> {
        Ok(Self { power: BranchedPower::new(h, space.r)?, space, q: None })
    }

    pub fn muir(h: UnivalentMap, space: BallSpace, q: HomogeneousPolynomial) -> Result<Self> {
        check_q(&space, &q)?;
        let q = (!q.is_zero()).then_some(q);
        Ok(Self { power: BranchedPower::new(h, space.r)?, space, q })
    }

    pub fn map(&self) -> &UnivalentMap {
        self.power.map()
    }

    pub fn space(&self) -> &BallSpace {
        &self.space
    }

    pub fn q(&self) -> Option<&HomogeneousPolynomial> {
        self.q.as_ref()
    }

    /// H(x, y) = (h(x), h'(x)^{1/r} y)
    pub fn extend_h(&self, p: &BallPoint) -> Result<BallPoint> {
        self.space.check_point(p)?;
        let s = self.power.eval(p.x)?;
        Ok(BallPoint { x: self.map().eval(p.x)?, y: p.y.iter().map(|v| v * s).collect() })
    }

    /// Phi(H(p)) with Phi(z, w) = (z + Q(w), w).
    pub fn apply(&self, p: &BallPoint) -> Result<BallPoint> {
        let hp = self.extend_h(p)?;
        Ok(match &self.q {
            Some(q) => {
                let (z, w) = automorphism_phi(q, hp.x, &hp.y)?;
                BallPoint { x: z, y: w }
            }
            None => hp,
        })
    }

    /// Gauge of H^{-1}(z, w), or None when z is not in h(disk). The modulus
    /// |h'(x)|^{1/r} does not depend on the branch of the root.
    pub fn h_preimage_gauge(&self, z: Complex64, w: &[Complex64], guess: Complex64) -> Option<(f64, Complex64)> {
        if w.len() != self.space.m {
            return None;
        }
        let x = match self.map().invert(z, guess) {
            Ok(x) => x,
            Err(e) => {
                log::debug!("membership: inversion of {z} failed: {e}");
                return None;
            }
        };
        let d = self.map().deriv(x).ok()?.norm();
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        let gauge = x.norm_sqr() + (self.space.norm(w) / d.powf(1.0 / self.space.r)).powf(self.space.r);
        gauge.is_finite().then_some((gauge, x))
    }

    pub fn membership_h(&self, z: Complex64, w: &[Complex64]) -> bool {
        self.h_preimage_gauge(z, w, Complex64::new(0.0, 0.0)).is_some_and(|(g, _)| g < 1.0)
    }
}

fn check_q(space: &BallSpace, q: &HomogeneousPolynomial) -> Result<()> {
    if q.dim() != space.m {
        return Err(Error::InvalidParameter(format!("Q acts on C^{}, the ball has m = {}", q.dim(), space.m)));
    }
    if q.is_zero() {
        return Ok(());
    }
    if space.r.fract() != 0.0 || space.r != f64::from(q.degree()) {
        return Err(Error::DegreeMismatch { expected: space.r as u32, found: q.degree() });
    }
    Ok(())
}

pub fn extend_h(h: &UnivalentMap, space: &BallSpace, p: &BallPoint) -> Result<BallPoint> {
    Extension::roper_suffridge(h.clone(), *space)?.extend_h(p)
}

pub fn muir_extend(h: &UnivalentMap, space: &BallSpace, q: &HomogeneousPolynomial, p: &BallPoint) -> Result<BallPoint> {
    Extension::muir(h.clone(), *space, q.clone())?.apply(p)
}

pub fn membership_h(h: &UnivalentMap, space: &BallSpace, z: Complex64, w: &[Complex64]) -> bool {
    match Extension::roper_suffridge(h.clone(), *space) {
        Ok(e) => e.membership_h(z, w),
        Err(_) => false,
    }
}

/// (z + Q(w), w)
pub fn automorphism_phi(q: &HomogeneousPolynomial, z: Complex64, w: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
    Ok((z + q.eval(w)?, w.to_vec()))
}

/// (z - Q(w), w)
pub fn automorphism_phi_inverse(
    q: &HomogeneousPolynomial,
    z: Complex64,
    w: &[Complex64],
) -> Result<(Complex64, Vec<Complex64>)> {
    Ok((z - q.eval(w)?, w.to_vec()))
}

/// F_t(z, w) = (e^{-mu t} z, e^{-(lambda + mu/r) t} w)
pub fn semigroup_action(a: &SpiralMatrix, t: f64, z: Complex64, w: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
    check_time(t)?;
    let ez = (-a.mu * t).exp();
    let ew = (-a.fiber_rate() * t).exp();
    Ok((ez * z, w.iter().map(|v| v * ew).collect()))
}

/// (e^{-t} z + (e^{-t} - e^{-2t}) Q(w), e^{-t} w) for quadratic Q.
pub fn conjugated_action(
    q: &HomogeneousPolynomial,
    t: f64,
    z: Complex64,
    w: &[Complex64],
) -> Result<(Complex64, Vec<Complex64>)> {
    check_time(t)?;
    if q.degree() != 2 {
        return Err(Error::DegreeMismatch { expected: 2, found: q.degree() });
    }
    let e = (-t).exp();
    Ok((e * z + (e - e * e) * q.eval(w)?, w.iter().map(|v| v * e).collect()))
}

/// R_t = (1 - |e^{-lambda t}|^r)/4 |h'(x1)| (1 - |x1|^2), x1 = h^{-1}(e^{-mu t} z0).
pub fn covering_radius_rt(
    h: &UnivalentMap,
    mu: Complex64,
    lambda: Complex64,
    r: f64,
    t: f64,
    z0: Complex64,
) -> Result<f64> {
    covering_radius_rt_with_guess(h, mu, lambda, r, t, z0, Complex64::new(0.0, 0.0)).map(|(rt, _)| rt)
}

fn covering_radius_rt_with_guess(
    h: &UnivalentMap,
    mu: Complex64,
    lambda: Complex64,
    r: f64,
    t: f64,
    z0: Complex64,
    guess: Complex64,
) -> Result<(f64, Complex64)> {
    check_time(t)?;
    if !(lambda.re > 0.0) {
        return Err(Error::InvalidParameter(format!("Re lambda must be positive, got {lambda}")));
    }
    let target = (-mu * t).exp() * z0;
    let x1 = h.invert(target, guess).map_err(|e| Error::InversionFailed { w: target, source: Box::new(e) })?;
    let contraction = (-lambda.re * t).exp().powf(r);
    Ok(((1.0 - contraction) / 4.0 * h.deriv(x1)?.norm() * (1.0 - x1.norm_sqr()), x1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvarianceMode {
    /// (e^{-mu t} z0 + gamma, e^{-(lambda + mu/r) t} w0) with |gamma| < R_t.
    GammaDisk,
    /// Phi^{-1} F_t Phi (H(p)).
    Muir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceConfig {
    pub mode: InvarianceMode,
    pub samples: usize,
    pub times: Vec<f64>,
    pub gamma_directions: usize,
    /// Gamma radius as a fraction of R_t.
    pub gamma_fraction: f64,
    pub eps: f64,
    pub seed: u64,
    pub sup_samples: usize,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        Self {
            mode: InvarianceMode::Muir,
            samples: 10_000,
            times: vec![0.1, 0.5, 1.0, 2.0, 5.0],
            gamma_directions: 16,
            gamma_fraction: 1.0 - INTERIOR_EPS,
            eps: INTERIOR_EPS,
            seed: 0,
            sup_samples: 100_000,
        }
    }
}

/// Outcome of one (sample, t, gamma) check.
struct Outcome {
    gauge: f64,
    witness: Option<Witness>,
    rt_bound_violation: bool,
}

/// Sampled check that the image of the ball under the extension is invariant
/// under the linear semigroup. Precondition failures are recorded in the
/// report rather than returned as errors.
pub fn verify_invariance(
    h: &UnivalentMap,
    mu: Complex64,
    lambda: Complex64,
    space: &BallSpace,
    q: &HomogeneousPolynomial,
    cfg: &InvarianceConfig,
) -> Result<VerificationReport> {
    for &t in &cfg.times {
        check_time(t)?;
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) || !(cfg.gamma_fraction > 0.0 && cfg.gamma_fraction < 1.0) {
        return Err(Error::InvalidParameter("eps and gamma fraction must lie in (0, 1)".into()));
    }
    let ext = match cfg.mode {
        InvarianceMode::Muir => Extension::muir(h.clone(), *space, q.clone())?,
        InvarianceMode::GammaDisk => Extension::roper_suffridge(h.clone(), *space)?,
    };
    let check = match cfg.mode {
        InvarianceMode::Muir => "muir_invariance",
        InvarianceMode::GammaDisk => "gamma_disk_invariance",
    };
    let mut report = VerificationReport::new(check);
    report.detail("mode", cfg.mode);
    report.detail("mu", mu);
    report.detail("lambda", lambda);
    report.detail("space", space);
    report.detail("times", &cfg.times);
    report.detail("seed", cfg.seed);

    let matrix = SpiralMatrix::new(mu, lambda, space.r);
    report.precondition(
        "spectrum",
        matrix.is_ok(),
        Some(mu.re.min(lambda.re)),
        "Re mu > 0 and Re lambda > 0",
    );
    let Ok(matrix) = matrix else {
        report.inconclusive = true;
        return Ok(report.finish());
    };

    match spirallike_margin(h, mu, &PolarGrid::boundary(48, 96)) {
        Ok(m) => report.precondition("spirallike", m >= -1e-9, Some(m), "min Re(h/(h' x) mu-bar-weighted) margin"),
        Err(e) => report.precondition("spirallike", false, None, e.to_string()),
    }
    if cfg.mode == InvarianceMode::Muir {
        let bound = 0.25 * lambda.re / lambda.norm();
        let est = sup_norm_q(q, &space.y_norm, cfg.sup_samples);
        report.precondition(
            "q_bound",
            est.value <= bound * (1.0 + 1e-9),
            Some(est.value),
            format!("sampled sup |Q| on the unit sphere vs Re(lambda)/(4|lambda|) = {bound}"),
        );
        report.detail("q_sup_estimate", &est);
        report.detail("q_bound", bound);
    }

    let mut rng = seeded_rng(cfg.seed);
    let samples: Vec<(BallPoint, f64)> = (0..cfg.samples)
        .map(|_| {
            let p = space.sample_interior(&mut rng, cfg.eps);
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            (p, phase)
        })
        .collect();

    let per_sample: Vec<Vec<Outcome>> = samples
        .par_iter()
        .map(|(p, phase)| check_sample(&ext, &matrix, cfg, p, *phase))
        .collect();

    let mut max_gauge: f64 = 0.0;
    let mut checks = 0usize;
    let mut rt_bound = 0usize;
    for outcome in per_sample.into_iter().flatten() {
        checks += 1;
        max_gauge = max_gauge.max(outcome.gauge);
        rt_bound += usize::from(outcome.rt_bound_violation);
        if let Some(w) = outcome.witness {
            report.record_failure(w);
        }
    }
    report.samples = checks;
    report.measured = max_gauge;
    report.predicted = 1.0;
    report.margin = 1.0 - max_gauge;
    report.detail("ball_samples", cfg.samples);
    if cfg.mode == InvarianceMode::GammaDisk {
        report.detail("gamma_directions", cfg.gamma_directions);
        report.detail("gamma_fraction", cfg.gamma_fraction);
        report.detail("rt_bound_violations", rt_bound);
    }
    Ok(report.finish())
}

fn failure(t: f64, p: &BallPoint, gamma: Option<Complex64>, value: f64, reason: &str) -> Outcome {
    Outcome {
        gauge: if value.is_finite() { value } else { 0.0 },
        witness: Some(Witness { t: Some(t), x: p.x, y: p.y.clone(), gamma, value, reason: reason.to_owned() }),
        rt_bound_violation: false,
    }
}

fn check_sample(ext: &Extension, a: &SpiralMatrix, cfg: &InvarianceConfig, p: &BallPoint, phase: f64) -> Vec<Outcome> {
    let mut out = Vec::new();
    let hp = match ext.extend_h(p) {
        Ok(v) => v,
        Err(e) => {
            for &t in &cfg.times {
                out.push(failure(t, p, None, f64::NAN, &format!("extension failed: {e}")));
            }
            return out;
        }
    };
    let h = ext.map();
    let r = ext.space().r;
    for &t in &cfg.times {
        let ez = (-a.mu * t).exp();
        let ew = (-a.fiber_rate() * t).exp();
        let w1: Vec<Complex64> = hp.y.iter().map(|v| v * ew).collect();
        match cfg.mode {
            InvarianceMode::Muir => {
                let z1 = match ext.q() {
                    // Phi^{-1} F_t Phi: Q(e^{-(lambda+mu/r)t} w) = e^{-(lambda+mu/r) r t} Q(w)
                    Some(q) => ez * hp.x + (ez - (-a.fiber_rate() * r * t).exp()) * q.eval_unchecked(&hp.y),
                    None => ez * hp.x,
                };
                out.push(match ext.h_preimage_gauge(z1, &w1, p.x) {
                    Some((g, _)) if g < 1.0 => Outcome { gauge: g, witness: None, rt_bound_violation: false },
                    Some((g, _)) => failure(t, p, None, g, "image point outside H(B)"),
                    None => failure(t, p, None, f64::NAN, "image point outside h(D) in the first coordinate"),
                });
            }
            InvarianceMode::GammaDisk => {
                let (rt, x1) = match covering_radius_rt_with_guess(h, a.mu, a.lambda, r, t, hp.x, p.x) {
                    Ok(v) => v,
                    Err(e) => {
                        out.push(failure(t, p, None, f64::NAN, &format!("R_t unavailable: {e}")));
                        continue;
                    }
                };
                let lower = ez.norm() * (1.0 - (-a.lambda.re * t).exp().powf(r)) / 4.0
                    * h.deriv(p.x).map(|d| d.norm()).unwrap_or(f64::NAN)
                    * (1.0 - p.x.norm_sqr());
                let rt_bound_violation = !(rt >= lower - 1e-12);
                let dirs = cfg.gamma_directions.max(1);
                for k in 0..dirs {
                    let angle = phase + std::f64::consts::TAU * k as f64 / dirs as f64;
                    let gamma = Complex64::from_polar(cfg.gamma_fraction * rt, angle);
                    let z1 = ez * hp.x + gamma;
                    let mut o = match ext.h_preimage_gauge(z1, &w1, x1) {
                        Some((g, _)) if g < 1.0 => Outcome { gauge: g, witness: None, rt_bound_violation: false },
                        Some((g, _)) => failure(t, p, Some(gamma), g, "perturbed point outside H(B)"),
                        None => failure(t, p, Some(gamma), f64::NAN, "perturbed point outside h(D)"),
                    };
                    if k == 0 && rt_bound_violation {
                        o.rt_bound_violation = true;
                        if o.witness.is_none() {
                            o = failure(t, p, None, rt - lower, "R_t below the |e^{-mu t}| lower bound");
                            o.rt_bound_violation = true;
                        }
                    }
                    out.push(o);
                }
            }
        }
    }
    out
}

/// Tolerance for the algebraic identities checked by `verify_identities`.
pub const IDENTITY_TOL: f64 = 1e-14;

fn max_diff(a: (Complex64, &[Complex64]), b: (Complex64, &[Complex64])) -> f64 {
    a.1.iter().zip(b.1).map(|(u, v)| (u - v).norm()).fold((a.0 - b.0).norm(), f64::max)
}

/// Semigroup laws of F_t and of its Phi-conjugate, the factorisation of the
/// Muir operator through Phi, and the Phi and disk-automorphism round trips.
/// `t` and `s` are drawn from [0, 3); points from the interior of the ball.
pub fn verify_identities(
    h: &UnivalentMap,
    mu: Complex64,
    lambda: Complex64,
    space: &BallSpace,
    q: &HomogeneousPolynomial,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let a = SpiralMatrix::new(mu, lambda, space.r)?;
    let ext = Extension::muir(h.clone(), *space, q.clone())?;
    let mut report = VerificationReport::new("algebraic_identities");
    let mut rng = seeded_rng(seed);
    let mut worst = [0.0f64; 5];
    let names = ["semigroup_law", "conjugated_semigroup_law", "muir_factorisation", "phi_round_trip", "disk_automorphism_round_trip"];
    let conjugated = q.degree() == 2;
    for _ in 0..samples {
        let p = space.sample_interior(&mut rng, INTERIOR_EPS);
        let t: f64 = rng.random_range(0.0..3.0);
        let s: f64 = rng.random_range(0.0..3.0);
        let mut res = [0.0f64; 5];

        let (z1, w1) = semigroup_action(&a, s, p.x, &p.y)?;
        let (z2, w2) = semigroup_action(&a, t, z1, &w1)?;
        let (z3, w3) = semigroup_action(&a, t + s, p.x, &p.y)?;
        res[0] = max_diff((z2, &w2), (z3, &w3));

        if conjugated {
            let (z1, w1) = conjugated_action(q, s, p.x, &p.y)?;
            let (z2, w2) = conjugated_action(q, t, z1, &w1)?;
            let (z3, w3) = conjugated_action(q, t + s, p.x, &p.y)?;
            res[1] = max_diff((z2, &w2), (z3, &w3));
        }

        let m = ext.apply(&p)?;
        let hp = ext.extend_h(&p)?;
        let (pz, pw) = automorphism_phi(q, hp.x, &hp.y)?;
        res[2] = max_diff((m.x, &m.y), (pz, &pw)) / (1.0 + pz.norm());

        // one rounded addition and one subtraction: exact up to 2 ulp of the larger operand
        let (bz, bw) = automorphism_phi_inverse(q, pz, &pw)?;
        let scale = hp.x.norm() + q.eval(&hp.y)?.norm();
        let dz = (bz - hp.x).norm();
        res[3] = if bw == hp.y && dz <= 4.0 * f64::EPSILON * scale { 0.0 } else { dz.max(f64::MIN_POSITIVE) };

        let z = random_unit_disk(&mut rng);
        let back = crate::univalent::disk_automorphism(p.x, crate::univalent::disk_automorphism(p.x, z)?)?;
        // rounding is amplified by 1/(1 - |x0|^2) near the boundary
        res[4] = (back - z).norm() * (1.0 - p.x.norm_sqr());

        for (k, &v) in res.iter().enumerate() {
            worst[k] = worst[k].max(v);
            if !(v <= IDENTITY_TOL) {
                report.record_failure(Witness {
                    t: Some(t),
                    x: p.x,
                    y: p.y.clone(),
                    gamma: None,
                    value: v,
                    reason: format!("{} residual {v:e} (s = {s})", names[k]),
                });
            }
        }
    }
    report.samples = samples;
    report.measured = worst.iter().copied().fold(0.0, f64::max);
    report.predicted = IDENTITY_TOL;
    report.margin = IDENTITY_TOL - report.measured;
    for (k, name) in names.iter().enumerate() {
        if k == 1 && !conjugated {
            report.detail(name, serde_json::Value::Null);
        } else {
            report.detail(name, worst[k]);
        }
    }
    report.detail("seed", seed);
    Ok(report.finish())
}

fn random_unit_disk<R: Rng>(rng: &mut R) -> Complex64 {
    crate::sampling::random_disk_point(rng, 1.0 - INTERIOR_EPS)
}
