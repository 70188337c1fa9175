//! Extension of a disk generator f to the ball:
//! f^(x, y) = (f(x) + Q(y), (1/r)(f'(x) + r lambda - q(x) Q(y)) y),
//! q = (mu - f')/f, together with the conjugating map
//! H~(x, y) = (h(x) - h'(x) Q(y)/(r lambda), h'(x)^{1/r} y) built on the
//! Koenigs function h, and flows of f^ on the ball.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::{sup_norm_q, BallPoint, BallSpace, HomogeneousPolynomial, SupNormEstimate};
use crate::ode::{self, OdeOptions};
use crate::report::{VerificationReport, Witness};
use crate::sampling::seeded_rng;
use crate::semigroups::{flow, koenigs, Generator, SINGULARITY_RADIUS};
use crate::univalent::{BranchedPower, UnivalentMap};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QBounds {
    pub q_sup: f64,
    /// r Re(lambda) / 4
    pub generator_bound: f64,
    /// sup |Q| / (r |lambda|), the sup of the polynomial -Q/(r lambda) of H~
    pub conjugate_sup: f64,
    /// Re(lambda) / (4 |lambda|)
    pub conjugate_bound: f64,
    /// q_sup is within 1% of the generator bound.
    pub near_bound: bool,
}

#[derive(Debug, Clone)]
pub struct ExtendedGenerator {
    base: Generator,
    lambda: Complex64,
    space: BallSpace,
    q: HomogeneousPolynomial,
    singularity_radius: f64,
    sup: SupNormEstimate,
}

impl ExtendedGenerator {
    pub fn new(base: Generator, lambda: Complex64, space: BallSpace, q: HomogeneousPolynomial) -> Result<Self> {
        Self::with_sup_samples(base, lambda, space, q, 100_000)
    }

    pub fn with_sup_samples(
        base: Generator,
        lambda: Complex64,
        space: BallSpace,
        q: HomogeneousPolynomial,
        sup_samples: usize,
    ) -> Result<Self> {
        if !(lambda.re > 0.0 && lambda.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("Re lambda must be positive, got {lambda}")));
        }
        if space.r.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!("r must be an integer, got {}", space.r)));
        }
        if q.dim() != space.m {
            return Err(Error::InvalidParameter(format!("Q acts on C^{}, the ball has m = {}", q.dim(), space.m)));
        }
        if !q.is_zero() && f64::from(q.degree()) != space.r {
            return Err(Error::DegreeMismatch { expected: space.r as u32, found: q.degree() });
        }
        let sup = sup_norm_q(&q, &space.y_norm, sup_samples);
        let bound = space.r * lambda.re / 4.0;
        if sup.value > bound + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "sup |Q| on the unit sphere is about {} and exceeds r Re(lambda)/4 = {bound}",
                sup.value
            )));
        }
        Ok(Self { base, lambda, space, q, singularity_radius: SINGULARITY_RADIUS, sup })
    }

    pub fn base(&self) -> &Generator {
        &self.base
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn space(&self) -> &BallSpace {
        &self.space
    }

    pub fn q(&self) -> &HomogeneousPolynomial {
        &self.q
    }

    pub fn singularity_radius(&self) -> f64 {
        self.singularity_radius
    }

    pub fn bounds(&self) -> QBounds {
        let r = self.space.r;
        let generator_bound = r * self.lambda.re / 4.0;
        QBounds {
            q_sup: self.sup.value,
            generator_bound,
            conjugate_sup: self.sup.value / (r * self.lambda.norm()),
            conjugate_bound: self.lambda.re / (4.0 * self.lambda.norm()),
            near_bound: self.sup.value >= 0.99 * generator_bound,
        }
    }

    /// f^(x, y) without the ball check.
    pub(crate) fn field(&self, x: Complex64, y: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
        let qy = self.q.eval_unchecked(y);
        let quotient = if qy == ZERO { ZERO } else { self.base.multiplier_quotient(x)? };
        let r = self.space.r;
        let factor = (self.base.deriv(x) + self.lambda * r - quotient * qy) / r;
        Ok((self.base.value(x) + qy, y.iter().map(|v| v * factor).collect()))
    }

    /// The linear model f~(z, w) = (mu z, (lambda + mu/r) w).
    pub fn linear_model(&self, z: Complex64, w: &[Complex64]) -> (Complex64, Vec<Complex64>) {
        let mu = self.base.mu();
        let rate = self.lambda + mu / self.space.r;
        (mu * z, w.iter().map(|v| v * rate).collect())
    }
}

pub fn extend_generator(g: &ExtendedGenerator, p: &BallPoint) -> Result<(Complex64, Vec<Complex64>)> {
    g.space.check_point(p)?;
    g.field(p.x, &p.y)
}

/// 2x2 block operator on C x C^m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOperator {
    pub a11: Complex64,
    /// Row acting on the fiber.
    pub a12: Vec<Complex64>,
    /// Column into the fiber.
    pub a21: Vec<Complex64>,
    /// Row-major m x m block.
    pub a22: Vec<Vec<Complex64>>,
}

impl BlockOperator {
    pub fn identity(m: usize) -> Self {
        let a22 = (0..m).map(|i| (0..m).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { ZERO }).collect()).collect();
        Self { a11: Complex64::new(1.0, 0.0), a12: vec![ZERO; m], a21: vec![ZERO; m], a22 }
    }

    pub fn dim(&self) -> usize {
        self.a12.len()
    }

    pub fn apply(&self, z: Complex64, w: &[Complex64]) -> (Complex64, Vec<Complex64>) {
        let top = self.a11 * z + self.a12.iter().zip(w).map(|(a, b)| a * b).sum::<Complex64>();
        let bottom = self
            .a21
            .iter()
            .zip(&self.a22)
            .map(|(c, row)| c * z + row.iter().zip(w).map(|(a, b)| a * b).sum::<Complex64>())
            .collect();
        (top, bottom)
    }

    pub fn compose(&self, other: &BlockOperator) -> BlockOperator {
        let m = self.dim();
        let a11 = self.a11 * other.a11 + (0..m).map(|k| self.a12[k] * other.a21[k]).sum::<Complex64>();
        let a12 = (0..m)
            .map(|j| self.a11 * other.a12[j] + (0..m).map(|k| self.a12[k] * other.a22[k][j]).sum::<Complex64>())
            .collect();
        let a21 = (0..m)
            .map(|i| self.a21[i] * other.a11 + (0..m).map(|k| self.a22[i][k] * other.a21[k]).sum::<Complex64>())
            .collect();
        let a22 = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| self.a21[i] * other.a12[j] + (0..m).map(|k| self.a22[i][k] * other.a22[k][j]).sum::<Complex64>())
                    .collect()
            })
            .collect();
        BlockOperator { a11, a12, a21, a22 }
    }

    /// Largest entry of self - I.
    pub fn identity_residual(&self) -> f64 {
        let id = BlockOperator::identity(self.dim());
        let mut worst = (self.a11 - id.a11).norm();
        for k in 0..self.dim() {
            worst = worst.max(self.a12[k].norm()).max(self.a21[k].norm());
            for j in 0..self.dim() {
                worst = worst.max((self.a22[k][j] - id.a22[k][j]).norm());
            }
        }
        worst
    }
}

struct Jet {
    h: Complex64,
    d1: Complex64,
    d2: Complex64,
    /// h'(x)^{1/r}
    s: Complex64,
}

fn jet(h: &UnivalentMap, r: f64, x: Complex64) -> Result<Jet> {
    let d1 = h.deriv(x)?;
    if d1 == ZERO {
        return Err(Error::DerivativeVanishes(x));
    }
    let s = BranchedPower::new(h.clone(), r)?.eval(x)?;
    Ok(Jet { h: h.eval(x)?, d1, d2: h.second_deriv(x)?, s })
}

fn fiber_check(g: &ExtendedGenerator, p: &BallPoint) -> Result<()> {
    g.space.check_point(p)
}

/// H~(x, y) = (h(x) - h'(x) Q(y)/(r lambda), h'(x)^{1/r} y)
pub fn h_tilde(g: &ExtendedGenerator, h: &UnivalentMap, p: &BallPoint) -> Result<BallPoint> {
    fiber_check(g, p)?;
    let j = jet(h, g.space.r, p.x)?;
    let rl = g.lambda * g.space.r;
    Ok(BallPoint { x: j.h - j.d1 * g.q.eval_unchecked(&p.y) / rl, y: p.y.iter().map(|v| v * j.s).collect() })
}

/// The polynomial -Q/(r lambda) for which H~ is the Muir extension of h.
pub fn h_tilde_polynomial(g: &ExtendedGenerator) -> HomogeneousPolynomial {
    g.q.scale(-1.0 / (g.lambda * g.space.r))
}

/// Differential of H~, assembled from h', h'', Q and its gradient.
pub fn dh_tilde(g: &ExtendedGenerator, h: &UnivalentMap, p: &BallPoint) -> Result<BlockOperator> {
    fiber_check(g, p)?;
    let r = g.space.r;
    let j = jet(h, r, p.x)?;
    let rl = g.lambda * r;
    let qy = g.q.eval_unchecked(&p.y);
    let grad = g.q.gradient(&p.y)?;
    let m = g.space.m;
    let ds = j.s * j.d2 / (j.d1 * r);
    Ok(BlockOperator {
        a11: j.d1 - j.d2 * qy / rl,
        a12: grad.iter().map(|v| -j.d1 * v / rl).collect(),
        a21: p.y.iter().map(|v| ds * v).collect(),
        a22: (0..m).map(|i| (0..m).map(|k| if i == k { j.s } else { ZERO }).collect()).collect(),
    })
}

/// Exact inverse of dh_tilde by the Schur complement of the fiber block;
/// the complement equals h'(x) by Euler's identity grad Q(y) . y = r Q(y).
pub fn dh_tilde_inverse(g: &ExtendedGenerator, h: &UnivalentMap, p: &BallPoint) -> Result<BlockOperator> {
    fiber_check(g, p)?;
    let r = g.space.r;
    let j = jet(h, r, p.x)?;
    let rl = g.lambda * r;
    let grad = g.q.gradient(&p.y)?;
    let m = g.space.m;
    let a12: Vec<Complex64> = grad.iter().map(|v| v / (rl * j.s)).collect();
    let a21: Vec<Complex64> = p.y.iter().map(|v| -j.d2 * v / (r * j.d1 * j.d1)).collect();
    let c = j.d2 / (r * rl * j.d1 * j.s);
    let a22 = (0..m)
        .map(|i| (0..m).map(|k| if i == k { 1.0 / j.s } else { ZERO } - c * p.y[i] * grad[k]).collect())
        .collect();
    Ok(BlockOperator { a11: 1.0 / j.d1, a12, a21, a22 })
}

/// The inverse as a scalar-block formula, with (2,1) entry -h'' y/(r h'^2)
/// and (2,2) block (r lambda h' - h'' Q(y))/(r lambda h'^{1+1/r}) id. It is
/// the true inverse for m = 1 and agrees with it on vectors parallel to y.
pub fn dh_tilde_inverse_scalar_form(g: &ExtendedGenerator, h: &UnivalentMap, p: &BallPoint) -> Result<BlockOperator> {
    fiber_check(g, p)?;
    let r = g.space.r;
    let j = jet(h, r, p.x)?;
    let rl = g.lambda * r;
    let qy = g.q.eval_unchecked(&p.y);
    let grad = g.q.gradient(&p.y)?;
    let m = g.space.m;
    let diag = (rl * j.d1 - j.d2 * qy) / (rl * j.d1 * j.s);
    Ok(BlockOperator {
        a11: 1.0 / j.d1,
        a12: grad.iter().map(|v| v / (rl * j.s)).collect(),
        a21: p.y.iter().map(|v| -j.d2 * v / (r * j.d1 * j.d1)).collect(),
        a22: (0..m).map(|i| (0..m).map(|k| if i == k { diag } else { ZERO }).collect()).collect(),
    })
}

/// max over samples of |DH~(p) f^(p) - f~(H~(p))|.
pub fn conjugation_residual(g: &ExtendedGenerator, h: &UnivalentMap, samples: &[BallPoint]) -> Result<f64> {
    let per: Vec<f64> = samples
        .par_iter()
        .map(|p| {
            let d = dh_tilde(g, h, p)?;
            let (fx, fy) = extend_generator(g, p)?;
            let (lx, ly) = d.apply(fx, &fy);
            let hp = h_tilde(g, h, p)?;
            let (tx, ty) = g.linear_model(hp.x, &hp.y);
            Ok(ly.iter().zip(&ty).map(|(a, b)| (a - b).norm()).fold((lx - tx).norm(), f64::max))
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFlow {
    pub endpoint: BallPoint,
    pub steps: usize,
    pub max_gauge: f64,
    /// (t, point) after each accepted step, when recorded.
    pub trajectory: Vec<(f64, BallPoint)>,
}

fn split(v: &[Complex64]) -> BallPoint {
    BallPoint { x: v[0], y: v[1..].to_vec() }
}

/// Solves d(x, y)/dt = -f^(x, y) from p over [0, t_end]; an exit from the
/// ball surfaces as `Error::LeftDomain`.
pub fn flow_ball(g: &ExtendedGenerator, p: &BallPoint, t_end: f64, tol: f64, record: bool) -> Result<BallFlow> {
    fiber_check(g, p)?;
    let mut y0 = Vec::with_capacity(1 + p.y.len());
    y0.push(p.x);
    y0.extend_from_slice(&p.y);
    let space = g.space;
    let opts = OdeOptions { record, ..OdeOptions::with_tol(tol) };
    let sol = ode::integrate(
        |state, d| match g.field(state[0], &state[1..]) {
            Ok((fx, fy)) => {
                d[0] = -fx;
                for (di, v) in d[1..].iter_mut().zip(fy) {
                    *di = -v;
                }
            }
            Err(_) => d.iter_mut().for_each(|v| *v = Complex64::new(f64::NAN, f64::NAN)),
        },
        |state| space.gauge(state[0], &state[1..]),
        &y0,
        t_end,
        opts,
    )?;
    Ok(BallFlow {
        endpoint: split(&sol.state),
        steps: sol.steps,
        max_gauge: sol.max_gauge,
        trajectory: sol.trajectory.iter().map(|(t, v)| (*t, split(v))).collect(),
    })
}

fn point_distance(a: &BallPoint, b: &BallPoint) -> f64 {
    a.y.iter().zip(&b.y).map(|(u, v)| (u - v).norm()).fold((a.x - b.x).norm(), f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenExtConfig {
    pub samples: usize,
    pub starts: usize,
    pub t_end: f64,
    pub tol: f64,
    pub seed: u64,
    pub conjugation_tol: f64,
    pub inverse_tol: f64,
    pub fiber_tol: f64,
}

impl Default for GenExtConfig {
    fn default() -> Self {
        Self {
            samples: 500,
            starts: 100,
            t_end: 5.0,
            tol: 1e-10,
            seed: 0,
            conjugation_tol: 1e-8,
            inverse_tol: 1e-9,
            fiber_tol: 1e-8,
        }
    }
}

/// Per-start outcome of the flow checks.
struct FlowCheck {
    exit: Option<Witness>,
    max_gauge: f64,
    semigroup: f64,
    trajectory: Vec<(f64, BallPoint)>,
}

/// Conjugation identity, inverse differential, ball invariance of the flow,
/// semigroup law and fiber consistency, as one report.
/// Sampled trajectories, one per start: (time, point) pairs.
pub type Trajectories = Vec<Vec<(f64, BallPoint)>>;

pub fn verify_generator_extension(g: &ExtendedGenerator, cfg: &GenExtConfig) -> Result<(VerificationReport, Trajectories)> {
    if !(cfg.t_end.is_finite() && cfg.t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("T must be finite and >= 0, got {}", cfg.t_end)));
    }
    let h = koenigs(&g.base)?;
    let mut report = VerificationReport::new("generator_extension");
    let bounds = g.bounds();
    report.precondition("q_bound", bounds.q_sup <= bounds.generator_bound + 1e-12, Some(bounds.q_sup), "sup |Q| <= r Re(lambda)/4");
    report.detail("bounds", bounds);
    report.detail("generator", g.base.describe());
    report.detail("kind", g.base.kind());
    report.detail("mu", g.base.mu());
    report.detail("lambda", g.lambda);
    report.detail("space", g.space);
    report.detail("seed", cfg.seed);

    let mut rng = seeded_rng(cfg.seed);
    let samples: Vec<BallPoint> = (0..cfg.samples).map(|_| g.space.sample_interior(&mut rng, 1e-3)).collect();
    let starts: Vec<BallPoint> = (0..cfg.starts).map(|_| g.space.sample_interior(&mut rng, 1e-3)).collect();
    let split_times: Vec<f64> = (0..cfg.starts).map(|_| rng.random_range(0.0..=1.0) * cfg.t_end).collect();

    let conj = conjugation_residual(g, &h, &samples)?;
    report.detail("conjugation_residual", conj);
    if !(conj <= cfg.conjugation_tol) {
        report.record_failure(Witness {
            t: None,
            x: ZERO,
            y: Vec::new(),
            gamma: None,
            value: conj,
            reason: format!("conjugation residual {conj:e} exceeds {:e}", cfg.conjugation_tol),
        });
    }

    let inverse: Vec<f64> = samples
        .par_iter()
        .map(|p| Ok(dh_tilde(g, &h, p)?.compose(&dh_tilde_inverse(g, &h, p)?).identity_residual()))
        .collect::<Result<_>>()?;
    let inverse = inverse.into_iter().fold(0.0, f64::max);
    report.detail("inverse_residual", inverse);
    if !(inverse <= cfg.inverse_tol) {
        report.record_failure(Witness {
            t: None,
            x: ZERO,
            y: Vec::new(),
            gamma: None,
            value: inverse,
            reason: format!("DH~ DH~^-1 - I residual {inverse:e} exceeds {:e}", cfg.inverse_tol),
        });
    }

    let checks: Vec<FlowCheck> = starts
        .par_iter()
        .zip(&split_times)
        .map(|(p, &s)| match flow_ball(g, p, cfg.t_end, cfg.tol, true) {
            Ok(full) => {
                let semigroup = flow_ball(g, p, s, cfg.tol, false)
                    .and_then(|a| flow_ball(g, &a.endpoint, cfg.t_end - s, cfg.tol, false))
                    .map(|b| point_distance(&b.endpoint, &full.endpoint))
                    .unwrap_or(f64::INFINITY);
                FlowCheck { exit: None, max_gauge: full.max_gauge, semigroup, trajectory: full.trajectory }
            }
            Err(e) => FlowCheck {
                exit: Some(Witness {
                    t: match e {
                        Error::LeftDomain { t, .. } | Error::StepUnderflow(t) => Some(t),
                        _ => None,
                    },
                    x: p.x,
                    y: p.y.clone(),
                    gamma: None,
                    value: match e {
                        Error::LeftDomain { gauge, .. } => gauge,
                        _ => f64::NAN,
                    },
                    reason: format!("flow failed: {e}"),
                }),
                max_gauge: f64::NAN,
                semigroup: f64::NAN,
                trajectory: Vec::new(),
            },
        })
        .collect();
    let mut exits = 0;
    let mut max_gauge: f64 = 0.0;
    let mut semigroup: f64 = 0.0;
    let mut trajectories = Vec::with_capacity(checks.len());
    for c in checks {
        if let Some(w) = c.exit {
            exits += 1;
            report.record_failure(w);
        } else {
            max_gauge = max_gauge.max(c.max_gauge);
            semigroup = semigroup.max(c.semigroup);
        }
        trajectories.push(c.trajectory);
    }
    let semigroup_tol = 10.0 * cfg.tol;
    report.detail("ball_exits", exits);
    report.detail("max_gauge", max_gauge);
    report.detail("semigroup_residual", semigroup);
    report.detail("semigroup_tolerance", semigroup_tol);
    if !(semigroup <= semigroup_tol) && exits == 0 {
        report.record_failure(Witness {
            t: None,
            x: ZERO,
            y: Vec::new(),
            gamma: None,
            value: semigroup,
            reason: format!("semigroup law residual {semigroup:e} exceeds {semigroup_tol:e}"),
        });
    }

    let fiber = fiber_consistency(g, &starts, cfg.t_end, cfg.tol)?;
    report.detail("fiber_residual", fiber);
    if !(fiber <= cfg.fiber_tol) {
        report.record_failure(Witness {
            t: Some(cfg.t_end),
            x: ZERO,
            y: Vec::new(),
            gamma: None,
            value: fiber,
            reason: format!("y = 0 flow differs from the disk flow by {fiber:e}"),
        });
    }

    report.samples = cfg.samples + cfg.starts;
    report.measured = max_gauge;
    report.predicted = 1.0;
    report.margin = 1.0 - max_gauge;
    Ok((report.finish(), trajectories))
}

/// max |x(T) - F_T(x0)| over y = 0 starts, comparing the ball flow with the
/// disk flow of the base generator.
pub fn fiber_consistency(g: &ExtendedGenerator, starts: &[BallPoint], t_end: f64, tol: f64) -> Result<f64> {
    let per: Vec<f64> = starts
        .par_iter()
        .map(|p| {
            let zero_fiber = BallPoint { x: p.x, y: vec![ZERO; p.y.len()] };
            let ball = flow_ball(g, &zero_fiber, t_end, tol * 1e-2, false)?;
            let disk = flow(&g.base, p.x, t_end, tol * 1e-2)?;
            Ok((ball.endpoint.x - disk.endpoint).norm().max(ball.endpoint.y.iter().map(|v| v.norm()).fold(0.0, f64::max)))
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}
