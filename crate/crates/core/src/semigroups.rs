//! One-parameter semigroups on the disk: generator checks, flows, Koenigs
//! functions and the spirallike criterion.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::poly::Poly;
use crate::quadrature::{integrate_segment, QuadratureOptions};
use crate::sampling::PolarGrid;
use crate::univalent::{check_disk, is_finite, DiskAutomorphism, Holomorphic, UnivalentMap};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Radius of the disk around an interior Denjoy-Wolff point inside which
/// removable quotients are evaluated from a Taylor model.
pub const SINGULARITY_RADIUS: f64 = 1e-4;

/// Acceptance threshold shared by the generator and spirallike margins.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

/// The vector field of a generator together with its derivatives.
pub trait GeneratorField: Send + Sync + fmt::Debug {
    fn value(&self, z: Complex64) -> Complex64;
    fn deriv(&self, z: Complex64) -> Complex64;

    fn second_deriv(&self, z: Complex64) -> Complex64 {
        let h = 1e-5;
        (self.deriv(z + h) - self.deriv(z - h)) / (2.0 * h)
    }

    fn describe(&self) -> String;
}

#[derive(Debug, Clone)]
pub struct PolynomialField(pub Poly);

impl GeneratorField for PolynomialField {
    fn value(&self, z: Complex64) -> Complex64 {
        self.0.eval(z)
    }
    fn deriv(&self, z: Complex64) -> Complex64 {
        self.0.eval2(z).1
    }
    fn second_deriv(&self, z: Complex64) -> Complex64 {
        self.0.eval2(z).2
    }
    fn describe(&self) -> String {
        format!("polynomial{:?}", self.0.coefs().iter().map(|c| (c.re, c.im)).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone)]
pub struct RationalField {
    pub num: Poly,
    pub den: Poly,
}

impl GeneratorField for RationalField {
    fn value(&self, z: Complex64) -> Complex64 {
        self.num.eval(z) / self.den.eval(z)
    }
    fn deriv(&self, z: Complex64) -> Complex64 {
        let (p, dp, _) = self.num.eval2(z);
        let (q, dq, _) = self.den.eval2(z);
        (dp * q - p * dq) / (q * q)
    }
    fn second_deriv(&self, z: Complex64) -> Complex64 {
        let (p, dp, ddp) = self.num.eval2(z);
        let (q, dq, ddq) = self.den.eval2(z);
        let n1 = dp * q - p * dq;
        let dn1 = ddp * q - p * ddq;
        (dn1 * q - 2.0 * n1 * dq) / (q * q * q)
    }
    fn describe(&self) -> String {
        "rational".into()
    }
}

/// f = mu h / h' for a mu-spirallike h with h(0) = 0.
#[derive(Debug, Clone)]
pub struct SpirallikeField {
    pub map: UnivalentMap,
    pub mu: Complex64,
}

impl GeneratorField for SpirallikeField {
    fn value(&self, z: Complex64) -> Complex64 {
        self.mu * self.map.value_raw(z) / self.map.deriv_raw(z)
    }
    fn deriv(&self, z: Complex64) -> Complex64 {
        let d = self.map.deriv_raw(z);
        self.mu * (ONE - self.map.value_raw(z) * self.map.second_deriv_raw(z) / (d * d))
    }
    fn describe(&self) -> String {
        format!("spirallike({}, mu={})", self.map.describe(), self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Interior Denjoy-Wolff point.
    Dilation,
    /// Denjoy-Wolff point on the unit circle.
    Hyperbolic,
}

/// An infinitesimal generator f of a semigroup of holomorphic self-maps of
/// the disk; the semigroup solves dz/dt = -f(z).
#[derive(Debug, Clone)]
pub struct Generator {
    field: Arc<dyn GeneratorField>,
    kind: GeneratorKind,
    tau: Complex64,
    mu: Complex64,
}

impl Generator {
    /// Dilation-type generator; `mu` defaults to f'(tau).
    pub fn dilation(field: Arc<dyn GeneratorField>, tau: Complex64, mu: Option<Complex64>) -> Result<Self> {
        check_disk(tau)?;
        let at_tau = field.value(tau);
        if !is_finite(at_tau) || at_tau.norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "generator does not vanish at its Denjoy-Wolff point: f({tau}) = {at_tau}"
            )));
        }
        let d = field.deriv(tau);
        let mu = mu.unwrap_or(d);
        if !is_finite(mu) || mu.re <= 0.0 {
            return Err(Error::InvalidParameter(format!("dilation generator needs Re mu > 0, got {mu}")));
        }
        if (mu - d).norm() > 1e-8 * (1.0 + d.norm()) {
            return Err(Error::InvalidParameter(format!(
                "dilation multiplier must equal f'(tau) = {d}, got {mu}"
            )));
        }
        Ok(Self { field, kind: GeneratorKind::Dilation, tau, mu })
    }

    /// Hyperbolic-type generator with boundary Denjoy-Wolff point `tau` and
    /// user-supplied multiplier `mu`. The angular derivative f'(tau) is
    /// estimated by the radial difference quotient at r = 1 - 1e-4 and `mu`
    /// must satisfy |mu - f'(tau)| <= f'(tau), with 5% slack for the estimate.
    pub fn hyperbolic(field: Arc<dyn GeneratorField>, tau: Complex64, mu: Complex64) -> Result<Self> {
        if !is_finite(tau) || (tau.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("hyperbolic Denjoy-Wolff point must satisfy |tau| = 1, got {tau}")));
        }
        let angular = radial_angular_derivative(field.as_ref(), tau)?;
        if !is_finite(mu) || mu == ZERO || (mu - angular).norm() > 1.05 * angular {
            return Err(Error::InvalidParameter(format!(
                "hyperbolic multiplier must satisfy |mu - f'(tau)| <= f'(tau) (f'(tau) ~ {angular}), got {mu}"
            )));
        }
        Ok(Self { field, kind: GeneratorKind::Hyperbolic, tau, mu })
    }

    /// Whether `mu` agrees with the estimated angular derivative within 5%
    /// (always true for dilation type, where mu = f'(tau) is enforced).
    pub fn mu_matches_angular_derivative(&self) -> bool {
        match self.kind {
            GeneratorKind::Dilation => true,
            GeneratorKind::Hyperbolic => radial_angular_derivative(self.field.as_ref(), self.tau)
                .map(|a| (self.mu - a).norm() <= 0.05 * a)
                .unwrap_or(false),
        }
    }

    /// The generator mu h / h' of a mu-spirallike map with h(0) = 0.
    pub fn from_spirallike(map: UnivalentMap, mu: Complex64) -> Result<Self> {
        Self::dilation(Arc::new(SpirallikeField { map, mu }), ZERO, Some(mu))
    }

    pub fn polynomial(coefs: Vec<Complex64>, kind: GeneratorKind, tau: Complex64, mu: Option<Complex64>) -> Result<Self> {
        let field: Arc<dyn GeneratorField> = Arc::new(PolynomialField(Poly::new(coefs)));
        Self::with_kind(field, kind, tau, mu)
    }

    pub fn with_kind(
        field: Arc<dyn GeneratorField>,
        kind: GeneratorKind,
        tau: Complex64,
        mu: Option<Complex64>,
    ) -> Result<Self> {
        match kind {
            GeneratorKind::Dilation => Self::dilation(field, tau, mu),
            GeneratorKind::Hyperbolic => {
                let mu = mu.ok_or_else(|| {
                    Error::InvalidParameter("hyperbolic generators need an explicit multiplier mu".into())
                })?;
                Self::hyperbolic(field, tau, mu)
            }
        }
    }

    pub fn field(&self) -> &Arc<dyn GeneratorField> {
        &self.field
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        self.field.value(z)
    }

    pub fn deriv(&self, z: Complex64) -> Complex64 {
        self.field.deriv(z)
    }

    pub fn describe(&self) -> String {
        self.field.describe()
    }

    /// (mu - f'(z)) / f(z), holomorphic at an interior Denjoy-Wolff point
    /// where it is replaced by the quadratic Taylor model of f.
    pub fn multiplier_quotient(&self, z: Complex64) -> Result<Complex64> {
        let f = self.field.value(z);
        let df = self.field.deriv(z);
        if self.kind == GeneratorKind::Dilation && (z - self.tau).norm() < SINGULARITY_RADIUS {
            // f ~ mu (z - tau) + f''(tau)/2 (z - tau)^2
            let f2 = self.field.second_deriv(self.tau);
            return Ok(-f2 / (self.mu + f2 * (z - self.tau) * 0.5));
        }
        if !is_finite(f) || f.norm() < 1e-300 {
            return Err(Error::UnresolvedSingularity(z));
        }
        Ok((self.mu - df) / f)
    }

    pub fn berkson_porta_margin(&self, grid: &PolarGrid) -> f64 {
        berkson_porta_margin(|z| self.field.value(z), self.field.deriv(self.tau), self.tau, grid)
    }
}

fn radial_angular_derivative(field: &dyn GeneratorField, tau: Complex64) -> Result<f64> {
    let r = 1.0 - 1e-4;
    let quotient = field.value(tau * r) / (tau * (r - 1.0));
    if !is_finite(quotient) || quotient.re <= 0.0 || quotient.im.abs() > 0.05 * quotient.re {
        return Err(Error::InvalidParameter(format!(
            "radial difference quotient at tau is not a positive number: {quotient}"
        )));
    }
    Ok(quotient.re)
}

/// min over the grid of Re p(z), where f(z) = (z - tau)(1 - conj(tau) z) p(z).
pub fn berkson_porta_margin<F>(f: F, f_prime_tau: Complex64, tau: Complex64, grid: &PolarGrid) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    grid.points()
        .map(|z| {
            let factor = (z - tau) * (ONE - tau.conj() * z);
            let p = if factor.norm() < 1e-12 {
                f_prime_tau / (1.0 - tau.norm_sqr())
            } else {
                f(z) / factor
            };
            if is_finite(p) {
                p.re
            } else {
                f64::NEG_INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub endpoint: Complex64,
    pub steps: usize,
    pub local_error_estimate: f64,
}

/// The semigroup element F_t(z0), solving dz/dt = -f(z).
pub fn flow(f: &Generator, z0: Complex64, t: f64, tol: f64) -> Result<FlowResult> {
    check_disk(z0)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("flow time must be >= 0, got {t}")));
    }
    let field = f.field.clone();
    let sol = ode::integrate(
        move |y, d| d[0] = -field.value(y[0]),
        |y| y[0].norm_sqr(),
        &[z0],
        t,
        OdeOptions::with_tol(tol),
    )?;
    Ok(FlowResult { endpoint: sol.state[0], steps: sol.steps, local_error_estimate: sol.error_estimate })
}

/// Koenigs function of a generator: the solution of h' f = mu h, normalised
/// by h(tau) = 0, h'(0) = 1 when tau = 0 (dilation) and h(0) = 1
/// (hyperbolic).
#[derive(Debug, Clone)]
pub struct KoenigsFunction {
    gen: Generator,
    /// For dilation type with tau != 0, the automorphism moving tau to 0.
    conj: Option<DiskAutomorphism>,
    /// -g''(0) / (2 mu): limit of the regularised integrand at 0.
    integrand_at_zero: Complex64,
    quad: QuadratureOptions,
}

/// Value, first and second derivative of a Koenigs function at one point.
#[derive(Debug, Clone, Copy)]
pub struct KoenigsJet {
    pub value: Complex64,
    pub deriv: Complex64,
    pub second: Complex64,
}

impl KoenigsFunction {
    pub fn new(gen: &Generator) -> Result<Self> {
        let conj = match gen.kind {
            GeneratorKind::Dilation if gen.tau != ZERO => Some(DiskAutomorphism::new(gen.tau)?),
            _ => None,
        };
        let mut k = Self {
            gen: gen.clone(),
            conj,
            integrand_at_zero: ZERO,
            quad: QuadratureOptions::default(),
        };
        if gen.kind == GeneratorKind::Dilation {
            let g2 = match conj {
                None => gen.field.second_deriv(ZERO),
                Some(_) => {
                    let d = 1e-3;
                    (k.conjugated_field(Complex64::new(d, 0.0)) + k.conjugated_field(Complex64::new(-d, 0.0))) / (d * d)
                }
            };
            k.integrand_at_zero = -g2 / (2.0 * gen.mu);
        }
        Ok(k)
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    /// The generator moved so that its Denjoy-Wolff point is the origin:
    /// g(w) = f(phi(w)) / phi'(w).
    fn conjugated_field(&self, w: Complex64) -> Complex64 {
        match &self.conj {
            None => self.gen.field.value(w),
            Some(phi) => self.gen.field.value(phi.apply(w)) / phi.deriv(w),
        }
    }

    /// log(h(z)/z) for the origin-normalised dilation case, or log h(z) for
    /// the hyperbolic case.
    fn log_integral(&self, z: Complex64) -> Result<Complex64> {
        let mu = self.gen.mu;
        match self.gen.kind {
            GeneratorKind::Dilation => {
                let at0 = self.integrand_at_zero;
                integrate_segment(
                    |s| {
                        if s.norm() < 1e-5 {
                            at0
                        } else {
                            mu / self.conjugated_field(s) - ONE / s
                        }
                    },
                    ZERO,
                    z,
                    self.quad,
                )
            }
            GeneratorKind::Hyperbolic => integrate_segment(|s| mu / self.gen.field.value(s), ZERO, z, self.quad),
        }
    }

    /// Koenigs function of the origin-normalised dilation generator and its
    /// derivative.
    fn origin_value_deriv(&self, w: Complex64) -> Result<(Complex64, Complex64)> {
        if w == ZERO {
            return Ok((ZERO, ONE));
        }
        let e = self.log_integral(w)?.exp();
        let g = self.conjugated_field(w);
        Ok((w * e, e * self.gen.mu * w / g))
    }

    pub fn jet(&self, z: Complex64) -> Result<KoenigsJet> {
        check_disk(z)?;
        let (value, deriv) = match (self.gen.kind, &self.conj) {
            (GeneratorKind::Hyperbolic, _) => {
                let h = self.log_integral(z)?.exp();
                (h, self.gen.mu * h / self.gen.field.value(z))
            }
            (GeneratorKind::Dilation, None) => self.origin_value_deriv(z)?,
            (GeneratorKind::Dilation, Some(phi)) => {
                let w = phi.apply(z);
                let (v, d) = self.origin_value_deriv(w)?;
                (v, d * phi.deriv(z))
            }
        };
        // h'' = h' (mu - f') / f, from differentiating h' f = mu h
        let second = deriv * self.gen.multiplier_quotient(z)?;
        Ok(KoenigsJet { value, deriv, second })
    }

    /// Continuous log h' with the principal value at 0 (closed path data for
    /// the origin-normalised dilation case, tracked log f otherwise).
    pub fn log_deriv(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        match (self.gen.kind, &self.conj) {
            (GeneratorKind::Dilation, None) => {
                if z == ZERO {
                    return Ok(ZERO);
                }
                // mu z / f(z) = mu / p(z) with Re p >= 0 and Re mu > 0, so its
                // argument stays inside (-pi, pi).
                Ok(self.log_integral(z)? + (self.gen.mu * z / self.gen.field.value(z)).ln())
            }
            (GeneratorKind::Hyperbolic, _) => {
                let h0 = self.jet(ZERO)?.deriv;
                let log_f_change = tracked_log_change(|s| self.gen.field.value(s), ZERO, z)?;
                Ok(h0.ln() + self.log_integral(z)? - log_f_change)
            }
            (GeneratorKind::Dilation, Some(_)) => {
                let h0 = self.jet(ZERO)?.deriv;
                let log_change = tracked_log_change(|s| self.jet(s).map(|j| j.deriv).unwrap_or(ZERO), ZERO, z)?;
                Ok(h0.ln() + log_change)
            }
        }
    }
}

/// Continuous change of log F along the segment [a, b] for a nonvanishing F.
fn tracked_log_change<F>(f: F, a: Complex64, b: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    fn piece<F: Fn(Complex64) -> Complex64>(
        f: &F,
        z0: Complex64,
        v0: Complex64,
        z1: Complex64,
        v1: Complex64,
        depth: u32,
    ) -> Result<Complex64> {
        if !is_finite(v1) || v1 == ZERO {
            return Err(Error::BranchTracking(z1));
        }
        let inc = (v1 / v0).ln();
        if inc.im.abs() <= std::f64::consts::FRAC_PI_4 {
            return Ok(inc);
        }
        if depth >= 30 {
            return Err(Error::BranchTracking(z1));
        }
        let zm = (z0 + z1) * 0.5;
        let vm = f(zm);
        Ok(piece(f, z0, v0, zm, vm, depth + 1)? + piece(f, zm, vm, z1, v1, depth + 1)?)
    }
    let pieces = (((b - a).norm() * 64.0).ceil() as usize).max(4);
    let mut acc = ZERO;
    let mut z0 = a;
    let mut v0 = f(a);
    for k in 1..=pieces {
        let z1 = a + (b - a) * (k as f64 / pieces as f64);
        let v1 = f(z1);
        acc += piece(&f, z0, v0, z1, v1, 0)?;
        z0 = z1;
        v0 = v1;
    }
    Ok(acc)
}

impl Holomorphic for KoenigsFunction {
    fn value(&self, z: Complex64) -> Complex64 {
        self.jet(z).map(|j| j.value).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
    fn deriv(&self, z: Complex64) -> Complex64 {
        self.jet(z).map(|j| j.deriv).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
    fn second_deriv(&self, z: Complex64) -> Complex64 {
        self.jet(z).map(|j| j.second).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
    fn log_deriv(&self, z: Complex64) -> Option<Complex64> {
        KoenigsFunction::log_deriv(self, z).ok()
    }
    fn describe(&self) -> String {
        format!("koenigs({})", self.gen.describe())
    }
}

/// Builds the Koenigs function of `f` as a univalent map (mu-spirallike with
/// respect to tau).
pub fn koenigs(f: &Generator) -> Result<UnivalentMap> {
    let margin = f.berkson_porta_margin(&PolarGrid::uniform(24, 48, 0.98));
    if margin < -MARGIN_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "not a generator: Berkson-Porta margin {margin:e} is negative"
        )));
    }
    let k = KoenigsFunction::new(f)?;
    Ok(UnivalentMap::custom(Arc::new(k), Some(f.mu)))
}

/// max |h'(z) f(z) - mu h(z)| over the samples, with h' taken by a
/// fourth-order central difference of h so the check does not reuse the
/// equation that built h.
pub fn koenigs_residual(h: &UnivalentMap, f: &Generator, samples: &[Complex64]) -> Result<f64> {
    let step: f64 = 1e-4;
    let mut worst: f64 = 0.0;
    for &z in samples {
        check_disk(z)?;
        let s = step.min(0.25 * (1.0 - z.norm()));
        let e = Complex64::new(s, 0.0);
        let d = (h.eval(z - 2.0 * e)? - 8.0 * h.eval(z - e)? + 8.0 * h.eval(z + e)? - h.eval(z + 2.0 * e)?) / (12.0 * s);
        let r = (d * f.value(z) - f.mu * h.eval(z)?).norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// max over samples of |h(F_t(z)) - e^{-mu t} h(z)|.
pub fn schroder_residual(h: &UnivalentMap, f: &Generator, t: f64, samples: &[Complex64]) -> Result<f64> {
    let beta = (-f.mu * t).exp();
    let mut worst: f64 = 0.0;
    for &z in samples {
        let moved = flow(f, z, t, 1e-12)?.endpoint;
        worst = worst.max((h.eval(moved)? - beta * h.eval(z)?).norm());
    }
    Ok(worst)
}

/// min over the grid of Re(mu h(z) / (z h'(z))), with value Re mu at 0.
pub fn spirallike_margin(h: &UnivalentMap, mu: Complex64, grid: &PolarGrid) -> Result<f64> {
    let h0 = h.eval(ZERO)?;
    if h0.norm() > 1e-12 {
        return Err(Error::InvalidParameter(format!("spirallike margin needs h(0) = 0, got {h0}")));
    }
    let mut worst = f64::INFINITY;
    for z in grid.points() {
        let v = if z.norm() < 1e-12 {
            mu.re
        } else {
            (mu * h.eval(z)? / (z * h.deriv(z)?)).re
        };
        worst = worst.min(if v.is_finite() { v } else { f64::NEG_INFINITY });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn linear() -> Generator {
        Generator::polynomial(vec![ZERO, ONE], GeneratorKind::Dilation, ZERO, None).unwrap()
    }

    fn logistic() -> Generator {
        Generator::polynomial(vec![ZERO, ONE, -ONE], GeneratorKind::Dilation, ZERO, None).unwrap()
    }

    fn tanh_gen() -> Generator {
        Generator::polynomial(vec![-ONE, ZERO, ONE], GeneratorKind::Hyperbolic, ONE, Some(c(2.0, 0.0))).unwrap()
    }

    #[test]
    fn margin_examples() {
        let grid = PolarGrid::uniform(20, 40, 0.99);
        assert!((berkson_porta_margin(|z| z, ONE, ZERO, &grid) - 1.0).abs() < 1e-15);
        assert!((berkson_porta_margin(|z| -z, -ONE, ZERO, &grid) + 1.0).abs() < 1e-15);
        let m = logistic().berkson_porta_margin(&grid);
        assert!(m > 0.0 && (m - 0.01).abs() < 1e-12);
        assert!(tanh_gen().berkson_porta_margin(&grid) > -MARGIN_TOLERANCE);
    }

    #[test]
    fn hyperbolic_multiplier_checked_against_radial_quotient() {
        assert!(tanh_gen().mu_matches_angular_derivative());
        assert!(Generator::polynomial(vec![-ONE, ZERO, ONE], GeneratorKind::Hyperbolic, ONE, None).is_err());
        assert!(Generator::polynomial(vec![-ONE, ZERO, ONE], GeneratorKind::Hyperbolic, ONE, Some(c(5.0, 0.0))).is_err());
        // the range |mu - f'(tau)| <= f'(tau) admits complex multipliers
        assert!(Generator::polynomial(vec![-ONE, ZERO, ONE], GeneratorKind::Hyperbolic, ONE, Some(c(2.0, 1.5))).is_ok());
        let shifted = Generator::polynomial(vec![-ONE, ZERO, ONE], GeneratorKind::Hyperbolic, ONE, Some(c(3.0, 0.0))).unwrap();
        assert!(!shifted.mu_matches_angular_derivative());
    }

    #[test]
    fn generator_validation() {
        assert!(Generator::polynomial(vec![ZERO, -ONE], GeneratorKind::Dilation, ZERO, None).is_err());
        assert!(Generator::polynomial(vec![ONE, ONE], GeneratorKind::Dilation, ZERO, None).is_err());
        assert!(Generator::polynomial(vec![ZERO, ONE], GeneratorKind::Hyperbolic, c(0.5, 0.0), None).is_err());
    }

    #[test]
    fn flow_examples() {
        let r = flow(&linear(), c(0.4, 0.0), 2f64.ln(), 1e-10).unwrap();
        assert!((r.endpoint - c(0.2, 0.0)).norm() < 1e-10);
        let r = flow(&logistic(), c(0.5, 0.0), 2f64.ln(), 1e-10).unwrap();
        assert!((r.endpoint - c(1.0 / 3.0, 0.0)).norm() < 1e-9);
        let r = flow(&tanh_gen(), ZERO, 1.0, 1e-10).unwrap();
        assert!((r.endpoint.re - 1f64.tanh()).abs() < 1e-9 && r.endpoint.im.abs() < 1e-12);
    }

    #[test]
    fn flow_domain_checks() {
        assert!(flow(&linear(), c(1.0, 0.0), 1.0, 1e-10).is_err());
        assert!(flow(&linear(), c(0.1, 0.0), -1.0, 1e-10).is_err());
    }

    #[test]
    fn koenigs_examples() {
        let samples: Vec<Complex64> = PolarGrid::uniform(6, 12, 0.9).points().collect();
        let h = koenigs(&linear()).unwrap();
        for &z in &samples {
            assert!((h.eval(z).unwrap() - z).norm() < 1e-12);
        }
        let h = koenigs(&logistic()).unwrap();
        for &z in &samples {
            assert!((h.eval(z).unwrap() - z / (1.0 - z)).norm() < 1e-8, "{z}");
        }
        let h = koenigs(&tanh_gen()).unwrap();
        for &z in &samples {
            assert!((h.eval(z).unwrap() - (1.0 - z) / (1.0 + z)).norm() < 1e-8, "{z}");
        }
    }

    #[test]
    fn koenigs_derivatives_match_closed_forms() {
        let h = koenigs(&logistic()).unwrap();
        for z in [ZERO, c(1e-7, 0.0), c(0.5, 0.3), c(-0.8, 0.1)] {
            let d = h.deriv(z).unwrap();
            let dd = h.second_deriv(z).unwrap();
            assert!((d - 1.0 / (1.0 - z).powi(2)).norm() < 1e-8);
            assert!((dd - 2.0 / (1.0 - z).powi(3)).norm() < 1e-7, "{z}: {dd}");
        }
    }

    #[test]
    fn koenigs_interior_point_off_origin() {
        // conjugate z(1-z) by the automorphism through tau
        let tau = c(0.3, -0.2);
        let phi = DiskAutomorphism::new(tau).unwrap();
        #[derive(Debug)]
        struct Moved(DiskAutomorphism);
        impl GeneratorField for Moved {
            fn value(&self, z: Complex64) -> Complex64 {
                let w = self.0.apply(z);
                w * (1.0 - w) / self.0.deriv(z)
            }
            fn deriv(&self, z: Complex64) -> Complex64 {
                let h = 1e-6;
                (self.value(z + h) - self.value(z - h)) / (2.0 * h)
            }
            fn describe(&self) -> String {
                "moved logistic".into()
            }
        }
        let g = Generator::dilation(Arc::new(Moved(phi)), tau, None).unwrap();
        assert!((g.mu() - ONE).norm() < 1e-6);
        let h = koenigs(&g).unwrap();
        assert!(h.eval(tau).unwrap().norm() < 1e-12);
        let samples: Vec<Complex64> = PolarGrid::uniform(4, 8, 0.8).points().collect();
        assert!(koenigs_residual(&h, &g, &samples).unwrap() < 1e-7);
        assert!(schroder_residual(&h, &g, 0.7, &samples).unwrap() < 1e-6);
    }

    #[test]
    fn koenigs_rejects_non_generator() {
        let bad = Generator::polynomial(vec![ZERO, ONE, c(3.0, 0.0)], GeneratorKind::Dilation, ZERO, None).unwrap();
        assert!(koenigs(&bad).is_err());
    }

    #[test]
    fn schroder_examples() {
        let samples: Vec<Complex64> = PolarGrid::uniform(5, 10, 0.85).points().collect();
        let id = UnivalentMap::identity();
        assert!(schroder_residual(&id, &linear(), 1.3, &samples).unwrap() < 1e-10);
        let h = UnivalentMap::rational(vec![ZERO, ONE], vec![ONE, -ONE]).unwrap();
        assert!(schroder_residual(&h, &logistic(), 1.0, &samples).unwrap() < 1e-7);
        let hp = UnivalentMap::half_plane();
        assert!(schroder_residual(&hp, &tanh_gen(), 0.5, &samples).unwrap() < 1e-7);
    }

    #[test]
    fn spirallike_examples() {
        let grid = PolarGrid::uniform(30, 60, 0.999);
        let h = UnivalentMap::rational(vec![ZERO, ONE], vec![ONE, -ONE]).unwrap();
        let m = spirallike_margin(&h, ONE, &grid).unwrap();
        assert!(m > 0.0 && m < 2e-3);
        assert!(spirallike_margin(&UnivalentMap::koebe(), ONE, &grid).unwrap() >= -MARGIN_TOLERANCE);
        let c0 = c(0.2, 0.25);
        let mu = c(1.0, 0.5);
        let m = spirallike_margin(&UnivalentMap::mobius_spiral(c0).unwrap(), mu, &grid).unwrap();
        let predicted = mu.re - mu.norm() * c0.norm();
        assert!(m > 0.0 && (m - predicted).abs() < 5e-3, "{m} vs {predicted}");
        assert!(spirallike_margin(&UnivalentMap::half_plane(), ONE, &grid).is_err());
    }

    #[test]
    fn spiral_koebe_multiplier_is_rotation() {
        let grid = PolarGrid::uniform(40, 80, 0.999);
        for theta in [-1.2, -0.5, 0.3, 0.9] {
            let h = UnivalentMap::spiral_koebe(theta).unwrap();
            let mu = h.spiral_multiplier().unwrap();
            assert!(spirallike_margin(&h, mu, &grid).unwrap() >= -MARGIN_TOLERANCE);
            let wrong = mu.conj();
            assert!(spirallike_margin(&h, wrong, &grid).unwrap() < -0.1);
        }
    }

    #[test]
    fn multiplier_quotient_is_continuous_at_tau() {
        let g = logistic();
        // (1 - (1 - 2x)) / (x (1 - x)) = 2 / (1 - x)
        for x in [ZERO, c(0.5e-4, 0.0), c(0.99e-4, 0.0), c(1.01e-4, 0.0), c(0.3, 0.1)] {
            let q = g.multiplier_quotient(x).unwrap();
            assert!((q - 2.0 / (1.0 - x)).norm() < 1e-9, "{x}: {q}");
        }
    }
}
