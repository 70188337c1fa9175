//! Holomorphic maps on the unit disk: closed-form univalent families, disk
//! automorphisms, branch-tracked fractional powers of the derivative and
//! guarded Newton inversion.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Poly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Newton iterates are kept at least this far inside the unit circle.
const NEWTON_DISK_LIMIT: f64 = 1.0 - 1e-9;
const NEWTON_MAX_ITER: usize = 100;

pub(crate) fn check_disk(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() && z.norm_sqr() < 1.0 {
        Ok(())
    } else {
        Err(Error::PointOutsideDisk(z))
    }
}

pub(crate) fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// A holomorphic function on the disk supplied from outside the closed-form
/// families (Koenigs functions built by quadrature, for instance).
pub trait Holomorphic: Send + Sync + fmt::Debug {
    fn value(&self, z: Complex64) -> Complex64;
    fn deriv(&self, z: Complex64) -> Complex64;

    fn second_deriv(&self, z: Complex64) -> Complex64 {
        let h = 1e-5;
        let step = if z.norm() + h < 1.0 { h } else { 0.25 * (1.0 - z.norm()) };
        let dz = Complex64::new(step, 0.0);
        (self.deriv(z + dz) - self.deriv(z - dz)) / (2.0 * step)
    }

    /// Continuous logarithm of the derivative, equal to the principal
    /// logarithm at the origin. `None` when no closed form is known.
    fn log_deriv(&self, _z: Complex64) -> Option<Complex64> {
        None
    }

    fn describe(&self) -> String;
}

#[derive(Clone, Debug)]
pub enum Family {
    Identity,
    /// k(z) = z / (1 - z)^2
    Koebe,
    /// z / (1 + c z) with |c| < 1
    MobiusSpiral { c: Complex64 },
    /// z (1 - z)^(-2 e^{-i theta} cos theta)
    SpiralKoebe { theta: f64 },
    /// (1 - z) / (1 + z), onto the right half-plane
    HalfPlane,
    Rational { num: Poly, den: Poly },
    Custom(Arc<dyn Holomorphic>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::Koebe => "koebe",
            Family::MobiusSpiral { .. } => "mobius_spiral",
            Family::SpiralKoebe { .. } => "spiral_koebe",
            Family::HalfPlane => "half_plane",
            Family::Rational { .. } => "rational",
            Family::Custom(_) => "custom",
        }
    }
}

/// A univalent holomorphic function on the unit disk.
#[derive(Clone, Debug)]
pub struct UnivalentMap {
    family: Family,
    spiral_multiplier: Option<Complex64>,
}

impl UnivalentMap {
    pub fn identity() -> Self {
        Self { family: Family::Identity, spiral_multiplier: Some(ONE) }
    }

    pub fn koebe() -> Self {
        Self { family: Family::Koebe, spiral_multiplier: Some(ONE) }
    }

    pub fn mobius_spiral(c: Complex64) -> Result<Self> {
        if !is_finite(c) || c.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mobius_spiral requires |c| < 1, got |c| = {}",
                c.norm()
            )));
        }
        Ok(Self { family: Family::MobiusSpiral { c }, spiral_multiplier: Some(ONE) })
    }

    /// The spiral Koebe function. It is e^{-i theta}-spirallike; the tests
    /// confirm that multiplier with the spirallike margin.
    pub fn spiral_koebe(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidParameter(format!(
                "spiral_koebe requires |theta| < pi/2, got {theta}"
            )));
        }
        Ok(Self {
            family: Family::SpiralKoebe { theta },
            spiral_multiplier: Some(Complex64::from_polar(1.0, -theta)),
        })
    }

    pub fn half_plane() -> Self {
        Self { family: Family::HalfPlane, spiral_multiplier: None }
    }

    pub fn rational(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|c| !is_finite(*c)) {
            return Err(Error::InvalidParameter("non-finite rational coefficient".into()));
        }
        let den = Poly::new(den);
        if den.is_zero() {
            return Err(Error::InvalidParameter("rational denominator is identically zero".into()));
        }
        let num = Poly::new(num);
        // zeros on the unit circle itself are allowed (the Koebe function
        // has its pole there), so count strictly inside
        let probe = 1.0 - 1e-7;
        if den.zeros_inside(probe) != Some(0) {
            return Err(Error::InvalidParameter("rational map has a pole in the disk".into()));
        }
        let numerator_of_deriv = num.derivative().mul(&den).sub(&num.mul(&den.derivative()));
        if numerator_of_deriv.zeros_inside(probe) != Some(0) {
            return Err(Error::InvalidParameter("rational map has a critical point in the disk".into()));
        }
        let map = Self { family: Family::Rational { num, den }, spiral_multiplier: None };
        map.check_locally_univalent(48, 96)?;
        Ok(map)
    }

    pub fn custom(inner: Arc<dyn Holomorphic>, spiral_multiplier: Option<Complex64>) -> Self {
        Self { family: Family::Custom(inner), spiral_multiplier }
    }

    /// Attach (or replace) the multiplier for which the map is recorded as
    /// spirallike.
    pub fn with_spiral_multiplier(mut self, mu: Complex64) -> Result<Self> {
        if !is_finite(mu) || mu.re <= 0.0 {
            return Err(Error::InvalidParameter(format!("spiral multiplier needs Re mu > 0, got {mu}")));
        }
        self.spiral_multiplier = Some(mu);
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn spiral_multiplier(&self) -> Option<Complex64> {
        self.spiral_multiplier
    }

    pub fn has_closed_inverse(&self) -> bool {
        matches!(
            self.family,
            Family::Identity | Family::Koebe | Family::MobiusSpiral { .. } | Family::HalfPlane
        )
    }

    pub fn describe(&self) -> String {
        match &self.family {
            Family::MobiusSpiral { c } => format!("mobius_spiral(c={c})"),
            Family::SpiralKoebe { theta } => format!("spiral_koebe(theta={theta})"),
            Family::Custom(inner) => inner.describe(),
            other => other.name().to_string(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        Ok(self.value_raw(z))
    }

    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        Ok(self.deriv_raw(z))
    }

    pub fn second_deriv(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        Ok(self.second_deriv_raw(z))
    }

    pub(crate) fn value_raw(&self, z: Complex64) -> Complex64 {
        match &self.family {
            Family::Identity => z,
            Family::Koebe => z / ((ONE - z) * (ONE - z)),
            Family::MobiusSpiral { c } => z / (ONE + c * z),
            Family::SpiralKoebe { theta } => {
                let s = spiral_exponent(*theta);
                z * (-s * (ONE - z).ln()).exp()
            }
            Family::HalfPlane => (ONE - z) / (ONE + z),
            Family::Rational { num, den } => num.eval(z) / den.eval(z),
            Family::Custom(inner) => inner.value(z),
        }
    }

    pub(crate) fn deriv_raw(&self, z: Complex64) -> Complex64 {
        match &self.family {
            Family::Identity => ONE,
            Family::Koebe => (ONE + z) / (ONE - z).powi(3),
            Family::MobiusSpiral { c } => ONE / (ONE + c * z).powi(2),
            Family::SpiralKoebe { theta } => {
                let s = spiral_exponent(*theta);
                let rot = Complex64::from_polar(1.0, -2.0 * theta);
                (-(s + 1.0) * (ONE - z).ln()).exp() * (ONE + rot * z)
            }
            Family::HalfPlane => -2.0 / (ONE + z).powi(2),
            Family::Rational { num, den } => {
                let (p, dp, _) = num.eval2(z);
                let (q, dq, _) = den.eval2(z);
                (dp * q - p * dq) / (q * q)
            }
            Family::Custom(inner) => inner.deriv(z),
        }
    }

    pub(crate) fn second_deriv_raw(&self, z: Complex64) -> Complex64 {
        match &self.family {
            Family::Identity => ZERO,
            Family::Koebe => (4.0 + 2.0 * z) / (ONE - z).powi(4),
            Family::MobiusSpiral { c } => -2.0 * c / (ONE + c * z).powi(3),
            Family::SpiralKoebe { theta } => {
                let s = spiral_exponent(*theta);
                let rot = Complex64::from_polar(1.0, -2.0 * theta);
                let lg = (ONE - z).ln();
                (s + 1.0) * (-(s + 2.0) * lg).exp() * (ONE + rot * z)
                    + (-(s + 1.0) * lg).exp() * rot
            }
            Family::HalfPlane => 4.0 / (ONE + z).powi(3),
            Family::Rational { num, den } => {
                let (p, dp, ddp) = num.eval2(z);
                let (q, dq, ddq) = den.eval2(z);
                // h' = n1 / q^2 with n1 = p'q - pq', n1' = p''q - pq''
                let n1 = dp * q - p * dq;
                let dn1 = ddp * q - p * ddq;
                (dn1 * q - 2.0 * n1 * dq) / (q * q * q)
            }
            Family::Custom(inner) => inner.second_deriv(z),
        }
    }

    /// Closed-form continuous logarithm of h', normalised to the principal
    /// logarithm at the origin.
    pub fn closed_log_deriv(&self, z: Complex64) -> Option<Complex64> {
        match &self.family {
            Family::Identity => Some(ZERO),
            Family::Koebe => Some((ONE + z).ln() - 3.0 * (ONE - z).ln()),
            Family::MobiusSpiral { c } => Some(-2.0 * (ONE + c * z).ln()),
            Family::SpiralKoebe { theta } => {
                let s = spiral_exponent(*theta);
                let rot = Complex64::from_polar(1.0, -2.0 * theta);
                Some(-(s + 1.0) * (ONE - z).ln() + (ONE + rot * z).ln())
            }
            Family::HalfPlane => Some(
                Complex64::new(2f64.ln(), std::f64::consts::PI) - 2.0 * (ONE + z).ln(),
            ),
            Family::Rational { .. } => None,
            Family::Custom(inner) => inner.log_deriv(z),
        }
    }

    /// Solves h(z) = w for z in the disk.
    pub fn invert(&self, w: Complex64, guess: Complex64) -> Result<Complex64> {
        if !is_finite(w) {
            return Err(Error::NotInImage(w));
        }
        let z = match &self.family {
            Family::Identity => w,
            Family::Koebe => koebe_inverse(w),
            Family::MobiusSpiral { c } => w / (ONE - c * w),
            Family::HalfPlane => (ONE - w) / (ONE + w),
            _ => return self.newton_with_continuation(w, guess),
        };
        if is_finite(z) && z.norm_sqr() < 1.0 {
            Ok(z)
        } else {
            Err(Error::NotInImage(w))
        }
    }

    fn newton_with_continuation(&self, w: Complex64, guess: Complex64) -> Result<Complex64> {
        let guess = clamp_into_disk(guess);
        let first = match self.newton(w, guess) {
            Ok(z) => return Ok(z),
            Err(e) => e,
        };
        // Walk the target from h(guess) to w, re-seeding Newton at each stage.
        let start = self.value_raw(guess);
        let mut stages = 8usize;
        while stages <= 512 {
            let mut z = guess;
            let mut ok = true;
            for k in 1..=stages {
                let target = start + (w - start) * (k as f64 / stages as f64);
                match self.newton(target, z) {
                    Ok(next) => z = next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(z);
            }
            stages *= 4;
        }
        if let Some(mu) = self.spiral_multiplier {
            if let Some(z) = self.spiral_continuation(w, mu) {
                return Ok(z);
            }
        }
        Err(first)
    }

    /// Follows the invariant spiral s -> e^{-mu s} w from near the origin
    /// back to w; it stays inside the image when h(0) = 0.
    fn spiral_continuation(&self, w: Complex64, mu: Complex64) -> Option<Complex64> {
        if mu.re <= 0.0 || w.norm() <= SPIRAL_START {
            return None;
        }
        let s_max = (w.norm() / SPIRAL_START).ln() / mu.re;
        let mut stages = 16usize;
        while stages <= 1024 {
            let mut z = Complex64::new(0.0, 0.0);
            let mut ok = true;
            for k in 0..=stages {
                let s = s_max * (1.0 - k as f64 / stages as f64);
                let target = w * (-mu * s).exp();
                match self.newton(target, z) {
                    Ok(next) => z = next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Some(z);
            }
            stages *= 4;
        }
        None
    }

    fn newton(&self, w: Complex64, guess: Complex64) -> Result<Complex64> {
        let tol = 1e-12 * w.norm().max(1.0);
        let mut z = guess;
        let mut residual = self.value_raw(z) - w;
        for _ in 0..NEWTON_MAX_ITER {
            if residual.norm() <= tol {
                return Ok(z);
            }
            let d = self.deriv_raw(z);
            if !is_finite(d) || d.norm() == 0.0 {
                return Err(Error::DerivativeVanishes(z));
            }
            let step = residual / d;
            let mut damping = 1.0;
            let mut inside_once = false;
            loop {
                let cand = z - step * damping;
                if cand.norm() < NEWTON_DISK_LIMIT {
                    inside_once = true;
                    let r = self.value_raw(cand) - w;
                    if is_finite(r) && r.norm() < residual.norm() {
                        z = cand;
                        residual = r;
                        break;
                    }
                }
                damping *= 0.5;
                if damping < 1e-12 {
                    return Err(if inside_once {
                        Error::NoConvergence { iterations: NEWTON_MAX_ITER, residual: residual.norm() }
                    } else {
                        Error::IterateLeftDisk(w)
                    });
                }
            }
        }
        if residual.norm() <= tol {
            Ok(z)
        } else {
            Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, residual: residual.norm() })
        }
    }

    /// Sampled check that h' is finite and nonvanishing on a polar grid of
    /// the disk.
    pub fn check_locally_univalent(&self, radial: usize, angular: usize) -> Result<()> {
        for i in 0..radial {
            let rho = 0.999 * i as f64 / (radial - 1).max(1) as f64;
            for j in 0..angular {
                let z = Complex64::from_polar(rho, std::f64::consts::TAU * j as f64 / angular as f64);
                let d = self.deriv_raw(z);
                if !is_finite(d) || d.norm() < 1e-12 || !is_finite(self.value_raw(z)) {
                    return Err(Error::DerivativeVanishes(z));
                }
            }
        }
        Ok(())
    }
}

const SPIRAL_START: f64 = 1e-3;

fn spiral_exponent(theta: f64) -> Complex64 {
    // 2 e^{-i theta} cos theta = 1 + e^{-2 i theta}
    ONE + Complex64::from_polar(1.0, -2.0 * theta)
}

fn clamp_into_disk(z: Complex64) -> Complex64 {
    if !is_finite(z) {
        return ZERO;
    }
    let n = z.norm();
    if n < NEWTON_DISK_LIMIT {
        z
    } else {
        z * (0.99 / n)
    }
}

/// Root of w (1 - z)^2 = z of smaller modulus; the two roots multiply to 1.
fn koebe_inverse(w: Complex64) -> Complex64 {
    if w == ZERO {
        return ZERO;
    }
    let s = (4.0 * w + 1.0).sqrt();
    let a = 2.0 * w + 1.0 + s;
    let b = 2.0 * w + 1.0 - s;
    let den = if a.norm() >= b.norm() { a } else { b };
    2.0 * w / den
}

/// The involutive disk automorphism z -> (x0 - z) / (1 - conj(x0) z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAutomorphism {
    base: Complex64,
}

impl DiskAutomorphism {
    pub fn new(base: Complex64) -> Result<Self> {
        check_disk(base)?;
        Ok(Self { base })
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.base - z) / (ONE - self.base.conj() * z)
    }

    pub fn deriv(&self, z: Complex64) -> Complex64 {
        let d = ONE - self.base.conj() * z;
        Complex64::new(self.base.norm_sqr() - 1.0, 0.0) / (d * d)
    }
}

pub fn disk_automorphism(x0: Complex64, z: Complex64) -> Result<Complex64> {
    check_disk(z)?;
    Ok(DiskAutomorphism::new(x0)?.apply(z))
}

/// g(z) = (h(phi(z)) - h(x0)) / (h'(x0)(|x0|^2 - 1)) with phi the automorphism
/// exchanging 0 and x0; g(0) = 0 and g'(0) = 1.
#[derive(Debug, Clone)]
pub struct NormalizedMap {
    map: UnivalentMap,
    aut: DiskAutomorphism,
    offset: Complex64,
    scale: Complex64,
}

impl NormalizedMap {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        Ok((self.map.value_raw(self.aut.apply(z)) - self.offset) / self.scale)
    }

    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        check_disk(z)?;
        Ok(self.map.deriv_raw(self.aut.apply(z)) * self.aut.deriv(z) / self.scale)
    }

    pub fn base_point(&self) -> Complex64 {
        self.aut.base()
    }
}

pub fn normalize_at(h: &UnivalentMap, x0: Complex64) -> Result<NormalizedMap> {
    let aut = DiskAutomorphism::new(x0)?;
    let d = h.deriv_raw(x0);
    if !is_finite(d) || d.norm() < 1e-300 {
        return Err(Error::DerivativeVanishes(x0));
    }
    Ok(NormalizedMap {
        map: h.clone(),
        aut,
        offset: h.value_raw(x0),
        scale: d * (x0.norm_sqr() - 1.0),
    })
}

/// Koebe distortion lower bounds for a normalised univalent g:
/// |g'(z)| >= (1-|z|)/(1+|z|)^3 and |g(z)| >= |z|/(1+|z|)^2.
pub fn distortion_bounds(z: Complex64) -> Result<(f64, f64)> {
    check_disk(z)?;
    let rho = z.norm();
    Ok(((1.0 - rho) / (1.0 + rho).powi(3), rho / (1.0 + rho).powi(2)))
}

/// A branch of h'(x)^{1/r}, continued from the principal logarithm of
/// h'(anchor).
#[derive(Debug, Clone)]
pub struct BranchedPower {
    map: UnivalentMap,
    root_order: f64,
    anchor: Complex64,
    anchor_log: Complex64,
}

const BRANCH_MAX_ARG_STEP: f64 = std::f64::consts::FRAC_PI_4;
const BRANCH_MAX_DEPTH: u32 = 30;

impl BranchedPower {
    pub fn new(map: UnivalentMap, root_order: f64) -> Result<Self> {
        Self::with_anchor(map, root_order, ZERO)
    }

    pub fn with_anchor(map: UnivalentMap, root_order: f64, anchor: Complex64) -> Result<Self> {
        if !(root_order.is_finite() && root_order >= 1.0) {
            return Err(Error::InvalidParameter(format!("root order must be >= 1, got {root_order}")));
        }
        check_disk(anchor)?;
        let d = map.deriv_raw(anchor);
        if !is_finite(d) || d == ZERO {
            return Err(Error::DerivativeVanishes(anchor));
        }
        let anchor_log = if anchor == ZERO {
            map.closed_log_deriv(ZERO).unwrap_or_else(|| d.ln())
        } else {
            d.ln()
        };
        Ok(Self { map, root_order, anchor, anchor_log })
    }

    pub fn map(&self) -> &UnivalentMap {
        &self.map
    }

    pub fn root_order(&self) -> f64 {
        self.root_order
    }

    /// Continuous logarithm of h' at x.
    pub fn log_deriv(&self, x: Complex64) -> Result<Complex64> {
        check_disk(x)?;
        if self.anchor == ZERO {
            if let Some(l) = self.map.closed_log_deriv(x) {
                return Ok(l);
            }
        }
        self.tracked_log_deriv(x)
    }

    /// Logarithm continued numerically along the segment from the anchor;
    /// the disk is simply connected and h' nonvanishing, so the result is
    /// path independent.
    pub fn tracked_log_deriv(&self, x: Complex64) -> Result<Complex64> {
        check_disk(x)?;
        let len = (x - self.anchor).norm();
        let pieces = ((len * 64.0).ceil() as usize).max(4);
        let mut acc = self.anchor_log;
        let mut prev_z = self.anchor;
        let mut prev_d = self.map.deriv_raw(prev_z);
        for k in 1..=pieces {
            let z = self.anchor + (x - self.anchor) * (k as f64 / pieces as f64);
            let d = self.map.deriv_raw(z);
            acc += self.log_increment(prev_z, prev_d, z, d, 0)?;
            prev_z = z;
            prev_d = d;
        }
        Ok(acc)
    }

    fn log_increment(
        &self,
        z0: Complex64,
        d0: Complex64,
        z1: Complex64,
        d1: Complex64,
        depth: u32,
    ) -> Result<Complex64> {
        if !is_finite(d1) || d1 == ZERO {
            return Err(Error::DerivativeVanishes(z1));
        }
        let inc = (d1 / d0).ln();
        if inc.im.abs() <= BRANCH_MAX_ARG_STEP {
            return Ok(inc);
        }
        if depth >= BRANCH_MAX_DEPTH {
            return Err(Error::BranchTracking(z1));
        }
        let zm = (z0 + z1) * 0.5;
        let dm = self.map.deriv_raw(zm);
        Ok(self.log_increment(z0, d0, zm, dm, depth + 1)?
            + self.log_increment(zm, dm, z1, d1, depth + 1)?)
    }

    pub fn eval(&self, x: Complex64) -> Result<Complex64> {
        Ok((self.log_deriv(x)? / self.root_order).exp())
    }
}

pub fn fractional_power(b: &BranchedPower, x: Complex64) -> Result<Complex64> {
    b.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eval_examples() {
        assert_eq!(UnivalentMap::identity().eval(c(0.3, 0.1)).unwrap(), c(0.3, 0.1));
        assert!(close(UnivalentMap::koebe().eval(c(0.5, 0.0)).unwrap(), c(2.0, 0.0), 1e-15));
        let m = UnivalentMap::mobius_spiral(c(0.5, 0.0)).unwrap();
        assert!(close(m.eval(c(0.5, 0.0)).unwrap(), c(0.4, 0.0), 1e-15));
    }

    #[test]
    fn deriv_examples() {
        assert_eq!(UnivalentMap::identity().deriv(c(-0.7, 0.2)).unwrap(), ONE);
        assert!(close(UnivalentMap::koebe().deriv(c(0.5, 0.0)).unwrap(), c(12.0, 0.0), 1e-13));
        let m = UnivalentMap::mobius_spiral(c(0.5, 0.0)).unwrap();
        assert_eq!(m.deriv(ZERO).unwrap(), ONE);
    }

    #[test]
    fn outside_disk_rejected() {
        let k = UnivalentMap::koebe();
        assert_eq!(k.eval(c(1.0, 0.0)), Err(Error::PointOutsideDisk(c(1.0, 0.0))));
        assert!(k.deriv(c(0.8, 0.8)).is_err());
        assert!(k.eval(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn invert_examples() {
        assert_eq!(UnivalentMap::identity().invert(c(0.0, 0.2), ZERO).unwrap(), c(0.0, 0.2));
        assert!(close(UnivalentMap::koebe().invert(c(2.0, 0.0), ZERO).unwrap(), c(0.5, 0.0), 1e-15));
        let m = UnivalentMap::mobius_spiral(c(0.5, 0.0)).unwrap();
        assert!(close(m.invert(c(0.4, 0.0), ZERO).unwrap(), c(0.5, 0.0), 1e-15));
    }

    #[test]
    fn koebe_slit_is_not_in_image() {
        let k = UnivalentMap::koebe();
        assert!(matches!(k.invert(c(-1.0, 0.0), ZERO), Err(Error::NotInImage(_))));
        assert!(k.invert(c(-0.26, 1e-3), ZERO).is_ok());
    }

    #[test]
    fn newton_inverts_spiral_koebe_far_out() {
        let h = UnivalentMap::spiral_koebe(0.6).unwrap();
        let z = c(0.9, 0.3);
        let w = h.eval(z).unwrap();
        let back = h.invert(w, ZERO).unwrap();
        assert!(close(back, z, 1e-9), "{back} vs {z}");
    }

    #[test]
    fn newton_reports_failure_outside_image() {
        // z + z^2/4 maps the disk into |w| < 5/4
        let h = UnivalentMap::rational(vec![ZERO, ONE, c(0.25, 0.0)], vec![ONE]).unwrap();
        assert!(h.invert(c(10.0, 0.0), ZERO).is_err());
    }

    #[test]
    fn rational_with_pole_inside_rejected() {
        assert!(UnivalentMap::rational(vec![ONE], vec![c(-0.5, 0.0), ONE]).is_err());
        assert!(UnivalentMap::rational(vec![ONE], vec![]).is_err());
        // z + z^2 has h'(-1/2) = 0
        assert!(UnivalentMap::rational(vec![ZERO, ONE, ONE], vec![ONE]).is_err());
        // Koebe as a rational map: pole on the circle is fine
        let k = UnivalentMap::rational(vec![ZERO, ONE], vec![ONE, c(-2.0, 0.0), ONE]).unwrap();
        assert!((k.eval(c(0.5, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mobius_parameter_domain() {
        assert!(UnivalentMap::mobius_spiral(c(1.0, 0.0)).is_err());
        assert!(UnivalentMap::mobius_spiral(c(0.0, 0.99)).is_ok());
    }

    #[test]
    fn automorphism_examples() {
        assert!(close(disk_automorphism(ZERO, c(0.3, 0.0)).unwrap(), c(-0.3, 0.0), 1e-16));
        assert_eq!(disk_automorphism(c(0.5, 0.0), c(0.5, 0.0)).unwrap(), ZERO);
        assert_eq!(disk_automorphism(c(0.5, 0.0), ZERO).unwrap(), c(0.5, 0.0));
        assert!(disk_automorphism(c(1.0, 0.0), ZERO).is_err());
    }

    #[test]
    fn normalize_examples() {
        let g = normalize_at(&UnivalentMap::identity(), ZERO).unwrap();
        assert!(close(g.eval(c(0.2, 0.3)).unwrap(), c(0.2, 0.3), 1e-16));
        let g = normalize_at(&UnivalentMap::koebe(), ZERO).unwrap();
        assert!(close(g.eval(c(0.5, 0.0)).unwrap(), c(0.5 / 2.25, 0.0), 1e-15));
        let g = normalize_at(&UnivalentMap::koebe(), c(0.3, -0.4)).unwrap();
        assert!(g.eval(ZERO).unwrap().norm() < 1e-15);
        assert!(close(g.deriv(ZERO).unwrap(), ONE, 1e-10));
    }

    #[test]
    fn normalize_rejects_critical_point() {
        #[derive(Debug)]
        struct Square;
        impl Holomorphic for Square {
            fn value(&self, z: Complex64) -> Complex64 {
                z * z
            }
            fn deriv(&self, z: Complex64) -> Complex64 {
                2.0 * z
            }
            fn describe(&self) -> String {
                "z^2".into()
            }
        }
        let h = UnivalentMap::custom(Arc::new(Square), None);
        assert_eq!(normalize_at(&h, ZERO).unwrap_err(), Error::DerivativeVanishes(ZERO));
    }

    #[test]
    fn fractional_power_examples() {
        let id = BranchedPower::new(UnivalentMap::identity(), 2.0).unwrap();
        assert!(close(id.eval(c(0.4, -0.2)).unwrap(), ONE, 1e-15));
        let k2 = BranchedPower::new(UnivalentMap::koebe(), 2.0).unwrap();
        assert!(close(k2.eval(c(0.5, 0.0)).unwrap(), c(12f64.sqrt(), 0.0), 1e-13));
        let k1 = BranchedPower::new(UnivalentMap::koebe(), 1.0).unwrap();
        assert!(close(k1.eval(c(0.5, 0.0)).unwrap(), c(12.0, 0.0), 1e-12));
    }

    #[test]
    fn tracked_log_agrees_with_closed_form() {
        let maps = [
            UnivalentMap::koebe(),
            UnivalentMap::spiral_koebe(0.9).unwrap(),
            UnivalentMap::half_plane(),
            UnivalentMap::mobius_spiral(c(0.0, 0.8)).unwrap(),
        ];
        for h in maps {
            let b = BranchedPower::new(h.clone(), 3.0).unwrap();
            for z in [c(0.95, 0.0), c(-0.9, 0.1), c(0.1, -0.97), c(-0.5, -0.5)] {
                let closed = b.log_deriv(z).unwrap();
                let tracked = b.tracked_log_deriv(z).unwrap();
                assert!(close(closed, tracked, 1e-10), "{} at {z}: {closed} vs {tracked}", h.describe());
            }
        }
    }

    #[test]
    fn branch_root_order_validated() {
        assert!(BranchedPower::new(UnivalentMap::koebe(), 0.5).is_err());
    }

    #[test]
    fn distortion_examples() {
        assert_eq!(distortion_bounds(ZERO).unwrap(), (1.0, 0.0));
        let (d, v) = distortion_bounds(c(0.5, 0.0)).unwrap();
        assert!((d - 0.5 / 3.375).abs() < 1e-15 && (v - 0.5 / 2.25).abs() < 1e-15);
        let a = distortion_bounds(c(0.0, 0.5)).unwrap();
        assert!((a.0 - d).abs() < 1e-15 && (a.1 - v).abs() < 1e-15);
    }

    #[test]
    fn second_derivatives_match_differences() {
        let maps = [
            UnivalentMap::koebe(),
            UnivalentMap::spiral_koebe(-0.4).unwrap(),
            UnivalentMap::half_plane(),
            UnivalentMap::mobius_spiral(c(0.3, 0.2)).unwrap(),
            UnivalentMap::rational(vec![ZERO, ONE], vec![ONE, c(0.2, 0.1), c(0.05, 0.0)]).unwrap(),
        ];
        let z = c(0.31, -0.22);
        let h = 1e-5;
        for m in maps {
            let fd = (m.deriv_raw(z + h) - m.deriv_raw(z - h)) / (2.0 * h);
            assert!(close(fd, m.second_deriv_raw(z), 1e-6 * (1.0 + fd.norm())), "{}", m.describe());
        }
    }
}
