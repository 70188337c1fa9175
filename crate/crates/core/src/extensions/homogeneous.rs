//! Homogeneous polynomials Q on C^m and sampled sup-norm estimates.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ball::YNorm;
use crate::error::{Error, Result};
use crate::sampling::KroneckerSequence;

/// Largest accepted degree and dimension; keeps evaluation cheap and
/// bounds what untrusted inputs can request.
pub const MAX_DEGREE: u32 = 64;
pub const MAX_DIM: usize = 64;
pub const MAX_TERMS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coef: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPolynomial {
    degree: u32,
    dim: usize,
    terms: Vec<Monomial>,
}

impl HomogeneousPolynomial {
    /// Builds Q from (exponents, coefficient) pairs. Repeated exponent
    /// vectors are summed and zero coefficients dropped.
    pub fn new(degree: u32, dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::InvalidParameter(format!("degree must lie in 1..={MAX_DEGREE}, got {degree}")));
        }
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!("dimension must lie in 1..={MAX_DIM}, got {dim}")));
        }
        let mut merged: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (count, (exps, coef)) in terms.into_iter().enumerate() {
            if count >= MAX_TERMS {
                return Err(Error::InvalidParameter(format!("more than {MAX_TERMS} terms")));
            }
            if exps.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "monomial has {} exponents, expected {dim}",
                    exps.len()
                )));
            }
            let total: u64 = exps.iter().map(|&e| u64::from(e)).sum();
            if total != u64::from(degree) {
                return Err(Error::DegreeMismatch { expected: degree, found: total.min(u32::MAX as u64) as u32 });
            }
            if !(coef.re.is_finite() && coef.im.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
            *merged.entry(exps).or_default() += coef;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(exps, coef)| Monomial { exps, coef })
            .collect();
        Ok(Self { degree, dim, terms })
    }

    pub fn zero(degree: u32, dim: usize) -> Result<Self> {
        Self::new(degree, dim, std::iter::empty())
    }

    /// q * y_1^degree.
    pub fn first_power(degree: u32, dim: usize, q: Complex64) -> Result<Self> {
        let mut exps = vec![0; dim];
        if let Some(e) = exps.first_mut() {
            *e = degree;
        }
        Self::new(degree, dim, [(exps, q)])
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_len(&self, y: &[Complex64]) -> Result<()> {
        if y.len() == self.dim {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("vector has length {}, expected {}", y.len(), self.dim)))
        }
    }

    pub fn eval(&self, y: &[Complex64]) -> Result<Complex64> {
        self.check_len(y)?;
        Ok(self.eval_unchecked(y))
    }

    pub(crate) fn eval_unchecked(&self, y: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.exps.iter().zip(y).fold(t.coef, |acc, (&e, &v)| acc * v.powu(e)))
            .sum()
    }

    /// Holomorphic gradient (dQ/dy_1, ..., dQ/dy_m).
    pub fn gradient(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(y)?;
        let mut g = vec![Complex64::new(0.0, 0.0); self.dim];
        for t in &self.terms {
            for (j, gj) in g.iter_mut().enumerate() {
                let ej = t.exps[j];
                if ej == 0 {
                    continue;
                }
                let mut acc = t.coef * f64::from(ej);
                for (k, (&e, &v)) in t.exps.iter().zip(y).enumerate() {
                    acc *= v.powu(if k == j { e - 1 } else { e });
                }
                *gj += acc;
            }
        }
        Ok(g)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.coef * c != Complex64::new(0.0, 0.0))
            .map(|t| Monomial { exps: t.exps.clone(), coef: t.coef * c })
            .collect();
        Self { degree: self.degree, dim: self.dim, terms }
    }

    /// max |Q(c y) - c^r Q(y)| / (1 + |Q(y)|) over the given pairs.
    pub fn homogeneity_residual(&self, pairs: &[(Complex64, Vec<Complex64>)]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (c, y) in pairs {
            let qy = self.eval(y)?;
            let cy: Vec<Complex64> = y.iter().map(|v| c * v).collect();
            let lhs = self.eval(&cy)?;
            worst = worst.max((lhs - c.powu(self.degree) * qy).norm() / (1.0 + qy.norm()));
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormEstimate {
    pub value: f64,
    pub argmax: Vec<Complex64>,
    pub samples: usize,
    pub ascent_starts: usize,
    pub ascent_steps: usize,
}

const ASCENT_STARTS: usize = 10;
const ASCENT_STEPS: usize = 50;

fn normalize(y: &mut [Complex64], norm: &YNorm) -> bool {
    let n = norm.norm(y);
    if !(n.is_finite() && n > 0.0) {
        return false;
    }
    y.iter_mut().for_each(|v| *v /= n);
    true
}

/// Estimate of sup_{||y|| = 1} |Q(y)| from quasi-random sphere samples
/// refined by projected gradient ascent. Not a certificate.
pub fn sup_norm_q(q: &HomogeneousPolynomial, norm: &YNorm, samples: usize) -> SupNormEstimate {
    let m = q.dim();
    let mut seq = KroneckerSequence::new(2 * m);
    let mut best: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(ASCENT_STARTS + 1);
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    let mut used = 0;
    for _ in 0..samples {
        let u = seq.next_point();
        for (j, v) in y.iter_mut().enumerate() {
            // Box-Muller: each complex coordinate from two uniforms
            let a = u[2 * j].max(f64::MIN_POSITIVE);
            let b = u[2 * j + 1];
            *v = Complex64::from_polar((-2.0 * a.ln()).sqrt(), std::f64::consts::TAU * b);
        }
        if !normalize(&mut y, norm) {
            continue;
        }
        used += 1;
        let val = q.eval_unchecked(&y).norm();
        if best.len() < ASCENT_STARTS || val > best[best.len() - 1].0 {
            let pos = best.partition_point(|(b, _)| *b >= val);
            best.insert(pos, (val, y.clone()));
            best.truncate(ASCENT_STARTS);
        }
    }
    if best.is_empty() || q.is_zero() {
        let argmax = best.first().map(|b| b.1.clone()).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); m]);
        return SupNormEstimate { value: 0.0, argmax, samples: used, ascent_starts: 0, ascent_steps: 0 };
    }

    let starts = best.len();
    let mut overall = best[0].clone();
    for (mut val, mut y) in best {
        let mut eta = 0.1;
        for _ in 0..ASCENT_STEPS {
            let qy = q.eval_unchecked(&y);
            let Ok(grad) = q.gradient(&y) else { break };
            // steepest ascent of |Q|^2 in the real coordinates
            let mut trial: Vec<Complex64> = y.iter().zip(&grad).map(|(v, g)| v + qy * g.conj() * eta).collect();
            if !normalize(&mut trial, norm) {
                break;
            }
            let tv = q.eval_unchecked(&trial).norm();
            if tv > val {
                val = tv;
                y = trial;
                eta *= 1.5;
            } else {
                eta *= 0.5;
            }
        }
        if val > overall.0 {
            overall = (val, y);
        }
    }
    SupNormEstimate { value: overall.0, argmax: overall.1, samples: used, ascent_starts: starts, ascent_steps: ASCENT_STEPS }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{complex_gaussian, seeded_rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn validation() {
        assert!(HomogeneousPolynomial::new(2, 2, [(vec![1, 0], c(1.0, 0.0))]).is_err());
        assert!(HomogeneousPolynomial::new(2, 2, [(vec![2], c(1.0, 0.0))]).is_err());
        assert!(HomogeneousPolynomial::new(0, 2, std::iter::empty()).is_err());
        assert!(HomogeneousPolynomial::new(2, 1, [(vec![2], c(f64::NAN, 0.0))]).is_err());
        let q = HomogeneousPolynomial::new(2, 1, [(vec![2], c(1.0, 0.0)), (vec![2], c(-1.0, 0.0))]).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn eval_and_gradient() {
        let q = HomogeneousPolynomial::new(3, 2, [(vec![2, 1], c(2.0, 1.0)), (vec![0, 3], c(0.0, -1.0))]).unwrap();
        let y = [c(0.3, -0.2), c(-0.1, 0.4)];
        let g = q.gradient(&y).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let mut yp = y;
            let mut ym = y;
            yp[j] += h;
            ym[j] -= h;
            let fd = (q.eval(&yp).unwrap() - q.eval(&ym).unwrap()) / (2.0 * h);
            assert!((fd - g[j]).norm() < 1e-9);
        }
        assert!(q.eval(&[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn homogeneity_on_random_inputs() {
        let q = HomogeneousPolynomial::new(
            4,
            3,
            [(vec![4, 0, 0], c(1.0, 2.0)), (vec![1, 2, 1], c(-0.5, 0.0)), (vec![0, 1, 3], c(0.0, 3.0))],
        )
        .unwrap();
        let mut rng = seeded_rng(3);
        let pairs: Vec<_> =
            (0..500).map(|_| (complex_gaussian(&mut rng), (0..3).map(|_| complex_gaussian(&mut rng)).collect())).collect();
        assert!(q.homogeneity_residual(&pairs).unwrap() <= 1e-12);
    }

    #[test]
    fn sup_norm_examples() {
        let e = YNorm::Euclidean;
        assert_eq!(sup_norm_q(&HomogeneousPolynomial::zero(2, 2).unwrap(), &e, 1000).value, 0.0);
        let y1 = HomogeneousPolynomial::first_power(3, 2, c(1.0, 0.0)).unwrap();
        assert!((sup_norm_q(&y1, &e, 100_000).value - 1.0).abs() < 1e-6);
        let y1y2 = HomogeneousPolynomial::new(2, 2, [(vec![1, 1], c(1.0, 0.0))]).unwrap();
        let est = sup_norm_q(&y1y2, &e, 100_000);
        assert!((est.value - 0.5).abs() < 1e-6 && est.value <= 0.5 + 1e-12, "{}", est.value);
        assert_eq!(est.samples, 100_000);
    }

    #[test]
    fn sup_norm_other_norms() {
        let y1y2 = HomogeneousPolynomial::new(2, 2, [(vec![1, 1], c(1.0, 0.0))]).unwrap();
        let est = sup_norm_q(&y1y2, &YNorm::Sup, 20_000);
        assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
        let est = sup_norm_q(&y1y2, &YNorm::PNorm { p: 1.0 }, 20_000);
        assert!((est.value - 0.25).abs() < 1e-6, "{}", est.value);
    }
}
