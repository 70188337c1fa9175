//! Univariate complex polynomials in ascending coefficient order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coefs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coefs: Vec<Complex64>) -> Self {
        while coefs.len() > 1 && coefs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coefs.pop();
        }
        if coefs.is_empty() {
            coefs.push(Complex64::new(0.0, 0.0));
        }
        Self { coefs }
    }

    pub fn coefs(&self) -> &[Complex64] {
        &self.coefs
    }

    pub fn degree(&self) -> usize {
        self.coefs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coefs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value, first and second derivative by a single Horner sweep.
    pub fn eval2(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for &c in self.coefs.iter().rev() {
            d2 = d2 * z + d1 * 2.0;
            d1 = d1 * z + p;
            p = p * z + c;
        }
        (p, d1, d2)
    }

    pub fn derivative(&self) -> Poly {
        if self.coefs.len() <= 1 {
            return Poly::new(vec![]);
        }
        Poly::new(
            self.coefs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }
}

impl Poly {
    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coefs.len() + other.coefs.len() - 1];
        for (i, a) in self.coefs.iter().enumerate() {
            for (j, b) in other.coefs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coefs.len().max(other.coefs.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|k| self.coefs.get(k).copied().unwrap_or(zero) - other.coefs.get(k).copied().unwrap_or(zero))
                .collect(),
        )
    }

    /// Number of zeros inside the circle |z| = radius, by the argument
    /// principle. `None` when the polynomial (nearly) vanishes on the circle.
    pub fn zeros_inside(&self, radius: f64) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let at = |theta: f64| self.eval(Complex64::from_polar(radius, theta));
        let mut total = 0.0;
        let pieces = 64 * (self.degree() + 1);
        let step = std::f64::consts::TAU / pieces as f64;
        let mut stack = Vec::new();
        for k in 0..pieces {
            stack.push((k as f64 * step, (k + 1) as f64 * step, 0u32));
            while let Some((a, b, depth)) = stack.pop() {
                let (va, vb) = (at(a), at(b));
                if va.norm() == 0.0 || vb.norm() == 0.0 {
                    return None;
                }
                let inc = (vb / va).arg();
                if inc.abs() <= std::f64::consts::FRAC_PI_4 {
                    total += inc;
                } else if depth >= 40 {
                    return None;
                } else {
                    let m = 0.5 * (a + b);
                    stack.push((m, b, depth + 1));
                    stack.push((a, m, depth + 1));
                }
            }
        }
        let winding = total / std::f64::consts::TAU;
        let rounded = winding.round();
        ((winding - rounded).abs() < 1e-6 && rounded >= 0.0).then_some(rounded as usize)
    }
}
