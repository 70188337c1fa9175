//! The ball { (x, y) : |x|^2 + ||y||^r < 1 } in C x C^m.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{complex_gaussian, random_disk_point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YNorm {
    Euclidean,
    Sup,
    PNorm { p: f64 },
}

impl YNorm {
    pub fn norm(&self, y: &[Complex64]) -> f64 {
        match *self {
            YNorm::Euclidean => y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            YNorm::Sup => y.iter().map(|v| v.norm()).fold(0.0, f64::max),
            YNorm::PNorm { p } => {
                // scale first so large p does not overflow
                let s = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if s == 0.0 || !s.is_finite() {
                    return s;
                }
                s * y.iter().map(|v| (v.norm() / s).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpace {
    pub r: f64,
    pub m: usize,
    pub y_norm: YNorm,
}

impl BallSpace {
    pub fn new(r: f64, m: usize, y_norm: YNorm) -> Result<Self> {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::InvalidParameter(format!("r must be >= 1, got {r}")));
        }
        if m == 0 || m > super::homogeneous::MAX_DIM {
            return Err(Error::InvalidParameter(format!("m must lie in 1..={}, got {m}", super::homogeneous::MAX_DIM)));
        }
        if let YNorm::PNorm { p } = y_norm {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::InvalidParameter(format!("p-norm needs p >= 1, got {p}")));
            }
        }
        Ok(Self { r, m, y_norm })
    }

    pub fn euclidean(r: f64, m: usize) -> Result<Self> {
        Self::new(r, m, YNorm::Euclidean)
    }

    pub fn norm(&self, y: &[Complex64]) -> f64 {
        self.y_norm.norm(y)
    }

    /// |x|^2 + ||y||^r
    pub fn gauge(&self, x: Complex64, y: &[Complex64]) -> f64 {
        x.norm_sqr() + self.norm(y).powf(self.r)
    }

    pub fn check_point(&self, p: &BallPoint) -> Result<()> {
        if p.y.len() != self.m {
            return Err(Error::InvalidParameter(format!("fiber has length {}, expected {}", p.y.len(), self.m)));
        }
        let g = self.gauge(p.x, &p.y);
        if g < 1.0 {
            Ok(())
        } else {
            Err(Error::OutsideBall(g))
        }
    }

    /// Random point with gauge at most 1 - eps; |x| is area-uniform and the
    /// fiber radius is pushed towards the boundary.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R, eps: f64) -> BallPoint {
        let x = random_disk_point(rng, (1.0 - eps).sqrt());
        let budget = (1.0 - eps - x.norm_sqr()).max(0.0);
        let mut y: Vec<Complex64> = (0..self.m).map(|_| complex_gaussian(rng)).collect();
        let n = self.norm(&y);
        let u: f64 = rng.random();
        let v = 1.0 - (1.0 - u) * (1.0 - u);
        let rho = (budget * v).powf(1.0 / self.r);
        if n > 0.0 {
            y.iter_mut().for_each(|c| *c *= rho / n);
        }
        BallPoint { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    pub x: Complex64,
    pub y: Vec<Complex64>,
}

impl BallPoint {
    pub fn new(x: Complex64, y: Vec<Complex64>) -> Self {
        Self { x, y }
    }
}

pub fn ball_contains(space: &BallSpace, p: &BallPoint) -> bool {
    p.y.len() == space.m && space.gauge(p.x, &p.y) < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::seeded_rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn membership_examples() {
        let s = BallSpace::euclidean(2.0, 1).unwrap();
        assert!(ball_contains(&s, &BallPoint::new(c(0.0, 0.0), vec![c(0.0, 0.0)])));
        assert!(!ball_contains(&s, &BallPoint::new(c(0.6, 0.0), vec![c(0.8, 0.0)])));
        let s3 = BallSpace::euclidean(3.0, 2).unwrap();
        assert!(ball_contains(&s3, &BallPoint::new(c(0.5, 0.0), vec![c(0.5, 0.0), c(0.5, 0.0)])));
        assert!((s3.gauge(c(0.5, 0.0), &[c(0.5, 0.0), c(0.5, 0.0)]) - 0.603_553_390_593_273_7).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        let y = [c(3.0, 0.0), c(0.0, 4.0)];
        assert_eq!(YNorm::Euclidean.norm(&y), 5.0);
        assert_eq!(YNorm::Sup.norm(&y), 4.0);
        assert!((YNorm::PNorm { p: 1.0 }.norm(&y) - 7.0).abs() < 1e-14);
        assert!((YNorm::PNorm { p: 2.0 }.norm(&y) - 5.0).abs() < 1e-14);
        assert!((YNorm::PNorm { p: 1e6 }.norm(&y) - 4.0).abs() < 1e-4);
    }

    #[test]
    fn space_validation() {
        assert!(BallSpace::euclidean(0.5, 1).is_err());
        assert!(BallSpace::euclidean(2.0, 0).is_err());
        assert!(BallSpace::new(2.0, 1, YNorm::PNorm { p: 0.5 }).is_err());
    }

    #[test]
    fn samples_respect_margin() {
        let mut rng = seeded_rng(1);
        for s in [BallSpace::euclidean(2.0, 2).unwrap(), BallSpace::new(3.0, 3, YNorm::Sup).unwrap()] {
            for _ in 0..2000 {
                let p = s.sample_interior(&mut rng, 1e-3);
                assert!(s.gauge(p.x, &p.y) <= 1.0 - 1e-3 + 1e-12);
            }
        }
    }
}
