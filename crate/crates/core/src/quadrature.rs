//! Adaptive Gauss-Kronrod (7/15) quadrature of complex integrands along a
//! straight segment of the complex plane.

#![allow(clippy::excessive_precision)]

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

/// Kronrod estimate and |Kronrod - Gauss| on the segment [a, b].
fn gk15<F>(f: &F, a: Complex64, b: Complex64) -> (Complex64, f64)
where
    F: Fn(Complex64) -> Complex64,
{
    let center = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Integral of `f` along the segment from `a` to `b`.
pub fn integrate_segment<F>(f: F, a: Complex64, b: Complex64, opts: QuadratureOptions) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if !(total.re.is_finite() && total.im.is_finite() && err.is_finite()) {
            return Err(Error::Quadrature { from: a, to: b });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            return Ok(total);
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::Quadrature { from: a, to: b });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = (lo + hi) * 0.5;
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_segment(|z| z * z, c(0.0, 0.0), c(1.0, 1.0), Default::default()).unwrap();
        assert!((v - c(1.0, 1.0).powi(3) / 3.0).norm() < 1e-15);
    }

    #[test]
    fn log_via_reciprocal() {
        let z = c(0.6, -0.7);
        let v = integrate_segment(|s| 1.0 / (1.0 - s), c(0.0, 0.0), z, Default::default()).unwrap();
        assert!((v + (1.0 - z).ln()).norm() < 1e-12);
    }

    #[test]
    fn near_singular_endpoint_refines() {
        let z = c(0.999, 0.0);
        let v = integrate_segment(|s| 1.0 / (1.0 - s).powi(2), c(0.0, 0.0), z, Default::default()).unwrap();
        assert!((v.re - (1.0 / 0.001 - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn nonfinite_integrand_fails() {
        let r = integrate_segment(|_| c(f64::NAN, 0.0), c(0.0, 0.0), c(1.0, 0.0), Default::default());
        assert!(r.is_err());
    }
}
