//! The ratio f(t) = ((1 - |e^{-r lambda t}|) / |1 - e^{-r lambda t}|)^2,
//! its infimum (Re lambda / |lambda|)^2 and the associated inequality.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below t * |lambda| = SERIES_CUTOFF, f is evaluated from second-order series.
pub const SERIES_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpParams {
    pub lambda: Complex64,
    pub r: u32,
}

impl SharpParams {
    pub fn new(lambda: Complex64, r: u32) -> Result<Self> {
        if !(lambda.re > 0.0 && lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("Re lambda must be positive, got {lambda}")));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("r must be >= 1".into()));
        }
        Ok(Self { lambda, r })
    }

    pub fn a(&self) -> f64 {
        self.lambda.re
    }

    pub fn b(&self) -> f64 {
        self.lambda.im
    }

    /// (a / |lambda|)^2
    pub fn limit(&self) -> f64 {
        let (a, b) = (self.a(), self.b());
        a * a / (a * a + b * b)
    }

    /// 2 pi / (|b| r), or infinity for real lambda.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / (self.b().abs() * f64::from(self.r))
    }

    /// Default horizon: 50/(a r), extended to cover at least ten periods.
    pub fn default_t_max(&self) -> f64 {
        let base = 50.0 / (self.a() * f64::from(self.r));
        if self.b() == 0.0 {
            base
        } else {
            base.max(10.0 * self.period())
        }
    }
}

/// (1 - |e^{-z}|, |1 - e^{-z}|) for z = r lambda t, without cancellation.
fn parts(p: &SharpParams, t: f64) -> (f64, f64) {
    let s = f64::from(p.r) * t;
    let x = p.a() * s;
    let y = p.b() * s;
    let num = -(-x).exp_m1();
    let half = (0.5 * y).sin();
    let re = num + (-x).exp() * 2.0 * half * half;
    let im = (-x).exp() * y.sin();
    (num, re.hypot(im))
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

pub fn f_sharp(p: &SharpParams, t: f64) -> Result<f64> {
    check_t(t)?;
    if t * p.lambda.norm() < SERIES_CUTOFF {
        // 1 - e^{-sa} ~ sa (1 - sa/2),  |1 - e^{-s lambda}| ~ s|lambda| |1 - s lambda/2|
        let s = f64::from(p.r) * t;
        let num = p.a() * (1.0 - 0.5 * s * p.a());
        let den = p.lambda.norm() * (1.0 - 0.5 * s * p.lambda).norm();
        return Ok((num / den).powi(2));
    }
    let (num, den) = parts(p, t);
    Ok((num / den).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Infimum {
    /// min(grid minimum, analytic limit)
    pub value: f64,
    pub grid_min: f64,
    pub grid_argmin: f64,
    pub limit: f64,
    pub grid_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// f at the smallest grid time.
    pub f_at_t_min: f64,
}

pub const INFIMUM_GRID: usize = 10_000;

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (hi - lo) <= 1e-14 * hi.abs().max(1e-300) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimum of f over a logarithmic grid on [1e-4 / (|lambda| r), t_max],
/// refined by golden section around the best cell.
pub fn infimum_f(p: &SharpParams, t_max: f64) -> Result<Infimum> {
    let t_min = 1e-4 / (p.lambda.norm() * f64::from(p.r));
    if !(t_max.is_finite() && t_max > t_min) {
        return Err(Error::InvalidParameter(format!("t_max must exceed {t_min}, got {t_max}")));
    }
    let n = INFIMUM_GRID;
    let ratio = (t_max / t_min).ln() / (n - 1) as f64;
    let ts: Vec<f64> = (0..n).map(|k| t_min * (ratio * k as f64).exp()).collect();
    let fs: Vec<f64> = ts.iter().map(|&t| f_sharp(p, t)).collect::<Result<_>>()?;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &v) in fs.iter().enumerate() {
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut argmin = ts[best_i];
    let lo = ts[best_i.saturating_sub(1)];
    let hi = ts[(best_i + 1).min(n - 1)];
    if hi > lo {
        let (t, v) = golden_section(|t| f_sharp(p, t).unwrap_or(f64::INFINITY), lo, hi);
        if v < best {
            best = v;
            argmin = t;
        }
    }
    let limit = p.limit();
    Ok(Infimum {
        value: best.min(limit),
        grid_min: best,
        grid_argmin: argmin,
        limit,
        grid_points: n,
        t_min,
        t_max,
        f_at_t_min: fs[0],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationMargin {
    pub min_margin: f64,
    pub argmin_t: f64,
    pub points: usize,
    /// Real lambda: the inequality holds with equality everywhere.
    pub degenerate: bool,
    pub pass: bool,
}

/// (1 - |e^{-r lambda t}|) - |1 - e^{-r lambda t}| a / |lambda|
pub fn perturbation_margin(p: &SharpParams, t: f64) -> Result<f64> {
    check_t(t)?;
    let (num, den) = parts(p, t);
    Ok(num - den * p.a() / p.lambda.norm())
}

pub fn verify_perturbation_inequality(p: &SharpParams, t_grid: &[f64]) -> Result<PerturbationMargin> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    let mut min_margin = f64::INFINITY;
    let mut argmin_t = t_grid[0];
    for &t in t_grid {
        let m = perturbation_margin(p, t)?;
        if m < min_margin {
            min_margin = m;
            argmin_t = t;
        }
    }
    let degenerate = p.b() == 0.0;
    let pass = if degenerate { min_margin.abs() <= 1e-15 } else { min_margin > 0.0 };
    Ok(PerturbationMargin { min_margin, argmin_t, points: t_grid.len(), degenerate, pass })
}

/// n log-spaced times on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| lo * (ratio * k as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t: f64,
    /// Whether f'(t) = 0 here; the cosine equation also admits roots where
    /// tan(brt/2) has the opposite sign, which are not stationary.
    pub stationary: bool,
    pub f: f64,
    /// a^2/(a^2+b^2) + b^2 (1-E)^2 / (a^2 (1+E)^2 + b^2 (1-E)^2), E = e^{-art}
    pub closed_form_printed: f64,
    /// a^2/(a^2+b^2) + b^2 (1-E)^2 / ((a^2+b^2) (1+E)^2), equal to f at every root
    pub closed_form: f64,
    pub exceeds_limit: bool,
}

/// cos(brt) minus the right-hand side of the critical-point equation.
pub fn critical_residual(p: &SharpParams, t: f64) -> f64 {
    let (a, b, r) = (p.a(), p.b(), f64::from(p.r));
    let e = (-a * r * t).exp();
    let big_a = a * a * (1.0 + e).powi(2);
    let big_b = b * b * (1.0 - e).powi(2);
    (b * r * t).cos() - (big_a - big_b) / (big_a + big_b)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn critical_points(p: &SharpParams, window: (f64, f64)) -> Result<Vec<CriticalPoint>> {
    let (lo, hi) = window;
    if p.b() == 0.0 {
        return Err(Error::NoRoots);
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("window must satisfy 0 < lo < hi, got ({lo}, {hi})")));
    }
    let cells = (((hi - lo) / p.period() * 256.0).ceil() as usize).clamp(2048, 10_000_000);
    let step = (hi - lo) / cells as f64;
    let g = |t: f64| critical_residual(p, t);
    let mut roots = Vec::new();
    let mut prev_t = lo;
    let mut prev = g(lo);
    for k in 1..=cells {
        let t = if k == cells { hi } else { lo + step * k as f64 };
        let v = g(t);
        if prev == 0.0 {
            roots.push(prev_t);
        } else if v != 0.0 && (v < 0.0) != (prev < 0.0) {
            roots.push(bisect(g, prev_t, t));
        }
        prev_t = t;
        prev = v;
    }
    if roots.is_empty() {
        return Err(Error::NoRoots);
    }
    let (a, b, r) = (p.a(), p.b(), f64::from(p.r));
    let limit = p.limit();
    roots
        .into_iter()
        .map(|t| {
            let e = (-a * r * t).exp();
            let (one_m, one_p) = (-(-a * r * t).exp_m1(), 1.0 + e);
            let base = a * a / (a * a + b * b);
            let closed_form_printed =
                base + b * b * one_m * one_m / (a * a * one_p * one_p + b * b * one_m * one_m);
            let closed_form = base + b * b * one_m * one_m / ((a * a + b * b) * one_p * one_p);
            let half = 0.5 * b * r * t;
            let plus = (a * one_p * half.sin() - b * one_m * half.cos()).abs();
            let minus = (a * one_p * half.sin() + b * one_m * half.cos()).abs();
            let f = f_sharp(p, t)?;
            Ok(CriticalPoint {
                t,
                stationary: plus <= minus,
                f,
                closed_form_printed,
                closed_form,
                exceeds_limit: f > limit && closed_form_printed > limit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpReport {
    pub params: SharpParams,
    pub infimum: Infimum,
    pub inequality: PerturbationMargin,
    pub f_at_t_max: f64,
    /// |f(t_max) - 1| <= 1e-6 is required once t_max >= 50/(a r).
    pub tail_checked: bool,
    pub critical_points: Vec<CriticalPoint>,
    pub pass: bool,
}

/// Infimum, inequality margin on (1e-4, t_max), the t_max limit and the
/// critical points in (0.1/(|lambda| r), t_max).
pub fn analyze(p: &SharpParams, t_max: f64) -> Result<SharpReport> {
    let infimum = infimum_f(p, t_max)?;
    let inequality = verify_perturbation_inequality(p, &log_grid(1e-4, t_max, INFIMUM_GRID))?;
    let f_at_t_max = f_sharp(p, t_max)?;
    let critical_points = match critical_points(p, (0.1 / (p.lambda.norm() * f64::from(p.r)), t_max)) {
        Ok(v) => v,
        Err(Error::NoRoots) => Vec::new(),
        Err(e) => return Err(e),
    };
    let limit = p.limit();
    let tail_checked = t_max >= 50.0 / (p.a() * f64::from(p.r));
    let pass = (!tail_checked || (f_at_t_max - 1.0).abs() <= 1e-6)
        && infimum.grid_min >= limit - 1e-9
        && (infimum.f_at_t_min - limit).abs() <= 1e-3
        && inequality.pass
        && critical_points.iter().all(|c| c.exceeds_limit && (c.f - c.closed_form).abs() <= 1e-9);
    Ok(SharpReport { params: *p, infimum, inequality, f_at_t_max, tail_checked, critical_points, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sp(re: f64, im: f64, r: u32) -> SharpParams {
        SharpParams::new(c(re, im), r).unwrap()
    }

    #[test]
    fn f_examples() {
        for r in 1..4 {
            for t in [1e-9, 0.01, 1.0, 30.0] {
                assert!((f_sharp(&sp(2.5, 0.0, r), t).unwrap() - 1.0).abs() < 1e-15);
            }
        }
        let p = sp(1.0, 1.0, 1);
        assert!((f_sharp(&p, std::f64::consts::TAU).unwrap() - 1.0).abs() < 1e-14);
        assert!((f_sharp(&p, 1e-12).unwrap() - 0.5).abs() < 1e-9);
        assert!((f_sharp(&p, 1e-5).unwrap() - 0.5).abs() < 1e-6);
        assert!(matches!(f_sharp(&p, 0.0), Err(Error::NonPositiveTime(_))));
        assert!(f_sharp(&p, -1.0).is_err());
    }

    #[test]
    fn series_matches_direct_evaluation_at_cutoff() {
        for (re, im, r) in [(1.0, 1.0, 1), (2.0, -3.0, 2), (0.5, 5.0, 3)] {
            let p = sp(re, im, r);
            let t = SERIES_CUTOFF / p.lambda.norm();
            let below = f_sharp(&p, t * (1.0 - 1e-9)).unwrap();
            let above = f_sharp(&p, t * (1.0 + 1e-9)).unwrap();
            assert!((below - above).abs() < 1e-12);
        }
    }

    #[test]
    fn params_validation() {
        assert!(SharpParams::new(c(0.0, 1.0), 1).is_err());
        assert!(SharpParams::new(c(1.0, 1.0), 0).is_err());
    }

    #[test]
    fn infimum_examples() {
        assert!((infimum_f(&sp(1.0, 0.0, 1), 50.0).unwrap().value - 1.0).abs() < 1e-15);
        let inf = infimum_f(&sp(1.0, 1.0, 1), 100.0).unwrap();
        assert_eq!(inf.value, 0.5);
        assert!(inf.grid_min >= 0.5 - 1e-9 && inf.f_at_t_min - 0.5 < 1e-3);
        let p = sp(2.0, -3.0, 1);
        let inf = infimum_f(&p, p.default_t_max()).unwrap();
        assert!((inf.value - 4.0 / 13.0).abs() < 1e-15);
        assert!(inf.grid_min >= 4.0 / 13.0 - 1e-9 && inf.grid_min - 4.0 / 13.0 < 1e-3);
    }

    #[test]
    fn lower_bound_on_random_parameters() {
        let mut rng = crate::sampling::seeded_rng(21);
        for _ in 0..20 {
            let p = sp(rng.random_range(0.05..5.0), rng.random_range(-10.0..10.0), rng.random_range(1..=3));
            for t in log_grid(1e-8, p.default_t_max(), 2000) {
                assert!(f_sharp(&p, t).unwrap() >= p.limit() - 1e-12, "{p:?} t={t}");
            }
            let t_max = 50.0 / (p.a() * f64::from(p.r));
            assert!((f_sharp(&p, t_max).unwrap() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn perturbation_margin_examples() {
        let m = verify_perturbation_inequality(&sp(1.0, 0.0, 2), &log_grid(1e-4, 10.0, 1000)).unwrap();
        assert!(m.degenerate && m.pass && m.min_margin.abs() <= 1e-15);
        let p = sp(1.0, 1.0, 2);
        let m = verify_perturbation_inequality(&p, &log_grid(1e-4, 10.0, 10_000)).unwrap();
        assert!(!m.degenerate && m.pass && m.min_margin > 0.0);
        let small = perturbation_margin(&p, 1e-6).unwrap();
        assert!(small > 0.0 && small < 1e-15);
    }

    #[test]
    fn critical_points_examples() {
        let p = sp(1.0, 1.0, 1);
        let pts = critical_points(&p, (0.1, 10.0)).unwrap();
        assert!(!pts.is_empty());
        for cp in &pts {
            assert!(critical_residual(&p, cp.t).abs() < 1e-10);
            assert!(cp.f > 0.5 && cp.exceeds_limit);
            assert!((cp.f - cp.closed_form).abs() <= 1e-9, "{cp:?}");
        }
        assert!(matches!(critical_points(&sp(1.0, 0.0, 1), (0.1, 10.0)), Err(Error::NoRoots)));
    }

    #[test]
    fn printed_closed_form_differs_but_exceeds_limit() {
        let p = sp(1.0, 1.0, 1);
        let pts = critical_points(&p, (0.1, 10.0)).unwrap();
        assert!(pts.iter().any(|cp| (cp.closed_form_printed - cp.f).abs() > 1e-4));
        assert!(pts.iter().all(|cp| cp.closed_form_printed > p.limit()));
    }

    #[test]
    fn stationary_flag_matches_numerical_derivative() {
        for p in [sp(1.0, 1.0, 1), sp(2.0, -3.0, 2), sp(0.5, 5.0, 3)] {
            // for large a r t, f is flat to within e^{-art} and f' is too small to classify
            let hi = (4.0 / (p.a() * f64::from(p.r))).max(1.5 * p.period());
            let pts = critical_points(&p, (0.05, hi)).unwrap();
            assert!(pts.iter().any(|c| c.stationary) && pts.iter().any(|c| !c.stationary));
            for cp in pts {
                let h = 1e-6 * cp.t;
                let d = (f_sharp(&p, cp.t + h).unwrap() - f_sharp(&p, cp.t - h).unwrap()) / (2.0 * h);
                if cp.stationary {
                    assert!(d.abs() < 1e-7, "{p:?} {cp:?} f'={d}");
                } else {
                    assert!(d.abs() > 1e-6, "{p:?} {cp:?} f'={d}");
                }
            }
        }
    }

    #[test]
    fn f_is_one_where_cosine_is_one() {
        let p = sp(2.0, -3.0, 2);
        for k in 1..5 {
            let t = k as f64 * p.period();
            assert!((f_sharp(&p, t).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn acceptance_parameters() {
        for (re, im) in [(1.0, 1.0), (2.0, -3.0), (0.5, 5.0)] {
            for r in 1..=3 {
                let p = sp(re, im, r);
                let rep = analyze(&p, 50.0 / (p.a() * f64::from(r))).unwrap();
                assert!(rep.pass, "{rep:?}");
                assert!((rep.infimum.value - p.limit()).abs() < 1e-3);
                assert!((rep.f_at_t_max - 1.0).abs() < 1e-6);
            }
        }
    }
}
