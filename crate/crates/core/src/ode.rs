//! Dormand-Prince 5(4) integration of autonomous complex systems
//! dy/dt = F(y) that must stay inside a domain described by a gauge
//! (the domain is `gauge < 1`).

use num_complex::Complex64;

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order weights minus the embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    pub min_step: f64,
    /// Record every accepted step in the solution trajectory.
    pub record: bool,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, ..Default::default() }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_steps: 1_000_000, min_step: 1e-14, record: false }
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub state: Vec<Complex64>,
    pub steps: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates (in the weighted norm's units
    /// before scaling, i.e. absolute).
    pub error_estimate: f64,
    /// (t, state) after every accepted step, when recording.
    pub trajectory: Vec<(f64, Vec<Complex64>)>,
    /// Largest gauge value seen at accepted states.
    pub max_gauge: f64,
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrates y' = rhs(y) from `y0` over [0, t_end].
pub fn integrate<F, G>(mut rhs: F, gauge: G, y0: &[Complex64], t_end: f64, opts: OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
    G: Fn(&[Complex64]) -> f64,
{
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("integration time must be >= 0, got {t_end}")));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let g0 = gauge(&y);
    if !(g0 < 1.0) {
        return Err(Error::LeftDomain { t: 0.0, gauge: g0 });
    }
    let mut sol = OdeSolution {
        state: y.clone(),
        steps: 0,
        rejected: 0,
        error_estimate: 0.0,
        trajectory: Vec::new(),
        max_gauge: g0,
    };
    if opts.record {
        sol.trajectory.push((0.0, y.clone()));
    }
    if t_end == 0.0 {
        return Ok(sol);
    }

    let zero = Complex64::new(0.0, 0.0);
    let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![zero; n]);
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];

    rhs(&y, &mut k[0]);
    if !all_finite(&k[0]) {
        return Err(Error::LeftDomain { t: 0.0, gauge: g0 });
    }

    let scale0 = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let slope0 = k[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h = if slope0 > 0.0 {
        (0.01 * (opts.abs_tol + opts.rel_tol * scale0).powf(0.2) / slope0 * (1.0 + scale0)).min(t_end)
    } else {
        t_end
    };
    h = h.max(opts.min_step).min(t_end);

    let mut t = 0.0;
    while t < t_end {
        if sol.steps + sol.rejected >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let stage = |tmp: &mut [Complex64], y: &[Complex64], k: &[Vec<Complex64>; 7], coeffs: &[(usize, f64)]| {
            for i in 0..n {
                let mut acc = zero;
                for &(j, a) in coeffs {
                    acc += k[j][i] * a;
                }
                tmp[i] = y[i] + acc * h;
            }
        };

        stage(&mut tmp, &y, &k, &[(0, A21)]);
        rhs(&tmp, &mut k[1]);
        stage(&mut tmp, &y, &k, &[(0, A31), (1, A32)]);
        rhs(&tmp, &mut k[2]);
        stage(&mut tmp, &y, &k, &[(0, A41), (1, A42), (2, A43)]);
        rhs(&tmp, &mut k[3]);
        stage(&mut tmp, &y, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        rhs(&tmp, &mut k[4]);
        stage(&mut tmp, &y, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        rhs(&tmp, &mut k[5]);
        stage(&mut y_new, &y, &k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
        rhs(&y_new, &mut k[6]);

        let finite = (1..7).all(|j| all_finite(&k[j])) && all_finite(&y_new);
        let mut err = f64::INFINITY;
        let mut err_abs = 0.0;
        if finite {
            err = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
                let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y_new[i].norm());
                err = f64::max(err, e.norm() / sc);
                err_abs = f64::max(err_abs, e.norm());
            }
        }

        // Reject steps whose trial state leaves the domain; the true flow
        // stays inside, so a smaller step is tried first.
        let g_new = if finite { gauge(&y_new) } else { f64::INFINITY };
        if err <= 1.0 && g_new < 1.0 {
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            sol.steps += 1;
            sol.error_estimate += err_abs;
            sol.max_gauge = sol.max_gauge.max(g_new);
            if opts.record {
                sol.trajectory.push((t, y.clone()));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            sol.rejected += 1;
            if err <= 1.0 && h <= opts.min_step * 4.0 {
                return Err(Error::LeftDomain { t: t + h, gauge: g_new });
            }
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
            h *= fac;
            if h < opts.min_step {
                return Err(Error::StepUnderflow(t));
            }
        }
    }
    sol.state = y;
    Ok(sol)
}
