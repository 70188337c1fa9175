use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use spirallab::covering::{region_samples, verify_centered_covering, verify_distortion, verify_scaled_covering, CoveringReport, OmegaSpec};
use spirallab::extensions::{verify_identities, verify_invariance, BallSpace, HomogeneousPolynomial, InvarianceConfig, InvarianceMode, YNorm, INTERIOR_EPS};
use spirallab::genext::{verify_generator_extension, ExtendedGenerator, GenExtConfig};
use spirallab::report::{VerificationReport, Witness};
use spirallab::sampling::{random_disk_point, seeded_rng, PolarGrid};
use spirallab::semigroups::{berkson_porta_margin, flow, koenigs, koenigs_residual, schroder_residual, spirallike_margin, GeneratorKind, MARGIN_TOLERANCE};
use spirallab::sharp::{analyze, f_sharp, log_grid, perturbation_margin, SharpParams};
use spirallab::spec::{parse_polynomial, polynomial_to_json, FunctionSpec, GeneratorSpec};
use spirallab::Error;

use crate::args::*;
use crate::output::{csv, Outcome};
use crate::CliError;

pub const KOENIGS_TOL: f64 = 1e-8;
pub const REFERENCE_TOL: f64 = 1e-7;
pub const SCHRODER_TOL: f64 = 1e-6;

fn load_text(arg: &str) -> Result<String, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
    } else {
        Ok(arg.to_owned())
    }
}

fn load_function(arg: &str) -> Result<FunctionSpec, CliError> {
    let text = load_text(arg)?;
    if text.trim_start().starts_with('{') {
        return Ok(FunctionSpec::parse(&text)?);
    }
    FunctionSpec::from_name(text.trim()).ok_or_else(|| {
        CliError::Usage(format!("unknown map {arg:?}: expected identity, koebe, half_plane, JSON, or a file"))
    })
}

fn load_generator(arg: &str) -> Result<GeneratorSpec, CliError> {
    let text = load_text(arg)?;
    if text.trim_start().starts_with('{') {
        return Ok(GeneratorSpec::parse(&text)?);
    }
    GeneratorSpec::from_name(text.trim()).ok_or_else(|| {
        CliError::Usage(format!("unknown generator {arg:?}: expected linear, logistic, tanh, JSON, or a file"))
    })
}

fn load_polynomial(arg: &str, m: Option<usize>) -> Result<HomogeneousPolynomial, CliError> {
    Ok(parse_polynomial(&load_text(arg)?, m)?)
}

fn parse_y_norm(s: &str) -> Result<YNorm, CliError> {
    match s {
        "euclidean" => Ok(YNorm::Euclidean),
        "sup" => Ok(YNorm::Sup),
        other => match other.strip_prefix("p:").map(str::parse::<f64>) {
            Some(Ok(p)) if p.is_finite() && p >= 1.0 => Ok(YNorm::PNorm { p }),
            _ => Err(CliError::Usage(format!("bad --y-norm {s:?}: expected euclidean, sup, or p:<p> with p >= 1"))),
        },
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn integer_degree(r: f64) -> Option<u32> {
    (r.fract() == 0.0 && r >= 1.0 && r <= f64::from(spirallab::extensions::homogeneous::MAX_DEGREE)).then_some(r as u32)
}

fn absorb(o: &mut Outcome, rep: &VerificationReport) {
    o.pass &= rep.pass;
    o.inconclusive |= rep.inconclusive;
    o.add_witnesses(&rep.witnesses);
}

pub fn covering(a: &CoveringArgs, seed: u64) -> Result<Outcome, CliError> {
    let spec = load_function(&a.function)?;
    let h = spec.build()?;
    let grid = PolarGrid::boundary(a.grid.0, a.grid.1);
    let x0s = if a.x0.is_empty() { vec![Complex64::new(0.0, 0.0)] } else { a.x0.clone() };
    let betas: Option<Vec<(Complex64, Option<f64>)>> = match (a.beta, &a.times) {
        (Some(b), _) => Some(vec![(b, None)]),
        (None, Some(ts)) => {
            let mu = a.mu.or(h.spiral_multiplier()).ok_or_else(|| {
                CliError::Usage("--times needs --mu for a map without a spiral multiplier".into())
            })?;
            Some(ts.0.iter().map(|&t| ((-mu * t).exp(), Some(t))).collect())
        }
        (None, None) => None,
    };

    let mut cases: Vec<(Option<f64>, CoveringReport)> = Vec::new();
    for &x0 in &x0s {
        match &betas {
            None => {
                for &alpha in a.alpha.as_ref().map_or(&[0.5][..], |l| &l.0) {
                    cases.push((None, verify_centered_covering(&h, x0, alpha, &grid)?));
                }
            }
            Some(bs) => {
                for &(beta, t) in bs {
                    let alphas = a.alpha.as_ref().map_or_else(|| vec![a.alpha_ratio * beta.norm()], |l| l.0.clone());
                    for alpha in alphas {
                        cases.push((t, verify_scaled_covering(&h, x0, alpha, beta, &grid)?));
                    }
                }
            }
        }
    }

    let mut o = Outcome { pass: true, ..Default::default() };
    let mut worst: Option<&CoveringReport> = None;
    for (t, c) in &cases {
        let slack = c.measured_radius_lower - (c.predicted_radius - c.grid_tolerance);
        if worst.is_none_or(|w| slack < w.measured_radius_lower - (w.predicted_radius - w.grid_tolerance)) {
            worst = Some(c);
        }
        if !c.pass {
            o.pass = false;
            let reason = match c.secondary_bound {
                Some(s) if c.predicted_radius < s - 1e-12 => format!("predicted radius below the secondary bound {s:e}"),
                _ => format!("covered radius {:e} below the bound {:e}", c.measured_radius_lower, c.predicted_radius),
            };
            o.add_witnesses(&[Witness {
                t: *t,
                x: c.x0,
                y: vec![c.min_witness],
                gamma: c.beta,
                value: c.measured_radius_lower,
                reason: format!("alpha = {}: {reason}", c.alpha),
            }]);
        }
    }
    if let Some(w) = worst {
        o.measured = w.measured_radius_lower;
        o.predicted = w.predicted_radius;
    }
    o.summary.insert("cases".into(), json!(cases.len()));
    o.summary.insert("failed_cases".into(), json!(cases.iter().filter(|c| !c.1.pass).count()));

    let mut result = Map::new();
    result.insert(
        "cases".into(),
        Value::Array(
            cases
                .iter()
                .map(|(t, c)| {
                    let mut v = to_value(c);
                    if let (Some(t), Value::Object(m)) = (t, &mut v) {
                        m.insert("t".into(), json!(t));
                    }
                    v
                })
                .collect(),
        ),
    );
    if a.distortion > 0 {
        let rep = verify_distortion(&h, a.distortion, seed)?;
        absorb(&mut o, &rep);
        result.insert("distortion".into(), to_value(&rep));
    }
    o.result = Value::Object(result);

    if let Some(path) = &a.dump_region {
        let (x0, alpha) = (cases[0].1.x0, cases[0].1.alpha);
        let region = region_samples(&h, &OmegaSpec::new(&h, x0, alpha)?, &grid);
        let text = csv(&["x_re", "x_im", "in_omega"], region.iter().map(|(x, inside)| [x.re, x.im, f64::from(u8::from(*inside))]));
        o.csv.push((path.clone(), text));
    }

    o.inputs = json!({
        "fn": spec,
        "x0": x0s,
        "alpha": a.alpha.as_ref().map(|l| l.0.clone()),
        "beta": a.beta,
        "times": a.times.as_ref().map(|l| l.0.clone()),
        "mu": a.mu,
        "alpha_ratio": a.alpha_ratio,
        "grid": [a.grid.0, a.grid.1],
        "distortion": a.distortion,
        "seed": seed,
    });
    Ok(o)
}

pub fn koenigs_cmd(a: &KoenigsArgs, seed: u64) -> Result<Outcome, CliError> {
    if !(a.rmax > 0.0 && a.rmax < 1.0) {
        return Err(CliError::Usage(format!("--rmax must lie in (0, 1), got {}", a.rmax)));
    }
    let spec = load_generator(&a.generator)?;
    let g = spec.build()?;
    let h = koenigs(&g)?;
    let points: Vec<Complex64> = PolarGrid::uniform(a.grid.0, a.grid.1, a.rmax).points().collect();
    let values: Vec<(Complex64, Complex64)> =
        points.par_iter().map(|&z| Ok((h.eval(z)?, h.deriv(z)?))).collect::<Result<_, Error>>()?;
    let residual = points
        .par_chunks(64)
        .map(|c| koenigs_residual(&h, &g, c))
        .collect::<Result<Vec<f64>, Error>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut o = Outcome { pass: true, ..Default::default() };
    let fail = |o: &mut Outcome, value: f64, reason: String| {
        o.pass = false;
        o.add_witnesses(&[Witness { t: None, x: Complex64::new(0.0, 0.0), y: vec![], gamma: None, value, reason }]);
    };
    if !(residual <= KOENIGS_TOL) {
        fail(&mut o, residual, format!("|h' f - mu h| = {residual:e} exceeds {KOENIGS_TOL:e}"));
    }

    let reference = match &a.reference {
        Some(r) => {
            let rspec = load_function(r)?;
            let rmap = rspec.build()?;
            let mut worst = (0.0f64, Complex64::new(0.0, 0.0));
            for (z, (hz, _)) in points.iter().zip(&values) {
                let d = (hz - rmap.eval(*z)?).norm();
                if !(d <= worst.0) {
                    worst = (d, *z);
                }
            }
            if !(worst.0 <= REFERENCE_TOL) {
                o.pass = false;
                o.add_witnesses(&[Witness {
                    t: None,
                    x: worst.1,
                    y: vec![],
                    gamma: None,
                    value: worst.0,
                    reason: format!("differs from the reference by {:e}", worst.0),
                }]);
            }
            Some((rspec, worst.0))
        }
        None => None,
    };

    let mut rng = seeded_rng(seed);
    let samples: Vec<Complex64> = (0..a.schroder_samples).map(|_| random_disk_point(&mut rng, a.rmax)).collect();
    let mut schroder = Vec::new();
    for &t in &a.times.0 {
        let r = samples
            .par_chunks(16)
            .map(|c| schroder_residual(&h, &g, t, c))
            .collect::<Result<Vec<f64>, Error>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if !(r <= SCHRODER_TOL) {
            fail(&mut o, r, format!("Schroeder residual {r:e} at t = {t} exceeds {SCHRODER_TOL:e}"));
        }
        schroder.push(json!({"t": t, "residual": r}));
    }

    o.measured = residual;
    o.predicted = KOENIGS_TOL;
    o.summary.insert("koenigs_residual".into(), json!(residual));
    o.result = json!({
        "generator": g.describe(),
        "kind": g.kind(),
        "tau": g.tau(),
        "mu": g.mu(),
        "grid_points": points.len(),
        "koenigs_residual": residual,
        "reference": reference.as_ref().map(|(s, d)| json!({"fn": s, "max_difference": d, "tolerance": REFERENCE_TOL})),
        "schroder": schroder,
        "schroder_tolerance": SCHRODER_TOL,
    });
    if let Some(path) = &a.out {
        let text = csv(
            &["x_re", "x_im", "h_re", "h_im", "dh_re", "dh_im"],
            points.iter().zip(&values).map(|(z, (hz, dz))| [z.re, z.im, hz.re, hz.im, dz.re, dz.im]),
        );
        o.csv.push((path.clone(), text));
    }
    o.inputs = json!({
        "gen": spec,
        "grid": [a.grid.0, a.grid.1],
        "rmax": a.rmax,
        "times": a.times.0,
        "schroder_samples": a.schroder_samples,
        "seed": seed,
    });
    Ok(o)
}

pub fn flow_cmd(a: &FlowArgs) -> Result<Outcome, CliError> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let spec = load_generator(&a.generator)?;
    let g = spec.build()?;
    let mut o = Outcome { pass: true, ..Default::default() };
    o.inputs = json!({"gen": spec, "z0": a.z0, "t": a.t, "tol": a.tol});
    let full = flow(&g, a.z0, a.t, a.tol);
    let split = flow(&g, a.z0, a.t / 2.0, a.tol).and_then(|h| flow(&g, h.endpoint, a.t / 2.0, a.tol));
    match (full, split) {
        (Ok(f), Ok(s)) => {
            let law = (f.endpoint - s.endpoint).norm();
            let law_tol = 10.0 * a.tol;
            o.pass = f.endpoint.norm() < 1.0 && law <= law_tol;
            if !o.pass {
                o.add_witnesses(&[Witness {
                    t: Some(a.t),
                    x: a.z0,
                    y: vec![f.endpoint],
                    gamma: None,
                    value: law,
                    reason: format!("semigroup residual {law:e} (tolerance {law_tol:e})"),
                }]);
            }
            o.measured = law;
            o.predicted = law_tol;
            o.summary.insert("endpoint".into(), json!(f.endpoint));
            o.result = json!({"flow": f, "semigroup_residual": law, "semigroup_tolerance": law_tol});
        }
        (Err(e @ (Error::LeftDomain { .. } | Error::StepUnderflow(_))), _) | (_, Err(e @ (Error::LeftDomain { .. } | Error::StepUnderflow(_)))) => {
            o.pass = false;
            let (t, value) = match e {
                Error::LeftDomain { t, gauge } => (Some(t), gauge),
                Error::StepUnderflow(t) => (Some(t), f64::NAN),
                _ => (None, f64::NAN),
            };
            o.add_witnesses(&[Witness { t, x: a.z0, y: vec![], gamma: None, value, reason: e.to_string() }]);
            o.result = json!({"error": e.to_string()});
        }
        (Err(e), _) | (_, Err(e)) => return Err(e.into()),
    }
    Ok(o)
}

pub fn spiral_check(a: &SpiralCheckArgs) -> Result<Outcome, CliError> {
    let grid = PolarGrid::boundary(a.grid.0, a.grid.1);
    let mut o = Outcome { pass: true, predicted: -MARGIN_TOLERANCE, ..Default::default() };
    if let Some(f) = &a.function {
        let spec = load_function(f)?;
        let h = spec.build()?;
        let mu = a.mu.or(h.spiral_multiplier()).ok_or_else(|| CliError::Usage("map has no spiral multiplier; pass --mu".into()))?;
        let margin = spirallike_margin(&h, mu, &grid)?;
        let univalence = h.check_locally_univalent(a.grid.0, a.grid.1);
        o.pass = margin >= -MARGIN_TOLERANCE && univalence.is_ok();
        if margin < -MARGIN_TOLERANCE {
            o.add_witnesses(&[Witness { t: None, x: Complex64::new(0.0, 0.0), y: vec![], gamma: Some(mu), value: margin, reason: "negative spirallike margin".into() }]);
        }
        if let Err(e) = &univalence {
            let x = match e {
                Error::DerivativeVanishes(z) => *z,
                _ => Complex64::new(0.0, 0.0),
            };
            o.add_witnesses(&[Witness { t: None, x, y: vec![], gamma: None, value: 0.0, reason: e.to_string() }]);
        }
        o.measured = margin;
        o.summary.insert("margin".into(), json!(margin));
        o.result = json!({
            "check": "spirallike",
            "map": h.describe(),
            "mu": mu,
            "margin": margin,
            "locally_univalent": univalence.is_ok(),
        });
        o.inputs = json!({"fn": spec, "mu": a.mu, "grid": [a.grid.0, a.grid.1]});
    } else if let Some(gs) = &a.generator {
        let spec = load_generator(gs)?;
        let g = match spec.build() {
            Ok(g) => g,
            Err(e) => {
                // still report the margin of a polynomial or rational field that fails the generator checks
                let Some((field, tau)) = spec.raw_field()? else {
                    return Err(e.into());
                };
                let margin = berkson_porta_margin(|z| field.value(z), field.deriv(tau), tau, &grid);
                o.pass = false;
                o.measured = margin;
                o.add_witnesses(&[Witness { t: None, x: tau, y: vec![], gamma: None, value: margin, reason: e.to_string() }]);
                o.summary.insert("margin".into(), json!(margin));
                o.result = json!({"check": "berkson_porta", "generator": field.describe(), "tau": tau, "margin": margin, "rejected": e.to_string()});
                o.inputs = json!({"gen": spec, "grid": [a.grid.0, a.grid.1]});
                return Ok(o);
            }
        };
        let margin = g.berkson_porta_margin(&grid);
        let angular = (g.kind() == GeneratorKind::Hyperbolic).then(|| g.mu_matches_angular_derivative());
        o.pass = margin >= -MARGIN_TOLERANCE && angular != Some(false);
        if !o.pass {
            o.add_witnesses(&[Witness {
                t: None,
                x: g.tau(),
                y: vec![],
                gamma: None,
                value: margin,
                reason: if margin < -MARGIN_TOLERANCE { "negative Berkson-Porta margin".into() } else { "mu disagrees with the angular derivative".into() },
            }]);
        }
        o.measured = margin;
        o.summary.insert("margin".into(), json!(margin));
        o.result = json!({
            "check": "berkson_porta",
            "generator": g.describe(),
            "kind": g.kind(),
            "tau": g.tau(),
            "mu": g.mu(),
            "margin": margin,
            "angular_derivative_ok": angular,
        });
        o.inputs = json!({"gen": spec, "grid": [a.grid.0, a.grid.1]});
    }
    Ok(o)
}

pub fn extend(a: &ExtendArgs, seed: u64) -> Result<Outcome, CliError> {
    let spec = load_function(&a.function)?;
    let h = spec.build()?;
    let y_norm = parse_y_norm(&a.y_norm)?;
    let q = a.q.as_deref().map(|s| load_polynomial(s, a.m)).transpose()?;
    let m = a.m.or(q.as_ref().map(|q| q.dim())).unwrap_or(1);
    let space = BallSpace::new(a.r, m, y_norm)?;
    let mode = match a.mode {
        Some(ModeArg::Muir) => InvarianceMode::Muir,
        Some(ModeArg::Gamma) => InvarianceMode::GammaDisk,
        None if q.is_some() => InvarianceMode::Muir,
        None => InvarianceMode::GammaDisk,
    };
    let degree = integer_degree(a.r);
    let q = match (q, degree) {
        (Some(q), _) => q,
        (None, Some(d)) => HomogeneousPolynomial::zero(d, m)?,
        (None, None) if mode == InvarianceMode::GammaDisk => HomogeneousPolynomial::zero(1, m)?,
        (None, None) => return Err(CliError::Usage("the Muir check needs an integer r".into())),
    };
    let cfg = InvarianceConfig {
        mode,
        samples: a.samples,
        times: a.times.0.clone(),
        gamma_directions: a.directions,
        gamma_fraction: a.gamma_fraction,
        eps: INTERIOR_EPS,
        seed,
        sup_samples: a.sup_samples,
    };
    let inv = verify_invariance(&h, a.mu, a.lambda, &space, &q, &cfg)?;
    let mut o = Outcome { pass: true, ..Default::default() };
    absorb(&mut o, &inv);
    o.measured = inv.measured;
    o.predicted = inv.predicted;
    o.summary.insert("failures".into(), json!(inv.failures));
    let mut result = Map::new();
    result.insert("invariance".into(), to_value(&inv));
    if a.identities > 0 && degree == Some(q.degree()) {
        let ids = verify_identities(&h, a.mu, a.lambda, &space, &q, a.identities, seed)?;
        absorb(&mut o, &ids);
        result.insert("identities".into(), to_value(&ids));
    } else {
        result.insert("identities".into(), Value::Null);
    }
    o.result = Value::Object(result);
    o.inputs = json!({
        "fn": spec,
        "r": a.r,
        "m": m,
        "Q": polynomial_to_json(&q),
        "mu": a.mu,
        "lambda": a.lambda,
        "y_norm": y_norm,
        "mode": mode,
        "samples": a.samples,
        "times": a.times.0,
        "directions": a.directions,
        "gamma_fraction": a.gamma_fraction,
        "sup_samples": a.sup_samples,
        "identities": a.identities,
        "seed": seed,
    });
    Ok(o)
}

pub fn sharp_bound(a: &SharpArgs) -> Result<Outcome, CliError> {
    let p = SharpParams::new(a.lambda, a.r)?;
    let t_max = a.tmax.unwrap_or_else(|| p.default_t_max());
    if !(t_max.is_finite() && t_max > 1e-4) {
        return Err(CliError::Usage(format!("--tmax must exceed 1e-4, got {t_max}")));
    }
    let rep = analyze(&p, t_max)?;
    let mut o = Outcome { pass: rep.pass, ..Default::default() };
    o.measured = rep.infimum.value;
    o.predicted = rep.infimum.limit;
    o.summary.insert("infimum".into(), json!(rep.infimum.value));
    o.summary.insert("limit".into(), json!(rep.infimum.limit));
    if !rep.pass {
        let mut w = |t: Option<f64>, value: f64, reason: String| {
            o.witnesses.push(Witness { t, x: a.lambda, y: vec![], gamma: None, value, reason })
        };
        if !rep.inequality.pass {
            w(Some(rep.inequality.argmin_t), rep.inequality.min_margin, "perturbation inequality margin not positive".into());
        }
        if rep.infimum.grid_min < rep.infimum.limit - 1e-9 {
            w(Some(rep.infimum.grid_argmin), rep.infimum.grid_min, "f below its limit at t -> 0".into());
        }
        if rep.tail_checked && (rep.f_at_t_max - 1.0).abs() > 1e-6 {
            w(Some(t_max), rep.f_at_t_max, "f(t_max) not within 1e-6 of 1".into());
        }
        for c in rep.critical_points.iter().filter(|c| !c.exceeds_limit || (c.f - c.closed_form).abs() > 1e-9) {
            w(Some(c.t), c.f, "critical value disagrees with the closed form or the limit".into());
        }
        if o.witnesses.is_empty() {
            o.inconclusive = true;
        }
    }
    o.result = to_value(&rep);
    if let Some(path) = &a.dump_curve {
        let grid = log_grid(1e-4 / (p.lambda.norm() * f64::from(p.r)), t_max, a.curve_points.max(2));
        let rows = grid
            .iter()
            .map(|&t| Ok([t, f_sharp(&p, t)?, perturbation_margin(&p, t)?]))
            .collect::<Result<Vec<_>, Error>>()?;
        o.csv.push((path.clone(), csv(&["t", "f", "margin"], rows)));
    }
    o.inputs = json!({"lambda": a.lambda, "r": a.r, "tmax": t_max});
    Ok(o)
}

pub fn gen_extend(a: &GenExtendArgs, seed: u64) -> Result<Outcome, CliError> {
    let spec = load_generator(&a.generator)?;
    let base = spec.build()?;
    let degree = integer_degree(a.r).ok_or_else(|| CliError::Usage(format!("--r must be a positive integer, got {}", a.r)))?;
    let q = a.q.as_deref().map(|s| load_polynomial(s, a.m)).transpose()?;
    let m = a.m.or(q.as_ref().map(|q| q.dim())).unwrap_or(1);
    let q = match q {
        Some(q) => q,
        None => HomogeneousPolynomial::zero(degree, m)?,
    };
    let space = BallSpace::euclidean(a.r, m)?;
    let g = ExtendedGenerator::new(base, a.lambda, space, q.clone())?;
    let cfg = GenExtConfig { samples: a.samples, starts: a.starts, t_end: a.t_end, tol: a.tol, seed, ..GenExtConfig::default() };
    let (rep, trajectories) = verify_generator_extension(&g, &cfg)?;
    let mut o = Outcome { pass: true, ..Default::default() };
    absorb(&mut o, &rep);
    o.measured = rep.measured;
    o.predicted = rep.predicted;
    for key in ["conjugation_residual", "inverse_residual", "ball_exits"] {
        if let Some(v) = rep.details.get(key) {
            o.summary.insert(key.into(), v.clone());
        }
    }
    o.result = to_value(&rep);
    if let Some(path) = &a.dump_traj {
        let mut header: Vec<String> = ["start", "t", "x_re", "x_im"].iter().map(|s| s.to_string()).collect();
        for k in 1..=m {
            header.push(format!("y{k}_re"));
            header.push(format!("y{k}_im"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = trajectories.iter().enumerate().flat_map(|(i, tr)| {
            tr.iter().map(move |(t, p)| {
                let mut row = vec![i as f64, *t, p.x.re, p.x.im];
                row.extend(p.y.iter().flat_map(|c| [c.re, c.im]));
                row
            })
        });
        o.csv.push((path.clone(), csv(&header, rows)));
    }
    o.inputs = json!({
        "gen": spec,
        "lambda": a.lambda,
        "r": a.r,
        "m": m,
        "Q": polynomial_to_json(&q),
        "samples": a.samples,
        "starts": a.starts,
        "T": a.t_end,
        "tol": a.tol,
        "seed": seed,
    });
    Ok(o)
}
