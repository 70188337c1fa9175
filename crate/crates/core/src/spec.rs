//! JSON and command-line parsers for maps, generators and polynomials.
//! All entry points validate their input and never panic.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::HomogeneousPolynomial;
use crate::poly::Poly;
use crate::semigroups::{koenigs, Generator, GeneratorField, GeneratorKind, PolynomialField, RationalField};
use crate::univalent::UnivalentMap;

/// Longest accepted coefficient list in a spec.
pub const MAX_COEFFICIENTS: usize = 64;
/// Longest accepted comma-separated list on the command line.
pub const MAX_LIST: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Identity {},
    Koebe {},
    MobiusSpiral { c: Complex64 },
    SpiralKoebe { theta: f64 },
    HalfPlane {},
    Rational { num: Vec<Complex64>, den: Vec<Complex64> },
    /// Koenigs function of a generator.
    Koenigs { generator: GeneratorSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// f(z) = z
    Linear {},
    /// f(z) = z - z^2
    Logistic {},
    /// f(z) = z^2 - 1, hyperbolic with tau = 1, mu = 2
    Tanh {},
    Polynomial {
        coefs: Vec<Complex64>,
        #[serde(default)]
        kind: Option<GeneratorKind>,
        #[serde(default)]
        tau: Option<Complex64>,
        #[serde(default)]
        mu: Option<Complex64>,
    },
    Rational {
        num: Vec<Complex64>,
        den: Vec<Complex64>,
        #[serde(default)]
        kind: Option<GeneratorKind>,
        #[serde(default)]
        tau: Option<Complex64>,
        #[serde(default)]
        mu: Option<Complex64>,
    },
    /// f = mu h / h' for a mu-spirallike map h.
    Spirallike {
        #[serde(rename = "fn")]
        map: Box<FunctionSpec>,
        mu: Complex64,
    },
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn check_coefs(name: &str, v: &[Complex64]) -> Result<()> {
    if v.is_empty() || v.len() > MAX_COEFFICIENTS {
        return Err(Error::Spec(format!("{name} needs 1..={MAX_COEFFICIENTS} coefficients, got {}", v.len())));
    }
    if !v.iter().all(|z| finite(*z)) {
        return Err(Error::Spec(format!("{name} has a non-finite coefficient")));
    }
    Ok(())
}

fn check_point(name: &str, z: Option<Complex64>) -> Result<()> {
    match z {
        Some(z) if !finite(z) => Err(Error::Spec(format!("{name} is not finite"))),
        _ => Ok(()),
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
}

/// Maximum nesting of generator/function specs (koenigs of spirallike of ...).
const MAX_NESTING: u32 = 4;

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = from_json(text)?;
        spec.validate(0)?;
        Ok(spec)
    }

    fn validate(&self, depth: u32) -> Result<()> {
        if depth > MAX_NESTING {
            return Err(Error::Spec("specs nested too deeply".into()));
        }
        match self {
            FunctionSpec::MobiusSpiral { c } => check_point("c", Some(*c)),
            FunctionSpec::SpiralKoebe { theta } if !theta.is_finite() => Err(Error::Spec("theta is not finite".into())),
            FunctionSpec::Rational { num, den } => {
                check_coefs("num", num)?;
                check_coefs("den", den)
            }
            FunctionSpec::Koenigs { generator } => generator.validate(depth + 1),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<UnivalentMap> {
        self.validate(0)?;
        match self {
            FunctionSpec::Identity {} => Ok(UnivalentMap::identity()),
            FunctionSpec::Koebe {} => Ok(UnivalentMap::koebe()),
            FunctionSpec::MobiusSpiral { c } => UnivalentMap::mobius_spiral(*c),
            FunctionSpec::SpiralKoebe { theta } => UnivalentMap::spiral_koebe(*theta),
            FunctionSpec::HalfPlane {} => Ok(UnivalentMap::half_plane()),
            FunctionSpec::Rational { num, den } => UnivalentMap::rational(num.clone(), den.clone()),
            FunctionSpec::Koenigs { generator } => koenigs(&generator.build()?),
        }
    }

    /// Name-only shorthand for the parameter-free families.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(FunctionSpec::Identity {}),
            "koebe" => Some(FunctionSpec::Koebe {}),
            "half_plane" => Some(FunctionSpec::HalfPlane {}),
            _ => None,
        }
    }
}

impl GeneratorSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = from_json(text)?;
        spec.validate(0)?;
        Ok(spec)
    }

    fn validate(&self, depth: u32) -> Result<()> {
        if depth > MAX_NESTING {
            return Err(Error::Spec("specs nested too deeply".into()));
        }
        match self {
            GeneratorSpec::Polynomial { coefs, tau, mu, .. } => {
                check_coefs("coefs", coefs)?;
                check_point("tau", *tau)?;
                check_point("mu", *mu)
            }
            GeneratorSpec::Rational { num, den, tau, mu, .. } => {
                check_coefs("num", num)?;
                check_coefs("den", den)?;
                check_point("tau", *tau)?;
                check_point("mu", *mu)
            }
            GeneratorSpec::Spirallike { map, mu } => {
                check_point("mu", Some(*mu))?;
                map.validate(depth + 1)
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Generator> {
        self.validate(0)?;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            GeneratorSpec::Linear {} => Generator::polynomial(vec![zero, one], GeneratorKind::Dilation, zero, None),
            GeneratorSpec::Logistic {} => Generator::polynomial(vec![zero, one, -one], GeneratorKind::Dilation, zero, None),
            GeneratorSpec::Tanh {} => {
                Generator::polynomial(vec![-one, zero, one], GeneratorKind::Hyperbolic, one, Some(Complex64::new(2.0, 0.0)))
            }
            GeneratorSpec::Polynomial { coefs, kind, tau, mu } => {
                let field = Arc::new(PolynomialField(Poly::new(coefs.clone())));
                Generator::with_kind(field, kind.unwrap_or(GeneratorKind::Dilation), tau.unwrap_or(zero), *mu)
            }
            GeneratorSpec::Rational { num, den, kind, tau, mu } => {
                let den = Poly::new(den.clone());
                if den.is_zero() || den.zeros_inside(1.0 - 1e-7) != Some(0) {
                    return Err(Error::Spec("generator denominator must not vanish on the disk".into()));
                }
                let field = Arc::new(RationalField { num: Poly::new(num.clone()), den });
                Generator::with_kind(field, kind.unwrap_or(GeneratorKind::Dilation), tau.unwrap_or(zero), *mu)
            }
            GeneratorSpec::Spirallike { map, mu } => Generator::from_spirallike(map.build()?, *mu),
        }
    }

    /// The vector field and Denjoy-Wolff point of a polynomial or rational
    /// spec, without the generator checks `build` applies.
    pub fn raw_field(&self) -> Result<Option<(Arc<dyn GeneratorField>, Complex64)>> {
        self.validate(0)?;
        let zero = Complex64::new(0.0, 0.0);
        Ok(match self {
            GeneratorSpec::Polynomial { coefs, tau, .. } => {
                Some((Arc::new(PolynomialField(Poly::new(coefs.clone()))), tau.unwrap_or(zero)))
            }
            GeneratorSpec::Rational { num, den, tau, .. } => {
                let field = RationalField { num: Poly::new(num.clone()), den: Poly::new(den.clone()) };
                Some((Arc::new(field), tau.unwrap_or(zero)))
            }
            _ => None,
        })
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(GeneratorSpec::Linear {}),
            "logistic" => Some(GeneratorSpec::Logistic {}),
            "tanh" => Some(GeneratorSpec::Tanh {}),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    exps: Vec<u32>,
    coef: Complex64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    degree: u32,
    terms: Vec<TermJson>,
    #[serde(default)]
    m: Option<usize>,
}

/// Parses {"degree": r, "terms": [{"exps": [...], "coef": [re, im]}], "m": m?}.
/// The dimension comes from the exponent vectors, from "m", or from
/// `dim_hint` when there are no terms.
pub fn parse_polynomial(text: &str, dim_hint: Option<usize>) -> Result<HomogeneousPolynomial> {
    let raw: PolyJson = from_json(text)?;
    let dim = raw
        .terms
        .first()
        .map(|t| t.exps.len())
        .or(raw.m)
        .or(dim_hint)
        .ok_or_else(|| Error::Spec("polynomial without terms needs \"m\"".into()))?;
    if let Some(m) = raw.m {
        if m != dim {
            return Err(Error::Spec(format!("\"m\" = {m} disagrees with exponent length {dim}")));
        }
    }
    if let Some(m) = dim_hint {
        if m != dim {
            return Err(Error::Spec(format!("polynomial acts on C^{dim}, expected C^{m}")));
        }
    }
    HomogeneousPolynomial::new(raw.degree, dim, raw.terms.into_iter().map(|t| (t.exps, t.coef)))
        .map_err(|e| Error::Spec(e.to_string()))
}

/// Serialises a polynomial in the format read by `parse_polynomial`.
pub fn polynomial_to_json(q: &HomogeneousPolynomial) -> serde_json::Value {
    serde_json::json!({
        "degree": q.degree(),
        "m": q.dim(),
        "terms": q.terms().iter().map(|t| serde_json::json!({"exps": t.exps, "coef": t.coef})).collect::<Vec<_>>(),
    })
}

fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Spec(format!("not a number: {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Spec(format!("not a finite number: {s:?}")))
    }
}

/// "re,im" or a bare real.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse_real(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_real(re)?, parse_real(im)?)),
        _ => Err(Error::Spec(format!("expected re,im, got {s:?}"))),
    }
}

/// Comma-separated reals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = s.split(',').collect();
    if items.len() > MAX_LIST {
        return Err(Error::Spec(format!("list longer than {MAX_LIST}")));
    }
    items.into_iter().map(parse_real).collect()
}

/// "N,M" pair of positive counts.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    let count = |p: &str| -> Result<usize> {
        let v: usize = p.trim().parse().map_err(|_| Error::Spec(format!("not a count: {p:?}")))?;
        if v == 0 {
            return Err(Error::Spec("grid sizes must be positive".into()));
        }
        Ok(v)
    };
    match parts.as_slice() {
        [a, b] => Ok((count(a)?, count(b)?)),
        [a] => {
            let n = count(a)?;
            Ok((n, n))
        }
        _ => Err(Error::Spec(format!("expected N,M, got {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn function_specs() {
        assert_eq!(FunctionSpec::parse(r#"{"family":"koebe"}"#).unwrap(), FunctionSpec::Koebe {});
        let m = FunctionSpec::parse(r#"{"family":"mobius_spiral","c":[0.3,0.0]}"#).unwrap();
        assert_eq!(m, FunctionSpec::MobiusSpiral { c: c(0.3, 0.0) });
        let h = FunctionSpec::parse(r#"{"family":"rational","num":[[0,0],[1,0]],"den":[[1,0],[-2,0],[1,0]]}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!((h.eval(c(0.5, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
        let s = FunctionSpec::parse(r#"{"family":"spiral_koebe","theta":0.3}"#).unwrap();
        assert!(s.build().is_ok());
        assert!(FunctionSpec::parse(r#"{"family":"half_plane"}"#).unwrap().build().is_ok());
    }

    #[test]
    fn function_spec_errors() {
        assert!(FunctionSpec::parse(r#"{"family":"nope"}"#).is_err());
        assert!(FunctionSpec::parse(r#"{"family":"koebe","extra":1}"#).is_err());
        assert!(FunctionSpec::parse(r#"{"family":"mobius_spiral"}"#).is_err());
        assert!(FunctionSpec::parse(r#"{"family":"rational","num":[],"den":[[1,0]]}"#).is_err());
        assert!(FunctionSpec::parse("not json").is_err());
        assert!(FunctionSpec::parse(r#"{"family":"mobius_spiral","c":[2.0,0.0]}"#).unwrap().build().is_err());
        assert!(FunctionSpec::parse(r#"{"family":"spiral_koebe","theta":2.0}"#).unwrap().build().is_err());
    }

    #[test]
    fn generator_specs() {
        let g = GeneratorSpec::parse(r#"{"family":"tanh"}"#).unwrap().build().unwrap();
        assert_eq!(g.kind(), GeneratorKind::Hyperbolic);
        let g = GeneratorSpec::parse(r#"{"family":"polynomial","coefs":[[0,0],[1,0],[-1,0]]}"#).unwrap().build().unwrap();
        assert_eq!(g.mu(), c(1.0, 0.0));
        let g = GeneratorSpec::parse(
            r#"{"family":"polynomial","coefs":[[-1,0],[0,0],[1,0]],"kind":"hyperbolic","tau":[1,0],"mu":[2,0]}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        assert_eq!(g.tau(), c(1.0, 0.0));
        let g = GeneratorSpec::parse(r#"{"family":"spirallike","fn":{"family":"koebe"},"mu":[1,0]}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!((g.value(c(0.5, 0.0)) - c(0.5 * 0.5 / 1.5, 0.0)).norm() < 1e-12);
        let k = FunctionSpec::parse(r#"{"family":"koenigs","generator":{"family":"logistic"}}"#).unwrap().build().unwrap();
        assert!((k.eval(c(0.5, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn generator_spec_errors() {
        assert!(GeneratorSpec::parse(r#"{"family":"polynomial","coefs":[[0,0],[-1,0]]}"#).unwrap().build().is_err());
        assert!(GeneratorSpec::parse(r#"{"family":"polynomial","coefs":[[-1,0],[0,0],[1,0]],"kind":"hyperbolic","tau":[1,0]}"#)
            .unwrap()
            .build()
            .is_err());
        assert!(GeneratorSpec::parse(r#"{"family":"polynomial","coefs":[[0,0],[1,0]],"kind":"parabolic"}"#).is_err());
        assert!(GeneratorSpec::parse(r#"{"family":"rational","num":[[0,0],[1,0]],"den":[[0.5,0],[1,0]]}"#)
            .unwrap()
            .build()
            .is_err());
        let g = GeneratorSpec::parse(r#"{"family":"rational","num":[[0,0],[1,0]],"den":[[2,0],[1,0]]}"#).unwrap().build();
        assert!(g.is_ok());
        let long = format!(r#"{{"family":"polynomial","coefs":[{}]}}"#, vec!["[0,0]"; 65].join(","));
        assert!(GeneratorSpec::parse(&long).is_err());
    }

    #[test]
    fn polynomial_json() {
        let q = parse_polynomial(r#"{"degree":2,"terms":[{"exps":[1,1],"coef":[1,0]}]}"#, None).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(q.eval(&[c(2.0, 0.0), c(3.0, 0.0)]).unwrap(), c(6.0, 0.0));
        let z = parse_polynomial(r#"{"degree":2,"terms":[]}"#, Some(3)).unwrap();
        assert!(z.is_zero() && z.dim() == 3);
        assert!(parse_polynomial(r#"{"degree":2,"terms":[]}"#, None).is_err());
        assert!(parse_polynomial(r#"{"degree":2,"terms":[{"exps":[1],"coef":[1,0]}]}"#, None).is_err());
        assert!(parse_polynomial(r#"{"degree":2,"terms":[{"exps":[2],"coef":[1,0]}]}"#, Some(2)).is_err());
        let back = parse_polynomial(&polynomial_to_json(&q).to_string(), None).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn cli_values() {
        assert_eq!(parse_complex("1,-2").unwrap(), c(1.0, -2.0));
        assert_eq!(parse_complex(" 0.5 ").unwrap(), c(0.5, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("nan,0").is_err());
        assert!(parse_complex("").is_err());
        assert_eq!(parse_real_list("0.1,0.5,1").unwrap(), vec![0.1, 0.5, 1.0]);
        assert!(parse_real_list("0.1,,1").is_err());
        assert_eq!(parse_grid("400,200").unwrap(), (400, 200));
        assert_eq!(parse_grid("64").unwrap(), (64, 64));
        assert!(parse_grid("0,3").is_err());
        assert!(parse_grid("-1,3").is_err());
    }
}
