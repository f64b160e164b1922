//! JSON shapes shared by the CLI report and the browser demo.
//!
//! Exact numbers are `{"num": "11", "den": "170"}` (decimal strings, so they
//! survive arbitrary size); approximate numbers are plain JSON floats.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::CascadeTrace;
use crate::expr::{normalize, Expr, Term};
use crate::real::{RealExpr, RealTerm, Trig};
use crate::roots::RootSet;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
#[error("malformed number in JSON: {0}")]
pub struct JsonNumberError(String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberJson {
    Rational { num: String, den: String },
    Float(f64),
}

impl NumberJson {
    fn from_rational(r: &BigRational) -> Self {
        NumberJson::Rational { num: r.numer().to_string(), den: r.denom().to_string() }
    }

    fn parts(s: &Scalar) -> (NumberJson, NumberJson) {
        match s {
            Scalar::Exact(g) => (NumberJson::from_rational(&g.re), NumberJson::from_rational(&g.im)),
            Scalar::Approx(z) => (NumberJson::Float(z.re), NumberJson::Float(z.im)),
        }
    }

    fn real(s: &Scalar) -> NumberJson {
        NumberJson::parts(s).0
    }

    fn to_rational(&self) -> Result<Option<BigRational>, JsonNumberError> {
        match self {
            NumberJson::Float(_) => Ok(None),
            NumberJson::Rational { num, den } => {
                let n: BigInt = num.parse().map_err(|_| JsonNumberError(num.clone()))?;
                let d: BigInt = den.parse().map_err(|_| JsonNumberError(den.clone()))?;
                if d == BigInt::from(0) {
                    return Err(JsonNumberError(format!("{num}/{den}")));
                }
                Ok(Some(BigRational::new(n, d)))
            }
        }
    }

    fn to_f64(&self) -> Result<f64, JsonNumberError> {
        match self {
            NumberJson::Float(v) => Ok(*v),
            NumberJson::Rational { .. } => {
                Ok(crate::scalar::rational_to_f64(&self.to_rational()?.expect("rational")))
            }
        }
    }

    /// Rebuilds a scalar from (re, im); exact only if both parts are exact.
    pub fn scalar(re: &NumberJson, im: &NumberJson) -> Result<Scalar, JsonNumberError> {
        match (re.to_rational()?, im.to_rational()?) {
            (Some(a), Some(b)) => Ok(Scalar::gauss(a, b)),
            _ => Ok(Scalar::approx(re.to_f64()?, im.to_f64()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff_re: NumberJson,
    pub coeff_im: NumberJson,
    pub tpow: i32,
    pub logpow: u32,
    pub exp_re: NumberJson,
    pub exp_im: NumberJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealTermJson {
    pub coeff: NumberJson,
    pub tpow: i32,
    pub logpow: u32,
    pub alpha: NumberJson,
    pub beta: NumberJson,
    pub trig: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootJson {
    pub re: NumberJson,
    pub im: NumberJson,
    pub mult: u32,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageJson {
    pub root_re: NumberJson,
    pub root_im: NumberJson,
    pub input: Vec<TermJson>,
    pub output: Vec<TermJson>,
}

/// Real part of a scalar, e.g. an ODE or polynomial coefficient.
pub fn real_number_to_json(s: &Scalar) -> NumberJson {
    NumberJson::real(s)
}

pub fn term_to_json(t: &Term) -> TermJson {
    let (coeff_re, coeff_im) = NumberJson::parts(&t.coeff);
    let (exp_re, exp_im) = NumberJson::parts(&t.exponent);
    TermJson { coeff_re, coeff_im, tpow: t.tpow, logpow: t.logpow, exp_re, exp_im }
}

pub fn expr_to_json(e: &Expr) -> Vec<TermJson> {
    e.terms().iter().map(term_to_json).collect()
}

/// Inverse of [`expr_to_json`]; the result is renormalized.
pub fn expr_from_json(terms: &[TermJson]) -> Result<Expr, JsonNumberError> {
    let raw = terms
        .iter()
        .map(|t| {
            Ok(Term::new(
                NumberJson::scalar(&t.coeff_re, &t.coeff_im)?,
                t.tpow,
                t.logpow,
                NumberJson::scalar(&t.exp_re, &t.exp_im)?,
            ))
        })
        .collect::<Result<Vec<_>, JsonNumberError>>()?;
    Ok(normalize(raw))
}

pub fn real_to_json(r: &RealExpr) -> Vec<RealTermJson> {
    r.terms()
        .iter()
        .map(|t| RealTermJson {
            coeff: NumberJson::real(&t.coeff),
            tpow: t.tpow,
            logpow: t.logpow,
            alpha: NumberJson::real(&t.alpha),
            beta: NumberJson::real(&t.beta),
            trig: match t.trig {
                Trig::Cos => "cos".into(),
                Trig::Sin => "sin".into(),
            },
        })
        .collect()
}

pub fn real_from_json(terms: &[RealTermJson]) -> Result<RealExpr, JsonNumberError> {
    let zero = NumberJson::Rational { num: "0".into(), den: "1".into() };
    let raw = terms
        .iter()
        .map(|t| {
            let trig = match t.trig.as_str() {
                "cos" => Trig::Cos,
                "sin" => Trig::Sin,
                other => return Err(JsonNumberError(format!("unknown trig kind {other}"))),
            };
            Ok(RealTerm {
                coeff: NumberJson::scalar(&t.coeff, &zero)?,
                tpow: t.tpow,
                logpow: t.logpow,
                alpha: NumberJson::scalar(&t.alpha, &zero)?,
                beta: NumberJson::scalar(&t.beta, &zero)?,
                trig,
            })
        })
        .collect::<Result<Vec<_>, JsonNumberError>>()?;
    Ok(RealExpr::from_terms(raw))
}

pub fn roots_to_json(roots: &RootSet) -> Vec<RootJson> {
    roots
        .entries()
        .iter()
        .map(|r| {
            let (re, im) = NumberJson::parts(&r.value);
            RootJson { re, im, mult: r.multiplicity, exact: r.exact }
        })
        .collect()
}

pub fn trace_to_json(t: &CascadeTrace) -> Vec<StageJson> {
    t.stages
        .iter()
        .map(|s| {
            let (root_re, root_im) = NumberJson::parts(&s.root);
            StageJson { root_re, root_im, input: expr_to_json(&s.input), output: expr_to_json(&s.output) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_forcing;

    #[test]
    fn exact_expr_round_trips() {
        let e = parse_forcing("11/170*exp(t)*cos(t) + 7/170*exp(t)*sin(t) - t^3*ln(t)").unwrap();
        let text = serde_json::to_string(&expr_to_json(&e)).unwrap();
        let back: Vec<TermJson> = serde_json::from_str(&text).unwrap();
        assert_eq!(expr_from_json(&back).unwrap(), e);
    }

    #[test]
    fn float_expr_round_trips_bit_exactly() {
        let e = parse_forcing("exp(-2t)*t + 1/3").unwrap().to_approx();
        let text = serde_json::to_string(&expr_to_json(&e)).unwrap();
        let back: Vec<TermJson> = serde_json::from_str(&text).unwrap();
        assert_eq!(expr_from_json(&back).unwrap(), e);
    }

    #[test]
    fn exact_numbers_serialize_as_num_den() {
        let e = Expr::constant(Scalar::from_ratio(-3, 4));
        let v = serde_json::to_value(expr_to_json(&e)).unwrap();
        assert_eq!(v[0]["coeff_re"]["num"], "-3");
        assert_eq!(v[0]["coeff_re"]["den"], "4");
    }
}
