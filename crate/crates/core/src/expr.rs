//! The exponential-polynomial-logarithm function algebra.
//!
//! Every function handled by the solver is a finite sum of basis terms
//! `c · t^k · ln^m(t) · e^{λt}`. The set is closed under addition,
//! multiplication and differentiation, and closed under antidifferentiation
//! except when a term carries both a nonzero exponent and a logarithm (or a
//! negative power of `t`).

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::scalar::Scalar;

/// Relative zero threshold used by the approximate backend.
pub const DEFAULT_ZERO_EPS: f64 = 1e-12;

/// Approximate exponents closer than `EXPONENT_SNAP · (1 + |λ|)` are the same key.
pub const EXPONENT_SNAP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolicError {
    #[error("no closed-form antiderivative for {}", list_terms(.terms))]
    NotClosedForm { terms: Vec<Term> },
    #[error("expression does not represent a real function: {reason}")]
    NotConjugateSymmetric { reason: String },
    #[error("expression is undefined at t = {t} (logarithm or negative power of t)")]
    Domain { t: f64 },
}

fn list_terms(terms: &[Term]) -> String {
    terms.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// One summand `coeff · t^tpow · ln^logpow(t) · e^{exponent·t}`.
///
/// `tpow` is signed so that differentiating `ln t` (which yields `1/t`) stays
/// inside the algebra; every parsed input and every cascade output has
/// `tpow >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Scalar,
    pub tpow: i32,
    pub logpow: u32,
    pub exponent: Scalar,
}

impl Term {
    pub fn new(coeff: Scalar, tpow: i32, logpow: u32, exponent: Scalar) -> Self {
        Term { coeff, tpow, logpow, exponent }
    }

    pub fn constant(coeff: Scalar) -> Self {
        Term::new(coeff, 0, 0, Scalar::zero())
    }

    /// Canonical key order: (Re λ, Im λ, tpow, logpow).
    pub fn cmp_key(&self, other: &Term) -> Ordering {
        self.exponent
            .cmp_re_im(&other.exponent)
            .then(self.tpow.cmp(&other.tpow))
            .then(self.logpow.cmp(&other.logpow))
    }

    pub fn same_key(&self, other: &Term) -> bool {
        self.cmp_key(other) == Ordering::Equal
    }

    pub fn is_exact(&self) -> bool {
        self.coeff.is_exact() && self.exponent.is_exact()
    }

    fn to_approx(&self) -> Term {
        Term::new(self.coeff.to_approx(), self.tpow, self.logpow, self.exponent.to_approx())
    }

    fn with_coeff(&self, coeff: Scalar) -> Term {
        Term::new(coeff, self.tpow, self.logpow, self.exponent.clone())
    }

    pub fn derivative(&self) -> Vec<Term> {
        let mut out = Vec::with_capacity(3);
        if !self.exponent.is_zero() {
            out.push(self.with_coeff(&self.coeff * &self.exponent));
        }
        if self.tpow != 0 {
            out.push(Term::new(
                &self.coeff * &Scalar::from_int(self.tpow as i64),
                self.tpow - 1,
                self.logpow,
                self.exponent.clone(),
            ));
        }
        if self.logpow != 0 {
            out.push(Term::new(
                &self.coeff * &Scalar::from_int(self.logpow as i64),
                self.tpow - 1,
                self.logpow - 1,
                self.exponent.clone(),
            ));
        }
        out
    }

    /// Antiderivative without a constant of integration, or `None` when the
    /// term has no closed form in the algebra.
    pub fn antiderivative(&self) -> Option<Vec<Term>> {
        let c = &self.coeff;
        let (k, m) = (self.tpow, self.logpow);
        if self.exponent.is_zero() {
            if k == -1 {
                let c = c / &Scalar::from_int(m as i64 + 1);
                return Some(vec![Term::new(c, 0, m + 1, self.exponent.clone())]);
            }
            // ∫ t^k ln^m t dt = t^{k+1} Σ_j (-1)^j m!/(m-j)! ln^{m-j} t / (k+1)^{j+1}
            let kp1 = Scalar::from_int(k as i64 + 1);
            let mut out = Vec::with_capacity(m as usize + 1);
            let mut factor = c / &kp1;
            for j in 0..=m {
                out.push(Term::new(factor.clone(), k + 1, m - j, self.exponent.clone()));
                factor = -(&factor * &Scalar::from_int((m - j) as i64)) / &kp1;
            }
            return Some(out);
        }
        if m != 0 || k < 0 {
            return None;
        }
        // ∫ t^k e^{μt} dt = e^{μt} Σ_j (-1)^j k!/(k-j)! t^{k-j} / μ^{j+1}
        let mu = &self.exponent;
        let mut out = Vec::with_capacity(k as usize + 1);
        let mut factor = c / mu;
        for j in 0..=k {
            out.push(Term::new(factor.clone(), k - j, 0, mu.clone()));
            factor = -(&factor * &Scalar::from_int((k - j) as i64)) / mu;
        }
        Some(out)
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut v = self.coeff.to_c64() * (self.exponent.to_c64() * t).exp();
        if self.tpow != 0 {
            v *= t.powi(self.tpow);
        }
        if self.logpow != 0 {
            v *= t.ln().powi(self.logpow as i32);
        }
        v
    }
}

/// Canonical finite sum of [`Term`]s: sorted by key, keys unique, no zero
/// coefficients. The zero function is the empty sum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expr {
    terms: Vec<Term>,
}

/// Collects raw terms into canonical form with the default zero threshold.
pub fn normalize(raw: Vec<Term>) -> Expr {
    normalize_with(raw, DEFAULT_ZERO_EPS)
}

/// Like [`normalize`] with an explicit relative zero threshold for the
/// approximate backend. Exact terms cancel only when they are exactly zero.
pub fn normalize_with(raw: Vec<Term>, eps: f64) -> Expr {
    let approx = raw.iter().any(|t| !t.is_exact());
    let mut terms: Vec<Term> = if approx {
        let mut reps: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
        raw.iter()
            .map(|t| {
                let mut t = t.to_approx();
                t.exponent = Scalar::Approx(snap_exponent(t.exponent.to_c64(), &mut reps));
                t
            })
            .collect()
    } else {
        raw
    };

    let scale = if approx {
        terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    } else {
        0.0
    };

    terms.sort_by(|a, b| a.cmp_key(b));
    let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.last_mut() {
            Some(last) if last.same_key(&t) => last.coeff = &last.coeff + &t.coeff,
            _ => merged.push(t),
        }
    }
    merged.retain(|t| {
        if approx {
            t.coeff.abs() > eps * scale
        } else {
            !t.coeff.is_zero()
        }
    });
    Expr { terms: merged }
}

fn snap_exponent(z: Complex64, reps: &mut Vec<Complex64>) -> Complex64 {
    let tol = |r: Complex64| EXPONENT_SNAP * (1.0 + r.norm());
    for r in reps.iter() {
        if (z - r).norm() <= tol(*r) {
            return *r;
        }
    }
    let z = if z.im.abs() <= tol(z) { Complex64::new(z.re, 0.0) } else { z };
    reps.push(z);
    z
}

impl Expr {
    pub fn zero() -> Expr {
        Expr { terms: Vec::new() }
    }

    pub fn constant(c: Scalar) -> Expr {
        normalize(vec![Term::constant(c)])
    }

    pub fn from_term(t: Term) -> Expr {
        normalize(vec![t])
    }

    /// `e^{λt}`
    pub fn exp(lambda: Scalar) -> Expr {
        Expr::from_term(Term::new(Scalar::one(), 0, 0, lambda))
    }

    /// `t^k`
    pub fn tpow(k: i32) -> Expr {
        Expr::from_term(Term::new(Scalar::one(), k, 0, Scalar::zero()))
    }

    /// `ln^m(t)`
    pub fn ln_pow(m: u32) -> Expr {
        Expr::from_term(Term::new(Scalar::one(), 0, m, Scalar::zero()))
    }

    /// `cos(βt)` as `(e^{iβt} + e^{-iβt}) / 2`.
    pub fn cos(beta: Scalar) -> Expr {
        let ib = &Scalar::i() * &beta;
        let half = Scalar::from_ratio(1, 2);
        normalize(vec![
            Term::new(half.clone(), 0, 0, ib.clone()),
            Term::new(half, 0, 0, -ib),
        ])
    }

    /// `sin(βt)` as `(e^{iβt} - e^{-iβt}) / (2i)`.
    pub fn sin(beta: Scalar) -> Expr {
        let ib = &Scalar::i() * &beta;
        let c = Scalar::one() / Scalar::gauss_ratio((0, 1), (2, 1));
        normalize(vec![Term::new(c.clone(), 0, 0, ib.clone()), Term::new(-c, 0, 0, -ib)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every scalar is exact. The zero expression counts as exact.
    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(Term::is_exact)
    }

    pub fn is_log_free(&self) -> bool {
        self.terms.iter().all(|t| t.logpow == 0)
    }

    /// Constant value if the expression is a (possibly zero) constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.as_slice() {
            [] => Some(Scalar::zero()),
            [t] if t.tpow == 0 && t.logpow == 0 && t.exponent.is_zero() => Some(t.coeff.clone()),
            _ => None,
        }
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    pub fn to_approx(&self) -> Expr {
        normalize(self.terms.iter().map(Term::to_approx).collect())
    }

    pub fn add(&self, other: &Expr) -> Expr {
        normalize(self.terms.iter().chain(other.terms.iter()).cloned().collect())
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn scale(&self, c: &Scalar) -> Expr {
        normalize(self.terms.iter().map(|t| t.with_coeff(&t.coeff * c)).collect())
    }

    pub fn multiply(&self, other: &Expr) -> Expr {
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                raw.push(Term::new(
                    &a.coeff * &b.coeff,
                    a.tpow + b.tpow,
                    a.logpow + b.logpow,
                    &a.exponent + &b.exponent,
                ));
            }
        }
        normalize(raw)
    }

    /// Multiplies by `e^{μt}`.
    pub fn shift_exponent(&self, mu: &Scalar) -> Expr {
        normalize(
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff.clone(), t.tpow, t.logpow, &t.exponent + mu))
                .collect(),
        )
    }

    /// Integer power by repeated multiplication (`n >= 0`).
    pub fn powi(&self, n: u32) -> Expr {
        let mut acc = Expr::constant(Scalar::one());
        for _ in 0..n {
            acc = acc.multiply(self);
        }
        acc
    }

    pub fn conj(&self) -> Expr {
        normalize(
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff.conj(), t.tpow, t.logpow, t.exponent.conj()))
                .collect(),
        )
    }

    pub fn differentiate(&self) -> Expr {
        normalize(self.terms.iter().flat_map(Term::derivative).collect())
    }

    pub fn nth_derivative(&self, n: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.differentiate();
        }
        e
    }

    /// Antiderivative with the constant of integration omitted.
    ///
    /// Fails with [`SymbolicError::NotClosedForm`] listing every term that
    /// combines a nonzero exponent with a logarithm or a negative power of `t`.
    pub fn antiderivative(&self) -> Result<Expr, SymbolicError> {
        let mut raw = Vec::new();
        let mut offending = Vec::new();
        for t in &self.terms {
            match t.antiderivative() {
                Some(ts) => raw.extend(ts),
                None => offending.push(t.clone()),
            }
        }
        if !offending.is_empty() {
            return Err(SymbolicError::NotClosedForm { terms: offending });
        }
        Ok(normalize(raw))
    }

    /// Whether [`Expr::antiderivative`] would succeed.
    pub fn is_antiderivable(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.is_zero() || (t.logpow == 0 && t.tpow >= 0))
    }

    pub fn evaluate(&self, t: f64) -> Result<Complex64, SymbolicError> {
        check_domain(self.terms.iter().map(|x| (x.tpow, x.logpow)), t)?;
        Ok(self.terms.iter().map(|x| x.evaluate(t)).sum())
    }

    /// Term-by-term comparison within a relative tolerance. Keys must match
    /// exactly after normalization; coefficients may differ by
    /// `tol · max(|coeffs|)`.
    pub fn approx_eq(&self, other: &Expr, tol: f64) -> bool {
        let diff = self.sub(other);
        if diff.is_zero() {
            return true;
        }
        let scale = self.max_coeff_abs().max(other.max_coeff_abs()).max(f64::MIN_POSITIVE);
        diff.max_coeff_abs() <= tol * scale
    }
}

pub(crate) fn check_domain(
    keys: impl Iterator<Item = (i32, u32)>,
    t: f64,
) -> Result<(), SymbolicError> {
    for (k, m) in keys {
        if (m > 0 && t <= 0.0) || (k < 0 && t == 0.0) {
            return Err(SymbolicError::Domain { t });
        }
    }
    Ok(())
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        Expr::add(self, o)
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        Expr::sub(self, o)
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        self.multiply(o)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(c: Scalar, k: i32, m: u32, l: Scalar) -> Term {
        Term::new(c, k, m, l)
    }

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn like_keys_merge() {
        let e = normalize(vec![
            term(q(2, 1), 1, 0, q(1, 1)),
            term(q(3, 1), 1, 0, q(1, 1)),
        ]);
        assert_eq!(e.terms(), &[term(q(5, 1), 1, 0, q(1, 1))]);
    }

    #[test]
    fn cancellation_gives_zero() {
        let e = normalize(vec![term(q(1, 1), 2, 0, q(0, 1)), term(q(-1, 1), 2, 0, q(0, 1))]);
        assert!(e.is_zero());
    }

    #[test]
    fn distinct_keys_stay_separate() {
        let c = Scalar::one() / Scalar::gauss_ratio((0, 1), (2, 1));
        let e = normalize(vec![
            term(c.clone(), 0, 0, Scalar::i()),
            term(-c, 0, 0, -Scalar::i()),
        ]);
        assert_eq!(e.len(), 2);
        // sorted by Im λ ascending within equal Re λ
        assert_eq!(e.terms()[0].exponent, -Scalar::i());
    }

    #[test]
    fn multiply_adds_keys() {
        let e = Expr::exp(q(2, 1)).multiply(&Expr::tpow(3));
        assert_eq!(e.terms(), &[term(q(1, 1), 3, 0, q(2, 1))]);
        let inner = Expr::exp(q(-2, 1)).multiply(&Expr::from_term(term(q(1, 4), 4, 0, q(2, 1))));
        assert_eq!(inner, Expr::from_term(term(q(1, 4), 4, 0, q(0, 1))));
    }

    #[test]
    fn derivative_examples() {
        // d/dt (t ln t - t) = ln t
        let e = normalize(vec![term(q(1, 1), 1, 1, q(0, 1)), term(q(-1, 1), 1, 0, q(0, 1))]);
        assert_eq!(e.differentiate(), Expr::ln_pow(1));
        // d/dt (e^{2t} t^4 / 4) = e^{2t}(t^3 + t^4/2)
        let e = Expr::from_term(term(q(1, 4), 4, 0, q(2, 1)));
        let want = normalize(vec![term(q(1, 1), 3, 0, q(2, 1)), term(q(1, 2), 4, 0, q(2, 1))]);
        assert_eq!(e.differentiate(), want);
        assert!(Expr::constant(q(7, 3)).differentiate().is_zero());
    }

    #[test]
    fn ln_derivative_leaves_negative_power() {
        let d = Expr::ln_pow(1).differentiate();
        assert_eq!(d.terms(), &[term(q(1, 1), -1, 0, q(0, 1))]);
        assert_eq!(d.antiderivative().unwrap(), Expr::ln_pow(1));
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(Expr::tpow(3).antiderivative().unwrap(), Expr::from_term(term(q(1, 4), 4, 0, q(0, 1))));
        // ∫ ln t = t ln t - t
        let want = normalize(vec![term(q(1, 1), 1, 1, q(0, 1)), term(q(-1, 1), 1, 0, q(0, 1))]);
        assert_eq!(Expr::ln_pow(1).antiderivative().unwrap(), want);
        // ∫ e^{4t} cos t = e^{4t}(sin t + 4 cos t)/17
        let integrand = Expr::exp(q(4, 1)).multiply(&Expr::cos(q(1, 1)));
        let want = Expr::exp(q(4, 1))
            .multiply(&Expr::sin(q(1, 1)).add(&Expr::cos(q(1, 1)).scale(&q(4, 1))))
            .scale(&q(1, 17));
        assert_eq!(integrand.antiderivative().unwrap(), want);
        // constants integrate to c·t
        assert_eq!(Expr::constant(q(3, 1)).antiderivative().unwrap(), Expr::tpow(1).scale(&q(3, 1)));
    }

    #[test]
    fn antiderivative_rejects_exp_log_mix() {
        let e = Expr::exp(q(1, 1)).multiply(&Expr::ln_pow(1));
        match e.antiderivative() {
            Err(SymbolicError::NotClosedForm { terms }) => assert_eq!(terms.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluate_examples() {
        let e = Expr::from_term(term(q(1, 4), 4, 0, q(0, 1)));
        assert_eq!(e.evaluate(2.0).unwrap().re, 4.0);
        let e = normalize(vec![term(q(1, 1), 1, 1, q(0, 1)), term(q(-1, 1), 1, 0, q(0, 1))]);
        assert_eq!(e.evaluate(1.0).unwrap().re, -1.0);
        assert!(matches!(e.evaluate(0.0), Err(SymbolicError::Domain { .. })));
        assert!(matches!(e.evaluate(-1.0), Err(SymbolicError::Domain { .. })));
    }

    #[test]
    fn approx_backend_drops_relative_noise_and_snaps_exponents() {
        let a = term(Scalar::approx(1.0, 0.0), 0, 0, Scalar::approx(2.0, 0.0));
        let b = term(Scalar::approx(-1.0 + 1e-15, 0.0), 0, 0, Scalar::approx(2.0 + 1e-14, 0.0));
        let c = term(Scalar::approx(3.0, 0.0), 1, 0, Scalar::approx(1e-13, 0.0));
        let e = normalize(vec![a, b, c]);
        assert_eq!(e.len(), 1);
        assert!(e.terms()[0].exponent.is_zero());
    }

    #[test]
    fn exact_mixed_with_approx_coerces() {
        let e = Expr::tpow(1).add(&Expr::constant(Scalar::approx(0.5, 0.0)));
        assert!(!e.is_exact());
        assert_eq!(e.len(), 2);
    }
}
