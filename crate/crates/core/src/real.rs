//! Real-basis expressions `r · t^k · ln^m(t) · e^{αt} · {cos, sin}(βt)` and the
//! conversion from conjugate-symmetric complex-exponential sums.

use std::cmp::Ordering;

use crate::expr::{check_domain, normalize, Expr, SymbolicError, Term};
use crate::scalar::Scalar;

/// Default relative tolerance for conjugate matching in the approximate backend.
pub const DEFAULT_REALIFY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trig {
    Cos,
    Sin,
}

/// `coeff · t^tpow · ln^logpow(t) · e^{alpha·t} · trig(beta·t)`, all real, `beta >= 0`.
/// A `beta = 0` summand is always stored as `Cos`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTerm {
    pub coeff: Scalar,
    pub tpow: i32,
    pub logpow: u32,
    pub alpha: Scalar,
    pub beta: Scalar,
    pub trig: Trig,
}

impl RealTerm {
    fn cmp_key(&self, o: &RealTerm) -> Ordering {
        self.alpha
            .cmp_re_im(&o.alpha)
            .then_with(|| self.beta.cmp_re_im(&o.beta))
            .then(self.tpow.cmp(&o.tpow))
            .then(self.logpow.cmp(&o.logpow))
            .then(self.trig.cmp(&o.trig))
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let (a, b) = (self.alpha.re_f64(), self.beta.re_f64());
        let trig = match self.trig {
            Trig::Cos => (b * t).cos(),
            Trig::Sin => (b * t).sin(),
        };
        let mut v = self.coeff.re_f64() * (a * t).exp() * trig;
        if self.tpow != 0 {
            v *= t.powi(self.tpow);
        }
        if self.logpow != 0 {
            v *= t.ln().powi(self.logpow as i32);
        }
        v
    }
}

/// Canonical sum of [`RealTerm`]s, sorted by (α, β, tpow, logpow, trig).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealExpr {
    terms: Vec<RealTerm>,
}

impl RealExpr {
    pub fn zero() -> Self {
        RealExpr { terms: Vec::new() }
    }

    /// Builds a canonical real expression. Imaginary parts of the supplied
    /// scalars are ignored; `beta` is folded to be nonnegative.
    pub fn from_terms(raw: Vec<RealTerm>) -> Self {
        let mut terms: Vec<RealTerm> = raw
            .into_iter()
            .filter_map(|mut t| {
                t.coeff = t.coeff.re();
                t.alpha = t.alpha.re();
                t.beta = t.beta.re();
                if t.beta.re_is_negative() {
                    t.beta = -t.beta;
                    if t.trig == Trig::Sin {
                        t.coeff = -t.coeff;
                    }
                }
                if t.beta.is_zero() && t.trig == Trig::Sin {
                    return None;
                }
                Some(t)
            })
            .collect();
        terms.sort_by(|a, b| a.cmp_key(b));
        let mut merged: Vec<RealTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.cmp_key(&t) == Ordering::Equal => {
                    last.coeff = &last.coeff + &t.coeff
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        RealExpr { terms: merged }
    }

    pub fn terms(&self) -> &[RealTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.coeff.is_exact() && t.alpha.is_exact() && t.beta.is_exact())
    }

    /// Embeds into the complex-exponential algebra via Euler's formula.
    pub fn to_expr(&self) -> Expr {
        let mut raw = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.beta.is_zero() {
                raw.push(Term::new(t.coeff.clone(), t.tpow, t.logpow, t.alpha.clone()));
                continue;
            }
            let ib = &Scalar::i() * &t.beta;
            let plus = &t.alpha + &ib;
            let minus = &t.alpha - &ib;
            let half = Scalar::from_ratio(1, 2);
            let (cp, cm) = match t.trig {
                // r cos = r/2 e^{+} + r/2 e^{-}
                Trig::Cos => {
                    let c = &t.coeff * &half;
                    (c.clone(), c)
                }
                // r sin = r/(2i) e^{+} - r/(2i) e^{-} = -ir/2 e^{+} + ir/2 e^{-}
                Trig::Sin => {
                    let c = &(&t.coeff * &half) * &Scalar::i();
                    (-c.clone(), c)
                }
            };
            raw.push(Term::new(cp, t.tpow, t.logpow, plus));
            raw.push(Term::new(cm, t.tpow, t.logpow, minus));
        }
        normalize(raw)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, SymbolicError> {
        check_domain(self.terms.iter().map(|x| (x.tpow, x.logpow)), t)?;
        Ok(self.terms.iter().map(|x| x.evaluate(t)).sum())
    }
}

/// Rewrites a conjugate-symmetric expression in the real basis.
pub fn realify(e: &Expr) -> Result<RealExpr, SymbolicError> {
    realify_with(e, DEFAULT_REALIFY_EPS)
}

/// [`realify`] with an explicit relative tolerance for the approximate
/// backend; exact expressions must be conjugate-symmetric exactly.
pub fn realify_with(e: &Expr, eps: f64) -> Result<RealExpr, SymbolicError> {
    let exact = e.is_exact();
    let tol = eps * e.max_coeff_abs();
    let small = |s: &Scalar| if exact { s.is_zero() } else { s.abs() <= tol };
    let terms = e.terms();
    let mut used = vec![false; terms.len()];
    let mut out = Vec::new();

    for (i, t) in terms.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let im = t.exponent.im();
        if small(&im) {
            if !small(&t.coeff.im()) {
                return Err(SymbolicError::NotConjugateSymmetric {
                    reason: format!("real-exponent term {t} has a non-real coefficient"),
                });
            }
            out.push(RealTerm {
                coeff: t.coeff.re(),
                tpow: t.tpow,
                logpow: t.logpow,
                alpha: t.exponent.re(),
                beta: Scalar::zero(),
                trig: Trig::Cos,
            });
            continue;
        }
        let target = t.exponent.conj();
        let partner = terms.iter().enumerate().position(|(j, u)| {
            !used[j]
                && u.tpow == t.tpow
                && u.logpow == t.logpow
                && if exact {
                    u.exponent == target
                } else {
                    (u.exponent.to_c64() - target.to_c64()).norm()
                        <= crate::expr::EXPONENT_SNAP * (1.0 + target.abs())
                }
        });
        let Some(j) = partner else {
            return Err(SymbolicError::NotConjugateSymmetric {
                reason: format!("term {t} has no conjugate partner"),
            });
        };
        used[j] = true;
        let u = &terms[j];
        if !small(&(&u.coeff - &t.coeff.conj())) {
            return Err(SymbolicError::NotConjugateSymmetric {
                reason: format!("terms {t} and {u} have non-conjugate coefficients"),
            });
        }
        // c e^{(α+iβ)t} + c̄ e^{(α-iβ)t} = 2 Re c · e^{αt} cos βt - 2 Im c · e^{αt} sin βt,
        // taking (c, ū) averaged so both partners contribute.
        let (pos, neg) = if t.exponent.im_f64() > 0.0 { (t, u) } else { (u, t) };
        let c = &pos.coeff + &neg.coeff.conj();
        out.push(RealTerm {
            coeff: c.re(),
            tpow: t.tpow,
            logpow: t.logpow,
            alpha: pos.exponent.re(),
            beta: pos.exponent.im(),
            trig: Trig::Cos,
        });
        out.push(RealTerm {
            coeff: -c.im(),
            tpow: t.tpow,
            logpow: t.logpow,
            alpha: pos.exponent.re(),
            beta: pos.exponent.im(),
            trig: Trig::Sin,
        });
    }
    let mut r = RealExpr::from_terms(out);
    if !exact {
        let scale = r.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max);
        r.terms.retain(|t| t.coeff.abs() > crate::expr::DEFAULT_ZERO_EPS * scale);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    fn cos_sin(cc: Scalar, sc: Scalar, beta: Scalar) -> RealExpr {
        RealExpr::from_terms(vec![
            RealTerm { coeff: cc, tpow: 0, logpow: 0, alpha: q(0, 1), beta: beta.clone(), trig: Trig::Cos },
            RealTerm { coeff: sc, tpow: 0, logpow: 0, alpha: q(0, 1), beta, trig: Trig::Sin },
        ])
    }

    #[test]
    fn conjugate_denominators_collapse_to_cos_and_sin() {
        // (1/(2i)) (e^{it}/(4-2i) - e^{-it}/(4+2i))
        let k = Scalar::one() / Scalar::gauss_ratio((0, 1), (2, 1));
        let a = &k / &Scalar::gauss_ratio((4, 1), (-2, 1));
        let b = -(&k / &Scalar::gauss_ratio((4, 1), (2, 1)));
        let e = normalize(vec![
            Term::new(a, 0, 0, Scalar::i()),
            Term::new(b, 0, 0, -Scalar::i()),
        ]);
        assert_eq!(realify(&e).unwrap(), cos_sin(q(1, 10), q(1, 5), q(1, 1)));
    }

    #[test]
    fn euler_pair_is_two_cos() {
        let e = Expr::exp(Scalar::i()).add(&Expr::exp(-Scalar::i()));
        assert_eq!(realify(&e).unwrap(), cos_sin(q(2, 1), q(0, 1), q(1, 1)));
    }

    #[test]
    fn real_expression_is_unchanged() {
        let e = Expr::tpow(2).multiply(&Expr::exp(q(-2, 1)));
        let r = realify(&e).unwrap();
        assert_eq!(r.terms().len(), 1);
        assert_eq!(r.to_expr(), e);
    }

    #[test]
    fn lone_complex_exponential_is_rejected() {
        let e = Expr::exp(Scalar::i());
        assert!(matches!(realify(&e), Err(SymbolicError::NotConjugateSymmetric { .. })));
        let e = Expr::constant(Scalar::i());
        assert!(matches!(realify(&e), Err(SymbolicError::NotConjugateSymmetric { .. })));
    }

    #[test]
    fn sin_embedding_round_trips() {
        let r = cos_sin(q(3, 7), q(-2, 5), q(3, 2));
        assert_eq!(realify(&r.to_expr()).unwrap(), r);
        let v = r.evaluate(0.3).unwrap();
        let w = r.to_expr().evaluate(0.3).unwrap();
        assert!((v - w.re).abs() < 1e-14 && w.im.abs() < 1e-14);
    }

    #[test]
    fn approx_realify_drops_imaginary_noise() {
        let e = Expr::cos(q(1, 1)).to_approx();
        let noisy = e.add(&Expr::constant(Scalar::approx(0.0, 1e-14)).multiply(&Expr::exp(Scalar::approx(0.0, 1.0))));
        let r = realify(&noisy).unwrap();
        assert_eq!(r.terms().len(), 1);
        assert!((r.terms()[0].coeff.re_f64() - 1.0).abs() < 1e-12);
    }
}
