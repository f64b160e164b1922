//! Symbolic residual checks and an independent undetermined-coefficients
//! solver used as a cross-check on the cascade.

use thiserror::Error;

use crate::expr::{normalize, Expr, Term};
use crate::ode::LinearODE;
use crate::scalar::Scalar;

/// Relative tolerance for calling an approximate residual zero.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualStatus {
    ExactZero,
    /// Approximate arithmetic; every residual coefficient is within the
    /// carried relative tolerance.
    ZeroWithinTolerance(f64),
    Nonzero,
}

impl ResidualStatus {
    /// The short tag used in JSON reports.
    pub fn tag(&self) -> &'static str {
        match self {
            ResidualStatus::ExactZero => "zero",
            ResidualStatus::ZeroWithinTolerance(_) => "zero_tol",
            ResidualStatus::Nonzero => "nonzero",
        }
    }
}

impl std::fmt::Display for ResidualStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResidualStatus::ExactZero => write!(f, "exact-zero"),
            ResidualStatus::ZeroWithinTolerance(eps) => write!(f, "zero-within-tolerance({eps:e})"),
            ResidualStatus::Nonzero => write!(f, "NONZERO"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// `L[y] - q`, normalized.
    pub expr: Expr,
    pub status: ResidualStatus,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.status != ResidualStatus::Nonzero
    }
}

/// `Σ a_k y^(k)`.
pub fn apply_operator(ode: &LinearODE, y: &Expr) -> Expr {
    let mut raw: Vec<Term> = Vec::new();
    let mut d = y.clone();
    for (k, a) in ode.coeffs().iter().enumerate() {
        if k > 0 {
            d = d.differentiate();
        }
        if !a.is_zero() {
            raw.extend(d.scale(a).into_terms());
        }
    }
    normalize(raw)
}

fn classify(diff: Expr, parts: &[&Expr], tol: f64) -> Residual {
    let exact = diff.is_exact() && parts.iter().all(|p| p.is_exact());
    let status = if diff.is_zero() {
        if exact {
            ResidualStatus::ExactZero
        } else {
            ResidualStatus::ZeroWithinTolerance(tol)
        }
    } else if exact {
        ResidualStatus::Nonzero
    } else {
        let scale = parts.iter().map(|p| p.max_coeff_abs()).fold(0.0, f64::max);
        if diff.max_coeff_abs() <= tol * scale {
            ResidualStatus::ZeroWithinTolerance(tol)
        } else {
            ResidualStatus::Nonzero
        }
    };
    Residual { expr: diff, status }
}

pub fn residual_symbolic(ode: &LinearODE, y: &Expr) -> Residual {
    residual_symbolic_with(ode, y, DEFAULT_RESIDUAL_TOL)
}

/// Approximate residuals count as zero when every coefficient of `L[y] - q`
/// is at most `tol` times the largest coefficient of `L[y]` or `q`.
pub fn residual_symbolic_with(ode: &LinearODE, y: &Expr, tol: f64) -> Residual {
    let ly = apply_operator(ode, y);
    let diff = ly.sub(ode.forcing());
    classify(diff, &[&ly, ode.forcing()], tol)
}

/// Whether `y1 - y2` is a homogeneous solution.
pub fn equal_mod_homogeneous(ode: &LinearODE, y1: &Expr, y2: &Expr) -> bool {
    equal_mod_homogeneous_with(ode, y1, y2, DEFAULT_RESIDUAL_TOL)
}

pub fn equal_mod_homogeneous_with(ode: &LinearODE, y1: &Expr, y2: &Expr, tol: f64) -> bool {
    let l1 = apply_operator(ode, y1);
    let l2 = apply_operator(ode, y2);
    let diff = apply_operator(ode, &y1.sub(y2));
    classify(diff, &[&l1, &l2], tol).is_zero()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("forcing contains ln(t); undetermined coefficients does not apply, use the cascade solver")]
    LogForcingUnsupported,
    #[error("forcing contains a negative power of t; undetermined coefficients does not apply")]
    NegativePower,
}

/// Relative size below which an approximate Taylor coefficient of `p` at a
/// forcing exponent counts as zero when determining resonance.
const RESONANCE_TOL: f64 = 1e-8;

/// A particular solution by the classical ansatz: for each exponent `λ` in
/// `q` with top power `K` and root multiplicity `s`, the coefficients of
/// `Σ_{j=s}^{s+K} A_j t^j e^{λt}` are solved top power first.
pub fn oracle_undetermined_coefficients(ode: &LinearODE, q: &Expr) -> Result<Expr, OracleError> {
    if !q.is_log_free() {
        return Err(OracleError::LogForcingUnsupported);
    }
    if q.terms().iter().any(|t| t.tpow < 0) {
        return Err(OracleError::NegativePower);
    }
    let a = ode.coeffs();
    let n = a.len() - 1;
    let mut out: Vec<Term> = Vec::new();

    let mut rest = q.terms();
    while let Some(first) = rest.first() {
        let lambda = first.exponent.clone();
        let len = rest.iter().take_while(|t| t.exponent == lambda).count();
        let (group, tail) = rest.split_at(len);
        rest = tail;

        let kmax = group.iter().map(|t| t.tpow as usize).max().unwrap_or(0);
        let mut qk = vec![Scalar::zero(); kmax + 1];
        for t in group {
            qk[t.tpow as usize] = t.coeff.clone();
        }

        // d_i = p^(i)(λ)/i!
        let d: Vec<Scalar> = (0..=n).map(|i| taylor(a, &lambda, i)).collect();
        let scale = a.iter().map(Scalar::abs).fold(0.0, f64::max) * lambda.abs().max(1.0).powi(n as i32);
        let vanishes = |c: &Scalar| if c.is_exact() { c.is_zero() } else { c.abs() <= RESONANCE_TOL * scale };
        let s = d.iter().take_while(|c| vanishes(c)).count();
        let dat = |i: usize| d.get(i).cloned().unwrap_or_else(Scalar::zero);

        // coefficient of t^k e^{λt} in L[A_j t^j e^{λt}] is A_j d_{j-k} j!/k!
        let mut coef = vec![Scalar::zero(); kmax + 1]; // coef[k] = A_{k+s}
        for k in (0..=kmax).rev() {
            let mut rhs = qk[k].clone();
            for (idx, aj) in coef.iter().enumerate().skip(k + 1) {
                let j = idx + s;
                rhs = &rhs - &(aj * &(&dat(j - k) * &falling(j, k)));
            }
            coef[k] = &rhs / &(&dat(s) * &falling(k + s, k));
        }
        for (k, c) in coef.into_iter().enumerate() {
            out.push(Term::new(c, (k + s) as i32, 0, lambda.clone()));
        }
    }
    Ok(normalize(out))
}

/// `j! / k!` for `j >= k`.
fn falling(j: usize, k: usize) -> Scalar {
    ((k + 1)..=j).fold(Scalar::one(), |acc, v| &acc * &Scalar::from_int(v as i64))
}

/// `p^(i)(z) / i!` with `p` given by low-to-high coefficients.
fn taylor(a: &[Scalar], z: &Scalar, i: usize) -> Scalar {
    let mut acc = Scalar::zero();
    for j in (i..a.len()).rev() {
        let w = &a[j] * &binom(j, i);
        acc = &(&acc * z) + &w;
    }
    acc
}

fn binom(n: usize, k: usize) -> Scalar {
    let mut num = Scalar::one();
    let mut den = Scalar::one();
    for i in 0..k {
        num = &num * &Scalar::from_int((n - i) as i64);
        den = &den * &Scalar::from_int((i + 1) as i64);
    }
    &num / &den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_forcing, parse_ode};
    use crate::real::realify;

    fn f(s: &str) -> Expr {
        parse_forcing(s).unwrap()
    }

    #[test]
    fn operator_examples() {
        let ode = parse_ode("y''+5y'+6y=exp(t)*cos(t)").unwrap();
        let y = f("1/170*exp(t)*(11*cos(t) + 7*sin(t))");
        assert_eq!(apply_operator(&ode, &y), f("exp(t)*cos(t)"));
        assert!(apply_operator(&ode, &Expr::zero()).is_zero());
        assert_eq!(residual_symbolic(&ode, &y).status, ResidualStatus::ExactZero);

        let ode = parse_ode("y''-4y'+4y=t^3*exp(2t)").unwrap();
        assert_eq!(apply_operator(&ode, &f("1/20*t^5*exp(2t)")), f("t^3*exp(2t)"));
    }

    #[test]
    fn nonzero_residual_is_flagged() {
        let ode = parse_ode("y''-2y'+5y=sin(t)").unwrap();
        let r = residual_symbolic(&ode, &f("t"));
        assert_eq!(r.status, ResidualStatus::Nonzero);
        assert_eq!(r.expr, f("-2 + 5t - sin(t)"));
    }

    #[test]
    fn homogeneous_equivalence() {
        let ode = parse_ode("y''-4y'+4y=t^3*exp(2t)").unwrap();
        let y1 = f("1/20*t^5*exp(2t)");
        assert!(equal_mod_homogeneous(&ode, &y1, &y1));
        let y2 = f("1/20*t^5*exp(2t) + exp(2t) + t*exp(2t)");
        assert!(equal_mod_homogeneous(&ode, &y1, &y2));
        assert!(!equal_mod_homogeneous(&ode, &y1, &y1.add(&f("t"))));
    }

    #[test]
    fn oracle_distinct_roots() {
        let ode = parse_ode("y''+5y'+6y=exp(t)*cos(t)").unwrap();
        let y = oracle_undetermined_coefficients(&ode, ode.forcing()).unwrap();
        let want = f("11/170*exp(t)*cos(t) + 7/170*exp(t)*sin(t)");
        assert_eq!(realify(&y).unwrap(), realify(&want).unwrap());
    }

    #[test]
    fn oracle_resonant() {
        let ode = parse_ode("y''-4y'+4y=t^3*exp(2t)").unwrap();
        let y = oracle_undetermined_coefficients(&ode, ode.forcing()).unwrap();
        assert_eq!(y, f("1/20*t^5*exp(2t)"));
    }

    #[test]
    fn oracle_mixed_groups() {
        let ode = parse_ode("y'''-6y''+11y'-6y = t^2 + exp(t) + t*exp(4t)").unwrap();
        let y = oracle_undetermined_coefficients(&ode, ode.forcing()).unwrap();
        assert_eq!(residual_symbolic(&ode, &y).status, ResidualStatus::ExactZero);
    }

    #[test]
    fn oracle_approximate_backend() {
        let ode = parse_ode("y''-4y'+4y=t*exp(2t) + 3").unwrap().to_approx();
        let y = oracle_undetermined_coefficients(&ode, ode.forcing()).unwrap();
        assert!(residual_symbolic(&ode, &y).is_zero());
    }

    #[test]
    fn oracle_rejects_logs() {
        let ode = parse_ode("y''+4y'+4y=exp(-2t)*ln(t)").unwrap();
        assert_eq!(
            oracle_undetermined_coefficients(&ode, ode.forcing()),
            Err(OracleError::LogForcingUnsupported)
        );
    }
}
