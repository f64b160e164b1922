//! Characteristic polynomials and their roots.
//!
//! Roots are found exactly whenever possible: rational roots by divisor
//! search, Gaussian-rational roots of a leftover quadratic by the closed form,
//! and any further Gaussian-rational roots by rationalizing numeric estimates
//! and confirming them with exact polynomial division. Whatever remains is
//! located numerically.

mod exact;
mod numeric;

use num_complex::Complex64;
use num_rational::BigRational;
use thiserror::Error;

use crate::ode::LinearODE;
use crate::scalar::Scalar;

pub use numeric::{numeric_roots, NumericRootOptions, CLUSTER_RADIUS, MAX_NUMERIC_DEGREE};

/// Default residual tolerance for approximate roots.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("root iteration did not converge after {sweeps} sweeps (worst relative residual {worst:e})")]
    NonConvergence { sweeps: usize, worst: f64, residuals: Vec<f64> },
    #[error("numeric root finding supports degree <= {limit}, got {degree}")]
    DegreeTooHigh { degree: usize, limit: usize },
    #[error("polynomial has degree 0")]
    ConstantPolynomial,
    #[error("complex root {root} has no conjugate partner")]
    Unpaired { root: String },
}

/// `p(r) = a_n r^n + … + a_0` with real coefficients stored low-to-high.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    coeffs: Vec<Scalar>,
}

impl CharPoly {
    /// `coeffs[k]` multiplies `r^k`; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        CharPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> &Scalar {
        self.coeffs.last().expect("nonempty")
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_exact)
    }

    pub fn eval(&self, r: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * r) + c;
        }
        acc
    }

    pub fn eval_c64(&self, r: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * r + c.to_c64())
    }

    pub fn derivative(&self) -> CharPoly {
        if self.coeffs.len() <= 1 {
            return CharPoly::new(vec![Scalar::zero()]);
        }
        CharPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &Scalar::from_int(k as i64))
                .collect(),
        )
    }

    /// `leading · ∏ (r - r_i)` over a root sequence (repeats allowed).
    pub fn from_roots(leading: &Scalar, roots: &[Scalar]) -> CharPoly {
        let mut c = vec![leading.clone()];
        for r in roots {
            let mut next = vec![Scalar::zero(); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] = &next[k + 1] + ck;
                next[k] = &next[k] - &(ck * r);
            }
            c = next;
        }
        CharPoly::new(c)
    }

    pub fn to_approx(&self) -> CharPoly {
        CharPoly { coeffs: self.coeffs.iter().map(Scalar::to_approx).collect() }
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(Scalar::abs).fold(0.0, f64::max)
    }
}

/// The characteristic polynomial: coefficients copied in order.
pub fn characteristic(ode: &LinearODE) -> CharPoly {
    CharPoly::new(ode.coeffs().to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub value: Scalar,
    pub multiplicity: u32,
    pub exact: bool,
}

/// Distinct roots with multiplicities, sorted descending by (Re, Im).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    entries: Vec<Root>,
}

impl RootSet {
    pub fn new(mut entries: Vec<Root>) -> Self {
        entries.sort_by(|a, b| b.value.cmp_re_im(&a.value));
        RootSet { entries }
    }

    pub fn entries(&self) -> &[Root] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(|r| r.multiplicity as usize).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|r| r.exact)
    }

    /// Each root repeated by its multiplicity, repeated roots consecutive, in
    /// the set's descending order.
    pub fn expanded(&self) -> Vec<Scalar> {
        self.entries
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value.clone(), r.multiplicity as usize))
            .collect()
    }

    pub fn reconstruct(&self, leading: &Scalar) -> CharPoly {
        CharPoly::from_roots(leading, &self.expanded())
    }
}

/// All roots of `p`, exact where the coefficients allow it.
pub fn find_roots(p: &CharPoly, tol: f64) -> Result<RootSet, RootError> {
    if p.degree() == 0 {
        return Err(RootError::ConstantPolynomial);
    }
    let rationals: Option<Vec<BigRational>> =
        p.coeffs().iter().map(|c| c.as_rational().cloned()).collect();
    let (mut entries, leftover) = match rationals {
        Some(q) => exact::exact_roots(&q),
        None => (Vec::new(), p.coeffs().iter().map(Scalar::re_f64).collect()),
    };
    if leftover.len() > 1 {
        let opts = NumericRootOptions { tol, ..NumericRootOptions::default() };
        for (z, m) in numeric_roots(&leftover, &opts)? {
            entries.push(Root { value: Scalar::from_c64(z), multiplicity: m, exact: false });
        }
    }
    Ok(RootSet::new(entries))
}

/// Numeric path only, ignoring exactness of the coefficients.
pub fn find_roots_numeric(p: &CharPoly, tol: f64) -> Result<RootSet, RootError> {
    find_roots(&p.to_approx(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> CharPoly {
        CharPoly::new(c.iter().map(|&v| Scalar::from_int(v)).collect())
    }

    fn root(re: i64, im: i64, m: u32) -> Root {
        Root { value: Scalar::gauss_ratio((re, 1), (im, 1)), multiplicity: m, exact: true }
    }

    #[test]
    fn distinct_real_roots() {
        let r = find_roots(&poly(&[6, 5, 1]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.entries(), &[root(-2, 0, 1), root(-3, 0, 1)]);
    }

    #[test]
    fn repeated_root() {
        let r = find_roots(&poly(&[4, -4, 1]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.entries(), &[root(2, 0, 2)]);
    }

    #[test]
    fn complex_pair() {
        let r = find_roots(&poly(&[5, -2, 1]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.entries(), &[root(1, 2, 1), root(1, -2, 1)]);
        assert_eq!(r.expanded().len(), 2);
    }

    #[test]
    fn degree_one() {
        let r = find_roots(&poly(&[0, 1]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.entries(), &[root(0, 0, 1)]);
    }

    #[test]
    fn gaussian_pairs_beyond_quadratic_are_exact() {
        // (r^2 + 1)^2 (r^2 - r + 5/2): roots ±i (double), 1/2 ± 3/2 i
        let a = CharPoly::from_roots(
            &Scalar::one(),
            &[
                Scalar::i(),
                Scalar::i(),
                -Scalar::i(),
                -Scalar::i(),
                Scalar::gauss_ratio((1, 2), (3, 2)),
                Scalar::gauss_ratio((1, 2), (-3, 2)),
            ],
        );
        let r = find_roots(&a, DEFAULT_ROOT_TOL).unwrap();
        assert!(r.is_exact(), "{r:?}");
        assert_eq!(r.reconstruct(&Scalar::one()), a);
    }

    #[test]
    fn irrational_roots_fall_back_to_numeric() {
        // r^2 - 2
        let r = find_roots(&poly(&[-2, 0, 1]), DEFAULT_ROOT_TOL).unwrap();
        assert!(!r.is_exact());
        let v = r.entries()[0].value.re_f64();
        assert!((v - 2f64.sqrt()).abs() < 1e-14);
        // mixed: (r - 3)(r^2 - 2)
        let r = find_roots(&poly(&[6, -2, -3, 1]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.entries()[0], root(3, 0, 1));
        assert!(!r.entries()[1].exact);
    }

    #[test]
    fn reconstruction_is_exact() {
        let p = poly(&[-2, 5, -3, -1, 1]); // (r-1)^3 (r+2)
        let r = find_roots(&p, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.entries(), &[root(1, 0, 3), root(-2, 0, 1)]);
        assert_eq!(r.reconstruct(p.leading()), p);
    }

    #[test]
    fn planted_multiplicities_on_numeric_path() {
        let p = poly(&[-2, 5, -3, -1, 1]);
        let r = find_roots_numeric(&p, DEFAULT_ROOT_TOL).unwrap();
        let mults: Vec<u32> = r.entries().iter().map(|e| e.multiplicity).collect();
        assert_eq!(mults, vec![3, 1]);
        assert!((r.entries()[0].value.to_c64() - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!((r.entries()[1].value.to_c64() - Complex64::new(-2.0, 0.0)).norm() < 1e-8);
    }
}
