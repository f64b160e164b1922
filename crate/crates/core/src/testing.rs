//! Random problem generators for property tests and benchmarks. All
//! generators take the caller's RNG so runs are reproducible from a seed.

use num_complex::Complex64;
use rand::Rng;

use crate::expr::{normalize, Expr, Term};
use crate::ode::{LinearODE, Variable};
use crate::roots::CharPoly;
use crate::scalar::Scalar;

/// `p/q` with `|p| <= 4`, `q <= 4`.
pub fn small_rational<R: Rng>(rng: &mut R) -> Scalar {
    Scalar::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=4))
}

fn nonzero_rational<R: Rng>(rng: &mut R) -> Scalar {
    loop {
        let r = small_rational(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Gaussian rational with small parts; real with probability one half.
pub fn small_gauss<R: Rng>(rng: &mut R) -> Scalar {
    let re = small_rational(rng);
    if rng.gen_bool(0.5) {
        re
    } else {
        &re + &(&nonzero_rational(rng) * &Scalar::i())
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub ode: LinearODE,
    /// Planted roots with repeats, in generation order.
    pub roots: Vec<Scalar>,
    /// Some forcing exponent coincides with a root.
    pub resonant: bool,
}

impl Problem {
    pub fn is_log_free(&self) -> bool {
        self.ode.forcing().is_log_free()
    }
}

/// Conjugate-closed root multiset of size `order` with random multiplicities.
pub fn random_roots<R: Rng>(rng: &mut R, order: usize) -> Vec<Scalar> {
    let mut roots: Vec<Scalar> = Vec::with_capacity(order);
    while roots.len() < order {
        let room = order - roots.len();
        if room >= 2 && rng.gen_bool(0.35) {
            let z = &small_rational(rng) + &(&nonzero_rational(rng) * &Scalar::i());
            let m = if room >= 4 && rng.gen_bool(0.25) { 2 } else { 1 };
            for _ in 0..m {
                roots.push(z.clone());
                roots.push(z.conj());
            }
        } else {
            let r = match roots.iter().find(|r| r.is_real()) {
                Some(prev) if rng.gen_bool(0.3) => prev.clone(),
                _ => small_rational(rng),
            };
            let m = rng.gen_range(1..=room.min(3));
            roots.extend(std::iter::repeat_n(r, m));
        }
    }
    roots
}

fn ode_from_roots<R: Rng>(rng: &mut R, roots: &[Scalar], forcing: Expr) -> LinearODE {
    let leading = nonzero_rational(rng);
    let p = CharPoly::from_roots(&leading, roots);
    LinearODE::new(p.coeffs().to_vec(), forcing, Variable::T).expect("conjugate-closed roots give real coefficients")
}

/// Exp-poly forcing with `1..=max_terms` terms; each exponent is a root with
/// probability `p_resonant`.
pub fn random_forcing<R: Rng>(rng: &mut R, roots: &[Scalar], max_terms: usize, p_resonant: f64) -> Expr {
    let count = rng.gen_range(1..=max_terms);
    let raw = (0..count)
        .map(|_| {
            let exponent = if !roots.is_empty() && rng.gen_bool(p_resonant) {
                roots[rng.gen_range(0..roots.len())].clone()
            } else {
                small_gauss(rng)
            };
            Term::new(small_gauss(rng), rng.gen_range(0..=3), 0, exponent)
        })
        .collect();
    normalize(raw)
}

/// Order `1..=max_order`. About one problem in eight has logarithmic forcing
/// on a single repeated real root, the only shape the cascade closes on.
pub fn random_problem<R: Rng>(rng: &mut R, max_order: usize) -> Problem {
    let order = rng.gen_range(1..=max_order);
    if rng.gen_bool(0.125) {
        let lambda = small_rational(rng);
        let roots = vec![lambda.clone(); order];
        let count = rng.gen_range(1..=3);
        let mut raw: Vec<Term> = (0..count)
            .map(|_| Term::new(small_gauss(rng), rng.gen_range(0..=3), rng.gen_range(0..=2), lambda.clone()))
            .collect();
        raw.push(Term::new(nonzero_rational(rng), rng.gen_range(0..=2), 1, lambda.clone()));
        let forcing = normalize(raw);
        let ode = ode_from_roots(rng, &roots, forcing);
        return Problem { ode, roots, resonant: true };
    }
    let roots = random_roots(rng, order);
    let forcing = random_forcing(rng, &roots, 6, 0.4);
    let resonant = forcing.terms().iter().any(|t| roots.contains(&t.exponent));
    let ode = ode_from_roots(rng, &roots, forcing);
    Problem { ode, roots, resonant }
}

/// Like [`random_problem`] with no logarithms and at least one resonant term.
pub fn random_resonant_problem<R: Rng>(rng: &mut R, max_order: usize) -> Problem {
    let order = rng.gen_range(1..=max_order);
    let roots = random_roots(rng, order);
    let mut forcing = random_forcing(rng, &roots, 5, 0.3);
    let r = roots[rng.gen_range(0..roots.len())].clone();
    forcing = forcing.add(&Expr::from_term(Term::new(nonzero_rational(rng), rng.gen_range(0..=3), 0, r)));
    let resonant = forcing.terms().iter().any(|t| roots.contains(&t.exponent));
    let ode = ode_from_roots(rng, &roots, forcing);
    Problem { ode, roots, resonant }
}

/// Sums of terms on which the antiderivative is defined: pure powers and
/// logs (including negative powers of `t`) or exponentials times
/// nonnegative powers.
pub fn random_antiderivable<R: Rng>(rng: &mut R) -> Expr {
    let count = rng.gen_range(1..=5);
    let raw = (0..count)
        .map(|_| {
            if rng.gen_bool(0.4) {
                Term::new(small_gauss(rng), rng.gen_range(-3..=4), rng.gen_range(0..=2), Scalar::zero())
            } else {
                let mut lambda = small_gauss(rng);
                if lambda.is_zero() {
                    lambda = Scalar::one();
                }
                Term::new(small_gauss(rng), rng.gen_range(0..=4), 0, lambda)
            }
        })
        .collect();
    normalize(raw)
}

/// Monic real polynomial (low-to-high `f64` coefficients) of degree
/// `1..=max_degree` with planted roots on a 1/8 grid, pairwise separated by
/// at least 0.1. Dyadic roots keep the coefficients exact in `f64` for
/// moderate degrees.
pub fn planted_polynomial<R: Rng>(rng: &mut R, max_degree: usize) -> (Vec<f64>, Vec<Complex64>) {
    let degree = rng.gen_range(1..=max_degree);
    let grid = |rng: &mut R, lo: i64, hi: i64| Scalar::from_ratio(rng.gen_range(lo..=hi), 8);
    let mut roots: Vec<Scalar> = Vec::new();
    let far = |roots: &[Scalar], z: &Scalar| roots.iter().all(|r| (r.to_c64() - z.to_c64()).norm() >= 0.1);
    while roots.len() < degree {
        let candidate = if degree - roots.len() >= 2 && rng.gen_bool(0.4) {
            let z = &grid(rng, -20, 20) + &(&grid(rng, 1, 20) * &Scalar::i());
            vec![z.clone(), z.conj()]
        } else {
            vec![grid(rng, -24, 24)]
        };
        if candidate.iter().all(|z| far(&roots, z)) {
            roots.extend(candidate);
        }
    }
    let p = CharPoly::from_roots(&Scalar::one(), &roots);
    let coeffs = p.coeffs().iter().map(Scalar::re_f64).collect();
    (coeffs, roots.iter().map(Scalar::to_c64).collect())
}
