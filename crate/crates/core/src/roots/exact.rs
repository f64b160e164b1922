use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::numeric::{numeric_roots, NumericRootOptions};
use super::Root;
use crate::scalar::Scalar;

/// Candidate counts above this skip the divisor search.
const MAX_CANDIDATES: usize = 20_000;
/// Largest denominator tried when rationalizing a numeric root estimate.
const MAX_RECONSTRUCT_DEN: i64 = 1 << 20;

/// Exact roots of a rational polynomial, plus the (low-to-high) coefficients
/// of the factor that could not be split exactly.
pub(super) fn exact_roots(coeffs: &[BigRational]) -> (Vec<Root>, Vec<f64>) {
    let mut p: Vec<BigRational> = coeffs.to_vec();
    let mut found: Vec<Root> = Vec::new();
    let push = |found: &mut Vec<Root>, value: Scalar, m: u32| {
        if m > 0 {
            found.push(Root { value, multiplicity: m, exact: true });
        }
    };

    let zeros = p.iter().take_while(|c| c.is_zero()).count();
    p.drain(..zeros);
    push(&mut found, Scalar::zero(), zeros as u32);

    for c in rational_candidates(&p) {
        if p.len() <= 1 {
            break;
        }
        let m = strip_linear(&mut p, &c);
        push(&mut found, Scalar::from_rational(c), m);
    }

    if p.len() == 2 {
        let r = -&p[0] / &p[1];
        p = vec![p[1].clone()];
        push(&mut found, Scalar::from_rational(r), 1);
    } else if p.len() == 3 {
        if let Some((r1, r2)) = quadratic_roots(&p) {
            let same = r1 == r2;
            p = vec![p[2].clone()];
            if same {
                push(&mut found, r1, 2);
            } else {
                push(&mut found, r1, 1);
                push(&mut found, r2, 1);
            }
        }
    }

    // Higher-degree leftovers: rationalize numeric estimates and keep the ones
    // that divide exactly.
    while p.len() > 3 {
        let approx: Vec<f64> = p.iter().map(crate::scalar::rational_to_f64).collect();
        let Ok(estimates) = numeric_roots(&approx, &NumericRootOptions::default()) else {
            break;
        };
        let mut progress = false;
        for (z, _) in estimates {
            if p.len() <= 1 || z.im < 0.0 {
                continue;
            }
            let Some((re, im)) = rationalize(z) else { continue };
            if im.is_zero() {
                let m = strip_linear(&mut p, &re);
                if m > 0 {
                    push(&mut found, Scalar::from_rational(re), m);
                    progress = true;
                }
            } else {
                // (r - z)(r - z̄) = r^2 - 2 Re z · r + |z|^2
                let quad = [&re * &re + &im * &im, -(&re + &re), BigRational::one()];
                let m = strip_monic_quadratic(&mut p, &quad);
                if m > 0 {
                    push(&mut found, Scalar::gauss(re.clone(), im.clone()), m);
                    push(&mut found, Scalar::gauss(re, -im), m);
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
        if p.len() == 3 {
            if let Some((r1, r2)) = quadratic_roots(&p) {
                p = vec![p[2].clone()];
                if r1 == r2 {
                    push(&mut found, r1, 2);
                } else {
                    push(&mut found, r1, 1);
                    push(&mut found, r2, 1);
                }
            }
        } else if p.len() == 2 {
            let r = -&p[0] / &p[1];
            p = vec![p[1].clone()];
            push(&mut found, Scalar::from_rational(r), 1);
        }
    }

    let leftover = if p.len() > 1 { p.iter().map(crate::scalar::rational_to_f64).collect() } else { Vec::new() };
    (found, leftover)
}

fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Divides out `(r - c)` as many times as it divides; returns the count.
fn strip_linear(p: &mut Vec<BigRational>, c: &BigRational) -> u32 {
    let mut m = 0;
    while p.len() > 1 && eval(p, c).is_zero() {
        // synthetic division, high to low
        let n = p.len() - 1;
        let mut q = vec![BigRational::zero(); n];
        let mut carry = BigRational::zero();
        for k in (0..=n).rev() {
            let v = &p[k] + &carry * c;
            if k > 0 {
                q[k - 1] = v.clone();
            }
            carry = v;
        }
        *p = q;
        m += 1;
    }
    m
}

/// Divides out the monic quadratic `quad` (low-to-high) while the remainder is zero.
fn strip_monic_quadratic(p: &mut Vec<BigRational>, quad: &[BigRational; 3]) -> u32 {
    let mut m = 0;
    while p.len() >= 3 {
        let mut rem = p.clone();
        let n = rem.len() - 1;
        let mut q = vec![BigRational::zero(); n - 1];
        for k in (2..=n).rev() {
            let lead = rem[k].clone();
            q[k - 2] = lead.clone();
            rem[k] = BigRational::zero();
            rem[k - 1] -= &lead * &quad[1];
            rem[k - 2] -= &lead * &quad[0];
        }
        if rem[0].is_zero() && rem[1].is_zero() {
            *p = q;
            m += 1;
        } else {
            break;
        }
    }
    m
}

/// Roots of `c + b r + a r^2` when they are Gaussian rationals.
fn quadratic_roots(p: &[BigRational]) -> Option<(Scalar, Scalar)> {
    let (c, b, a) = (&p[0], &p[1], &p[2]);
    let disc = b * b - BigRational::from_integer(4.into()) * a * c;
    let two_a = a * BigRational::from_integer(2.into());
    let re = -b / &two_a;
    let root = rational_sqrt(&disc.abs())?;
    let off = root / &two_a;
    if disc.is_negative() {
        Some((Scalar::gauss(re.clone(), off.clone()), Scalar::gauss(re, -off)))
    } else {
        Some((Scalar::from_rational(&re + &off), Scalar::from_rational(re - off)))
    }
}

fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// ±p/q with p | a_0 and q | a_n after clearing denominators.
fn rational_candidates(p: &[BigRational]) -> Vec<BigRational> {
    if p.len() <= 1 {
        return Vec::new();
    }
    let lcm = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let (Some(a0), Some(an)) = (divisors(&ints[0]), divisors(ints.last().unwrap())) else {
        return Vec::new();
    };
    if a0.len() * an.len() * 2 > MAX_CANDIDATES {
        return Vec::new();
    }
    let mut out = Vec::new();
    for num in &a0 {
        for den in &an {
            let r = BigRational::new(num.clone(), den.clone());
            out.push(-r.clone());
            out.push(r);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Positive divisors of `n` by trial division; `None` when `|n|` is too large
/// to factor quickly.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > 1_000_000_000_000 {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(BigInt::from(d));
            if d * d != n {
                large.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small)
}

/// Best rational approximations (bounded denominator) of both parts of `z`,
/// accepted only when they land within a relative `1e-7` of the estimate.
fn rationalize(z: Complex64) -> Option<(BigRational, BigRational)> {
    let tol = 1e-7 * (1.0 + z.norm());
    let re = best_rational(z.re, tol)?;
    let im = if z.im.abs() <= tol { BigRational::zero() } else { best_rational(z.im, tol)? };
    Some((re, im))
}

fn best_rational(x: f64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // continued-fraction convergents
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_RECONSTRUCT_DEN {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol * 1e-3 {
            break;
        }
        let frac = v - a as f64;
        if frac.abs() < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 || (x - h1 as f64 / k1 as f64).abs() > tol {
        return None;
    }
    Some(BigRational::new(h1.into(), k1.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn continued_fractions_recover_small_rationals() {
        assert_eq!(best_rational(0.1, 1e-9), Some(r(1, 10)));
        assert_eq!(best_rational(-11.0 / 170.0, 1e-9), Some(r(-11, 170)));
        assert_eq!(best_rational(std::f64::consts::PI, 1e-12), None);
    }

    #[test]
    fn quadratic_division_counts_multiplicity() {
        // (r^2+1)^2 = r^4 + 2r^2 + 1
        let mut p = vec![r(1, 1), r(0, 1), r(2, 1), r(0, 1), r(1, 1)];
        let m = strip_monic_quadratic(&mut p, &[r(1, 1), r(0, 1), r(1, 1)]);
        assert_eq!(m, 2);
        assert_eq!(p, vec![r(1, 1)]);
    }

    #[test]
    fn rational_root_search_handles_fractional_coefficients() {
        // (2r - 1)(3r + 2) = 6r^2 + r - 2, scaled by 1/7
        let p = vec![r(-2, 7), r(1, 7), r(6, 7)];
        let (roots, left) = exact_roots(&p);
        assert!(left.is_empty());
        let vals: Vec<_> = roots.iter().map(|x| x.value.clone()).collect();
        assert!(vals.contains(&Scalar::from_ratio(1, 2)));
        assert!(vals.contains(&Scalar::from_ratio(-2, 3)));
    }
}
