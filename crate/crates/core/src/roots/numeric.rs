//! Simultaneous (Aberth–Ehrlich) root iteration with Newton polishing and
//! multiplicity detection for real-coefficient polynomials.

use num_complex::Complex64;

use super::RootError;

/// Numeric degree cap.
pub const MAX_NUMERIC_DEGREE: usize = 12;
/// Roots within `CLUSTER_RADIUS · (1 + max|root|)` always merge.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Wider radius inside which a merge is attempted and kept only if the merged
/// point passes the multiple-root derivative test.
const CANDIDATE_RADIUS: f64 = 1e-2;
/// Relative size below which `p^(k)(c)/k!` counts as vanishing in that test.
const DERIVATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct NumericRootOptions {
    /// Relative residual tolerance reported in the final check.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for NumericRootOptions {
    fn default() -> Self {
        NumericRootOptions { tol: super::DEFAULT_ROOT_TOL, max_sweeps: 200 }
    }
}

/// Polynomial with real coefficients stored low-to-high.
struct Poly<'a> {
    c: &'a [f64],
}

impl Poly<'_> {
    fn degree(&self) -> usize {
        self.c.len() - 1
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in self.c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    /// `Σ |a_k| x^k`, the scale of rounding error when evaluating at `|z| = x`.
    fn abs_bound(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * x + a.abs())
    }

    /// Taylor coefficient `p^(k)(z)/k!` and its magnitude bound at `|z|`.
    fn taylor(&self, z: Complex64, k: usize) -> (Complex64, f64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut b = 0.0;
        let x = z.norm();
        for j in (k..self.c.len()).rev() {
            let w = binom(j, k) * self.c[j];
            v = v * z + w;
            b = b * x + w.abs();
        }
        (v, b)
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Roots of a real polynomial with multiplicities. Coefficients are low-to-high
/// and the leading coefficient must be nonzero.
pub fn numeric_roots(
    coeffs: &[f64],
    opts: &NumericRootOptions,
) -> Result<Vec<(Complex64, u32)>, RootError> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    if c.len() <= 1 {
        return Err(RootError::ConstantPolynomial);
    }
    let zeros = c.iter().take_while(|&&a| a == 0.0).count();
    c.drain(..zeros);
    let mut out = Vec::new();
    if zeros > 0 {
        out.push((Complex64::new(0.0, 0.0), zeros as u32));
    }
    if c.len() == 1 {
        return Ok(out);
    }
    let degree = c.len() - 1;
    if degree > MAX_NUMERIC_DEGREE {
        return Err(RootError::DegreeTooHigh { degree, limit: MAX_NUMERIC_DEGREE });
    }
    let p = Poly { c: &c };
    let z = aberth(&p, opts)?;
    let found = cluster(&p, z)?;

    let scale = c.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let residuals: Vec<f64> = found
        .iter()
        .map(|(z, _)| p.eval_with_derivative(*z).0.norm() / (scale * z.norm().max(1.0).powi(degree as i32)))
        .collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    if worst > opts.tol {
        return Err(RootError::NonConvergence { sweeps: opts.max_sweeps, worst, residuals });
    }
    out.extend(found);
    Ok(out)
}

fn aberth(p: &Poly, opts: &NumericRootOptions) -> Result<Vec<Complex64>, RootError> {
    let n = p.degree();
    let lead = p.c[n];
    // Fujiwara-style bound on root moduli
    let radius = (1..=n)
        .map(|k| (p.c[n - k] / lead).abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    if n == 1 {
        return Ok(vec![Complex64::new(-p.c[0] / p.c[1], 0.0)]);
    }
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    for _sweep in 0..opts.max_sweeps {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pv, dv) = p.eval_with_derivative(z[i]);
            if pv.norm() <= 4.0 * eps * p.abs_bound(z[i].norm()) {
                done[i] = true;
                continue;
            }
            let ratio = pv / dv;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                // nudge off a critical point
                z[i] += Complex64::new(radius * 1e-3, radius * 1e-3);
                continue;
            }
            z[i] -= w;
            if w.norm() <= eps * z[i].norm() {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    let residuals: Vec<f64> =
        z.iter().map(|&zi| p.eval_with_derivative(zi).0.norm() / p.abs_bound(zi.norm())).collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    Err(RootError::NonConvergence { sweeps: opts.max_sweeps, worst, residuals })
}

fn polish_simple(p: &Poly, mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (pv, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 {
            break;
        }
        let next = z - pv / dv;
        if p.eval_with_derivative(next).0.norm() >= pv.norm() {
            break;
        }
        z = next;
    }
    z
}

/// Refines a candidate m-fold root by Newton on `p^(m-1)` and keeps it only if
/// `p^(k)(c)/k!` vanishes (relative to its rounding scale) for every `k < m`.
fn confirm_multiple(p: &Poly, start: Complex64, m: usize, reach: f64) -> Option<Complex64> {
    let mut c = start;
    for _ in 0..60 {
        let (num, _) = p.taylor(c, m - 1);
        let (den, _) = p.taylor(c, m);
        if den.norm() == 0.0 {
            return None;
        }
        // p^(m-1)/p^(m) in Taylor-coefficient form carries the factor 1/m
        let step = num / (den * m as f64);
        c -= step;
        if !c.re.is_finite() || (c - start).norm() > reach {
            return None;
        }
        if step.norm() <= f64::EPSILON * (1.0 + c.norm()) {
            break;
        }
    }
    for k in 0..m {
        let (v, bound) = p.taylor(c, k);
        if v.norm() > DERIVATIVE_TOL * bound {
            return None;
        }
    }
    Some(c)
}

struct Group {
    center: Complex64,
    mult: usize,
    members: Vec<Complex64>,
}

fn cluster(p: &Poly, raw: Vec<Complex64>) -> Result<Vec<(Complex64, u32)>, RootError> {
    let polished: Vec<Complex64> = raw.iter().map(|&z| polish_simple(p, z)).collect();
    let scale = 1.0 + polished.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tight = CLUSTER_RADIUS * scale;
    let loose = CANDIDATE_RADIUS * scale;

    // unconditional merges within the tight radius
    let mut groups: Vec<Group> = Vec::new();
    for z in polished {
        match groups.iter_mut().find(|g| g.members.iter().any(|w| (w - z).norm() <= tight)) {
            Some(g) => {
                g.members.push(z);
                g.mult += 1;
                g.center = g.members.iter().sum::<Complex64>() / g.mult as f64;
            }
            None => groups.push(Group { center: z, mult: 1, members: vec![z] }),
        }
    }
    for g in groups.iter_mut().filter(|g| g.mult > 1) {
        if let Some(c) = confirm_multiple(p, g.center, g.mult, loose) {
            g.center = c;
        }
    }

    // tentative merges within the candidate radius, closest pairs first
    let mut rejected: Vec<(Complex64, Complex64)> = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let d = (groups[i].center - groups[j].center).norm();
                let key = (groups[i].center, groups[j].center);
                if d <= loose
                    && !rejected.contains(&key)
                    && best.is_none_or(|(_, _, bd)| d < bd)
                {
                    best = Some((i, j, d));
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        let m = groups[i].mult + groups[j].mult;
        let members: Vec<Complex64> =
            groups[i].members.iter().chain(groups[j].members.iter()).cloned().collect();
        let centroid = members.iter().sum::<Complex64>() / m as f64;
        match confirm_multiple(p, centroid, m, loose) {
            Some(c) => {
                let gj = groups.remove(j);
                let gi = &mut groups[i];
                gi.members.extend(gj.members);
                gi.mult = m;
                gi.center = c;
            }
            None => rejected.push((groups[i].center, groups[j].center)),
        }
    }

    // conjugate symmetry for real coefficients
    for g in groups.iter_mut() {
        if g.center.im.abs() <= tight {
            g.center.im = 0.0;
        }
    }
    let mut paired = vec![false; groups.len()];
    for i in 0..groups.len() {
        if paired[i] || groups[i].center.im <= 0.0 {
            continue;
        }
        let target = groups[i].center.conj();
        let partner = (0..groups.len())
            .filter(|&j| !paired[j] && j != i && groups[j].center.im < 0.0 && groups[j].mult == groups[i].mult)
            .min_by(|&a, &b| {
                (groups[a].center - target).norm().total_cmp(&(groups[b].center - target).norm())
            });
        match partner {
            Some(j) if (groups[j].center - target).norm() <= loose => {
                let avg = (groups[i].center + groups[j].center.conj()) / 2.0;
                groups[i].center = avg;
                groups[j].center = avg.conj();
                paired[i] = true;
                paired[j] = true;
            }
            _ => return Err(RootError::Unpaired { root: format!("{}", groups[i].center) }),
        }
    }
    if let Some(g) = groups.iter().enumerate().find(|(j, g)| g.center.im < 0.0 && !paired[*j]) {
        return Err(RootError::Unpaired { root: format!("{}", g.1.center) });
    }

    Ok(groups.into_iter().map(|g| (g.center, g.mult as u32)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(roots: &[Complex64]) -> Vec<f64> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        c.iter().map(|z| z.re).collect()
    }

    #[test]
    fn double_root_with_complex_pair() {
        // (r-2)^2 (r^2+1)
        let c = expand(&[
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ]);
        let mut r = numeric_roots(&c, &NumericRootOptions::default()).unwrap();
        r.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        assert_eq!(r.len(), 3);
        assert_eq!(r[2].1, 2);
        assert!((r[2].0 - Complex64::new(2.0, 0.0)).norm() < 1e-8);
        assert_eq!((r[0].1, r[1].1), (1, 1));
        assert!((r[1].0 - Complex64::new(0.0, 1.0)).norm() < 1e-8);
        assert_eq!(r[0].0, r[1].0.conj());
    }

    #[test]
    fn close_but_distinct_roots_are_not_merged() {
        let c = expand(&[Complex64::new(1.0, 0.0), Complex64::new(1.001, 0.0)]);
        let r = numeric_roots(&c, &NumericRootOptions::default()).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn quadruple_root() {
        let c = expand(&[Complex64::new(-0.5, 0.0); 4]);
        let r = numeric_roots(&c, &NumericRootOptions::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].1, 4);
        assert!((r[0].0 - Complex64::new(-0.5, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn degree_cap() {
        let c = vec![1.0; 14];
        assert!(matches!(
            numeric_roots(&c, &NumericRootOptions::default()),
            Err(RootError::DegreeTooHigh { degree: 13, .. })
        ));
    }

    #[test]
    fn zero_roots_are_split_off() {
        let r = numeric_roots(&[0.0, 0.0, -1.0, 1.0], &NumericRootOptions::default()).unwrap();
        assert!(r.contains(&(Complex64::new(0.0, 0.0), 2)));
    }
}
