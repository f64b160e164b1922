//! Particular solutions of `y'' - a^2 x^{2n} y = q(x)` by two first-order
//! solves.
//!
//! The operator is written as `(D + u)(D - u)` with `u' + u^2 = a^2 x^{2n}`,
//! so `φ = (D - u) y` satisfies `φ' + u φ = q` and then `y' - u y = φ`. The
//! monomial choice `u = a x^n` satisfies that Riccati condition only for
//! `n = 0`; for `n >= 1` it factors `D^2 - a n x^{n-1} - a^2 x^{2n}` instead.
//! [`Factor::Riccati`] (the default) integrates `u` alongside `φ` and `y`
//! starting from `u(x0) = |a x0^n|`; [`Factor::Monomial`] keeps `u = a x^n`.
//!
//! Everything is marched left to right with classical RK4 from zero initial
//! values. Grid values are kept as compensated (hi, lo) pairs so that the
//! finite-difference residual checks are not swamped by rounding at small
//! steps.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{check_domain, Expr};

/// Largest allowed `|a x^{n+1} / (n+1)|` on the domain.
pub const OVERFLOW_EXPONENT: f64 = 700.0;
/// Default bound on the stage residuals, relative to `max(1, max|q|)`.
pub const DEFAULT_STAGE_TOL: f64 = 1e-6;
/// Number of cross-check points.
pub const PROBES: usize = 5;

/// `y'' + b x^m y + c y' = q` as read from text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCoefDescription {
    pub b: f64,
    pub m: i32,
    pub first_derivative_coeff: f64,
}

#[derive(Clone)]
pub enum Forcing {
    Expr(Expr),
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Forcing {
    pub fn func(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Forcing {
        Forcing::Func(Arc::new(f))
    }

    /// Real part of the forcing at `x`. Domain checks happen once up front in
    /// [`solve_varcoef`].
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Forcing::Expr(e) => e.terms().iter().map(|t| t.evaluate(x).re).sum(),
            Forcing::Func(f) => f(x),
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Expr(e) => write!(f, "Forcing::Expr({e})"),
            Forcing::Func(_) => write!(f, "Forcing::Func(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Factor {
    #[default]
    Riccati,
    Monomial,
}

/// `y'' - a^2 x^{2n} y = q` on `[x0, x1]`.
#[derive(Debug, Clone)]
pub struct PowerCoefODE {
    pub a: f64,
    pub n: u32,
    pub forcing: Forcing,
    pub x0: f64,
    pub x1: f64,
}

impl PowerCoefODE {
    pub fn new(a: f64, n: u32, forcing: Forcing, x0: f64, x1: f64) -> Self {
        PowerCoefODE { a, n, forcing, x0, x1 }
    }

    /// `a^2 x^{2n}`.
    pub fn potential(&self, x: f64) -> f64 {
        self.a * self.a * x.powi(2 * self.n as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VarcoefError {
    #[error("not factorable over the reals: {reason}")]
    NotFactorable { reason: String },
    #[error("step {h} too large: stage residual {residual:e} exceeds {tol:e}")]
    StepTooLarge { h: f64, residual: f64, tol: f64 },
    #[error("exp(a x^(n+1)/(n+1)) overflows on the domain (exponent {exponent:.1} > {OVERFLOW_EXPONENT}); shrink the interval")]
    OverflowGuard { exponent: f64 },
    #[error("bad domain: {0}")]
    Domain(String),
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
}

/// Matches `y'' + b x^m y = q` against `y'' - a^2 x^{2n} y = q`.
pub fn recognize_factorable(desc: &PowerCoefDescription) -> Result<(f64, u32), VarcoefError> {
    let fail = |reason: &str| Err(VarcoefError::NotFactorable { reason: reason.into() });
    if desc.first_derivative_coeff != 0.0 {
        return fail("y' term present");
    }
    if desc.b > 0.0 {
        return fail("positive coefficient: -a^2 = b has no real a");
    }
    if desc.b == 0.0 {
        return fail("no y term; this is a constant-coefficient equation");
    }
    if desc.m < 0 || desc.m % 2 != 0 {
        return fail("odd power of x");
    }
    Ok(((-desc.b).sqrt(), (desc.m / 2) as u32))
}

#[derive(Debug, Clone, Copy)]
pub struct VarcoefOptions {
    pub h: f64,
    pub factor: Factor,
    pub stage_tol: f64,
}

impl VarcoefOptions {
    pub fn with_step(h: f64) -> Self {
        VarcoefOptions { h, factor: Factor::Riccati, stage_tol: DEFAULT_STAGE_TOL }
    }
}

/// Grid samples kept as compensated (hi, lo) pairs.
#[derive(Debug, Clone, PartialEq, Default)]
struct Track {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl Track {
    fn push(&mut self, hi: f64, lo: f64) {
        self.hi.push(hi);
        self.lo.push(lo);
    }

    /// `12 h v'(x_i)` by the five-point stencil. Differences of neighbouring
    /// samples are exact, so the rounding error scales with the derivative
    /// rather than with `v / h`.
    fn d1(&self, i: usize) -> f64 {
        let d = |v: &[f64]| 8.0 * (v[i + 1] - v[i - 1]) - (v[i + 2] - v[i - 2]);
        d(&self.hi) + d(&self.lo)
    }

    /// `h^2 v''(x_i)` by the three-point stencil.
    fn d2(&self, i: usize) -> f64 {
        let d = |v: &[f64]| (v[i + 1] - v[i]) - (v[i] - v[i - 1]);
        d(&self.hi) + d(&self.lo)
    }
}

/// Max residuals of the computed grid functions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VarcoefResiduals {
    /// `φ' + u φ - q` with 4th-order centered differences.
    pub stage1: f64,
    /// `y' - u y - φ` with 4th-order centered differences.
    pub stage2: f64,
    /// `u' + u^2 - a^2 x^{2n}`; zero by construction for the monomial factor.
    pub factor: f64,
    /// `y'' - a^2 x^{2n} y - q` with 2nd-order centered differences.
    pub second_order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub x: f64,
    pub phi_grid: f64,
    pub phi_quad: f64,
    pub y_grid: f64,
    pub y_quad: f64,
}

#[derive(Debug, Clone)]
pub struct NumericSolution {
    pub x: Vec<f64>,
    pub h: f64,
    pub factor: Factor,
    u: Track,
    phi: Track,
    y: Track,
    pub residuals: VarcoefResiduals,
    pub probes: Vec<Probe>,
}

impl NumericSolution {
    pub fn phi(&self) -> &[f64] {
        &self.phi.hi
    }

    pub fn y(&self) -> &[f64] {
        &self.y.hi
    }

    pub fn u(&self) -> &[f64] {
        &self.u.hi
    }

    /// Largest relative disagreement between grid and quadrature at the probes.
    pub fn probe_error(&self) -> f64 {
        self.probes
            .iter()
            .flat_map(|p| [(p.phi_grid, p.phi_quad), (p.y_grid, p.y_quad)])
            .map(|(g, q)| (g - q).abs() / q.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

fn validate(ode: &PowerCoefODE, h: f64) -> Result<usize, VarcoefError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(VarcoefError::BadStep(h));
    }
    if !(ode.x0.is_finite() && ode.x1.is_finite() && ode.x1 > ode.x0) {
        return Err(VarcoefError::Domain(format!("need x0 < x1, got [{}, {}]", ode.x0, ode.x1)));
    }
    if !ode.a.is_finite() {
        return Err(VarcoefError::Domain(format!("a = {} is not finite", ode.a)));
    }
    if let Forcing::Expr(e) = &ode.forcing {
        let keys: Vec<(i32, u32)> = e.terms().iter().map(|t| (t.tpow, t.logpow)).collect();
        let logs = keys.iter().any(|k| k.1 > 0);
        let neg = keys.iter().any(|k| k.0 < 0);
        if (logs && ode.x0 <= 0.0) || (neg && ode.x0 <= 0.0 && ode.x1 >= 0.0) {
            return Err(VarcoefError::Domain(format!(
                "forcing is undefined on part of [{}, {}]; logarithms need x0 > 0",
                ode.x0, ode.x1
            )));
        }
        check_domain(keys.iter().copied(), ode.x0).map_err(|e| VarcoefError::Domain(e.to_string()))?;
    }
    let p = ode.n as f64 + 1.0;
    let exponent = ode.a.abs() * ode.x0.abs().max(ode.x1.abs()).powf(p) / p;
    if exponent > OVERFLOW_EXPONENT {
        return Err(VarcoefError::OverflowGuard { exponent });
    }
    let span = ode.x1 - ode.x0;
    let steps = (span / h - 1e-9).ceil().max(1.0);
    if steps > 1e8 {
        return Err(VarcoefError::BadStep(h));
    }
    Ok(steps as usize)
}

/// RK4 march of `(u, φ, y)` from zero values (and `u(x0) = |a x0^n|` for the
/// Riccati factor). The step is shrunk so the grid ends exactly at `x1`.
pub fn solve_varcoef(ode: &PowerCoefODE, opts: &VarcoefOptions) -> Result<NumericSolution, VarcoefError> {
    let steps = validate(ode, opts.h)?;
    let h = (ode.x1 - ode.x0) / steps as f64;
    let xs: Vec<f64> = (0..=steps).map(|i| if i == steps { ode.x1 } else { ode.x0 + i as f64 * h }).collect();
    let n = ode.n as i32;
    let a = ode.a;

    let rhs = |x: f64, s: [f64; 3]| -> [f64; 3] {
        let [u, phi, y] = s;
        let (u, du) = match opts.factor {
            Factor::Riccati => (u, ode.potential(x) - u * u),
            Factor::Monomial => (a * x.powi(n), 0.0),
        };
        [du, ode.forcing.eval(x) - u * phi, u * y + phi]
    };

    let u0 = match opts.factor {
        Factor::Riccati => (a * ode.x0.powi(n)).abs(),
        Factor::Monomial => a * ode.x0.powi(n),
    };
    let mut hi = [u0, 0.0, 0.0];
    let mut lo = [0.0; 3];
    let mut tracks: [Track; 3] = Default::default();
    for k in 0..3 {
        tracks[k].push(hi[k], lo[k]);
    }
    for i in 0..steps {
        let x = xs[i];
        let step = |s: [f64; 3], d: [f64; 3], c: f64| [s[0] + c * d[0], s[1] + c * d[1], s[2] + c * d[2]];
        let k1 = rhs(x, hi);
        let k2 = rhs(x + h / 2.0, step(hi, k1, h / 2.0));
        let k3 = rhs(x + h / 2.0, step(hi, k2, h / 2.0));
        let k4 = rhs(x + h, step(hi, k3, h));
        for k in 0..3 {
            let inc = h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            // Kahan-compensated accumulation
            let v = inc + lo[k];
            let t = hi[k] + v;
            lo[k] = v - (t - hi[k]);
            hi[k] = t;
            tracks[k].push(hi[k], lo[k]);
        }
        if hi.iter().any(|v| !v.is_finite()) {
            if let Some(bad) = [x, x + h / 2.0, x + h].into_iter().find(|&v| !ode.forcing.eval(v).is_finite()) {
                return Err(VarcoefError::Domain(format!("forcing is not finite at {bad}")));
            }
            return Err(VarcoefError::OverflowGuard { exponent: f64::INFINITY });
        }
    }
    let [u, phi, y] = tracks;
    let mut sol = NumericSolution {
        x: xs,
        h,
        factor: opts.factor,
        u,
        phi,
        y,
        residuals: VarcoefResiduals::default(),
        probes: Vec::new(),
    };
    sol.residuals = residual_varcoef(&sol, ode);

    let qmax = sol.x.iter().map(|&x| ode.forcing.eval(x).abs()).fold(1.0, f64::max);
    let tol = opts.stage_tol * qmax;
    let worst = sol.residuals.stage1.max(sol.residuals.stage2).max(sol.residuals.factor);
    if !(worst <= tol) {
        return Err(VarcoefError::StepTooLarge { h, residual: worst, tol });
    }
    sol.probes = cross_check(&sol, ode);
    Ok(sol)
}

/// Stage residuals on nodes `2..=N-2`, the second-order residual on
/// `1..=N-1`. Grids too short for a stencil report zero for it.
pub fn residual_varcoef(sol: &NumericSolution, ode: &PowerCoefODE) -> VarcoefResiduals {
    let n = sol.x.len() - 1;
    let h = sol.h;
    let mut r = VarcoefResiduals::default();
    let u_at = |i: usize| match sol.factor {
        Factor::Riccati => sol.u.hi[i],
        Factor::Monomial => ode.a * sol.x[i].powi(ode.n as i32),
    };
    for i in 2..n.saturating_sub(1) {
        let x = sol.x[i];
        let q = ode.forcing.eval(x);
        let (u, phi, y) = (u_at(i), sol.phi.hi[i], sol.y.hi[i]);
        let dphi = sol.phi.d1(i) / (12.0 * h);
        let dy = sol.y.d1(i) / (12.0 * h);
        r.stage1 = r.stage1.max((dphi + u * phi - q).abs());
        r.stage2 = r.stage2.max((dy - u * y - phi).abs());
        if sol.factor == Factor::Riccati {
            let du = sol.u.d1(i) / (12.0 * h);
            r.factor = r.factor.max((du + u * u - ode.potential(x)).abs());
        }
    }
    for i in 1..n {
        let x = sol.x[i];
        let d2 = sol.y.d2(i) / (h * h);
        r.second_order = r.second_order.max((d2 - ode.potential(x) * sol.y.hi[i] - ode.forcing.eval(x)).abs());
    }
    r
}

/// Integrating factor `w = exp(∫_{x0}^x u)` evaluated independently of the
/// grid: for the Riccati factor `w` solves `w'' = a^2 x^{2n} w` with
/// `w(x0) = 1`, `w'(x0) = u(x0)` and is summed from its power series; for
/// the monomial factor it is `exp(a (x^{n+1} - x0^{n+1}) / (n+1))`.
struct Weight {
    a: f64,
    n: u32,
    factor: Factor,
    x0: f64,
    alpha: f64,
    beta: f64,
}

impl Weight {
    fn new(ode: &PowerCoefODE, factor: Factor) -> Self {
        let mut w = Weight { a: ode.a, n: ode.n, factor, x0: ode.x0, alpha: 1.0, beta: 0.0 };
        if factor == Factor::Riccati {
            let u0 = (ode.a * ode.x0.powi(ode.n as i32)).abs();
            let (w1, d1, w2, d2) = w.series(ode.x0);
            // Wronskian w1 w2' - w1' w2 = 1
            w.alpha = d2 - w2 * u0;
            w.beta = -d1 + w1 * u0;
        }
        w
    }

    /// Values and derivatives of the two standard series solutions at `x`.
    fn series(&self, x: f64) -> (f64, f64, f64, f64) {
        let a2 = self.a * self.a;
        let shift = 2 * self.n as usize + 2;
        let mut out = [0.0; 4];
        for (which, start) in [(0usize, 0usize), (1, 1)] {
            // c_{k+shift} = a^2 c_k / ((k+shift)(k+shift-1))
            let mut k = start;
            let mut c = 1.0;
            let mut xk = x.powi(k as i32);
            let step = x.powi(shift as i32);
            let (mut v, mut d) = (0.0, 0.0);
            for _ in 0..10_000 {
                let term = c * xk;
                v += term;
                if k > 0 {
                    d += c * k as f64 * x.powi(k as i32 - 1);
                }
                let next = k + shift;
                c *= a2 / (next as f64 * (next - 1) as f64);
                xk *= step;
                k = next;
                if c == 0.0 || (c * xk).abs() <= 1e-17 * v.abs() && k > shift * 4 {
                    break;
                }
            }
            out[2 * which] = v;
            out[2 * which + 1] = d;
        }
        (out[0], out[1], out[2], out[3])
    }

    fn at(&self, x: f64) -> f64 {
        match self.factor {
            Factor::Monomial => {
                let p = self.n as f64 + 1.0;
                (self.a * (x.powf(p) - self.x0.powf(p)) / p).exp()
            }
            Factor::Riccati => {
                let (w1, _, w2, _) = self.series(x);
                self.alpha * w1 + self.beta * w2
            }
        }
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `φ(p) = ∫ w q / w(p)` and `y(p) = w(p) ∫ φ / w` by nested adaptive
/// Simpson at evenly spaced grid nodes.
fn cross_check(sol: &NumericSolution, ode: &PowerCoefODE) -> Vec<Probe> {
    let w = Weight::new(ode, sol.factor);
    let x0 = ode.x0;
    let phi = |p: f64| simpson(&|s| w.at(s) * ode.forcing.eval(s), x0, p, 1e-11) / w.at(p);
    let last = sol.x.len() - 1;
    let mut idx: Vec<usize> = (1..=PROBES).map(|k| (last * k + PROBES / 2) / PROBES).collect();
    idx.dedup();
    idx.into_iter()
        .filter(|&i| i > 0)
        .map(|i| {
            let p = sol.x[i];
            let y_quad = w.at(p) * simpson(&|s| phi(s) / w.at(s), x0, p, 1e-10);
            Probe { x: p, phi_grid: sol.phi.hi[i], phi_quad: phi(p), y_grid: sol.y.hi[i], y_quad }
        })
        .collect()
}
