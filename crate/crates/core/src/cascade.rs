//! Particular solutions by factoring `p(D) = a_n ∏ (D - r_i)` and solving one
//! first-order equation per factor, outermost first.

use thiserror::Error;

use crate::expr::{Expr, SymbolicError, Term};
use crate::ode::LinearODE;
use crate::real::{realify, RealExpr};
use crate::roots::{characteristic, find_roots, CharPoly, RootError, RootSet, DEFAULT_ROOT_TOL};
use crate::scalar::Scalar;
use crate::verify::{residual_symbolic_with, Residual, DEFAULT_RESIDUAL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeStage {
    pub root: Scalar,
    pub input: Expr,
    pub output: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrace {
    pub stages: Vec<CascadeStage>,
    /// The forcing was divided by this before the first stage.
    pub leading: Scalar,
    pub particular: Expr,
    pub real: Option<RealExpr>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error("stage {stage} (root {root}): integrand has no closed form in the exp-poly-log algebra ({} offending term(s))", terms.len())]
    NotClosedForm { stage: usize, root: Scalar, terms: Vec<Term> },
    #[error("leading coefficient is zero")]
    ZeroLeading,
}

/// `φ = e^{rt} ∫ e^{-rt} g dt`, constant of integration omitted.
pub fn solve_first_order(r: &Scalar, g: &Expr) -> Result<Expr, SymbolicError> {
    let integrand = g.shift_exponent(&-r);
    Ok(integrand.antiderivative()?.shift_exponent(r))
}

/// Runs the stages over `roots` in the given order. Stage numbers in errors
/// are 1-based.
pub fn cascade(roots: &[Scalar], q: &Expr, leading: &Scalar) -> Result<CascadeTrace, CascadeError> {
    if leading.is_zero() {
        return Err(CascadeError::ZeroLeading);
    }
    let mut g = q.scale(&leading.recip());
    let mut stages = Vec::with_capacity(roots.len());
    for (i, r) in roots.iter().enumerate() {
        let phi = solve_first_order(r, &g).map_err(|e| match e {
            SymbolicError::NotClosedForm { terms } => {
                CascadeError::NotClosedForm { stage: i + 1, root: r.clone(), terms }
            }
            other => unreachable!("antiderivative only fails with NotClosedForm: {other}"),
        })?;
        stages.push(CascadeStage { root: r.clone(), input: g, output: phi.clone() });
        g = phi;
    }
    Ok(CascadeTrace { stages, leading: leading.clone(), particular: g, real: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Exact arithmetic wherever the inputs and roots allow it.
    #[default]
    Auto,
    /// Everything in complex floating point.
    Float,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub mode: Mode,
    pub root_tol: f64,
    pub residual_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::Auto, root_tol: DEFAULT_ROOT_TOL, residual_tol: DEFAULT_RESIDUAL_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("root finding: {0}")]
    Roots(#[from] RootError),
    #[error("cascade: {0}")]
    Cascade(#[from] CascadeError),
    #[error("realification: {0}")]
    Realify(SymbolicError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub ode: LinearODE,
    pub poly: CharPoly,
    pub roots: RootSet,
    pub trace: CascadeTrace,
    pub residual: Residual,
}

impl Solution {
    pub fn particular(&self) -> &Expr {
        &self.trace.particular
    }

    pub fn real(&self) -> Option<&RealExpr> {
        self.trace.real.as_ref()
    }
}

/// Characteristic polynomial, roots, cascade, realification (for real
/// forcing) and the symbolic residual check.
pub fn particular_solution(ode: &LinearODE, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let ode = match opts.mode {
        Mode::Auto => ode.clone(),
        Mode::Float => ode.to_approx(),
    };
    let poly = characteristic(&ode);
    let roots = find_roots(&poly, opts.root_tol)?;
    let mut trace = cascade(&roots.expanded(), ode.forcing(), ode.leading())?;
    if realify(ode.forcing()).is_ok() {
        trace.real = Some(realify(&trace.particular).map_err(SolveError::Realify)?);
    }
    let residual = residual_symbolic_with(&ode, &trace.particular, opts.residual_tol);
    Ok(Solution { ode, poly, roots, trace, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_forcing, parse_ode};
    use crate::verify::ResidualStatus;

    fn f(s: &str) -> Expr {
        parse_forcing(s).unwrap()
    }

    fn int(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn first_order_examples() {
        assert_eq!(solve_first_order(&int(2), &f("t^3*exp(2t)")).unwrap(), f("t^4/4*exp(2t)"));
        assert_eq!(
            solve_first_order(&int(-2), &f("exp(-2t)*ln(t)")).unwrap(),
            f("exp(-2t)*(t*ln(t) - t)")
        );
        assert_eq!(solve_first_order(&int(0), &f("1")).unwrap(), f("t"));
    }

    #[test]
    fn repeated_root_cascade() {
        let tr = cascade(&[int(2), int(2)], &f("t^3*exp(2t)"), &int(1)).unwrap();
        assert_eq!(tr.particular, f("1/20*t^5*exp(2t)"));
        assert_eq!(tr.stages[0].output, tr.stages[1].input);
    }

    #[test]
    fn distinct_roots_with_trig_forcing() {
        let tr = cascade(&[int(-2), int(-3)], &f("exp(t)*cos(t)"), &int(1)).unwrap();
        let real = realify(&tr.particular).unwrap();
        let want = realify(&f("11/170*exp(t)*cos(t) + 7/170*exp(t)*sin(t)")).unwrap();
        assert_eq!(real, want);
    }

    #[test]
    fn third_order_oracle_value() {
        // p(4) = (4-1)(4-2)(4-3) = 6
        let tr = cascade(&[int(3), int(2), int(1)], &f("exp(4t)"), &int(1)).unwrap();
        assert_eq!(tr.particular, f("exp(4t)/6"));
    }

    #[test]
    fn leading_coefficient_divides_the_forcing() {
        let tr = cascade(&[int(0)], &f("6"), &int(3)).unwrap();
        assert_eq!(tr.stages[0].input, f("2"));
        assert_eq!(tr.particular, f("2t"));
    }

    #[test]
    fn stages_satisfy_their_equations() {
        let tr = cascade(&[int(1), Scalar::i(), -Scalar::i()], &f("t^2*exp(t) + sin(t)"), &int(1)).unwrap();
        for s in &tr.stages {
            let lhs = s.output.differentiate().sub(&s.output.scale(&s.root));
            assert_eq!(lhs, s.input);
        }
    }

    #[test]
    fn log_clash_names_the_stage() {
        match cascade(&[int(-2), int(-3)], &f("exp(t)*ln(t)"), &int(1)) {
            Err(CascadeError::NotClosedForm { stage, root, .. }) => {
                assert_eq!(stage, 1);
                assert_eq!(root, int(-2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pipeline_complex_roots() {
        let s = particular_solution(&parse_ode("y''-2y'+5y=sin(t)").unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(s.residual.status, ResidualStatus::ExactZero);
        let want = realify(&f("1/10*cos(t) + 1/5*sin(t)")).unwrap();
        assert_eq!(s.real(), Some(&want));
    }

    #[test]
    fn pipeline_log_forcing() {
        let s = particular_solution(&parse_ode("y''+4y'+4y=exp(-2t)*ln(t)").unwrap(), &SolveOptions::default())
            .unwrap();
        assert_eq!(s.residual.status, ResidualStatus::ExactZero);
        assert_eq!(s.particular(), &f("1/4*t^2*exp(-2t)*(2*ln(t) - 3)"));
        assert_eq!(s.trace.stages[0].output, f("exp(-2t)*(t*ln(t) - t)"));
    }

    #[test]
    fn pipeline_zero_forcing() {
        let s = particular_solution(&parse_ode("y''+y=0").unwrap(), &SolveOptions::default()).unwrap();
        assert!(s.particular().is_zero());
        assert_eq!(s.residual.status, ResidualStatus::ExactZero);
    }

    #[test]
    fn float_mode_matches_exact() {
        let ode = parse_ode("y''+5y'+6y=exp(t)*cos(t)").unwrap();
        let exact = particular_solution(&ode, &SolveOptions::default()).unwrap();
        let opts = SolveOptions { mode: Mode::Float, ..SolveOptions::default() };
        let float = particular_solution(&ode, &opts).unwrap();
        assert_eq!(float.residual.status, ResidualStatus::ZeroWithinTolerance(DEFAULT_RESIDUAL_TOL));
        assert!(float.particular().approx_eq(&exact.particular().to_approx(), 1e-12));
    }

    #[test]
    fn irrational_roots_fall_back_to_floats() {
        let s = particular_solution(&parse_ode("y''-2y=exp(t)").unwrap(), &SolveOptions::default()).unwrap();
        assert!(s.residual.is_zero());
        // e^t / (1 - 2)
        let v = s.particular().evaluate(0.0).unwrap();
        assert!((v.re + 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }
}
