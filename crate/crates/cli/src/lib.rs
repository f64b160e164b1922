//! Command-line front end. [`run_args`] returns the exit code and both output
//! streams instead of printing, so tests can drive it in-process.

use std::fmt::Write as _;
use std::time::Instant;

use cascade_ode::cascade::{particular_solution, CascadeError, Mode, SolveError, SolveOptions, Solution};
use cascade_ode::func::parse_real_fn;
use cascade_ode::format::{format_in, plain_scalar, Style};
use cascade_ode::json::{
    expr_to_json, real_number_to_json, real_to_json, roots_to_json, trace_to_json, NumberJson, RealTermJson,
    RootJson, StageJson, TermJson,
};
use cascade_ode::ode::{LinearODE, Variable};
use cascade_ode::parse::{parse_forcing_in, parse_ode, parse_power_coef_ode, ParseError};
use cascade_ode::real::realify;
use cascade_ode::roots::{characteristic, find_roots, CharPoly, DEFAULT_ROOT_TOL};
use cascade_ode::varcoef::{
    recognize_factorable, solve_varcoef, Factor, Forcing, PowerCoefODE, VarcoefError, VarcoefOptions,
};
use cascade_ode::verify::residual_symbolic;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
/// `verify` found a nonzero residual.
pub const EXIT_VERIFY_NONZERO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NOT_CLOSED_FORM: i32 = 3;
/// `solve` produced a candidate that failed its own residual check.
pub const EXIT_NONZERO_RESIDUAL: i32 = 4;
/// Anything else: root-finder failure, numeric guards, unavailable exact mode.
pub const EXIT_FAILURE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "cascade-ode", version, about = "Particular solutions of linear ODEs by cascaded first-order factors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find and verify a particular solution, e.g. "y''+5y'+6y = exp(t)*cos(t)".
    Solve(SolveArgs),
    /// Roots of the characteristic polynomial with multiplicities.
    Roots {
        ode: String,
        #[arg(long)]
        json: bool,
    },
    /// Substitute a candidate into the equation; exit 0 iff the residual is zero.
    Verify {
        ode: String,
        candidate: String,
        #[arg(long)]
        json: bool,
    },
    /// Sample the particular solution on a uniform grid as CSV.
    Eval {
        ode: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        points: u64,
        #[arg(long)]
        float: bool,
    },
    /// Numeric particular solution of y'' - a^2 x^(2n) y = q(x) as CSV (x, phi, y).
    #[command(allow_negative_numbers = true)]
    Varcoef(VarcoefArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub ode: String,
    /// Machine-readable report.
    #[arg(long, conflicts_with = "latex")]
    pub json: bool,
    #[arg(long)]
    pub latex: bool,
    /// Fail unless the whole computation stays in exact arithmetic.
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Use floating point throughout.
    #[arg(long)]
    pub float: bool,
    /// Include the stage-by-stage derivation.
    #[arg(long)]
    pub steps: bool,
}

#[derive(Debug, Args)]
pub struct VarcoefArgs {
    #[arg(required_unless_present = "equation")]
    pub a: Option<f64>,
    #[arg(required_unless_present = "equation")]
    pub n: Option<u32>,
    #[arg(required_unless_present = "equation")]
    pub forcing: Option<String>,
    /// Read a, n and the forcing from an equation such as "y'' - 9*x^4*y = sin(x)".
    #[arg(long, conflicts_with_all = ["a", "n", "forcing"])]
    pub equation: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x1: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Use u = a x^n as the first-order factor instead of the exact one.
    #[arg(long)]
    pub monomial_factor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Outcome { code, stdout: String::new(), stderr }
    }
}

pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            if e.use_stderr() {
                Outcome::fail(code, text)
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            }
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Roots { ode, json } => cmd_roots(&ode, json),
        Command::Verify { ode, candidate, json } => cmd_verify(&ode, &candidate, json),
        Command::Eval { ode, from, to, points, float } => cmd_eval(&ode, from, to, points as usize, float),
        Command::Varcoef(a) => cmd_varcoef(&a),
    }
}

fn parse_failure(input: &str, e: &ParseError) -> Outcome {
    Outcome::fail(EXIT_PARSE, format!("{}\n", e.render(input)))
}

fn with_json_error(mut out: Outcome, json: bool, kind: &str, stage: Option<usize>) -> Outcome {
    if json {
        let v = serde_json::json!({ "error": kind, "stage": stage, "message": out.stderr.trim_end() });
        out.stdout = format!("{v}\n");
    }
    out
}

fn solve_failure(e: &SolveError, var: Variable) -> (Outcome, &'static str, Option<usize>) {
    match e {
        SolveError::Cascade(CascadeError::NotClosedForm { stage, root, terms }) => {
            let offending: Vec<String> = terms
                .iter()
                .map(|t| format_in(&cascade_ode::expr::Expr::from_term(t.clone()), Style::Plain, var))
                .collect();
            let msg = format!(
                "not closed form: stage {stage} (factor D - ({})) needs the antiderivative of {}, which leaves the exp-poly-log algebra\n",
                plain_scalar(root),
                offending.join(", ")
            );
            (Outcome::fail(EXIT_NOT_CLOSED_FORM, msg), "not_closed_form", Some(*stage))
        }
        other => (Outcome::fail(EXIT_FAILURE, format!("error: {other}\n")), "failure", None),
    }
}

/// `a_n r^n + ... + a_0` in plain syntax.
pub fn format_poly(p: &CharPoly) -> String {
    let mut out = String::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let text = plain_scalar(c);
        let (neg, mag) = match text.strip_prefix('-') {
            Some(m) => (true, m.to_string()),
            None => (false, text),
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let power = match k {
            0 => String::new(),
            1 => "r".into(),
            _ => format!("r^{k}"),
        };
        match (mag.as_str(), power.is_empty()) {
            (_, true) => out.push_str(&mag),
            ("1", false) => out.push_str(&power),
            (_, false) => {
                let _ = write!(out, "{mag}*{power}");
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdeJson {
    pub coeffs: Vec<NumberJson>,
    pub forcing: Vec<TermJson>,
    pub var: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionJson {
    pub real_terms: Option<Vec<RealTermJson>>,
    pub complex_terms: Vec<TermJson>,
    pub plain: String,
    pub latex: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub input: String,
    pub ode: OdeJson,
    pub characteristic: Vec<NumberJson>,
    pub roots: Vec<RootJson>,
    pub y_p: SolutionJson,
    /// "zero", "zero_tol" or "nonzero".
    pub residual: String,
    pub residual_detail: String,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<StageJson>>,
    pub time_ms: f64,
}

impl SolveReport {
    pub fn new(input: &str, sol: &Solution, steps: bool, time_ms: f64) -> Self {
        let var = sol.ode.var();
        let shown = |style| match sol.real() {
            Some(r) => format_in(r, style, var),
            None => format_in(sol.particular(), style, var),
        };
        SolveReport {
            input: input.to_string(),
            ode: OdeJson {
                coeffs: sol.ode.coeffs().iter().map(real_number_to_json).collect(),
                forcing: expr_to_json(sol.ode.forcing()),
                var: var.name().to_string(),
            },
            characteristic: sol.poly.coeffs().iter().map(real_number_to_json).collect(),
            roots: roots_to_json(&sol.roots),
            y_p: SolutionJson {
                real_terms: sol.real().map(real_to_json),
                complex_terms: expr_to_json(sol.particular()),
                plain: shown(Style::Plain),
                latex: shown(Style::Latex),
            },
            residual: sol.residual.status.tag().to_string(),
            residual_detail: sol.residual.status.to_string(),
            exact: sol.particular().is_exact(),
            trace: steps.then(|| trace_to_json(&sol.trace)),
            time_ms,
        }
    }
}

fn roots_line(sol_roots: &cascade_ode::roots::RootSet) -> String {
    sol_roots
        .entries()
        .iter()
        .map(|r| {
            let tag = if r.exact { "" } else { ", approx" };
            format!("{} (x{}{tag})", plain_scalar(&r.value), r.multiplicity)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn solve_text(sol: &Solution, a: &SolveArgs, elapsed_ms: f64) -> String {
    let var = sol.ode.var();
    let style = if a.latex { Style::Latex } else { Style::Plain };
    let mut out = String::new();
    let _ = writeln!(out, "equation:       {}", a.ode.trim());
    let _ = writeln!(out, "characteristic: {}", format_poly(&sol.poly));
    let _ = writeln!(out, "roots:          {}", roots_line(&sol.roots));
    if a.steps {
        let _ = writeln!(out, "{}", format_in(&sol.trace, style, var));
    } else {
        let shown = match sol.real() {
            Some(r) => format_in(r, style, var),
            None => format_in(sol.particular(), style, var),
        };
        let _ = writeln!(out, "y_p = {shown}");
    }
    let _ = writeln!(out, "residual:       {}", sol.residual.status);
    let _ = writeln!(out, "time:           {elapsed_ms:.3} ms");
    out
}

pub fn cmd_solve(a: &SolveArgs) -> Outcome {
    let start = Instant::now();
    let ode = match parse_ode(&a.ode) {
        Ok(o) => o,
        Err(e) => return with_json_error(parse_failure(&a.ode, &e), a.json, "parse", None),
    };
    let opts = SolveOptions { mode: if a.float { Mode::Float } else { Mode::Auto }, ..SolveOptions::default() };
    let sol = match particular_solution(&ode, &opts) {
        Ok(s) => s,
        Err(e) => {
            let (out, kind, stage) = solve_failure(&e, ode.var());
            return with_json_error(out, a.json, kind, stage);
        }
    };
    if a.exact && !(sol.roots.is_exact() && sol.particular().is_exact()) {
        let out = Outcome::fail(
            EXIT_FAILURE,
            format!("exact mode unavailable: characteristic roots {} are not all Gaussian rationals\n", roots_line(&sol.roots)),
        );
        return with_json_error(out, a.json, "inexact", None);
    }
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let stdout = if a.json {
        let report = SolveReport::new(&a.ode, &sol, a.steps, elapsed);
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        solve_text(&sol, a, elapsed)
    };
    let mut out = Outcome::ok(stdout);
    if !sol.residual.is_zero() {
        out.code = EXIT_NONZERO_RESIDUAL;
        out.stderr = format!(
            "internal error: residual check failed, L[y_p] - q = {}\n",
            format_in(&sol.residual.expr, Style::Plain, ode.var())
        );
    }
    out
}

pub fn cmd_roots(text: &str, json: bool) -> Outcome {
    let ode = match parse_ode(text) {
        Ok(o) => o,
        Err(e) => return with_json_error(parse_failure(text, &e), json, "parse", None),
    };
    let poly = characteristic(&ode);
    let roots = match find_roots(&poly, DEFAULT_ROOT_TOL) {
        Ok(r) => r,
        Err(e) => return with_json_error(Outcome::fail(EXIT_FAILURE, format!("error: {e}\n")), json, "roots", None),
    };
    if json {
        let v = serde_json::json!({
            "characteristic": poly.coeffs().iter().map(real_number_to_json).collect::<Vec<_>>(),
            "roots": roots_to_json(&roots),
        });
        return Outcome::ok(serde_json::to_string_pretty(&v).expect("serializes") + "\n");
    }
    let mut out = format!("p(r) = {}\n{:<28} {:>4}  exact\n", format_poly(&poly), "root", "mult");
    for r in roots.entries() {
        let _ = writeln!(out, "{:<28} {:>4}  {}", plain_scalar(&r.value), r.multiplicity, if r.exact { "yes" } else { "no" });
    }
    Outcome::ok(out)
}

pub fn cmd_verify(text: &str, candidate: &str, json: bool) -> Outcome {
    let ode = match parse_ode(text) {
        Ok(o) => o,
        Err(e) => return with_json_error(parse_failure(text, &e), json, "parse", None),
    };
    let y = match parse_forcing_in(candidate, Some(ode.var())) {
        Ok((y, _)) => y,
        Err(e) => return with_json_error(parse_failure(candidate, &e), json, "parse", None),
    };
    let r = residual_symbolic(&ode, &y);
    let code = if r.is_zero() { EXIT_OK } else { EXIT_VERIFY_NONZERO };
    let stdout = if json {
        let v = serde_json::json!({
            "residual": r.status.tag(),
            "residual_detail": r.status.to_string(),
            "terms": expr_to_json(&r.expr),
        });
        serde_json::to_string_pretty(&v).expect("serializes") + "\n"
    } else {
        let mut s = format!("residual: {}\n", r.status);
        if !r.expr.is_zero() {
            let shown = match realify(&r.expr) {
                Ok(real) => format_in(&real, Style::Plain, ode.var()),
                Err(_) => format_in(&r.expr, Style::Plain, ode.var()),
            };
            let _ = writeln!(s, "L[y] - q = {shown}");
        }
        s
    };
    Outcome { code, stdout, stderr: String::new() }
}

fn solve_quiet(ode: &LinearODE, float: bool) -> Result<Solution, Outcome> {
    let opts = SolveOptions { mode: if float { Mode::Float } else { Mode::Auto }, ..SolveOptions::default() };
    let sol = particular_solution(ode, &opts).map_err(|e| solve_failure(&e, ode.var()).0)?;
    if !sol.residual.is_zero() {
        return Err(Outcome::fail(EXIT_NONZERO_RESIDUAL, "internal error: residual check failed\n".into()));
    }
    Ok(sol)
}

/// Shortest round-trip decimal; `NaN` for points outside the domain.
fn num(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "NaN".into(),
    }
}

pub fn cmd_eval(text: &str, from: f64, to: f64, points: usize, float: bool) -> Outcome {
    let ode = match parse_ode(text) {
        Ok(o) => o,
        Err(e) => return parse_failure(text, &e),
    };
    let sol = match solve_quiet(&ode, float) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let var = ode.var().name();
    let mut out = String::new();
    let mut outside = 0usize;
    let grid = |i: usize| if points == 1 { from } else { from + (to - from) * i as f64 / (points - 1) as f64 };
    match sol.real() {
        Some(r) => {
            let _ = writeln!(out, "{var},y");
            for i in 0..points {
                let t = grid(i);
                let v = r.evaluate(t).ok();
                outside += v.is_none() as usize;
                let _ = writeln!(out, "{t},{}", num(v));
            }
        }
        None => {
            let _ = writeln!(out, "{var},y_re,y_im");
            for i in 0..points {
                let t = grid(i);
                let v = sol.particular().evaluate(t).ok();
                outside += v.is_none() as usize;
                let _ = writeln!(out, "{t},{},{}", num(v.map(|z| z.re)), num(v.map(|z| z.im)));
            }
        }
    }
    let mut o = Outcome::ok(out);
    if outside > 0 {
        o.stderr = format!("warning: {outside} point(s) outside the domain of ln({var}) or a negative power; written as NaN\n");
    }
    o
}

fn varcoef_problem(a: &VarcoefArgs) -> Result<PowerCoefODE, Outcome> {
    let (coef, n, forcing) = match &a.equation {
        Some(eq) => {
            let (desc, forcing, _) = parse_power_coef_ode(eq).map_err(|e| parse_failure(eq, &e))?;
            let (coef, n) =
                recognize_factorable(&desc).map_err(|e| Outcome::fail(EXIT_FAILURE, format!("error: {e}\n")))?;
            (coef, n, forcing)
        }
        None => {
            let text = a.forcing.as_deref().unwrap_or_default();
            let forcing = match parse_forcing_in(text, None) {
                Ok((e, _)) if realify(&e).is_ok() => Forcing::Expr(e),
                Ok(_) => return Err(Outcome::fail(EXIT_FAILURE, "error: the forcing must be real-valued\n".into())),
                // anything outside the term algebra is evaluated numerically
                Err(_) => {
                    let f = parse_real_fn(text).map_err(|e| parse_failure(text, &e))?;
                    Forcing::func(move |x| f.eval(x))
                }
            };
            let (coef, n) = (a.a.unwrap_or_default(), a.n.unwrap_or_default());
            return Ok(PowerCoefODE::new(coef, n, forcing, a.x0, a.x1));
        }
    };
    if realify(&forcing).is_err() {
        return Err(Outcome::fail(EXIT_FAILURE, "error: the forcing must be real-valued\n".into()));
    }
    Ok(PowerCoefODE::new(coef, n, Forcing::Expr(forcing), a.x0, a.x1))
}

pub fn cmd_varcoef(a: &VarcoefArgs) -> Outcome {
    let start = Instant::now();
    let ode = match varcoef_problem(a) {
        Ok(o) => o,
        Err(o) => return o,
    };
    let factor = if a.monomial_factor { Factor::Monomial } else { Factor::Riccati };
    let opts = VarcoefOptions { factor, ..VarcoefOptions::with_step(a.step) };
    let sol = match solve_varcoef(&ode, &opts) {
        Ok(s) => s,
        Err(e @ VarcoefError::StepTooLarge { .. }) => {
            return Outcome::fail(EXIT_FAILURE, format!("error: {e}; try a smaller --step\n"))
        }
        Err(e) => return Outcome::fail(EXIT_FAILURE, format!("error: {e}\n")),
    };
    let mut out = String::from("x,phi,y\n");
    for ((x, phi), y) in sol.x.iter().zip(sol.phi()).zip(sol.y()) {
        let _ = writeln!(out, "{x},{phi},{y}");
    }
    let r = &sol.residuals;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "# y'' - {}^2 x^{} y = q on [{}, {}], h = {}, {} nodes, factor = {}",
        ode.a,
        2 * ode.n,
        ode.x0,
        ode.x1,
        sol.h,
        sol.x.len(),
        match factor {
            Factor::Riccati => "exact (Riccati)",
            Factor::Monomial => "monomial a x^n",
        }
    );
    let _ = writeln!(summary, "# stage 1 residual  max|phi' + u phi - q|     = {:e}", r.stage1);
    let _ = writeln!(summary, "# stage 2 residual  max|y' - u y - phi|       = {:e}", r.stage2);
    if factor == Factor::Riccati {
        let _ = writeln!(summary, "# factor residual   max|u' + u^2 - a^2 x^2n|  = {:e}", r.factor);
    }
    let _ = writeln!(summary, "# equation residual max|y'' - a^2 x^2n y - q| = {:e}", r.second_order);
    let _ = writeln!(summary, "# quadrature cross-check at {} points: max relative difference {:e}", sol.probes.len(), sol.probe_error());
    let _ = writeln!(summary, "# time {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
    Outcome { code: EXIT_OK, stdout: out, stderr: summary }
}
