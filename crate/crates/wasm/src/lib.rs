//! Browser bindings. Every export takes plain strings and numbers and
//! returns a JSON string; failures come back as `{"error": "..."}`.

use cascade_ode::cascade::{particular_solution, SolveOptions};
use cascade_ode::format::{format_in, plain_scalar, Style};
use cascade_ode::func::parse_real_fn;
use cascade_ode::parse::{parse_forcing_in, parse_ode};
use cascade_ode::real::realify;
use cascade_ode::roots::{characteristic, find_roots, DEFAULT_ROOT_TOL};
use cascade_ode::varcoef::{solve_varcoef, Factor, Forcing, PowerCoefODE, VarcoefOptions};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn error(message: impl std::fmt::Display) -> Value {
    json!({ "error": message.to_string() })
}

fn grid(from: f64, to: f64, points: usize) -> impl Iterator<Item = f64> {
    let points = points.max(1);
    (0..points).map(move |i| if points == 1 { from } else { from + (to - from) * i as f64 / (points - 1) as f64 })
}

/// Solves a constant-coefficient equation and samples `y_p` on `[from, to]`.
/// Samples outside the domain of `ln` are `null`.
pub fn solve_value(ode: &str, from: f64, to: f64, points: usize) -> Value {
    let ode = match parse_ode(ode) {
        Ok(o) => o,
        Err(e) => return error(e.render(ode)),
    };
    let sol = match particular_solution(&ode, &SolveOptions::default()) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let var = ode.var();
    let shown = |style| match sol.real() {
        Some(r) => format_in(r, style, var),
        None => format_in(sol.particular(), style, var),
    };
    let samples: Vec<Value> = grid(from, to, points)
        .map(|t| {
            let y = match sol.real() {
                Some(r) => r.evaluate(t).ok(),
                None => sol.particular().evaluate(t).ok().map(|z| z.re),
            };
            json!([t, y.filter(|v| v.is_finite())])
        })
        .collect();
    let stages: Vec<Value> = sol
        .trace
        .stages
        .iter()
        .map(|s| {
            json!({
                "root": plain_scalar(&s.root),
                "input": format_in(&s.input, Style::Plain, var),
                "output": format_in(&s.output, Style::Plain, var),
            })
        })
        .collect();
    json!({
        "var": var.name(),
        "plain": shown(Style::Plain),
        "latex": shown(Style::Latex),
        "residual": sol.residual.status.to_string(),
        "exact": sol.particular().is_exact(),
        "stages": stages,
        "samples": samples,
    })
}

pub fn roots_value(ode: &str) -> Value {
    let ode = match parse_ode(ode) {
        Ok(o) => o,
        Err(e) => return error(e.render(ode)),
    };
    let p = characteristic(&ode);
    match find_roots(&p, DEFAULT_ROOT_TOL) {
        Ok(r) => {
            let roots: Vec<Value> = r
                .entries()
                .iter()
                .map(|e| {
                    let z = e.value.to_c64();
                    json!({
                        "text": plain_scalar(&e.value),
                        "re": z.re,
                        "im": z.im,
                        "multiplicity": e.multiplicity,
                        "exact": e.exact,
                    })
                })
                .collect();
            json!({ "roots": roots })
        }
        Err(e) => error(e),
    }
}

/// Numeric solve of `y'' - a^2 x^(2n) y = q(x)` on `[x0, x1]`.
pub fn varcoef_value(a: f64, n: u32, forcing: &str, x0: f64, x1: f64, h: f64, monomial: bool) -> Value {
    let q = match parse_forcing_in(forcing, None) {
        Ok((e, _)) if realify(&e).is_ok() => Forcing::Expr(e),
        Ok(_) => return error("the forcing must be real-valued"),
        Err(_) => match parse_real_fn(forcing) {
            Ok(f) => Forcing::func(move |x| f.eval(x)),
            Err(e) => return error(e.render(forcing)),
        },
    };
    let ode = PowerCoefODE::new(a, n, q, x0, x1);
    let factor = if monomial { Factor::Monomial } else { Factor::Riccati };
    let sol = match solve_varcoef(&ode, &VarcoefOptions { factor, ..VarcoefOptions::with_step(h) }) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    // thin the grid to at most ~2000 samples for plotting
    let stride = (sol.x.len() / 2000).max(1);
    let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
    let r = sol.residuals;
    json!({
        "x": pick(&sol.x),
        "phi": pick(sol.phi()),
        "y": pick(sol.y()),
        "h": sol.h,
        "stage1": r.stage1,
        "stage2": r.stage2,
        "second_order": r.second_order,
        "probe_error": sol.probe_error(),
    })
}

#[wasm_bindgen]
pub fn solve(ode: &str, from: f64, to: f64, points: usize) -> String {
    solve_value(ode, from, to, points).to_string()
}

#[wasm_bindgen]
pub fn roots(ode: &str) -> String {
    roots_value(ode).to_string()
}

#[wasm_bindgen]
pub fn varcoef(a: f64, n: u32, forcing: &str, x0: f64, x1: f64, h: f64, monomial: bool) -> String {
    varcoef_value(a, n, forcing, x0, x1, h, monomial).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_reports_formula_and_samples() {
        let v = solve_value("y''-2y'+5y = sin(t)", 0.0, 1.0, 11);
        assert_eq!(v["plain"], "1/10*cos(t) + 1/5*sin(t)");
        assert_eq!(v["stages"].as_array().unwrap().len(), 2);
        let s = v["samples"].as_array().unwrap();
        assert_eq!(s.len(), 11);
        assert!((s[0][1].as_f64().unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn log_samples_outside_the_domain_are_null() {
        let v = solve_value("y' = ln(t)", 0.0, 1.0, 2);
        assert!(v["samples"][0][1].is_null());
    }

    #[test]
    fn errors_are_json() {
        assert!(solve_value("y''+y = exp(t", 0.0, 1.0, 2)["error"].is_string());
        assert!(solve_value("y''+5y'+6y = exp(t)*ln(t)", 0.0, 1.0, 2)["error"].as_str().unwrap().contains("stage 1"));
    }

    #[test]
    fn roots_and_varcoef() {
        let v = roots_value("y'''-3y'+2y = 0");
        assert_eq!(v["roots"][0]["multiplicity"], 2);
        let v = varcoef_value(1.0, 1, "exp(x^2/2)", 0.0, 1.0, 1e-3, false);
        assert!(v["stage1"].as_f64().unwrap() < 1e-8, "{v}");
        assert!(v["x"].as_array().unwrap().len() > 500);
    }
}
