use std::process::Command;

use cascade_ode::cascade::{particular_solution, SolveOptions};
use cascade_ode::json::expr_from_json;
use cascade_ode::parse::parse_ode;
use cascade_ode_cli::*;

fn run(args: &[&str]) -> Outcome {
    run_args(std::iter::once("cascade-ode").chain(args.iter().copied()))
}

#[test]
fn solve_plain_text() {
    let o = run(&["solve", "y''+5y'+6y = exp(t)*cos(t)"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("y_p = 11/170*exp(t)*cos(t) + 7/170*exp(t)*sin(t)"), "{}", o.stdout);
    assert!(o.stdout.contains("characteristic: r^2 + 5*r + 6"));
    assert!(o.stdout.contains("residual:       exact-zero"));
}

#[test]
fn solve_json_round_trips() {
    let text = "y''-4y'+4y = t^3*exp(2t)";
    let o = run(&["solve", text, "--json", "--steps"]);
    assert_eq!(o.code, EXIT_OK);
    let report: SolveReport = serde_json::from_str(&o.stdout).unwrap();
    let expected = particular_solution(&parse_ode(text).unwrap(), &SolveOptions::default()).unwrap();
    assert_eq!(&expr_from_json(&report.y_p.complex_terms).unwrap(), expected.particular());
    assert_eq!(report.residual, "zero");
    assert!(report.exact);
    assert_eq!(report.trace.unwrap().len(), 2);
    assert_eq!(report.y_p.plain, "1/20*t^5*exp(2t)");
}

#[test]
fn solve_latex_and_steps() {
    let o = run(&["solve", "y''+4y'+4y = exp(-2t)*ln(t)", "--steps", "--latex"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains(r"\ln t"), "{}", o.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "y''+y = exp(t"]).code, EXIT_PARSE);
    let o = run(&["solve", "y''+5y'+6y = exp(t)*ln(t)"]);
    assert_eq!(o.code, EXIT_NOT_CLOSED_FORM);
    assert!(o.stderr.contains("stage 1"), "{}", o.stderr);
    assert_eq!(run(&["solve", "y''-2y = 1", "--exact"]).code, EXIT_FAILURE);
    assert_eq!(run(&["verify", "y''+y = t", "t"]).code, EXIT_OK);
    let o = run(&["verify", "y''+3y'+2y = 5*t+sin(t)", "t"]);
    assert_eq!(o.code, EXIT_VERIFY_NONZERO);
    assert!(o.stdout.contains("3 - 3*t - sin(t)"), "{}", o.stdout);
    assert_ne!(run(&["solve"]).code, EXIT_OK);
}

#[test]
fn json_errors_go_to_stdout() {
    let o = run(&["solve", "y''+y = exp(t", "--json"]);
    assert_eq!(o.code, EXIT_PARSE);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["error"], "parse");
    assert!(v["message"].as_str().unwrap().contains("expected ')'"));
}

#[test]
fn float_mode_solves_irrational_roots() {
    let o = run(&["solve", "y''-2y = 1", "--float"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let line = o.stdout.lines().find(|l| l.starts_with("y_p = ")).unwrap();
    let v: f64 = line["y_p = ".len()..].parse().unwrap();
    assert!((v + 0.5).abs() < 1e-12);
}

#[test]
fn roots_table_and_json() {
    let o = run(&["roots", "y'''-3y'+2y = 0"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains('1') && o.stdout.contains("-2"));
    let o = run(&["roots", "y'''-3y'+2y = 0", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots[0]["mult"], 2);
    assert_eq!(roots[0]["re"]["num"], "1");
    assert_eq!(roots[1]["re"]["num"], "-2");
}

#[test]
fn eval_matches_the_closed_form() {
    let o = run(&["eval", "y''-2y'+5y = sin(t)", "--from", "0", "--to", "1", "--points", "3"]);
    assert_eq!(o.code, EXIT_OK);
    let rows: Vec<(f64, f64)> = o
        .stdout
        .lines()
        .skip(1)
        .map(|l| {
            let (t, y) = l.split_once(',').unwrap();
            (t.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    for (t, y) in rows {
        assert!((y - (t.cos() / 10.0 + t.sin() / 5.0)).abs() < 1e-14);
    }
    let o = run(&["eval", "y''+y = 1", "--from", "2", "--to", "9", "--points", "1"]);
    assert_eq!(o.stdout, "t,y\n2,1\n");
    let o = run(&["eval", "y' = ln(t)", "--from", "0", "--to", "1", "--points", "2"]);
    assert!(o.stdout.contains("0,NaN"));
    assert!(o.stderr.contains("warning"));
    assert_ne!(run(&["eval", "y''+y = 1", "--from", "0", "--to", "1", "--points", "0"]).code, EXIT_OK);
}

#[test]
fn varcoef_csv_and_summary() {
    let o = run(&["varcoef", "1", "1", "exp(x^2/2)", "--step", "0.01"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let mut lines = o.stdout.lines();
    assert_eq!(lines.next(), Some("x,phi,y"));
    assert_eq!(lines.count(), 101);
    assert!(o.stderr.starts_with('#'));
    assert!(o.stderr.contains("quadrature"), "{}", o.stderr);

    let o = run(&["varcoef", "--equation", "y'' - 4*x^2*y = 1", "--step", "0.01"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(run(&["varcoef", "--equation", "y'' + 4*x^2*y = 1"]).code, EXIT_FAILURE);
    let o = run(&["varcoef", "3", "2", "sin(5x)", "--x1", "2", "--step", "0.5"]);
    assert_eq!(o.code, EXIT_FAILURE);
    assert!(o.stderr.contains("smaller --step"));
}

#[test]
fn binary_exit_status_and_streams() {
    let bin = env!("CARGO_BIN_EXE_cascade-ode");
    let out = Command::new(bin).args(["solve", "y''' - 6y'' + 11y' - 6y = exp(4t)"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("y_p = 1/6*exp(4t)"));
    let out = Command::new(bin).args(["solve", "y'' = exp(t)*ln(t)"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NOT_CLOSED_FORM));
    assert!(!out.stderr.is_empty());
    let out = Command::new(bin).arg("--help").output().unwrap();
    assert!(out.status.success());
}
