//! Plain-text and LaTeX rendering. Plain output is valid parser input.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::cascade::CascadeTrace;
use crate::expr::{Expr, Term};
use crate::ode::Variable;
use crate::real::{RealExpr, RealTerm, Trig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Plain,
    Latex,
    Json,
}

/// Anything [`format`] can render.
pub enum Formattable<'a> {
    Expr(&'a Expr),
    Real(&'a RealExpr),
    Trace(&'a CascadeTrace),
}

impl<'a> From<&'a Expr> for Formattable<'a> {
    fn from(e: &'a Expr) -> Self {
        Formattable::Expr(e)
    }
}

impl<'a> From<&'a RealExpr> for Formattable<'a> {
    fn from(e: &'a RealExpr) -> Self {
        Formattable::Real(e)
    }
}

impl<'a> From<&'a CascadeTrace> for Formattable<'a> {
    fn from(e: &'a CascadeTrace) -> Self {
        Formattable::Trace(e)
    }
}

pub fn format<'a>(item: impl Into<Formattable<'a>>, style: Style) -> String {
    format_in(item, style, Variable::T)
}

pub fn format_in<'a>(item: impl Into<Formattable<'a>>, style: Style, var: Variable) -> String {
    let item = item.into();
    match style {
        Style::Json => {
            let v = match item {
                Formattable::Expr(e) => serde_json::to_value(crate::json::expr_to_json(e)),
                Formattable::Real(r) => serde_json::to_value(crate::json::real_to_json(r)),
                Formattable::Trace(t) => serde_json::to_value(crate::json::trace_to_json(t)),
            };
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        Style::Plain | Style::Latex => {
            let w = Writer { latex: style == Style::Latex, var: var.name() };
            match item {
                Formattable::Expr(e) => w.expr(e),
                Formattable::Real(r) => w.real(r),
                Formattable::Trace(t) => w.trace(t),
            }
        }
    }
}

struct Writer {
    latex: bool,
    var: &'static str,
}

/// A rendered summand split into sign and magnitude so sums can be joined
/// with `+`/`-`.
struct Piece {
    negative: bool,
    body: String,
}

impl Writer {
    fn join(&self, pieces: Vec<Piece>) -> String {
        if pieces.is_empty() {
            return "0".into();
        }
        let (plus, minus) = if self.latex { ("+", "-") } else { (" + ", " - ") };
        let mut out = String::new();
        for (i, p) in pieces.into_iter().enumerate() {
            match (i, p.negative) {
                (0, false) => {}
                (0, true) => out.push('-'),
                (_, false) => out.push_str(plus),
                (_, true) => out.push_str(minus),
            }
            out.push_str(&p.body);
        }
        out
    }

    fn expr(&self, e: &Expr) -> String {
        self.join(e.terms().iter().map(|t| self.term(t)).collect())
    }

    fn real(&self, r: &RealExpr) -> String {
        self.join(r.terms().iter().map(|t| self.real_term(t)).collect())
    }

    fn term(&self, t: &Term) -> Piece {
        let mut factors = Vec::new();
        self.push_tpow(&mut factors, t.tpow);
        if self.latex {
            self.push_exp(&mut factors, &t.exponent);
            self.push_log(&mut factors, t.logpow);
        } else {
            self.push_log(&mut factors, t.logpow);
            self.push_exp(&mut factors, &t.exponent);
        }
        self.with_coeff(&t.coeff, factors)
    }

    fn real_term(&self, t: &RealTerm) -> Piece {
        let mut factors = Vec::new();
        self.push_tpow(&mut factors, t.tpow);
        if self.latex {
            self.push_exp(&mut factors, &t.alpha);
            self.push_log(&mut factors, t.logpow);
        } else {
            self.push_log(&mut factors, t.logpow);
            self.push_exp(&mut factors, &t.alpha);
        }
        if !t.beta.is_zero() {
            let name = match t.trig {
                Trig::Cos => "cos",
                Trig::Sin => "sin",
            };
            if self.latex {
                factors.push(format!("\\{name} {}", self.latex_linear(&t.beta)));
            } else {
                factors.push(format!("{name}({})", self.plain_linear(&t.beta)));
            }
        }
        self.with_coeff(&t.coeff, factors)
    }

    fn push_tpow(&self, factors: &mut Vec<String>, k: i32) {
        let v = self.var;
        match k {
            0 => {}
            1 => factors.push(v.to_string()),
            k if self.latex && (0..10).contains(&k) => factors.push(format!("{v}^{k}")),
            k if self.latex => factors.push(format!("{v}^{{{k}}}")),
            k if k < 0 => factors.push(format!("{v}^({k})")),
            k => factors.push(format!("{v}^{k}")),
        }
    }

    fn push_log(&self, factors: &mut Vec<String>, m: u32) {
        let v = self.var;
        match (m, self.latex) {
            (0, _) => {}
            (1, true) => factors.push(format!("\\ln {v}")),
            (m, true) => factors.push(format!("\\ln^{{{m}}} {v}")),
            (1, false) => factors.push(format!("ln({v})")),
            (m, false) => factors.push(format!("ln({v})^{m}")),
        }
    }

    fn push_exp(&self, factors: &mut Vec<String>, lambda: &Scalar) {
        if lambda.is_zero() {
            return;
        }
        if self.latex {
            factors.push(format!("e^{{{}}}", self.latex_linear(lambda)));
        } else {
            factors.push(format!("exp({})", self.plain_linear(lambda)));
        }
    }

    /// `c·t` for use inside exp/cos/sin.
    fn plain_linear(&self, c: &Scalar) -> String {
        let v = self.var;
        if c.is_one() {
            return v.to_string();
        }
        if let Some(r) = c.as_rational() {
            if r == &-BigRational::one() {
                return format!("-{v}");
            }
            if r.is_integer() {
                return format!("{r}{v}");
            }
            return format!("{r}*{v}");
        }
        if c.is_real() {
            return format!("{}*{v}", plain_f64(c.re_f64()));
        }
        if c.re().is_zero() {
            return format!("{}*{v}", plain_complex_inner(c));
        }
        format!("({})*{v}", plain_complex_inner(c))
    }

    fn latex_linear(&self, c: &Scalar) -> String {
        let v = self.var;
        if c.is_one() {
            return v.to_string();
        }
        if c.is_real() {
            let (neg, mag) = self.latex_real_magnitude(c);
            let sign = if neg { "-" } else { "" };
            return if mag == "1" { format!("{sign}{v}") } else { format!("{sign}{mag}{v}") };
        }
        if c.re().is_zero() {
            return format!("{}{v}", self.latex_complex(c));
        }
        format!("({}){v}", self.latex_complex(c))
    }

    fn with_coeff(&self, c: &Scalar, factors: Vec<String>) -> Piece {
        let sep = if self.latex { "" } else { "*" };
        let rest = factors.join(sep);
        if c.is_real() {
            let (negative, mag) = if self.latex {
                self.latex_real_magnitude(c)
            } else {
                plain_real_magnitude(c)
            };
            let body = match (mag.as_str(), rest.is_empty()) {
                ("1", false) => rest,
                (_, true) => mag,
                (_, false) => format!("{mag}{sep}{rest}"),
            };
            return Piece { negative, body };
        }
        let coeff = if self.latex {
            format!("\\left({}\\right)", self.latex_complex(c))
        } else {
            format!("({})", plain_complex_inner(c))
        };
        let body = if rest.is_empty() { coeff } else { format!("{coeff}{sep}{rest}") };
        Piece { negative: false, body }
    }

    fn latex_real_magnitude(&self, c: &Scalar) -> (bool, String) {
        if let Some(r) = c.as_rational() {
            let neg = r.is_negative();
            let a = r.abs();
            let s = if a.is_integer() {
                a.to_string()
            } else {
                format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom())
            };
            return (neg, s);
        }
        let v = c.re_f64();
        (v < 0.0 || (v == 0.0 && v.is_sign_negative()), plain_f64(v.abs()))
    }

    fn latex_complex(&self, c: &Scalar) -> String {
        let (re, im) = (c.re(), c.im());
        let (rn, rm) = self.latex_real_magnitude(&re);
        let (ineg, im_mag) = self.latex_real_magnitude(&im);
        let im_str = if im_mag == "1" { "i".to_string() } else { format!("{im_mag}i") };
        if re.is_zero() {
            return format!("{}{im_str}", if ineg { "-" } else { "" });
        }
        format!("{}{rm}{}{im_str}", if rn { "-" } else { "" }, if ineg { "-" } else { "+" })
    }

    fn trace(&self, t: &CascadeTrace) -> String {
        let mut out = String::new();
        let g0 = t.stages.first().map(|s| &s.input).cloned().unwrap_or_default();
        if self.latex {
            out.push_str(&format!("q/a_n = {}\\\\\n", self.expr(&g0)));
            for (i, s) in t.stages.iter().enumerate() {
                out.push_str(&format!(
                    "\\phi_{{{n}}}' - ({r})\\phi_{{{n}}} = {g} \\;\\Rightarrow\\; \\phi_{{{n}}} = {p}\\\\\n",
                    n = i + 1,
                    r = self.latex_scalar(&s.root),
                    g = self.expr(&s.input),
                    p = self.expr(&s.output),
                ));
            }
            let complex = self.expr(&t.particular);
            out.push_str(&format!("y_p = {complex}"));
            if let Some(r) = t.real.as_ref().map(|r| self.real(r)).filter(|r| *r != complex) {
                out.push_str(&format!(" = {r}"));
            }
        } else {
            out.push_str(&format!("scaled forcing q/a_n: {}\n", self.expr(&g0)));
            for (i, s) in t.stages.iter().enumerate() {
                out.push_str(&format!(
                    "stage {n}: phi' - ({r})*phi = {g}\n         phi = {p}\n",
                    n = i + 1,
                    r = plain_scalar(&s.root),
                    g = self.expr(&s.input),
                    p = self.expr(&s.output),
                ));
            }
            let complex = self.expr(&t.particular);
            out.push_str(&format!("y_p = {complex}"));
            if let Some(r) = t.real.as_ref().map(|r| self.real(r)).filter(|r| *r != complex) {
                out.push_str(&format!("\n    = {r}"));
            }
        }
        out
    }

    fn latex_scalar(&self, c: &Scalar) -> String {
        if c.is_real() {
            let (neg, mag) = self.latex_real_magnitude(c);
            format!("{}{mag}", if neg { "-" } else { "" })
        } else {
            self.latex_complex(c)
        }
    }
}

fn plain_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn plain_real_magnitude(c: &Scalar) -> (bool, String) {
    if let Some(r) = c.as_rational() {
        return (r.is_negative(), r.abs().to_string());
    }
    let v = c.re_f64();
    (v < 0.0 || (v == 0.0 && v.is_sign_negative()), plain_f64(v.abs()))
}

/// Plain scalar without surrounding parentheses, e.g. `1/2 - 3*i`.
fn plain_complex_inner(c: &Scalar) -> String {
    let (re, im) = (c.re(), c.im());
    let (ineg, imag) = plain_real_magnitude(&im);
    let im_str = if imag == "1" { "i".to_string() } else { format!("{imag}*i") };
    if re.is_zero() {
        return format!("{}{im_str}", if ineg { "-" } else { "" });
    }
    let (rneg, rmag) = plain_real_magnitude(&re);
    format!("{}{rmag} {} {im_str}", if rneg { "-" } else { "" }, if ineg { "-" } else { "+" })
}

/// Plain rendering of a bare scalar.
pub fn plain_scalar(c: &Scalar) -> String {
    if c.is_real() {
        let (neg, mag) = plain_real_magnitude(c);
        format!("{}{mag}", if neg { "-" } else { "" })
    } else {
        plain_complex_inner(c)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self, Style::Plain))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = Writer { latex: false, var: "t" };
        f.write_str(&w.join(vec![w.term(self)]))
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self, Style::Plain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_forcing;
    use crate::real::realify;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn repeated_root_answer_in_latex() {
        let e = Expr::from_term(Term::new(q(1, 20), 5, 0, q(2, 1)));
        assert_eq!(format(&e, Style::Latex), "\\frac{1}{20}t^5e^{2t}");
        assert_eq!(format(&e, Style::Plain), "1/20*t^5*exp(2t)");
    }

    #[test]
    fn zero_prints_as_zero() {
        assert_eq!(format(&Expr::zero(), Style::Plain), "0");
        assert_eq!(format(&RealExpr::zero(), Style::Latex), "0");
    }

    #[test]
    fn cos_sin_plain_and_latex() {
        let e = Expr::cos(q(1, 1)).scale(&q(1, 10)).add(&Expr::sin(q(1, 1)).scale(&q(1, 5)));
        let r = realify(&e).unwrap();
        assert_eq!(format(&r, Style::Plain), "1/10*cos(t) + 1/5*sin(t)");
        assert_eq!(format(&r, Style::Latex), "\\frac{1}{10}\\cos t+\\frac{1}{5}\\sin t");
    }

    #[test]
    fn log_answer_in_latex() {
        let e = parse_forcing("1/2*t^2*exp(-2t)*ln(t) - 3/4*t^2*exp(-2t)").unwrap();
        assert_eq!(format(&e, Style::Latex), "-\\frac{3}{4}t^2e^{-2t}+\\frac{1}{2}t^2e^{-2t}\\ln t");
    }

    #[test]
    fn complex_terms_round_trip_through_plain() {
        let e = parse_forcing("exp(t)*cos(2t) - 3*sin(1/2*t)*t + ln(t)^2 + 2.5*exp(-0.25*t)").unwrap();
        let text = format(&e, Style::Plain);
        assert_eq!(parse_forcing(&text).unwrap(), e, "{text}");
    }

    #[test]
    fn approximate_values_round_trip_closely() {
        let e = Expr::exp(Scalar::approx(-1.25e-7, 0.0)).scale(&Scalar::approx(3.5e20, 0.0));
        let text = format(&e, Style::Plain);
        let back = parse_forcing(&text).unwrap().to_approx();
        assert!(back.approx_eq(&e, 1e-15), "{text}");
    }
}
