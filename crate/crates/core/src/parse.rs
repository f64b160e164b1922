//! Text input: forcing expressions and whole equations.
//!
//! Grammar (EBNF):
//!
//! ```text
//! ode      = lhs "=" sum ;
//! sum      = product { ("+" | "-") product } ;
//! product  = unary { ("*" | "/") unary } ;
//! unary    = ("-" | "+") unary | power ;
//! power    = primary [ "^" exponent ] ;
//! exponent = ["-"] integer | "(" ["-"] integer ")" ;
//! primary  = number [ ident-primary ]         (* "5y'", "3t^2": literal times identifier *)
//!          | ident-primary
//!          | "(" sum ")" ;
//! ident-primary = var | "i" | "e" "^" unary
//!          | ("exp" | "sin" | "cos" | "ln") "(" sum ")"
//!          | "y" { "'" } | "y" "^" "(" integer ")" ;   (* left-hand side only *)
//! var      = "t" | "x" ;
//! number   = digits [ "." digits ] [ ("e" | "E") ["+" | "-"] digits ] ;
//! ```
//!
//! `exp` arguments must be `c·t`, `sin`/`cos` arguments `b·t` with real `b`,
//! and `ln` takes the bare variable. Decimal literals are read as exact
//! rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::expr::{Expr, Term};
use crate::ode::{LinearODE, OdeError, Variable};
use crate::scalar::Scalar;
use crate::varcoef::PowerCoefDescription;

/// Byte range `[start, end)` into the parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        SourceSpan { start, end }
    }

    fn to(self, other: SourceSpan) -> SourceSpan {
        SourceSpan { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("unsupported function at {span}: {message}")]
    UnsupportedFunction { span: SourceSpan, message: String },
    #[error("not a linear constant-coefficient equation at {span}: {message}")]
    NotLinearConstantCoefficient { span: SourceSpan, message: String },
    #[error("invalid equation: {0}")]
    Ode(#[from] OdeError),
}

impl ParseError {
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::UnsupportedFunction { span, .. }
            | ParseError::NotLinearConstantCoefficient { span, .. } => Some(*span),
            ParseError::Ode(_) => None,
        }
    }

    /// The message followed by the input line with a caret marker under the span.
    pub fn render(&self, input: &str) -> String {
        let Some(span) = self.span() else {
            return self.to_string();
        };
        let start = input[..span.start.min(input.len())].chars().count();
        let width = input[span.start.min(input.len())..span.end.min(input.len())]
            .chars()
            .count()
            .max(1);
        format!("{self}\n  {input}\n  {}{}", " ".repeat(start), "^".repeat(width))
    }
}

fn syntax(span: SourceSpan, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { span, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Primes(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = |tok| Token { tok, span: SourceSpan::new(start, start + 1) };
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'+' => {
                out.push(single(Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push(single(Tok::Minus));
                i += 1;
            }
            b'*' => {
                out.push(single(Tok::Star));
                i += 1;
            }
            b'/' => {
                out.push(single(Tok::Slash));
                i += 1;
            }
            b'^' => {
                out.push(single(Tok::Caret));
                i += 1;
            }
            b'(' => {
                out.push(single(Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push(single(Tok::RParen));
                i += 1;
            }
            b'=' => {
                out.push(single(Tok::Eq));
                i += 1;
            }
            b'\'' => {
                while i < bytes.len() && bytes[i] == b'\'' {
                    i += 1;
                }
                out.push(Token { tok: Tok::Primes(i - start), span: SourceSpan::new(start, i) });
            }
            b'0'..=b'9' | b'.' => {
                let (value, end) = lex_number(text, start)?;
                out.push(Token { tok: Tok::Num(value), span: SourceSpan::new(start, end) });
                i = end;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    span: SourceSpan::new(start, i),
                });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(
                    SourceSpan::new(start, start + ch.len_utf8()),
                    format!("unexpected character '{ch}'"),
                ));
            }
        }
    }
    out.push(Token { tok: Tok::End, span: SourceSpan::new(text.len(), text.len()) });
    Ok(out)
}

fn lex_number(text: &str, start: usize) -> Result<(BigRational, usize), ParseError> {
    let bytes = text.as_bytes();
    let mut i = start;
    let digits = |i: &mut usize| {
        let s = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        *i - s
    };
    let int_digits = digits(&mut i);
    let mut frac = "";
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let fs = i;
        digits(&mut i);
        frac = &text[fs..i];
    }
    if int_digits == 0 && frac.is_empty() {
        return Err(syntax(SourceSpan::new(start, i), "malformed number"));
    }
    let mut exp10: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        let mut neg = false;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            neg = bytes[j] == b'-';
            j += 1;
        }
        let ds = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > ds {
            let v: i64 = text[ds..j]
                .parse()
                .map_err(|_| syntax(SourceSpan::new(start, j), "exponent out of range"))?;
            if v > 4000 {
                return Err(syntax(SourceSpan::new(start, j), "exponent out of range"));
            }
            exp10 = if neg { -v } else { v };
            i = j;
        }
    }
    let int_part = &text[start..start + int_digits];
    let all_digits = format!("{int_part}{frac}");
    let numer: BigInt = all_digits.parse().unwrap_or_else(|_| BigInt::zero());
    let mut value = BigRational::new(numer, BigInt::from(10).pow(frac.len() as u32));
    let ten = BigRational::from_integer(BigInt::from(10));
    let p = num_traits::pow(ten, exp10.unsigned_abs() as usize);
    if exp10 >= 0 {
        value *= p;
    } else {
        value /= p;
    }
    Ok((value, i))
}

/// Coefficients of `y^(k)` collected on the left-hand side.
#[derive(Debug, Clone, Default)]
struct LinearForm {
    by_order: BTreeMap<usize, Expr>,
}

impl LinearForm {
    fn single(order: usize) -> Self {
        let mut by_order = BTreeMap::new();
        by_order.insert(order, Expr::constant(Scalar::one()));
        LinearForm { by_order }
    }

    fn add(mut self, other: LinearForm) -> Self {
        for (k, c) in other.by_order {
            let entry = self.by_order.entry(k).or_default();
            *entry = entry.add(&c);
        }
        self
    }

    fn scale(self, f: &Expr) -> Self {
        LinearForm { by_order: self.by_order.into_iter().map(|(k, c)| (k, c.multiply(f))).collect() }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Func(Expr),
    Lin(LinearForm),
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    var: Option<Variable>,
    allow_y: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if !matches!(t.tok, Tok::End) {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(syntax(self.span(), format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<(Value, SourceSpan), ParseError> {
        let (mut acc, mut span) = self.product()?;
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            let (rhs, rspan) = self.product()?;
            let rhs = if neg { negate(rhs) } else { rhs };
            span = span.to(rspan);
            acc = match (acc, rhs) {
                (Value::Func(a), Value::Func(b)) => Value::Func(a.add(&b)),
                (Value::Lin(a), Value::Lin(b)) => Value::Lin(a.add(b)),
                _ => {
                    return Err(syntax(
                        span,
                        "terms without y belong on the right-hand side of '='",
                    ))
                }
            };
        }
        Ok((acc, span))
    }

    fn product(&mut self) -> Result<(Value, SourceSpan), ParseError> {
        let (mut acc, mut span) = self.unary()?;
        loop {
            let div = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                _ => break,
            };
            self.bump();
            let (rhs, rspan) = self.unary()?;
            span = span.to(rspan);
            acc = if div { divide(acc, rhs, rspan)? } else { multiply(acc, rhs, span)? };
        }
        Ok((acc, span))
    }

    fn unary(&mut self) -> Result<(Value, SourceSpan), ParseError> {
        match self.peek() {
            Tok::Minus => {
                let s = self.bump().span;
                let (v, span) = self.unary()?;
                Ok((negate(v), s.to(span)))
            }
            Tok::Plus => {
                let s = self.bump().span;
                let (v, span) = self.unary()?;
                Ok((v, s.to(span)))
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<(Value, SourceSpan), ParseError> {
        let (base, span) = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok((base, span));
        }
        self.bump();
        let (n, espan) = self.integer_exponent()?;
        let span = span.to(espan);
        match base {
            Value::Lin(_) => Err(ParseError::NotLinearConstantCoefficient {
                span,
                message: "powers of y are not linear".into(),
            }),
            Value::Func(e) => Ok((Value::Func(power(&e, n, span, self.var)?), span)),
        }
    }

    fn integer_exponent(&mut self) -> Result<(i64, SourceSpan), ParseError> {
        let start = self.span();
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (n, nspan) = match self.peek().clone() {
            Tok::Num(v) if v.is_integer() => {
                let span = self.bump().span;
                let n: i64 = v
                    .to_integer()
                    .try_into()
                    .map_err(|_| syntax(span, "exponent too large"))?;
                (n, span)
            }
            _ => return Err(syntax(self.span(), "expected an integer exponent")),
        };
        let mut span = start.to(nspan);
        if paren {
            span = span.to(self.expect(Tok::RParen, "')'")?);
        }
        if n > 64 {
            return Err(syntax(span, "exponent too large (limit 64)"));
        }
        Ok((if neg { -n } else { n }, span))
    }

    fn primary(&mut self) -> Result<(Value, SourceSpan), ParseError> {
        let tok = self.tokens[self.pos].clone();
        match tok.tok {
            Tok::Num(v) => {
                self.bump();
                let lit = Value::Func(Expr::constant(Scalar::from_rational(v)));
                // literal immediately followed by an identifier: "5y'", "3t^2"
                if matches!(self.peek(), Tok::Ident(_)) {
                    let (rhs, rspan) = self.power()?;
                    let span = tok.span.to(rspan);
                    return Ok((multiply(lit, rhs, span)?, span));
                }
                Ok((lit, tok.span))
            }
            Tok::LParen => {
                self.bump();
                let (v, _) = self.sum()?;
                let close = self.expect(Tok::RParen, "')'")?;
                Ok((v, tok.span.to(close)))
            }
            Tok::Ident(name) => {
                self.bump();
                self.identifier(&name, tok.span)
            }
            Tok::End => Err(syntax(tok.span, "unexpected end of input")),
            _ => Err(syntax(tok.span, "expected a number, variable, function or '('")),
        }
    }

    fn identifier(&mut self, name: &str, span: SourceSpan) -> Result<(Value, SourceSpan), ParseError> {
        if let Some(v) = Variable::from_name(name) {
            match self.var {
                Some(fixed) if fixed != v => {
                    return Err(syntax(
                        span,
                        format!("variable '{v}' used but the equation is in '{fixed}'"),
                    ))
                }
                _ => self.var = Some(v),
            }
            return Ok((Value::Func(Expr::tpow(1)), span));
        }
        match name {
            "i" => Ok((Value::Func(Expr::constant(Scalar::i())), span)),
            "y" => self.dependent(span),
            "e" => {
                if *self.peek() != Tok::Caret {
                    return Err(ParseError::UnsupportedFunction {
                        span,
                        message: "the constant e is only supported as e^(c*t)".into(),
                    });
                }
                self.bump();
                let (arg, aspan) = self.unary()?;
                let arg = as_func(arg, aspan)?;
                let full = span.to(aspan);
                Ok((Value::Func(exp_of(&arg, full)?), full))
            }
            "exp" | "sin" | "cos" | "ln" => {
                self.expect(Tok::LParen, &format!("'(' after {name}"))?;
                let (arg, aspan) = self.sum()?;
                let close = self.expect(Tok::RParen, "')'")?;
                let full = span.to(close);
                let arg = as_func(arg, aspan)?;
                let value = match name {
                    "exp" => exp_of(&arg, full)?,
                    "sin" => Expr::sin(linear_real_coeff(&arg, full, "sin")?),
                    "cos" => Expr::cos(linear_real_coeff(&arg, full, "cos")?),
                    _ => ln_of(&arg, full)?,
                };
                Ok((Value::Func(value), full))
            }
            "log" => Err(ParseError::UnsupportedFunction {
                span,
                message: "use ln(t) for the natural logarithm".into(),
            }),
            "tan" | "cot" | "sec" | "csc" | "sqrt" | "abs" | "sinh" | "cosh" | "tanh" | "asin"
            | "acos" | "atan" | "erf" => Err(ParseError::UnsupportedFunction {
                span,
                message: format!(
                    "{name} is outside the supported algebra (exp, sin, cos, ln and polynomials)"
                ),
            }),
            _ => Err(syntax(span, format!("unknown identifier '{name}'"))),
        }
    }

    fn dependent(&mut self, span: SourceSpan) -> Result<(Value, SourceSpan), ParseError> {
        if !self.allow_y {
            return Err(syntax(span, "the unknown y cannot appear in a forcing expression"));
        }
        match self.peek().clone() {
            Tok::Primes(n) => {
                let pspan = self.bump().span;
                Ok((Value::Lin(LinearForm::single(n)), span.to(pspan)))
            }
            Tok::Caret if matches!(self.tokens.get(self.pos + 1).map(|t| &t.tok), Some(Tok::LParen)) => {
                self.bump();
                let (n, espan) = self.integer_exponent()?;
                if n < 0 {
                    return Err(syntax(espan, "derivative order must be nonnegative"));
                }
                Ok((Value::Lin(LinearForm::single(n as usize)), span.to(espan)))
            }
            _ => Ok((Value::Lin(LinearForm::single(0)), span)),
        }
    }
}

fn negate(v: Value) -> Value {
    let m1 = Expr::constant(Scalar::from_int(-1));
    match v {
        Value::Func(e) => Value::Func(e.neg()),
        Value::Lin(l) => Value::Lin(l.scale(&m1)),
    }
}

fn multiply(a: Value, b: Value, span: SourceSpan) -> Result<Value, ParseError> {
    match (a, b) {
        (Value::Func(a), Value::Func(b)) => Ok(Value::Func(a.multiply(&b))),
        (Value::Func(f), Value::Lin(l)) | (Value::Lin(l), Value::Func(f)) => Ok(Value::Lin(l.scale(&f))),
        (Value::Lin(_), Value::Lin(_)) => Err(ParseError::NotLinearConstantCoefficient {
            span,
            message: "products of y terms are not linear".into(),
        }),
    }
}

fn divide(a: Value, b: Value, bspan: SourceSpan) -> Result<Value, ParseError> {
    let Value::Func(b) = b else {
        return Err(ParseError::NotLinearConstantCoefficient {
            span: bspan,
            message: "cannot divide by y".into(),
        });
    };
    let Some(c) = b.as_constant() else {
        return Err(ParseError::UnsupportedFunction {
            span: bspan,
            message: "division is only supported by constants".into(),
        });
    };
    if c.is_zero() {
        return Err(syntax(bspan, "division by zero"));
    }
    let inv = Expr::constant(c.recip());
    Ok(match a {
        Value::Func(a) => Value::Func(a.multiply(&inv)),
        Value::Lin(l) => Value::Lin(l.scale(&inv)),
    })
}

fn as_func(v: Value, span: SourceSpan) -> Result<Expr, ParseError> {
    match v {
        Value::Func(e) => Ok(e),
        Value::Lin(_) => Err(ParseError::NotLinearConstantCoefficient {
            span,
            message: "y cannot appear inside a function".into(),
        }),
    }
}

fn power(e: &Expr, n: i64, span: SourceSpan, var: Option<Variable>) -> Result<Expr, ParseError> {
    if n >= 0 {
        return Ok(e.powi(n as u32));
    }
    if let Some(c) = e.as_constant() {
        if c.is_zero() {
            return Err(syntax(span, "zero to a negative power"));
        }
        return Ok(Expr::constant(c.recip().powi((-n) as u32)));
    }
    // bare variable: t^-k
    if var.is_some() && *e == Expr::tpow(1) {
        return Ok(Expr::tpow(n as i32));
    }
    Err(ParseError::UnsupportedFunction {
        span,
        message: "negative powers are only supported for constants and the bare variable".into(),
    })
}

/// If `arg` is `c·t` (or zero) returns `c`.
fn linear_coeff(arg: &Expr) -> Option<Scalar> {
    match arg.terms() {
        [] => Some(Scalar::zero()),
        [Term { coeff, tpow: 1, logpow: 0, exponent }] if exponent.is_zero() => Some(coeff.clone()),
        _ => None,
    }
}

fn exp_of(arg: &Expr, span: SourceSpan) -> Result<Expr, ParseError> {
    match linear_coeff(arg) {
        Some(c) => Ok(Expr::exp(c)),
        None => Err(ParseError::UnsupportedFunction {
            span,
            message: "exp argument must be linear in the variable, like exp(2t) or exp(-0.5*t)".into(),
        }),
    }
}

fn linear_real_coeff(arg: &Expr, span: SourceSpan, name: &str) -> Result<Scalar, ParseError> {
    match linear_coeff(arg) {
        Some(c) if c.is_real() => Ok(c),
        _ => Err(ParseError::UnsupportedFunction {
            span,
            message: format!("{name} argument must be b*t with real b"),
        }),
    }
}

fn ln_of(arg: &Expr, span: SourceSpan) -> Result<Expr, ParseError> {
    if *arg == Expr::tpow(1) {
        Ok(Expr::ln_pow(1))
    } else {
        Err(ParseError::UnsupportedFunction { span, message: "ln only accepts the bare variable, ln(t)".into() })
    }
}

fn parse_side(
    tokens: &[Token],
    var: Option<Variable>,
    allow_y: bool,
) -> Result<(Value, SourceSpan, Option<Variable>), ParseError> {
    let mut p = Parser { tokens, pos: 0, var, allow_y };
    let (v, span) = p.sum()?;
    if *p.peek() != Tok::End {
        let s = p.span();
        let msg = match p.peek() {
            Tok::Eq => "unexpected '='".to_string(),
            Tok::RParen => "unbalanced ')'".to_string(),
            _ => "expected an operator such as '*' or '+'".to_string(),
        };
        return Err(syntax(s, msg));
    }
    Ok((v, span, p.var))
}

/// Parses a forcing expression, detecting the variable (`t` when absent).
pub fn parse_forcing(text: &str) -> Result<Expr, ParseError> {
    parse_forcing_in(text, None).map(|(e, _)| e)
}

/// Parses a forcing expression, optionally pinning the variable name.
pub fn parse_forcing_in(text: &str, var: Option<Variable>) -> Result<(Expr, Variable), ParseError> {
    let tokens = lex(text)?;
    let (v, span, var) = parse_side(&tokens, var, false)?;
    let e = as_func(v, span)?;
    Ok((e, var.unwrap_or_default()))
}

struct SplitEquation {
    lhs: LinearForm,
    lhs_span: SourceSpan,
    forcing: Expr,
    var: Variable,
}

fn split_equation(text: &str) -> Result<SplitEquation, ParseError> {
    let tokens = lex(text)?;
    let eqs: Vec<usize> =
        tokens.iter().enumerate().filter(|(_, t)| t.tok == Tok::Eq).map(|(i, _)| i).collect();
    match eqs.as_slice() {
        [] => {
            return Err(syntax(SourceSpan::new(0, text.len()), "expected '<lhs> = <forcing>'"))
        }
        [_] => {}
        [_, second, ..] => return Err(syntax(tokens[*second].span, "more than one '='")),
    }
    let eq = eqs[0];
    let mut lhs_tokens = tokens[..eq].to_vec();
    lhs_tokens.push(Token { tok: Tok::End, span: tokens[eq].span });
    if lhs_tokens.len() == 1 {
        return Err(syntax(tokens[eq].span, "missing left-hand side"));
    }
    let (lhs, lhs_span, var) = parse_side(&lhs_tokens, None, true)?;
    let lhs = match lhs {
        Value::Lin(l) => l,
        Value::Func(_) => {
            return Err(syntax(lhs_span, "left-hand side must contain y"));
        }
    };
    let rhs_tokens = &tokens[eq + 1..];
    if matches!(rhs_tokens[0].tok, Tok::End) {
        return Err(syntax(rhs_tokens[0].span, "missing right-hand side"));
    }
    let (rhs, rspan, var) = parse_side(rhs_tokens, var, false)?;
    let forcing = as_func(rhs, rspan)?;
    Ok(SplitEquation { lhs, lhs_span, forcing, var: var.unwrap_or_default() })
}

/// Parses `"<lhs> = <forcing>"` into a constant-coefficient equation.
pub fn parse_ode(text: &str) -> Result<LinearODE, ParseError> {
    let eq = split_equation(text)?;
    let order = eq
        .lhs
        .by_order
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, _)| *k)
        .max()
        .ok_or_else(|| syntax(eq.lhs_span, "left-hand side vanishes identically"))?;
    if order == 0 {
        return Err(ParseError::Ode(OdeError::OrderTooLow));
    }
    let mut coeffs = vec![Scalar::zero(); order + 1];
    for (k, c) in eq.lhs.by_order {
        match c.as_constant() {
            Some(s) if s.is_real() => coeffs[k] = s,
            _ => {
                return Err(ParseError::NotLinearConstantCoefficient {
                    span: eq.lhs_span,
                    message: format!("coefficient of the order-{k} derivative is not a real constant"),
                })
            }
        }
    }
    Ok(LinearODE::new(coeffs, eq.forcing, eq.var)?)
}

/// Parses a second-order equation `y'' + b·x^m·y = q` (optionally with a `y'`
/// term, which is recorded so that factorability recognition can reject it).
pub fn parse_power_coef_ode(text: &str) -> Result<(PowerCoefDescription, Expr, Variable), ParseError> {
    let eq = split_equation(text)?;
    let bad = |message: String| ParseError::NotLinearConstantCoefficient { span: eq.lhs_span, message };
    if eq.lhs.by_order.keys().any(|&k| k > 2) {
        return Err(bad("only second-order equations have the factorable power form".into()));
    }
    let zero = Expr::zero();
    let lead = eq.lhs.by_order.get(&2).unwrap_or(&zero);
    let lead = match lead.as_constant() {
        Some(c) if c.is_real() && !c.is_zero() => c,
        _ => return Err(bad("y'' must have a nonzero constant coefficient".into())),
    };
    let inv = lead.recip();
    let first = eq.lhs.by_order.get(&1).unwrap_or(&zero).scale(&inv);
    let first_derivative_coeff = match first.as_constant() {
        Some(c) if c.is_real() => c.re_f64(),
        _ => return Err(bad("y' coefficient must be constant".into())),
    };
    let zeroth = eq.lhs.by_order.get(&0).unwrap_or(&zero).scale(&inv);
    let (b, m) = match zeroth.terms() {
        [] => (0.0, 0),
        [Term { coeff, tpow, logpow: 0, exponent }]
            if exponent.is_zero() && coeff.is_real() && *tpow >= 0 =>
        {
            (coeff.re_f64(), *tpow)
        }
        _ => return Err(bad("y coefficient must have the form b*x^m".into())),
    };
    let forcing = eq.forcing.scale(&inv);
    Ok((PowerCoefDescription { b, m, first_derivative_coeff }, forcing, eq.var))
}

/// Reads a rational literal such as `3`, `-2/5` or `0.125`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let e = parse_forcing(text).ok()?;
    e.as_constant()?.as_rational().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn exp_cos_is_euler_expanded() {
        let e = parse_forcing("exp(t)*cos(t)").unwrap();
        let want = crate::expr::normalize(vec![
            Term::new(q(1, 2), 0, 0, Scalar::gauss_ratio((1, 1), (1, 1))),
            Term::new(q(1, 2), 0, 0, Scalar::gauss_ratio((1, 1), (-1, 1))),
        ]);
        assert_eq!(e, want);
    }

    #[test]
    fn simple_forcings() {
        assert_eq!(
            parse_forcing("t^3*exp(2t)").unwrap(),
            Expr::from_term(Term::new(q(1, 1), 3, 0, q(2, 1)))
        );
        assert_eq!(
            parse_forcing("exp(-2t)*ln(t)").unwrap(),
            Expr::from_term(Term::new(q(1, 1), 0, 1, q(-2, 1)))
        );
        assert_eq!(parse_forcing("e^(-0.5t)").unwrap(), Expr::exp(q(-1, 2)));
        assert_eq!(parse_forcing("3t^2 - 1.5e2").unwrap(), Expr::tpow(2).scale(&q(3, 1)).add(&Expr::constant(q(-150, 1))));
        assert_eq!(parse_forcing("x^2").unwrap(), Expr::tpow(2));
    }

    #[test]
    fn ode_examples() {
        let ode = parse_ode("y'' + 5y' + 6y = exp(t)*cos(t)").unwrap();
        assert_eq!(ode.coeffs(), &[q(6, 1), q(5, 1), q(1, 1)]);
        let ode = parse_ode("y'' - 4y' + 4y = t^3*exp(2t)").unwrap();
        assert_eq!(ode.coeffs(), &[q(4, 1), q(-4, 1), q(1, 1)]);
        let ode = parse_ode("y' = 0").unwrap();
        assert_eq!(ode.coeffs(), &[q(0, 1), q(1, 1)]);
        assert!(ode.forcing().is_zero());
        let ode = parse_ode("2*y^(3) - y'/2 + y'' = 1").unwrap();
        assert_eq!(ode.coeffs(), &[q(0, 1), q(-1, 2), q(1, 1), q(2, 1)]);
    }

    #[test]
    fn variable_is_fixed_per_equation() {
        assert_eq!(parse_ode("y'' + y = x").unwrap().var(), Variable::X);
        assert!(matches!(parse_ode("y'' + y = x + t"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn rejections_carry_spans() {
        let err = parse_forcing("tan(t)").unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedFunction { span, .. } if span.start == 0));
        let err = parse_forcing("exp(t^2)").unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedFunction { .. }));
        let err = parse_forcing("t + * 2").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { span, .. } if span.start == 4));
        let err = parse_forcing("(t + 1").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
        let err = parse_forcing("t $ 1").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { span, .. } if span == SourceSpan::new(2, 3)));
        assert!(err.render("t $ 1").contains("  ^"));
    }

    #[test]
    fn variable_coefficients_are_rejected_by_parse_ode() {
        let err = parse_ode("y'' - 9x^4*y = 1").unwrap_err();
        assert!(matches!(err, ParseError::NotLinearConstantCoefficient { .. }));
        let err = parse_ode("y*y' = 1").unwrap_err();
        assert!(matches!(err, ParseError::NotLinearConstantCoefficient { .. }));
    }

    #[test]
    fn power_form_is_parsed() {
        let (d, forcing, var) = parse_power_coef_ode("y'' - 9x^4*y = x").unwrap();
        assert_eq!((d.b, d.m, d.first_derivative_coeff), (-9.0, 4, 0.0));
        assert_eq!(forcing, Expr::tpow(1));
        assert_eq!(var, Variable::X);
        let (d, _, _) = parse_power_coef_ode("2y'' + y' + 2x^3*y = 0").unwrap();
        assert_eq!((d.b, d.m, d.first_derivative_coeff), (1.0, 3, 0.5));
    }

    #[test]
    fn complex_literals_parse() {
        let e = parse_forcing("(1/2 - 1/2*i)*exp((1+2*i)*t)").unwrap();
        assert_eq!(
            e,
            Expr::from_term(Term::new(
                Scalar::gauss_ratio((1, 2), (-1, 2)),
                0,
                0,
                Scalar::gauss_ratio((1, 1), (2, 1))
            ))
        );
    }
}
