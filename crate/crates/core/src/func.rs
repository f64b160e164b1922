//! Numeric real functions of one variable, for forcings that fall outside
//! the exp-poly-log algebra (such as `exp(x^2/2)`).
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary | primary)*      juxtaposition multiplies
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 't' | 'pi' | 'e' | name '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;

use crate::parse::{ParseError, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Atan,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "atan" => Func::Atan,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Atan => v.atan(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var => x,
            Node::Neg(a) => -a.eval(x),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => {
                        if b.fract() == 0.0 && b.abs() <= 64.0 {
                            a.powi(b as i32)
                        } else {
                            a.powf(b)
                        }
                    }
                }
            }
            Node::Call(f, a) => f.apply(a.eval(x)),
        }
    }
}

/// A parsed real function of one variable.
#[derive(Clone, PartialEq)]
pub struct RealFn {
    root: Node,
    text: String,
}

impl RealFn {
    pub fn eval(&self, x: f64) -> f64 {
        self.root.eval(x)
    }
}

impl fmt::Debug for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealFn({:?})", self.text)
    }
}

impl fmt::Display for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    var: Option<char>,
}

fn syntax(start: usize, end: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { span: SourceSpan::new(start, end), message: message.into() }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(op @ ('*' | '/')) => {
                    self.pos += 1;
                    lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
                }
                Some(c) if c.is_alphanumeric() || c == '(' || c == '.' => {
                    lhs = Node::Bin('*', Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        match self.peek() {
            None => Err(syntax(self.pos, self.pos + 1, "unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(syntax(start, self.pos.max(start + 1), "unclosed parenthesis"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() => {
                let s = self.pos;
                while self.src[self.pos..].starts_with(|c: char| c.is_alphanumeric()) {
                    self.pos += 1;
                }
                let name = &self.src[s..self.pos];
                self.ident(name, s)
            }
            Some(c) => Err(syntax(self.pos, self.pos + c.len_utf8(), format!("unexpected '{c}'"))),
        }
    }

    fn ident(&mut self, name: &str, s: usize) -> Result<Node, ParseError> {
        match name {
            "x" | "t" => {
                let c = name.chars().next().unwrap();
                match self.var {
                    Some(v) if v != c => Err(syntax(s, self.pos, format!("mixes variables {v} and {c}"))),
                    _ => {
                        self.var = Some(c);
                        Ok(Node::Var)
                    }
                }
            }
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => {
                let Some(f) = Func::from_name(name) else {
                    let hint = if name == "log" { "; use ln for the natural logarithm" } else { "" };
                    return Err(ParseError::UnsupportedFunction {
                        span: SourceSpan::new(s, self.pos),
                        message: format!("unknown name '{name}'{hint}"),
                    });
                };
                if self.peek() != Some('(') {
                    return Err(syntax(s, self.pos, format!("{name} needs a parenthesized argument")));
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(syntax(s, self.pos.max(s + 1), "unclosed parenthesis"));
                }
                self.pos += 1;
                Ok(Node::Call(f, Box::new(arg)))
            }
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let s = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            while *p < bytes.len() && (bytes[*p].is_ascii_digit() || bytes[*p] == b'.') {
                *p += 1;
            }
        };
        let mut p = self.pos;
        digits(&mut p);
        // exponent marker only when digits follow, so "2e^x" still reads as 2*e^x
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if q < bytes.len() && bytes[q].is_ascii_digit() {
                p = q;
                digits(&mut p);
            }
        }
        self.pos = p;
        self.src[s..p].parse::<f64>().map(Node::Num).map_err(|_| syntax(s, p, "malformed number"))
    }
}

/// Parses `text` as a real function of `x` (or `t`).
pub fn parse_real_fn(text: &str) -> Result<RealFn, ParseError> {
    let mut p = Parser { src: text, pos: 0, var: None };
    let root = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(syntax(p.pos, p.pos + c.len_utf8(), format!("unexpected '{c}'")));
    }
    Ok(RealFn { root, text: text.trim().to_string() })
}
