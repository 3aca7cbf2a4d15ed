//! Parameter rules that depend on the vertex count, such as `5/n` or
//! `n^(2/3)`.
//!
//! Grammar (usual precedence, `^` binds tightest and is right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'n' | '(' expr ')'
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    N,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl Node {
    fn eval(&self, n: f64) -> f64 {
        match self {
            Node::Num(x) => *x,
            Node::N => n,
            Node::Neg(a) => -a.eval(n),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(n), b.eval(n));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
        }
    }
}

/// A parsed rule, evaluated once per vertex count.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    source: String,
    root: Node,
}

impl Rule {
    pub fn parse(src: &str) -> Result<Self, CliError> {
        let tokens = tokenize(src)?;
        let mut parser = Parser { tokens, pos: 0, src };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Self {
            source: src.trim().to_string(),
            root,
        })
    }

    pub fn constant(x: f64) -> Self {
        Self {
            source: x.to_string(),
            root: Node::Num(x),
        }
    }

    pub fn eval(&self, n: usize) -> f64 {
        self.root.eval(n as f64)
    }

    /// Value as a probability; errors outside `[0, 1]`.
    pub fn probability(&self, n: usize) -> Result<f64, CliError> {
        let v = self.eval(n);
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::usage(format!("rule '{}' gives {v} at n = {n}, not a probability", self.source)));
        }
        Ok(v)
    }

    /// Value rounded down to a positive count.
    pub fn count(&self, n: usize) -> Result<usize, CliError> {
        // Guard against values like 21.999999999999996 for n^(2/3) at n = 10648.
        let v = self.eval(n);
        let r = v.round();
        let v = if (v - r).abs() <= 1e-9 * r.abs().max(1.0) { r } else { v.floor() };
        if !(v >= 1.0) || !v.is_finite() || v > usize::MAX as f64 {
            return Err(CliError::usage(format!("rule '{}' gives {v} at n = {n}, not a positive count", self.source)));
        }
        Ok(v as usize)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl FromStr for Rule {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    N,
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, CliError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            'n' => {
                out.push(Tok::N);
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                out.push(Tok::Sym(c));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // Exponent part, e.g. 5e-4.
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| CliError::usage(format!("bad number '{text}' in rule '{src}'")))?;
                out.push(Tok::Num(v));
            }
            _ => return Err(CliError::usage(format!("unexpected character '{c}' in rule '{src}'"))),
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("empty rule"));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> CliError {
        CliError::usage(format!("{msg} in rule '{}' at token {}", self.src, self.pos + 1))
    }

    fn peek(&self) -> Option<Tok> {
        self.tokens.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, CliError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, CliError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, CliError> {
        match self.peek() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(Node::Num(x))
            }
            Some(Tok::N) => {
                self.pos += 1;
                Ok(Node::N)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("missing ')'"));
                }
                Ok(inner)
            }
            _ => Err(self.error("expected a number, 'n' or '('")),
        }
    }
}
