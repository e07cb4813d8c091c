//! Scalar expressions in `x, y, z, t` and named parameters.
//!
//! Coefficients, loads, boundary values and initial states are written as
//! infix strings such as `"pi/4*y*x^2*sin(pi*y/2)*exp(z-1)"`. Parsing happens
//! once; evaluation walks a small tree over a slot array, which keeps the
//! per-quadrature-point cost low.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};

const SLOT_X: usize = 0;
const SLOT_T: usize = 3;
const FIRST_PARAM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, slots: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => slots[*i],
            Node::Neg(a) => -a.eval(slots),
            Node::Add(a, b) => a.eval(slots) + b.eval(slots),
            Node::Sub(a, b) => a.eval(slots) - b.eval(slots),
            Node::Mul(a, b) => a.eval(slots) * b.eval(slots),
            Node::Div(a, b) => a.eval(slots) / b.eval(slots),
            Node::Pow(a, b) => {
                let base = a.eval(slots);
                match **b {
                    Node::Const(e) if e == e.trunc() && e.abs() <= 16.0 => base.powi(e as i32),
                    _ => base.powf(b.eval(slots)),
                }
            }
            Node::Call(f, a) => f.apply(a.eval(slots)),
            Node::Min(a, b) => a.eval(slots).min(b.eval(slots)),
            Node::Max(a, b) => a.eval(slots).max(b.eval(slots)),
        }
    }

    fn visit_vars(&self, out: &mut Vec<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Var(i) => out.push(*i),
            Node::Neg(a) | Node::Call(_, a) => a.visit_vars(out),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b)
            | Node::Min(a, b)
            | Node::Max(a, b) => {
                a.visit_vars(out);
                b.visit_vars(out);
            }
        }
    }

    /// Folds constant subtrees.
    fn fold(self) -> Node {
        let fold2 = |a: Box<Node>, b: Box<Node>, mk: fn(Box<Node>, Box<Node>) -> Node| {
            let node = mk(Box::new(a.fold()), Box::new(b.fold()));
            node.collapse()
        };
        match self {
            Node::Neg(a) => Node::Neg(Box::new(a.fold())).collapse(),
            Node::Call(f, a) => Node::Call(f, Box::new(a.fold())).collapse(),
            Node::Add(a, b) => fold2(a, b, Node::Add),
            Node::Sub(a, b) => fold2(a, b, Node::Sub),
            Node::Mul(a, b) => fold2(a, b, Node::Mul),
            Node::Div(a, b) => fold2(a, b, Node::Div),
            Node::Pow(a, b) => fold2(a, b, Node::Pow),
            Node::Min(a, b) => fold2(a, b, Node::Min),
            Node::Max(a, b) => fold2(a, b, Node::Max),
            other => other,
        }
    }

    fn collapse(self) -> Node {
        let mut vars = Vec::new();
        self.visit_vars(&mut vars);
        if vars.is_empty() {
            Node::Const(self.eval(&[]))
        } else {
            self
        }
    }
}

/// A parsed expression bound to a parameter name list.
///
/// Serialises as its source text; the parameter binding is re-established by
/// whoever deserialises the surrounding model.
#[derive(Clone)]
pub struct Expr {
    source: String,
    params: Vec<String>,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.params == other.params
    }
}

impl Expr {
    /// Parses `source`; identifiers other than `x, y, z, t, pi, e` must be in `params`.
    pub fn parse(source: &str, params: &[String]) -> Result<Expr> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens: &tokens, pos: 0, params, source };
        let root = parser.expression()?;
        if parser.pos != tokens.len() {
            return Err(parser.error(format!("unexpected token {:?}", tokens[parser.pos])));
        }
        Ok(Expr { source: source.to_string(), params: params.to_vec(), root: root.fold() })
    }

    pub fn constant(value: f64) -> Expr {
        Expr { source: format!("{value:?}"), params: Vec::new(), root: Node::Const(value) }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    /// Evaluates at point `x`, time `t` and parameter vector `mu`.
    ///
    /// `mu.len()` must equal the number of bound parameters.
    pub fn eval(&self, x: &[f64; 3], t: f64, mu: &[f64]) -> f64 {
        debug_assert_eq!(mu.len(), self.params.len());
        if let Node::Const(c) = self.root {
            return c;
        }
        let mut slots = [0.0; 16];
        if FIRST_PARAM + mu.len() <= slots.len() {
            slots[..3].copy_from_slice(x);
            slots[SLOT_T] = t;
            slots[FIRST_PARAM..FIRST_PARAM + mu.len()].copy_from_slice(mu);
            self.root.eval(&slots)
        } else {
            let mut slots = vec![0.0; FIRST_PARAM + mu.len()];
            slots[..3].copy_from_slice(x);
            slots[SLOT_T] = t;
            slots[FIRST_PARAM..].copy_from_slice(mu);
            self.root.eval(&slots)
        }
    }

    /// Evaluates an expression that does not depend on space.
    pub fn eval_global(&self, t: f64, mu: &[f64]) -> f64 {
        self.eval(&[0.0; 3], t, mu)
    }

    fn vars(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.root.visit_vars(&mut v);
        v
    }

    pub fn depends_on_space(&self) -> bool {
        self.vars().iter().any(|&v| v < SLOT_T)
    }

    pub fn depends_on_time(&self) -> bool {
        self.vars().contains(&SLOT_T)
    }

    pub fn depends_on_params(&self) -> bool {
        self.vars().iter().any(|&v| v >= FIRST_PARAM)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.root {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

/// Unbound expression text as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExprSource(pub String);

impl ExprSource {
    pub fn bind(&self, params: &[String]) -> Result<Expr> {
        Expr::parse(&self.0, params)
    }
}

impl From<&str> for ExprSource {
    fn from(s: &str) -> Self {
        ExprSource(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let err = |m: String| RomError::Expression { source_text: src.to_string(), message: m };
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let v = text.parse::<f64>().map_err(|_| err(format!("bad number `{text}`")))?;
            out.push(Token::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(err(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    params: &'a [String],
    source: &'a str,
}

impl Parser<'_> {
    fn error(&self, message: String) -> RomError {
        RomError::Expression { source_text: self.source.to_string(), message }
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{op}`")))
        }
    }

    fn expression(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_op() {
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

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| self.error("unexpected end".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Const(v)),
            Token::Op('(') => {
                let inner = self.expression()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Op(c) => Err(self.error(format!("unexpected `{c}`"))),
            Token::Ident(name) => {
                if self.peek_op() == Some('(') {
                    self.pos += 1;
                    let a = self.expression()?;
                    let node = match name.as_str() {
                        "min" | "max" | "pow" => {
                            self.expect(',')?;
                            let b = self.expression()?;
                            match name.as_str() {
                                "min" => Node::Min(Box::new(a), Box::new(b)),
                                "max" => Node::Max(Box::new(a), Box::new(b)),
                                _ => Node::Pow(Box::new(a), Box::new(b)),
                            }
                        }
                        _ => {
                            let f = Func::lookup(&name).ok_or_else(|| self.error(format!("unknown function `{name}`")))?;
                            Node::Call(f, Box::new(a))
                        }
                    };
                    self.expect(')')?;
                    return Ok(node);
                }
                if let Some(k) = self.params.iter().position(|p| *p == name) {
                    return Ok(Node::Var(FIRST_PARAM + k));
                }
                match name.as_str() {
                    "x" => Ok(Node::Var(SLOT_X)),
                    "y" => Ok(Node::Var(SLOT_X + 1)),
                    "z" => Ok(Node::Var(SLOT_X + 2)),
                    "t" => Ok(Node::Var(SLOT_T)),
                    "pi" => Ok(Node::Const(std::f64::consts::PI)),
                    "e" => Ok(Node::Const(std::f64::consts::E)),
                    _ => Err(self.error(format!("unknown identifier `{name}`"))),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(src: &str, params: &[&str]) -> Expr {
        let names: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        Expr::parse(src, &names).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        let e = p("1 + 2*3^2 - 8/4/2", &[]);
        assert_eq!(e.as_constant(), Some(1.0 + 18.0 - 1.0));
        assert_eq!(p("-2^2", &[]).as_constant(), Some(-4.0));
        assert_eq!(p("2^3^2", &[]).as_constant(), Some(512.0));
        assert_eq!(p("1.5e-3*2E2", &[]).as_constant(), Some(0.3));
    }

    #[test]
    fn test_case_forcing_evaluates() {
        let e = p("pi/4*y*x^2*sin(pi*y/2)*exp(z-1)", &[]);
        let (x, y, z) = (0.3, 0.7, 0.2);
        let expect = PI / 4.0 * y * x * x * (PI * y / 2.0).sin() * (z - 1.0f64).exp();
        assert!((e.eval(&[x, y, z], 0.0, &[]) - expect).abs() < 1e-15);
        assert!(e.depends_on_space());
        assert!(!e.depends_on_time());
        assert!(!e.depends_on_params());
    }

    #[test]
    fn parameters_bind_by_name() {
        let e = p("alpha*t + max(beta, 2)", &["alpha", "beta"]);
        assert_eq!(e.eval(&[0.0; 3], 2.0, &[3.0, 1.0]), 8.0);
        assert!(e.depends_on_params() && e.depends_on_time() && !e.depends_on_space());
    }

    #[test]
    fn rejects_unknown_names_and_trailing_tokens() {
        assert!(Expr::parse("gamma*x", &[]).is_err());
        assert!(Expr::parse("foo(x)", &[]).is_err());
        assert!(Expr::parse("x y", &[]).is_err());
        assert!(Expr::parse("(x", &[]).is_err());
        assert!(Expr::parse("x $ 2", &[]).is_err());
    }
}
