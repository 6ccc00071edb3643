//! A tiny arithmetic expression language in one variable, `lambda`.
//!
//! Grammar: `+ - * / ^`, parentheses, unary minus, the functions `sqrt`,
//! `sin`, `cos`, `exp`, the constants `pi` and `e`, and numeric literals.
//! `^` is right-associative and binds tighter than unary minus, so
//! `-lambda^2` is `-(lambda^2)`. The variable may be written `lambda`, `l`
//! or `λ`.

#[allow(unused_imports)]
use num_traits::Float;
use crate::{Error, Result};
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn err(pos: usize, msg: &str) -> Error {
    Error::Expression { pos, msg: msg.to_string() }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-5; only when followed by a digit or sign+digit
            if i < chars.len() && (chars[i].1 == 'e' || chars[i].1 == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j].1 == '+' || chars[j].1 == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let end = if i < chars.len() { chars[i].0 } else { src.len() };
            let text = &src[chars[start].0..end];
            let value: f64 = text.parse().map_err(|_| err(pos, "malformed number"))?;
            out.push((pos, Tok::Num(value)));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = if i < chars.len() { chars[i].0 } else { src.len() };
            out.push((pos, Tok::Ident(src[chars[start].0..end].to_string())));
        } else {
            let tok = match ch {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
                '−' => Tok::Op('-'),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(err(pos, "unexpected character")),
            };
            out.push((pos, tok));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(pos, "unclosed parenthesis")),
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "lambda" | "l" | "λ" => Ok(Expr::Var),
                "pi" => Ok(Expr::Num(core::f64::consts::PI)),
                "e" => Ok(Expr::Num(core::f64::consts::E)),
                "sqrt" | "sin" | "cos" | "exp" => {
                    let func = match name.as_str() {
                        "sqrt" => Func::Sqrt,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Exp,
                    };
                    if self.bump() != Some(Tok::LParen) {
                        return Err(err(pos, "expected `(` after function name"));
                    }
                    let arg = self.expr()?;
                    if self.bump() != Some(Tok::RParen) {
                        return Err(err(pos, "unclosed function call"));
                    }
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                _ => Err(err(pos, "unknown identifier")),
            },
            Some(_) => Err(err(pos, "unexpected token")),
            None => Err(err(pos, "unexpected end of expression")),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let toks = tokenize(src)?;
        let mut p = Parser { toks, at: 0, len: src.len() };
        let e = p.expr()?;
        if p.at < p.toks.len() {
            return Err(err(p.pos(), "trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => lambda,
            Expr::Neg(a) => -a.eval(lambda),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(lambda), b.eval(lambda));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(lambda);
                match f {
                    Func::Sqrt => x.sqrt(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                }
            }
        }
    }

    pub fn depends_on_lambda(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_lambda(),
            Expr::Bin(_, a, b) => a.depends_on_lambda() || b.depends_on_lambda(),
        }
    }

    /// Parses an expression that must not mention `lambda` and evaluates it.
    pub fn constant(src: &str) -> Result<f64> {
        let e = Expr::parse(src)?;
        if e.depends_on_lambda() {
            return Err(err(0, "constant expected, found lambda"));
        }
        Ok(e.eval(0.0))
    }
}
