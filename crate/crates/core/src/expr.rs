//! Arithmetic expressions over `t`, `u`, `alpha` and `lambda`.
//!
//! ```text
//! expr    = term , { ( "+" | "-" ) , term } ;
//! term    = unary , { ( "*" | "/" ) , unary } ;
//! unary   = "-" , unary | power ;
//! power   = primary , [ "^" , unary ] ;
//! primary = number | variable | function , "(" , args , ")" | "(" , expr , ")" ;
//! args    = expr , { "," , expr } ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4`. There is no implicit multiplication.

use std::fmt;

use thiserror::Error;

use crate::specfun::{gamma, mittag_leffler, MlParams, SpecFunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            Self::Syntax { offset, .. } | Self::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable '{0}' is not bound")]
    Unbound(&'static str),
    #[error(transparent)]
    Domain(#[from] SpecFunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    U,
    Alpha,
    Lambda,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::U => "u",
            Var::Alpha => "alpha",
            Var::Lambda => "lambda",
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "t" => Var::T,
            "u" => Var::U,
            "alpha" => Var::Alpha,
            "lambda" => Var::Lambda,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Pow,
    Gamma,
    Ml,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Pow => "pow",
            Func::Gamma => "gamma",
            Func::Ml => "ml",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            Func::Ml => 3,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "pow" => Func::Pow,
            "gamma" => Func::Gamma,
            "ml" => Func::Ml,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn negated(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Var(v) => b.get(*v).ok_or(EvalError::Unbound(v.name()))?,
            Expr::Neg(e) => -e.eval(b)?,
            Expr::Bin(op, l, r) => {
                let (x, y) = (l.eval(b)?, r.eval(b)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, args) => {
                let v = args.iter().map(|a| a.eval(b)).collect::<Result<Vec<_>, _>>()?;
                match f {
                    Func::Exp => v[0].exp(),
                    Func::Ln => v[0].ln(),
                    Func::Sin => v[0].sin(),
                    Func::Cos => v[0].cos(),
                    Func::Pow => v[0].powf(v[1]),
                    Func::Gamma => gamma(v[0])?,
                    Func::Ml => mittag_leffler(MlParams::new(v[0], v[1])?, v[2])?,
                }
            }
        })
    }

    /// Whether the expression mentions `v`.
    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) => e.uses(v),
            Expr::Bin(_, l, r) => l.uses(v) || r.uses(v),
            Expr::Call(_, args) => args.iter().any(|a| a.uses(v)),
        }
    }
}

/// Fully parenthesised form; parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub t: Option<f64>,
    pub u: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: Var, x: f64) -> Self {
        *self.slot(v) = Some(x);
        self
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::T => self.t,
            Var::U => self.u,
            Var::Alpha => self.alpha,
            Var::Lambda => self.lambda,
        }
    }

    fn slot(&mut self, v: Var) -> &mut Option<f64> {
        match v {
            Var::T => &mut self.t,
            Var::U => &mut self.u,
            Var::Alpha => &mut self.alpha,
            Var::Lambda => &mut self.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else { return Ok((start, Tok::End)) };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start).map(|x| (start, Tok::Num(x)));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((start, Tok::Op(c as char)));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError::Syntax { offset: start, message: format!("unexpected character '{ch}'") })
    }

    fn number(&mut self, start: usize) -> Result<f64, ParseError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let mut pos = start;
        let mut count = digits(&mut pos);
        if bytes.get(pos) == Some(&b'.') {
            pos += 1;
            count += digits(&mut pos);
        }
        if count == 0 {
            return Err(ParseError::Syntax { offset: start, message: "malformed number".into() });
        }
        if matches!(bytes.get(pos), Some(b'e' | b'E')) {
            let mut p = pos + 1;
            if matches!(bytes.get(p), Some(b'+' | b'-')) {
                p += 1;
            }
            if digits(&mut p) == 0 {
                return Err(ParseError::Syntax { offset: p, message: "expected exponent digits".into() });
            }
            pos = p;
        }
        self.pos = pos;
        self.src[start..pos]
            .parse()
            .map_err(|_| ParseError::Syntax { offset: start, message: "malformed number".into() })
    }
}

const MAX_DEPTH: usize = 200;

struct Parser<'a> {
    lexer: Lexer<'a>,
    offset: usize,
    tok: Tok,
    depth: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x) => format!("number {x}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::End => "end of input".into(),
    }
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (offset, tok) = lexer.next()?;
        Ok(Self { lexer, offset, tok, depth: 0 })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (offset, tok) = self.lexer.next()?;
        self.offset = offset;
        self.tok = tok;
        Ok(())
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset,
            message: format!("expected {expected}, found {}", describe(&self.tok)),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Op(c) {
            self.bump()
        } else {
            self.fail(&format!("'{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.depth >= MAX_DEPTH {
            return Err(ParseError::Syntax { offset: self.offset, message: "expression nested too deeply".into() });
        }
        self.depth += 1;
        let e = if self.tok == Tok::Op('-') {
            self.bump()?;
            self.unary().map(Expr::negated)
        } else {
            self.power()
        };
        self.depth -= 1;
        e
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            return Ok(Expr::bin(BinOp::Pow, base, self.unary()?));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset;
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(x) => {
                self.bump()?;
                Ok(Expr::Num(x))
            }
            Tok::Op('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump()?;
                if let Some(v) = Var::lookup(&name) {
                    return Ok(Expr::Var(v));
                }
                let Some(f) = Func::lookup(&name) else {
                    return Err(ParseError::UnknownIdentifier { offset, name });
                };
                if self.tok != Tok::Op('(') {
                    return self.fail(&format!("'(' after function '{name}'"));
                }
                self.bump()?;
                let mut args = vec![self.expr()?];
                while self.tok == Tok::Op(',') {
                    self.bump()?;
                    args.push(self.expr()?);
                }
                self.expect(')')?;
                if args.len() != f.arity() {
                    return Err(ParseError::Syntax {
                        offset,
                        message: format!("{name} takes {} argument(s), got {}", f.arity(), args.len()),
                    });
                }
                Ok(Expr::Call(f, args))
            }
            other => {
                self.tok = other;
                self.fail("an expression")
            }
        }
    }
}

/// Parses `src` into an expression tree.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail("an operator or end of input");
    }
    Ok(e)
}

/// Parses and evaluates in one go.
pub fn eval_str(src: &str, b: &Bindings) -> Result<f64, crate::Error> {
    Ok(parse(src)?.eval(b)?)
}
