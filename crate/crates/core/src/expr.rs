//! A small arithmetic language for user potentials in the variables mu1..mu9.
//!
//! Precedence: `^` binds tighter than unary minus, which binds tighter than `*` `/`,
//! which bind tighter than `+` `-`. `^` is right-associative; `-2^2` is `-(2^2)`.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Func {
    Log,
    Sqrt,
    Exp,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
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
    Const(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unknown identifier '{name}' at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("function '{name}' at position {position} takes exactly one argument")]
    ArityError { name: String, position: usize },
    #[error("variable mu{index} at position {position} exceeds dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize, position: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in {node}: argument {value}")]
    DomainError { node: String, value: f64 },
    #[error("division by zero in {node}")]
    DivByZero { node: String },
    #[error("point has {got} coordinates, expression needs {need}")]
    PointDimension { need: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError::SyntaxError {
                position: start,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    return Err(ParseError::SyntaxError {
                        position: start,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            };
            out.push((tok, start));
            i += c.len_utf8();
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }
    fn at(&self) -> usize {
        self.toks[self.pos].1
    }
    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn err<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError { position: self.at(), message: message.to_string() })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if *self.peek() == Tok::Op('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, position) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected ')'");
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "log" => Some(Func::Log),
                    "sqrt" => Some(Func::Sqrt),
                    "exp" => Some(Func::Exp),
                    _ => None,
                };
                if let Some(f) = func {
                    if *self.peek() != Tok::LParen {
                        return self.err(&format!("expected '(' after {name}"));
                    }
                    self.bump();
                    if *self.peek() == Tok::RParen {
                        return Err(ParseError::ArityError { name, position });
                    }
                    let arg = self.expr()?;
                    if *self.peek() == Tok::Comma {
                        return Err(ParseError::ArityError { name, position });
                    }
                    if *self.peek() != Tok::RParen {
                        return self.err("expected ')'");
                    }
                    self.bump();
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(d) = name.strip_prefix("mu") {
                    if d.len() == 1 && matches!(d.as_bytes()[0], b'1'..=b'9') {
                        let index = (d.as_bytes()[0] - b'0') as usize;
                        if index > self.dim {
                            return Err(ParseError::DimensionMismatch { index, dim: self.dim, position });
                        }
                        return Ok(Expr::Var(index - 1));
                    }
                }
                Err(ParseError::UnknownIdentifier { name, position })
            }
            Tok::End => Err(ParseError::SyntaxError { position, message: "unexpected end of input".into() }),
            other => Err(ParseError::SyntaxError { position, message: format!("unexpected token {other:?}") }),
        }
    }
}

/// Parse `src` as an expression in the variables mu1..mu{dim}.
pub fn parse(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, dim };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let need = self.max_var().map_or(0, |v| v + 1);
        if x.len() < need {
            return Err(EvalError::PointDimension { need, got: x.len() });
        }
        self.eval_unchecked(x)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval_unchecked(x)?,
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.eval_unchecked(x)?, b.eval_unchecked(x)?);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => {
                        if v == 0.0 {
                            return Err(EvalError::DivByZero { node: self.to_string() });
                        }
                        u / v
                    }
                    BinOp::Pow => {
                        let r = u.powf(v);
                        if r.is_nan() && !u.is_nan() && !v.is_nan() {
                            return Err(EvalError::DomainError { node: self.to_string(), value: u });
                        }
                        if u == 0.0 && v < 0.0 {
                            return Err(EvalError::DivByZero { node: self.to_string() });
                        }
                        r
                    }
                }
            }
            Expr::Call(f, a) => {
                let u = a.eval_unchecked(x)?;
                match f {
                    Func::Log if u <= 0.0 => return Err(EvalError::DomainError { node: self.to_string(), value: u }),
                    Func::Sqrt if u < 0.0 => return Err(EvalError::DomainError { node: self.to_string(), value: u }),
                    Func::Log => u.ln(),
                    Func::Sqrt => u.sqrt(),
                    Func::Exp => u.exp(),
                }
            }
        })
    }

    /// Largest zero-based variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
        }
    }
}

/// Canonical form: every compound node parenthesized, constants printed round-trip exact.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(i) => write!(f, "mu{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse("mu1^2 + 0.5*log(mu2)", 2).unwrap();
        assert_eq!(e.eval(&[2.0, 1.0]).unwrap(), 4.0);
        assert_eq!(parse("2^3^2", 1).unwrap().eval(&[0.0]).unwrap(), 512.0);
        assert_eq!(parse("-2^2", 1).unwrap().eval(&[0.0]).unwrap(), -4.0);
        assert_eq!(parse("2^-1", 1).unwrap().eval(&[0.0]).unwrap(), 0.5);
        assert_eq!(parse("8/4/2", 1).unwrap().eval(&[0.0]).unwrap(), 1.0);
        assert_eq!(parse("1-2-3", 1).unwrap().eval(&[0.0]).unwrap(), -4.0);
        assert_eq!(parse(" 1.5e1 *mu1 ", 1).unwrap().eval(&[2.0]).unwrap(), 30.0);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse("mu1*(", 1).unwrap_err(),
            ParseError::SyntaxError { position: 5, message: "unexpected end of input".into() }
        );
        assert!(matches!(parse("foo(mu1)", 1), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse("mu0", 1), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse("mu10", 9), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse("log(mu1, mu1)", 1), Err(ParseError::ArityError { .. })));
        assert!(matches!(parse("sqrt()", 1), Err(ParseError::ArityError { .. })));
        assert!(matches!(parse("mu3", 2), Err(ParseError::DimensionMismatch { index: 3, dim: 2, .. })));
        assert!(matches!(parse("2mu1", 1), Err(ParseError::SyntaxError { position: 1, .. })));
        assert!(matches!(parse("1 $ 2", 1), Err(ParseError::SyntaxError { position: 2, .. })));
    }

    #[test]
    fn eval_examples() {
        let e = parse("log(mu1)", 1).unwrap();
        assert!((e.eval(&[std::f64::consts::E]).unwrap() - 1.0).abs() <= 1e-15);
        assert!(matches!(parse("1/mu1", 1).unwrap().eval(&[0.0]), Err(EvalError::DivByZero { .. })));
        assert_eq!(parse("sqrt(mu1*mu2)", 2).unwrap().eval(&[4.0, 9.0]).unwrap(), 6.0);
        let err = parse("log(mu1-1)", 1).unwrap().eval(&[0.5]).unwrap_err();
        assert_eq!(err, EvalError::DomainError { node: "log((mu1-1.0))".into(), value: -0.5 });
        assert!(matches!(parse("sqrt(mu1)", 1).unwrap().eval(&[-1.0]), Err(EvalError::DomainError { .. })));
        assert!(matches!(parse("mu2", 2).unwrap().eval(&[1.0]), Err(EvalError::PointDimension { .. })));
    }

    #[test]
    fn canonical_printer() {
        let e = parse("-mu1^2*3 - exp(-mu2)/2", 2).unwrap();
        let s = e.to_string();
        assert_eq!(s, "(((-(mu1^2.0))*3.0)-(exp((-mu2))/2.0))");
        assert_eq!(parse(&s, 2).unwrap(), e);
    }
}
