//! Recursive-descent parser for rational expressions in x, y, y' and
//! parameter identifiers.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;

use crate::arith::{Rat, RatFun, Var, X, Y, Z};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    Syntax { pos: usize, msg: String },
    NotRational { pos: usize, name: String },
    ZeroDenominator,
    UnknownSymbol(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { pos, msg } => write!(f, "syntax error at {}: {}", pos, msg),
            ParseError::NotRational { pos, name } => {
                write!(f, "not a rational expression: `{}` at {}", name, pos)
            }
            ParseError::ZeroDenominator => write!(f, "zero denominator"),
            ParseError::UnknownSymbol(s) => write!(f, "unknown symbol `{}`", s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Num(BigInt),
    Ident(String),
    YPrime,
    YSecond,
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

pub(crate) fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let t = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'=' => Tok::Eq,
            b'0'..=b'9' => {
                while i + 1 < b.len() && b[i + 1].is_ascii_digit() {
                    i += 1;
                }
                Tok::Num(src[start..=i].parse().unwrap())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < b.len() && (b[i + 1].is_ascii_alphanumeric() || b[i + 1] == b'_') {
                    i += 1;
                }
                let name = &src[start..=i];
                let mut primes = 0;
                while i + 1 < b.len() && b[i + 1] == b'\'' {
                    i += 1;
                    primes += 1;
                }
                match (name, primes) {
                    (_, 0) => Tok::Ident(name.to_string()),
                    ("y", 1) => Tok::YPrime,
                    ("y", 2) => Tok::YSecond,
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: start,
                            msg: alloc::format!("unexpected derivative `{}`", &src[start..=i]),
                        })
                    }
                }
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: alloc::format!("unexpected character `{}`", c as char),
                })
            }
        };
        out.push((t, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

/// Maps identifiers to symbol variables. Symbol `k` of the table is `Var(3 + k)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Names {
    pub names: Vec<String>,
    /// When false, unknown identifiers are an error.
    pub allow_new: bool,
}

impl Names {
    pub fn fixed(names: &[String]) -> Names {
        Names {
            names: names.to_vec(),
            allow_new: false,
        }
    }

    pub fn open() -> Names {
        Names {
            names: Vec::new(),
            allow_new: true,
        }
    }

    fn lookup(&mut self, name: &str) -> Result<Var, ParseError> {
        match name {
            "x" => return Ok(X),
            "y" => return Ok(Y),
            "z" => return Ok(Z),
            _ => {}
        }
        if let Some(k) = self.names.iter().position(|n| n == name) {
            return Ok(Var(3 + k as u32));
        }
        if !self.allow_new {
            return Err(ParseError::UnknownSymbol(name.to_string()));
        }
        self.names.push(name.to_string());
        Ok(Var(3 + self.names.len() as u32 - 1))
    }
}

pub(crate) struct Parser<'n> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    pub(crate) names: &'n mut Names,
}

impl<'n> Parser<'n> {
    pub(crate) fn new(src: &str, names: &'n mut Names) -> Result<Parser<'n>, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            i: 0,
            names,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].0
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    pub(crate) fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.to_string(),
        })
    }

    pub(crate) fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(&alloc::format!("expected {}", what))
        }
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    pub(crate) fn expr(&mut self) -> Result<RatFun, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFun, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    let d = self.unary()?;
                    acc = acc.checked_div(&d).map_err(|_| ParseError::ZeroDenominator)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFun, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFun, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let e = self.int_exponent()?;
        Ok(base.pow(e as i32))
    }

    /// Rational exponent: `n`, `-n`, or a parenthesized `n`, `-n`, `n/m`, `-n/m`.
    pub(crate) fn rat_exponent(&mut self) -> Result<Rat, ParseError> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        let n = match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                n
            }
            _ => return self.err("expected a rational exponent"),
        };
        let mut r = Rat::from_bigint(n);
        if paren {
            if *self.peek() == Tok::Slash {
                self.bump();
                match self.peek().clone() {
                    Tok::Num(d) if d != BigInt::from(0) => {
                        self.bump();
                        r = &r / &Rat::from_bigint(d);
                    }
                    _ => return self.err("expected a nonzero denominator"),
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(if neg { -r } else { r })
    }

    /// Non-negative integer exponent, optionally parenthesized.
    fn int_exponent(&mut self) -> Result<u32, ParseError> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        if *self.peek() == Tok::Minus {
            return self.err("negative exponents are not allowed");
        }
        let n = match self.bump() {
            Tok::Num(n) => n,
            Tok::Ident(_) | Tok::YPrime => {
                self.i -= 1;
                return self.err("symbolic exponents are not allowed");
            }
            _ => {
                self.i -= 1;
                return self.err("expected an integer exponent");
            }
        };
        if paren {
            if *self.peek() == Tok::Slash {
                return self.err("fractional exponents are not allowed");
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        u32::try_from(n).or_else(|_| self.err("exponent too large"))
    }

    pub(crate) fn atom(&mut self) -> Result<RatFun, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => Ok(RatFun::constant(Rat::from_bigint(n))),
            Tok::YPrime => Ok(RatFun::var(Z)),
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    return Err(ParseError::NotRational { pos, name });
                }
                let v = self.names.lookup(&name)?;
                Ok(RatFun::var(v))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::YSecond => {
                self.i -= 1;
                self.err("y'' may only appear on the left-hand side")
            }
            _ => {
                self.i -= 1;
                self.err("expected an operand")
            }
        }
    }
}

/// Parses a rational expression, registering or checking identifiers in `names`.
pub fn parse_ratfun(src: &str, names: &mut Names) -> Result<RatFun, ParseError> {
    let mut p = Parser::new(src, names)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses `y'' = expr` (the left-hand side is optional) into a rational function.
pub fn parse_rhs(src: &str, names: &mut Names) -> Result<RatFun, ParseError> {
    let mut p = Parser::new(src, names)?;
    if *p.peek() == Tok::YSecond {
        p.bump();
        p.expect(Tok::Eq, "`=`")?;
    }
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Identifiers (other than x, y, z) appearing in `src`, in order of appearance.
pub fn identifiers(src: &str) -> Result<Vec<String>, ParseError> {
    let toks = lex(src)?;
    let mut out: Vec<String> = Vec::new();
    for (k, (t, pos)) in toks.iter().enumerate() {
        if let Tok::Ident(n) = t {
            if matches!(toks.get(k + 1), Some((Tok::LParen, _))) {
                return Err(ParseError::NotRational {
                    pos: *pos,
                    name: n.clone(),
                });
            }
            if !matches!(n.as_str(), "x" | "y" | "z") && !out.contains(n) {
                out.push(n.clone());
            }
        }
    }
    Ok(out)
}
