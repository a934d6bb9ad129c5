//! Recursive-descent parser for rational expressions in one variable `u`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary | <juxtaposed power>)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' atom)*
//! atom   := number | 'i' | 'u' | '(' expr ')'
//! ```
//!
//! Exponents must evaluate to nonnegative integer constants. Juxtaposition
//! (`2i`, `3u`, `(u-1)(u+1)`) multiplies.

use super::RationalFn;
use crate::error::{Error, Result};
use crate::{c64, Complex};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    I,
    U,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            out.push(t);
            if t.0 == Tok::End {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'i' => Tok::I,
            b'u' => Tok::U,
            b'0'..=b'9' | b'.' => return self.number(start),
            _ => {
                return Err(Error::Parse {
                    offset: start,
                    expected: vec!["number", "'i'", "'u'", "operator", "'('", "')'"],
                })
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_digit() {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(Error::Parse {
                offset: start,
                expected: vec!["digit"],
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let v = text.parse::<f64>().map_err(|_| Error::Parse {
            offset: start,
            expected: vec!["number"],
        })?;
        Ok((Tok::Num(v), start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Tok {
        self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: Vec<&'static str>) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            expected,
        })
    }

    fn expr(&mut self) -> Result<RationalFn> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFn> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.unary()?)?;
                }
                Tok::Slash => {
                    self.bump();
                    let at = self.offset();
                    let rhs = self.unary()?;
                    if rhs.is_zero() {
                        return Err(Error::Parse {
                            offset: at,
                            expected: vec!["nonzero divisor"],
                        });
                    }
                    acc = acc.div(&rhs)?;
                }
                Tok::Num(_) | Tok::I | Tok::U | Tok::LParen => {
                    acc = acc.mul(&self.power()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFn> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFn> {
        let mut base = self.atom()?;
        while self.peek() == Tok::Caret {
            self.bump();
            let at = self.offset();
            let exp = self.atom()?;
            if !exp.is_constant() {
                return Err(Error::NonRational { offset: at });
            }
            let e = exp.eval(Complex::ZERO)?;
            if e.im != 0.0 || e.re < 0.0 || e.re.fract() != 0.0 || e.re > 64.0 {
                return Err(Error::Parse {
                    offset: at,
                    expected: vec!["nonnegative integer exponent"],
                });
            }
            base = base.pow(e.re as u32);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalFn> {
        let r = match self.peek() {
            Tok::Num(v) => RationalFn::constant(c64(v, 0.0)),
            Tok::I => RationalFn::constant(c64(0.0, 1.0)),
            Tok::U => RationalFn::var(),
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != Tok::RParen {
                    return self.fail(vec!["')'", "operator"]);
                }
                inner
            }
            _ => return self.fail(vec!["number", "'i'", "'u'", "'('"]),
        };
        self.bump();
        Ok(r)
    }
}

/// Parses a rational expression in `u` with complex coefficients.
pub fn parse_ratfn(text: &str) -> Result<RationalFn> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser { toks, at: 0 };
    let r = p.expr()?;
    if p.peek() != Tok::End {
        return p.fail(vec!["operator", "end of input"]);
    }
    Ok(r)
}

/// Parses a complex constant such as `1.5-2i` (any `u`-free expression).
pub fn parse_complex(text: &str) -> Result<Complex> {
    let r = parse_ratfn(text)?;
    if !r.is_constant() {
        return Err(Error::Config(format!("`{text}` is not a constant")));
    }
    r.eval(Complex::ZERO)
}
