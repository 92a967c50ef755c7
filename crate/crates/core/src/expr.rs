//! Parsing and printing of map expressions and complex scalars.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' INTEGER)*
//! atom   := NUMBER | NUMBER 'i' | 'i' | 'z' | '(' expr ')'
//! ```
//!
//! Numbers are decimal literals with an optional exponent (`1.5`, `.25`,
//! `2e-3`). Every rejection carries the byte offset of the offending input.

use std::fmt::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::poly::{Polynomial, ONE, ZERO};

pub use crate::poly::ComplexNumber;

/// Largest polynomial degree an expression may expand to.
pub const MAX_EXPR_DEGREE: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum MapExpression {
    Var,
    Literal(Complex64),
    Neg(Box<MapExpression>),
    Add(Box<MapExpression>, Box<MapExpression>),
    Sub(Box<MapExpression>, Box<MapExpression>),
    Mul(Box<MapExpression>, Box<MapExpression>),
    Div(Box<MapExpression>, Box<MapExpression>),
    Pow(Box<MapExpression>, u32),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, imag: bool, integer: Option<u32> },
    Ident(String),
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
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    /// Scans a decimal literal at the cursor; the caller guarantees it starts
    /// with a digit or '.'.
    fn number(&mut self) -> Result<(f64, Option<u32>)> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut i = self.pos;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let int_end = i;
        let mut plain_integer = true;
        if i < bytes.len() && bytes[i] == b'.' {
            plain_integer = false;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        let mantissa = &self.src[start..i];
        if !mantissa.bytes().any(|b| b.is_ascii_digit()) {
            return Err(Error::syntax(start, "expected digits"));
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
                plain_integer = false;
                i = j;
            }
        }
        let text = &self.src[start..i];
        let value: f64 = text
            .parse()
            .map_err(|_| Error::syntax(start, format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(Error::syntax(start, format!("number `{text}` is out of range")));
        }
        self.pos = i;
        let integer = if plain_integer && int_end == i {
            text.parse::<u32>().ok()
        } else {
            None
        };
        Ok((value, integer))
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        self.skip_ws();
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok((start, Tok::End));
        };
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let (value, integer) = self.number()?;
                let bytes = self.src.as_bytes();
                let imag = bytes.get(self.pos) == Some(&b'i')
                    && !bytes
                        .get(self.pos + 1)
                        .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
                if imag {
                    self.pos += 1;
                }
                return Ok((
                    start,
                    Tok::Num {
                        value,
                        imag,
                        integer: if imag { None } else { integer },
                    },
                ));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let rest = &self.src[start..];
                let len = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .unwrap_or(rest.len());
                self.pos += len;
                return Ok((start, Tok::Ident(rest[..len].to_string())));
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(Error::syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        self.pos += 1;
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer { src, pos: 0 };
        let (at, tok) = lexer.next()?;
        Ok(Parser { lexer, tok, at })
    }

    fn bump(&mut self) -> Result<()> {
        let (at, tok) = self.lexer.next()?;
        self.at = at;
        self.tok = tok;
        Ok(())
    }

    fn expr(&mut self) -> Result<MapExpression> {
        let mut lhs = self.term()?;
        loop {
            let ctor = match self.tok {
                Tok::Plus => MapExpression::Add,
                Tok::Minus => MapExpression::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = ctor(Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<MapExpression> {
        let mut lhs = self.unary()?;
        loop {
            let ctor = match self.tok {
                Tok::Star => MapExpression::Mul,
                Tok::Slash => MapExpression::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = ctor(Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<MapExpression> {
        if self.tok == Tok::Minus {
            self.bump()?;
            return Ok(MapExpression::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<MapExpression> {
        let mut base = self.atom()?;
        while self.tok == Tok::Caret {
            self.bump()?;
            match self.tok {
                Tok::Num {
                    integer: Some(n), ..
                } => {
                    base = MapExpression::Pow(Box::new(base), n);
                    self.bump()?;
                }
                _ => {
                    return Err(Error::syntax(
                        self.at,
                        "exponent must be a nonnegative integer literal",
                    ))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MapExpression> {
        let at = self.at;
        let node = match &self.tok {
            Tok::Num { value, imag, .. } => {
                if *imag {
                    MapExpression::Literal(Complex64::new(0.0, *value))
                } else {
                    MapExpression::Literal(Complex64::new(*value, 0.0))
                }
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => MapExpression::Var,
                "i" => MapExpression::Literal(Complex64::new(0.0, 1.0)),
                _ => {
                    return Err(Error::UnknownIdentifier {
                        name: name.clone(),
                        offset: at,
                    })
                }
            },
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(Error::syntax(self.at, "expected `)`"));
                }
                inner
            }
            Tok::End => return Err(Error::syntax(at, "unexpected end of input")),
            other => return Err(Error::syntax(at, format!("unexpected token {other:?}"))),
        };
        self.bump()?;
        Ok(node)
    }
}

/// Parses an expression in the variable `z`.
pub fn parse_map(text: &str) -> Result<MapExpression> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(Error::syntax(p.at, "unexpected trailing input"));
    }
    Ok(e)
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (either order, each part optionally
/// signed, `i` alone meaning `1i`).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let mut lx = Lexer { src: text, pos: 0 };
    let mut value = ZERO;
    let mut seen_real = false;
    let mut seen_imag = false;
    let mut first = true;
    loop {
        lx.skip_ws();
        let sign_at = lx.pos;
        let sign = match lx.peek_byte() {
            Some(b'+') if !first => {
                lx.pos += 1;
                1.0
            }
            Some(b'-') => {
                lx.pos += 1;
                -1.0
            }
            None if !first => break,
            Some(_) if !first => return Err(Error::syntax(sign_at, "expected `+` or `-`")),
            _ => 1.0,
        };
        lx.skip_ws();
        let at = lx.pos;
        let (mag, imag) = match lx.peek_byte() {
            Some(b'0'..=b'9') | Some(b'.') => {
                let (v, _) = lx.number()?;
                if lx.peek_byte() == Some(b'i') {
                    lx.pos += 1;
                    (v, true)
                } else {
                    (v, false)
                }
            }
            Some(b'i') => {
                lx.pos += 1;
                (1.0, true)
            }
            _ => return Err(Error::syntax(at, "expected a number or `i`")),
        };
        if (imag && seen_imag) || (!imag && seen_real) {
            return Err(Error::syntax(at, "repeated real or imaginary part"));
        }
        if imag {
            seen_imag = true;
            value.im = sign * mag;
        } else {
            seen_real = true;
            value.re = sign * mag;
        }
        first = false;
        if seen_real && seen_imag {
            lx.skip_ws();
            if lx.pos < text.len() {
                return Err(Error::syntax(lx.pos, "unexpected trailing input"));
            }
            break;
        }
    }
    Ok(value)
}

fn precedence(e: &MapExpression) -> u8 {
    match e {
        MapExpression::Add(..) | MapExpression::Sub(..) => 1,
        MapExpression::Mul(..) | MapExpression::Div(..) => 2,
        MapExpression::Neg(_) => 3,
        MapExpression::Pow(..) => 4,
        MapExpression::Var => 5,
        MapExpression::Literal(c) => {
            if literal_is_atomic(*c) {
                5
            } else {
                0
            }
        }
    }
}

fn literal_is_atomic(c: Complex64) -> bool {
    (c.im == 0.0 && !c.re.is_sign_negative()) || (c.re == 0.0 && !c.im.is_sign_negative())
}

fn write_real(out: &mut String, v: f64) {
    let _ = write!(out, "{v}");
}

fn write_literal(out: &mut String, c: Complex64) {
    if c.im == 0.0 && !c.re.is_sign_negative() {
        write_real(out, c.re);
    } else if c.re == 0.0 && !c.im.is_sign_negative() {
        write_real(out, c.im);
        out.push('i');
    } else {
        out.push('(');
        if c.re != 0.0 {
            write_real(out, c.re);
        }
        out.push(if c.im.is_sign_negative() { '-' } else { '+' });
        write_real(out, c.im.abs());
        out.push_str("i)");
    }
}

impl MapExpression {
    fn write(&self, out: &mut String) {
        let child = |out: &mut String, e: &MapExpression, min: u8| {
            if precedence(e) < min {
                out.push('(');
                e.write(out);
                out.push(')');
            } else {
                e.write(out);
            }
        };
        match self {
            MapExpression::Var => out.push('z'),
            MapExpression::Literal(c) => write_literal(out, *c),
            MapExpression::Neg(x) => {
                out.push('-');
                child(out, x, 3);
            }
            MapExpression::Add(l, r) | MapExpression::Sub(l, r) => {
                child(out, l, 1);
                out.push(if matches!(self, MapExpression::Add(..)) { '+' } else { '-' });
                child(out, r, 2);
            }
            MapExpression::Mul(l, r) | MapExpression::Div(l, r) => {
                child(out, l, 2);
                out.push(if matches!(self, MapExpression::Mul(..)) { '*' } else { '/' });
                child(out, r, 3);
            }
            MapExpression::Pow(b, n) => {
                child(out, b, 4);
                let _ = write!(out, "^{n}");
            }
        }
    }

    /// Expands the expression into `(numerator, denominator)`.
    pub fn to_rational_function(&self) -> Result<(Polynomial, Polynomial)> {
        let one = Polynomial::constant(ONE);
        let (n, d) = match self {
            MapExpression::Var => (Polynomial::monomial(ONE, 1), one),
            MapExpression::Literal(c) => (Polynomial::constant(*c), one),
            MapExpression::Neg(x) => {
                let (n, d) = x.to_rational_function()?;
                (n.scale(-ONE), d)
            }
            MapExpression::Add(l, r) | MapExpression::Sub(l, r) => {
                let (n1, d1) = l.to_rational_function()?;
                let (mut n2, d2) = r.to_rational_function()?;
                if matches!(self, MapExpression::Sub(..)) {
                    n2 = n2.scale(-ONE);
                }
                if d1 == d2 {
                    (n1.add(&n2), d1)
                } else {
                    (n1.mul(&d2).add(&n2.mul(&d1)), d1.mul(&d2))
                }
            }
            MapExpression::Mul(l, r) => {
                let (n1, d1) = l.to_rational_function()?;
                let (n2, d2) = r.to_rational_function()?;
                (n1.mul(&n2), d1.mul(&d2))
            }
            MapExpression::Div(l, r) => {
                let (n1, d1) = l.to_rational_function()?;
                let (n2, d2) = r.to_rational_function()?;
                if n2.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                (n1.mul(&d2), d1.mul(&n2))
            }
            MapExpression::Pow(b, k) => {
                let (n, d) = b.to_rational_function()?;
                let needed = (n.degree().max(d.degree()) as u128) * (*k as u128);
                if needed > MAX_EXPR_DEGREE as u128 {
                    return Err(Error::BudgetExceeded {
                        needed,
                        cap: MAX_EXPR_DEGREE,
                    });
                }
                (n.pow(*k), d.pow(*k))
            }
        };
        let needed = n.degree().max(d.degree());
        if needed > MAX_EXPR_DEGREE {
            return Err(Error::BudgetExceeded {
                needed: needed as u128,
                cap: MAX_EXPR_DEGREE,
            });
        }
        Ok((n, d))
    }
}

impl fmt::Display for MapExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

/// Renders one complex number in the form accepted by `parse_complex`.
pub fn format_complex(c: Complex64) -> String {
    let mut s = String::new();
    if c.im == 0.0 {
        write_real(&mut s, c.re);
    } else if c.re == 0.0 {
        write_real(&mut s, c.im);
        s.push('i');
    } else {
        write_real(&mut s, c.re);
        s.push(if c.im.is_sign_negative() { '-' } else { '+' });
        write_real(&mut s, c.im.abs());
        s.push('i');
    }
    s
}

fn write_polynomial(out: &mut String, coeffs: &[Complex64]) {
    let mut first = true;
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c == ZERO {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => "z".to_string(),
            _ => format!("z^{k}"),
        };
        let (negative, mut body) = if c.im == 0.0 {
            let a = c.re.abs();
            let body = if a == 1.0 && k > 0 {
                String::new()
            } else {
                let mut s = String::new();
                write_real(&mut s, a);
                s
            };
            (c.re < 0.0, body)
        } else if c.re == 0.0 {
            let mut s = String::new();
            write_real(&mut s, c.im.abs());
            s.push('i');
            (c.im < 0.0, s)
        } else {
            let mut s = String::new();
            write_literal(&mut s, c);
            (false, s)
        };
        if !mono.is_empty() {
            if !body.is_empty() {
                body.push('*');
            }
            body.push_str(&mono);
        }
        if negative {
            out.push('-');
        } else if !first {
            out.push('+');
        }
        out.push_str(&body);
        first = false;
    }
    if first {
        out.push('0');
    }
}

/// Canonical affine rendering `num` or `(num)/(den)` of a normalized map.
pub fn format_map(m: &RationalMap) -> String {
    let num = m.numerator();
    let den = m.denominator();
    let mut out = String::new();
    if den.degree() == 0 {
        let c = den.coeffs()[0];
        if c == ONE {
            write_polynomial(&mut out, num.coeffs());
        } else {
            write_polynomial(&mut out, num.scale(c.inv()).coeffs());
        }
    } else {
        out.push('(');
        write_polynomial(&mut out, num.coeffs());
        out.push_str(")/(");
        write_polynomial(&mut out, den.coeffs());
        out.push(')');
    }
    out
}
