//! Parser for polynomial literals such as `z^2 - 0.25`, `(1+2i)*z`, `3z - x`.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*')? unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := number 'i'? | 'i' | 'z' | 'x' | '(' expr ')'
//! ```
//!
//! `x` is a real family parameter and is only accepted when a value for it
//! is supplied.

use std::fmt;

use super::ComplexPoly;
use crate::scalar::{creal, Cx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyParseError {
    /// Byte offset of the offending token in the input.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for PolyParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at offset {})", self.message, self.offset)
    }
}

impl std::error::Error for PolyParseError {}

pub fn parse_poly<T: Real>(text: &str) -> Result<ComplexPoly<T>, PolyParseError> {
    Parser::new(text, None).parse_all()
}

/// Parses a literal that may mention the family parameter `x`.
pub fn parse_poly_with_param<T: Real>(text: &str, x: f64) -> Result<ComplexPoly<T>, PolyParseError> {
    Parser::new(text, Some(x)).parse_all()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    param: Option<f64>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, param: Option<f64>) -> Self {
        Self { src: text.as_bytes(), pos: 0, param }
    }

    fn err<R>(&self, offset: usize, message: impl Into<String>) -> Result<R, PolyParseError> {
        Err(PolyParseError { offset, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse_all<T: Real>(mut self) -> Result<ComplexPoly<T>, PolyParseError> {
        if self.peek().is_none() {
            return self.err(0, "empty polynomial literal");
        }
        let p = self.expr()?;
        if let Some(c) = self.peek() {
            return self.err(self.pos, format!("unexpected character '{}'", c as char));
        }
        Ok(p)
    }

    fn expr<T: Real>(&mut self) -> Result<ComplexPoly<T>, PolyParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(c: u8) -> bool {
        c.is_ascii_digit() || c == b'.' || c == b'(' || c == b'z' || c == b'x' || c == b'i'
    }

    fn term<T: Real>(&mut self) -> Result<ComplexPoly<T>, PolyParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(c) if Self::starts_factor(c) => {
                    acc = &acc * &self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary<T: Real>(&mut self) -> Result<ComplexPoly<T>, PolyParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power<T: Real>(&mut self) -> Result<ComplexPoly<T>, PolyParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return self.err(start, "expected a non-negative integer exponent after '^'");
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("0");
            let k: u32 = match text.parse() {
                Ok(k) if k <= 64 => k,
                _ => return self.err(start, "exponent out of range"),
            };
            let mut acc = ComplexPoly::one();
            for _ in 0..k {
                acc = &acc * &base;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom<T: Real>(&mut self) -> Result<ComplexPoly<T>, PolyParseError> {
        let Some(c) = self.peek() else {
            return self.err(self.pos, "unexpected end of input");
        };
        match c {
            b'(' => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err(open, "unbalanced parenthesis");
                }
                self.pos += 1;
                Ok(inner)
            }
            b'z' => {
                self.pos += 1;
                Ok(ComplexPoly::z())
            }
            b'x' => {
                let at = self.pos;
                self.pos += 1;
                match self.param {
                    Some(v) => Ok(ComplexPoly::constant(creal(T::lit(v)))),
                    None => self.err(at, "family parameter 'x' used outside a family sweep"),
                }
            }
            b'i' => {
                self.pos += 1;
                Ok(ComplexPoly::constant(Cx::new(T::zero(), T::one())))
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Ok(ComplexPoly::constant(Cx::new(T::zero(), T::lit(v))))
                } else {
                    Ok(ComplexPoly::constant(creal(T::lit(v))))
                }
            }
            other => self.err(self.pos, format!("unexpected character '{}'", other as char)),
        }
    }

    fn number(&mut self) -> Result<f64, PolyParseError> {
        let start = self.pos;
        let n = self.src.len();
        while self.pos < n && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        // Optional exponent: e or E, optional sign, digits.
        if self.pos < n && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < n && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < n && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().or_else(|_| self.err(start, format!("malformed number '{text}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = ComplexPoly<f64>;

    fn p(s: &str) -> P {
        parse_poly(s).unwrap()
    }

    #[test]
    fn literals() {
        assert_eq!(p("z"), P::z());
        assert_eq!(p("z^2 - 0.25"), P::from_real(&[-0.25, 0.0, 1.0]));
        assert_eq!(p("2z"), P::from_real(&[0.0, 2.0]));
        assert_eq!(p("-z - z^2"), P::from_real(&[0.0, -1.0, -1.0]));
        assert_eq!(p("(z+1)^2"), P::from_real(&[1.0, 2.0, 1.0]));
        assert_eq!(p("1e-1*z"), P::from_real(&[0.0, 0.1]));
        assert_eq!(p("(1+2i)"), P::constant(Cx::new(1.0, 2.0)));
        assert_eq!(p("1+2i"), P::constant(Cx::new(1.0, 2.0)));
        assert_eq!(p("i z"), P::monomial(Cx::new(0.0, 1.0), 1));
        assert_eq!(p("0"), P::zero());
    }

    #[test]
    fn family_parameter() {
        let q: P = parse_poly_with_param("z - x", 0.04).unwrap();
        assert_eq!(q, P::from_real(&[-0.04, 1.0]));
        let e = parse_poly::<f64>("z - x").unwrap_err();
        assert_eq!(e.offset, 4);
    }

    #[test]
    fn rejects_double_caret_at_the_token() {
        let e = parse_poly::<f64>("z^^2").unwrap_err();
        assert_eq!(e.offset, 2);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly::<f64>("").is_err());
        assert!(parse_poly::<f64>("z +").is_err());
        assert!(parse_poly::<f64>("(z").is_err());
        assert_eq!(parse_poly::<f64>("z $").unwrap_err().offset, 2);
    }
}
