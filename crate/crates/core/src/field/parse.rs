//! Expression grammar shared by every input file:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' exponent)?
//! atom  := integer | 'i' | 'zeta' '(' integer ')' | name | '(' expr ')'
//! ```
//!
//! Names match `[a-z][a-z0-9_]*`; exponents are (possibly negative) integers.

use num_bigint::BigInt;

use super::poly::Var;
use super::ratexpr::RatExpr;
use super::scalar::Scalar;
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

pub fn parse_expr(src: &str) -> Result<RatExpr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// True if `s` is a valid indeterminate name (and not a reserved word).
pub fn is_valid_name(s: &str) -> bool {
    let b = s.as_bytes();
    !b.is_empty()
        && b[0].is_ascii_lowercase()
        && b.iter().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || *c == b'_')
        && s != "i"
        && s != "zeta"
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<RatExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatExpr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.unary()?;
                acc = acc.div(&d).ok_or(Error::Parse { pos: at, msg: "division by zero".into() })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatExpr> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatExpr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let n = self.integer()?;
        if paren {
            self.expect(b')')?;
        }
        let n: i64 = n.try_into().map_err(|_| self.err("exponent too large"))?;
        let e = if neg { -n } else { n };
        base.pow(e).ok_or_else(|| self.err("negative power of zero"))
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<RatExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(RatExpr::scalar(Scalar::from_bigint(self.integer()?))),
            Some(c) if c.is_ascii_lowercase() => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    if c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "i" => Ok(RatExpr::i()),
                    "zeta" => {
                        self.expect(b'(')?;
                        let n = self.integer()?;
                        self.expect(b')')?;
                        let n: u32 = n.try_into().map_err(|_| self.err("zeta level too large"))?;
                        if n == 0 {
                            return Err(self.err("zeta(0) is undefined"));
                        }
                        Ok(RatExpr::scalar(Scalar::zeta(n)))
                    }
                    _ => Ok(RatExpr::from_poly(Var::new(name).into())),
                }
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let e = parse_expr("(1 + i*s)/(1 - i*s)").unwrap();
        let s = RatExpr::var("s");
        let is = RatExpr::i().mul(&s);
        assert_eq!(e, RatExpr::one().add(&is).div(&RatExpr::one().sub(&is)).unwrap());
        assert_eq!(parse_expr("-x^2").unwrap(), RatExpr::var("x").pow(2).unwrap().neg());
        assert_eq!(parse_expr("x^-1").unwrap(), RatExpr::var("x").inv().unwrap());
        assert_eq!(parse_expr("zeta(3)^3").unwrap(), RatExpr::one());
        assert_eq!(parse_expr("3/6").unwrap(), parse_expr("1/2").unwrap());
    }

    #[test]
    fn errors() {
        assert!(parse_expr("x +").is_err());
        assert!(parse_expr("1/0").is_err());
        assert!(parse_expr("X").is_err());
        assert!(parse_expr("zeta(0)").is_err());
        assert!(parse_expr("(x").is_err());
    }

    #[test]
    fn display_round_trip() {
        for src in ["x/(s*t^2)", "(1 + i*s)/(1 - i*s)", "u^2/2 + zeta(3)*v", "(a - b)/(a*b + 1)", "-x^3*y + 1/3", "zeta(12)^5*t"] {
            let e = parse_expr(src).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }
}
