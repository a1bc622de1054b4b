//! The order-two automorphism `sigma`: an involutive permutation of
//! indeterminates composed with complex conjugation of constants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::poly::Var;
use super::ratexpr::RatExpr;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Involution {
    pairing: BTreeMap<Var, Var>,
}

/// Serialized form: fixed names and swapped pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvolutionRepr {
    pub real: Vec<String>,
    pub pairs: Vec<(String, String)>,
}

impl Involution {
    pub fn new() -> Involution {
        Involution::default()
    }

    pub fn is_registered(&self, v: &Var) -> bool {
        self.pairing.contains_key(v)
    }

    pub fn partner(&self, v: &Var) -> Option<&Var> {
        self.pairing.get(v)
    }

    pub fn names(&self) -> impl Iterator<Item = &Var> {
        self.pairing.keys()
    }

    /// Registers `v` as a fixed ("real") indeterminate.
    pub fn add_real(&mut self, v: Var) -> Result<()> {
        if let Some(p) = self.pairing.get(&v) {
            if *p != v {
                return Err(Error::Config(format!("`{v}` is already paired with `{p}`")));
            }
            return Ok(());
        }
        self.pairing.insert(v.clone(), v);
        Ok(())
    }

    /// Registers `a` and `b` as a swapped pair.
    pub fn add_pair(&mut self, a: Var, b: Var) -> Result<()> {
        if a == b {
            return Err(Error::Config(format!("cannot pair `{a}` with itself")));
        }
        for v in [&a, &b] {
            if self.pairing.contains_key(v) {
                return Err(Error::Config(format!("`{v}` is already registered")));
            }
        }
        self.pairing.insert(a.clone(), b.clone());
        self.pairing.insert(b, a);
        Ok(())
    }

    pub fn remove(&mut self, v: &Var) {
        if let Some(p) = self.pairing.remove(v) {
            self.pairing.remove(&p);
        }
    }

    pub fn apply(&self, e: &RatExpr) -> Result<RatExpr> {
        for v in e.vars() {
            if !self.pairing.contains_key(&v) {
                return Err(Error::Unregistered(v.to_string()));
            }
        }
        Ok(e.map(&Scalar::conj, &|v| self.pairing[v].clone()))
    }

    pub fn is_fixed(&self, e: &RatExpr) -> Result<bool> {
        Ok(self.apply(e)? == *e)
    }

    pub fn is_anti_fixed(&self, e: &RatExpr) -> Result<bool> {
        Ok(self.apply(e)? == e.neg())
    }

    /// `(e + sigma e) / 2`
    pub fn real_part(&self, e: &RatExpr) -> Result<RatExpr> {
        Ok(e.add(&self.apply(e)?).scale(&Scalar::from_rational(super::scalar::small_ratio(1, 2))))
    }

    /// `(e - sigma e) / 2i`
    pub fn imag_part(&self, e: &RatExpr) -> Result<RatExpr> {
        let two_i_inv = Scalar::i().scale(&super::scalar::small_ratio(2, 1)).inv().unwrap();
        Ok(e.sub(&self.apply(e)?).scale(&two_i_inv))
    }

    /// `e * sigma(e)`; no square root is ever taken.
    pub fn modulus_sq(&self, e: &RatExpr) -> Result<RatExpr> {
        if e.is_zero() {
            return Err(Error::ZeroInput("modulus of zero".into()));
        }
        Ok(e.mul(&self.apply(e)?))
    }

    pub fn is_unit_circle(&self, e: &RatExpr) -> Result<bool> {
        if e.is_zero() {
            return Ok(false);
        }
        Ok(self.modulus_sq(e)?.is_one())
    }

    pub fn to_repr(&self) -> InvolutionRepr {
        let mut r = InvolutionRepr::default();
        for (a, b) in &self.pairing {
            if a == b {
                r.real.push(a.to_string());
            } else if a < b {
                r.pairs.push((a.to_string(), b.to_string()));
            }
        }
        r
    }

    pub fn from_repr(r: &InvolutionRepr) -> Result<Involution> {
        let mut inv = Involution::new();
        for a in &r.real {
            inv.add_real(Var::new(a))?;
        }
        for (a, b) in &r.pairs {
            inv.add_pair(Var::new(a), Var::new(b))?;
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_expr;

    fn inv() -> Involution {
        let mut s = Involution::new();
        s.add_real(Var::new("t")).unwrap();
        s.add_real(Var::new("s")).unwrap();
        s.add_pair(Var::new("u"), Var::new("v")).unwrap();
        s
    }

    #[test]
    fn sigma_examples() {
        let s = inv();
        let p = |x: &str| parse_expr(x).unwrap();
        assert_eq!(s.apply(&p("t")).unwrap(), p("t"));
        assert_eq!(s.apply(&p("i*t")).unwrap(), p("-i*t"));
        assert_eq!(s.apply(&p("u")).unwrap(), p("v"));
        assert_eq!(s.apply(&p("u + v")).unwrap(), p("u + v"));
        assert!(matches!(s.apply(&p("q")), Err(Error::Unregistered(_))));
    }

    #[test]
    fn decompositions() {
        let s = inv();
        let p = |x: &str| parse_expr(x).unwrap();
        let e = p("3 + 4*i");
        assert_eq!(s.real_part(&e).unwrap(), p("3"));
        assert_eq!(s.imag_part(&e).unwrap(), p("4"));
        assert_eq!(s.modulus_sq(&e).unwrap(), p("25"));
        assert!(s.is_unit_circle(&p("(1 + i*s)/(1 - i*s)")).unwrap());
        assert!(!s.is_unit_circle(&p("(1 + i*s)/(2 - i*s)")).unwrap());
        assert_eq!(s.modulus_sq(&p("t")).unwrap(), p("t^2"));
        assert!(matches!(s.modulus_sq(&RatExpr::zero()), Err(Error::ZeroInput(_))));
    }

    #[test]
    fn double_registration() {
        let mut s = inv();
        assert!(s.add_pair(Var::new("t"), Var::new("w")).is_err());
        assert!(s.add_real(Var::new("u")).is_err());
        assert!(s.add_real(Var::new("t")).is_ok());
    }
}
