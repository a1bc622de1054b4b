//! Rational functions over cyclotomic constants, kept in lowest terms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;

use super::poly::{Monomial, Poly, Var};
use super::scalar::Scalar;

/// `num / den` with `gcd(num, den) = 1` and `den` monic. Zero is `0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatExpr {
    num: Poly,
    den: Poly,
}

impl RatExpr {
    pub fn zero() -> RatExpr {
        RatExpr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> RatExpr {
        RatExpr::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> RatExpr {
        RatExpr { num: p, den: Poly::one() }
    }

    pub fn scalar(c: Scalar) -> RatExpr {
        RatExpr::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> RatExpr {
        RatExpr::scalar(Scalar::from_int(n))
    }

    pub fn rational(r: BigRational) -> RatExpr {
        RatExpr::scalar(Scalar::from_rational(r))
    }

    pub fn var(name: &str) -> RatExpr {
        RatExpr::from_poly(Poly::var(Var::new(name)))
    }

    pub fn i() -> RatExpr {
        RatExpr::scalar(Scalar::i())
    }

    /// Builds `num / den` in lowest terms. Panics on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> RatExpr {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatExpr::zero();
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        RatExpr::normalize_sign(num, den)
    }

    fn normalize_sign(num: Poly, den: Poly) -> RatExpr {
        let lc = den.leading_coeff();
        if lc.is_one() {
            return RatExpr { num, den };
        }
        let inv = lc.inv().unwrap();
        RatExpr { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.is_constant() {
            Some(self.num.constant_value().div(&self.den.constant_value()).unwrap())
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn add(&self, other: &RatExpr) -> RatExpr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            if self.den.is_one() {
                return RatExpr { num: self.num.add(&other.num), den: Poly::one() };
            }
            return RatExpr::new(self.num.add(&other.num), self.den.clone());
        }
        let g = self.den.gcd(&other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            if num.is_zero() {
                return RatExpr::zero();
            }
            return RatExpr::normalize_sign(num, self.den.mul(&other.den));
        }
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = other.den.div_exact(&g).unwrap();
        let num = self.num.mul(&d1).add(&other.num.mul(&b1));
        RatExpr::new(num, b1.mul(&other.den))
    }

    pub fn neg(&self) -> RatExpr {
        RatExpr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatExpr) -> RatExpr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatExpr) -> RatExpr {
        if self.is_zero() || other.is_zero() {
            return RatExpr::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatExpr { num: self.num.mul(&other.num), den: Poly::one() };
        }
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        RatExpr::normalize_sign(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn scale(&self, c: &Scalar) -> RatExpr {
        if c.is_zero() {
            return RatExpr::zero();
        }
        RatExpr { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn scale_int(&self, k: i64) -> RatExpr {
        self.scale(&Scalar::from_int(k))
    }

    pub fn scale_rational(&self, r: &BigRational) -> RatExpr {
        self.scale(&Scalar::from_rational(r.clone()))
    }

    pub fn inv(&self) -> Option<RatExpr> {
        if self.is_zero() {
            return None;
        }
        Some(RatExpr::normalize_sign(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &RatExpr) -> Option<RatExpr> {
        Some(self.mul(&other.inv()?))
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn pow(&self, e: i64) -> Option<RatExpr> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let e = e as u32;
        Some(RatExpr { num: self.num.pow(e), den: self.den.pow(e) })
    }

    pub fn derivative(&self, v: &Var) -> RatExpr {
        if !self.num.vars().contains(v) && !self.den.vars().contains(v) {
            return RatExpr::zero();
        }
        let n = self.num.derivative(v).mul(&self.den).sub(&self.num.mul(&self.den.derivative(v)));
        RatExpr::new(n, self.den.pow(2))
    }

    /// Applies `f` to the constants and `rename` to the indeterminates. `f`
    /// must be a field automorphism of the constants for the result to be
    /// meaningful.
    pub fn map(&self, f: &dyn Fn(&Scalar) -> Scalar, rename: &dyn Fn(&Var) -> Var) -> RatExpr {
        RatExpr::new(self.num.map(f, rename), self.den.map(f, rename))
    }

    pub fn rename(&self, rename: &dyn Fn(&Var) -> Var) -> RatExpr {
        self.map(&|c| c.clone(), rename)
    }

    /// Simultaneous substitution of indeterminates by rational expressions.
    /// Returns `None` if a denominator vanishes under the substitution.
    pub fn substitute(&self, subs: &BTreeMap<Var, RatExpr>) -> Option<RatExpr> {
        if subs.is_empty() || self.vars().iter().all(|v| !subs.contains_key(v)) {
            return Some(self.clone());
        }
        let (n_num, n_degs) = subst_poly(&self.num, subs);
        let (d_num, d_degs) = subst_poly(&self.den, subs);
        if d_num.is_zero() {
            return None;
        }
        // (n_num / prod den_v^n_v) / (d_num / prod den_v^d_v), cancelling
        // powers of each den_v before any general gcd
        let mut out = RatExpr::new(n_num, d_num);
        for v in subs.keys() {
            let e = *d_degs.get(v).unwrap_or(&0) as i64 - *n_degs.get(v).unwrap_or(&0) as i64;
            if e != 0 {
                out = out.mul(&RatExpr::from_poly(subs[v].den.clone()).pow(e).unwrap());
            }
        }
        Some(out)
    }

    pub fn substitute_one(&self, v: &Var, e: &RatExpr) -> Option<RatExpr> {
        let mut m = BTreeMap::new();
        m.insert(v.clone(), e.clone());
        self.substitute(&m)
    }

    pub fn evaluate(&self, point: &HashMap<Var, Scalar>) -> Option<Scalar> {
        let d = self.den.evaluate(point)?;
        if d.is_zero() {
            return None;
        }
        self.num.evaluate(point)?.div(&d)
    }

    /// If `self` is `c * prod v^e` with `c` constant, returns `(c, monomial
    /// exponents)`, negative exponents allowed.
    pub fn as_laurent_monomial(&self) -> Option<(Scalar, BTreeMap<Var, i64>)> {
        if !self.num.is_monomial() || !self.den.is_monomial() {
            return None;
        }
        let (nm, nc) = self.num.leading().unwrap();
        let (dm, dc) = self.den.leading().unwrap();
        let mut exps: BTreeMap<Var, i64> = BTreeMap::new();
        for (v, e) in nm.pairs() {
            *exps.entry(v.clone()).or_default() += *e as i64;
        }
        for (v, e) in dm.pairs() {
            *exps.entry(v.clone()).or_default() -= *e as i64;
        }
        exps.retain(|_, e| *e != 0);
        Some((nc.div(dc).unwrap(), exps))
    }

    pub fn from_laurent_monomial(c: Scalar, exps: &BTreeMap<Var, i64>) -> RatExpr {
        let pos: Vec<(Var, u32)> = exps.iter().filter(|(_, e)| **e > 0).map(|(v, e)| (v.clone(), *e as u32)).collect();
        let neg: Vec<(Var, u32)> = exps.iter().filter(|(_, e)| **e < 0).map(|(v, e)| (v.clone(), (-*e) as u32)).collect();
        RatExpr {
            num: Poly::term(c, Monomial::from_pairs(pos)),
            den: Poly::term(Scalar::one(), Monomial::from_pairs(neg)),
        }
    }
}

/// Numerator of `p` after substitution, and the exponent of each
/// substituted denominator that was cleared.
fn subst_poly(p: &Poly, subs: &BTreeMap<Var, RatExpr>) -> (Poly, BTreeMap<Var, u32>) {
    let degs: BTreeMap<Var, u32> = subs.keys().map(|v| (v.clone(), p.degree_in(v))).filter(|(_, d)| *d > 0).collect();
    let mut pow_cache: HashMap<(Var, u32, bool), Poly> = HashMap::new();
    let mut get_pow = |v: &Var, e: u32, numer: bool| -> Poly {
        pow_cache
            .entry((v.clone(), e, numer))
            .or_insert_with(|| {
                let r = &subs[v];
                if numer {
                    r.num.pow(e)
                } else {
                    r.den.pow(e)
                }
            })
            .clone()
    };
    let mut num = Poly::zero();
    for (m, c) in p.terms() {
        let mut keep: Vec<(Var, u32)> = Vec::new();
        let mut t = Poly::constant(c.clone());
        for (v, e) in m.pairs() {
            if subs.contains_key(v) {
                t = t.mul(&get_pow(v, *e, true));
            } else {
                keep.push((v.clone(), *e));
            }
        }
        for (v, d) in &degs {
            let e = m.degree_in(v);
            if *d > e {
                t = t.mul(&get_pow(v, d - e, false));
            }
        }
        num = num.add(&t.mul_monomial(&Scalar::one(), &Monomial::from_pairs(keep)));
    }
    (num, degs)
}

fn needs_parens(p: &Poly) -> bool {
    p.num_terms() > 1 || p.terms().next().map_or(false, |(m, c)| (!m.is_one() && !c.is_one()) || m.pairs().len() > 1)
}

impl fmt::Display for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let n = if self.num.num_terms() > 1 { format!("({})", self.num) } else { self.num.to_string() };
        let d = if needs_parens(&self.den) { format!("({})", self.den) } else { self.den.to_string() };
        write!(f, "{n}/{d}")
    }
}

impl From<Poly> for RatExpr {
    fn from(p: Poly) -> RatExpr {
        RatExpr::from_poly(p)
    }
}

impl From<Scalar> for RatExpr {
    fn from(c: Scalar) -> RatExpr {
        RatExpr::scalar(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> RatExpr {
        RatExpr::var(s)
    }

    #[test]
    fn lowest_terms() {
        let x = v("x");
        let y = v("y");
        let a = x.mul(&x).sub(&y.mul(&y)).div(&x.sub(&y)).unwrap();
        assert_eq!(a, x.add(&y));
        assert!(a.is_polynomial());
    }

    #[test]
    fn field_ops() {
        let x = v("x");
        let one = RatExpr::one();
        let a = one.div(&x.add(&one)).unwrap();
        let b = x.div(&x.add(&one)).unwrap();
        assert!(a.add(&b).is_one());
        assert!(a.mul(&a.inv().unwrap()).is_one());
    }

    #[test]
    fn substitution() {
        let x = v("x");
        let y = v("y");
        let e = x.mul(&x).add(&RatExpr::one()).div(&x).unwrap();
        let r = e.substitute_one(&Var::new("x"), &y.div(&RatExpr::int(2)).unwrap()).unwrap();
        let expect = y.mul(&y).div(&RatExpr::int(4)).unwrap().add(&RatExpr::one()).mul(&RatExpr::int(2)).div(&y).unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn display_forms() {
        let x = v("x");
        let e = RatExpr::one().add(&x).div(&RatExpr::one().sub(&x)).unwrap();
        assert_eq!(e.to_string(), "(-x - 1)/(x - 1)");
        assert_eq!(x.div(&RatExpr::int(2)).unwrap().to_string(), "1/2*x");
    }
}
