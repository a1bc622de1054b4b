//! Elements of cyclotomic fields `Q(zeta_N)`, with complex conjugation.
//!
//! A scalar of level `N` is stored as a polynomial in `x = zeta_N` of degree
//! below `phi(N)`, reduced modulo the cyclotomic polynomial `Phi_N`. Values at
//! different levels are combined by lifting both into `Q(zeta_lcm)`, so the
//! constant field grows on demand. Rational values always collapse to level 1.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

static CYCLOTOMIC: LazyLock<Mutex<HashMap<u32, Arc<Vec<BigRational>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Coefficients (lowest degree first) of the `n`-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u32) -> Arc<Vec<BigRational>> {
    assert!(n >= 1);
    if let Some(p) = CYCLOTOMIC.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by every Phi_d with d | n, d < n
    let mut num = vec![BigRational::zero(); n as usize + 1];
    num[0] = -BigRational::one();
    num[n as usize] = BigRational::one();
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d);
            let (q, r) = upoly_divrem(&num, &phi_d);
            debug_assert!(r.iter().all(Zero::is_zero));
            num = q;
        }
    }
    trim(&mut num);
    let out = Arc::new(num);
    CYCLOTOMIC.lock().unwrap().insert(n, out.clone());
    out
}

pub fn euler_phi(n: u32) -> u32 {
    cyclotomic_poly(n).len() as u32 - 1
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().map_or(false, Zero::is_zero) {
        p.pop();
    }
}

fn upoly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    assert!(!b.is_empty(), "division by zero polynomial");
    if r.len() < b.len() {
        return (vec![], r);
    }
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lead;
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] -= &c * bk;
        }
        q[shift] = c;
        r.pop();
        trim(&mut r);
    }
    (q, r)
}

fn upoly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn upoly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    trim(&mut out);
    out
}

fn reduce_mod(p: Vec<BigRational>, level: u32) -> Vec<BigRational> {
    let phi = cyclotomic_poly(level);
    let (_, mut r) = upoly_divrem(&p, &phi);
    trim(&mut r);
    r
}

/// An element of `Q(zeta_N)`.
#[derive(Clone, Debug)]
pub struct Scalar {
    level: u32,
    coeffs: Vec<BigRational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { level: 1, coeffs: vec![] }
    }

    pub fn one() -> Self {
        Scalar::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        let coeffs = if r.is_zero() { vec![] } else { vec![r] };
        Scalar { level: 1, coeffs }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar::from_rational(BigRational::from_integer(n))
    }

    /// The primitive root `zeta_n = exp(2 pi i / n)`.
    pub fn zeta(n: u32) -> Self {
        assert!(n >= 1, "zeta(0) is undefined");
        Scalar::from_coeffs(n, vec![BigRational::zero(), BigRational::one()])
    }

    /// `zeta_q^p`, with the coherent choice `zeta_{pq}^p = zeta_q`.
    pub fn root_of_unity(q: u32, p: i64) -> Self {
        Scalar::zeta(q).pow(p.rem_euclid(q as i64))
    }

    pub fn i() -> Self {
        Scalar::zeta(4)
    }

    /// Builds `sum coeffs[k] * zeta_level^k`, reducing modulo `Phi_level`.
    pub fn from_coeffs(level: u32, coeffs: Vec<BigRational>) -> Self {
        assert!(level >= 1);
        let coeffs = reduce_mod(coeffs, level);
        Scalar { level, coeffs }.normalized()
    }

    fn normalized(mut self) -> Self {
        trim(&mut self.coeffs);
        if self.coeffs.len() <= 1 {
            self.level = 1;
        }
        self
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.level == 1 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 if self.level == 1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    /// Coefficient vector of length `phi(target)` after embedding into
    /// `Q(zeta_target)`. `target` must be a multiple of the level.
    pub fn coords_at(&self, target: u32) -> Vec<BigRational> {
        let lifted = self.lift(target);
        let mut v = lifted.coeffs;
        v.resize(euler_phi(target) as usize, BigRational::zero());
        v
    }

    /// Embeds into `Q(zeta_target)` without normalizing the level back down.
    pub fn lift(&self, target: u32) -> Scalar {
        assert!(target % self.level == 0, "level {} does not divide {}", self.level, target);
        if target == self.level {
            return self.clone();
        }
        let step = (target / self.level) as usize;
        let mut p = vec![BigRational::zero(); self.coeffs.len().saturating_sub(1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            p[k * step] = c.clone();
        }
        Scalar { level: target, coeffs: reduce_mod(p, target) }
    }

    fn common(&self, other: &Scalar) -> (u32, Scalar, Scalar) {
        let l = self.level.lcm(&other.level);
        (l, self.lift(l), other.lift(l))
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        if self.level == 1 && other.level == 1 {
            let mut c = vec![BigRational::zero()];
            if let Some(a) = self.coeffs.first() {
                c[0] += a;
            }
            if let Some(b) = other.coeffs.first() {
                c[0] += b;
            }
            return Scalar { level: 1, coeffs: c }.normalized();
        }
        let (l, a, b) = self.common(other);
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut c = vec![BigRational::zero(); n];
        for (i, x) in a.coeffs.iter().enumerate() {
            c[i] += x;
        }
        for (i, x) in b.coeffs.iter().enumerate() {
            c[i] += x;
        }
        Scalar { level: l, coeffs: c }.normalized()
    }

    pub fn neg(&self) -> Scalar {
        Scalar { level: self.level, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        if self.is_zero() || other.is_zero() {
            return Scalar::zero();
        }
        if self.level == 1 && other.level == 1 {
            return Scalar::from_rational(&self.coeffs[0] * &other.coeffs[0]);
        }
        let (l, a, b) = self.common(other);
        Scalar { level: l, coeffs: reduce_mod(upoly_mul(&a.coeffs, &b.coeffs), l) }.normalized()
    }

    pub fn scale(&self, r: &BigRational) -> Scalar {
        if r.is_zero() {
            return Scalar::zero();
        }
        Scalar { level: self.level, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        if self.level == 1 {
            return Some(Scalar::from_rational(self.coeffs[0].recip()));
        }
        // extended Euclid in Q[x] against Phi_N
        let phi = cyclotomic_poly(self.level);
        let (mut r0, mut r1) = (phi.to_vec(), self.coeffs.clone());
        let (mut t0, mut t1) = (Vec::<BigRational>::new(), vec![BigRational::one()]);
        while !r1.is_empty() {
            let (q, r) = upoly_divrem(&r0, &r1);
            let t2 = upoly_sub(&t0, &upoly_mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            t0 = std::mem::replace(&mut t1, t2);
        }
        // r0 is a nonzero constant since Phi_N is irreducible
        debug_assert_eq!(r0.len(), 1);
        let c = r0[0].recip();
        let t: Vec<BigRational> = t0.into_iter().map(|x| x * &c).collect();
        Some(Scalar { level: self.level, coeffs: reduce_mod(t, self.level) }.normalized())
    }

    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        other.inv().map(|o| self.mul(&o))
    }

    pub fn pow(&self, e: i64) -> Scalar {
        if e < 0 {
            return self.inv().expect("negative power of zero").pow(-e);
        }
        let mut base = self.clone();
        let mut acc = Scalar::one();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Complex conjugation `zeta_N -> zeta_N^{-1}`.
    pub fn conj(&self) -> Scalar {
        if self.level <= 2 {
            return self.clone();
        }
        let n = self.level as usize;
        let mut p = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            p[(n - k) % n] += c;
        }
        Scalar { level: self.level, coeffs: reduce_mod(p, self.level) }.normalized()
    }

    /// Order of `self` as a root of unity, if it is one.
    pub fn root_of_unity_order(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        // roots of unity in Q(zeta_N) are the (lcm(2,N))-th roots
        let m = self.level.lcm(&2);
        let z = Scalar::zeta(m);
        let mut acc = Scalar::one();
        for j in 0..m {
            if acc == *self {
                return Some(m / j.gcd(&m));
            }
            acc = acc.mul(&z);
        }
        None
    }

    /// Some `q`-th root of `self` in a (possibly larger) cyclotomic field,
    /// when one is found: rational roots of rationals, `zeta`-shifts of roots
    /// of unity, and products of the two.
    pub fn nth_root(&self, q: u32) -> Option<Scalar> {
        assert!(q >= 1);
        if q == 1 || self.is_zero() {
            return Some(self.clone());
        }
        if let Some(r) = self.as_rational() {
            return rational_nth_root(&r, q);
        }
        // self = rho * r with rho a root of unity in the field, r rational
        let m = self.level.lcm(&2);
        for j in 0..m {
            let rho = Scalar::root_of_unity(m, j as i64);
            if let Some(r) = self.div(&rho).and_then(|x| x.as_rational()) {
                let rr = rational_nth_root(&r, q)?;
                // zeta_m^j has q-th root zeta_{mq}^j
                return Some(rr.mul(&Scalar::root_of_unity(m * q, j as i64)));
            }
        }
        None
    }

    pub fn to_repr(&self) -> ScalarRepr {
        ScalarRepr { level: self.level, coeffs: self.coeffs.iter().map(|c| c.to_string()).collect() }
    }

    pub fn from_repr(r: &ScalarRepr) -> Result<Scalar, String> {
        if r.level == 0 {
            return Err("scalar level must be positive".into());
        }
        let mut coeffs = Vec::new();
        for c in &r.coeffs {
            coeffs.push(c.parse::<BigRational>().map_err(|e| format!("bad coefficient {c}: {e}"))?);
        }
        Ok(Scalar::from_coeffs(r.level, coeffs))
    }

    /// True when the printed form needs no parentheses as a factor.
    pub(crate) fn is_atomic(&self) -> bool {
        match self.coeffs.iter().filter(|c| !c.is_zero()).count() {
            0 => true,
            1 => {
                let (k, c) = self.coeffs.iter().enumerate().find(|(_, c)| !c.is_zero()).unwrap();
                k == 0 && !c.is_negative()
            }
            _ => false,
        }
    }
}

fn rational_nth_root(r: &BigRational, q: u32) -> Option<Scalar> {
    let neg = r.is_negative();
    let a = r.abs();
    let n = exact_root(a.numer(), q)?;
    let d = exact_root(a.denom(), q)?;
    let base = Scalar::from_rational(BigRational::new(n, d));
    if neg {
        // (-1)^{1/q} = zeta_{2q}
        Some(base.mul(&Scalar::zeta(2 * q)))
    } else {
        Some(base)
    }
}

fn exact_root(n: &BigInt, q: u32) -> Option<BigInt> {
    let r = n.nth_root(q);
    if num_traits::pow(r.clone(), q as usize) == *n {
        Some(r)
    } else {
        None
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        if self.level == other.level {
            return self.coeffs == other.coeffs;
        }
        let (_, a, b) = self.common(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Scalar {}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let gen = match (self.level, k) {
                (_, 0) => String::new(),
                (4, 1) => "i".to_string(),
                (n, 1) => format!("zeta({n})"),
                (n, k) => format!("zeta({n})^{k}"),
            };
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if gen.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{gen}")?;
            } else {
                write!(f, "{a}*{gen}")?;
            }
        }
        Ok(())
    }
}

/// Serialized form `(N, coefficient list)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarRepr {
    pub level: u32,
    pub coeffs: Vec<String>,
}

pub(crate) fn small_ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
