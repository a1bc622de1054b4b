//! Sparse multivariate polynomials over [`Scalar`] in named indeterminates.
//!
//! Monomials are ordered lexicographically with the alphabetically smallest
//! indeterminate most significant; the leading term is the largest monomial.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::modp::{level_of, ModP};
use super::scalar::Scalar;

/// A named indeterminate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

/// Power product with strictly positive exponents, sorted by variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: u32) -> Monomial {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn from_pairs(mut pairs: Vec<(Var, u32)>) -> Monomial {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.0.iter().find(|(x, _)| x == v).map_or(0, |(_, e)| *e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < *v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == *v {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => continue,
                    Ordering::Greater => out.push((v.clone(), e - f)),
                }
            } else {
                out.push((v.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn pow(&self, k: u32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), e * k)).collect())
    }

    /// Coordinate-wise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (v, e) in &self.0 {
            let f = other.degree_in(v);
            if f > 0 {
                out.push((v.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }

    fn without(&self, v: &Var) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(x, f)| {
                if x == v {
                    e = *f;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (e, Monomial(rest))
    }

    fn rename(&self, map: &dyn Fn(&Var) -> Var) -> Monomial {
        Monomial::from_pairs(self.0.iter().map(|(v, e)| (map(v), *e)).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => {
                    match va.cmp(vb) {
                        // a carries a more significant variable that b lacks
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(eb);
                            }
                        }
                    }
                }
            }
            i += 1;
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Monomial) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with [`Scalar`] coefficients.
#[derive(Clone, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Poly) -> bool {
        self.terms.len() == other.terms.len()
            && self.terms.iter().zip(other.terms.iter()).all(|((m1, c1), (m2, c2))| m1 == m2 && c1 == c2)
    }
}

impl Eq for Poly {}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn var(v: Var) -> Poly {
        Poly::term(Scalar::one(), Monomial::var(v, 1))
    }

    pub fn term(c: Scalar, m: Monomial) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.constant_value().is_one()
    }

    /// Constant coefficient (the value when all indeterminates are zero).
    pub fn constant_value(&self) -> Scalar {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Scalar {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Scalar::zero)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (v, _) in m.pairs() {
                out.insert(v.clone());
            }
        }
        out
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.terms.len() >= other.terms.len() { (self.clone(), other) } else { (other.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.is_constant() {
            return self.scale(&other.constant_value());
        }
        if self.is_constant() {
            return other.scale(&self.constant_value());
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x.mul(c))).collect() }
    }

    pub fn scale_rational(&self, r: &BigRational) -> Poly {
        self.scale(&Scalar::from_rational(r.clone()))
    }

    pub fn mul_monomial(&self, c: &Scalar, m: &Monomial) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, x)| (k.mul(m), x.mul(c))).collect() }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = k;
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

    /// Scales so that the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.inv().unwrap()),
        }
    }

    pub fn derivative(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.without(v);
            if e == 0 {
                continue;
            }
            let nm = rest.mul(&Monomial::var(v.clone(), e - 1));
            out.add_term(nm, c.scale(&BigRational::from_integer(e.into())));
        }
        out
    }

    /// Applies `f` to every coefficient and `rename` to every variable.
    pub fn map(&self, f: &dyn Fn(&Scalar) -> Scalar, rename: &dyn Fn(&Var) -> Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.rename(rename), f(c));
        }
        out
    }

    pub fn evaluate(&self, point: &HashMap<Var, Scalar>) -> Option<Scalar> {
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.pairs() {
                t = t.mul(&point.get(v)?.pow(*e as i64));
            }
            acc = acc.add(&t);
        }
        Some(acc)
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if d.is_constant() {
            return Some(self.scale(&d.constant_value().inv().unwrap()));
        }
        let (lm_d, lc_d) = d.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let lc_inv = lc_d.inv().unwrap();
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((lm, lc)) = r.leading() {
            let m = lm.div(&lm_d)?;
            let c = lc.mul(&lc_inv);
            // subtract c*m*d in place; this cancels the leading term
            for (dm, dc) in &d.terms {
                r.add_term(dm.mul(&m), dc.mul(&c).neg());
            }
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Coefficients as a univariate polynomial in `v` (index = degree).
    pub fn to_univariate(&self, v: &Var) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.without(v);
            out[e as usize].add_term(rest, c.clone());
        }
        if self.is_zero() {
            out.clear();
        }
        out
    }

    pub fn from_univariate(coeffs: &[Poly], v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let m = Monomial::var(v.clone(), e as u32);
            for (k, x) in &c.terms {
                out.add_term(k.mul(&m), x.clone());
            }
        }
        out
    }

    /// Groups terms by their monomial in `vars`; values are polynomials in
    /// the remaining indeterminates.
    pub fn split_by(&self, vars: &BTreeSet<Var>) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (inside, outside): (Vec<_>, Vec<_>) = m.pairs().iter().cloned().partition(|(v, _)| vars.contains(v));
            out.entry(Monomial(inside)).or_default().add_term(Monomial(outside), c.clone());
        }
        out
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        if self.is_monomial() || other.is_monomial() {
            let (m, p) = if self.is_monomial() { (self, other) } else { (other, self) };
            let mut g = m.leading().unwrap().0.clone();
            for k in p.terms.keys() {
                g = g.gcd(k);
                if g.is_one() {
                    break;
                }
            }
            return Poly::term(Scalar::one(), g);
        }
        if self == other {
            return self.monic();
        }
        let (ma, mb) = (self.monomial_content(), other.monomial_content());
        if !ma.is_one() || !mb.is_one() {
            let m = Poly::term(Scalar::one(), ma.gcd(&mb));
            let a = self.div_exact(&Poly::term(Scalar::one(), ma)).unwrap();
            let b = other.div_exact(&Poly::term(Scalar::one(), mb)).unwrap();
            return m.mul(&a.gcd(&b));
        }
        if coprime_by_evaluation(self, other) {
            return Poly::one();
        }
        let (small, big) = if self.total_degree() <= other.total_degree() { (self, other) } else { (other, self) };
        if big.div_exact(small).is_some() {
            return small.monic();
        }
        let v = self.vars().union(&other.vars()).next().unwrap().clone();
        let ca = self.content_in(&v);
        let cb = other.content_in(&v);
        let c = ca.gcd(&cb);
        let pa = self.div_exact(&ca).expect("content divides");
        let pb = other.div_exact(&cb).expect("content divides");
        if pa.degree_in(&v) == 0 || pb.degree_in(&v) == 0 {
            return c;
        }
        let g = subresultant_prs(pa, pb, &v);
        c.mul(&g).monic()
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let first = it.next().cloned().unwrap_or_else(Monomial::one);
        it.fold(first, |g, m| g.gcd(m))
    }

    /// Gcd of the coefficients of `self` viewed as a polynomial in `v`.
    pub fn content_in(&self, v: &Var) -> Poly {
        let mut g = Poly::zero();
        for c in self.to_univariate(v) {
            if c.is_zero() {
                continue;
            }
            g = g.gcd(&c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn primitive_part_in(&self, v: &Var) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides")
    }
}

/// Sound coprimality test: for every shared indeterminate `x`, the degree in
/// `x` of the gcd is at most that of the gcd of the univariate images modulo
/// a split prime, at a point where both leading coefficients in `x` survive.
fn coprime_by_evaluation(a: &Poly, b: &Poly) -> bool {
    let shared: Vec<Var> = a.vars().intersection(&b.vars()).cloned().collect();
    let all: Vec<Var> = a.vars().union(&b.vars()).cloned().collect();
    let field = ModP::for_level(level_of([a, b]), 0);
    shared.iter().all(|x| {
        let (ua, ub) = (a.to_univariate(x), b.to_univariate(x));
        (0..3u64).any(|seed| {
            let point = field.point(all.iter().filter(|v| *v != x), seed);
            let image = |u: &[Poly]| u.iter().map(|c| field.evaluate(c, &point)).collect::<Option<Vec<u64>>>();
            match (image(&ua), image(&ub)) {
                (Some(ea), Some(eb)) if *ea.last().unwrap() != 0 && *eb.last().unwrap() != 0 => field.gcd_degree(ea, eb) == 0,
                _ => false,
            }
        })
    })
}

/// Subresultant remainder sequence in `v`; returns the monic primitive gcd
/// of two polynomials that are primitive in `v`.
fn subresultant_prs(a: Poly, b: Poly, v: &Var) -> Poly {
    let (mut f, mut g) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    let mut beta_g = Poly::one();
    let mut h = Poly::one();
    loop {
        let d = f.degree_in(v) - g.degree_in(v);
        let r = pseudo_rem(&f, &g, v);
        if r.is_zero() {
            return g.primitive_part_in(v).monic();
        }
        if r.degree_in(v) == 0 {
            return Poly::one();
        }
        let divisor = beta_g.mul(&h.pow(d));
        f = g;
        g = r.div_exact(&divisor).expect("subresultant division is exact");
        beta_g = f.to_univariate(v).pop().unwrap();
        if d > 0 {
            h = beta_g.pow(d).div_exact(&h.pow(d - 1)).expect("subresultant division is exact");
        }
    }
}

/// `lc(g)^(deg f - deg g + 1) * f mod g` in `v`.
fn pseudo_rem(f: &Poly, g: &Poly, v: &Var) -> Poly {
    let mut r = f.to_univariate(v);
    let gc = g.to_univariate(v);
    let dg = gc.len() - 1;
    let lc = gc[dg].clone();
    let mut steps = 0;
    let delta = r.len() as i64 - dg as i64;
    while r.len() > dg && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - 1 - dg;
        for c in r.iter_mut() {
            *c = c.mul(&lc);
        }
        for (k, gk) in gc.iter().enumerate() {
            r[shift + k] = r[shift + k].sub(&lr.mul(gk));
        }
        while r.last().map_or(false, Poly::is_zero) {
            r.pop();
        }
        steps += 1;
    }
    let out = Poly::from_univariate(&r, v);
    if delta > steps {
        out.mul(&lc.pow((delta - steps) as u32))
    } else {
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let mono: Vec<String> = m
                .pairs()
                .iter()
                .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
                .collect();
            let mono = mono.join("*");
            let (neg, a) = match c.as_rational() {
                Some(r) if r < BigRational::zero() => (true, c.neg()),
                _ => (false, c.clone()),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let coeff = if a.is_atomic() { a.to_string() } else { format!("({a})") };
            if mono.is_empty() {
                write!(f, "{coeff}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{coeff}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl From<Scalar> for Poly {
    fn from(c: Scalar) -> Poly {
        Poly::constant(c)
    }
}

impl From<Var> for Poly {
    fn from(v: Var) -> Poly {
        Poly::var(v)
    }
}
