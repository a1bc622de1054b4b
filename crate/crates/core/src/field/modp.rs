//! Reduction of cyclotomic scalars modulo a split prime. Used only for sound
//! one-sided bounds (ranks and gcd degrees can only drop under reduction).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{Poly, Var};
use super::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct ModP {
    p: u64,
    level: u32,
    omega: u64,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for b in BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for b in BASES {
        let mut x = pow_mod(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl ModP {
    /// A prime `p = 1 mod level` near `2^61` and a primitive `level`-th root
    /// of unity modulo `p`; `index` selects among successive primes.
    pub fn for_level(level: u32, index: usize) -> ModP {
        let l = level.max(1) as u64;
        let mut k = (1u64 << 61) / l;
        let mut skipped = 0;
        let p = loop {
            k += 1;
            let p = k * l + 1;
            if is_prime(p) {
                if skipped == index {
                    break p;
                }
                skipped += 1;
            }
        };
        let qs = prime_factors(l);
        let omega = (2..)
            .map(|g| pow_mod(g, (p - 1) / l, p))
            .find(|&w| qs.iter().all(|&q| pow_mod(w, l / q, p) != 1))
            .unwrap();
        ModP { p, level, omega }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn reduce_int(&self, n: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let r = ((n % &p) + &p) % &p;
        r.to_u64().unwrap()
    }

    pub fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.p - 2, self.p)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    /// Image of `s`, or `None` if a denominator vanishes modulo `p`.
    pub fn scalar(&self, s: &Scalar) -> Option<u64> {
        if s.is_zero() {
            return Some(0);
        }
        assert!(self.level % s.level() == 0, "scalar level {} does not divide {}", s.level(), self.level);
        let w = pow_mod(self.omega, (self.level / s.level()) as u64, self.p);
        let mut acc = 0u64;
        let mut wk = 1u64;
        for c in s.coeffs() {
            if !c.is_zero() {
                let den = self.reduce_int(c.denom());
                if den == 0 {
                    return None;
                }
                let v = mul_mod(self.reduce_int(c.numer()), self.inv(den), self.p);
                acc = (acc + mul_mod(v, wk, self.p)) % self.p;
            }
            wk = mul_mod(wk, w, self.p);
        }
        Some(acc)
    }

    pub fn evaluate(&self, poly: &Poly, point: &HashMap<Var, u64>) -> Option<u64> {
        let mut acc = 0u64;
        for (m, c) in poly.terms() {
            let mut t = self.scalar(c)?;
            for (v, e) in m.pairs() {
                t = mul_mod(t, pow_mod(point[v], *e as u64, self.p), self.p);
            }
            acc = (acc + t) % self.p;
        }
        Some(acc)
    }

    /// Deterministic pseudo-random point.
    pub fn point<'a>(&self, vars: impl IntoIterator<Item = &'a Var>, seed: u64) -> HashMap<Var, u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        vars.into_iter().map(|v| (v.clone(), rng.gen_range(2..self.p))).collect()
    }

    pub fn rank(&self, m: &mut [Vec<u64>]) -> usize {
        let (nr, nc) = (m.len(), m.first().map_or(0, Vec::len));
        let mut rank = 0;
        for c in 0..nc {
            let Some(piv) = (rank..nr).find(|&r| m[r][c] != 0) else { continue };
            m.swap(rank, piv);
            let inv = self.inv(m[rank][c]);
            for r in rank + 1..nr {
                if m[r][c] == 0 {
                    continue;
                }
                let f = self.mul(m[r][c], inv);
                for j in c..nc {
                    let t = self.mul(m[rank][j], f);
                    m[r][j] = self.sub(m[r][j], t);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Degree of the gcd of two univariate polynomials (coefficients low to
    /// high, leading coefficients nonzero).
    pub fn gcd_degree(&self, mut f: Vec<u64>, mut g: Vec<u64>) -> usize {
        let trim = |v: &mut Vec<u64>| {
            while v.last() == Some(&0) {
                v.pop();
            }
        };
        trim(&mut f);
        trim(&mut g);
        if f.len() < g.len() {
            std::mem::swap(&mut f, &mut g);
        }
        while !g.is_empty() {
            let inv = self.inv(*g.last().unwrap());
            while f.len() >= g.len() {
                let c = self.mul(*f.last().unwrap(), inv);
                let shift = f.len() - g.len();
                for (k, gk) in g.iter().enumerate() {
                    f[shift + k] = self.sub(f[shift + k], self.mul(*gk, c));
                }
                f.pop();
                trim(&mut f);
            }
            std::mem::swap(&mut f, &mut g);
        }
        f.len().saturating_sub(1)
    }
}

/// Least common multiple of the levels of all coefficients.
pub fn level_of<'a>(polys: impl IntoIterator<Item = &'a Poly>) -> u32 {
    use num_integer::Integer;
    polys.into_iter().flat_map(|p| p.terms().map(|(_, c)| c.level()).collect::<Vec<_>>()).fold(1, |a, b| a.lcm(&b))
}
