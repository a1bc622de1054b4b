//! The kernel of `E` on the Z-span of the basis.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::field::{mult_relations, RatExpr, Scalar};
use crate::intmat::IntMat;

/// `c = zeta_m^e * r` with `r > 0` rational.
fn unit_times_positive(c: &Scalar) -> Option<(u32, i64, BigRational)> {
    let m = c.level().lcm(&2);
    (0..m as i64).find_map(|e| {
        let r = c.div(&Scalar::root_of_unity(m, e))?.as_rational()?;
        r.is_positive().then_some((m, e, r))
    })
}

fn factor_into(n: &BigInt, sign: i64, out: &mut BTreeMap<BigInt, i64>) {
    let mut n = n.abs();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        while (&n % &p).is_zero() {
            *out.entry(p.clone()).or_insert(0) += sign;
            n /= &p;
        }
        p += 1;
    }
    if n > BigInt::one() {
        *out.entry(n).or_insert(0) += sign;
    }
}

/// Hermite basis of `{m : prod values_j^{m_j} = 1}`, or `None` when a
/// relation constant is not a root of unity times a rational.
pub fn unit_relations(values: &[RatExpr]) -> Option<IntMat> {
    let lat = mult_relations(values).ok()?;
    if lat.is_empty() {
        return Some(IntMat::zeros(0, values.len()));
    }
    let parts: Vec<(u32, i64, BigRational)> =
        lat.constants.iter().map(|c| c.as_scalar().and_then(|s| unit_times_positive(&s))).collect::<Option<_>>()?;
    let level = parts.iter().fold(1u32, |a, (m, _, _)| a.lcm(m));
    let valuations: Vec<BTreeMap<BigInt, i64>> = parts
        .iter()
        .map(|(_, _, r)| {
            let mut v = BTreeMap::new();
            factor_into(r.numer(), 1, &mut v);
            factor_into(r.denom(), -1, &mut v);
            v
        })
        .collect();
    let primes: Vec<BigInt> = {
        let mut ps: Vec<BigInt> = valuations.iter().flat_map(|v| v.keys().cloned()).collect();
        ps.sort();
        ps.dedup();
        ps
    };
    // rows: one per generator, then the modulus row for the root-of-unity exponent
    let width = primes.len() + 1;
    let mut rows: Vec<Vec<BigInt>> = parts
        .iter()
        .zip(&valuations)
        .map(|((m, e, _), v)| {
            let mut row: Vec<BigInt> = primes.iter().map(|p| BigInt::from(*v.get(p).unwrap_or(&0))).collect();
            row.push(BigInt::from(e * (level / m) as i64));
            row
        })
        .collect();
    let mut modulus = vec![BigInt::zero(); width];
    modulus[primes.len()] = BigInt::from(level);
    rows.push(modulus);
    let r = lat.rank();
    let kernel = IntMat::from_rows_with_cols(&rows, width).ok()?.left_kernel().col_slice(0, r);
    let (h, _) = kernel.mul(&lat.generators).ok()?.hnf();
    let nz = (0..h.rows()).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
    Some(h.row_slice(0, nz))
}

/// Equality of lattices given by Hermite bases.
pub fn same_lattice(a: &IntMat, b: &IntMat) -> bool {
    let trim = |m: &IntMat| {
        let (h, _) = m.hnf();
        let nz = (0..h.rows()).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
        h.row_slice(0, nz)
    };
    trim(a) == trim(b)
}
