//! Exact Q-linear algebra on tuples of rational functions.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{Monomial, Poly};
use super::ratexpr::RatExpr;

/// Q-coefficient vectors of `es` over one shared basis of `K(vars)`, taken
/// after clearing a common denominator.
pub fn coefficient_vectors(es: &[RatExpr]) -> Vec<Vec<BigRational>> {
    let level = es
        .iter()
        .flat_map(|e| e.num().terms().chain(e.den().terms()).map(|(_, c)| c.level()).collect::<Vec<_>>())
        .fold(1u32, |a, b| a.lcm(&b));
    let common = es.iter().fold(Poly::one(), |acc, e| {
        let g = acc.gcd(e.den());
        acc.mul(&e.den().div_exact(&g).unwrap())
    });
    let mut columns: BTreeMap<(Monomial, usize), usize> = BTreeMap::new();
    let cleared: Vec<Poly> = es.iter().map(|e| e.num().mul(&common.div_exact(e.den()).unwrap())).collect();
    for p in &cleared {
        for (m, c) in p.terms() {
            for (k, x) in c.coords_at(level).iter().enumerate() {
                if !x.is_zero() {
                    let next = columns.len();
                    columns.entry((m.clone(), k)).or_insert(next);
                }
            }
        }
    }
    cleared
        .iter()
        .map(|p| {
            let mut row = vec![BigRational::zero(); columns.len()];
            for (m, c) in p.terms() {
                for (k, x) in c.coords_at(level).into_iter().enumerate() {
                    if !x.is_zero() {
                        row[columns[&(m.clone(), k)]] = x;
                    }
                }
            }
            row
        })
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = BigRational::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

/// Dimension of the Q-span of `es`.
pub fn q_rank(es: &[RatExpr]) -> usize {
    let mut rows = coefficient_vectors(es);
    rref(&mut rows).len()
}

/// Coordinates of `x` in the Q-span of the Q-independent tuple `basis`.
pub fn q_coordinates(basis: &[RatExpr], x: &RatExpr) -> Option<Vec<BigRational>> {
    let mut all = basis.to_vec();
    all.push(x.clone());
    let vecs = coefficient_vectors(&all);
    let k = basis.len();
    let width = vecs.first().map_or(0, Vec::len);
    // one equation per column: sum_j c_j basis_j[col] = x[col]
    let mut system: Vec<Vec<BigRational>> =
        (0..width).map(|col| (0..=k).map(|j| vecs[j][col].clone()).collect()).collect();
    let pivots = rref(&mut system);
    if pivots.contains(&k) {
        return None;
    }
    assert_eq!(pivots.len(), k, "basis must be Q-independent");
    Some((0..k).map(|j| system[j][k].clone()).collect())
}
