//! Additive and multiplicative relation lattices of tuples of rational functions.
//!
//! "Constant" always means constant with respect to a chosen set of
//! indeterminates (by default all of them); the remaining indeterminates
//! behave like constants.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::poly::{Poly, Var};
use super::ratexpr::RatExpr;
use super::scalar::Scalar;
use crate::error::{Error, Result};
use crate::intmat::IntMat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Torsion {
    One,
    RootOfUnity(u32),
    Other,
}

/// A saturated sublattice of `Z^len` given by a Hermite basis, together with
/// the constant each generator produces.
#[derive(Clone, Debug)]
pub struct RelationLattice {
    pub len: usize,
    pub generators: IntMat,
    pub constants: Vec<RatExpr>,
    pub torsion: Vec<Torsion>,
}

impl RelationLattice {
    pub fn rank(&self) -> usize {
        self.generators.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    pub fn generator(&self, k: usize) -> Vec<i64> {
        self.generators.row(k).iter().map(|x| x.to_i64().unwrap()).collect()
    }

    /// The sublattice of vectors whose constant is exactly 1. `None` when a
    /// generator carries a constant that is not a root of unity.
    pub fn unit_sublattice(&self) -> Option<IntMat> {
        if self.is_empty() {
            return Some(IntMat::zeros(0, self.len));
        }
        let mut level: u32 = 1;
        for t in &self.torsion {
            match t {
                Torsion::One => {}
                Torsion::RootOfUnity(k) => level = level.lcm(k),
                Torsion::Other => return None,
            }
        }
        // c_k = zeta_L^{e_k}; want sum a_k e_k = 0 mod L
        let mut col: Vec<Vec<BigInt>> = Vec::new();
        for c in &self.constants {
            let c = c.as_scalar().unwrap();
            let e = (0..level as i64).find(|&e| Scalar::root_of_unity(level, e) == c).unwrap();
            col.push(vec![BigInt::from(e)]);
        }
        col.push(vec![BigInt::from(level)]);
        let r = self.rank();
        let kernel = IntMat::from_rows(&col).unwrap().left_kernel().col_slice(0, r);
        let (h, _) = kernel.mul(&self.generators).unwrap().hnf();
        let nz = (0..h.rows()).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
        Some(h.row_slice(0, nz))
    }
}

fn all_vars(fs: &[RatExpr]) -> BTreeSet<Var> {
    fs.iter().flat_map(|e| e.vars()).collect()
}

fn poly_lcm(a: &Poly, b: &Poly) -> Poly {
    let g = a.gcd(b);
    a.mul(&b.div_exact(&g).unwrap())
}

fn torsion_of(c: &RatExpr) -> Torsion {
    match c.as_scalar() {
        Some(s) if s.is_one() => Torsion::One,
        Some(s) => s.root_of_unity_order().map_or(Torsion::Other, Torsion::RootOfUnity),
        None => Torsion::Other,
    }
}

/// Integer vectors `m` with `sum m_j fs_j` constant.
pub fn q_linear_relations(fs: &[RatExpr]) -> RelationLattice {
    q_linear_relations_wrt(fs, &all_vars(fs))
}

pub fn q_linear_relations_wrt(fs: &[RatExpr], wrt: &BTreeSet<Var>) -> RelationLattice {
    let level = fs
        .iter()
        .flat_map(|e| e.num().terms().chain(e.den().terms()).map(|(_, c)| c.level()).collect::<Vec<_>>())
        .fold(1u32, |a, b| a.lcm(&b));
    // one column per (variable, monomial, cyclotomic coordinate)
    let mut columns: BTreeMap<(usize, super::poly::Monomial, usize), Vec<BigRational>> = BTreeMap::new();
    for (xi, x) in wrt.iter().enumerate() {
        let ds: Vec<RatExpr> = fs.iter().map(|f| f.derivative(x)).collect();
        let common = ds.iter().filter(|d| !d.is_zero()).fold(Poly::one(), |acc, d| poly_lcm(&acc, d.den()));
        for (j, d) in ds.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            let num = d.num().mul(&common.div_exact(d.den()).unwrap());
            for (mono, c) in num.terms() {
                for (k, coord) in c.coords_at(level).into_iter().enumerate() {
                    if coord.is_zero() {
                        continue;
                    }
                    let col = columns.entry((xi, mono.clone(), k)).or_insert_with(|| vec![BigRational::zero(); fs.len()]);
                    col[j] = coord;
                }
            }
        }
    }
    let mut rows = vec![Vec::with_capacity(columns.len()); fs.len()];
    for col in columns.values() {
        let den = col.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        for (j, x) in col.iter().enumerate() {
            rows[j].push((x * BigRational::from_integer(den.clone())).to_integer());
        }
    }
    let generators = IntMat::from_rows_with_cols(&rows, columns.len()).unwrap().left_kernel();
    let constants: Vec<RatExpr> = (0..generators.rows())
        .map(|k| {
            fs.iter().zip(generators.row(k)).fold(RatExpr::zero(), |acc, (f, m)| acc.add(&f.scale_int(m.to_i64().unwrap())))
        })
        .collect();
    let torsion = vec![Torsion::Other; constants.len()];
    RelationLattice { len: fs.len(), generators, constants, torsion }
}

/// Integer vectors `m` with `prod fs_j^{m_j}` constant.
pub fn mult_relations(fs: &[RatExpr]) -> Result<RelationLattice> {
    mult_relations_wrt(fs, &all_vars(fs))
}

pub fn mult_relations_wrt(fs: &[RatExpr], wrt: &BTreeSet<Var>) -> Result<RelationLattice> {
    if let Some(j) = fs.iter().position(RatExpr::is_zero) {
        return Err(Error::ZeroInput(format!("entry {j} of a multiplicative tuple is zero")));
    }
    let parts: Vec<(Poly, Poly)> = fs.iter().map(|f| (primitive_wrt(f.num(), wrt), primitive_wrt(f.den(), wrt))).collect();
    let basis = coprime_basis(parts.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect());
    let rows: Vec<Vec<BigInt>> = parts
        .iter()
        .map(|(n, d)| {
            let en = valuations(n, &basis);
            let ed = valuations(d, &basis);
            en.iter().zip(&ed).map(|(a, b)| BigInt::from(*a as i64 - *b as i64)).collect()
        })
        .collect();
    let generators = IntMat::from_rows_with_cols(&rows, basis.len()).unwrap().left_kernel();
    let mut constants = Vec::with_capacity(generators.rows());
    for k in 0..generators.rows() {
        let mut c = RatExpr::one();
        for (f, m) in fs.iter().zip(generators.row(k)) {
            let m = m.to_i64().ok_or_else(|| Error::Invalid("relation exponent too large".into()))?;
            if m != 0 {
                c = c.mul(&f.pow(m).unwrap());
            }
        }
        constants.push(c);
    }
    let torsion = constants.iter().map(torsion_of).collect();
    Ok(RelationLattice { len: fs.len(), generators, constants, torsion })
}

/// The primitive part of `p` viewed as a polynomial in `wrt` over the ring of
/// the other indeterminates, normalized to leading coefficient 1.
fn primitive_wrt(p: &Poly, wrt: &BTreeSet<Var>) -> Poly {
    if p.vars().is_disjoint(wrt) {
        return Poly::one();
    }
    let content = p.split_by(wrt).values().fold(Poly::zero(), |g, c| if g.is_zero() { c.monic() } else { g.gcd(c) });
    p.div_exact(&content).unwrap().monic()
}

/// Pairwise coprime non-constant polynomials such that every input is a
/// constant times a product of their powers.
pub fn coprime_basis(items: Vec<Poly>) -> Vec<Poly> {
    let mut basis: Vec<Poly> = Vec::new();
    let mut work: Vec<Poly> = items.into_iter().filter(|p| !p.is_constant()).map(|p| p.monic()).collect();
    while let Some(a) = work.pop() {
        if a.is_constant() {
            continue;
        }
        let mut split = None;
        for (k, b) in basis.iter().enumerate() {
            let g = a.gcd(b);
            if !g.is_constant() {
                split = Some((k, g));
                break;
            }
        }
        match split {
            None => basis.push(a),
            Some((k, g)) => {
                let b = basis.swap_remove(k);
                if g == b && g == a {
                    basis.push(g);
                    continue;
                }
                work.push(a.div_exact(&g).unwrap().monic());
                work.push(b.div_exact(&g).unwrap().monic());
                work.push(g);
            }
        }
    }
    basis.sort_by(|x, y| x.to_string().cmp(&y.to_string()));
    basis
}

fn valuations(p: &Poly, basis: &[Poly]) -> Vec<u32> {
    let mut rest = p.clone();
    basis
        .iter()
        .map(|b| {
            let mut e = 0;
            while let Some(q) = rest.div_exact(b) {
                rest = q;
                e += 1;
            }
            e
        })
        .collect()
}

/// True if every generator applied to `fs` is constant with respect to `wrt`.
pub fn generators_are_constant(lat: &RelationLattice, wrt: &BTreeSet<Var>) -> bool {
    lat.constants.iter().all(|c| c.vars().is_disjoint(wrt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_expr;

    fn es(src: &[&str]) -> Vec<RatExpr> {
        src.iter().map(|s| parse_expr(s).unwrap()).collect()
    }

    fn same_span(lat: &RelationLattice, rows: &[Vec<i64>]) -> bool {
        let want = IntMat::from_rows_with_cols(rows, lat.len).unwrap();
        lat.rank() == want.rows() && lat.generators.span_contains(&want) && want.span_contains(&lat.generators)
    }

    #[test]
    fn additive_examples() {
        let lat = q_linear_relations(&es(&["t", "2*t"]));
        assert!(same_span(&lat, &[vec![2, -1]]));
        let lat = q_linear_relations(&es(&["t", "1 - t"]));
        assert!(same_span(&lat, &[vec![1, 1]]));
        assert_eq!(lat.constants[0], RatExpr::one());
        assert!(q_linear_relations(&es(&["t1", "t2"])).is_empty());
        let lat = q_linear_relations(&es(&["i*t", "t", "zeta(3)*t"]));
        assert_eq!(lat.rank(), 0);
        let lat = q_linear_relations(&es(&["1/(t+1)", "t/(t+1)", "s"]));
        assert!(same_span(&lat, &[vec![1, 1, 0]]));
    }

    #[test]
    fn multiplicative_examples() {
        let lat = mult_relations(&es(&["t", "t^2", "1/t"])).unwrap();
        assert!(same_span(&lat, &[vec![2, -1, 0], vec![1, 0, 1]]));
        assert!(lat.torsion.iter().all(|t| *t == Torsion::One));
        assert!(mult_relations(&es(&["t", "1 - t"])).unwrap().is_empty());
        let lat = mult_relations(&es(&["3*t", "t"])).unwrap();
        assert!(same_span(&lat, &[vec![1, -1]]));
        assert_eq!(lat.constants[0].as_scalar().unwrap(), Scalar::from_int(3).pow(lat.generator(0)[0]));
        assert_eq!(lat.torsion[0], Torsion::Other);
        let lat = mult_relations(&es(&["-t", "t"])).unwrap();
        assert_eq!(lat.torsion[0], Torsion::RootOfUnity(2));
        assert!(matches!(mult_relations(&[RatExpr::zero()]), Err(Error::ZeroInput(_))));
    }

    #[test]
    fn multiplicative_with_shared_factors() {
        let fs = es(&["(t^2 - 1)", "(t - 1)*s", "(t + 1)/s"]);
        let lat = mult_relations(&fs).unwrap();
        assert!(same_span(&lat, &[vec![1, -1, -1]]));
        let lat = mult_relations(&es(&["(1 + i*s)/(1 - i*s)", "(1 - i*s)/(1 + i*s)"])).unwrap();
        assert!(same_span(&lat, &[vec![1, 1]]));
    }

    #[test]
    fn relative_constants() {
        let wrt: BTreeSet<Var> = [Var::new("s"), Var::new("v")].into_iter().collect();
        let fs = es(&["-t*s", "s"]);
        // -t*s + t*s is constant, but t is not an integer
        assert!(q_linear_relations_wrt(&fs, &wrt).is_empty());
        let lat = q_linear_relations_wrt(&es(&["t*s + 1", "t*s"]), &wrt);
        assert!(same_span(&lat, &[vec![1, -1]]));
        assert!(generators_are_constant(&lat, &wrt));
        let lat = mult_relations_wrt(&es(&["v", "1/v"]), &wrt).unwrap();
        assert!(same_span(&lat, &[vec![1, 1]]));
        let lat = mult_relations_wrt(&es(&["t*v", "v"]), &wrt).unwrap();
        assert!(same_span(&lat, &[vec![1, -1]]));
        assert_eq!(lat.torsion[0], Torsion::Other);
    }

    #[test]
    fn unit_sublattice_mod_torsion() {
        let lat = mult_relations(&es(&["-t", "t"])).unwrap();
        assert_eq!(lat.unit_sublattice().unwrap(), IntMat::from_rows(&[vec![2i64, -2]]).unwrap());
        let lat = mult_relations(&es(&["zeta(3)*t", "t", "s"])).unwrap();
        assert_eq!(lat.unit_sublattice().unwrap(), IntMat::from_rows(&[vec![3i64, -3, 0]]).unwrap());
        assert!(mult_relations(&es(&["2*t", "t"])).unwrap().unit_sublattice().is_none());
}
    }
