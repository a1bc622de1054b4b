//! Constructive versions of the two block-decomposition lemmas used in the
//! rotundity analysis of `G`-restrictions.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::IntMat;
use crate::error::{Error, Result};

/// `A * [[N, 0], [0, P]] = [[N0; P1, 0], [0, P0; P1]]`.
#[derive(Clone, Debug, Serialize)]
pub struct BlockDecomposition {
    pub a: IntMat,
    pub n0: IntMat,
    pub p0: IntMat,
    pub p1: IntMat,
}

/// `A * M = [[N0, 0], [N1, P1], [0, P0]]` with block heights `k`, `m`, `l`.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralReduction {
    pub a: IntMat,
    pub n0: IntMat,
    pub n1: IntMat,
    pub p1: IntMat,
    pub p0: IntMat,
    pub k: usize,
    pub l: usize,
    pub m: usize,
}

fn unit_row(len: usize, at: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); len];
    v[at] = BigInt::one();
    v
}

/// Unit rows that complete the independent rows of `base` to a basis of
/// `Q^len`, in increasing coordinate order.
fn completion(base: &IntMat, len: usize) -> IntMat {
    let mut acc = base.clone();
    let mut extra: Vec<Vec<BigInt>> = Vec::new();
    for j in 0..len {
        if acc.rows() == len {
            break;
        }
        let e = IntMat::from_rows(&[unit_row(len, j)]).unwrap();
        let cand = acc.vstack(&e).unwrap();
        if cand.rank() == cand.rows() {
            acc = cand;
            extra.push(unit_row(len, j));
        }
    }
    IntMat::from_rows_with_cols(&extra, len).unwrap()
}

fn full_row_rank(m: &IntMat, what: &str) -> Result<()> {
    if m.rank() != m.rows() {
        return Err(Error::RankDeficient(format!("{what} has dependent rows")));
    }
    Ok(())
}

/// Splits the row spaces of `N` and `P` into their intersection (`P1`) and
/// complements (`N0`, `P0`), all inside the integer row modules of the inputs.
pub fn decompose_block(n: &IntMat, p: &IntMat) -> Result<BlockDecomposition> {
    if n.cols() != p.cols() {
        return Err(Error::Dimension(format!("N has {} columns, P has {}", n.cols(), p.cols())));
    }
    full_row_rank(n, "N")?;
    full_row_rank(p, "P")?;
    let (k, l) = (n.rows(), p.rows());
    // x N = y P  <=>  (x | y) [N; -P] = 0
    let kernel = n.vstack(&p.scale(&BigInt::from(-1)))?.left_kernel();
    let x = kernel.col_slice(0, k);
    let y = kernel.col_slice(k, k + l);
    let p1 = x.mul(n)?;
    let fill_n = completion(&x, k);
    let fill_p = completion(&y, l);
    let a0 = fill_n.vstack(&x)?;
    let a1 = fill_p.vstack(&y)?;
    Ok(BlockDecomposition { n0: fill_n.mul(n)?, p0: fill_p.mul(p)?, p1, a: a0.block_diag(&a1) })
}

impl BlockDecomposition {
    /// Checks every stated property exactly; returns a description of the
    /// first violation.
    pub fn verify(&self, n: &IntMat, p: &IntMat) -> std::result::Result<(), String> {
        let (k, l) = (n.rows(), p.rows());
        if self.a.rows() != k + l || self.a.cols() != k + l || self.a.rank() != k + l {
            return Err("A is not square of full rank".into());
        }
        let lhs = self.a.mul(&n.block_diag(p)).map_err(|e| e.to_string())?;
        let zero_n = IntMat::zeros(k, p.cols());
        let zero_p = IntMat::zeros(l, n.cols());
        let left = self.n0.vstack(&self.p1).map_err(|e| e.to_string())?;
        let right = self.p0.vstack(&self.p1).map_err(|e| e.to_string())?;
        let rhs = left.hstack(&zero_n).and_then(|t| zero_p.hstack(&right).and_then(|b| t.vstack(&b))).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!("block equation fails: {lhs} != {rhs}"));
        }
        let all = self.n0.vstack(&self.p0).and_then(|t| t.vstack(&self.p1)).map_err(|e| e.to_string())?;
        if all.rank() != all.rows() {
            return Err("rows of N0, P0, P1 are dependent".into());
        }
        let sum_dim = n.vstack(p).map_err(|e| e.to_string())?.rank();
        let inter_dim = k + l - sum_dim;
        if self.p1.rows() != inter_dim || !n.span_contains(&self.p1) || !p.span_contains(&self.p1) {
            return Err("P1 does not span the intersection of the row spaces".into());
        }
        Ok(())
    }
}

/// Reduces a full-row-rank `p x 2n` matrix to the three-band shape
/// `[[N0, 0], [N1, P1], [0, P0]]`.
pub fn reduce_general(mat: &IntMat) -> Result<GeneralReduction> {
    if mat.cols() % 2 != 0 {
        return Err(Error::Dimension(format!("expected an even number of columns, got {}", mat.cols())));
    }
    if mat.rows() == 0 || mat.is_zero() {
        return Err(Error::ZeroInput("zero matrix".into()));
    }
    full_row_rank(mat, "M")?;
    let (p, n) = (mat.rows(), mat.cols() / 2);
    let (h, u) = mat.hnf();
    // rows with their pivot in the left half come first in echelon form
    let r = (0..p).filter(|&i| h.row(i)[..n].iter().any(|x| !x.is_zero())).count();
    let nh = h.row_slice(0, r).col_slice(0, n);
    let q = h.row_slice(0, r).col_slice(n, 2 * n);
    let ph = h.row_slice(r, p).col_slice(n, 2 * n);
    let l = p - r;
    // x Q + y Ph = 0 picks the combinations whose right half cancels
    let kernel = q.vstack(&ph)?.left_kernel();
    let x = kernel.col_slice(0, r);
    let y = kernel.col_slice(r, r + l);
    let k = x.rows();
    let fill = completion(&x, r);
    let m = fill.rows();
    let mut b = IntMat::zeros(p, p);
    for i in 0..k {
        for j in 0..r {
            b.set(i, j, x.get(i, j).clone());
        }
        for j in 0..l {
            b.set(i, r + j, y.get(i, j).clone());
        }
    }
    for i in 0..m {
        for j in 0..r {
            b.set(k + i, j, fill.get(i, j).clone());
        }
    }
    for i in 0..l {
        b.set(r + i, r + i, BigInt::one());
    }
    Ok(GeneralReduction {
        a: b.mul(&u)?,
        n0: x.mul(&nh)?,
        n1: fill.mul(&nh)?,
        p1: fill.mul(&q)?,
        p0: ph,
        k,
        l,
        m,
    })
}

impl GeneralReduction {
    pub fn verify(&self, mat: &IntMat) -> std::result::Result<(), String> {
        let (p, n) = (mat.rows(), mat.cols() / 2);
        if self.a.rows() != p || self.a.cols() != p || self.a.rank() != p {
            return Err("A is not square of full rank".into());
        }
        if self.k + self.m + self.l != p {
            return Err(format!("k + m + l = {} != {p}", self.k + self.m + self.l));
        }
        let err = |e: Error| e.to_string();
        let top = self.n0.hstack(&IntMat::zeros(self.k, n)).map_err(err)?;
        let mid = self.n1.hstack(&self.p1).map_err(err)?;
        let bot = IntMat::zeros(self.l, n).hstack(&self.p0).map_err(err)?;
        let rhs = top.vstack(&mid).and_then(|t| t.vstack(&bot)).map_err(err)?;
        let lhs = self.a.mul(mat).map_err(err)?;
        if lhs != rhs {
            return Err(format!("band equation fails: {lhs} != {rhs}"));
        }
        if self.n0.vstack(&self.n1).map_err(err)?.rank() != self.k + self.m {
            return Err("rank of (N0; N1) is not k + m".into());
        }
        if self.p0.vstack(&self.p1).map_err(err)?.rank() != self.m + self.l {
            return Err("rank of (P0; P1) is not m + l".into());
        }
        Ok(())
    }
}
