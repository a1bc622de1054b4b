//! Integer matrices: Hermite and Smith normal forms, kernels, the
//! adjugate-style companion, the two block decomposition lemmas, row-span
//! enumeration, and the action of integer matrices on `G^n`.

mod action;
mod lemmas;
mod spans;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use action::{act, GPoint};
pub use lemmas::{decompose_block, reduce_general, BlockDecomposition, GeneralReduction};
pub use spans::{enumerate_row_spans, saturated_hnf};

/// Dense integer matrix.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> IntMat {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMat {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn scalar(n: usize, k: i64) -> IntMat {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::from(k));
        }
        m
    }

    /// Builds a matrix from rows; all rows must share one length. An empty
    /// row list needs `cols` to be known, see [`IntMat::from_rows_with_cols`].
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<IntMat> {
        let cols = rows.first().map_or(0, Vec::len);
        IntMat::from_rows_with_cols(rows, cols)
    }

    pub fn from_rows_with_cols<T: Into<BigInt> + Clone>(rows: &[Vec<T>], cols: usize) -> Result<IntMat> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Dimension(format!("ragged matrix: row of length {} in a {cols}-column matrix", r.len())));
            }
            data.extend(r.iter().cloned().map(Into::into));
        }
        Ok(IntMat { rows: rows.len(), cols, data })
    }

    /// Parses the literal form `[[1,0],[0,1]]`.
    pub fn parse(s: &str) -> Result<IntMat> {
        let rows: Vec<Vec<i64>> = serde_json::from_str(s).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })?;
        IntMat::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigInt) -> IntMat {
        IntMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    /// Rows `[from, to)`.
    pub fn row_slice(&self, from: usize, to: usize) -> IntMat {
        IntMat { rows: to - from, cols: self.cols, data: self.data[from * self.cols..to * self.cols].to_vec() }
    }

    /// Columns `[from, to)`.
    pub fn col_slice(&self, from: usize, to: usize) -> IntMat {
        let mut m = IntMat::zeros(self.rows, to - from);
        for r in 0..self.rows {
            for c in from..to {
                m.set(r, c - from, self.get(r, c).clone());
            }
        }
        m
    }

    pub fn vstack(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!("vstack of {} and {} columns", self.cols, other.cols)));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(IntMat { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &IntMat) -> Result<IntMat> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!("hstack of {} and {} rows", self.rows, other.rows)));
        }
        let mut m = IntMat::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                m.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        Ok(m)
    }

    /// Block-diagonal `[[self, 0], [0, other]]`.
    pub fn block_diag(&self, other: &IntMat) -> IntMat {
        let mut m = IntMat::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                m.set(self.rows + r, self.cols + c, other.get(r, c).clone());
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = self.get(dst, c) + k * self.get(src, c);
            self.set(dst, c, v);
        }
    }

    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = self.get(r, dst) + k * self.get(r, src);
            self.set(r, dst, v);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -self.get(r, c);
            self.set(r, c, v);
        }
    }

    /// Rank over `Q`, by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut prev = BigInt::one();
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| !m.get(r, col).is_zero()) else { continue };
            m.swap_rows(p, rank);
            let piv = m.get(rank, col).clone();
            for r in rank + 1..m.rows {
                let a = m.get(r, col).clone();
                for c in col + 1..m.cols {
                    let v = (&piv * m.get(r, c) - &a * m.get(rank, c)) / &prev;
                    m.set(r, c, v);
                }
                m.set(r, col, BigInt::zero());
            }
            prev = piv;
            rank += 1;
        }
        rank
    }

    pub fn det(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!("determinant of a {}x{} matrix", self.rows, self.cols)));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !m.get(r, k).is_zero()) else { return Ok(BigInt::zero()) };
            if p != k {
                m.swap_rows(p, k);
                sign = -sign;
            }
            for r in k + 1..n {
                for c in k + 1..n {
                    let v = (m.get(k, k) * m.get(r, c) - m.get(r, k) * m.get(k, c)) / &prev;
                    m.set(r, c, v);
                }
                m.set(r, k, BigInt::zero());
            }
            prev = m.get(k, k).clone();
        }
        Ok(sign * m.get(n - 1, n - 1))
    }

    /// Row Hermite normal form: returns `(H, U)` with `U` unimodular and
    /// `U * self = H`. Pivots are positive, entries above a pivot lie in
    /// `[0, pivot)`, and zero rows come last.
    pub fn hnf(&self) -> (IntMat, IntMat) {
        let mut h = self.clone();
        let mut u = IntMat::identity(self.rows);
        let mut row = 0;
        for col in 0..h.cols {
            if row == h.rows {
                break;
            }
            loop {
                let piv = (row..h.rows).filter(|&r| !h.get(r, col).is_zero()).min_by_key(|&r| h.get(r, col).abs());
                let Some(p) = piv else { break };
                h.swap_rows(p, row);
                u.swap_rows(p, row);
                let mut done = true;
                for r in row + 1..h.rows {
                    if h.get(r, col).is_zero() {
                        continue;
                    }
                    let q = -h.get(r, col).div_floor(h.get(row, col));
                    h.add_row(r, row, &q);
                    u.add_row(r, row, &q);
                    if !h.get(r, col).is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if row < h.rows && !h.get(row, col).is_zero() {
                if h.get(row, col).is_negative() {
                    h.negate_row(row);
                    u.negate_row(row);
                }
                for r in 0..row {
                    let q = -h.get(r, col).div_floor(h.get(row, col));
                    h.add_row(r, row, &q);
                    u.add_row(r, row, &q);
                }
                row += 1;
            }
        }
        (h, u)
    }

    /// Smith normal form: `(S, U, V)` with `U`, `V` unimodular, `U * self * V = S`
    /// diagonal, nonnegative, and each diagonal entry dividing the next.
    pub fn snf(&self) -> (IntMat, IntMat, IntMat) {
        let mut s = self.clone();
        let mut u = IntMat::identity(self.rows);
        let mut v = IntMat::identity(self.cols);
        let n = self.rows.min(self.cols);
        for t in 0..n {
            loop {
                let mut best: Option<(usize, usize)> = None;
                for r in t..s.rows {
                    for c in t..s.cols {
                        if !s.get(r, c).is_zero() && best.map_or(true, |(br, bc)| s.get(r, c).abs() < s.get(br, bc).abs()) {
                            best = Some((r, c));
                        }
                    }
                }
                let Some((br, bc)) = best else { break };
                s.swap_rows(t, br);
                u.swap_rows(t, br);
                s.swap_cols(t, bc);
                v.swap_cols(t, bc);
                let mut clean = true;
                for r in t + 1..s.rows {
                    let q = -s.get(r, t).div_floor(s.get(t, t));
                    s.add_row(r, t, &q);
                    u.add_row(r, t, &q);
                    if !s.get(r, t).is_zero() {
                        clean = false;
                    }
                }
                for c in t + 1..s.cols {
                    let q = -s.get(t, c).div_floor(s.get(t, t));
                    s.add_col(c, t, &q);
                    v.add_col(c, t, &q);
                    if !s.get(t, c).is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    continue;
                }
                // divisibility: pull in any entry the pivot does not divide
                let bad = (t + 1..s.rows).find(|&r| (t + 1..s.cols).any(|c| !s.get(r, c).is_multiple_of(s.get(t, t))));
                match bad {
                    Some(r) => {
                        let one = BigInt::one();
                        s.add_row(t, r, &one);
                        u.add_row(t, r, &one);
                    }
                    None => break,
                }
            }
            if s.get(t, t).is_negative() {
                s.negate_row(t);
                u.negate_row(t);
            }
        }
        (s, u, v)
    }

    /// Basis (as rows, in Hermite form) of the integer left kernel
    /// `{x in Z^rows : x * self = 0}`.
    pub fn left_kernel(&self) -> IntMat {
        let (h, u) = self.hnf();
        let r = (0..h.rows).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
        let k = u.row_slice(r, u.rows);
        k.hnf().0
    }

    /// Basis (as rows) of the integer right kernel `{x : self * x = 0}`.
    pub fn right_kernel(&self) -> IntMat {
        self.transpose().left_kernel()
    }

    /// `(adj, d)` with `adj * self = d * Id` and `d = |det self|`.
    pub fn companion(&self) -> Result<(IntMat, BigInt)> {
        if self.rows != self.cols {
            return Err(Error::Dimension("companion needs a square matrix".into()));
        }
        let det = self.det()?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let inv = self.rational_inverse().ok_or(Error::Singular)?;
        let d = det.abs();
        let mut out = IntMat::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = &inv[r][c] * BigRational::from_integer(d.clone());
                debug_assert!(v.is_integer());
                out.set(r, c, v.to_integer());
            }
        }
        Ok((out, d))
    }

    fn rational_inverse(&self) -> Option<Vec<Vec<BigRational>>> {
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigRational> = self.row(r).iter().map(|x| BigRational::from_integer(x.clone())).collect();
                row.extend((0..n).map(|c| if c == r { BigRational::one() } else { BigRational::zero() }));
                row
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&r| !a[r][k].is_zero())?;
            a.swap(p, k);
            let piv = a[k][k].clone();
            for x in a[k].iter_mut() {
                *x /= &piv;
            }
            for r in 0..n {
                if r != k && !a[r][k].is_zero() {
                    let f = a[r][k].clone();
                    for c in 0..2 * n {
                        let v = &a[k][c] * &f;
                        a[r][c] -= v;
                    }
                }
            }
        }
        Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    /// True when every row of `other` lies in the rational row span of `self`.
    pub fn span_contains(&self, other: &IntMat) -> bool {
        let r = self.rank();
        self.vstack(other).map(|m| m.rank() == r).unwrap_or(false)
    }

    pub fn same_row_span(&self, other: &IntMat) -> bool {
        self.span_contains(other) && other.span_contains(self)
    }

    pub fn to_vecs_i64(&self) -> Option<Vec<Vec<i64>>> {
        use num_traits::ToPrimitive;
        (0..self.rows).map(|r| self.row(r).iter().map(ToPrimitive::to_i64).collect()).collect()
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMat{}x{}{}", self.rows, self.cols, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMat {
        IntMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn hnf_of_swap_is_identity() {
        let a = m(&[&[0, 1], &[1, 0]]);
        let (h, u) = a.hnf();
        assert_eq!(h, IntMat::identity(2));
        assert_eq!(u.mul(&a).unwrap(), h);
        assert_eq!(u.det().unwrap().abs(), BigInt::one());
    }

    #[test]
    fn hnf_shape() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let (h, u) = a.hnf();
        assert_eq!(u.mul(&a).unwrap(), h);
        assert_eq!(u.det().unwrap().abs(), BigInt::one());
        let diag: BigInt = (0..3).map(|i| h.get(i, i).clone()).product();
        assert_eq!(diag, a.det().unwrap().abs());
        for r in 0..3 {
            assert!(h.get(r, r).is_positive());
            for c in 0..r {
                assert!(h.get(r, c).is_zero());
                assert!(!h.get(c, r).is_negative() && h.get(c, r) < h.get(r, r));
            }
        }
    }

    #[test]
    fn snf_example() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let (s, u, v) = a.snf();
        assert_eq!(u.mul(&a).unwrap().mul(&v).unwrap(), s);
        assert_eq!(s, m(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 156]]));
    }

    #[test]
    fn companions() {
        let (c, d) = m(&[&[2, 0], &[0, 3]]).companion().unwrap();
        assert_eq!(c, m(&[&[3, 0], &[0, 2]]));
        assert_eq!(d, BigInt::from(6));
        let (c, d) = IntMat::identity(3).companion().unwrap();
        assert_eq!((c, d), (IntMat::identity(3), BigInt::one()));
        assert_eq!(m(&[&[1, 2], &[2, 4]]).companion(), Err(Error::Singular));
        let a = m(&[&[0, -1], &[3, 1]]);
        let (c, d) = a.companion().unwrap();
        assert_eq!(c.mul(&a).unwrap(), IntMat::scalar(2, 3));
        assert_eq!(d, BigInt::from(3));
    }

    #[test]
    fn determinant_and_rank() {
        assert_eq!(m(&[&[1, 2], &[3, 4]]).det().unwrap(), BigInt::from(-2));
        assert_eq!(IntMat::zeros(0, 0).det().unwrap(), BigInt::one());
        assert_eq!(m(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]]).rank(), 2);
        assert_eq!(IntMat::zeros(2, 3).rank(), 0);
    }

    #[test]
    fn kernels() {
        let a = m(&[&[1], &[2], &[0]]);
        let k = a.left_kernel();
        assert_eq!(k.rows(), 2);
        assert!(k.mul(&a).unwrap().is_zero());
        assert_eq!(m(&[&[1, 1]]).right_kernel(), m(&[&[1, -1]]));
    }

    #[test]
    fn literal_parse() {
        assert_eq!(IntMat::parse("[[1,0],[0,1]]").unwrap(), IntMat::identity(2));
        assert!(IntMat::parse("[[1,0],[1]]").is_err());
        assert_eq!(IntMat::identity(2).to_string(), "[[1,0],[0,1]]");
    }
}
