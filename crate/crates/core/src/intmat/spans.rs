use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMat;

/// Hermite basis of `rowspan_Q(m) ∩ Z^cols`, without zero rows. Two matrices
/// have the same rational row span iff their saturated forms are equal.
pub fn saturated_hnf(m: &IntMat) -> IntMat {
    let kernel = m.right_kernel();
    let sat = kernel.right_kernel();
    let (h, _) = sat.hnf();
    let r = (0..h.rows()).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
    h.row_slice(0, r)
}

fn primitive_directions(cols: usize, bound: i64) -> Vec<Vec<BigInt>> {
    let side = (2 * bound + 1) as usize;
    let total = side.pow(cols as u32);
    let mut out = BTreeSet::new();
    for idx in 0..total {
        let mut k = idx;
        let mut v = Vec::with_capacity(cols);
        for _ in 0..cols {
            v.push(BigInt::from((k % side) as i64 - bound));
            k /= side;
        }
        let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if g.is_zero() {
            continue;
        }
        let mut v: Vec<BigInt> = v.into_iter().map(|x| x / &g).collect();
        if v.iter().find(|x| !x.is_zero()).unwrap().is_negative() {
            v = v.into_iter().map(|x| -x).collect();
        }
        out.insert(v);
    }
    out.into_iter().collect()
}

/// One saturated Hermite representative per rational row span of dimension
/// `k` in `Q^cols` spanned by integer vectors with entries in `[-bound, bound]`.
/// The result is sorted and free of duplicates.
pub fn enumerate_row_spans(k: usize, cols: usize, bound: u32) -> Vec<IntMat> {
    assert!(bound >= 1, "bound must be positive");
    if k == 0 || k > cols {
        return Vec::new();
    }
    if k == cols {
        return vec![IntMat::identity(cols)];
    }
    let dirs = primitive_directions(cols, bound as i64);
    let mut found = BTreeSet::new();
    let mut chosen: Vec<Vec<BigInt>> = Vec::with_capacity(k);
    extend(&dirs, 0, k, cols, &mut chosen, &mut found);
    found.into_iter().collect()
}

fn extend(
    dirs: &[Vec<BigInt>],
    start: usize,
    k: usize,
    cols: usize,
    chosen: &mut Vec<Vec<BigInt>>,
    found: &mut BTreeSet<IntMat>,
) {
    if chosen.len() == k {
        let m = IntMat::from_rows_with_cols(chosen, cols).unwrap();
        found.insert(saturated_hnf(&m));
        return;
    }
    for i in start..dirs.len() {
        if dirs.len() - i < k - chosen.len() {
            break;
        }
        chosen.push(dirs[i].clone());
        let independent = IntMat::from_rows_with_cols(chosen, cols).unwrap().rank() == chosen.len();
        if independent {
            extend(dirs, i + 1, k, cols, chosen, found);
        }
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMat {
        IntMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn lines_in_the_plane_bound_one() {
        let spans = enumerate_row_spans(1, 2, 1);
        let expect: BTreeSet<IntMat> =
            [m(&[&[1, 0]]), m(&[&[0, 1]]), m(&[&[1, 1]]), m(&[&[1, -1]])].iter().map(saturated_hnf).collect();
        assert_eq!(spans.into_iter().collect::<BTreeSet<_>>(), expect);
    }

    #[test]
    fn full_rank_is_identity_only() {
        assert_eq!(enumerate_row_spans(3, 3, 2), vec![IntMat::identity(3)]);
    }

    #[test]
    fn brute_force_count_k1_c2_b2() {
        // all 24 nonzero rows in [-2,2]^2, deduplicated by rational span
        let mut reps: Vec<IntMat> = Vec::new();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                if a == 0 && b == 0 {
                    continue;
                }
                let row = m(&[&[a, b]]);
                if !reps.iter().any(|r| r.same_row_span(&row)) {
                    reps.push(row);
                }
            }
        }
        assert_eq!(reps.len(), 8);
        assert_eq!(enumerate_row_spans(1, 2, 2).len(), reps.len());
    }

    #[test]
    fn saturation() {
        let s = saturated_hnf(&m(&[&[2, 4], &[0, 0]]));
        assert_eq!(s, m(&[&[1, 2]]));
        let s = saturated_hnf(&m(&[&[2, 0, 0], &[0, 2, 0]]));
        assert_eq!(s, m(&[&[1, 0, 0], &[0, 1, 0]]));
    }
}
