//! Transcendence degree by the Jacobian criterion (characteristic 0).

use std::collections::BTreeSet;

use super::modp::{level_of, ModP};
use super::poly::{Poly, Var};
use super::ratexpr::RatExpr;

/// `tr.deg(fs / over)` over the constants, using every indeterminate that
/// appears in either list.
pub fn tr_deg(fs: &[RatExpr], over: &[RatExpr]) -> usize {
    let vars: BTreeSet<Var> = fs.iter().chain(over).flat_map(|e| e.vars()).collect();
    tr_deg_wrt(fs, over, &vars)
}

/// `tr.deg(fs / over)` over the field generated by the constants and every
/// indeterminate not in `vars`.
pub fn tr_deg_wrt(fs: &[RatExpr], over: &[RatExpr], vars: &BTreeSet<Var>) -> usize {
    let all: Vec<RatExpr> = over.iter().chain(fs).cloned().collect();
    jacobian_rank(&all, vars) - jacobian_rank(over, vars)
}

/// Rank over the function field of the Jacobian of `es` with respect to `vars`.
pub fn jacobian_rank(es: &[RatExpr], vars: &BTreeSet<Var>) -> usize {
    let vars: Vec<Var> = vars.iter().cloned().collect();
    let rows: Vec<Vec<Poly>> =
        es.iter().filter(|e| !e.is_constant()).map(|e| polynomial_row(e, &vars)).filter(|r| r.iter().any(|p| !p.is_zero())).collect();
    if rows.is_empty() {
        return 0;
    }
    let live: Vec<usize> = (0..vars.len()).filter(|&j| rows.iter().any(|r| !r[j].is_zero())).collect();
    let full = rows.len().min(live.len());
    let lower = numeric_rank(&rows, &live);
    if lower == full {
        return full;
    }
    bareiss_rank(rows, &live)
}

/// Gradient of `e` scaled by the common denominator so every entry is a polynomial.
fn polynomial_row(e: &RatExpr, vars: &[Var]) -> Vec<Poly> {
    let ds: Vec<RatExpr> = vars.iter().map(|v| e.derivative(v)).collect();
    let mut common = Poly::one();
    for d in &ds {
        if !d.is_zero() {
            let g = common.gcd(d.den());
            common = common.mul(&d.den().div_exact(&g).unwrap());
        }
    }
    ds.iter()
        .map(|d| if d.is_zero() { Poly::zero() } else { d.num().mul(&common.div_exact(d.den()).unwrap()) })
        .collect()
}

/// Rank of the reduction modulo split primes at pseudo-random points; never
/// exceeds the generic rank.
fn numeric_rank(rows: &[Vec<Poly>], live: &[usize]) -> usize {
    let vars: BTreeSet<Var> = rows.iter().flatten().flat_map(|p| p.vars()).collect();
    let level = level_of(rows.iter().flatten());
    let full = rows.len().min(live.len());
    let mut best = 0;
    for attempt in 0..3usize {
        let field = ModP::for_level(level, attempt);
        let point = field.point(&vars, attempt as u64);
        let image: Option<Vec<Vec<u64>>> =
            rows.iter().map(|r| live.iter().map(|&j| field.evaluate(&r[j], &point)).collect()).collect();
        if let Some(mut m) = image {
            best = best.max(field.rank(&mut m));
        }
        if best == full {
            break;
        }
    }
    best
}

/// Fraction-free elimination over the polynomial ring with column skipping.
fn bareiss_rank(rows: Vec<Vec<Poly>>, live: &[usize]) -> usize {
    let mut m: Vec<Vec<Poly>> = rows.into_iter().map(|r| live.iter().map(|&j| r[j].clone()).collect()).collect();
    let (nr, nc) = (m.len(), live.len());
    let mut prev = Poly::one();
    let mut rank = 0;
    for c in 0..nc {
        if rank == nr {
            break;
        }
        let Some(p) = (rank..nr).filter(|&r| !m[r][c].is_zero()).min_by_key(|&r| m[r][c].num_terms()) else { continue };
        m.swap(rank, p);
        for r in rank + 1..nr {
            for j in c + 1..nc {
                let t = m[rank][c].mul(&m[r][j]).sub(&m[r][c].mul(&m[rank][j]));
                m[r][j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[r][c] = Poly::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_expr;

    fn es(src: &[&str]) -> Vec<RatExpr> {
        src.iter().map(|s| parse_expr(s).unwrap()).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(tr_deg(&es(&["t1 + t2", "t1*t2"]), &[]), 2);
        assert_eq!(tr_deg(&es(&["t", "t^2"]), &[]), 1);
        assert_eq!(tr_deg(&es(&["3 + i"]), &[]), 0);
        assert_eq!(tr_deg(&es(&["t + s"]), &es(&["t", "s"])), 0);
        assert_eq!(tr_deg(&es(&["t*s", "t/s"]), &es(&["t"])), 1);
    }

    #[test]
    fn wrt_treats_others_as_constants() {
        let vars: BTreeSet<Var> = [Var::new("s")].into_iter().collect();
        assert_eq!(tr_deg_wrt(&es(&["t*s", "s"]), &[], &vars), 1);
        assert_eq!(tr_deg_wrt(&es(&["t"]), &[], &vars), 0);
    }

    #[test]
    fn symbolic_fallback_on_singular_points() {
        // rank 1 everywhere, and the sample points cannot certify it
        let fs = es(&["x*y", "x^2*y^2 + 1", "(x*y - 1)/(x*y + 1)"]);
        assert_eq!(tr_deg(&fs, &[]), 1);
        let fs = es(&["x + y + z", "x*y + y*z + x*z", "x^2 + y^2 + z^2"]);
        assert_eq!(tr_deg(&fs, &[]), 2);
    }
}
