//! The restriction of scalars `V^ ⊂ G^{2n}`, built as the image of
//! `V' x (V')^sigma` under `(z, w) x (z', w') -> (z + z', w w') x (z - z', w / w')`
//! for a half `V'` with `2 . V' = V`.
//!
//! Coordinates of `V^`: additive `(a_1..a_n, c_1..c_n)`, multiplicative
//! `(b_1..b_n, d_1..d_n)`. The real block `(a, b)` is sigma-fixed, `c` is
//! anti-fixed and `d` lies on the unit circle.

use std::collections::BTreeMap;

use serde::Serialize;

use super::classify::{classify, Flag};
use super::divide::{divide, division_substitution};
use super::{ParamVariety, Provenance, VarietySpec};
use crate::error::{Error, Result};
use crate::field::{Involution, Namer, RatExpr, Var};
use crate::intmat::IntMat;

#[derive(Clone, Debug)]
pub struct Realization {
    pub variety: ParamVariety,
    /// The input involution extended by the new sigma-swapped pairs.
    pub involution: Involution,
    /// `V'` in the parameters `u_j`.
    pub half: ParamVariety,
    /// `(u_j, sigma(u_j))`.
    pub pairs: Vec<(Var, Var)>,
    /// Parameters of `V` in terms of the `u_j`, witnessing `2 . V' ⊂ V`.
    pub membership: BTreeMap<Var, RatExpr>,
}

impl Realization {
    pub fn n(&self) -> usize {
        self.half.n()
    }

    /// `(a + c, b d) = 2 . phi'(u)`, and `2 . phi'(u)` lies on `V`.
    pub fn witness_holds(&self, v: &ParamVariety) -> bool {
        let n = self.n();
        let x = &self.variety;
        let doubled = self.half.push(&IntMat::scalar(n, 2)).expect("square scalar matrix");
        let sums = (0..n).all(|j| {
            x.additive[j].add(&x.additive[n + j]) == doubled.additive[j]
                && x.multiplicative[j].mul(&x.multiplicative[n + j]) == doubled.multiplicative[j]
        });
        sums && doubled.contained_via(v, &self.membership)
    }

    /// Sigma types of the four coordinate blocks: fixed, fixed, anti-fixed,
    /// inverse-conjugate.
    pub fn sigma_structure_holds(&self) -> Result<bool> {
        let n = self.n();
        let x = &self.variety;
        let inv = &self.involution;
        for j in 0..n {
            let (a, c) = (&x.additive[j], &x.additive[n + j]);
            let (b, d) = (&x.multiplicative[j], &x.multiplicative[n + j]);
            if !inv.is_fixed(a)? || !inv.is_fixed(b)? || !inv.is_anti_fixed(c)? || !inv.is_unit_circle(d)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Restriction of scalars along the first half returned by [`divide`].
pub fn realize(v: &ParamVariety, inv: &Involution, namer: &mut Namer) -> Result<Realization> {
    let half = divide(v, 2)?.into_iter().next().expect("divide returns at least one component");
    let (_, subs) = division_substitution(&half).expect("fresh from divide");
    let mut involution = inv.clone();
    let mut pairs = Vec::with_capacity(half.params.len());
    for _ in &half.params {
        let (u, s) = (namer.fresh("u"), namer.fresh("v"));
        involution.add_pair(u.clone(), s.clone())?;
        pairs.push((u, s));
    }
    let us: Vec<Var> = pairs.iter().map(|(u, _)| u.clone()).collect();
    let rename: BTreeMap<Var, Var> = half.params.iter().cloned().zip(us.iter().cloned()).collect();
    let half = half.rename_params(&us);
    let to_u = |x: &Var| rename.get(x).cloned().unwrap_or_else(|| x.clone());
    let membership = v
        .params
        .iter()
        .map(|p| (p.clone(), subs.get(p).cloned().unwrap_or_else(|| RatExpr::var(p.name())).rename(&to_u)))
        .collect();

    let sigma = |es: &[RatExpr]| es.iter().map(|e| involution.apply(e)).collect::<Result<Vec<_>>>();
    let (sz, sw) = (sigma(&half.additive)?, sigma(&half.multiplicative)?);
    let a = half.additive.iter().zip(&sz).map(|(z, s)| z.add(s));
    let c = half.additive.iter().zip(&sz).map(|(z, s)| z.sub(s));
    let b = half.multiplicative.iter().zip(&sw).map(|(w, s)| w.mul(s));
    let d = half.multiplicative.iter().zip(&sw).map(|(w, s)| w.div(s).expect("multiplicative coordinates are nonzero"));
    let params = pairs.iter().flat_map(|(u, s)| [u.clone(), s.clone()]).collect();
    let mut variety = ParamVariety::new(&format!("re({})", v.name), params, a.chain(c).collect(), b.chain(d).collect(), Vec::new())?;
    variety.provenance = v.provenance.clone();
    variety.provenance.push(Provenance::Realize { half: half.name.clone() });
    Ok(Realization { variety, involution, half, pairs, membership })
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    pub name: String,
    pub n: usize,
    pub bound: u32,
    pub realized: VarietySpec,
    pub dim: usize,
    pub abs_free: Flag,
    pub rotund: Flag,
    /// Span representatives `M` with `dim M.V^ = rank M`.
    pub equality_matrices: Vec<Vec<Vec<i64>>>,
    /// Equality cases of neither admissible shape.
    pub counterexamples: Vec<Vec<Vec<i64>>>,
    pub input_perfectly_rotund: bool,
    pub witness_holds: bool,
    pub sigma_structure_holds: bool,
    pub spans_checked: usize,
}

impl RestrictionReport {
    pub fn ok(&self) -> bool {
        self.abs_free.holds()
            && self.rotund.holds()
            && self.counterexamples.is_empty()
            && (self.equality_matrices.is_empty() || self.input_perfectly_rotund)
            && self.witness_holds
            && self.sigma_structure_holds
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("restriction of {} (n = {}, bound {})\n", self.name, self.n, self.bound);
        out.push_str(&format!("  dim                 {}\n", self.dim));
        out.push_str(&format!("  absolutely free     {}\n", self.abs_free.holds()));
        out.push_str(&format!("  rotund              {}\n", self.rotund.holds()));
        out.push_str(&format!("  spans checked       {}\n", self.spans_checked));
        out.push_str(&format!("  equality cases      {}\n", self.equality_matrices.len()));
        out.push_str(&format!("  counterexamples     {}\n", self.counterexamples.len()));
        for m in &self.counterexamples {
            out.push_str(&format!("    {m:?}\n"));
        }
        out.push_str(&format!("  witness identity    {}\n", self.witness_holds));
        out.push_str(&format!("  sigma structure     {}\n", self.sigma_structure_holds));
        out.push_str(&format!("  verdict             {}\n", if self.ok() { "green" } else { "red" }));
        out
    }
}

/// Equality cases must have full rank `2n`, or rank `n` with both square
/// halves of full rank; for `n = 1` the latter means `(k | +-k)`.
fn admissible(m: &[Vec<i64>], n: usize) -> bool {
    let rank = m.len();
    if rank == 2 * n {
        return true;
    }
    if rank != n {
        return false;
    }
    let mat = IntMat::from_rows(m).unwrap();
    let (left, right) = (mat.col_slice(0, n), mat.col_slice(n, 2 * n));
    let halves = left.rank() == n && right.rank() == n;
    halves && (n != 1 || m[0][0].abs() == m[0][1].abs())
}

pub fn restriction_theorem_check(v: &ParamVariety, inv: &Involution, bound: u32, namer: &mut Namer) -> Result<RestrictionReport> {
    let input = classify(v, bound);
    if let Some(w) = input.abs_free.witness() {
        return Err(Error::Precondition(format!("{} is not absolutely free: {w:?}", v.name)));
    }
    if let Some(w) = input.simple.witness() {
        return Err(Error::Precondition(format!("{} is not simple: {w:?}", v.name)));
    }
    let r = realize(v, inv, namer)?;
    let report = classify(&r.variety, bound);
    let n = v.n();
    let counterexamples = report.equality_matrices.iter().filter(|m| !admissible(m, n)).cloned().collect();
    Ok(RestrictionReport {
        name: v.name.clone(),
        n,
        bound,
        realized: r.variety.to_spec(),
        dim: report.dim,
        abs_free: report.abs_free,
        rotund: report.rotund,
        equality_matrices: report.equality_matrices,
        counterexamples,
        input_perfectly_rotund: input.perfectly_rotund.holds(),
        witness_holds: r.witness_holds(v),
        sigma_structure_holds: r.sigma_structure_holds()?,
        spans_checked: report.spans_checked,
    })
}
