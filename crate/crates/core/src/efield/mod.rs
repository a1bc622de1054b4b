//! Finitely generated partial exponential fields with an involution.
//!
//! The domain of `E` is the Z-span of an explicit Q-independent basis; each
//! basis entry stores its element, its value and its sigma type. Entry 0 is
//! `i omega / L` with value `zeta_L`, so `ker E = Z i omega` exactly when
//! the relation lattice of the values is generated by `L e_0`.

pub mod audit;
mod certificate;
mod kernel;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    parse_expr, q_coordinates, reembed, Involution, InvolutionRepr, Namer, RatExpr, Receipt, ReembedKind, Scalar, Var,
};
use crate::intmat::IntMat;
use crate::varieties::{make_variety, ParamVariety, Provenance, VarietySpec};

pub use audit::{audit, delta, is_strong_extension, AuditReport, KernelReport, SigmaEntry, SigmaReport, SpReport, StrongCertificate};
pub use certificate::{Check, ClassificationSummary, DeltaReport, MembershipWitness, Rule, SearchReport, StepCertificate};
pub use kernel::unit_relations;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaType {
    /// `sigma(x) = x`, `sigma(E x) = E x`.
    Real,
    /// `sigma(x) = -x`, `E x . sigma(E x) = 1`.
    Imaginary,
    /// Adjoined without reference to sigma.
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    Torsion,
    /// A fresh indeterminate value (or element); `positive` is metadata only.
    Fresh { positive: bool },
    Solution { block: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisEntry {
    pub element: RatExpr,
    pub value: RatExpr,
    pub sigma_type: SigmaType,
    pub origin: Origin,
}

/// A recorded solution `(z, E z)` of a variety, with `(z, E z) = phi(membership)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRecord {
    pub variety: ParamVariety,
    pub no_sigma: bool,
    pub indices: Vec<usize>,
    pub z: Vec<RatExpr>,
    pub ez: Vec<RatExpr>,
    pub membership: BTreeMap<Var, RatExpr>,
}

impl SolutionRecord {
    pub fn witness_holds(&self) -> bool {
        let on = |maps: &[RatExpr], pts: &[RatExpr]| {
            maps.iter().zip(pts).all(|(m, p)| m.substitute(&self.membership).as_ref() == Some(p))
        };
        on(&self.variety.additive, &self.z) && on(&self.variety.multiplicative, &self.ez)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EFieldState {
    pub inv: Involution,
    pub omega: Var,
    /// `L` with basis entry 0 equal to `i omega / L`.
    pub torsion: u32,
    pub basis: Vec<BasisEntry>,
    pub receipts: Vec<Receipt>,
    pub namer: Namer,
    pub solutions: Vec<SolutionRecord>,
    pub history: Vec<StepCertificate>,
}

fn i_omega(omega: &Var) -> RatExpr {
    RatExpr::i().mul(&RatExpr::var(omega.name()))
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

impl EFieldState {
    /// The base structure: domain `Z i omega`, `E(i omega) = 1`.
    pub fn new_base(inv: &Involution, omega: &Var, seed: u64) -> Result<EFieldState> {
        let mut inv = inv.clone();
        match inv.partner(omega) {
            None => inv.add_real(omega.clone())?,
            Some(p) if p != omega => return Err(Error::Parity(format!("omega `{omega}` is paired with `{p}`"))),
            Some(_) => {}
        }
        let mut namer = Namer::new(seed);
        for v in inv.names() {
            namer.reserve(v.name());
        }
        let entry = BasisEntry { element: i_omega(omega), value: RatExpr::one(), sigma_type: SigmaType::Imaginary, origin: Origin::Torsion };
        Ok(EFieldState {
            inv,
            omega: omega.clone(),
            torsion: 1,
            basis: vec![entry],
            receipts: Vec::new(),
            namer,
            solutions: Vec::new(),
            history: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn elements(&self) -> Vec<RatExpr> {
        self.basis.iter().map(|b| b.element.clone()).collect()
    }

    pub fn values(&self) -> Vec<RatExpr> {
        self.basis.iter().map(|b| b.value.clone()).collect()
    }

    /// Registers every unknown indeterminate of `e` as a real one.
    pub fn register_reals(&mut self, e: &RatExpr) -> Result<()> {
        for v in e.vars() {
            if !self.inv.is_registered(&v) {
                self.inv.add_real(v.clone())?;
                self.namer.reserve(v.name());
            }
        }
        Ok(())
    }

    /// Q-coordinates of `x` over the basis.
    pub fn coordinates(&self, x: &RatExpr) -> Result<Vec<BigRational>> {
        q_coordinates(&self.elements(), x).ok_or_else(|| Error::NotInDomain(x.to_string()))
    }

    /// Integer coordinates of `x`; a non-integral coordinate asks for a
    /// refinement of the first offending basis entry.
    pub fn integer_coordinates(&self, x: &RatExpr) -> Result<Vec<i64>> {
        let c = self.coordinates(x)?;
        if let Some(index) = c.iter().position(|r| !r.is_integer()) {
            let q = c[index].denom().to_u32().ok_or_else(|| Error::Invalid("refinement degree too large".into()))?;
            return Err(Error::NeedsRefinement { index, q });
        }
        c.iter().map(|r| r.to_integer().to_i64().ok_or_else(|| Error::Invalid("coordinate too large".into()))).collect()
    }

    pub fn element_of(&self, m: &[i64]) -> RatExpr {
        self.basis.iter().zip(m).filter(|(_, k)| **k != 0).fold(RatExpr::zero(), |acc, (b, k)| acc.add(&b.element.scale_int(*k)))
    }

    pub fn value_of(&self, m: &[i64]) -> RatExpr {
        self.basis.iter().zip(m).filter(|(_, k)| **k != 0).fold(RatExpr::one(), |acc, (b, k)| acc.mul(&b.value.pow(*k).unwrap()))
    }

    /// `E(x)` for `x` in the Z-span of the basis.
    pub fn e_of(&self, x: &RatExpr) -> Result<RatExpr> {
        Ok(self.value_of(&self.integer_coordinates(x)?))
    }

    /// `E(x)` for `x` in the Q-span, refining the basis as needed.
    pub fn e_of_refining(&self, x: &RatExpr) -> Result<(EFieldState, RatExpr)> {
        let mut state = self.clone();
        loop {
            match state.e_of(x) {
                Err(Error::NeedsRefinement { index, q }) => state = state.refine(index, q)?,
                other => return other.map(|v| (state, v)),
            }
        }
    }

    /// Replaces basis entry `index` by its `q`-th part.
    pub fn refine(&self, index: usize, q: u32) -> Result<EFieldState> {
        if q == 0 {
            return Err(Error::Invalid("refinement by 0".into()));
        }
        let entry = self.basis.get(index).ok_or_else(|| Error::Invalid(format!("no basis entry {index}")))?;
        let mut out = self.clone();
        if q == 1 {
            return Ok(out);
        }
        let third = ratio(1, q as i64);
        match entry.origin {
            Origin::Torsion => {
                out.torsion *= q;
                out.basis[index].element = i_omega(&self.omega).scale_rational(&ratio(1, out.torsion as i64));
                out.basis[index].value = RatExpr::scalar(Scalar::zeta(out.torsion));
                return Ok(out);
            }
            Origin::Solution { .. } => {
                return Err(Error::RefinementRefused { index, reason: "values produced by solutions have no chosen roots".into() })
            }
            Origin::Fresh { .. } => {}
        }
        let (name, kind) = self.root_chart(index)?;
        let (receipt, inv) = reembed(&self.inv, &name, q, kind, &mut out.namer)?;
        out.apply_receipt(&receipt, inv);
        let new_value = match kind {
            ReembedKind::Power => RatExpr::var(&receipt.new),
            ReembedKind::Circle => circle(&Var::new(&receipt.new)),
        };
        debug_assert_eq!(new_value.pow(q as i64).unwrap(), out.basis[index].value);
        out.basis[index].value = new_value;
        out.basis[index].element = out.basis[index].element.scale_rational(&third);
        Ok(out)
    }

    /// How the value of entry `index` acquires roots: a real indeterminate
    /// (power chart) or `(1 + i s)/(1 - i s)` with `s` real (circle chart).
    fn root_chart(&self, index: usize) -> Result<(Var, ReembedKind)> {
        let value = &self.basis[index].value;
        let real_var = |e: &RatExpr| {
            let vs = e.vars();
            let v = vs.iter().next()?.clone();
            (vs.len() == 1 && *e == RatExpr::var(v.name()) && self.inv.partner(&v) == Some(&v)).then_some(v)
        };
        if let Some(v) = real_var(value) {
            return Ok((v, ReembedKind::Power));
        }
        // s = (w - 1) / (i (w + 1))
        let s = value.sub(&RatExpr::one()).div(&RatExpr::i().mul(&value.add(&RatExpr::one())));
        if let Some(v) = s.as_ref().and_then(real_var) {
            return Ok((v, ReembedKind::Circle));
        }
        Err(Error::RefinementRefused { index, reason: format!("value {value} is neither a real indeterminate nor a circle chart") })
    }

    fn apply_receipt(&mut self, receipt: &Receipt, inv: Involution) {
        for b in &mut self.basis {
            b.element = receipt.apply(&b.element);
            b.value = receipt.apply(&b.value);
        }
        for s in &mut self.solutions {
            s.z = s.z.iter().map(|e| receipt.apply(e)).collect();
            s.ez = s.ez.iter().map(|e| receipt.apply(e)).collect();
            for e in s.membership.values_mut() {
                *e = receipt.apply(e);
            }
        }
        self.inv = inv;
        self.receipts.push(receipt.clone());
    }

    /// Integer coordinate rows of a list of span elements.
    pub fn coordinate_rows(&self, xs: &[RatExpr]) -> Result<Vec<Vec<i64>>> {
        xs.iter().map(|x| self.integer_coordinates(x)).collect()
    }

    /// `delta(X / Y) = tr.deg(X E(X) / Y E(Y)) - ldim_Q(X / Y)`.
    pub fn predim(&self, xs: &[RatExpr], over: &[RatExpr]) -> Result<i64> {
        let x = self.coordinate_rows(xs)?;
        let y = self.coordinate_rows(over)?;
        Ok(delta(self, &x, &y).delta)
    }

    pub fn new_indeterminate(&mut self, prefix: &str) -> Result<Var> {
        let v = self.namer.fresh(prefix);
        self.inv.add_real(v.clone())?;
        Ok(v)
    }

    /// Appends entries after checking Q-independence from the current basis.
    pub fn push_entries(&mut self, entries: Vec<BasisEntry>) -> Result<Vec<usize>> {
        let mut all = self.elements();
        all.extend(entries.iter().map(|e| e.element.clone()));
        if crate::field::q_rank(&all) != all.len() {
            return Err(Error::Precondition("new elements are Q-dependent on the domain".into()));
        }
        let start = self.basis.len();
        self.basis.extend(entries);
        Ok((start..self.basis.len()).collect())
    }

    pub fn to_repr(&self) -> StateRepr {
        StateRepr {
            involution: self.inv.to_repr(),
            omega: self.omega.to_string(),
            torsion: self.torsion,
            basis: self
                .basis
                .iter()
                .map(|b| BasisRepr {
                    element: b.element.to_string(),
                    value: b.value.to_string(),
                    sigma_type: b.sigma_type,
                    origin: b.origin.clone(),
                })
                .collect(),
            receipts: self.receipts.clone(),
            namer: self.namer.clone(),
            solutions: self
                .solutions
                .iter()
                .map(|s| SolutionRepr {
                    variety: s.variety.to_spec(),
                    provenance: s.variety.provenance.clone(),
                    no_sigma: s.no_sigma,
                    indices: s.indices.clone(),
                    z: s.z.iter().map(|e| e.to_string()).collect(),
                    ez: s.ez.iter().map(|e| e.to_string()).collect(),
                    membership: s.membership.iter().map(|(k, e)| (k.to_string(), e.to_string())).collect(),
                })
                .collect(),
            history: self.history.clone(),
        }
    }

    pub fn from_repr(r: &StateRepr) -> Result<EFieldState> {
        let parse_all = |xs: &[String]| xs.iter().map(|s| parse_expr(s)).collect::<Result<Vec<_>>>();
        let basis = r
            .basis
            .iter()
            .map(|b| {
                Ok(BasisEntry {
                    element: parse_expr(&b.element)?,
                    value: parse_expr(&b.value)?,
                    sigma_type: b.sigma_type,
                    origin: b.origin.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let solutions = r
            .solutions
            .iter()
            .map(|s| {
                let mut variety = make_variety(&s.variety)?;
                variety.provenance = s.provenance.clone();
                Ok(SolutionRecord {
                    variety,
                    no_sigma: s.no_sigma,
                    indices: s.indices.clone(),
                    z: parse_all(&s.z)?,
                    ez: parse_all(&s.ez)?,
                    membership: s.membership.iter().map(|(k, e)| Ok((Var::new(k), parse_expr(e)?))).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let state = EFieldState {
            inv: Involution::from_repr(&r.involution)?,
            omega: Var::new(&r.omega),
            torsion: r.torsion,
            basis,
            receipts: r.receipts.clone(),
            namer: r.namer.clone(),
            solutions,
            history: r.history.clone(),
        };
        state.validate()?;
        Ok(state)
    }

    /// Structural invariants: entry 0 is the torsion entry and the basis is
    /// Q-independent.
    pub fn validate(&self) -> Result<()> {
        let first = self.basis.first().ok_or_else(|| Error::Invalid("empty basis".into()))?;
        let want = i_omega(&self.omega).scale_rational(&ratio(1, self.torsion as i64));
        if first.origin != Origin::Torsion || first.element != want || first.value != RatExpr::scalar(Scalar::zeta(self.torsion)) {
            return Err(Error::Invalid("basis entry 0 must be i*omega/L with value zeta_L".into()));
        }
        if crate::field::q_rank(&self.elements()) != self.basis.len() {
            return Err(Error::Invalid("basis elements are Q-dependent".into()));
        }
        if self.basis.iter().any(|b| b.value.is_zero()) {
            return Err(Error::Invalid("zero value".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_repr()).expect("state serializes")
    }

    pub fn from_json(text: &str) -> Result<EFieldState> {
        let r: StateRepr = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        EFieldState::from_repr(&r)
    }

    pub fn load(path: &Path) -> Result<EFieldState> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        EFieldState::from_json(&text)
    }

    /// Index of a recorded solution of a variety with the same maps as `v`.
    pub fn solution_of(&self, v: &ParamVariety) -> Option<usize> {
        self.solutions.iter().position(|s| s.variety.same_maps_up_to_renaming(v))
    }

    /// Every indeterminate in the basis.
    pub fn indeterminates(&self) -> BTreeSet<Var> {
        self.basis.iter().flat_map(|b| b.element.vars().into_iter().chain(b.value.vars())).collect()
    }

    /// Integer matrix of the basis-coordinate rows, for rank computations.
    pub fn rows_matrix(rows: &[Vec<i64>], width: usize) -> IntMat {
        IntMat::from_rows_with_cols(rows, width).expect("coordinate rows share the basis width")
    }
}

/// `(1 + i s) / (1 - i s)`.
pub fn circle(s: &Var) -> RatExpr {
    let is = RatExpr::i().mul(&RatExpr::var(s.name()));
    RatExpr::one().add(&is).div(&RatExpr::one().sub(&is)).unwrap()
}

/// `sum_j k_j` over positive and negative entries, used to report the
/// magnitude of a combination.
pub fn weight(m: &[i64]) -> i64 {
    m.iter().map(|k| k.abs()).sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisRepr {
    pub element: String,
    pub value: String,
    pub sigma_type: SigmaType,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRepr {
    pub variety: VarietySpec,
    pub provenance: Vec<Provenance>,
    pub no_sigma: bool,
    pub indices: Vec<usize>,
    pub z: Vec<String>,
    pub ez: Vec<String>,
    pub membership: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRepr {
    pub involution: InvolutionRepr,
    pub omega: String,
    pub torsion: u32,
    pub basis: Vec<BasisRepr>,
    pub receipts: Vec<Receipt>,
    pub namer: Namer,
    pub solutions: Vec<SolutionRepr>,
    pub history: Vec<StepCertificate>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> EFieldState {
        EFieldState::new_base(&Involution::new(), &Var::new("w"), 0).unwrap()
    }

    fn with_fresh(state: &EFieldState, element: &str) -> EFieldState {
        let mut s = state.clone();
        let x = parse_expr(element).unwrap();
        s.register_reals(&x).unwrap();
        let u = s.new_indeterminate("u").unwrap();
        s.push_entries(vec![BasisEntry {
            element: x,
            value: RatExpr::var(u.name()),
            sigma_type: SigmaType::Real,
            origin: Origin::Fresh { positive: true },
        }])
        .unwrap();
        s
    }

    #[test]
    fn base_values() {
        let s = base();
        assert!(s.e_of(&parse_expr("i*w").unwrap()).unwrap().is_one());
        assert!(s.e_of(&RatExpr::zero()).unwrap().is_one());
        assert!(matches!(s.e_of(&parse_expr("i*w/2").unwrap()), Err(Error::NeedsRefinement { index: 0, q: 2 })));
        let (r, v) = s.e_of_refining(&parse_expr("i*w/2").unwrap()).unwrap();
        assert_eq!(v, RatExpr::int(-1));
        assert_eq!(r.torsion, 2);
        let (_, v) = r.e_of_refining(&parse_expr("i*w/3").unwrap()).unwrap();
        assert_eq!(v, RatExpr::scalar(Scalar::zeta(3)));
        assert!(matches!(s.e_of(&parse_expr("w").unwrap()), Err(Error::NotInDomain(_))));
        assert!(EFieldState::new_base(&Involution::new(), &Var::new("w"), 0).unwrap().validate().is_ok());
        let mut paired = Involution::new();
        paired.add_pair(Var::new("w"), Var::new("x")).unwrap();
        assert!(matches!(EFieldState::new_base(&paired, &Var::new("w"), 0), Err(Error::Parity(_))));
    }

    #[test]
    fn homomorphism_and_refinement() {
        let s = with_fresh(&with_fresh(&base(), "t"), "s");
        let u1 = s.basis[1].value.clone();
        let u2 = s.basis[2].value.clone();
        assert_eq!(s.e_of(&parse_expr("t + s").unwrap()).unwrap(), u1.mul(&u2));
        assert_eq!(s.e_of(&parse_expr("2*t - s + i*w").unwrap()).unwrap(), u1.pow(2).unwrap().div(&u2).unwrap());
        let (r, half) = s.e_of_refining(&parse_expr("t/2").unwrap()).unwrap();
        assert_eq!(half.pow(2).unwrap(), r.basis[1].value.pow(2).unwrap());
        assert_eq!(r.receipts.len(), 1);
        // E(t) is still the square of the new value
        assert_eq!(r.e_of(&parse_expr("t").unwrap()).unwrap(), half.pow(2).unwrap());
        r.validate().unwrap();
    }

    #[test]
    fn circle_refinement() {
        let mut s = base();
        let a = parse_expr("i*t").unwrap();
        s.register_reals(&a).unwrap();
        let r = s.new_indeterminate("s").unwrap();
        s.push_entries(vec![BasisEntry { element: a, value: circle(&r), sigma_type: SigmaType::Imaginary, origin: Origin::Fresh { positive: false } }])
            .unwrap();
        let (s3, v) = s.e_of_refining(&parse_expr("i*t/3").unwrap()).unwrap();
        assert!(s3.inv.is_unit_circle(&v).unwrap());
        assert_eq!(v.pow(3).unwrap(), s3.e_of(&parse_expr("i*t").unwrap()).unwrap());
    }

    #[test]
    fn predimension_examples() {
        let s = base();
        assert_eq!(s.predim(&[], &[]).unwrap(), 0);
        assert_eq!(s.predim(&[parse_expr("i*w").unwrap()], &[]).unwrap(), 0);
        let s = with_fresh(&s, "t");
        assert_eq!(s.predim(&[parse_expr("t").unwrap()], &[]).unwrap(), 1);
        assert_eq!(s.predim(&[parse_expr("t").unwrap()], &[parse_expr("t").unwrap()]).unwrap(), 0);
    }

    #[test]
    fn dependent_entries_rejected() {
        let mut s = with_fresh(&base(), "t");
        let e = BasisEntry { element: parse_expr("2*t").unwrap(), value: RatExpr::int(2), sigma_type: SigmaType::Real, origin: Origin::Fresh { positive: true } };
        assert!(s.push_entries(vec![e]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = with_fresh(&with_fresh(&base(), "t"), "s");
        let (s, _) = s.e_of_refining(&parse_expr("t/2 + i*w/4").unwrap()).unwrap();
        let back = EFieldState::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
