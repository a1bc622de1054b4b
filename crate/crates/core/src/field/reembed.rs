//! Re-embedding of the base field along a fresh indeterminate so that a chosen
//! value acquires a rational q-th root.
//!
//! `Power`: `u -> v^q` (and the partner likewise when `u` is sigma-paired).
//! `Circle`: for a real `s`, `s -> B(r)/A(r)` where `(1 + i r)^q = A + i B`,
//! so that `(1 + i s)/(1 - i s) = ((1 + i r)/(1 - i r))^q`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::involution::Involution;
use super::namer::Namer;
use super::poly::Var;
use super::ratexpr::RatExpr;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReembedKind {
    Power,
    Circle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub old: String,
    pub new: String,
    pub q: u32,
    pub kind: ReembedKind,
    /// `(old partner, new partner)` for a sigma-paired power re-embedding.
    pub partner: Option<(String, String)>,
}

impl Receipt {
    pub fn substitution(&self) -> BTreeMap<Var, RatExpr> {
        let mut subs = BTreeMap::new();
        let q = self.q as i64;
        match self.kind {
            ReembedKind::Power => {
                subs.insert(Var::new(&self.old), RatExpr::var(&self.new).pow(q).unwrap());
                if let Some((a, b)) = &self.partner {
                    subs.insert(Var::new(a), RatExpr::var(b).pow(q).unwrap());
                }
            }
            ReembedKind::Circle => {
                let (a, b) = tangent_multiple(&Var::new(&self.new), self.q);
                subs.insert(Var::new(&self.old), b.div(&a).unwrap());
            }
        }
        subs
    }

    pub fn apply(&self, e: &RatExpr) -> RatExpr {
        e.substitute(&self.substitution()).expect("re-embedding is injective")
    }

    /// The involution after the re-embedding.
    pub fn apply_involution(&self, inv: &Involution) -> Result<Involution> {
        let mut out = inv.clone();
        out.remove(&Var::new(&self.old));
        match &self.partner {
            Some((_, b)) => out.add_pair(Var::new(&self.new), Var::new(b))?,
            None => out.add_real(Var::new(&self.new))?,
        }
        Ok(out)
    }
}

/// `(A, B)` with `(1 + i r)^q = A + i B`, both real polynomials in `r`.
fn tangent_multiple(r: &Var, q: u32) -> (RatExpr, RatExpr) {
    let mut inv = Involution::new();
    inv.add_real(r.clone()).unwrap();
    let base = RatExpr::one().add(&RatExpr::i().mul(&RatExpr::var(r.name())));
    let p = base.pow(q as i64).unwrap();
    (inv.real_part(&p).unwrap(), inv.imag_part(&p).unwrap())
}

/// Allocates the new indeterminate(s) and returns the receipt together with
/// the updated involution.
pub fn reembed(inv: &Involution, name: &Var, q: u32, kind: ReembedKind, namer: &mut Namer) -> Result<(Receipt, Involution)> {
    if q == 0 {
        return Err(Error::Invalid("re-embedding exponent must be positive".into()));
    }
    let partner = inv.partner(name).ok_or_else(|| Error::Unregistered(name.to_string()))?.clone();
    let paired = partner != *name;
    if kind == ReembedKind::Circle && paired {
        return Err(Error::Parity(format!("circle re-embedding needs a real indeterminate, `{name}` is paired")));
    }
    let new = namer.fresh(prefix_of(name));
    let partner = paired.then(|| (partner.to_string(), namer.fresh(prefix_of(&partner)).to_string()));
    let receipt = Receipt { old: name.to_string(), new: new.to_string(), q, kind, partner };
    let out = receipt.apply_involution(inv)?;
    Ok((receipt, out))
}

fn prefix_of(v: &Var) -> &str {
    let n = v.name();
    &n[..n.find(|c: char| !c.is_ascii_lowercase()).unwrap_or(n.len())]
}
