//! Rotundity, freeness, simplicity and perfect rotundity.
//!
//! The quantifier over integer matrices is replaced by one saturated
//! representative per rational row span with entries bounded by `B`;
//! `dim M.V` only depends on the row span of `M`. For `n = 1` every nonzero
//! matrix has the same span, so the bounded check is exact there.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ParamVariety;
use crate::field::{mult_relations_wrt, q_linear_relations_wrt};
use crate::intmat::{enumerate_row_spans, IntMat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Matrix { rows: Vec<Vec<i64>>, rank: usize, dim: usize },
    AdditiveRelation { vector: Vec<i64> },
    MultiplicativeRelation { vector: Vec<i64> },
    Depth { depth: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Flag {
    Exact,
    HoldsUpToBound { bound: u32 },
    Fails { witness: Witness },
}

impl Flag {
    pub fn holds(&self) -> bool {
        !matches!(self, Flag::Fails { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Flag::Fails { witness } => Some(witness),
            _ => None,
        }
    }

    fn short(&self) -> String {
        match self {
            Flag::Exact => "yes (exact)".into(),
            Flag::HoldsUpToBound { bound } => format!("yes (up to bound {bound})"),
            Flag::Fails { witness } => format!("no, witness {witness:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub name: String,
    pub n: usize,
    pub dim: usize,
    pub depth: i64,
    pub bound: u32,
    pub rotund: Flag,
    pub abs_free: Flag,
    pub simple: Flag,
    pub perfectly_rotund: Flag,
    /// Span representatives with `dim M.V = rank M`.
    pub equality_matrices: Vec<Vec<Vec<i64>>>,
    pub spans_checked: usize,
}

impl ClassificationReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("variety {} (n = {}, dim = {}, depth = {})\n", self.name, self.n, self.dim, self.depth);
        for (label, f) in [
            ("rotund", &self.rotund),
            ("absolutely free", &self.abs_free),
            ("simple", &self.simple),
            ("perfectly rotund", &self.perfectly_rotund),
        ] {
            out.push_str(&format!("  {label:<17} {}\n", f.short()));
        }
        out.push_str(&format!("  spans checked     {} (bound {})\n", self.spans_checked, self.bound));
        for m in &self.equality_matrices {
            out.push_str(&format!("  equality at       {m:?}\n"));
        }
        out
    }
}

/// `(M, rank M, dim M.V)` for every bounded span representative, ordered by
/// rank and then by representative.
pub fn span_dimensions(v: &ParamVariety, cols: usize, ranks: impl Iterator<Item = usize>, bound: u32) -> Vec<(IntMat, usize, usize)> {
    let spans: Vec<(IntMat, usize)> = ranks.flat_map(|k| enumerate_row_spans(k, cols, bound).into_iter().map(move |m| (m, k))).collect();
    spans
        .into_par_iter()
        .map(|(m, k)| {
            let d = v.push(&m).expect("representatives have matching width").dim();
            (m, k, d)
        })
        .collect()
}

fn matrix_witness(m: &IntMat, rank: usize, dim: usize) -> Witness {
    Witness::Matrix { rows: m.to_vecs_i64().unwrap(), rank, dim }
}

/// Exact absolute freeness with a relation vector when it fails.
pub fn abs_free_flag(v: &ParamVariety) -> Flag {
    let params = v.param_set();
    let add = q_linear_relations_wrt(&v.additive, &params);
    if !add.is_empty() {
        return Flag::Fails { witness: Witness::AdditiveRelation { vector: add.generator(0) } };
    }
    let mult = mult_relations_wrt(&v.multiplicative, &params).expect("multiplicative coordinates are nonzero");
    if !mult.is_empty() {
        return Flag::Fails { witness: Witness::MultiplicativeRelation { vector: mult.generator(0) } };
    }
    Flag::Exact
}

pub fn classify(v: &ParamVariety, bound: u32) -> ClassificationReport {
    assert!(bound >= 1, "bound must be positive");
    let n = v.n();
    let dim = v.dim();
    let depth = dim as i64 - n as i64;
    let table = span_dimensions(v, n, 1..=n, bound);
    let holds = if n <= 1 { Flag::Exact } else { Flag::HoldsUpToBound { bound } };

    let rotund = match table.iter().find(|(_, k, d)| d < k) {
        Some((m, k, d)) => Flag::Fails { witness: matrix_witness(m, *k, *d) },
        None => holds.clone(),
    };
    let abs_free = abs_free_flag(v);
    let simple = if let Some(w) = abs_free.witness() {
        Flag::Fails { witness: w.clone() }
    } else if let Some(w) = rotund.witness() {
        Flag::Fails { witness: w.clone() }
    } else {
        match table.iter().find(|(_, k, d)| *k < n && d == k) {
            Some((m, k, d)) => Flag::Fails { witness: matrix_witness(m, *k, *d) },
            None => holds,
        }
    };
    let perfectly_rotund = match (simple.witness(), depth) {
        (Some(w), _) => Flag::Fails { witness: w.clone() },
        (None, 0) => simple.clone(),
        (None, depth) => Flag::Fails { witness: Witness::Depth { depth } },
    };
    let equality_matrices = table.iter().filter(|(_, k, d)| d == k).map(|(m, _, _)| m.to_vecs_i64().unwrap()).collect();
    ClassificationReport {
        name: v.name.clone(),
        n,
        dim,
        depth,
        bound,
        rotund,
        abs_free,
        simple,
        perfectly_rotund,
        equality_matrices,
        spans_checked: table.len(),
    }
}
