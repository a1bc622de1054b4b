//! Serialized evidence attached to each construction step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::audit::{KernelReport, SigmaReport, StrongCertificate};
use crate::varieties::{ClassificationReport, Flag};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub tr_deg: usize,
    pub lin_dim: usize,
    pub delta: i64,
}

/// Classification flags without the span table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub name: String,
    pub n: usize,
    pub dim: usize,
    pub depth: i64,
    pub bound: u32,
    pub rotund: Flag,
    pub abs_free: Flag,
    pub simple: Flag,
    pub perfectly_rotund: Flag,
    pub spans_checked: usize,
}

impl From<&ClassificationReport> for ClassificationSummary {
    fn from(r: &ClassificationReport) -> Self {
        ClassificationSummary {
            name: r.name.clone(),
            n: r.n,
            dim: r.dim,
            depth: r.depth,
            bound: r.bound,
            rotund: r.rotund.clone(),
            abs_free: r.abs_free.clone(),
            simple: r.simple.clone(),
            perfectly_rotund: r.perfectly_rotund.clone(),
            spans_checked: r.spans_checked,
        }
    }
}

/// Why the extension is strong, independently of the bounded search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rule {
    /// No new basis elements.
    Identity,
    /// One new element or value that is a fresh indeterminate over the old field.
    Fresh { tr_deg: usize },
    /// A block generic in a variety that is rotund within the recorded bound.
    GenericPoint { variety: String, classification: ClassificationSummary },
    /// Basis refinement only: same Q-span, no new generators.
    Refinement,
}

/// The parameter witness of a recorded solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipWitness {
    pub variety: String,
    pub z: Vec<String>,
    pub ez: Vec<String>,
    pub params: BTreeMap<String, String>,
    /// `(z, E z) = phi(params)` exactly.
    pub on_variety: bool,
    /// `(a + c, b d) = 2 . phi'(u)` in sigma mode.
    pub realization_identity: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// Outcome of a bounded predimension search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub coefficient_bound: i64,
    pub subsets: usize,
    pub combinations: usize,
    pub min_delta: Option<i64>,
    /// A minimizing family, as integer coordinate rows.
    pub argmin: Vec<Vec<i64>>,
    pub negative: Vec<Vec<Vec<i64>>>,
    pub exact_fallbacks: usize,
}

impl SearchReport {
    pub fn green(&self) -> bool {
        self.negative.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCertificate {
    pub step: usize,
    pub operation: String,
    pub inputs: BTreeMap<String, String>,
    pub identity: bool,
    pub new_indices: Vec<usize>,
    /// `delta(new / old domain)`.
    pub delta: Option<DeltaReport>,
    pub rule: Rule,
    pub kernel: KernelReport,
    pub sigma: SigmaReport,
    pub strong: StrongCertificate,
    pub membership: Option<MembershipWitness>,
    pub checks: Vec<Check>,
    pub green: bool,
}

impl StepCertificate {
    pub fn recompute_green(&mut self) {
        self.green = self.kernel.green
            && self.sigma.green
            && self.strong.green
            && self.delta.as_ref().is_none_or(|d| d.delta >= 0)
            && self.membership.as_ref().is_none_or(|m| m.on_variety && m.realization_identity != Some(false))
            && self.checks.iter().all(|c| c.passed);
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("step {} {} [{}]\n", self.step, self.operation, if self.green { "green" } else { "red" });
        for (k, v) in &self.inputs {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        if self.identity {
            out.push_str("  identity step\n");
        }
        if !self.new_indices.is_empty() {
            out.push_str(&format!("  new basis indices {:?}\n", self.new_indices));
        }
        if let Some(d) = &self.delta {
            out.push_str(&format!("  delta(new/old) = {} - {} = {}\n", d.tr_deg, d.lin_dim, d.delta));
        }
        out.push_str(&format!("  kernel {}  sigma {}  strong {}\n", ok(self.kernel.green), ok(self.sigma.green), ok(self.strong.green)));
        if let Some(m) = &self.membership {
            out.push_str(&format!("  membership in {}: {}\n", m.variety, ok(m.on_variety)));
        }
        for c in &self.checks {
            out.push_str(&format!("  check {:<28} {} {}\n", c.name, ok(c.passed), c.detail));
        }
        out
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}
