//! Kernel, sigma and predimension audits, and strong-extension certificates.
//!
//! Predimensions are exact. The bounded searches first take the rank of the
//! Jacobian at a random point modulo a large prime, a lower bound for the
//! transcendence degree; when it falls short of the trivial upper bound the
//! family is recomputed symbolically.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{DeltaReport, Rule, SearchReport};
use super::kernel::{same_lattice, unit_relations};
use super::{EFieldState, SigmaType};
use crate::field::modp::{level_of, ModP};
use crate::field::{jacobian_rank, q_coordinates, RatExpr, Var};
use crate::intmat::IntMat;

/// Largest number of combination vectors enumerated in one search.
const MAX_COMBINATIONS: usize = 1 << 20;
/// Subsets are enumerated exhaustively up to this many generators.
const MAX_SUBSET_GENERATORS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelReport {
    /// `L e_0`, the coordinates of `i omega`.
    pub expected: Vec<Vec<i64>>,
    /// `None` when a relation constant could not be decided.
    pub found: Option<Vec<Vec<i64>>>,
    pub green: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaEntry {
    pub index: usize,
    pub sigma_type: SigmaType,
    pub element_ok: bool,
    pub value_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub entries: Vec<SigmaEntry>,
    pub skipped_free: Vec<usize>,
    pub green: bool,
}

pub type SpReport = SearchReport;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub kernel: KernelReport,
    pub sigma: SigmaReport,
    pub sp: SpReport,
    pub green: bool,
}

impl AuditReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let k = &self.kernel;
        out.push_str(&format!("kernel     {} expected {:?} found {:?}\n", flag(k.green), k.expected, k.found));
        let bad: Vec<usize> = self.sigma.entries.iter().filter(|e| !(e.element_ok && e.value_ok)).map(|e| e.index).collect();
        out.push_str(&format!(
            "sigma      {} {} entries checked, {} free, failing {:?}\n",
            flag(self.sigma.green),
            self.sigma.entries.len(),
            self.sigma.skipped_free.len(),
            bad
        ));
        out.push_str(&search_text("sp", &self.sp));
        out.push_str(&format!("verdict    {}\n", if self.green { "green" } else { "red" }));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongCertificate {
    /// The old domain embeds in the new one as its leading basis entries.
    pub prefix_ok: bool,
    pub rules: Vec<Rule>,
    pub rules_ok: bool,
    /// Bounded search for `delta(X / old domain) < 0` over the new generators.
    pub search: SearchReport,
    pub green: bool,
}

fn flag(b: bool) -> &'static str {
    if b {
        "ok  "
    } else {
        "FAIL"
    }
}

pub(crate) fn search_text(label: &str, s: &SearchReport) -> String {
    format!(
        "{label:<10} {} min delta {:?} over {} subsets and {} combinations (|k| <= {}), argmin {:?}\n",
        flag(s.green()),
        s.min_delta,
        s.subsets,
        s.combinations,
        s.coefficient_bound,
        s.argmin
    )
}

fn lin_rank(rows: &[Vec<i64>], width: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    IntMat::from_rows_with_cols(rows, width).expect("rows share the basis width").rank()
}

fn exact_tr_deg(state: &EFieldState, rows: &[Vec<i64>], vars: &BTreeSet<Var>) -> usize {
    let es: Vec<RatExpr> = rows.iter().flat_map(|m| [state.element_of(m), state.value_of(m)]).collect();
    jacobian_rank(&es, vars)
}

/// Exact `delta(X / Y)` for coordinate rows over the basis.
pub fn delta(state: &EFieldState, x: &[Vec<i64>], y: &[Vec<i64>]) -> DeltaReport {
    let vars = state.indeterminates();
    let width = state.len();
    let both: Vec<Vec<i64>> = y.iter().chain(x).cloned().collect();
    let tr_deg = exact_tr_deg(state, &both, &vars) - exact_tr_deg(state, y, &vars);
    let lin_dim = lin_rank(&both, width) - lin_rank(y, width);
    DeltaReport { tr_deg, lin_dim, delta: tr_deg as i64 - lin_dim as i64 }
}

/// Element gradients and logarithmic value gradients of the basis at one
/// point modulo a prime.
struct GradientTable {
    field: ModP,
    elem: Vec<Vec<u64>>,
    log: Vec<Vec<u64>>,
}

impl GradientTable {
    fn build(state: &EFieldState, vars: &[Var], attempt: usize) -> Option<GradientTable> {
        let polys = state.basis.iter().flat_map(|b| [b.element.num(), b.element.den(), b.value.num(), b.value.den()]);
        let field = ModP::for_level(level_of(polys), attempt);
        let point = field.point(vars, 0x5eed + attempt as u64);
        let eval = |e: &RatExpr| -> Option<u64> {
            let d = field.evaluate(e.den(), &point)?;
            (d != 0).then_some(())?;
            Some(field.mul(field.evaluate(e.num(), &point)?, field.inv(d)))
        };
        let mut elem = Vec::with_capacity(state.len());
        let mut log = Vec::with_capacity(state.len());
        for b in &state.basis {
            elem.push(vars.iter().map(|v| eval(&b.element.derivative(v))).collect::<Option<Vec<_>>>()?);
            let row = vars.iter().map(|v| eval(&b.value.derivative(v).div(&b.value).expect("values are nonzero")));
            log.push(row.collect::<Option<Vec<_>>>()?);
        }
        Some(GradientTable { field, elem, log })
    }

    fn combine(&self, table: &[Vec<u64>], m: &[i64]) -> Vec<u64> {
        let p = self.field.modulus();
        let width = table.first().map_or(0, Vec::len);
        let mut out = vec![0u64; width];
        for (row, &k) in table.iter().zip(m) {
            if k == 0 {
                continue;
            }
            let c = if k >= 0 { k as u64 % p } else { p - ((-k) as u64 % p) };
            for (o, x) in out.iter_mut().zip(row) {
                *o = (*o + self.field.mul(c, *x)) % p;
            }
        }
        out
    }

    fn rank(&self, rows: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<u64>> = rows.iter().flat_map(|r| [self.combine(&self.elem, r), self.combine(&self.log, r)]).collect();
        self.field.rank(&mut m)
    }
}

/// Evaluates `delta(X / Y)` for many families `X` with a fixed `Y`.
struct Searcher<'a> {
    state: &'a EFieldState,
    vars: BTreeSet<Var>,
    table: Option<GradientTable>,
    y: Vec<Vec<i64>>,
    y_tr: usize,
    y_lin: usize,
}

impl<'a> Searcher<'a> {
    fn new(state: &'a EFieldState, y: Vec<Vec<i64>>) -> Searcher<'a> {
        let vars = state.indeterminates();
        let ordered: Vec<Var> = vars.iter().cloned().collect();
        let table = (0..3).find_map(|a| GradientTable::build(state, &ordered, a));
        let y_tr = exact_tr_deg(state, &y, &vars);
        let y_lin = lin_rank(&y, state.len());
        Searcher { state, vars, table, y, y_tr, y_lin }
    }

    /// `(delta, used the symbolic fallback)`.
    fn delta(&self, x: &[Vec<i64>]) -> (i64, bool) {
        let both: Vec<Vec<i64>> = self.y.iter().chain(x).cloned().collect();
        let lin = lin_rank(&both, self.state.len()) - self.y_lin;
        let upper = (self.y_tr + 2 * x.len()).min(self.vars.len());
        let numeric = self.table.as_ref().map(|t| t.rank(&both));
        let (tr, fallback) = match numeric {
            Some(r) if r == upper => (r, false),
            _ => (exact_tr_deg(self.state, &both, &self.vars), true),
        };
        ((tr - self.y_tr) as i64 - lin as i64, fallback)
    }

    fn search(&self, indices: &[usize], bound: i64) -> SearchReport {
        let families = families(indices, self.state.len(), bound);
        let subsets = families.iter().filter(|f| f.1).count();
        let results: Vec<(i64, bool)> = families.par_iter().map(|(x, _)| self.delta(x)).collect();
        let mut min_delta: Option<i64> = None;
        let mut argmin = Vec::new();
        let mut negative = Vec::new();
        for ((x, _), (d, _)) in families.iter().zip(&results) {
            if min_delta.is_none_or(|m| *d < m) {
                min_delta = Some(*d);
                argmin = x.clone();
            }
            if *d < 0 && negative.len() < 16 {
                negative.push(x.clone());
            }
        }
        SearchReport {
            coefficient_bound: bound,
            subsets,
            combinations: families.len() - subsets,
            min_delta,
            argmin,
            negative,
            exact_fallbacks: results.iter().filter(|r| r.1).count(),
        }
    }
}

fn unit(i: usize, width: usize) -> Vec<i64> {
    let mut v = vec![0; width];
    v[i] = 1;
    v
}

/// Subsets of `indices` (flagged `true`) followed by single combinations
/// with coefficients in `[-bound, bound]`, one per sign class.
fn families(indices: &[usize], width: usize, bound: i64) -> Vec<(Vec<Vec<i64>>, bool)> {
    let k = indices.len();
    let mut out = Vec::new();
    let subset_masks: Vec<u64> = if k <= MAX_SUBSET_GENERATORS {
        (1..1u64 << k).collect()
    } else {
        let mut ms: Vec<u64> = (0..k).map(|i| 1 << i).collect();
        ms.extend((0..k).flat_map(|i| (i + 1..k).map(move |j| (1 << i) | (1 << j))));
        ms.push((1 << k) - 1);
        ms
    };
    for mask in subset_masks {
        let rows = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| unit(indices[i], width)).collect();
        out.push((rows, true));
    }
    let side = (2 * bound + 1) as usize;
    let total = side.checked_pow(k as u32).unwrap_or(usize::MAX);
    let max_support = if total <= MAX_COMBINATIONS { k } else { 3.min(k) };
    let mut coeffs = vec![-bound; k];
    if k == 0 || bound == 0 {
        return out;
    }
    'outer: loop {
        let support = coeffs.iter().filter(|c| **c != 0).count();
        let leading_positive = coeffs.iter().find(|c| **c != 0).is_some_and(|c| *c > 0);
        // subsets already cover 0/1 vectors
        let is_subset = coeffs.iter().all(|c| *c == 0 || *c == 1);
        if support > 0 && support <= max_support && leading_positive && !is_subset {
            let mut row = vec![0; width];
            for (i, c) in indices.iter().zip(&coeffs) {
                row[*i] = *c;
            }
            out.push((vec![row], false));
            if out.len() > MAX_COMBINATIONS {
                break;
            }
        }
        for c in coeffs.iter_mut().rev() {
            if *c < bound {
                *c += 1;
                continue 'outer;
            }
            *c = -bound;
        }
        break;
    }
    out
}

pub fn kernel_report(state: &EFieldState) -> KernelReport {
    let n = state.len();
    let mut e0 = vec![0i64; n];
    e0[0] = state.torsion as i64;
    let found = unit_relations(&state.values());
    let expected = IntMat::from_rows_with_cols(&[e0.clone()], n).unwrap();
    let green = found.as_ref().is_some_and(|f| same_lattice(f, &expected));
    KernelReport { expected: vec![e0], found: found.and_then(|f| f.to_vecs_i64()), green }
}

pub fn sigma_report(state: &EFieldState) -> SigmaReport {
    let inv = &state.inv;
    let mut entries = Vec::new();
    let mut skipped_free = Vec::new();
    for (index, b) in state.basis.iter().enumerate() {
        let (element_ok, value_ok) = match b.sigma_type {
            SigmaType::Free => {
                skipped_free.push(index);
                continue;
            }
            SigmaType::Real => (inv.is_fixed(&b.element).unwrap_or(false), inv.is_fixed(&b.value).unwrap_or(false)),
            SigmaType::Imaginary => {
                (inv.is_anti_fixed(&b.element).unwrap_or(false), inv.is_unit_circle(&b.value).unwrap_or(false))
            }
        };
        entries.push(SigmaEntry { index, sigma_type: b.sigma_type, element_ok, value_ok });
    }
    let green = entries.iter().all(|e| e.element_ok && e.value_ok);
    SigmaReport { entries, skipped_free, green }
}

/// Kernel, sigma and bounded Schanuel audits of one state.
pub fn audit(state: &EFieldState, bound: i64) -> AuditReport {
    let (kernel, (sigma, sp)) = rayon::join(
        || kernel_report(state),
        || {
            let all: Vec<usize> = (0..state.len()).collect();
            (sigma_report(state), Searcher::new(state, Vec::new()).search(&all, bound))
        },
    );
    let green = kernel.green && sigma.green && sp.green();
    AuditReport { kernel, sigma, sp, green }
}

/// Coordinates in `new` of the old basis elements, after replaying the
/// re-embeddings performed since `old`.
pub fn old_rows(old: &EFieldState, new: &EFieldState) -> Option<Vec<Vec<i64>>> {
    if new.receipts.len() < old.receipts.len() || new.receipts[..old.receipts.len()] != old.receipts[..] {
        return None;
    }
    let later = &new.receipts[old.receipts.len()..];
    let elements = new.elements();
    old.basis
        .iter()
        .map(|b| {
            let x = later.iter().fold(b.element.clone(), |e, r| r.apply(&e));
            let c = q_coordinates(&elements, &x)?;
            c.iter()
                .map(|r| {
                    let z: BigInt = r.is_integer().then(|| r.to_integer())?;
                    i64::try_from(z).ok()
                })
                .collect()
        })
        .collect()
}

fn rule_ok(rule: &Rule) -> bool {
    match rule {
        Rule::Identity | Rule::Refinement => true,
        Rule::Fresh { tr_deg } => *tr_deg >= 1,
        Rule::GenericPoint { classification, .. } => classification.rotund.holds(),
    }
}

/// Strong-extension certificate for `old <= new`, citing the given rules.
pub fn strong_certificate(old: &EFieldState, new: &EFieldState, rules: Vec<Rule>, bound: i64) -> StrongCertificate {
    let y = old_rows(old, new);
    let prefix_ok = y.as_ref().is_some_and(|rows| {
        let n = old.len();
        rows.iter().all(|r| r[n..].iter().all(|c| *c == 0)) && lin_rank(rows, new.len()) == n
    });
    let rules_ok = rules.iter().all(rule_ok);
    let new_indices: Vec<usize> = (old.len().min(new.len())..new.len()).collect();
    let search = Searcher::new(new, y.unwrap_or_default()).search(&new_indices, bound);
    let green = prefix_ok && rules_ok && search.green();
    StrongCertificate { prefix_ok, rules, rules_ok, search, green }
}

/// Certificate for `old <= new` from the rules recorded in `new`'s history.
pub fn is_strong_extension(old: &EFieldState, new: &EFieldState, bound: i64) -> StrongCertificate {
    let prefix = new.history.len() >= old.history.len() && new.history[..old.history.len()] == old.history[..];
    let rules = if prefix { new.history[old.history.len()..].iter().map(|c| c.rule.clone()).collect() } else { Vec::new() };
    let mut cert = strong_certificate(old, new, rules, bound);
    cert.prefix_ok &= prefix;
    cert.green &= prefix;
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efield::{BasisEntry, Origin};
    use crate::field::{parse_expr, Involution};

    fn base() -> EFieldState {
        EFieldState::new_base(&Involution::new(), &Var::new("w"), 3).unwrap()
    }

    fn add_real(state: &EFieldState, element: &str) -> EFieldState {
        let mut s = state.clone();
        let x = parse_expr(element).unwrap();
        s.register_reals(&x).unwrap();
        let u = s.new_indeterminate("u").unwrap();
        let e = BasisEntry { element: x, value: RatExpr::var(u.name()), sigma_type: SigmaType::Real, origin: Origin::Fresh { positive: true } };
        s.push_entries(vec![e]).unwrap();
        s
    }

    #[test]
    fn base_audit_is_green() {
        let r = audit(&base(), 2);
        assert!(r.green, "{}", r.to_text());
        assert_eq!(r.sp.min_delta, Some(0));
        assert_eq!(r.kernel.found, Some(vec![vec![1]]));
    }

    #[test]
    fn fresh_domain_has_positive_delta() {
        let s = add_real(&base(), "t");
        let d = delta(&s, &[vec![0, 1]], &[vec![1, 0]]);
        assert_eq!((d.tr_deg, d.lin_dim, d.delta), (2, 1, 1));
        let r = audit(&s, 2);
        assert!(r.green);
        assert_eq!(r.sp.min_delta, Some(0));
        assert_eq!(r.sp.argmin, vec![vec![1, 0]]);
    }

    #[test]
    fn injected_relation_turns_kernel_red() {
        let mut s = add_real(&base(), "t");
        let v = s.basis[1].value.clone();
        s.register_reals(&parse_expr("r").unwrap()).unwrap();
        s.push_entries(vec![BasisEntry {
            element: parse_expr("r").unwrap(),
            value: v,
            sigma_type: SigmaType::Real,
            origin: Origin::Fresh { positive: true },
        }])
        .unwrap();
        let k = kernel_report(&s);
        assert!(!k.green);
        assert_eq!(k.found.unwrap().len(), 2);
    }

    #[test]
    fn sigma_violation_is_reported() {
        let mut s = base();
        s.register_reals(&parse_expr("t").unwrap()).unwrap();
        s.push_entries(vec![BasisEntry {
            element: parse_expr("t").unwrap(),
            value: parse_expr("i*t").unwrap(),
            sigma_type: SigmaType::Real,
            origin: Origin::Fresh { positive: false },
        }])
        .unwrap();
        let r = sigma_report(&s);
        assert!(!r.green);
        assert_eq!(r.entries[1], SigmaEntry { index: 1, sigma_type: SigmaType::Real, element_ok: true, value_ok: false });
    }

    #[test]
    fn negative_delta_is_found() {
        // t and t^2 are Q-independent but algebraically dependent, with constant values
        let mut s = base();
        s.register_reals(&parse_expr("t").unwrap()).unwrap();
        for (x, v) in [("t", "2"), ("t^2", "3")] {
            s.push_entries(vec![BasisEntry {
                element: parse_expr(x).unwrap(),
                value: parse_expr(v).unwrap(),
                sigma_type: SigmaType::Real,
                origin: Origin::Fresh { positive: true },
            }])
            .unwrap();
        }
        let r = audit(&s, 1);
        assert!(r.kernel.green && r.sigma.green);
        assert!(!r.sp.green());
        assert_eq!(r.sp.min_delta, Some(-1));
        assert_eq!(delta(&s, &[vec![0, 1, 0], vec![0, 0, 1]], &[]).delta, -1);
    }

    #[test]
    fn strong_extension_of_fresh_domain() {
        let old = base();
        let new = add_real(&old, "t");
        let c = strong_certificate(&old, &new, vec![Rule::Fresh { tr_deg: 2 }], 2);
        assert!(c.green);
        assert_eq!(c.search.min_delta, Some(1));
        let trivial = strong_certificate(&new, &new, vec![Rule::Identity], 2);
        assert!(trivial.green);
        assert_eq!(trivial.search.min_delta, None);
        // a refinement of the old state is still an extension of it
        let refined = new.refine(1, 2).unwrap();
        let c = strong_certificate(&new, &refined, vec![Rule::Refinement], 2);
        assert!(c.prefix_ok && c.green);
        assert!(!strong_certificate(&new, &old, vec![], 2).prefix_ok);
    }

    #[test]
    fn family_counts() {
        let f = families(&[0, 1], 2, 2);
        // 3 subsets, then 12 sign classes of nonzero vectors minus the 3 subset vectors
        assert_eq!(f.iter().filter(|x| x.1).count(), 3);
        assert_eq!(f.len() - 3, 12 - 3);
        assert!(families(&[], 3, 2).is_empty());
    }
}
