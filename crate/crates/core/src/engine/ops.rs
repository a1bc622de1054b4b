//! The four construction operations. Each returns the new state and the
//! certificates of the step; the certificates are also appended to the
//! state's history.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::efield::audit::{kernel_report, old_rows, sigma_report, strong_certificate};
use crate::efield::{
    circle, delta, BasisEntry, Check, ClassificationSummary, EFieldState, MembershipWitness, Origin, Rule, SigmaType,
    SolutionRecord, StepCertificate,
};
use crate::error::{Error, Result};
use crate::field::{RatExpr, Var};
use crate::varieties::{classify, division_substitution, realize, roots_system, ParamVariety};

use super::Parity;

/// Bound on span representatives when establishing simplicity for SOL.
pub const SOL_CLASSIFY_BOUND: u32 = 3;

/// Settings shared by every step.
#[derive(Clone, Copy, Debug)]
pub struct StepContext {
    pub step: usize,
    /// Coefficient bound of the per-step strong-extension search.
    pub strong_bound: i64,
}

struct Draft {
    operation: String,
    inputs: BTreeMap<String, String>,
    identity: bool,
    rule: Rule,
    membership: Option<MembershipWitness>,
    checks: Vec<Check>,
}

impl Draft {
    fn new(operation: &str, inputs: &[(&str, String)]) -> Draft {
        Draft {
            operation: operation.into(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            identity: false,
            rule: Rule::Identity,
            membership: None,
            checks: Vec::new(),
        }
    }
}

fn unit_rows(indices: impl Iterator<Item = usize>, width: usize) -> Vec<Vec<i64>> {
    indices
        .map(|i| {
            let mut r = vec![0; width];
            r[i] = 1;
            r
        })
        .collect()
}

/// Runs the audits on `new` relative to `old` and appends the certificate.
fn certify(old: &EFieldState, mut new: EFieldState, draft: Draft, ctx: &StepContext) -> (EFieldState, StepCertificate) {
    let new_indices: Vec<usize> = (old.len()..new.len()).collect();
    let delta = (!new_indices.is_empty()).then(|| {
        let y = old_rows(old, &new).expect("operations only extend the state");
        delta(&new, &unit_rows(new_indices.iter().copied(), new.len()), &y)
    });
    let rule = match draft.rule {
        Rule::Fresh { .. } => Rule::Fresh { tr_deg: delta.as_ref().map_or(0, |d| d.tr_deg) },
        r => r,
    };
    let strong = strong_certificate(old, &new, vec![rule.clone()], ctx.strong_bound);
    let mut cert = StepCertificate {
        step: ctx.step,
        operation: draft.operation,
        inputs: draft.inputs,
        identity: draft.identity,
        new_indices,
        delta,
        rule,
        kernel: kernel_report(&new),
        sigma: sigma_report(&new),
        strong,
        membership: draft.membership,
        checks: draft.checks,
        green: false,
    };
    cert.recompute_green();
    new.history.push(cert.clone());
    (new, cert)
}

fn check_parity_element(state: &EFieldState, x: &RatExpr, parity: Parity) -> Result<()> {
    let ok = match parity {
        Parity::Real => state.inv.is_fixed(x)?,
        Parity::Imaginary => state.inv.is_anti_fixed(x)?,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Parity(format!("sigma({x}) is not {}", if parity == Parity::Real { "the element" } else { "its negative" })))
    }
}

/// Refines until `x` has integer coordinates; `None` if `x` is outside the Q-span.
fn refine_into_span(state: &EFieldState, x: &RatExpr) -> Result<Option<(EFieldState, bool)>> {
    match state.coordinates(x) {
        Err(Error::NotInDomain(_)) => Ok(None),
        Err(e) => Err(e),
        Ok(_) => {
            let (s, _) = state.e_of_refining(x)?;
            let refined = s.receipts.len() != state.receipts.len() || s.torsion != state.torsion;
            Ok(Some((s, refined)))
        }
    }
}

/// Adjoins `alpha` to the domain with a fresh value.
pub fn op_domain(state: &EFieldState, alpha: &RatExpr, parity: Parity, ctx: &StepContext) -> Result<(EFieldState, StepCertificate)> {
    let mut s = state.clone();
    s.register_reals(alpha)?;
    check_parity_element(&s, alpha, parity)?;
    let mut draft = Draft::new("domain", &[("alpha", alpha.to_string()), ("parity", parity.to_string())]);
    if let Some((refined, changed)) = refine_into_span(&s, alpha)? {
        draft.identity = true;
        draft.rule = if changed { Rule::Refinement } else { Rule::Identity };
        let value = refined.e_of(alpha)?;
        draft.checks.push(Check::new("already-in-domain", true, format!("E({alpha}) = {value}")));
        return Ok(certify(state, refined, draft, ctx));
    }
    let (value, origin) = match parity {
        Parity::Real => (RatExpr::var(s.new_indeterminate("u")?.name()), Origin::Fresh { positive: true }),
        Parity::Imaginary => (circle(&s.new_indeterminate("s")?), Origin::Fresh { positive: false }),
    };
    let sigma_type = parity.sigma_type();
    s.push_entries(vec![BasisEntry { element: alpha.clone(), value: value.clone(), sigma_type, origin }])?;
    draft.rule = Rule::Fresh { tr_deg: 0 };
    if parity == Parity::Imaginary {
        let on_circle = s.inv.is_unit_circle(&value)?;
        draft.checks.push(Check::new("value-on-unit-circle", on_circle, format!("E({alpha}) = {value}")));
    }
    Ok(certify(state, s, draft, ctx))
}

/// The relation `beta^k = prod values^m` with the least `k > 0`.
fn value_relation(s: &EFieldState, beta: &RatExpr) -> Result<Option<(i64, Vec<i64>)>> {
    let mut vs = vec![beta.clone()];
    vs.extend(s.values());
    let lat = crate::efield::unit_relations(&vs).ok_or_else(|| Error::Unsupported(format!("relations of {beta} with the values involve undecided constants")))?;
    // Hermite form puts the gcd of the beta column in the first row
    let (h, _) = lat.hnf();
    if h.rows() == 0 || h.get(0, 0).is_zero() {
        return Ok(None);
    }
    let row: Vec<i64> = h.row(0).iter().map(|x| x.to_i64().expect("small relation")).collect();
    Ok(Some((row[0], row[1..].iter().map(|m| -m).collect())))
}

/// Adjoins `beta` to the image with a fresh preimage.
pub fn op_image(state: &EFieldState, beta: &RatExpr, parity: Parity, ctx: &StepContext) -> Result<(EFieldState, StepCertificate)> {
    let mut s = state.clone();
    s.register_reals(beta)?;
    if beta.is_zero() {
        return Err(Error::ZeroInput("0 is not a value of E".into()));
    }
    let ok = match parity {
        Parity::Real => s.inv.is_fixed(beta)?,
        Parity::Imaginary => s.inv.is_unit_circle(beta)?,
    };
    if !ok {
        return Err(Error::Parity(format!("{beta} is not {}", if parity == Parity::Real { "sigma-fixed" } else { "on the unit circle" })));
    }
    let mut draft = Draft::new("image", &[("beta", beta.to_string()), ("parity", parity.to_string())]);
    let start = s.clone();
    // beta^k = E(x): take the k-th part of x, then correct by a root of unity
    for _ in 0..4 {
        let Some((k, m)) = value_relation(&s, beta)? else { break };
        let x = s.element_of(&m);
        if k == 1 {
            draft.identity = true;
            let changed = s.receipts.len() != start.receipts.len() || s.torsion != start.torsion;
            draft.rule = if changed { Rule::Refinement } else { Rule::Identity };
            draft.checks.push(Check::new("preimage", s.e_of(&x)? == *beta, format!("E({x}) = {beta}")));
            return Ok(certify(state, s, draft, ctx));
        }
        let part = x.scale_rational(&BigRational::new(BigInt::one(), k.into()));
        let (refined, gamma) = s.e_of_refining(&part)?;
        let rho = beta.div(&gamma).and_then(|r| r.as_scalar()).and_then(|r| r.root_of_unity_order());
        let order = rho.ok_or_else(|| Error::Unsupported(format!("{beta} differs from a root of E by a non-torsion constant")))?;
        s = refined;
        let need = order / order.gcd(&s.torsion);
        if need > 1 {
            s = s.refine(0, need)?;
        }
    }
    let (element, origin) = match parity {
        Parity::Real => (RatExpr::var(s.new_indeterminate("a")?.name()), Origin::Fresh { positive: false }),
        Parity::Imaginary => (RatExpr::i().mul(&RatExpr::var(s.new_indeterminate("a")?.name())), Origin::Fresh { positive: false }),
    };
    s.push_entries(vec![BasisEntry { element: element.clone(), value: beta.clone(), sigma_type: parity.sigma_type(), origin }])?;
    draft.rule = Rule::Fresh { tr_deg: 0 };
    draft.checks.push(Check::new("fresh-preimage", true, format!("E({element}) = {beta}")));
    Ok(certify(state, s, draft, ctx))
}

/// `(z, E z) = phi(membership)`.
fn membership_witness(v: &ParamVariety, rec: &SolutionRecord, realization_identity: Option<bool>) -> MembershipWitness {
    MembershipWitness {
        variety: v.name.clone(),
        z: rec.z.iter().map(|e| e.to_string()).collect(),
        ez: rec.ez.iter().map(|e| e.to_string()).collect(),
        params: rec.membership.iter().map(|(k, e)| (k.to_string(), e.to_string())).collect(),
        on_variety: rec.witness_holds(),
        realization_identity,
    }
}

/// Adjoins a generic solution of `v`: in sigma mode the real and imaginary
/// parts of a generic point of its restriction of scalars, otherwise a generic
/// point of `v` itself.
pub fn op_sol(state: &EFieldState, v: &ParamVariety, no_sigma: bool, ctx: &StepContext) -> Result<(EFieldState, StepCertificate)> {
    let mut s = state.clone();
    for c in v.constants() {
        s.register_reals(&RatExpr::var(c.name()))?;
    }
    let report = classify(v, SOL_CLASSIFY_BOUND);
    if let Some(w) = report.simple.witness() {
        return Err(Error::Precondition(format!("{} is not simple: {w:?}", v.name)));
    }
    let n = v.n();
    let block = s.solutions.len();
    let op = if no_sigma { "sol-free" } else { "sol" };
    let mut draft = Draft::new(op, &[("variety", v.name.clone())]);
    draft.rule = Rule::GenericPoint { variety: v.name.clone(), classification: ClassificationSummary::from(&report) };
    let origin = Origin::Solution { block };
    let (record, expected_tr, realization_identity) = if no_sigma {
        let fresh: Vec<Var> = (0..v.params.len()).map(|_| s.new_indeterminate("u")).collect::<Result<_>>()?;
        let g = v.rename_params(&fresh);
        let entries = g
            .additive
            .iter()
            .zip(&g.multiplicative)
            .map(|(z, w)| BasisEntry { element: z.clone(), value: w.clone(), sigma_type: SigmaType::Free, origin: origin.clone() })
            .collect();
        let indices = s.push_entries(entries)?;
        let membership = v.params.iter().zip(&fresh).map(|(p, f)| (p.clone(), RatExpr::var(f.name()))).collect();
        let rec = SolutionRecord { variety: v.clone(), no_sigma, indices, z: g.additive, ez: g.multiplicative, membership };
        (rec, report.dim, None)
    } else {
        let r = realize(v, &s.inv, &mut s.namer)?;
        s.inv = r.involution.clone();
        let x = &r.variety;
        let entry = |j: usize, sigma_type| BasisEntry {
            element: x.additive[j].clone(),
            value: x.multiplicative[j].clone(),
            sigma_type,
            origin: origin.clone(),
        };
        let entries = (0..n).map(|j| entry(j, SigmaType::Real)).chain((0..n).map(|j| entry(n + j, SigmaType::Imaginary))).collect();
        let indices = s.push_entries(entries)?;
        let z = (0..n).map(|j| x.additive[j].add(&x.additive[n + j])).collect();
        let ez = (0..n).map(|j| x.multiplicative[j].mul(&x.multiplicative[n + j])).collect();
        let rec = SolutionRecord { variety: v.clone(), no_sigma, indices, z, ez, membership: r.membership.clone() };
        draft.checks.push(Check::new("sigma-structure", r.sigma_structure_holds()?, "a, b fixed; c anti-fixed; d on the unit circle"));
        (rec, 2 * report.dim, Some(r.witness_holds(v)))
    };
    // E of the recorded solution, recomputed through the basis
    let coords: Vec<Vec<i64>> = record.z.iter().map(|z| s.integer_coordinates(z)).collect::<Result<_>>()?;
    let e_ok = coords.iter().zip(&record.ez).all(|(m, ez)| s.value_of(m) == *ez);
    draft.checks.push(Check::new("e-of-solution", e_ok, format!("E(z) = ({})", join(&record.ez))));
    draft.membership = Some(membership_witness(v, &record, realization_identity));
    s.solutions.push(record);
    let (s, mut cert) = certify(state, s, draft, ctx);
    let tr = cert.delta.as_ref().map_or(0, |d| d.tr_deg);
    cert.checks.push(Check::new("generic-tr-deg", tr == expected_tr, format!("tr.deg {tr}, expected {expected_tr}")));
    cert.recompute_green();
    let mut s = s;
    *s.history.last_mut().expect("certify appends") = cert.clone();
    Ok((s, cert))
}

fn join(es: &[RatExpr]) -> String {
    es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}

/// `q . (solution of W)` is a solution of `V`: the membership of `W`
/// composed with the recorded division substitution, and `E(q z) = E(z)^q`.
pub fn roots_transfer_check(state: &EFieldState, rec: &SolutionRecord, v: &ParamVariety) -> Result<Check> {
    let (q, subs) = division_substitution(&rec.variety)
        .ok_or_else(|| Error::Precondition(format!("{} was not produced by divide", rec.variety.name)))?;
    let membership: BTreeMap<Var, RatExpr> = v
        .params
        .iter()
        .map(|p| {
            let e = subs.get(p).cloned().unwrap_or_else(|| RatExpr::var(p.name()));
            (p.clone(), e.substitute(&rec.membership).expect("membership keeps denominators nonzero"))
        })
        .collect();
    let q_i = q as i64;
    let qz: Vec<RatExpr> = rec.z.iter().map(|z| z.scale_int(q_i)).collect();
    let eqz: Vec<RatExpr> = qz.iter().map(|z| state.e_of(z)).collect::<Result<_>>()?;
    let powered: Vec<RatExpr> = rec.ez.iter().map(|e| e.pow(q_i).unwrap()).collect();
    let image = |es: &[RatExpr]| es.iter().map(|e| e.substitute(&membership)).collect::<Option<Vec<_>>>();
    let on_v = image(&v.additive).as_deref() == Some(&qz[..]) && image(&v.multiplicative).as_deref() == Some(&eqz[..]);
    let ok = on_v && eqz == powered;
    Ok(Check::new("roots-transfer", ok, format!("{q} . solution of {} lies on {}", rec.variety.name, v.name)))
}

/// SOL on every root of `v` with `q <= q_max` that has no recorded solution.
pub fn op_roots(
    state: &EFieldState,
    v: &ParamVariety,
    q_max: u32,
    no_sigma: bool,
    ctx: &StepContext,
) -> Result<(EFieldState, Vec<StepCertificate>)> {
    let mut s = state.clone();
    let mut certs = Vec::new();
    for (q, w) in roots_system(v, q_max)? {
        if let Some(k) = s.solution_of(&w) {
            let mut draft = Draft::new("roots-skip", &[("variety", w.name.clone()), ("q", q.to_string())]);
            draft.identity = true;
            draft.checks.push(Check::new("recorded-solution", true, format!("solution block {k}")));
            let (next, cert) = certify(&s, s.clone(), draft, ctx);
            s = next;
            certs.push(cert);
            continue;
        }
        let (next, mut cert) = op_sol(&s, &w, no_sigma, ctx)?;
        s = next;
        cert.inputs.insert("q".into(), q.to_string());
        cert.inputs.insert("root-of".into(), v.name.clone());
        let rec = s.solutions.last().expect("sol records a solution");
        cert.checks.push(roots_transfer_check(&s, rec, v)?);
        cert.recompute_green();
        *s.history.last_mut().expect("sol appends") = cert.clone();
        certs.push(cert);
    }
    Ok((s, certs))
}
