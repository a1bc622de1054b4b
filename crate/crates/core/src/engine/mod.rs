//! Scripted finite-stage construction: a base structure extended step by step
//! by DOMAIN, IMAGE, SOL and ROOTS, each step certified.

pub mod ops;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::efield::audit::search_text;
use crate::efield::{audit, is_strong_extension, AuditReport, EFieldState, SigmaType, StepCertificate, StrongCertificate};
use crate::error::{Error, Result};
use crate::field::{parse_expr, Involution, Var};
use crate::varieties::{catalog, classify, make_variety, realize, restriction_theorem_check, ClassificationReport, ParamVariety, RestrictionReport, VarietySpec};

pub use ops::{op_domain, op_image, op_roots, op_sol, roots_transfer_check, StepContext, SOL_CLASSIFY_BOUND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Real,
    Imaginary,
}

impl Parity {
    pub fn sigma_type(self) -> SigmaType {
        match self {
            Parity::Real => SigmaType::Real,
            Parity::Imaginary => SigmaType::Imaginary,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Real => "real",
            Parity::Imaginary => "imaginary",
        })
    }
}

/// A declared variety: inline, or an entry of the built-in catalog.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VarietyDecl {
    Catalog { catalog: String },
    Inline(VarietySpec),
}

fn default_classify_bound() -> u32 {
    3
}

fn default_audit_bound() -> i64 {
    2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Step {
    Domain {
        alpha: String,
        parity: Parity,
    },
    Image {
        beta: String,
        parity: Parity,
    },
    Sol {
        variety: String,
        #[serde(default)]
        no_sigma: bool,
    },
    Roots {
        variety: String,
        q_max: u32,
        #[serde(default)]
        no_sigma: bool,
    },
    Audit {
        #[serde(default = "default_audit_bound")]
        bound: i64,
    },
    Classify {
        variety: String,
        #[serde(default = "default_classify_bound")]
        bound: u32,
    },
    Realize {
        variety: String,
    },
    RestrictionCheck {
        variety: String,
        #[serde(default = "default_classify_bound")]
        bound: u32,
    },
}

impl Step {
    fn variety(&self) -> Option<&str> {
        match self {
            Step::Sol { variety, .. }
            | Step::Roots { variety, .. }
            | Step::Classify { variety, .. }
            | Step::Realize { variety }
            | Step::RestrictionCheck { variety, .. } => Some(variety),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Step::Domain { .. } => "domain",
            Step::Image { .. } => "image",
            Step::Sol { .. } => "sol",
            Step::Roots { .. } => "roots",
            Step::Audit { .. } => "audit",
            Step::Classify { .. } => "classify",
            Step::Realize { .. } => "realize",
            Step::RestrictionCheck { .. } => "restriction-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_omega")]
    pub omega: String,
    /// Sigma-fixed indeterminates of the base field.
    #[serde(default)]
    pub reals: Vec<String>,
    /// Pairs of indeterminates swapped by sigma.
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    /// Coefficient bound of the per-step and final predimension searches.
    #[serde(default = "default_audit_bound")]
    pub audit_bound: i64,
    #[serde(default, rename = "variety")]
    pub varieties: Vec<VarietyDecl>,
    #[serde(default, rename = "step")]
    pub steps: Vec<Step>,
}

fn default_omega() -> String {
    "omega".into()
}

impl Script {
    pub fn parse(text: &str) -> Result<Script> {
        let script: Script = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        script.validate()?;
        Ok(script)
    }

    pub fn from_file(path: &Path) -> Result<Script> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Script::parse(&text)
    }

    /// Declared varieties by name.
    pub fn varieties(&self) -> Result<BTreeMap<String, ParamVariety>> {
        let mut out = BTreeMap::new();
        for d in &self.varieties {
            let v = match d {
                VarietyDecl::Catalog { catalog: name } => catalog()
                    .into_iter()
                    .find(|v| &v.name == name)
                    .ok_or_else(|| Error::Config(format!("no catalog variety `{name}`")))?,
                VarietyDecl::Inline(spec) => make_variety(spec)?,
            };
            if out.insert(v.name.clone(), v).is_some() {
                return Err(Error::Config(format!("variety `{}` declared twice", d_name(d))));
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let vs = self.varieties()?;
        for (k, s) in self.steps.iter().enumerate() {
            if let Some(name) = s.variety() {
                if !vs.contains_key(name) {
                    return Err(Error::Config(format!("step {k} references undeclared variety `{name}`")));
                }
            }
            match s {
                Step::Domain { alpha, .. } => drop(parse_expr(alpha)?),
                Step::Image { beta, .. } => drop(parse_expr(beta)?),
                Step::Roots { q_max: 0, .. } => return Err(Error::Config(format!("step {k}: q_max must be positive"))),
                _ => {}
            }
        }
        if self.audit_bound < 0 {
            return Err(Error::Config("audit_bound must be nonnegative".into()));
        }
        Ok(())
    }

    /// The base involution and every name the script mentions.
    fn base(&self) -> Result<(Involution, Vec<String>)> {
        let mut inv = Involution::new();
        for r in &self.reals {
            inv.add_real(Var::new(r))?;
        }
        for [a, b] in &self.pairs {
            inv.add_pair(Var::new(a), Var::new(b))?;
        }
        let mut names: Vec<String> = Vec::new();
        for s in &self.steps {
            match s {
                Step::Domain { alpha: e, .. } | Step::Image { beta: e, .. } => {
                    names.extend(parse_expr(e)?.vars().into_iter().map(|v| v.to_string()))
                }
                _ => {}
            }
        }
        for v in self.varieties()?.values() {
            names.extend(v.coordinates().iter().flat_map(|e| e.vars()).map(|v| v.to_string()));
            names.extend(v.params.iter().map(|p| p.to_string()));
        }
        Ok((inv, names))
    }
}

fn d_name(d: &VarietyDecl) -> &str {
    match d {
        VarietyDecl::Catalog { catalog } => catalog,
        VarietyDecl::Inline(s) => &s.name,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizeSummary {
    pub variety: String,
    pub realized: VarietySpec,
    pub dim: usize,
    pub witness_holds: bool,
    pub sigma_structure_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Certificates { certificates: Vec<StepCertificate> },
    Audit { report: AuditReport },
    Classify { report: ClassificationReport },
    Realize { report: RealizeSummary },
    RestrictionCheck { report: RestrictionReport },
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub op: String,
    pub green: bool,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub step: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub base_audit: AuditReport,
    pub steps: Vec<StepRecord>,
    pub final_audit: AuditReport,
    /// `base <= final` from the recorded rules and a bounded search.
    pub chain: StrongCertificate,
    pub failure: Option<Failure>,
    pub green: bool,
    /// Wall-clock seconds per step; not serialized, so replays compare equal.
    #[serde(skip)]
    pub timing: Vec<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("run (seed {})\n", self.seed);
        out.push_str("base audit\n");
        out.push_str(&indent(&self.base_audit.to_text()));
        for s in &self.steps {
            if let Outcome::Certificates { certificates } = &s.outcome {
                certificates.iter().for_each(|c| out.push_str(&c.to_text()));
                continue;
            }
            out.push_str(&format!("step {} {} [{}]\n", s.index, s.op, if s.green { "green" } else { "red" }));
            let body = match &s.outcome {
                Outcome::Certificates { .. } => String::new(),
                Outcome::Audit { report } => report.to_text(),
                Outcome::Classify { report } => report.to_text(),
                Outcome::Realize { report } => format!(
                    "{} realized with dim {}, witness {}, sigma structure {}\n",
                    report.variety, report.dim, report.witness_holds, report.sigma_structure_holds
                ),
                Outcome::RestrictionCheck { report } => report.to_text(),
            };
            out.push_str(&indent(&body));
        }
        out.push_str("final audit\n");
        out.push_str(&indent(&self.final_audit.to_text()));
        out.push_str(&format!("chain base <= final: {}\n", if self.chain.green { "green" } else { "red" }));
        out.push_str(&indent(&search_text("search", &self.chain.search)));
        if let Some(f) = &self.failure {
            out.push_str(&format!("aborted at step {}: {}\n", f.step, f.reason));
        }
        out.push_str(&format!("verdict {}\n", if self.green { "green" } else { "red" }));
        out
    }
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("  {l}\n")).collect()
}

fn step_outcome(
    state: &EFieldState,
    step: &Step,
    vs: &BTreeMap<String, ParamVariety>,
    ctx: &StepContext,
) -> Result<(Option<EFieldState>, Outcome, bool)> {
    let var = |name: &String| vs[name].clone();
    let certs = |(s, c): (EFieldState, StepCertificate)| {
        let green = c.green;
        (Some(s), Outcome::Certificates { certificates: vec![c] }, green)
    };
    Ok(match step {
        Step::Domain { alpha, parity } => certs(op_domain(state, &parse_expr(alpha)?, *parity, ctx)?),
        Step::Image { beta, parity } => certs(op_image(state, &parse_expr(beta)?, *parity, ctx)?),
        Step::Sol { variety, no_sigma } => certs(op_sol(state, &var(variety), *no_sigma, ctx)?),
        Step::Roots { variety, q_max, no_sigma } => {
            let (s, cs) = op_roots(state, &var(variety), *q_max, *no_sigma, ctx)?;
            let green = cs.iter().all(|c| c.green);
            (Some(s), Outcome::Certificates { certificates: cs }, green)
        }
        Step::Audit { bound } => {
            let report = audit(state, *bound);
            let green = report.green;
            (None, Outcome::Audit { report }, green)
        }
        Step::Classify { variety, bound } => (None, Outcome::Classify { report: classify(&var(variety), *bound) }, true),
        Step::Realize { variety } => {
            let v = var(variety);
            let mut namer = state.namer.clone();
            let r = realize(&v, &state.inv, &mut namer)?;
            let report = RealizeSummary {
                variety: v.name.clone(),
                realized: r.variety.to_spec(),
                dim: r.variety.dim(),
                witness_holds: r.witness_holds(&v),
                sigma_structure_holds: r.sigma_structure_holds()?,
            };
            let green = report.witness_holds && report.sigma_structure_holds;
            (None, Outcome::Realize { report }, green)
        }
        Step::RestrictionCheck { variety, bound } => {
            let mut namer = state.namer.clone();
            let mut inv = state.inv.clone();
            for c in vs[variety].constants() {
                if !inv.is_registered(&c) {
                    inv.add_real(c)?;
                }
            }
            let report = restriction_theorem_check(&var(variety), &inv, *bound, &mut namer)?;
            let green = report.ok();
            (None, Outcome::RestrictionCheck { report }, green)
        }
    })
}

/// Executes the script; the first red step or error aborts the run.
pub fn run_script(script: &Script) -> Result<(RunReport, EFieldState)> {
    script.validate()?;
    let vs = script.varieties()?;
    let (inv, names) = script.base()?;
    let mut state = EFieldState::new_base(&inv, &Var::new(&script.omega), script.seed)?;
    for n in &names {
        state.namer.reserve(n);
    }
    let base = state.clone();
    let base_audit = audit(&base, script.audit_bound);
    let mut steps = Vec::new();
    let mut timing = Vec::new();
    let mut failure = None;
    for (index, step) in script.steps.iter().enumerate() {
        let ctx = StepContext { step: index, strong_bound: script.audit_bound };
        let started = Instant::now();
        let result = step_outcome(&state, step, &vs, &ctx);
        timing.push(started.elapsed().as_secs_f64());
        match result {
            Ok((next, outcome, green)) => {
                if let Some(s) = next {
                    state = s;
                }
                steps.push(StepRecord { index, op: step.name().into(), green, outcome });
                if !green {
                    failure = Some(Failure { step: index, reason: "red certificate".into() });
                    break;
                }
            }
            Err(e) => {
                failure = Some(Failure { step: index, reason: e.to_string() });
                break;
            }
        }
    }
    let final_audit = audit(&state, script.audit_bound);
    let chain = is_strong_extension(&base, &state, script.audit_bound.min(1));
    let green = failure.is_none() && base_audit.green && final_audit.green && chain.green;
    Ok((RunReport { seed: script.seed, base_audit, steps, final_audit, chain, failure, green, timing }, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RatExpr;

    const SMOKE: &str = r#"
seed = 11
omega = "w"

[[variety]]
catalog = "graph"

[[step]]
op = "domain"
alpha = "t"
parity = "real"

[[step]]
op = "image"
beta = "b"
parity = "real"

[[step]]
op = "sol"
variety = "graph"

[[step]]
op = "roots"
variety = "graph"
q_max = 2
"#;

    fn certificates(r: &RunReport) -> Vec<&StepCertificate> {
        r.steps
            .iter()
            .flat_map(|s| match &s.outcome {
                Outcome::Certificates { certificates } => certificates.iter().collect(),
                _ => Vec::new(),
            })
            .collect()
    }

    #[test]
    fn smoke_run_is_green_and_replays() {
        let script = Script::parse(SMOKE).unwrap();
        let (r, state) = run_script(&script).unwrap();
        assert!(r.green, "{}", r.to_text());
        let certs = certificates(&r);
        assert_eq!(certs.len(), 5);
        assert!(certs.iter().all(|c| c.green && c.kernel.green && c.sigma.green && c.strong.green));
        assert_eq!(state.len(), 7);
        let (again, _) = run_script(&script).unwrap();
        assert_eq!(r.to_json(), again.to_json());
    }

    #[test]
    fn sol_graph_block() {
        let script = Script::parse(&SMOKE.replace("q_max = 2", "q_max = 1")).unwrap();
        let (r, state) = run_script(&script).unwrap();
        let certs = certificates(&r);
        let sol = certs[2];
        assert_eq!(sol.delta.as_ref().unwrap().tr_deg, 2);
        assert_eq!(sol.delta.as_ref().unwrap().delta, 0);
        let rec = &state.solutions[0];
        // z = a + c = u^2 and E(z) = b d = u^2
        assert_eq!(rec.z, rec.ez);
        assert!(rec.witness_holds());
        // ROOTS(graph, 1) only finds graph again, already solved
        assert!(certs[3].identity);
    }

    #[test]
    fn domain_identity_and_imaginary() {
        let state = EFieldState::new_base(&Involution::new(), &Var::new("w"), 0).unwrap();
        let ctx = StepContext { step: 0, strong_bound: 2 };
        let (s, c) = op_domain(&state, &parse_expr("i*w").unwrap(), Parity::Imaginary, &ctx).unwrap();
        assert!(c.identity && c.green);
        assert_eq!(s.len(), 1);
        let (s, c) = op_domain(&s, &parse_expr("i*t").unwrap(), Parity::Imaginary, &ctx).unwrap();
        assert!(c.green, "{}", c.to_text());
        assert!(s.inv.is_unit_circle(&s.basis[1].value).unwrap());
        assert!(matches!(op_domain(&s, &parse_expr("i*r").unwrap(), Parity::Real, &ctx), Err(Error::Parity(_))));
        let (s2, c) = op_domain(&s, &parse_expr("i*w/4").unwrap(), Parity::Imaginary, &ctx).unwrap();
        assert!(c.identity && c.green);
        assert_eq!(s2.torsion, 4);
    }

    #[test]
    fn image_cases() {
        let state = EFieldState::new_base(&Involution::new(), &Var::new("w"), 0).unwrap();
        let ctx = StepContext { step: 0, strong_bound: 2 };
        let (s, c) = op_image(&state, &RatExpr::one(), Parity::Real, &ctx).unwrap();
        assert!(c.identity);
        assert_eq!(s.len(), 1);
        let (s, c) = op_image(&state, &parse_expr("-1").unwrap(), Parity::Real, &ctx).unwrap();
        assert!(c.identity && c.green, "{}", c.to_text());
        assert_eq!(s.torsion, 2);
        let (s, c) = op_image(&s, &parse_expr("(1 + i*c)/(1 - i*c)").unwrap(), Parity::Imaginary, &ctx).unwrap();
        assert!(c.green && !c.identity, "{}", c.to_text());
        assert!(s.inv.is_anti_fixed(&s.basis[1].element).unwrap());
        let (s, c) = op_image(&s, &parse_expr("b").unwrap(), Parity::Real, &ctx).unwrap();
        assert!(c.green);
        let (_, c) = op_image(&s, &parse_expr("b^2").unwrap(), Parity::Real, &ctx).unwrap();
        assert!(c.identity);
        assert!(matches!(op_image(&s, &parse_expr("i*b").unwrap(), Parity::Real, &ctx), Err(Error::Parity(_))));
    }

    #[test]
    fn no_sigma_sol() {
        let state = EFieldState::new_base(&Involution::new(), &Var::new("w"), 0).unwrap();
        let ctx = StepContext { step: 0, strong_bound: 2 };
        let (s, c) = op_sol(&state, &crate::varieties::graph(), true, &ctx).unwrap();
        assert!(c.green, "{}", c.to_text());
        assert_eq!(c.delta.as_ref().unwrap().delta, 0);
        assert_eq!(s.solutions[0].z, s.solutions[0].ez);
        assert!(s.solutions[0].z[0].vars().len() == 1);
    }

    #[test]
    fn script_errors() {
        assert!(matches!(Script::parse("[[step]]\nop = \"sol\"\nvariety = \"nope\"\n"), Err(Error::Config(_))));
        assert!(matches!(Script::parse("[[step]]\nop = \"fly\"\n"), Err(Error::Config(_))));
        let (r, _) = run_script(&Script::parse("").unwrap()).unwrap();
        assert!(r.green && r.steps.is_empty());
        assert_eq!(r.final_audit, r.base_audit);
    }

    #[test]
    fn non_simple_sol_is_refused() {
        let script = "[[variety]]\ncatalog = \"product\"\n[[step]]\nop = \"sol\"\nvariety = \"product\"\n";
        let (r, _) = run_script(&Script::parse(script).unwrap()).unwrap();
        assert!(!r.green);
        assert!(r.failure.as_ref().unwrap().reason.contains("not simple"));
    }
}
