//! Parametrized irreducible subvarieties of `G^n`.
//!
//! A variety is the Zariski closure of the image of a rational map from a
//! tuple of parameters. Indeterminates in the maps that are not parameters
//! belong to the base field, so dimensions are transcendence degrees over it.

mod catalog;
mod classify;
mod divide;
mod realize;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{parse_expr, tr_deg_wrt, RatExpr, Var};
use crate::intmat::{act, GPoint, IntMat};

pub use catalog::{catalog, graph, line, parabola_half, product, square, v_mn};
pub use classify::{classify, ClassificationReport, Flag, Witness};
pub use divide::{divide, division_substitution, is_kummer_generic, roots_system, roots_transfer};
pub use realize::{realize, restriction_theorem_check, Realization, RestrictionReport};

/// One step of the construction history.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    User,
    Pushforward { matrix: Vec<Vec<i64>> },
    /// `q . self = parent` after substituting `substitution` into the parent.
    Divide { parent: String, q: u32, twist: Vec<u32>, substitution: BTreeMap<String, String> },
    Realize { half: String },
    Translate { additive: Vec<String>, multiplicative: Vec<String> },
}

/// The structured-text form read from variety files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietySpec {
    pub name: String,
    pub n: usize,
    pub params: Vec<String>,
    pub additive: Vec<String>,
    pub multiplicative: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamVariety {
    pub name: String,
    pub params: Vec<Var>,
    pub additive: Vec<RatExpr>,
    pub multiplicative: Vec<RatExpr>,
    /// Polynomials in `z1..zn, w1..wn`, each vanishing on the parametrization.
    pub equations: Vec<RatExpr>,
    pub provenance: Vec<Provenance>,
}

pub fn coordinate_names(n: usize) -> (Vec<Var>, Vec<Var>) {
    ((1..=n).map(|j| Var::new(&format!("z{j}"))).collect(), (1..=n).map(|j| Var::new(&format!("w{j}"))).collect())
}

/// Parses and validates a variety description.
pub fn make_variety(spec: &VarietySpec) -> Result<ParamVariety> {
    let parse_all = |xs: &[String]| xs.iter().map(|s| parse_expr(s)).collect::<Result<Vec<_>>>();
    let params = spec
        .params
        .iter()
        .map(|p| {
            if crate::field::parse::is_valid_name(p) {
                Ok(Var::new(p))
            } else {
                Err(Error::Invalid(format!("`{p}` is not a valid parameter name")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let v = ParamVariety::new(
        &spec.name,
        params,
        parse_all(&spec.additive)?,
        parse_all(&spec.multiplicative)?,
        parse_all(&spec.equations)?,
    )?;
    if v.n() != spec.n {
        return Err(Error::Dimension(format!("declared n = {} but {} coordinates given", spec.n, v.n())));
    }
    Ok(v)
}

impl ParamVariety {
    pub fn new(
        name: &str,
        params: Vec<Var>,
        additive: Vec<RatExpr>,
        multiplicative: Vec<RatExpr>,
        equations: Vec<RatExpr>,
    ) -> Result<ParamVariety> {
        let distinct: BTreeSet<&Var> = params.iter().collect();
        if distinct.len() != params.len() {
            return Err(Error::Invalid("repeated parameter name".into()));
        }
        GPoint::new(additive.clone(), multiplicative.clone())?;
        let v = ParamVariety { name: name.to_string(), params, additive, multiplicative, equations, provenance: vec![Provenance::User] };
        if let Some(k) = v.failing_equation() {
            return Err(Error::Invalid(format!("equation {} does not vanish on the parametrization", v.equations[k])));
        }
        Ok(v)
    }

    pub fn from_file(path: &Path) -> Result<ParamVariety> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let spec: VarietySpec = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        make_variety(&spec)
    }

    pub fn to_spec(&self) -> VarietySpec {
        let show = |xs: &[RatExpr]| xs.iter().map(|e| e.to_string()).collect();
        VarietySpec {
            name: self.name.clone(),
            n: self.n(),
            params: self.params.iter().map(|p| p.to_string()).collect(),
            additive: show(&self.additive),
            multiplicative: show(&self.multiplicative),
            equations: show(&self.equations),
        }
    }

    pub fn n(&self) -> usize {
        self.additive.len()
    }

    pub fn param_set(&self) -> BTreeSet<Var> {
        self.params.iter().cloned().collect()
    }

    pub fn point(&self) -> GPoint {
        GPoint { additive: self.additive.clone(), multiplicative: self.multiplicative.clone() }
    }

    pub fn coordinates(&self) -> Vec<RatExpr> {
        self.additive.iter().chain(&self.multiplicative).cloned().collect()
    }

    /// Base-field indeterminates occurring in the maps.
    pub fn constants(&self) -> BTreeSet<Var> {
        let params = self.param_set();
        self.coordinates().iter().flat_map(|e| e.vars()).filter(|v| !params.contains(v)).collect()
    }

    fn failing_equation(&self) -> Option<usize> {
        let (zs, ws) = coordinate_names(self.n());
        let subs: BTreeMap<Var, RatExpr> =
            zs.into_iter().zip(self.additive.clone()).chain(ws.into_iter().zip(self.multiplicative.clone())).collect();
        self.equations.iter().position(|eq| !eq.substitute(&subs).is_some_and(|r| r.is_zero()))
    }

    /// True if every equation vanishes on the parametrization.
    pub fn equations_hold(&self) -> bool {
        self.failing_equation().is_none()
    }

    pub fn dim(&self) -> usize {
        tr_deg_wrt(&self.coordinates(), &[], &self.param_set())
    }

    pub fn depth(&self) -> i64 {
        self.dim() as i64 - self.n() as i64
    }

    fn derived(&self, name: String, point: GPoint, step: Provenance) -> ParamVariety {
        let mut provenance = self.provenance.clone();
        provenance.push(step);
        ParamVariety {
            name,
            params: self.params.clone(),
            additive: point.additive,
            multiplicative: point.multiplicative,
            equations: Vec::new(),
            provenance,
        }
    }

    /// `M . V`.
    pub fn push(&self, m: &IntMat) -> Result<ParamVariety> {
        let p = act(m, &self.point())?;
        let rows = m.to_vecs_i64().ok_or_else(|| Error::Invalid("matrix entries too large".into()))?;
        Ok(self.derived(format!("{m}.{}", self.name), p, Provenance::Pushforward { matrix: rows }))
    }

    /// `V (+) p`.
    pub fn translate(&self, p: &GPoint) -> Result<ParamVariety> {
        let q = self.point().op(p)?;
        let step = Provenance::Translate {
            additive: p.additive.iter().map(|e| e.to_string()).collect(),
            multiplicative: p.multiplicative.iter().map(|e| e.to_string()).collect(),
        };
        Ok(self.derived(format!("{}+p", self.name), q, step))
    }

    /// The parametrization with parameters renamed positionally.
    pub fn rename_params(&self, names: &[Var]) -> ParamVariety {
        assert_eq!(names.len(), self.params.len());
        let map: BTreeMap<Var, Var> = self.params.iter().cloned().zip(names.iter().cloned()).collect();
        let f = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        ParamVariety {
            name: self.name.clone(),
            params: names.to_vec(),
            additive: self.additive.iter().map(|e| e.rename(&f)).collect(),
            multiplicative: self.multiplicative.iter().map(|e| e.rename(&f)).collect(),
            equations: self.equations.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Equal maps after renaming the parameters of `self` onto those of `other`
    /// positionally.
    pub fn same_maps_up_to_renaming(&self, other: &ParamVariety) -> bool {
        if self.params.len() != other.params.len() || self.n() != other.n() {
            return false;
        }
        let r = self.rename_params(&other.params);
        r.additive == other.additive && r.multiplicative == other.multiplicative
    }

    /// Certifies `self` is contained in `other`: `other`'s maps after
    /// `subs` (parameters of `other` to expressions in those of `self`) equal
    /// the maps of `self`.
    pub fn contained_via(&self, other: &ParamVariety, subs: &BTreeMap<Var, RatExpr>) -> bool {
        let image = |es: &[RatExpr]| es.iter().map(|e| e.substitute(subs)).collect::<Option<Vec<_>>>();
        self.n() == other.n()
            && image(&other.additive).as_deref() == Some(&self.additive[..])
            && image(&other.multiplicative).as_deref() == Some(&self.multiplicative[..])
    }

    /// Containment plus equal dimension; for irreducible varieties this is
    /// equality.
    pub fn equal_via(&self, other: &ParamVariety, subs: &BTreeMap<Var, RatExpr>) -> bool {
        self.contained_via(other, subs) && self.dim() == other.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(params: &[&str], add: &[&str], mult: &[&str], eqs: &[&str]) -> VarietySpec {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        VarietySpec {
            name: "x".into(),
            n: add.len(),
            params: own(params),
            additive: own(add),
            multiplicative: own(mult),
            equations: own(eqs),
        }
    }

    #[test]
    fn make_and_validate() {
        let v = make_variety(&spec(&["u"], &["u"], &["u"], &["w1 - z1"])).unwrap();
        assert_eq!((v.dim(), v.depth()), (1, 0));
        assert!(make_variety(&spec(&["u"], &["u^2/2"], &["u"], &["2*z1 - w1^2"])).is_ok());
        assert!(matches!(make_variety(&spec(&["u"], &["u"], &["0"], &[])), Err(Error::ZeroInput(_))));
        assert!(matches!(make_variety(&spec(&["u"], &["u"], &["u"], &["w1 - z1 - 1"])), Err(Error::Invalid(_))));
        assert!(make_variety(&spec(&["u", "u"], &["u"], &["u"], &[])).is_err());
        let mut bad = spec(&["u"], &["u"], &["u"], &[]);
        bad.n = 2;
        assert!(matches!(make_variety(&bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn dims() {
        assert_eq!(product().dim(), 2);
        let point = make_variety(&spec(&[], &["1", "2"], &["3", "i"], &[])).unwrap();
        assert_eq!((point.dim(), point.depth()), (0, -2));
        let with_constant = make_variety(&spec(&["s"], &["t*s"], &["t"], &[])).unwrap();
        assert_eq!(with_constant.dim(), 1);
    }

    #[test]
    fn pushforward_examples() {
        let g = graph();
        assert!(g.push(&IntMat::identity(1)).unwrap().same_maps_up_to_renaming(&g));
        let s = product().push(&IntMat::from_rows(&[vec![1i64, 1]]).unwrap()).unwrap();
        assert_eq!(s.additive[0], parse_expr("u1 + u2").unwrap());
        assert_eq!(s.multiplicative[0], parse_expr("u1*u2").unwrap());
        assert_eq!(s.dim(), 2);
        let d = g.push(&IntMat::scalar(1, 2)).unwrap();
        assert_eq!((d.additive[0].to_string(), d.multiplicative[0].to_string()), ("2*u".into(), "u^2".into()));
        assert_eq!(d.dim(), 1);
        assert!(g.push(&IntMat::identity(2)).is_err());
    }

    #[test]
    fn translation() {
        let g = graph();
        assert!(g.translate(&GPoint::identity(1)).unwrap().same_maps_up_to_renaming(&g));
        let p = GPoint::new(vec![parse_expr("t").unwrap()], vec![parse_expr("s + 1").unwrap()]).unwrap();
        let moved = g.translate(&p).unwrap();
        assert_eq!(moved.dim(), g.dim());
        assert!(moved.translate(&p.inverse()).unwrap().same_maps_up_to_renaming(&g));
    }

    #[test]
    fn spec_round_trip() {
        for v in catalog() {
            let back = make_variety(&v.to_spec()).unwrap();
            assert!(back.same_maps_up_to_renaming(&v), "{}", v.name);
        }
    }
}
