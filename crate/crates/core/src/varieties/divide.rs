//! Division by `q`: the irreducible `W` with `q . W = V`.
//!
//! Each multiplicative coordinate is factored as a constant times a Laurent
//! monomial in the indeterminates times powers of pairwise coprime monic
//! polynomials. Parameters whose exponents are not divisible by `q` are
//! re-embedded as `u -> v^d`; everything else must already be a `q`-th power.
//!
//! The preimage of `V` under `q` splits into translates by `q`-torsion
//! `(Z/q)^n`. For a generically injective parametrization the deck maps
//! `v_k -> eta v_k` (`eta^{d_k} = 1`) identify exactly the twists in the span
//! of the parameter exponent columns mod `q`, so components are the cosets.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;

use super::{coordinate_names, ParamVariety, Provenance};
use crate::error::{Error, Result};
use crate::field::relations::coprime_basis;
use crate::field::{parse_expr, Poly, RatExpr, Scalar, Var};
use crate::intmat::IntMat;

const MAX_TWISTS: u64 = 1 << 14;

struct Factored {
    constant: Scalar,
    /// Exponents of single indeterminates.
    monomial: BTreeMap<Var, i64>,
    /// Exponents over the shared coprime basis.
    rest: Vec<i64>,
}

fn monomial_exponents(p: &Poly, sign: i64, into: &mut BTreeMap<Var, i64>) -> Poly {
    let m = p.monomial_content();
    for (v, e) in m.pairs() {
        *into.entry(v.clone()).or_default() += sign * *e as i64;
    }
    p.div_exact(&Poly::term(Scalar::one(), m)).unwrap()
}

fn valuation(p: &Poly, b: &Poly) -> (i64, Poly) {
    let mut rest = p.clone();
    let mut e = 0;
    while let Some(q) = rest.div_exact(b) {
        rest = q;
        e += 1;
    }
    (e, rest)
}

fn factor_all(ws: &[RatExpr]) -> (Vec<Poly>, Vec<Factored>) {
    let mut stripped = Vec::new();
    let mut monos = Vec::new();
    for w in ws {
        let mut mono = BTreeMap::new();
        let n = monomial_exponents(w.num(), 1, &mut mono);
        let d = monomial_exponents(w.den(), -1, &mut mono);
        mono.retain(|_, e| *e != 0);
        stripped.push((n, d));
        monos.push(mono);
    }
    let basis = coprime_basis(stripped.iter().flat_map(|(n, d)| [n.clone(), d.clone()]).collect());
    let factored = stripped
        .into_iter()
        .zip(monos)
        .map(|((n, d), monomial)| {
            let (mut rn, mut rd) = (n, d);
            let mut rest = Vec::with_capacity(basis.len());
            for b in &basis {
                let (en, a) = valuation(&rn, b);
                let (ed, c) = valuation(&rd, b);
                rn = a;
                rd = c;
                rest.push(en - ed);
            }
            let constant = rn.constant_value().div(&rd.constant_value()).unwrap();
            Factored { constant, monomial, rest }
        })
        .collect();
    (basis, factored)
}

fn fresh_name(base: &Var, q: u32, used: &mut BTreeSet<String>) -> Var {
    let mut name = format!("{}_{q}", base.name());
    while used.contains(&name) {
        name.push('_');
    }
    used.insert(name.clone());
    Var::new(&name)
}

/// Canonical coset representatives of `(Z/q)^n` modulo the span of `gens`,
/// in lexicographic order.
fn twist_representatives(n: usize, q: u32, gens: &[Vec<i64>]) -> Result<Vec<Vec<u32>>> {
    let total = (q as u64).checked_pow(n as u32).filter(|t| *t <= MAX_TWISTS);
    let total = total.ok_or_else(|| Error::Unsupported(format!("{q}^{n} torsion twists is too many to enumerate")))?;
    let decode = |mut x: u64| -> Vec<u32> {
        let mut t = vec![0u32; n];
        for j in (0..n).rev() {
            t[j] = (x % q as u64) as u32;
            x /= q as u64;
        }
        t
    };
    let reduce = |t: &[i64]| -> Vec<u32> { t.iter().map(|x| x.mod_floor(&(q as i64)) as u32).collect() };
    // subgroup closure
    let mut sub: BTreeSet<Vec<u32>> = [vec![0u32; n]].into_iter().collect();
    let mut frontier: Vec<Vec<u32>> = sub.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = reduce(&x.iter().zip(g).map(|(a, b)| *a as i64 + b).collect::<Vec<_>>());
            if sub.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut reps = Vec::new();
    for x in 0..total {
        let t = decode(x);
        if seen.contains(&t) {
            continue;
        }
        for h in &sub {
            seen.insert(reduce(&t.iter().zip(h).map(|(a, b)| (*a + *b) as i64).collect::<Vec<_>>()));
        }
        reps.push(t);
    }
    Ok(reps)
}

/// The first coordinate that is not a `q`-th power up to re-embedding of
/// parameters.
fn obstruction(basis: &[Poly], factored: &[Factored], params: &BTreeSet<Var>, q: u32) -> Option<(usize, Error)> {
    let qi = q as i64;
    for (j, f) in factored.iter().enumerate() {
        if let Some((x, e)) = f.monomial.iter().find(|(x, e)| !params.contains(*x) && *e % qi != 0) {
            return Some((j, Error::Unsupported(format!("coordinate w{}: base-field factor {x}^{e} has no {q}-th root", j + 1))));
        }
        if let Some(k) = f.rest.iter().position(|e| e % qi != 0) {
            let msg = format!("coordinate w{}: factor ({})^{} is not a {q}-th power after re-embedding", j + 1, basis[k], f.rest[k]);
            return Some((j, Error::Unsupported(msg)));
        }
    }
    None
}

/// If `w = (a u + b)/(c u + d)` for a parameter `u`, the substitution
/// `u -> (d u - b)/(a - c u)` after which `w = u`.
fn mobius_chart(w: &RatExpr, candidates: &[Var]) -> Option<(Var, RatExpr)> {
    for u in candidates {
        let (n, d) = (w.num().to_univariate(u), w.den().to_univariate(u));
        if n.len() > 2 || d.len() > 2 || (n.len() < 2 && d.len() < 2) {
            continue;
        }
        let coeff = |v: &[Poly], k: usize| RatExpr::from_poly(v.get(k).cloned().unwrap_or_else(Poly::zero));
        let (a, b, c, dd) = (coeff(&n, 1), coeff(&n, 0), coeff(&d, 1), coeff(&d, 0));
        let y = RatExpr::var(u.name());
        let inverse = dd.mul(&y).sub(&b).div(&a.sub(&c.mul(&y)))?;
        return Some((u.clone(), inverse));
    }
    None
}

fn compose(pre: &BTreeMap<Var, RatExpr>, params: &[Var], post: &BTreeMap<Var, RatExpr>) -> BTreeMap<Var, RatExpr> {
    params
        .iter()
        .map(|u| {
            let e = pre.get(u).cloned().unwrap_or_else(|| RatExpr::var(u.name()));
            (u.clone(), e.substitute(post).expect("charts are injective"))
        })
        .filter(|(u, e)| *e != RatExpr::var(u.name()))
        .collect()
}

/// The components `W` of `[q]^{-1}(V)`, canonical (untwisted) one first.
pub fn divide(v: &ParamVariety, q: u32) -> Result<Vec<ParamVariety>> {
    if q == 0 {
        return Err(Error::Invalid("division by 0".into()));
    }
    let n = v.n();
    let params = v.param_set();
    let qi = q as i64;

    // birational charts u -> mobius(u) until every coordinate is a q-th
    // power up to monomials in the parameters
    let mut chart: BTreeMap<Var, RatExpr> = BTreeMap::new();
    let mut pinned: BTreeSet<Var> = BTreeSet::new();
    let mut current = v.clone();
    let (basis, factored) = loop {
        let (basis, factored) = factor_all(&current.multiplicative);
        let Some((j, err)) = obstruction(&basis, &factored, &params, q) else { break (basis, factored) };
        let free: Vec<Var> = v.params.iter().filter(|u| !pinned.contains(*u)).cloned().collect();
        let Some((u, inverse)) = mobius_chart(&current.multiplicative[j], &free) else { return Err(err) };
        let step: BTreeMap<Var, RatExpr> = [(u.clone(), inverse)].into_iter().collect();
        chart = compose(&chart, &v.params, &step);
        pinned.insert(u);
        let apply = |es: &[RatExpr]| es.iter().map(|e| e.substitute(&step).expect("charts are injective")).collect();
        current.additive = apply(&current.additive);
        current.multiplicative = apply(&current.multiplicative);
    };
    let v_orig = v;
    let v = &current;
    let roots: Vec<Scalar> = factored
        .iter()
        .enumerate()
        .map(|(j, f)| {
            f.constant
                .nth_root(q)
                .ok_or_else(|| Error::Unsupported(format!("coordinate w{}: constant {} has no known {q}-th root", j + 1, f.constant)))
        })
        .collect::<Result<_>>()?;

    // u_k -> v_k^{d_k}
    let mut used: BTreeSet<String> = v.coordinates().iter().flat_map(|e| e.vars()).chain(v.params.iter().cloned()).map(|x| x.to_string()).collect();
    let mut new_params = Vec::with_capacity(v.params.len());
    let mut subs: BTreeMap<Var, RatExpr> = BTreeMap::new();
    let mut degree: BTreeMap<Var, i64> = BTreeMap::new();
    for u in &v.params {
        let g = factored.iter().fold(0i64, |g, f| g.gcd(f.monomial.get(u).unwrap_or(&0)));
        let d = qi / qi.gcd(&g);
        degree.insert(u.clone(), d);
        if d == 1 {
            new_params.push(u.clone());
        } else {
            let fresh = fresh_name(u, q, &mut used);
            subs.insert(u.clone(), RatExpr::var(fresh.name()).pow(d).unwrap());
            new_params.push(fresh);
        }
    }
    let lifted = |e: &RatExpr| e.substitute(&subs).expect("power substitution is injective");
    let lifted_basis: Vec<RatExpr> = basis.iter().map(|b| lifted(&RatExpr::from_poly(b.clone()))).collect();
    let renamed: BTreeMap<Var, Var> = v.params.iter().cloned().zip(new_params.iter().cloned()).collect();

    let additive: Vec<RatExpr> = v.additive.iter().map(|z| lifted(z).scale_rational(&num_rational::BigRational::new(1.into(), qi.into()))).collect();
    let base_mult: Vec<RatExpr> = factored
        .iter()
        .zip(&roots)
        .map(|(f, c)| {
            let mut exps = BTreeMap::new();
            for (x, e) in &f.monomial {
                match degree.get(x) {
                    Some(d) => exps.insert(renamed[x].clone(), e * d / qi),
                    None => exps.insert(x.clone(), e / qi),
                };
            }
            let mut w = RatExpr::from_laurent_monomial(c.clone(), &exps);
            for (b, e) in lifted_basis.iter().zip(&f.rest) {
                if *e != 0 {
                    w = w.mul(&b.pow(e / qi).unwrap());
                }
            }
            w
        })
        .collect();

    let gens: Vec<Vec<i64>> = v.params.iter().map(|u| factored.iter().map(|f| *f.monomial.get(u).unwrap_or(&0)).collect()).collect();
    let reps = twist_representatives(n, q, &gens)?;

    // q . W lies on every equation of V
    let (zs, ws) = coordinate_names(n);
    let scaled: BTreeMap<Var, RatExpr> = zs
        .iter()
        .map(|z| (z.clone(), RatExpr::var(z.name()).scale_int(qi)))
        .chain(ws.iter().map(|w| (w.clone(), RatExpr::var(w.name()).pow(qi).unwrap())))
        .collect();
    let equations: Vec<RatExpr> = v.equations.iter().map(|e| e.substitute(&scaled).unwrap()).collect();
    let subs = compose(&chart, &v.params, &subs);
    let substitution: BTreeMap<String, String> = subs.iter().map(|(k, e)| (k.to_string(), e.to_string())).collect();

    let several = reps.len() > 1;
    let mut out = Vec::with_capacity(reps.len());
    for (idx, t) in reps.into_iter().enumerate() {
        let multiplicative: Vec<RatExpr> =
            base_mult.iter().zip(&t).map(|(w, tj)| w.scale(&Scalar::root_of_unity(q, *tj as i64))).collect();
        let name = if several { format!("{}/{q}#{idx}", v_orig.name) } else { format!("{}/{q}", v_orig.name) };
        let mut w = ParamVariety::new(&name, new_params.clone(), additive.clone(), multiplicative, equations.clone())?;
        w.provenance = v_orig.provenance.clone();
        w.provenance.push(Provenance::Divide { parent: v_orig.name.clone(), q, twist: t, substitution: substitution.clone() });
        let pushed = w.push(&IntMat::scalar(n, qi))?;
        assert!(pushed.contained_via(v_orig, &subs), "q . W must reproduce V");
        out.push(w);
    }
    Ok(out)
}

/// `(q, parent parameter -> expression)` recorded by [`divide`].
pub fn division_substitution(w: &ParamVariety) -> Option<(u32, BTreeMap<Var, RatExpr>)> {
    match w.provenance.last()? {
        Provenance::Divide { q, substitution, .. } => {
            let subs = substitution.iter().map(|(k, e)| (Var::new(k), parse_expr(e).expect("recorded expressions parse"))).collect();
            Some((*q, subs))
        }
        _ => None,
    }
}

pub fn is_kummer_generic(v: &ParamVariety, q: u32) -> Result<bool> {
    Ok(divide(v, q)?.len() == 1)
}

/// All `(q, W)` with `q . W = V` and `q <= q_max`, without repeats.
pub fn roots_system(v: &ParamVariety, q_max: u32) -> Result<Vec<(u32, ParamVariety)>> {
    let mut out: Vec<(u32, ParamVariety)> = Vec::new();
    for q in 1..=q_max {
        for w in divide(v, q)? {
            if !out.iter().any(|(_, x)| x.same_maps_up_to_renaming(&w)) {
                out.push((q, w));
            }
        }
    }
    Ok(out)
}

/// Certifies `M . W` is a root of `M . V` for `W` produced by [`divide`]:
/// `q . (M . W)` equals `M . V` after the recorded re-embedding.
pub fn roots_transfer(v: &ParamVariety, w: &ParamVariety, m: &IntMat) -> Result<bool> {
    let (q, subs) = division_substitution(w).ok_or_else(|| Error::Precondition(format!("{} was not produced by divide", w.name)))?;
    let mw = w.push(m)?;
    let lhs = mw.push(&IntMat::scalar(m.rows(), q as i64))?;
    let rhs = v.push(m)?;
    Ok(lhs.equal_via(&rhs, &subs))
}
