//! One pass/fail line per acceptance criterion. Run with
//! `cargo test -p expfield-core --test acceptance -- --nocapture`.
//!
//! Every comparison is exact; the only thresholds are wall-clock limits.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use expfield::efield::EFieldState;
use expfield::engine::{run_script, Outcome, RunReport, Script};
use expfield::field::{parse_expr, q_rank, tr_deg, Involution, Namer, RatExpr, Var};
use expfield::intmat::{act, decompose_block, reduce_general, GPoint, IntMat};
use expfield::varieties::{
    catalog, classify, divide, division_substitution, graph, is_kummer_generic, line, product, realize, restriction_theorem_check, roots_transfer,
    square, v_mn, Flag, ParamVariety, Witness,
};

const LEMMA_INSTANCES: usize = 100;
const LEMMA_ENTRY: i64 = 5;
const LEMMA_LIMIT: Duration = Duration::from_secs(5);
const ACTION_INSTANCES: usize = 100;
const CLASSIFY_BOUND: u32 = 3;
const CLASSIFY_LIMIT: Duration = Duration::from_secs(10);
const RESTRICTION_BOUND: u32 = 3;
const RESTRICTION_LIMIT: Duration = Duration::from_secs(60);
const SMOKE_LIMIT: Duration = Duration::from_secs(10);
const ORACLE_MAX_BASIS: usize = 8;
const ORACLE_BOUND: i64 = 2;
const ORACLE_LIMIT: Duration = Duration::from_secs(120);
const SEED: u64 = 0xACCE;

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

struct Gate {
    failed: Vec<&'static str>,
}

impl Gate {
    fn record(&mut self, id: &'static str, name: &str, passed: bool, detail: String) {
        println!("[{}] {id:<3} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failed.push(id);
        }
    }
}

// Exact rank over Q by Gaussian elimination, kept apart from the library's HNF.
fn rational_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for j in c..cols {
                    let d = &f * &m[rank][j];
                    m[r][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn rows(m: &IntMat) -> Vec<Vec<BigInt>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

fn product_rows(a: &IntMat, b: &IntMat) -> Vec<Vec<BigInt>> {
    (0..a.rows())
        .map(|i| (0..b.cols()).map(|j| (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()).collect())
        .collect()
}

fn random_full_rank(rng: &mut ChaCha8Rng, height: usize, cols: usize) -> IntMat {
    loop {
        let data: Vec<Vec<i64>> = (0..height).map(|_| (0..cols).map(|_| rng.gen_range(-LEMMA_ENTRY..=LEMMA_ENTRY)).collect()).collect();
        let m = IntMat::from_rows_with_cols(&data, cols).unwrap();
        if rational_rank(&rows(&m)) == height {
            return m;
        }
    }
}

fn stack(blocks: &[(&IntMat, usize)], cols: usize) -> Vec<Vec<BigInt>> {
    // each block is placed at a column offset; the rest is zero
    let mut out = Vec::new();
    for (m, off) in blocks {
        for r in 0..m.rows() {
            let mut row = vec![BigInt::zero(); cols];
            for c in 0..m.cols() {
                row[off + c] = m.get(r, c).clone();
            }
            out.push(row);
        }
    }
    out
}

fn criterion_lemmas(gate: &mut Gate) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut bad = Vec::new();
    for i in 0..LEMMA_INSTANCES {
        let n = rng.gen_range(1..=3);
        let (k, l) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
        let (nm, pm) = (random_full_rank(&mut rng, k, n), random_full_rank(&mut rng, l, n));
        let d = decompose_block(&nm, &pm).unwrap();
        let inter = k + l - rational_rank(&[rows(&nm), rows(&pm)].concat());
        let lhs = product_rows(&d.a, &nm.block_diag(&pm));
        let rhs = [stack(&[(&d.n0, 0)], 2 * n), stack(&[(&d.p1, 0)], 2 * n), stack(&[(&d.p0, n)], 2 * n), stack(&[(&d.p1, n)], 2 * n)].concat();
        let blocks = [rows(&d.n0), rows(&d.p0), rows(&d.p1)].concat();
        let ok = d.a.rows() == k + l
            && rational_rank(&rows(&d.a)) == k + l
            && lhs == rhs
            && d.p1.rows() == inter
            && rational_rank(&blocks) == blocks.len()
            && d.verify(&nm, &pm).is_ok();
        if !ok {
            bad.push(format!("decompose #{i}"));
        }

        let p = rng.gen_range(1..=2 * n);
        let m = random_full_rank(&mut rng, p, 2 * n);
        let r = reduce_general(&m).unwrap();
        let lhs = product_rows(&r.a, &m);
        let mut rhs = stack(&[(&r.n0, 0)], 2 * n);
        rhs.extend((0..r.m).map(|i| [r.n1.row(i), r.p1.row(i)].concat()));
        rhs.extend(stack(&[(&r.p0, n)], 2 * n));
        let ok = rational_rank(&rows(&r.a)) == p
            && r.k + r.m + r.l == p
            && lhs == rhs
            && rational_rank(&[rows(&r.n0), rows(&r.n1)].concat()) == r.k + r.m
            && rational_rank(&[rows(&r.p0), rows(&r.p1)].concat()) == r.m + r.l
            && r.verify(&m).is_ok();
        if !ok {
            bad.push(format!("reduce #{i}"));
        }
    }
    let t = start.elapsed();
    gate.record(
        "C1",
        "matrix lemmas",
        bad.is_empty() && t < LEMMA_LIMIT,
        format!("{} decompositions and {} reductions, failures {bad:?}, {t:.2?} (limit {LEMMA_LIMIT:?})", LEMMA_INSTANCES, LEMMA_INSTANCES),
    );
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> GPoint {
    const ADDITIVE: [&str; 6] = ["t", "s", "t + 1", "2*s", "t*s", "-1/3"];
    const MULTIPLICATIVE: [&str; 6] = ["t", "s + 1", "t/s", "2", "t^2 + s", "-3/2"];
    let pick = |rng: &mut ChaCha8Rng, atoms: &[&str]| parse_expr(atoms[rng.gen_range(0..atoms.len())]).unwrap();
    let a = (0..n).map(|_| pick(rng, &ADDITIVE)).collect();
    let m = (0..n).map(|_| pick(rng, &MULTIPLICATIVE)).collect();
    GPoint::new(a, m).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> IntMat {
    let data: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect()).collect();
    IntMat::from_rows_with_cols(&data, cols).unwrap()
}

fn criterion_action(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let (mut monoid, mut hom, mut companion) = (0, 0, 0);
    for _ in 0..ACTION_INSTANCES {
        let n = rng.gen_range(1..=3);
        let (m, nn) = (random_matrix(&mut rng, n, n, 3), random_matrix(&mut rng, n, n, 3));
        let (p, q) = (random_point(&mut rng, n), random_point(&mut rng, n));
        let lhs = act(&m.mul(&nn).unwrap(), &p).unwrap();
        monoid += usize::from(lhs == act(&m, &act(&nn, &p).unwrap()).unwrap());
        let sum = act(&m, &p.op(&q).unwrap()).unwrap();
        hom += usize::from(sum == act(&m, &p).unwrap().op(&act(&m, &q).unwrap()).unwrap());

        let a = loop {
            let a = random_matrix(&mut rng, n, n, LEMMA_ENTRY);
            if rational_rank(&rows(&a)) == n {
                break a;
            }
        };
        let (adj, det) = a.companion().unwrap();
        let lhs = product_rows(&adj, &a);
        let expected: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| if i == j { det.clone() } else { BigInt::zero() }).collect()).collect();
        companion += usize::from(lhs == expected && det == a.det().unwrap().abs() && det.is_positive());
    }
    let all = ACTION_INSTANCES;
    gate.record(
        "C2",
        "action laws and companion identity",
        monoid == all && hom == all && companion == all,
        format!("act(MN) = act(M)act(N) {monoid}/{all}, act(M, p+q) {hom}/{all}, adj(M) M = |det| Id {companion}/{all}"),
    );
}

fn is_projection(w: Option<&Witness>) -> bool {
    match w {
        Some(Witness::Matrix { rows, rank, dim }) => {
            let unit = |r: &Vec<i64>| r.iter().filter(|&&x| x != 0).count() == 1 && r.iter().all(|&x| x == 0 || x.abs() == 1);
            *rank == 1 && *dim == 1 && rows.iter().all(unit)
        }
        _ => false,
    }
}

fn criterion_classification(gate: &mut Gate) {
    let start = Instant::now();
    let (g, l, s, p) = (classify(&graph(), CLASSIFY_BOUND), classify(&line(), CLASSIFY_BOUND), classify(&square(), CLASSIFY_BOUND), classify(&product(), CLASSIFY_BOUND));
    let all_four = |r: &expfield::varieties::ClassificationReport| r.rotund.holds() && r.abs_free.holds() && r.simple.holds() && r.perfectly_rotund.holds();
    let kummer = is_kummer_generic(&square(), 2).unwrap();
    let t = start.elapsed();
    let rows = [
        ("graph all four", all_four(&g)),
        ("line all four", all_four(&l)),
        ("square free", s.abs_free.holds()),
        ("square not Kummer-generic at 2", !kummer),
        ("product not simple", !p.simple.holds()),
        ("product projection witness", is_projection(p.simple.witness())),
    ];
    let passed = rows.iter().all(|r| r.1) && t < CLASSIFY_LIMIT;
    let detail = rows.iter().map(|(n, ok)| format!("{n} {}", if *ok { "ok" } else { "WRONG" })).collect::<Vec<_>>().join(", ");
    gate.record("C3", "fixture classification table", passed, format!("{detail}; witness {:?}; {t:.2?} (limit {CLASSIFY_LIMIT:?})", p.simple.witness()));
}

fn real_base(v: &ParamVariety) -> Involution {
    let mut inv = Involution::new();
    for c in v.constants() {
        inv.add_real(c).unwrap();
    }
    inv
}

/// `(k | +-k)` up to the row span.
fn admissible_rank_one(m: &[Vec<i64>]) -> bool {
    m.iter().all(|r| r.len() == 2 && (r[0] == r[1] || r[0] == -r[1]))
}

fn criterion_restriction(gate: &mut Gate) {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut passed = true;
    for v in [graph(), line()] {
        let report = restriction_theorem_check(&v, &real_base(&v), RESTRICTION_BOUND, &mut Namer::new(SEED)).unwrap();
        let realized = realize(&v, &real_base(&v), &mut Namer::new(SEED)).unwrap().variety;
        // brute force over every matrix, not only span representatives
        let b = RESTRICTION_BOUND as i64;
        let range: Vec<i64> = (-b..=b).collect();
        let mut matrices = Vec::new();
        for p in 1..=2usize {
            let total = range.len().pow(2 * p as u32);
            for code in 0..total {
                let mut c = code;
                let entries: Vec<i64> = (0..2 * p)
                    .map(|_| {
                        let e = range[c % range.len()];
                        c /= range.len();
                        e
                    })
                    .collect();
                matrices.push(entries.chunks(2).map(<[i64]>::to_vec).collect::<Vec<_>>());
            }
        }
        let results: Vec<(usize, usize, bool)> = matrices
            .par_iter()
            .filter_map(|entries| {
                let m = IntMat::from_rows_with_cols(entries, 2).unwrap();
                let rank = rational_rank(&rows(&m));
                (rank > 0).then(|| {
                    let dim = realized.push(&m).unwrap().dim();
                    let shape = rank == 2 || admissible_rank_one(entries);
                    (rank, dim, dim > rank || shape)
                })
            })
            .collect();
        let below = results.iter().filter(|(r, d, _)| d < r).count();
        let bad_equal = results.iter().filter(|(r, d, ok)| d == r && !ok).count();
        let ok = report.counterexamples.is_empty()
            && report.rotund.holds()
            && report.witness_holds
            && report.sigma_structure_holds
            && report.input_perfectly_rotund
            && below == 0
            && bad_equal == 0;
        passed &= ok;
        notes.push(format!(
            "{}: {} spans, {} matrices, {} equality spans, counterexamples {} (brute force: {below} below rank, {bad_equal} bad equalities)",
            v.name,
            report.spans_checked,
            results.len(),
            report.equality_matrices.len(),
            report.counterexamples.len()
        ));
    }
    let t = start.elapsed();
    gate.record("C4", "restriction theorem desk test", passed && t < RESTRICTION_LIMIT, format!("{}; {t:.2?} (limit {RESTRICTION_LIMIT:?})", notes.join("; ")));
}

fn criterion_v_mn(gate: &mut Gate) {
    let v = v_mn();
    let doubled = v.push(&IntMat::scalar(2, 2)).unwrap();
    let subs: BTreeMap<Var, RatExpr> = [(Var::new("s"), parse_expr("2*s").unwrap()), (Var::new("v"), parse_expr("v^2").unwrap())].into_iter().collect();
    let self_double = doubled.equal_via(&v, &subs) && doubled.dim() == v.dim();
    let report = classify(&v, CLASSIFY_BOUND);
    let witness = match &report.abs_free {
        Flag::Fails { witness: Witness::MultiplicativeRelation { vector } } => vector == &vec![1, 1] || vector == &vec![-1, -1],
        _ => false,
    };
    let realized = realize(&v, &real_base(&v), &mut Namer::new(SEED)).unwrap();
    let id0 = IntMat::from_rows_with_cols(&[vec![1i64, 0, 0, 0], vec![0, 1, 0, 0]], 4).unwrap();
    let dim = realized.variety.push(&id0).unwrap().dim();
    gate.record(
        "C5",
        "freeness hypothesis is necessary",
        self_double && witness && dim == 2 && id0.rank() == 2,
        format!("2.V = V {self_double}, abs-free witness {:?}, dim (Id|0).V^ = {dim} = rank {}", report.abs_free.witness(), id0.rank()),
    );
}

fn certificates(r: &RunReport) -> Vec<&expfield::efield::StepCertificate> {
    r.steps
        .iter()
        .flat_map(|s| match &s.outcome {
            Outcome::Certificates { certificates } => certificates.iter().collect(),
            _ => Vec::new(),
        })
        .collect()
}

fn criterion_smoke(gate: &mut Gate) -> (RunReport, EFieldState) {
    let script = Script::parse(SMOKE).unwrap();
    let start = Instant::now();
    let (report, state) = run_script(&script).unwrap();
    let t = start.elapsed();
    let certs = certificates(&report);
    let kernel = certs.iter().all(|c| c.kernel.green && c.kernel.found.as_ref() == Some(&c.kernel.expected));
    let sigma = certs.iter().all(|c| c.sigma.green);
    let strong = certs.iter().all(|c| c.strong.green) && report.chain.green;
    let membership = certs.iter().filter_map(|c| c.membership.as_ref()).all(|m| m.on_variety && m.realization_identity != Some(false))
        && certs.iter().any(|c| c.membership.is_some())
        && state.solutions.iter().all(|s| s.witness_holds());
    let (again, again_state) = run_script(&script).unwrap();
    let replay = again.to_json() == report.to_json() && again_state.to_json() == state.to_json();
    gate.record(
        "C6",
        "construction smoke run",
        report.green && kernel && sigma && strong && membership && replay && t < SMOKE_LIMIT,
        format!(
            "{} certificates, kernel {kernel}, sigma {sigma}, strong {strong}, membership {membership}, replay identical {replay}, {t:.2?} (limit {SMOKE_LIMIT:?})",
            certs.len()
        ),
    );
    (report, state)
}

/// `delta(X) = tr.deg(X, E(X)) - ldim_Q(X)` straight from the expressions.
fn oracle_delta(state: &EFieldState, xs: &[Vec<i64>]) -> i64 {
    let elems: Vec<RatExpr> = xs.iter().map(|m| state.element_of(m)).collect();
    let mut all = elems.clone();
    all.extend(xs.iter().map(|m| state.value_of(m)));
    tr_deg(&all, &[]) as i64 - q_rank(&elems) as i64
}

fn criterion_oracle(gate: &mut Gate, report: &RunReport, state: &EFieldState) {
    let start = Instant::now();
    let n = state.len();
    let unit = |i: usize| (0..n).map(|j| i64::from(i == j)).collect::<Vec<i64>>();
    let subsets: Vec<Vec<Vec<i64>>> = (1u32..1 << n).map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(unit).collect()).collect();
    let width = (2 * ORACLE_BOUND + 1) as usize;
    let combinations: Vec<Vec<Vec<i64>>> = (0..width.pow(n as u32))
        .map(|code| {
            let mut c = code;
            (0..n)
                .map(|_| {
                    let k = (c % width) as i64 - ORACLE_BOUND;
                    c /= width;
                    k
                })
                .collect::<Vec<i64>>()
        })
        // one representative per sign class
        .filter(|m| m.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0))
        .map(|m| vec![m])
        .collect();
    let deltas: Vec<i64> = subsets.par_iter().chain(combinations.par_iter()).map(|xs| oracle_delta(state, xs)).collect();
    let min = deltas.iter().copied().min();
    let t = start.elapsed();
    let chain_agrees = report.final_audit.sp.min_delta == min && report.final_audit.green && report.chain.green && state.history.iter().all(|c| c.green);
    gate.record(
        "C7",
        "predimension oracle",
        n <= ORACLE_MAX_BASIS && min == Some(0) && chain_agrees && t < ORACLE_LIMIT,
        format!(
            "{n} basis elements, {} subsets and {} combinations (|k| <= {ORACLE_BOUND}), oracle min {min:?}, final audit min {:?}, chain green {}, {t:.2?} (limit {ORACLE_LIMIT:?})",
            subsets.len(),
            combinations.len(),
            report.final_audit.sp.min_delta,
            report.chain.green
        ),
    );
}

fn criterion_kummer(gate: &mut Gate) {
    let generic = is_kummer_generic(&graph(), 2).unwrap() && is_kummer_generic(&graph(), 3).unwrap();
    let square_fails = !is_kummer_generic(&square(), 2).unwrap();
    let mut reproduced = 0;
    let mut components = 0;
    for v in catalog() {
        for q in [2u32, 3] {
            for w in divide(&v, q).unwrap() {
                components += 1;
                let (recorded, subs) = division_substitution(&w).unwrap();
                let pushed = w.push(&IntMat::scalar(v.n(), q as i64)).unwrap();
                reproduced += usize::from(recorded == q && pushed.equal_via(&v, &subs));
            }
        }
    }
    let g = graph();
    let transfer = divide(&g, 2).unwrap().iter().all(|w| roots_transfer(&g, w, &IntMat::scalar(1, 2)).unwrap());
    gate.record(
        "C8",
        "Kummer and division suite",
        generic && square_fails && reproduced == components && transfer,
        format!("graph generic at 2, 3 {generic}, square not generic at 2 {square_fails}, q.W = V for {reproduced}/{components} components, roots transfer under 2.Id {transfer}"),
    );
}

#[test]
fn acceptance_criteria() {
    let mut gate = Gate { failed: Vec::new() };
    criterion_lemmas(&mut gate);
    criterion_action(&mut gate);
    criterion_classification(&mut gate);
    criterion_restriction(&mut gate);
    criterion_v_mn(&mut gate);
    let (report, state) = criterion_smoke(&mut gate);
    criterion_oracle(&mut gate, &report, &state);
    criterion_kummer(&mut gate);
    assert!(gate.failed.is_empty(), "failed criteria: {:?}", gate.failed);
}
