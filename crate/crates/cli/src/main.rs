use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use expfield::efield::{audit, EFieldState};
use expfield::engine::{run_script, Script};
use expfield::field::{parse_expr, Involution, Namer};
use expfield::intmat::{act, decompose_block, reduce_general, GPoint, IntMat};
use expfield::varieties::{catalog, classify, is_kummer_generic, realize, restriction_theorem_check, ParamVariety};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Parser, Debug)]
#[command(name = "expfield", version, about = "Exact partial exponential fields: varieties, matrix lemmas, certified construction runs")]
struct Cli {
    #[arg(long, value_enum, global = true, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rotundity, freeness, simplicity and perfect rotundity of a variety.
    Check {
        /// Variety file (TOML or JSON), or `catalog:<name>`.
        variety: String,
        #[arg(long, default_value_t = 3)]
        bound: u32,
        /// Also decide Kummer-genericity at this q.
        #[arg(long)]
        kummer: Option<u32>,
    },
    /// The restriction of scalars of a variety.
    Realize { variety: String },
    /// Checks the equality cases of the restriction of scalars.
    RestrictCheck {
        variety: String,
        #[arg(long, default_value_t = 3)]
        bound: u32,
    },
    /// Splits the row spaces of N and P.
    Decompose {
        #[arg(long = "N", value_name = "MATRIX")]
        n: String,
        #[arg(long = "P", value_name = "MATRIX")]
        p: String,
    },
    /// Reduces a 2n-column matrix to block form.
    Reduce {
        #[arg(long = "M", value_name = "MATRIX")]
        m: String,
    },
    /// Applies an integer matrix to a point of G^n.
    Act {
        #[arg(long = "M", value_name = "MATRIX")]
        m: String,
        /// File with `additive` and `multiplicative` expression lists.
        #[arg(long)]
        point: PathBuf,
    },
    /// Executes a construction script.
    Run {
        script: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the structured report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the final state here.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Audits a saved state.
    Audit {
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
}

/// Rendered output and whether everything checked out.
struct Outcome {
    text: String,
    structured: Value,
    green: bool,
}

fn load_variety(arg: &str) -> Result<ParamVariety> {
    if let Some(name) = arg.strip_prefix("catalog:") {
        return catalog().into_iter().find(|v| v.name == name).ok_or_else(|| anyhow!("no catalog variety `{name}`"));
    }
    Ok(ParamVariety::from_file(Path::new(arg))?)
}

/// Constants of the variety are taken to be sigma-fixed.
fn real_base(v: &ParamVariety) -> Result<Involution> {
    let mut inv = Involution::new();
    for c in v.constants() {
        inv.add_real(c)?;
    }
    Ok(inv)
}

fn mat_json(m: &IntMat) -> Value {
    Value::Array((0..m.rows()).map(|r| Value::Array(m.row(r).iter().map(|x| json!(x.to_string())).collect())).collect())
}

fn check(variety: &str, bound: u32, kummer: Option<u32>) -> Result<Outcome> {
    let v = load_variety(variety)?;
    let report = classify(&v, bound);
    let mut text = report.to_text();
    let mut structured = serde_json::to_value(&report)?;
    let mut green = [&report.rotund, &report.abs_free, &report.simple, &report.perfectly_rotund].iter().all(|f| f.holds());
    if let Some(q) = kummer {
        let k = is_kummer_generic(&v, q)?;
        text.push_str(&format!("  kummer-generic    {} (q = {q})\n", if k { "yes" } else { "no" }));
        structured["kummer_generic"] = json!({ "q": q, "holds": k });
        green &= k;
    }
    Ok(Outcome { text, structured, green })
}

fn realize_cmd(variety: &str) -> Result<Outcome> {
    let v = load_variety(variety)?;
    let r = realize(&v, &real_base(&v)?, &mut Namer::new(0))?;
    let witness = r.witness_holds(&v);
    let sigma = r.sigma_structure_holds()?;
    let spec = r.variety.to_spec();
    let mut text = format!("restriction of scalars of {} (dim {})\n", v.name, r.variety.dim());
    text.push_str(&format!("  params          {}\n", spec.params.join(", ")));
    for (label, es) in [("additive", &spec.additive), ("multiplicative", &spec.multiplicative)] {
        for e in es {
            text.push_str(&format!("  {label:<15} {e}\n"));
        }
    }
    text.push_str(&format!("  witness identity {witness}\n  sigma structure  {sigma}\n"));
    let structured = json!({
        "variety": v.name,
        "realized": spec,
        "dim": r.variety.dim(),
        "half": r.half.to_spec(),
        "membership": r.membership.iter().map(|(k, e)| (k.to_string(), e.to_string())).collect::<std::collections::BTreeMap<_, _>>(),
        "witness_holds": witness,
        "sigma_structure_holds": sigma,
    });
    Ok(Outcome { text, structured, green: witness && sigma })
}

fn restrict_check(variety: &str, bound: u32) -> Result<Outcome> {
    let v = load_variety(variety)?;
    let report = restriction_theorem_check(&v, &real_base(&v)?, bound, &mut Namer::new(0))?;
    Ok(Outcome { text: report.to_text(), structured: serde_json::to_value(&report)?, green: report.ok() })
}

fn decompose(n: &str, p: &str) -> Result<Outcome> {
    let (n, p) = (IntMat::parse(n)?, IntMat::parse(p)?);
    let d = decompose_block(&n, &p)?;
    let verified = d.verify(&n, &p);
    let text = format!(
        "A  = {}\nN0 = {}\nP0 = {}\nP1 = {}\nverified: {}\n",
        d.a,
        d.n0,
        d.p0,
        d.p1,
        verified.as_ref().map_or_else(|e| e.clone(), |_| "yes".into())
    );
    let structured = json!({
        "a": mat_json(&d.a), "n0": mat_json(&d.n0), "p0": mat_json(&d.p0), "p1": mat_json(&d.p1),
        "verified": verified.is_ok(),
    });
    Ok(Outcome { text, structured, green: verified.is_ok() })
}

fn reduce(m: &str) -> Result<Outcome> {
    let m = IntMat::parse(m)?;
    let r = reduce_general(&m)?;
    let verified = r.verify(&m);
    let text = format!(
        "A  = {}\nN0 = {}\nN1 = {}\nP1 = {}\nP0 = {}\nk = {}, m = {}, l = {}\nverified: {}\n",
        r.a,
        r.n0,
        r.n1,
        r.p1,
        r.p0,
        r.k,
        r.m,
        r.l,
        verified.as_ref().map_or_else(|e| e.clone(), |_| "yes".into())
    );
    let structured = json!({
        "a": mat_json(&r.a), "n0": mat_json(&r.n0), "n1": mat_json(&r.n1), "p1": mat_json(&r.p1), "p0": mat_json(&r.p0),
        "k": r.k, "m": r.m, "l": r.l, "verified": verified.is_ok(),
    });
    Ok(Outcome { text, structured, green: verified.is_ok() })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointFile {
    additive: Vec<String>,
    multiplicative: Vec<String>,
}

fn act_cmd(m: &str, point: &Path) -> Result<Outcome> {
    let m = IntMat::parse(m)?;
    let text = std::fs::read_to_string(point).with_context(|| format!("reading {}", point.display()))?;
    let pf: PointFile = if point.extension().is_some_and(|e| e == "json") { serde_json::from_str(&text)? } else { toml::from_str(&text)? };
    let parse = |xs: &[String]| xs.iter().map(|s| parse_expr(s)).collect::<expfield::Result<Vec<_>>>();
    let p = GPoint::new(parse(&pf.additive)?, parse(&pf.multiplicative)?)?;
    let image = act(&m, &p)?;
    let show = |xs: &[expfield::field::RatExpr]| xs.iter().map(|e| e.to_string()).collect::<Vec<_>>();
    let (z, w) = (show(&image.additive), show(&image.multiplicative));
    let text = format!("additive       [{}]\nmultiplicative [{}]\n", z.join(", "), w.join(", "));
    Ok(Outcome { text, structured: json!({ "additive": z, "multiplicative": w }), green: true })
}

fn run(path: &Path, seed: Option<u64>, out: Option<&Path>, state_out: Option<&Path>) -> Result<Outcome> {
    let mut script = Script::from_file(path)?;
    if let Some(s) = seed {
        script.seed = s;
    }
    let (report, state) = run_script(&script)?;
    if let Some(p) = out {
        std::fs::write(p, report.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = state_out {
        std::fs::write(p, state.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(Outcome { text: report.to_text(), structured: serde_json::to_value(&report)?, green: report.green })
}

fn audit_cmd(path: &Path, bound: i64) -> Result<Outcome> {
    let state = EFieldState::load(path)?;
    let report = audit(&state, bound);
    // the recorded certificates must also be green
    let history = state.history.iter().all(|c| c.green);
    let mut text = report.to_text();
    text.push_str(&format!("history    {} certificates, all green: {history}\n", state.history.len()));
    let structured = json!({ "audit": report, "history_green": history, "certificates": state.history.len() });
    Ok(Outcome { text, structured, green: report.green && history })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Check { variety, bound, kummer } => check(variety, *bound, *kummer),
        Command::Realize { variety } => realize_cmd(variety),
        Command::RestrictCheck { variety, bound } => restrict_check(variety, *bound),
        Command::Decompose { n, p } => decompose(n, p),
        Command::Reduce { m } => reduce(m),
        Command::Act { m, point } => act_cmd(m, point),
        Command::Run { script, seed, out, state_out } => run(script, *seed, out.as_deref(), state_out.as_deref()),
        Command::Audit { state, bound } => audit_cmd(state, *bound),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(o) => {
            match cli.format {
                Format::Text => print!("{}", o.text),
                Format::Structured => println!("{}", serde_json::to_string_pretty(&o.structured).expect("json")),
            }
            if o.green {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            match cli.format {
                Format::Text => eprintln!("error: {e:#}"),
                Format::Structured => println!("{}", json!({ "error": format!("{e:#}") })),
            }
            ExitCode::from(2)
        }
    }
}
