//! `menu`: check, evaluate, compare, elaborate and verify ME_ν programs.

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};
use menu_core::corec::{check, elaborate, ElabOptions, SigmaChoice};
use menu_core::dekker::Dekker;
use menu_core::gen::Gen;
use menu_core::model::{Comp, Env, Model, StoreId, Value, DEFAULT_UNIVERSE_BOUND};
use menu_core::program::{LoadOptions, Program};
use menu_core::syntax::{pretty, Type};
use menu_core::verify::Verifier;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "menu",
    version,
    about = "Workbench for the concurrent monadic metalanguage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Maximum number of stores in the model.
    #[arg(long, global = true, default_value_t = DEFAULT_UNIVERSE_BOUND)]
    bound: u64,
    /// Comparison depth for computations and processes.
    #[arg(long, global = true, env = "MENU_DEPTH_DEFAULT", default_value_t = 8)]
    depth: u32,
    /// Seed for randomised checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Records,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and typecheck a program and print the profile of every definition.
    Check { file: PathBuf },
    /// Evaluate a definition or a closed term.
    Eval {
        file: PathBuf,
        /// A closed term; ignored when --def is given.
        term: Option<String>,
        #[arg(long)]
        def: Option<String>,
        /// Start store, as `l1=tt,l2=ff`; the first store when omitted.
        #[arg(long)]
        store: Option<String>,
    },
    /// Compare two definitions or closed terms.
    Equiv {
        file: PathBuf,
        lhs: String,
        rhs: String,
    },
    /// Show the elaborated solutions of the program's schemes.
    Elaborate {
        file: PathBuf,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long, value_enum, default_value_t = Sigma::Stable)]
        sigma: Sigma,
        /// Check the solutions against their equations.
        #[arg(long)]
        check: bool,
        /// Also elaborate and check this many random schemes.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Hoare triples, invariants and bounded safety.
    Verify {
        file: PathBuf,
        /// `pre|prog|post`.
        #[arg(long)]
        hoare: Vec<String>,
        /// `proc|test`.
        #[arg(long)]
        inv: Vec<String>,
        /// `proc|pre|post[|invariant]`.
        #[arg(long)]
        safety: Vec<String>,
        #[arg(long, default_value_t = 24)]
        horizon: usize,
    },
    /// Run the Dekker mutual exclusion verification.
    Dekker {
        #[arg(long, default_value_t = 24)]
        horizon: usize,
        /// `nobusy` or `noturn`.
        #[arg(long)]
        mutant: Option<String>,
        /// Load the program from this file instead of the shipped one.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Sigma {
    Stable,
    Reversed,
}

/// One line of output in records format.
#[derive(Serialize, Debug, Default)]
struct Record {
    check: String,
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
}

struct Out {
    format: Format,
    failed: bool,
}

impl Out {
    fn emit(&mut self, rec: Record, human: impl FnOnce() -> String, pass: bool) {
        self.failed |= !pass;
        match self.format {
            Format::Human => println!("{}", human()),
            Format::Records => println!(
                "{}",
                serde_json::to_string(&rec).expect("records serialize")
            ),
        }
    }
}

/// A failure that maps to exit code 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

fn load(path: &PathBuf, g: &Global) -> Result<Program, Usage> {
    let src = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Usage)?;
    let opts = LoadOptions {
        universe_bound: g.bound,
        ..Default::default()
    };
    Program::load_with(&src, &opts)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(Usage)
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Usage {
    Usage(e.into())
}

fn profile(params: &[(menu_core::syntax::Name, Type)], ret: &Type) -> String {
    let ps: Vec<String> = params.iter().map(|(x, t)| format!("{x}: {t}")).collect();
    if ps.is_empty() {
        format!(": {ret}")
    } else {
        format!("({}) : {ret}", ps.join(", "))
    }
}

fn show_outcomes(m: &Model, c: &Comp, s: StoreId) -> Result<Vec<String>, Usage> {
    Ok(m.run(c, s)
        .map_err(usage)?
        .iter()
        .map(|(t, v)| format!("{} [{}]", m.show(v), m.show_store(*t)))
        .collect())
}

fn run(cli: Cli) -> Result<bool, Usage> {
    let g = cli.global.clone();
    let mut out = Out {
        format: g.format,
        failed: false,
    };
    match cli.command {
        Command::Check { file } => {
            let p = load(&file, &g)?;
            for d in &p.defs {
                let text = format!("{}{}", d.name, profile(&d.params, &d.ret));
                let rec = Record {
                    check: d.name.to_string(),
                    verdict: "typed".into(),
                    detail: Some(text.clone().into()),
                    ..Default::default()
                };
                out.emit(rec, || text, true);
            }
            let stores = p.model.store_count();
            let rec = Record {
                check: "model".into(),
                verdict: "ok".into(),
                detail: Some(stores.into()),
                ..Default::default()
            };
            out.emit(rec, || format!("model: {stores} stores"), true);
        }
        Command::Eval {
            file,
            term,
            def,
            store,
        } => {
            let p = load(&file, &g)?;
            let s = match &store {
                Some(text) => p.model.parse_store(text).map_err(usage)?,
                None => 0,
            };
            let what = def
                .or(term)
                .ok_or_else(|| Usage(anyhow!("give a term or --def")))?;
            let (v, ty) = p.value(&what).map_err(usage)?;
            let (lines, detail): (Vec<String>, serde_json::Value) = match &ty {
                Type::T(_) => {
                    let o = show_outcomes(&p.model, v.as_comp().map_err(usage)?, s)?;
                    (
                        if o.is_empty() {
                            vec!["no outcomes".into()]
                        } else {
                            o.clone()
                        },
                        o.into(),
                    )
                }
                Type::TNu(_) => {
                    let tree = p
                        .model
                        .unfold_tree(v.as_proc().map_err(usage)?, s, g.depth)
                        .map_err(usage)?;
                    (
                        vec![tree.render().trim_end().to_string()],
                        serde_json::to_value(&tree).expect("tree serializes"),
                    )
                }
                _ => {
                    let text = p.model.show(&v);
                    (vec![text.clone()], text.into())
                }
            };
            let rec = Record {
                check: what.clone(),
                verdict: ty.to_string(),
                depth: Some(g.depth),
                detail: Some(detail),
                ..Default::default()
            };
            out.emit(rec, || format!("{what} : {ty}\n{}", lines.join("\n")), true);
        }
        Command::Equiv { file, lhs, rhs } => {
            let p = load(&file, &g)?;
            let (a, ta) = p.value(&lhs).map_err(usage)?;
            let (b, tb) = p.value(&rhs).map_err(usage)?;
            if ta != tb {
                return Err(Usage(anyhow!(
                    "{lhs} has type {ta} but {rhs} has type {tb}"
                )));
            }
            let m = &p.model;
            let (equal, witness) = match (&a, &b) {
                (Value::Comp(x), Value::Comp(y)) => {
                    let s = m.distinguishing_store(x, y, g.depth).map_err(usage)?;
                    (s.is_none(), s.map(|s| m.show_store(s)))
                }
                (Value::Proc(x), Value::Proc(y)) => (m.bisim(x, y, g.depth).map_err(usage)?, None),
                _ => (m.eq_value(&a, &b, g.depth).map_err(usage)?, None),
            };
            let verdict = if equal { "equal" } else { "different" };
            let rec = Record {
                check: format!("{lhs} = {rhs}"),
                verdict: verdict.into(),
                depth: Some(g.depth),
                trace: witness.clone().map(|w| vec![w]),
                ..Default::default()
            };
            out.emit(
                rec,
                || match &witness {
                    Some(w) => format!("{verdict} (from store {w})"),
                    None => verdict.to_string(),
                },
                equal,
            );
        }
        Command::Elaborate {
            file,
            scheme,
            sigma,
            check: verify,
            random,
        } => {
            let p = load(&file, &g)?;
            let opts = ElabOptions {
                sigma: match sigma {
                    Sigma::Stable => SigmaChoice::Stable,
                    Sigma::Reversed => SigmaChoice::Reversed,
                },
            };
            let mut found = false;
            for entry in &p.schemes {
                if scheme.as_deref().is_some_and(|s| s != &*entry.scheme.name) {
                    continue;
                }
                found = true;
                let elab = elaborate(&entry.scheme, &p.sig, &opts).map_err(usage)?;
                let mut text = format!("scheme {}", entry.scheme.name);
                for step in &elab.trace {
                    text.push_str(&format!("\n  - {step}"));
                }
                for s in &elab.solutions {
                    text.push_str(&format!("\n  {}({}) = {}", s.name, s.arg, pretty(&s.term)));
                }
                let mut pass = true;
                if verify {
                    let bad =
                        check::check_equations(&p.model, &entry.scheme, &Env::new(), g.depth, 16)
                            .map_err(usage)?;
                    pass = bad.is_empty();
                    text.push_str(if pass {
                        "\n  solutions satisfy their equations"
                    } else {
                        "\n  solutions FAIL their equations"
                    });
                }
                let rec = Record {
                    check: format!("elaborate {}", entry.scheme.name),
                    verdict: if pass { "ok" } else { "mismatch" }.into(),
                    depth: verify.then_some(g.depth),
                    detail: Some(serde_json::json!({
                        "trace": elab.trace,
                        "solutions": elab.solutions.iter().map(|s| serde_json::json!({"name": s.name.to_string(), "arg": s.arg.to_string(), "term": pretty(&s.term)})).collect::<Vec<_>>(),
                    })),
                    ..Default::default()
                };
                out.emit(rec, || text, pass);
            }
            if let Some(s) = &scheme {
                if !found {
                    return Err(Usage(anyhow!("no scheme named {s}")));
                }
            }
            if random > 0 {
                let bools: Vec<_> = (0..p.model.location_names().len())
                    .filter(|&i| p.model.location_type(i).is_bool())
                    .map(|i| p.model.location_names()[i].clone())
                    .collect();
                let mut gen = Gen::new(g.seed, &bools);
                let mut bad = 0;
                for _ in 0..random {
                    let s = gen.scheme(&p.sig, 2).map_err(usage)?;
                    let elab = elaborate(&s, &p.sig, &opts).map_err(usage)?;
                    let fresh = load(&file, &g)?;
                    check::install(&fresh.model, &elab, &Env::new()).map_err(usage)?;
                    if !check::check_equations(&fresh.model, &s, &Env::new(), g.depth, 8)
                        .map_err(usage)?
                        .is_empty()
                    {
                        bad += 1;
                    }
                }
                let rec = Record {
                    check: "random schemes".into(),
                    verdict: if bad == 0 { "ok" } else { "mismatch" }.into(),
                    depth: Some(g.depth),
                    detail: Some(
                        serde_json::json!({"count": random, "seed": g.seed, "failures": bad}),
                    ),
                    ..Default::default()
                };
                out.emit(
                    rec,
                    || {
                        format!(
                            "random schemes: {}/{random} round-trip (seed {})",
                            random - bad,
                            g.seed
                        )
                    },
                    bad == 0,
                );
            }
        }
        Command::Verify {
            file,
            hoare,
            inv,
            safety,
            horizon,
        } => {
            let p = load(&file, &g)?;
            if hoare.is_empty() && inv.is_empty() && safety.is_empty() {
                return Err(Usage(anyhow!(
                    "give at least one of --hoare, --inv, --safety"
                )));
            }
            let v = Verifier::new(&p.model, g.depth);
            let comp = |src: &str| -> Result<Comp, Usage> {
                let (val, ty) = p.value(src.trim()).map_err(usage)?;
                match ty {
                    Type::T(_) => Ok(val.as_comp().map_err(usage)?.clone()),
                    other => Err(Usage(anyhow!(
                        "`{}` has type {other}, expected a computation",
                        src.trim()
                    ))),
                }
            };
            let process = |src: &str| -> Result<menu_core::model::Proc, Usage> {
                let (val, ty) = p.value(src.trim()).map_err(usage)?;
                match ty {
                    Type::TNu(_) => Ok(val.as_proc().map_err(usage)?.clone()),
                    other => Err(Usage(anyhow!(
                        "`{}` has type {other}, expected a process",
                        src.trim()
                    ))),
                }
            };
            for h in &hoare {
                let parts: Vec<&str> = h.split('|').collect();
                let [pre, prog, post] = parts[..] else {
                    return Err(Usage(anyhow!("--hoare expects pre|prog|post")));
                };
                let (phi, c, psi) = (comp(pre)?, comp(prog)?, comp(post)?);
                let holds = v.hoare(&phi, &c, &psi).map_err(usage)?;
                let trace = if holds {
                    None
                } else {
                    hoare_counterexample(&v, &phi, &c, &psi).map_err(usage)?
                };
                let rec = Record {
                    check: format!("{{{}}} {} {{{}}}", pre.trim(), prog.trim(), post.trim()),
                    verdict: if holds { "holds" } else { "fails" }.into(),
                    depth: Some(g.depth),
                    trace: trace.clone(),
                    ..Default::default()
                };
                out.emit(
                    rec,
                    || match &trace {
                        Some(t) => format!("hoare: fails ({})", t.join(" -> ")),
                        None => "hoare: holds".into(),
                    },
                    holds,
                );
            }
            for i in &inv {
                let Some((r, t)) = i.split_once('|') else {
                    return Err(Usage(anyhow!("--inv expects proc|test")));
                };
                let (r, t) = (process(r)?, comp(t)?);
                if !v.is_pure(&t).map_err(usage)? {
                    return Err(Usage(anyhow!("invariant is not a pure test")));
                }
                let holds = v.is_invariant(&r, &t, g.depth).map_err(usage)?;
                let rec = Record {
                    check: format!("invariant {i}"),
                    verdict: if holds { "holds" } else { "fails" }.into(),
                    depth: Some(g.depth),
                    ..Default::default()
                };
                out.emit(
                    rec,
                    || {
                        format!(
                            "invariant: {} at depth {}",
                            if holds { "holds" } else { "fails" },
                            g.depth
                        )
                    },
                    holds,
                );
            }
            for sf in &safety {
                let parts: Vec<&str> = sf.split('|').collect();
                let (r, pre, post, xi) = match parts[..] {
                    [r, a, b] => (r, a, b, None),
                    [r, a, b, x] => (r, a, b, Some(x)),
                    _ => return Err(Usage(anyhow!("--safety expects proc|pre|post[|invariant]"))),
                };
                let xi = xi.map(comp).transpose()?;
                let report = v
                    .check_safety(
                        &process(r)?,
                        &comp(pre)?,
                        &comp(post)?,
                        xi.as_ref(),
                        horizon,
                    )
                    .map_err(usage)?;
                let safe = report.direct_safe();
                let human = safety_text(&report);
                let rec = Record {
                    check: format!("safety {sf}"),
                    verdict: if safe { "safe" } else { "unsafe" }.into(),
                    horizon: Some(horizon),
                    trace: report.direct.as_ref().map(|d| d.trace.clone()),
                    detail: Some(serde_json::to_value(&report).expect("report serializes")),
                    ..Default::default()
                };
                out.emit(rec, || human, safe);
            }
        }
        Command::Dekker {
            horizon,
            mutant,
            file,
        } => {
            let d = match &file {
                Some(f) => Dekker::from_program(load(f, &g)?),
                None => Dekker::load().map_err(usage)?,
            };
            let axioms = d.check_axioms().map_err(usage)?;
            let stores = d.program.model.store_count();
            for a in &axioms {
                let rec = Record {
                    check: format!("axiom {}", a.name),
                    verdict: if a.holds { "holds" } else { "fails" }.into(),
                    trace: a.counterexample.clone().map(|c| vec![c]),
                    detail: Some(
                        serde_json::json!({"instances": a.instances, "stated": a.stated, "stores": stores}),
                    ),
                    ..Default::default()
                };
                let text = match &a.counterexample {
                    None => format!(
                        "axiom {:<20} holds ({} instances x {stores} stores)",
                        a.name, a.instances
                    ),
                    Some(c) => format!("axiom {:<20} FAILS: {c}", a.name),
                };
                out.emit(rec, || text, a.holds);
            }
            let report = d.safety(horizon, mutant.as_deref()).map_err(usage)?;
            let safe = report.safe();
            let label = mutant.clone().unwrap_or_else(|| "dekker".into());
            let mut text = format!("{label}: {}", safety_text(&report.safety));
            text.push_str(&format!(
                "\nstate space: {} configurations from {} start stores within {horizon} layers, {} outside the invariant",
                report.configurations, report.initial_stores, report.invariant_failures
            ));
            let dc = &report.decomposition;
            text.push_str(&format!(
                "\ndecomposition at depth {}: composite {}, process 1 {}, process 2 {} ({})",
                dc.depth,
                dc.composite,
                dc.process_1,
                dc.process_2,
                if dc.agrees() {
                    "consistent"
                } else {
                    "inconsistent"
                }
            ));
            let rec = Record {
                check: format!("dekker {label}"),
                verdict: if safe { "safe" } else { "unsafe" }.into(),
                horizon: Some(horizon),
                trace: report.safety.direct.as_ref().map(|d| d.trace.clone()),
                detail: Some(serde_json::to_value(&report).expect("report serializes")),
                ..Default::default()
            };
            out.emit(rec, || text, safe);
        }
    }
    Ok(!out.failed)
}

fn hoare_counterexample(
    v: &Verifier,
    phi: &Comp,
    c: &Comp,
    psi: &Comp,
) -> anyhow::Result<Option<Vec<String>>> {
    let m = v.model();
    for s in m.stores() {
        if !v.holds(phi, s)? {
            continue;
        }
        for (t, _) in m.run(c, s)?.iter() {
            if !v.holds(psi, *t)? {
                return Ok(Some(vec![m.show_store(s), m.show_store(*t)]));
            }
        }
    }
    Ok(None)
}

fn safety_text(r: &menu_core::verify::SafetyReport) -> String {
    let mut text = match &r.direct {
        None => format!("SAFE: direct sweep over exec^n for n <= {}", r.horizon),
        Some(v) => format!("UNSAFE at n = {}: {}", v.n, v.trace.join(" -> ")),
    };
    if let Some(inv) = &r.invariant {
        if inv.holds {
            text.push_str(&format!(
                "\ninvariant route: invariant holds to depth {}, safe for all n",
                inv.depth
            ));
        } else {
            text.push_str(&format!(
                "\ninvariant route: NOT an invariant at depth {}",
                inv.depth
            ));
            if let Some(t) = &inv.trace {
                text.push_str(&format!(" ({})", t.join(" -> ")));
            }
        }
    }
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let worker = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(move || run(cli));
    let result = match worker {
        Ok(h) => h
            .join()
            .unwrap_or_else(|_| Err(Usage(anyhow!("internal error")))),
        Err(e) => Err(Usage(e.into())),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
