//! Dekker's mutual exclusion algorithm: the axioms of its interface
//! functions, the composite process and its safety verification.

use crate::model::{Comp, Env, ModelError, Proc, StoreId, Value, DEFAULT_DEPTH};
use crate::program::{Program, ProgramError};
use crate::syntax::{name, Context, Type};
use crate::verify::{SafetyReport, Verifier, VerifyError};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

/// The shipped program text.
pub const SOURCE: &str = include_str!("../programs/dekker.mnu");

/// Mutants defined in [`SOURCE`] as `dekker_<name>` and `proc_<name>`.
pub const MUTANTS: &[&str] = &["nobusy", "noturn"];

/// `¬cs(1) ∧ ¬cs(2)`.
pub const PRE: &str = "do a <- cs(tt); do b <- cs(ff); ret and(not(a), not(b))";
/// `¬cs(1) ∨ ¬cs(2)`.
pub const POST: &str = "do a <- cs(tt); do b <- cs(ff); ret or(not(a), not(b))";
/// `¬cs(1)∧cs(2)∧get_flag(2) ∨ ¬cs(2)∧cs(1)∧get_flag(1) ∨ ¬cs(1)∧¬cs(2)`.
pub const INVARIANT: &str =
    "do c1 <- cs(tt); do c2 <- cs(ff); do f1 <- get_flag(tt); do f2 <- get_flag(ff); \
     ret or(and(not(c1), and(c2, f2)), or(and(not(c2), and(c1, f1)), and(not(c1), not(c2))))";

#[derive(Debug, Error)]
pub enum DekkerError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown mutant `{0}` (known: nobusy, noturn)")]
    UnknownMutant(String),
}

#[derive(Clone, Copy, Debug)]
pub enum AxiomKind {
    /// `lhs = rhs` for every assignment of Booleans to the variables.
    Equation(&'static str, &'static str),
    /// The term is a pure test for every assignment.
    Pure(&'static str),
}

#[derive(Clone, Copy, Debug)]
pub struct Axiom {
    pub name: &'static str,
    pub vars: &'static [&'static str],
    /// Only instances with `i != j`.
    pub distinct: bool,
    pub kind: AxiomKind,
    /// Stated in the source text rather than added.
    pub stated: bool,
}

const fn eq(
    name: &'static str,
    vars: &'static [&'static str],
    distinct: bool,
    l: &'static str,
    r: &'static str,
    stated: bool,
) -> Axiom {
    Axiom {
        name,
        vars,
        distinct,
        kind: AxiomKind::Equation(l, r),
        stated,
    }
}

const fn pure(name: &'static str, vars: &'static [&'static str], t: &'static str) -> Axiom {
    Axiom {
        name,
        vars,
        distinct: false,
        kind: AxiomKind::Pure(t),
        stated: false,
    }
}

pub const AXIOMS: &[Axiom] = &[
    eq(
        "flag_read",
        &["i", "b"],
        false,
        "do _ <- set_flag(i, b); get_flag(i)",
        "do _ <- set_flag(i, b); ret b",
        true,
    ),
    eq(
        "flag_commute",
        &["i", "j", "b", "c"],
        true,
        "do _ <- set_flag(i, b); set_flag(j, c)",
        "do _ <- set_flag(j, c); set_flag(i, b)",
        true,
    ),
    eq(
        "flag_overwrite",
        &["i", "b", "c"],
        false,
        "do _ <- set_flag(i, b); set_flag(i, c)",
        "set_flag(i, c)",
        true,
    ),
    eq(
        "turn_read",
        &["b", "c"],
        false,
        "do _ <- set_turn(b); turn_is(c)",
        "do _ <- set_turn(b); ret iff(b, c)",
        true,
    ),
    eq(
        "turn_overwrite",
        &["b", "c"],
        false,
        "do _ <- set_turn(b); set_turn(c)",
        "set_turn(c)",
        true,
    ),
    eq(
        "cs_enter",
        &["i"],
        false,
        "do _ <- in_cs(i); cs(i)",
        "do _ <- in_cs(i); ret tt",
        true,
    ),
    eq(
        "cs_leave",
        &["i"],
        false,
        "do _ <- out_cs(i); cs(i)",
        "do _ <- out_cs(i); ret ff",
        true,
    ),
    pure("get_flag_pure", &["i"], "get_flag(i)"),
    pure("turn_is_pure", &["c"], "turn_is(c)"),
    pure("cs_pure", &["i"], "cs(i)"),
    eq(
        "flag_turn_commute",
        &["i", "b", "c"],
        false,
        "do _ <- set_flag(i, b); set_turn(c)",
        "do _ <- set_turn(c); set_flag(i, b)",
        false,
    ),
    eq(
        "flag_enter_commute",
        &["i", "j", "b"],
        false,
        "do _ <- set_flag(i, b); in_cs(j)",
        "do _ <- in_cs(j); set_flag(i, b)",
        false,
    ),
    eq(
        "flag_leave_commute",
        &["i", "j", "b"],
        false,
        "do _ <- set_flag(i, b); out_cs(j)",
        "do _ <- out_cs(j); set_flag(i, b)",
        false,
    ),
    eq(
        "flag_frame",
        &["i", "j", "b"],
        true,
        "do _ <- set_flag(j, b); get_flag(i)",
        "do x <- get_flag(i); do _ <- set_flag(j, b); ret x",
        false,
    ),
    eq(
        "cs_flag_frame",
        &["i", "j", "b"],
        false,
        "do _ <- set_flag(j, b); cs(i)",
        "do x <- cs(i); do _ <- set_flag(j, b); ret x",
        false,
    ),
    eq(
        "cs_turn_frame",
        &["i", "c"],
        false,
        "do _ <- set_turn(c); cs(i)",
        "do x <- cs(i); do _ <- set_turn(c); ret x",
        false,
    ),
    eq(
        "flip_swaps",
        &["i"],
        false,
        "ret flip(flip(i))",
        "ret i",
        false,
    ),
    eq(
        "flip_moves",
        &["i"],
        false,
        "ret iff(flip(i), i)",
        "ret ff",
        false,
    ),
];

/// The verdict on one axiom over all its instances and all stores.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomResult {
    pub name: String,
    pub stated: bool,
    pub instances: usize,
    pub holds: bool,
    /// The first failing instance, with a distinguishing store if any.
    pub counterexample: Option<String>,
}

/// The bounded check of the decomposition claim: the invariant holds of the
/// composite iff it holds of both component processes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub depth: u32,
    pub composite: bool,
    pub process_1: bool,
    pub process_2: bool,
}

impl Decomposition {
    pub fn agrees(&self) -> bool {
        self.composite == (self.process_1 && self.process_2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DekkerReport {
    pub mutant: Option<String>,
    pub horizon: usize,
    pub safety: SafetyReport,
    /// Start stores satisfying the precondition.
    pub initial_stores: usize,
    /// Distinct (process, store) configurations reachable from them within
    /// the horizon.
    pub configurations: usize,
    /// Of those, the configurations whose store fails the invariant.
    pub invariant_failures: usize,
    pub decomposition: Decomposition,
}

impl DekkerReport {
    pub fn safe(&self) -> bool {
        self.safety.direct_safe()
    }
}

/// The loaded Dekker program.
pub struct Dekker {
    pub program: Program,
}

fn bool_value(b: bool) -> Value {
    if b {
        Value::tt()
    } else {
        Value::ff()
    }
}

impl Dekker {
    pub fn load() -> Result<Dekker, DekkerError> {
        Ok(Dekker {
            program: Program::load(SOURCE)?,
        })
    }

    pub fn from_program(program: Program) -> Dekker {
        Dekker { program }
    }

    fn test(&self, src: &str) -> Result<Comp, DekkerError> {
        let (t, _) = self.program.term(src, Some(&Type::t(Type::bool())))?;
        Ok(self.program.model.eval_comp(&Env::new(), &t)?)
    }

    /// The precondition, postcondition and invariant as computations.
    pub fn tests(&self) -> Result<(Comp, Comp, Comp), DekkerError> {
        Ok((self.test(PRE)?, self.test(POST)?, self.test(INVARIANT)?))
    }

    /// The composite process, or a mutant of it.
    pub fn composite(&self, mutant: Option<&str>) -> Result<Proc, DekkerError> {
        let def = match mutant {
            None => "dekker".to_string(),
            Some(m) if MUTANTS.contains(&m) => format!("dekker_{m}"),
            Some(m) => return Err(DekkerError::UnknownMutant(m.into())),
        };
        Ok(self.program.value(&def)?.0.as_proc()?.clone())
    }

    /// One component process `proc(i, body)`.
    pub fn process(&self, i: bool, mutant: Option<&str>) -> Result<Proc, DekkerError> {
        let f = match mutant {
            None => "proc".to_string(),
            Some(m) if MUTANTS.contains(&m) => format!("proc_{m}"),
            Some(m) => return Err(DekkerError::UnknownMutant(m.into())),
        };
        let src = format!("{f}({}, body)", if i { "tt" } else { "ff" });
        Ok(self.program.eval(&src)?.0.as_proc()?.clone())
    }

    /// Check every axiom exhaustively over its instances and all stores.
    pub fn check_axioms(&self) -> Result<Vec<AxiomResult>, DekkerError> {
        let m = &self.program.model;
        let verifier = Verifier::new(m, DEFAULT_DEPTH);
        let mut out = Vec::new();
        for ax in AXIOMS {
            let ctx = Context::from_pairs(ax.vars.iter().map(|x| (name(x), Type::bool())));
            let mut instances = 0;
            let mut counterexample = None;
            for bits in 0..(1u32 << ax.vars.len()) {
                let vals: Vec<bool> = (0..ax.vars.len()).map(|k| bits & (1 << k) == 0).collect();
                if ax.distinct && vals[0] == vals[1] {
                    continue;
                }
                instances += 1;
                let env = Env::from_pairs(
                    ax.vars
                        .iter()
                        .zip(&vals)
                        .map(|(x, b)| (name(x), bool_value(*b))),
                );
                let show = || {
                    ax.vars
                        .iter()
                        .zip(&vals)
                        .map(|(x, b)| format!("{x}={}", if *b { "tt" } else { "ff" }))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                let failure = match ax.kind {
                    AxiomKind::Equation(l, r) => {
                        let l = m.eval_comp(&env, &self.program.term_in(&ctx, l, None)?.0)?;
                        let r = m.eval_comp(&env, &self.program.term_in(&ctx, r, None)?.0)?;
                        m.distinguishing_store(&l, &r, DEFAULT_DEPTH)?
                            .map(|s: StoreId| format!("{} at store {}", show(), m.show_store(s)))
                    }
                    AxiomKind::Pure(t) => {
                        let c = m.eval_comp(&env, &self.program.term_in(&ctx, t, None)?.0)?;
                        (!verifier.is_pure(&c)?).then(|| format!("{} is not pure", show()))
                    }
                };
                if counterexample.is_none() {
                    counterexample = failure;
                }
            }
            out.push(AxiomResult {
                name: ax.name.into(),
                stated: ax.stated,
                instances,
                holds: counterexample.is_none(),
                counterexample,
            });
        }
        Ok(out)
    }

    /// Safety of the composite with respect to mutual exclusion, with the
    /// invariant route and the decomposition check at depth `horizon`.
    pub fn safety(
        &self,
        horizon: usize,
        mutant: Option<&str>,
    ) -> Result<DekkerReport, DekkerError> {
        let m = &self.program.model;
        let verifier = Verifier::new(m, DEFAULT_DEPTH);
        let (phi, psi, xi) = self.tests()?;
        let r = self.composite(mutant)?;
        let safety = verifier.check_safety(&r, &phi, &psi, Some(&xi), horizon)?;
        let mut initial_stores = 0;
        let mut seen = BTreeSet::new();
        let mut invariant_failures = 0;
        for s in m.stores() {
            if !verifier.holds(&phi, s)? {
                continue;
            }
            initial_stores += 1;
            for c in m.reachable(&r, s, horizon as u32)? {
                if seen.insert((c.proc.id(), c.store)) && !verifier.holds(&xi, c.store)? {
                    invariant_failures += 1;
                }
            }
        }
        let depth = horizon as u32;
        let decomposition = Decomposition {
            depth,
            composite: safety.invariant_safe().unwrap_or(false),
            process_1: verifier.is_invariant(&self.process(true, mutant)?, &xi, depth)?,
            process_2: verifier.is_invariant(&self.process(false, mutant)?, &xi, depth)?,
        };
        Ok(DekkerReport {
            mutant: mutant.map(str::to_string),
            horizon,
            safety,
            initial_stores,
            configurations: seen.len(),
            invariant_failures,
            decomposition,
        })
    }
}

/// Load the shipped program and run the safety check.
pub fn dekker_safety(horizon: usize, mutant: Option<&str>) -> Result<DekkerReport, DekkerError> {
    Dekker::load()?.safety(horizon, mutant)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_axioms_hold_exhaustively() {
        let d = Dekker::load().unwrap();
        assert_eq!(d.program.model.store_count(), 32);
        for r in d.check_axioms().unwrap() {
            assert!(r.holds, "{r:?}");
            assert!(r.instances >= 1);
        }
    }

    #[test]
    fn flip_swaps_injections() {
        let d = Dekker::load().unwrap();
        let (v, _) = d.program.eval("flip(inl *)").unwrap();
        assert_eq!(v, Value::inr(Value::Unit));
    }

    #[test]
    fn tests_are_pure_and_ordered() {
        let d = Dekker::load().unwrap();
        let v = Verifier::new(&d.program.model, DEFAULT_DEPTH);
        let (phi, psi, xi) = d.tests().unwrap();
        for t in [&phi, &psi, &xi] {
            assert!(v.is_pure(t).unwrap());
        }
        assert_eq!(v.implies(&phi, &xi).unwrap(), None);
        assert_eq!(v.implies(&xi, &psi).unwrap(), None);
    }

    #[test]
    fn unknown_mutants_are_rejected() {
        let d = Dekker::load().unwrap();
        assert!(matches!(
            d.composite(Some("x")),
            Err(DekkerError::UnknownMutant(_))
        ));
    }

    #[test]
    fn broken_axiom_is_reported() {
        let src = SOURCE.replace(
            "def get_flag(i: 2) : T 2 = if i then get(flag1) else get(flag2)",
            "def get_flag(i: 2) : T 2 = get(flag1)",
        );
        let d = Dekker::from_program(Program::load(&src).unwrap());
        let results = d.check_axioms().unwrap();
        let r = results.iter().find(|r| r.name == "flag_read").unwrap();
        assert!(!r.holds);
        assert!(r.counterexample.as_deref().unwrap().contains("i=ff"));
    }
}
