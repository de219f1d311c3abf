//! Shared helpers for integration tests: fixture loading and observation
//! of interpreter results in the oracle's canonical form.

#![allow(dead_code)]

use crate::oracle::{Obs, Oracle, Store};
use menu_core::model::{Model, StoreId, Value};
use menu_core::program::Program;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// Every fixture program, sorted by file name.
pub fn fixtures() -> Vec<(String, Program)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .expect("fixture directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "mnu"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let src = std::fs::read_to_string(&p).expect("readable fixture");
            let prog = Program::load(&src).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p.file_name().unwrap().to_string_lossy().into_owned(), prog)
        })
        .collect()
}

/// The parameterless definitions of a program.
pub fn corpus(p: &Program) -> Vec<String> {
    p.defs
        .iter()
        .filter(|d| d.params.is_empty())
        .map(|d| d.name.to_string())
        .collect()
}

pub fn oracle_for(p: &Program) -> Oracle {
    let locations = p
        .model
        .location_names()
        .iter()
        .map(|l| l.to_string())
        .collect();
    let defs: BTreeMap<_, _> = p
        .defs
        .iter()
        .map(|d| {
            (
                d.name.to_string(),
                (
                    d.params.iter().map(|(x, _)| x.clone()).collect(),
                    d.term.clone(),
                ),
            )
        })
        .collect();
    Oracle::new(locations, defs)
}

pub fn store_vec(m: &Model, s: StoreId) -> Store {
    (0..m.location_names().len())
        .map(|i| m.read(s, i).as_bool().expect("Boolean location"))
        .collect()
}

pub fn store_id(m: &Model, s: &Store) -> StoreId {
    let mut id = 0;
    for (i, b) in s.iter().enumerate() {
        let v = if *b { Value::tt() } else { Value::ff() };
        id = m.write(id, i, &v).expect("Boolean location");
    }
    id
}

/// The interpreter's counterpart of `Oracle::observe`.
pub fn observe(m: &Model, v: &Value, s: StoreId, depth: u32) -> Obs {
    match v {
        Value::Unit => Obs::Unit,
        Value::Pair(p) => Obs::Pair(
            Box::new(observe(m, &p.0, s, depth)),
            Box::new(observe(m, &p.1, s, depth)),
        ),
        Value::Inl(a) => Obs::Inl(Box::new(observe(m, a, s, depth))),
        Value::Inr(a) => Obs::Inr(Box::new(observe(m, a, s, depth))),
        Value::Comp(c) => Obs::Outcomes(
            m.run(c, s)
                .expect("run")
                .iter()
                .map(|(t, x)| (store_vec(m, *t), observe(m, x, *t, depth)))
                .collect(),
        ),
        Value::Proc(p) => {
            if depth == 0 {
                return Obs::Truncated;
            }
            let layer = m.step(p).expect("step");
            Obs::Outcomes(
                m.run(&layer, s)
                    .expect("run")
                    .iter()
                    .map(|(t, x)| (store_vec(m, *t), observe(m, x, *t, depth - 1)))
                    .collect(),
            )
        }
        other => panic!("cannot observe {other:?}"),
    }
}
