//! Properties of printing, parsing, substitution and typing on random terms.

use menu_core::gen::Gen;
use menu_core::model::Model;
use menu_core::syntax::{alpha_eq, desugar, name, parse_surface_term, Context, Name, Term, Type};
use menu_core::typecheck;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn locs() -> Vec<Name> {
    ["l1", "l2", "l3"].map(name).to_vec()
}

fn reparse(m: &Model, ctx: &Context, t: &Term, ty: &Type) -> Term {
    let src = t.to_string();
    let s = parse_surface_term(&src).unwrap_or_else(|e| panic!("{src}: {e}"));
    desugar(m.signature(), ctx, &s, Some(ty))
        .unwrap_or_else(|e| panic!("{src}: {e}"))
        .0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_programs_reparse(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let ty = g.first_order_type();
        let t = g.comp(&Context::new(), &ty, 4);
        let back = reparse(&m, &Context::new(), &t, &Type::t(ty));
        prop_assert!(alpha_eq(&t, &back), "{} reparsed as {}", t, back);
    }

    #[test]
    fn printed_processes_reparse(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let t = g.process(&Context::new(), &Type::bool(), 3);
        let back = reparse(&m, &Context::new(), &t, &Type::tnu(Type::bool()));
        prop_assert!(alpha_eq(&t, &back), "{} reparsed as {}", t, back);
    }

    #[test]
    fn substitution_free_variables(seed in any::<u64>()) {
        let mut g = Gen::new(seed, &locs());
        let x = name("xa");
        let ctx = Context::from_pairs([(x.clone(), Type::bool()), (name("ka"), Type::bool())]);
        let t = g.comp(&ctx, &Type::bool(), 4);
        let s = g.value(&Context::from_pairs([(name("ka"), Type::bool())]), &Type::bool(), 2);
        let mut expected: BTreeSet<Name> = t.free_vars().iter().filter(|y| **y != x).cloned().collect();
        if t.mentions_free("xa") {
            expected.extend(s.free_vars().iter().cloned());
        }
        let substituted = t.subst("xa", &s);
        prop_assert_eq!(substituted.free_vars(), &expected);
    }

    #[test]
    fn substitution_of_absent_variable_is_identity(seed in any::<u64>()) {
        let mut g = Gen::new(seed, &locs());
        let t = g.comp(&Context::new(), &Type::bool(), 4);
        prop_assert!(alpha_eq(&t.subst("absent", &Term::tt()), &t));
    }

    #[test]
    fn substitution_preserves_typing(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let a = g.first_order_type();
        let b = g.first_order_type();
        let outer = Context::from_pairs([(name("ka"), Type::bool())]);
        let t = g.comp(&outer.extend(&name("xa"), a.clone()), &b, 4);
        let s = g.value(&outer, &a, 2);
        typecheck::check(m.signature(), &outer, &t.subst("xa", &s), &Type::t(b)).unwrap();
    }

    #[test]
    fn generated_terms_have_their_type(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let ty = g.first_order_type();
        let t = g.comp(&Context::new(), &ty, 4);
        prop_assert_eq!(typecheck::infer(m.signature(), &Context::new(), &t).unwrap(), Type::t(ty));
    }

    #[test]
    fn renaming_a_binder_is_alpha_equivalent(seed in any::<u64>()) {
        let mut g = Gen::new(seed, &locs());
        let a = g.first_order_type();
        let p = g.comp(&Context::new(), &a, 3);
        let q = g.comp(&Context::from_pairs([(name("xa"), a)]), &Type::bool(), 3);
        let original = Term::bind(&name("xa"), p.clone(), q.clone());
        let renamed = Term::bind(&name("ya"), p.clone(), q.subst("xa", &Term::var("ya")));
        prop_assert!(alpha_eq(&original, &renamed));
        if q.mentions_free("xa") {
            prop_assert!(!alpha_eq(&original, &Term::bind(&name("ya"), p, q)));
        }
    }
}

#[test]
fn desugared_fixtures_use_only_primitives_and_signature_symbols() {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let mut files = vec![
        dir.join("programs/dekker.mnu"),
        dir.join("programs/laws.mnu"),
    ];
    for e in std::fs::read_dir(dir.join("tests/fixtures")).unwrap() {
        files.push(e.unwrap().path());
    }
    for f in files {
        let p = menu_core::program::Program::load(&std::fs::read_to_string(&f).unwrap()).unwrap();
        for d in &p.defs {
            for s in d.term.symbols() {
                assert!(
                    p.sig.lookup(&s).is_some(),
                    "{}: {} uses unknown symbol {s}",
                    f.display(),
                    d.name
                );
            }
            typecheck::check(&p.sig, &d.context(), &d.term, &d.ret).unwrap();
        }
    }
}
