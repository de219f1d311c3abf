//! Properties of the model, the process layer, elaboration and verification
//! on random programs.

use menu_core::corec::check::{check_equations, install, sample_values};
use menu_core::corec::{elaborate, stdlib, ElabOptions, SigmaChoice};
use menu_core::gen::Gen;
use menu_core::model::{Env, Model, Value};
use menu_core::syntax::{name, Context, Name, Term, Type};
use menu_core::verify::Verifier;
use proptest::prelude::*;

fn locs() -> Vec<Name> {
    ["l1", "l2", "l3"].map(name).to_vec()
}

fn comp(m: &Model, t: &Term) -> menu_core::model::Comp {
    m.eval_comp(&Env::new(), t).unwrap()
}

fn proc(m: &Model, t: &Term) -> menu_core::model::Proc {
    m.eval_proc(&Env::new(), t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn strength_is_semi_additive(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let (a, b) = (g.first_order_type(), g.first_order_type());
        let c0 = g.comp(&Context::new(), &b, 2);
        let (p, q) = (g.comp(&Context::new(), &a, 3), g.comp(&Context::new(), &a, 3));
        let tag = |t: Term| {
            Term::bind(&name("va"), c0.clone(), Term::bind(&name("xa"), t, Term::ret(Term::pair(Term::var("va"), Term::var("xa")))))
        };
        let lhs = tag(Term::plus(p.clone(), q.clone()));
        let rhs = Term::bind(
            &name("va"),
            c0.clone(),
            Term::plus(
                Term::bind(&name("xa"), p, Term::ret(Term::pair(Term::var("va"), Term::var("xa")))),
                Term::bind(&name("xa"), q, Term::ret(Term::pair(Term::var("va"), Term::var("xa")))),
            ),
        );
        prop_assert!(m.eq_t(&comp(&m, &lhs), &comp(&m, &rhs)).unwrap());
    }

    #[test]
    fn closure_capture_agrees_with_direct_binding(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let (a, b) = (g.first_order_type(), g.first_order_type());
        let p = g.comp(&Context::new(), &a, 3);
        let q = g.comp(&Context::from_pairs([(name("xa"), a)]), &b, 3);
        let direct = m.bind_t(&comp(&m, &p), m.lam(&Env::new(), &name("xa"), &q).unwrap());
        prop_assert!(m.eq_t(&direct, &comp(&m, &Term::bind(&name("xa"), p, q))).unwrap());
    }

    #[test]
    fn equality_is_an_equivalence(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let ty = g.first_order_type();
        let [p, q, r] = [0, 1, 2].map(|_| comp(&m, &g.comp(&Context::new(), &ty, 2)));
        prop_assert!(m.eq_t(&p, &p).unwrap());
        prop_assert_eq!(m.eq_t(&p, &q).unwrap(), m.eq_t(&q, &p).unwrap());
        if m.eq_t(&p, &q).unwrap() && m.eq_t(&q, &r).unwrap() {
            prop_assert!(m.eq_t(&p, &r).unwrap());
        }
    }

    #[test]
    fn runs_are_sets_and_deterministic(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let mut g = Gen::new(seed, &locs());
        let ty = g.first_order_type();
        let t = g.comp(&Context::new(), &ty, 4);
        let (c1, c2) = (comp(&m, &t), comp(&m, &t));
        for s in m.stores() {
            let out = m.run(&c1, s).unwrap();
            prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(out, m.run(&c2, s).unwrap());
        }
    }

    #[test]
    fn bisimilarity_is_monotone_in_depth(seed in any::<u64>()) {
        let m = Model::booleans(2);
        let mut g = Gen::new(seed, &locs()[..2]);
        let a = Type::bool();
        let p = proc(&m, &g.process(&Context::new(), &a, 3));
        let q = proc(&m, &g.process(&Context::new(), &a, 3));
        for k in 0..6 {
            if m.bisim(&p, &q, k + 1).unwrap() {
                prop_assert!(m.bisim(&p, &q, k).unwrap());
            }
        }
    }

    #[test]
    fn exec_fuses_the_first_two_layers(seed in any::<u64>()) {
        let m = Model::booleans(2);
        let mut g = Gen::new(seed, &locs()[..2]);
        let a = Type::bool();
        let p = g.process(&Context::new(), &a, 3);
        let fused = stdlib::exec(p.clone(), &a);
        let by_hand = Term::bind(
            &name("za"),
            Term::out(p.clone()),
            Term::case(Term::var("za"), &name("ra"), Term::out(Term::var("ra")), &name("xa"), stdlib::stop(Term::var("xa"), &a)),
        );
        let layer = m.out_r(&proc(&m, &fused)).unwrap();
        prop_assert!(m.eq_comp(&layer, &comp(&m, &by_hand), 6).unwrap());
        let native = m.out_r(&m.exec_r(&proc(&m, &p)).unwrap()).unwrap();
        prop_assert!(m.eq_comp(&layer, &native, 6).unwrap());
    }

    #[test]
    fn elaborated_solutions_satisfy_their_equations(seed in any::<u64>()) {
        let m = Model::booleans(2);
        let mut g = Gen::new(seed, &locs()[..2]);
        if let Ok(scheme) = g.scheme(m.signature(), 2) {
            let elab = elaborate(&scheme, m.signature(), &ElabOptions::default()).unwrap();
            install(&m, &elab, &Env::new()).unwrap();
            let bad = check_equations(&m, &scheme, &Env::new(), 6, 6).unwrap();
            prop_assert!(bad.is_empty(), "{:?}", bad);
        }
    }

    #[test]
    fn solutions_do_not_depend_on_the_branch_order(seed in any::<u64>()) {
        let m = Model::booleans(2);
        let mut g = Gen::new(seed, &locs()[..2]);
        if let Ok(scheme) = g.scheme(m.signature(), 2) {
            let a = elaborate(&scheme, m.signature(), &ElabOptions { sigma: SigmaChoice::Stable }).unwrap();
            let b = elaborate(&scheme, m.signature(), &ElabOptions { sigma: SigmaChoice::Reversed }).unwrap();
            for s in &a.solutions {
                let t = b.solution(&s.name).unwrap();
                for v in sample_values(&m, &s.dom, 6).unwrap() {
                    let p = m.eval_proc(&Env::new().bind(&s.arg, v.clone()), &s.term).unwrap();
                    let q = m.eval_proc(&Env::new().bind(&t.arg, v), &t.term).unwrap();
                    prop_assert!(m.bisim(&p, &q, 6).unwrap());
                }
            }
        }
    }

    #[test]
    fn interleaving_is_symmetric_up_to_swap(seed in any::<u64>()) {
        let m = Model::booleans(2);
        let sig = m.signature().clone();
        let mut g = Gen::new(seed, &locs()[..2]);
        let (a, b) = (Type::bool(), Type::Unit);
        let p = g.process(&Context::new(), &a, 2);
        let q = g.process(&Context::new(), &b, 2);
        let ab = Type::prod(a.clone(), b.clone());
        let ba = Type::prod(b.clone(), a.clone());
        let il = stdlib::interleave(&sig, p.clone(), &a, q.clone(), &b).unwrap();
        let back = stdlib::ret_nu(Term::pair(Term::snd(Term::var("za")), Term::fst(Term::var("za"))), &ba);
        let swapped = stdlib::do_nu(&sig, &Context::new(), &name("za"), il, &ab, &back, &ba).unwrap();
        let mirrored = stdlib::interleave(&sig, q, &b, p, &a).unwrap();
        prop_assert!(m.bisim(&proc(&m, &swapped), &proc(&m, &mirrored), 5).unwrap());
    }

    #[test]
    fn filtering_only_removes_outcomes(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let v = Verifier::new(&m, 6);
        let mut g = Gen::new(seed, &locs());
        let (phi, psi) = (comp(&m, &g.test(2)), comp(&m, &g.test(2)));
        let ty = g.first_order_type();
        let p = comp(&m, &g.comp(&Context::new(), &ty, 3));
        let f = v.filter(&p, &phi, &psi).unwrap();
        for s in m.stores() {
            let all = m.run(&p, s).unwrap();
            for o in m.run(&f, s).unwrap().iter() {
                prop_assert!(all.contains(o));
            }
        }
        let (filter, tuple) = v.encodings(&phi, &p, &psi).unwrap();
        prop_assert_eq!(filter, tuple);
    }

    #[test]
    fn tests_are_pure_and_closed_under_conjunction(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let v = Verifier::new(&m, 6);
        let mut g = Gen::new(seed, &locs());
        let (t1, t2) = (g.test(2), g.test(2));
        prop_assert!(v.is_pure(&comp(&m, &t1)).unwrap());
        let both = Term::bind(
            &name("ia"),
            t1,
            Term::bind(&name("ib"), t2, Term::ret(Term::app("and", Term::pair(Term::var("ia"), Term::var("ib"))))),
        );
        prop_assert!(v.is_pure(&comp(&m, &both)).unwrap());
    }

    #[test]
    fn false_precondition_makes_every_triple_valid(seed in any::<u64>()) {
        let m = Model::booleans(3);
        let v = Verifier::new(&m, 6);
        let mut g = Gen::new(seed, &locs());
        let psi = comp(&m, &g.test(2));
        let ty = g.first_order_type();
        let p = comp(&m, &g.comp(&Context::new(), &ty, 3));
        prop_assert!(v.hoare(&m.unit_t(Value::ff()), &p, &psi).unwrap());
    }
}

#[test]
fn effects_do_not_commute_in_general() {
    let m = Model::booleans(1);
    let p = Term::app("set.l1", Term::tt());
    let q = Term::app("set.l1", Term::ff());
    let pq = Term::bind(&name("_"), p.clone(), q.clone());
    let qp = Term::bind(&name("_"), q, p);
    assert!(!m.eq_t(&comp(&m, &pq), &comp(&m, &qp)).unwrap());
}
