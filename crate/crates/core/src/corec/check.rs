//! Semantic check that elaborated solutions satisfy their source equations.

use super::{CorecScheme, Elaboration};
use crate::model::{Denotation, Env, Model, ModelError, Value};
use crate::syntax::{Context, Term, Type};

/// A representative set of values of `ty`: the full carrier for
/// first-order types (capped at `cap`), and a handful of small computations
/// and processes otherwise.
pub fn sample_values(m: &Model, ty: &Type, cap: usize) -> Result<Vec<Value>, ModelError> {
    let mut out = match ty {
        Type::Unit | Type::Base(_) => m.enumerate(ty)?,
        Type::Sum(a, b) => {
            let mut v: Vec<Value> = sample_values(m, a, cap)?
                .into_iter()
                .map(Value::inl)
                .collect();
            v.extend(sample_values(m, b, cap)?.into_iter().map(Value::inr));
            v
        }
        Type::Prod(a, b) => {
            let bs = sample_values(m, b, cap)?;
            let mut v = Vec::new();
            for x in sample_values(m, a, cap)? {
                for y in &bs {
                    v.push(Value::pair(x.clone(), y.clone()));
                }
            }
            v
        }
        Type::T(b) => {
            let vs = sample_values(m, b, 2)?;
            let mut v: Vec<Value> = vs
                .iter()
                .map(|x| Value::Comp(m.unit_t(x.clone())))
                .collect();
            v.push(Value::Comp(m.nil_t()));
            if vs.len() > 1 {
                v.push(Value::Comp(
                    m.plus_t(&m.unit_t(vs[0].clone()), &m.unit_t(vs[1].clone())),
                ));
            }
            if let Some(loc) = readable(m, b) {
                v.push(Value::Comp(m.get_t(loc)));
            }
            v
        }
        Type::TNu(b) => {
            let vs = sample_values(m, b, 2)?;
            let mut v = vec![Value::Proc(m.nil_nu())];
            for x in &vs {
                v.push(Value::Proc(m.ret_nu(x.clone())));
            }
            if let Some(x) = vs.first() {
                let later = m.tuo_r(&m.unit_t(Value::inl(Value::Proc(m.ret_nu(x.clone())))));
                v.push(Value::Proc(later));
                if m.store_count() > 1 {
                    let first = m.read(0, 0);
                    let second = m
                        .enumerate(m.location_type(0))?
                        .last()
                        .cloned()
                        .unwrap_or(first);
                    let next = Value::inl(Value::Proc(m.ret_nu(x.clone())));
                    let write = m.bind_t(
                        &m.set_t(0, second),
                        Model::native(move |m, _| Ok(m.unit_t(next.clone()))),
                    );
                    v.push(Value::Proc(m.tuo_r(&write)));
                }
            }
            if vs.len() > 1 {
                v.push(Value::Proc(
                    m.plus_nu(&m.ret_nu(vs[0].clone()), &m.ret_nu(vs[1].clone()))?,
                ));
            }
            if let Some(loc) = readable(m, b) {
                v.push(Value::Proc(m.step_nu(&m.get_t(loc))));
            }
            v
        }
    };
    out.truncate(cap.max(1));
    Ok(out)
}

fn readable(m: &Model, ty: &Type) -> Option<usize> {
    (0..m.location_names().len()).find(|&i| m.location_type(i) == ty)
}

/// Environments covering samples of every parameter in `ctx`.
pub fn sample_envs(m: &Model, ctx: &Context, cap: usize) -> Result<Vec<Env>, ModelError> {
    let mut envs = vec![Env::new()];
    for (x, ty) in ctx.entries() {
        let vals = sample_values(m, ty, cap)?;
        let mut next = Vec::new();
        for e in &envs {
            for v in &vals {
                next.push(e.bind(x, v.clone()));
            }
        }
        next.truncate(cap.max(1));
        envs = next;
    }
    Ok(envs)
}

/// A point where a solution and its equation disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionMismatch {
    pub def: String,
    pub arg: String,
    pub depth: u32,
}

/// Install the solutions as denotations of the scheme's symbols, closed over
/// `params`. The model must not already define them.
pub fn install(m: &Model, elab: &Elaboration, params: &Env) -> Result<(), ModelError> {
    for s in &elab.solutions {
        m.define(
            &s.name,
            Denotation::Def {
                params: vec![s.arg.clone()],
                body: s.term.clone(),
                env: params.clone(),
            },
        )?;
    }
    Ok(())
}

/// For every sampled argument, compare `out(f(a))` with the right-hand side
/// of `f`'s equation (with the scheme symbols read as the installed
/// solutions) at every depth `1..=depth`.
pub fn check_equations(
    m: &Model,
    scheme: &CorecScheme,
    params: &Env,
    depth: u32,
    cap: usize,
) -> Result<Vec<SolutionMismatch>, ModelError> {
    let mut supply = scheme.supply();
    let mut bad = Vec::new();
    for d in &scheme.defs {
        let rhs = d.rhs(&mut supply);
        let lhs = Term::out(Term::app(&d.name, Term::var_n(&d.arg)));
        for a in sample_values(m, &d.dom, cap)? {
            let env = params.bind(&d.arg, a.clone());
            let l = m.eval_comp(&env, &lhs)?;
            let r = m.eval_comp(&env, &rhs)?;
            for k in 1..=depth {
                if !m.eq_comp(&l, &r, k)? {
                    bad.push(SolutionMismatch {
                        def: d.name.to_string(),
                        arg: m.show(&a),
                        depth: k,
                    });
                    break;
                }
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corec::{elaborate, stdlib, ElabOptions};
    use crate::model::{Model, ModelConfig};
    use crate::syntax::{name, Signature};

    fn model() -> Model {
        Model::new(Signature::with_prelude(), ModelConfig::booleans(2)).unwrap()
    }

    #[test]
    fn do_nu_solution_satisfies_its_equation() {
        let m = model();
        let x = name("x");
        let body = stdlib::ret_nu(Term::app("not", Term::var("x")), &Type::bool());
        let scheme = stdlib::do_nu_scheme(&Context::new(), &x, &Type::bool(), &body, &Type::bool());
        let elab = elaborate(&scheme, m.signature(), &ElabOptions::default()).unwrap();
        install(&m, &elab, &Env::new()).unwrap();
        let bad = check_equations(&m, &scheme, &Env::new(), 6, 12).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn samples_of_processes_include_effects() {
        let m = model();
        let vals = sample_values(&m, &Type::tnu(Type::bool()), 12).unwrap();
        assert!(vals.len() >= 5);
    }

    fn surface(m: &Model, ctx: &Context, src: &str) -> Term {
        let s = crate::syntax::parse_surface_term(src).unwrap();
        crate::syntax::desugar(m.signature(), ctx, &s, None)
            .unwrap()
            .0
    }

    #[test]
    fn loop_scheme_solutions_satisfy_all_four_equations() {
        let m = model();
        let x = name("x");
        let ctx = Context::from_pairs([(x.clone(), Type::bool())]);
        let guard = surface(&m, &ctx, "get(l1)");
        let body = surface(&m, &ctx, "step(do _ <- set(l1, not(x)); ret not(x))");
        let scheme = stdlib::loop_scheme(&Context::new(), &x, &Type::bool(), &guard, &body);
        let elab = elaborate(&scheme, m.signature(), &ElabOptions::default()).unwrap();
        assert_eq!(elab.solutions.len(), 4);
        install(&m, &elab, &Env::new()).unwrap();
        let bad = check_equations(&m, &scheme, &Env::new(), 5, 12).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn interleave_solution_satisfies_its_equation() {
        let m = model();
        let scheme = stdlib::interleave_scheme(m.signature(), &Type::bool(), &Type::Unit).unwrap();
        let elab = elaborate(&scheme, m.signature(), &ElabOptions::default()).unwrap();
        install(&m, &elab, &Env::new()).unwrap();
        let bad = check_equations(&m, &scheme, &Env::new(), 4, 16).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn wrong_solution_is_caught() {
        let m = model();
        let x = name("x");
        let body = stdlib::ret_nu(Term::app("not", Term::var("x")), &Type::bool());
        let scheme = stdlib::do_nu_scheme(&Context::new(), &x, &Type::bool(), &body, &Type::bool());
        let w = scheme.defs[0].arg.clone();
        m.define(
            "do_nu",
            Denotation::Def {
                params: vec![w.clone()],
                body: Term::var_n(&w),
                env: Env::new(),
            },
        )
        .unwrap();
        let bad = check_equations(&m, &scheme, &Env::new(), 4, 12).unwrap();
        assert!(!bad.is_empty());
    }
}
