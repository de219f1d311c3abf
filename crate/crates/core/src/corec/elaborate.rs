//! Elaboration of a guarded scheme into closed `init` terms.
//!
//! Pipeline per codomain group: normalise call arguments into the prefix,
//! aggregate the group into one equation over the coproduct of domains,
//! then solve that single equation by permuting, folding and guarding its
//! branches down to the binary form, which is solved directly.

use super::{validate_scheme, CorecDef, CorecError, CorecScheme};
use crate::corec::stdlib;
use crate::syntax::{case_n, inj, Name, NameSupply, Signature, Term, Type};
use crate::typecheck;
use serde::Serialize;
use std::fmt;

/// Which call-first permutation step (iv) uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SigmaChoice {
    /// Calls first, plain branches after, each group in original order.
    #[default]
    Stable,
    /// Calls first, plain branches after, each group reversed.
    Reversed,
}

#[derive(Clone, Debug, Default)]
pub struct ElabOptions {
    pub sigma: SigmaChoice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    /// Call arguments (and arguments needed by plain branches) were moved into the prefix.
    Absorb { def: String, branches: Vec<usize> },
    /// The equations were merged into one over the coproduct of their domains.
    Aggregate { defs: Vec<String>, width: usize },
    /// Branches were reordered so that calls come first.
    Permute { sigma: Vec<usize> },
    /// Several call branches were merged into one.
    Fold { calls: usize },
    /// Plain branches were combined into a single branch.
    HeadGuard { width: usize },
    /// One branch, which is a call: solved by coiteration of the prefix.
    SingleCall,
    /// Binary equation with a call and a plain branch: solved by coiteration
    /// over the seed type `A + T_nu B`.
    Construct,
    /// No calls at all: the solution is `tuo` of the right-hand side.
    NoCalls,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Absorb { def, branches } => {
                write!(f, "absorb arguments of {def} in branches {branches:?}")
            }
            TraceStep::Aggregate { defs, width } => {
                write!(
                    f,
                    "aggregate {} into one equation with {width} branches",
                    defs.join(", ")
                )
            }
            TraceStep::Permute { sigma } => write!(f, "permute branches {sigma:?}"),
            TraceStep::Fold { calls } => write!(f, "fold {calls} call branches"),
            TraceStep::HeadGuard { width } => write!(f, "combine {width} plain branches"),
            TraceStep::SingleCall => write!(f, "solve single call branch"),
            TraceStep::Construct => write!(f, "construct binary solution"),
            TraceStep::NoCalls => write!(f, "no calls: solution is tuo of the right-hand side"),
        }
    }
}

/// `f(arg) = term` with `term : T_nu cod` open over the scheme parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub name: Name,
    pub arg: Name,
    pub dom: Type,
    pub cod: Type,
    pub term: Term,
}

/// The shared aggregate `F(y) = body` of a group of two or more equations;
/// member `i` is `F(inj_i a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub name: Name,
    pub arg: Name,
    pub dom: Type,
    pub cod: Type,
    pub body: Term,
    pub members: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Elaboration {
    pub solutions: Vec<Solution>,
    pub aggregates: Vec<Aggregate>,
    pub trace: Vec<TraceStep>,
}

impl Elaboration {
    pub fn solution(&self, f: &str) -> Option<&Solution> {
        self.solutions.iter().find(|s| &*s.name == f)
    }
}

#[derive(Clone, Debug)]
struct Br {
    var: Name,
    ty: Type,
    call: bool,
    body: Term,
}

/// A single equation `out(F(arg)) = do z <- prefix; case z of ...` in which
/// every call is `cont F(x_j)`.
#[derive(Clone, Debug)]
struct Equation {
    arg: Name,
    dom: Type,
    cod: Type,
    prefix: Term,
    branches: Vec<Br>,
}

pub fn elaborate(
    scheme: &CorecScheme,
    sig: &Signature,
    opts: &ElabOptions,
) -> Result<Elaboration, CorecError> {
    validate_scheme(scheme, sig)?;
    let mut supply = scheme.supply();
    let mut trace = Vec::new();
    let mut solutions = Vec::new();
    let mut aggregates = Vec::new();
    let mut groups: Vec<(Type, Vec<&CorecDef>)> = Vec::new();
    for d in &scheme.defs {
        match groups.iter_mut().find(|(c, _)| *c == d.cod) {
            Some((_, g)) => g.push(d),
            None => groups.push((d.cod.clone(), vec![d])),
        }
    }
    for (cod, group) in groups {
        let k = group.len();
        let doms: Vec<Type> = group.iter().map(|d| d.dom.clone()).collect();
        let index = |f: &Name| {
            group
                .iter()
                .position(|d| d.name == *f)
                .expect("callee in group")
        };
        let mut normalised = Vec::new();
        for d in &group {
            normalised.push(absorb(
                scheme,
                d,
                k > 1,
                &doms,
                &index,
                &mut supply,
                &mut trace,
            ));
        }
        let eq = if k == 1 {
            let (prefix, branches) = normalised.pop().unwrap();
            let d = group[0];
            Equation {
                arg: d.arg.clone(),
                dom: d.dom.clone(),
                cod: cod.clone(),
                prefix,
                branches,
            }
        } else {
            let y = supply.fresh("y");
            let dom = Type::nsum(&doms);
            let mut comps = Vec::new();
            for (_, branches) in &normalised {
                comps.extend(
                    branches
                        .iter()
                        .map(|b| if b.call { dom.clone() } else { b.ty.clone() }),
                );
            }
            let mut arms = Vec::new();
            let mut branches = Vec::new();
            let mut offset = 0;
            for (d, (prefix, brs)) in group.iter().zip(normalised) {
                let z = supply.fresh("z");
                let tags = brs
                    .iter()
                    .enumerate()
                    .map(|(j, b)| {
                        let x = Term::var_n(&b.var);
                        let payload = if b.call {
                            tag_call(&b.body, &doms, &index)
                        } else {
                            x
                        };
                        (
                            b.var.clone(),
                            Term::ret(inj(offset + j + 1, &comps, payload)),
                        )
                    })
                    .collect();
                arms.push((
                    d.arg.clone(),
                    Term::bind(&z, prefix, case_n(Term::var_n(&z), tags, &mut supply)),
                ));
                offset += brs.len();
                for b in brs {
                    branches.push(if b.call {
                        Br {
                            ty: dom.clone(),
                            ..b
                        }
                    } else {
                        b
                    });
                }
            }
            trace.push(TraceStep::Aggregate {
                defs: group.iter().map(|d| d.name.to_string()).collect(),
                width: comps.len(),
            });
            let prefix = case_n(Term::var(&y), arms, &mut supply);
            Equation {
                arg: y,
                dom,
                cod: cod.clone(),
                prefix,
                branches,
            }
        };
        let body = solve(eq.clone(), opts, &mut supply, &mut trace);
        if k == 1 {
            let d = group[0];
            solutions.push(Solution {
                name: d.name.clone(),
                arg: d.arg.clone(),
                dom: d.dom.clone(),
                cod: cod.clone(),
                term: body,
            });
        } else {
            for (i, d) in group.iter().enumerate() {
                let term = body.subst(&eq.arg, &inj(i + 1, &doms, Term::var_n(&d.arg)));
                solutions.push(Solution {
                    name: d.name.clone(),
                    arg: d.arg.clone(),
                    dom: d.dom.clone(),
                    cod: cod.clone(),
                    term,
                });
            }
            let agg_name = supply.fresh(&format!("{}_agg", scheme.name));
            aggregates.push(Aggregate {
                name: agg_name,
                arg: eq.arg.clone(),
                dom: eq.dom.clone(),
                cod: cod.clone(),
                body,
                members: group.iter().map(|d| d.name.clone()).collect(),
            });
        }
    }
    solutions.sort_by_key(|s| scheme.defs.iter().position(|d| d.name == s.name));
    for s in &solutions {
        let ctx = scheme.params.extend(&s.arg, s.dom.clone());
        typecheck::check(sig, &ctx, &s.term, &Type::tnu(s.cod.clone())).map_err(|source| {
            CorecError::Type {
                def: s.name.clone(),
                source,
            }
        })?;
    }
    Ok(Elaboration {
        solutions,
        aggregates,
        trace,
    })
}

/// `cont f_m(x)` becomes the aggregate argument `inj_m x`.
fn tag_call(body: &Term, doms: &[Type], index: &dyn Fn(&Name) -> usize) -> Term {
    match call_parts(body) {
        Some((f, x)) => inj(index(&f) + 1, doms, x),
        None => unreachable!("call branch"),
    }
}

fn call_parts(body: &Term) -> Option<(Name, Term)> {
    use crate::syntax::TermKind::*;
    match body.kind() {
        Ret(inner) => match inner.kind() {
            Inl(app, _) => match app.kind() {
                App(f, e) => Some((f.clone(), e.clone())),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// Move call arguments into the prefix so every call becomes `cont f(x_j)`.
/// With `thread_arg`, plain branches that read the equation's argument get
/// it paired with their own payload, since aggregation puts the argument out
/// of their scope.
fn absorb(
    scheme: &CorecScheme,
    d: &CorecDef,
    thread_arg: bool,
    doms: &[Type],
    index: &dyn Fn(&Name) -> usize,
    supply: &mut NameSupply,
    trace: &mut Vec<TraceStep>,
) -> (Term, Vec<Br>) {
    let mut changed = Vec::new();
    let mut comps = Vec::new();
    let mut payloads = Vec::new();
    let mut branches = Vec::new();
    for (j, b) in d.branches.iter().enumerate() {
        let x = Term::var_n(&b.var);
        if let Some(call) = scheme.as_call(&b.body) {
            let m = index(&call.callee);
            let target_dom = doms[m].clone();
            if call.arg != x {
                changed.push(j + 1);
            }
            comps.push(target_dom.clone());
            payloads.push(call.arg.clone());
            let body = Term::ret(Term::inl(
                Term::app(&call.callee, x),
                Some(Type::sum(Type::tnu(d.cod.clone()), d.cod.clone())),
            ));
            branches.push(Br {
                var: b.var.clone(),
                ty: target_dom,
                call: true,
                body,
            });
        } else if thread_arg && b.var != d.arg && b.body.mentions_free(&d.arg) {
            changed.push(j + 1);
            let ty = Type::prod(d.dom.clone(), b.ty.clone());
            comps.push(ty.clone());
            payloads.push(Term::pair(Term::var_n(&d.arg), x));
            let u = supply.fresh("u");
            let map = [
                (d.arg.clone(), Term::fst(Term::var_n(&u))),
                (b.var.clone(), Term::snd(Term::var_n(&u))),
            ]
            .into_iter()
            .collect();
            branches.push(Br {
                var: u,
                ty,
                call: false,
                body: b.body.subst_many(&map),
            });
        } else {
            comps.push(b.ty.clone());
            payloads.push(x);
            branches.push(Br {
                var: b.var.clone(),
                ty: b.ty.clone(),
                call: false,
                body: b.body.clone(),
            });
        }
    }
    if changed.is_empty() {
        return (d.prefix.clone(), branches);
    }
    trace.push(TraceStep::Absorb {
        def: d.name.to_string(),
        branches: changed,
    });
    let z = supply.fresh("z");
    let arms = d
        .branches
        .iter()
        .zip(payloads)
        .enumerate()
        .map(|(j, (b, e))| (b.var.clone(), Term::ret(inj(j + 1, &comps, e))))
        .collect();
    let prefix = Term::bind(&z, d.prefix.clone(), case_n(Term::var_n(&z), arms, supply));
    (prefix, branches)
}

/// Reindex the prefix's coproduct: branch `j` goes to position `target[j]`
/// of `comps`.
fn retag(
    prefix: Term,
    branches: &[Br],
    target: &[usize],
    comps: &[Type],
    supply: &mut NameSupply,
) -> Term {
    let z = supply.fresh("z");
    let arms = branches
        .iter()
        .zip(target)
        .map(|(b, &t)| {
            (
                b.var.clone(),
                Term::ret(inj(t + 1, comps, Term::var_n(&b.var))),
            )
        })
        .collect();
    Term::bind(&z, prefix, case_n(Term::var_n(&z), arms, supply))
}

fn solve(
    mut eq: Equation,
    opts: &ElabOptions,
    supply: &mut NameSupply,
    trace: &mut Vec<TraceStep>,
) -> Term {
    let calls: Vec<usize> = (0..eq.branches.len())
        .filter(|&j| eq.branches[j].call)
        .collect();
    let plains: Vec<usize> = (0..eq.branches.len())
        .filter(|&j| !eq.branches[j].call)
        .collect();
    if calls.is_empty() {
        trace.push(TraceStep::NoCalls);
        let z = supply.fresh("z");
        let arms = eq
            .branches
            .iter()
            .map(|b| (b.var.clone(), b.body.clone()))
            .collect();
        let rhs = Term::bind(&z, eq.prefix, case_n(Term::var_n(&z), arms, supply));
        return stdlib::tuo_with(rhs, &eq.cod, supply);
    }

    let order: Vec<usize> = match opts.sigma {
        SigmaChoice::Stable => calls.iter().chain(&plains).copied().collect(),
        SigmaChoice::Reversed => calls
            .iter()
            .rev()
            .chain(plains.iter().rev())
            .copied()
            .collect(),
    };
    if order.iter().enumerate().any(|(i, &j)| i != j) {
        let mut target = vec![0; order.len()];
        for (pos, &j) in order.iter().enumerate() {
            target[j] = pos;
        }
        let comps: Vec<Type> = order.iter().map(|&j| eq.branches[j].ty.clone()).collect();
        eq.prefix = retag(eq.prefix, &eq.branches, &target, &comps, supply);
        eq.branches = order.iter().map(|&j| eq.branches[j].clone()).collect();
        trace.push(TraceStep::Permute {
            sigma: order.iter().map(|j| j + 1).collect(),
        });
    }

    let k = calls.len();
    if k > 1 {
        let n = eq.branches.len();
        let target: Vec<usize> = (0..n).map(|j| if j < k { 0 } else { j - k + 1 }).collect();
        let mut comps = vec![eq.dom.clone()];
        comps.extend(eq.branches[k..].iter().map(|b| b.ty.clone()));
        eq.prefix = retag(eq.prefix, &eq.branches, &target, &comps, supply);
        let x = supply.fresh("x");
        let merged = Br {
            var: x,
            ty: eq.dom.clone(),
            call: true,
            body: eq.branches[0].body.clone(),
        };
        let rest: Vec<Br> = eq.branches.drain(k..).collect();
        eq.branches = std::iter::once(merged).chain(rest).collect();
        trace.push(TraceStep::Fold { calls: k });
    }

    let seed_ty = Type::sum(eq.dom.clone(), Type::tnu(eq.cod.clone()));
    if eq.branches.len() == 1 {
        trace.push(TraceStep::SingleCall);
        let x = supply.fresh("x");
        let body = Term::bind(
            &x,
            eq.prefix,
            Term::ret(Term::inl(
                Term::var_n(&x),
                Some(Type::sum(eq.dom.clone(), eq.cod.clone())),
            )),
        );
        return Term::init(&eq.arg, Term::var_n(&eq.arg), body);
    }

    let (x2, p2) = if eq.branches.len() > 2 {
        trace.push(TraceStep::HeadGuard {
            width: eq.branches.len() - 1,
        });
        let w = supply.fresh("w");
        let arms = eq.branches[1..]
            .iter()
            .map(|b| (b.var.clone(), b.body.clone()))
            .collect();
        (w.clone(), case_n(Term::var_n(&w), arms, supply))
    } else {
        (eq.branches[1].var.clone(), eq.branches[1].body.clone())
    };
    trace.push(TraceStep::Construct);
    let x1 = eq.branches[0].var.clone();
    let layer_ty = Type::sum(seed_ty.clone(), eq.cod.clone());
    let z = supply.fresh("z");
    let u = supply.fresh("u");
    let v = supply.fresh("v");
    let r = supply.fresh("r");
    let b = supply.fresh("b");
    let again = |t: Term| Term::ret(Term::inl(t, Some(layer_ty.clone())));
    let done = |t: Term| Term::ret(Term::inr(t, Some(layer_ty.clone())));
    let resume = |t: Term| again(Term::inr(t, Some(seed_ty.clone())));
    let casenext = |p: Term| {
        Term::bind(
            &v,
            p,
            Term::case(
                Term::var_n(&v),
                &r,
                resume(Term::var_n(&r)),
                &b,
                done(Term::var_n(&b)),
            ),
        )
    };
    let step = Term::bind(
        &u,
        eq.prefix,
        Term::case(
            Term::var_n(&u),
            &x1,
            again(Term::inl(Term::var_n(&x1), Some(seed_ty.clone()))),
            &x2,
            casenext(p2),
        ),
    );
    let h = Term::case(
        Term::var_n(&z),
        &eq.arg,
        step,
        &r,
        casenext(Term::out(Term::var_n(&r))),
    );
    Term::init(&z, Term::inl(Term::var_n(&eq.arg), Some(seed_ty)), h)
}
