//! Derived process combinators, built as primitive terms. Those defined by a
//! corecursive scheme are produced by elaborating that scheme.

use super::{elaborate, Branch, CorecDef, CorecError, CorecScheme, ElabOptions};
use crate::syntax::{name, Context, Name, NameSupply, Signature, Term, Type};

fn supply_for(terms: &[&Term], ctx: &Context) -> NameSupply {
    let mut s = NameSupply::avoiding(ctx.names());
    for t in terms {
        s.avoid_term(t);
    }
    s
}

/// `T (T_nu a + a)`, the layer type of a process returning `a`.
pub fn layer(a: &Type) -> Type {
    Type::t(Type::sum(Type::tnu(a.clone()), a.clone()))
}

/// `cont p : T (T_nu a + a)`.
pub fn cont(p: Term, a: &Type) -> Term {
    Term::ret(Term::inl(
        p,
        Some(Type::sum(Type::tnu(a.clone()), a.clone())),
    ))
}

/// `stop v : T (T_nu a + a)`.
pub fn stop(v: Term, a: &Type) -> Term {
    Term::ret(Term::inr(
        v,
        Some(Type::sum(Type::tnu(a.clone()), a.clone())),
    ))
}

/// `tuo t = init q := t in casenext q of rest y -> cont (out y) | done x -> stop x`
/// for `t : T (T_nu a + a)`.
pub fn tuo_with(t: Term, a: &Type, supply: &mut NameSupply) -> Term {
    let state = layer(a);
    let lay = Type::sum(state, a.clone());
    let q = supply.fresh("q");
    let v = supply.fresh("v");
    let y = supply.fresh("y");
    let x = supply.fresh("x");
    let body = Term::bind(
        &v,
        Term::var_n(&q),
        Term::case(
            Term::var_n(&v),
            &y,
            Term::ret(Term::inl(Term::out(Term::var_n(&y)), Some(lay.clone()))),
            &x,
            Term::ret(Term::inr(Term::var_n(&x), Some(lay))),
        ),
    );
    Term::init(&q, t, body)
}

pub fn tuo(t: Term, a: &Type) -> Term {
    let mut s = supply_for(&[&t], &Context::new());
    tuo_with(t, a, &mut s)
}

/// `ret_nu p = tuo (stop p)`.
pub fn ret_nu(p: Term, a: &Type) -> Term {
    tuo(stop(p, a), a)
}

/// `nil_nu = tuo nil`.
pub fn nil_nu(a: &Type) -> Term {
    tuo(Term::nil(Some(layer(a))), a)
}

/// `p <+> q = tuo (out p + out q)`.
pub fn plus_nu(p: Term, q: Term, a: &Type) -> Term {
    tuo(Term::plus(Term::out(p), Term::out(q)), a)
}

/// The one-step process `step p = tuo (do x <- p; stop x)` for `p : T a`.
pub fn step(p: Term, a: &Type) -> Term {
    let mut s = supply_for(&[&p], &Context::new());
    let x = s.fresh("x");
    let t = Term::bind(&x, p, stop(Term::var_n(&x), a));
    tuo_with(t, a, &mut s)
}

/// `exec p = tuo (casenext out p of rest x -> out x | done x -> stop x)`:
/// the first two layers of `p` fused into one.
pub fn exec(p: Term, a: &Type) -> Term {
    let mut s = supply_for(&[&p], &Context::new());
    let v = s.fresh("v");
    let r = s.fresh("r");
    let x = s.fresh("x");
    let t = Term::bind(
        &v,
        Term::out(p),
        Term::case(
            Term::var_n(&v),
            &r,
            Term::out(Term::var_n(&r)),
            &x,
            stop(Term::var_n(&x), a),
        ),
    );
    tuo_with(t, a, &mut s)
}

/// `if_nu b p q = tuo (do z <- b; if z then cont p else cont q)`.
pub fn if_nu(b: Term, p: Term, q: Term, a: &Type) -> Term {
    let mut s = supply_for(&[&b, &p, &q], &Context::new());
    let z = s.fresh("z");
    let u = s.fresh("_");
    let t = Term::bind(
        &z,
        b,
        Term::case(Term::var_n(&z), &u, cont(p, a), &u, cont(q, a)),
    );
    tuo_with(t, a, &mut s)
}

/// `not` on a boolean test, written without signature symbols.
pub fn negate(b: Term) -> Term {
    let mut s = supply_for(&[&b], &Context::new());
    let v = s.fresh("v");
    let u = s.fresh("_");
    Term::bind(
        &v,
        b,
        Term::case(
            Term::var_n(&v),
            &u,
            Term::ret(Term::ff()),
            &u,
            Term::ret(Term::tt()),
        ),
    )
}

/// The context entries for the free variables of `terms`, excluding `bound`.
fn params_for(ctx: &Context, terms: &[&Term], bound: &[&Name]) -> Context {
    let mut used = std::collections::BTreeSet::new();
    for t in terms {
        used.extend(t.free_vars().iter().cloned());
    }
    for b in bound {
        used.remove(*b);
    }
    Context::from_pairs(
        ctx.entries()
            .iter()
            .filter(|(x, _)| used.contains(x))
            .cloned(),
    )
}

/// The scheme `out(f(w)) = casenext out w of rest r -> cont f(r) | done x -> out q`
/// defining `do_nu x <- w; q`. Returns the scheme and the name of `f`.
pub fn do_nu_scheme(ctx: &Context, x: &Name, a: &Type, q: &Term, b: &Type) -> CorecScheme {
    let params = params_for(ctx, &[q], &[x]);
    let mut s = supply_for(&[q], &params);
    s.avoid(x);
    let w = s.fresh("w");
    let r = s.fresh("r");
    let f = name("do_nu");
    let def = CorecDef {
        name: f.clone(),
        arg: w.clone(),
        dom: Type::tnu(a.clone()),
        cod: b.clone(),
        prefix: Term::out(Term::var_n(&w)),
        branches: vec![
            Branch {
                var: r.clone(),
                ty: Type::tnu(a.clone()),
                body: cont(Term::app(&f, Term::var_n(&r)), b),
            },
            Branch {
                var: x.clone(),
                ty: a.clone(),
                body: Term::out(q.clone()),
            },
        ],
    };
    CorecScheme {
        name: name("do_nu"),
        params,
        defs: vec![def],
    }
}

fn solve_one(
    scheme: &CorecScheme,
    sig: &Signature,
    f: &str,
    arg: Term,
) -> Result<Term, CorecError> {
    let sig = scheme_sig(sig, scheme);
    let el = elaborate(scheme, &sig, &ElabOptions::default())?;
    let sol = el.solution(f).expect("scheme defines the symbol");
    Ok(sol.term.subst(&sol.arg, &arg))
}

/// Scheme symbols live only inside the scheme; keep user symbols of the
/// same name out of the way during elaboration.
fn scheme_sig(sig: &Signature, scheme: &CorecScheme) -> Signature {
    let mut s = sig.clone();
    for d in &scheme.defs {
        s.functions.remove(&d.name);
    }
    s
}

/// `do_nu x <- p; q` for `p : T_nu a` and `q : T_nu b`.
pub fn do_nu(
    sig: &Signature,
    ctx: &Context,
    x: &Name,
    p: Term,
    a: &Type,
    q: &Term,
    b: &Type,
) -> Result<Term, CorecError> {
    let scheme = do_nu_scheme(ctx, x, a, q, b);
    solve_one(&scheme, sig, "do_nu", p)
}

/// `seq x <- p; q = do_nu x <- p; tuo (cont q)`.
pub fn seq(
    sig: &Signature,
    ctx: &Context,
    x: &Name,
    p: Term,
    a: &Type,
    q: &Term,
    b: &Type,
) -> Result<Term, CorecError> {
    let delayed = tuo(cont(q.clone(), b), b);
    do_nu(sig, ctx, x, p, a, &delayed, b)
}

/// The four loop functions `W^b, U^{not b}, W^{not b}, U^b` for the loop
/// variable `x : a`, guard `b : T 2` and body `q : T_nu a`:
///
/// ```text
/// out(W^b(p))  = do v <- b[p/x]; if v then cont U^{not b}(q[p/x]) else stop p
/// out(U^b(r))  = casenext out r of rest z -> cont U^b(z) | done y -> cont W^{not b}(y)
/// ```
pub fn loop_scheme(ctx: &Context, x: &Name, a: &Type, guard: &Term, body: &Term) -> CorecScheme {
    let params = params_for(ctx, &[guard, body], &[x]);
    let mut s = supply_for(&[guard, body], &params);
    s.avoid(x);
    let [w_b, u_nb, w_nb, u_b] = ["while", "until_not", "while_not", "until"].map(name);
    let mut w_def = |f: &Name, g: Term, callee: &Name| {
        let p = s.fresh("p");
        let u = s.fresh("_");
        let pv = Term::var_n(&p);
        CorecDef {
            name: f.clone(),
            arg: p.clone(),
            dom: a.clone(),
            cod: a.clone(),
            prefix: g.subst(x, &pv),
            branches: vec![
                Branch {
                    var: u.clone(),
                    ty: Type::Unit,
                    body: cont(Term::app(callee, body.subst(x, &pv)), a),
                },
                Branch {
                    var: u,
                    ty: Type::Unit,
                    body: stop(pv, a),
                },
            ],
        }
    };
    let w1 = w_def(&w_b, guard.clone(), &u_nb);
    let w2 = w_def(&w_nb, negate(guard.clone()), &u_b);
    let mut u_def = |f: &Name, resume: &Name| {
        let r = s.fresh("r");
        let z = s.fresh("z");
        let y = s.fresh("y");
        CorecDef {
            name: f.clone(),
            arg: r.clone(),
            dom: Type::tnu(a.clone()),
            cod: a.clone(),
            prefix: Term::out(Term::var_n(&r)),
            branches: vec![
                Branch {
                    var: z.clone(),
                    ty: Type::tnu(a.clone()),
                    body: cont(Term::app(f, Term::var_n(&z)), a),
                },
                Branch {
                    var: y.clone(),
                    ty: a.clone(),
                    body: cont(Term::app(resume, Term::var_n(&y)), a),
                },
            ],
        }
    };
    let u1 = u_def(&u_nb, &w_b);
    let u2 = u_def(&u_b, &w_nb);
    CorecScheme {
        name: name("loop"),
        params,
        defs: vec![w1, u1, w2, u2],
    }
}

/// `while (x := p) b { q } = W^b(p)`.
pub fn while_loop(
    sig: &Signature,
    ctx: &Context,
    x: &Name,
    p: Term,
    a: &Type,
    guard: &Term,
    body: &Term,
) -> Result<Term, CorecError> {
    let scheme = loop_scheme(ctx, x, a, guard, body);
    solve_one(&scheme, sig, "while", p)
}

/// `repeat (x := p) { q } until b = U^b(q[p/x])`.
pub fn repeat_until(
    sig: &Signature,
    ctx: &Context,
    x: &Name,
    p: Term,
    a: &Type,
    body: &Term,
    guard: &Term,
) -> Result<Term, CorecError> {
    let scheme = loop_scheme(ctx, x, a, guard, body);
    solve_one(&scheme, sig, "until", body.subst(x, &p))
}

/// `await b = while (not b) { ret_nu * }`.
pub fn await_(sig: &Signature, ctx: &Context, b: &Term) -> Result<Term, CorecError> {
    let mut s = supply_for(&[b], ctx);
    let x = s.fresh("x");
    let guard = negate(b.clone());
    while_loop(
        sig,
        ctx,
        &x,
        Term::star(),
        &Type::Unit,
        &guard,
        &ret_nu(Term::star(), &Type::Unit),
    )
}

fn pair_of(x: &Name, y: &Name) -> Term {
    Term::pair(Term::var_n(x), Term::var_n(y))
}

/// Left step `p ⋖̂ q : T (T_nu a * T_nu b + T_nu (a * b))`:
/// `casenext out p of rest r -> ret inl <r, q> | done x -> ret inr (do_nu y <- q; ret_nu <x, y>)`.
pub fn left_step(
    sig: &Signature,
    ctx: &Context,
    p: Term,
    a: &Type,
    q: Term,
    b: &Type,
) -> Result<Term, CorecError> {
    let mut s = supply_for(&[&p, &q], ctx);
    let v = s.fresh("v");
    let r = s.fresh("r");
    let x = s.fresh("x");
    let y = s.fresh("y");
    let ab = Type::prod(a.clone(), b.clone());
    let sum = Type::sum(
        Type::prod(Type::tnu(a.clone()), Type::tnu(b.clone())),
        Type::tnu(ab.clone()),
    );
    let inner_ctx = ctx.extend(&x, a.clone());
    let finish = do_nu(
        sig,
        &inner_ctx,
        &y,
        q.clone(),
        b,
        &ret_nu(pair_of(&x, &y), &ab),
        &ab,
    )?;
    Ok(Term::bind(
        &v,
        Term::out(p),
        Term::case(
            Term::var_n(&v),
            &r,
            Term::ret(Term::inl(Term::pair(Term::var_n(&r), q), Some(sum.clone()))),
            &x,
            Term::ret(Term::inr(finish, Some(sum))),
        ),
    ))
}

/// Right step `p ⋗̂ q`, the dual of [`left_step`]: `q` moves.
pub fn right_step(
    sig: &Signature,
    ctx: &Context,
    p: Term,
    a: &Type,
    q: Term,
    b: &Type,
) -> Result<Term, CorecError> {
    let mut s = supply_for(&[&p, &q], ctx);
    let v = s.fresh("v");
    let r = s.fresh("r");
    let x = s.fresh("x");
    let y = s.fresh("y");
    let ab = Type::prod(a.clone(), b.clone());
    let sum = Type::sum(
        Type::prod(Type::tnu(a.clone()), Type::tnu(b.clone())),
        Type::tnu(ab.clone()),
    );
    let inner_ctx = ctx.extend(&y, b.clone());
    let finish = do_nu(
        sig,
        &inner_ctx,
        &x,
        p.clone(),
        a,
        &ret_nu(pair_of(&x, &y), &ab),
        &ab,
    )?;
    Ok(Term::bind(
        &v,
        Term::out(q),
        Term::case(
            Term::var_n(&v),
            &r,
            Term::ret(Term::inl(Term::pair(p, Term::var_n(&r)), Some(sum.clone()))),
            &y,
            Term::ret(Term::inr(finish, Some(sum))),
        ),
    ))
}

/// The guarded interleaving scheme over `w : T_nu a * T_nu b`:
///
/// ```text
/// out(il(w)) = do u <- (fst w ⋖̂ snd w) + (fst w ⋗̂ snd w);
///              case u of inl st -> cont il(st) | inr r -> cont r
/// ```
pub fn interleave_scheme(sig: &Signature, a: &Type, b: &Type) -> Result<CorecScheme, CorecError> {
    let ab = Type::prod(a.clone(), b.clone());
    let dom = Type::prod(Type::tnu(a.clone()), Type::tnu(b.clone()));
    let w = name("w");
    let ctx = Context::from_pairs([(w.clone(), dom.clone())]);
    let fw = Term::fst(Term::var_n(&w));
    let sw = Term::snd(Term::var_n(&w));
    let prefix = Term::plus(
        left_step(sig, &ctx, fw.clone(), a, sw.clone(), b)?,
        right_step(sig, &ctx, fw, a, sw, b)?,
    );
    let mut s = supply_for(&[&prefix], &ctx);
    let st = s.fresh("st");
    let r = s.fresh("r");
    let f = name("interleave");
    let def = CorecDef {
        name: f.clone(),
        arg: w,
        dom: dom.clone(),
        cod: ab.clone(),
        prefix,
        branches: vec![
            Branch {
                var: st.clone(),
                ty: dom,
                body: cont(Term::app(&f, Term::var_n(&st)), &ab),
            },
            Branch {
                var: r.clone(),
                ty: Type::tnu(ab.clone()),
                body: cont(Term::var_n(&r), &ab),
            },
        ],
    };
    Ok(CorecScheme {
        name: f,
        params: Context::new(),
        defs: vec![def],
    })
}

/// `p || q : T_nu (a * b)`.
pub fn interleave(
    sig: &Signature,
    p: Term,
    a: &Type,
    q: Term,
    b: &Type,
) -> Result<Term, CorecError> {
    let scheme = interleave_scheme(sig, a, b)?;
    solve_one(&scheme, sig, "interleave", Term::pair(p, q))
}

/// Left merge `p <| q = tuo (casenext out p of rest r -> cont (r || q) | done x -> cont (do_nu y <- q; ret_nu <x, y>))`.
pub fn left_merge(
    sig: &Signature,
    ctx: &Context,
    p: Term,
    a: &Type,
    q: Term,
    b: &Type,
) -> Result<Term, CorecError> {
    let mut s = supply_for(&[&p, &q], ctx);
    let v = s.fresh("v");
    let r = s.fresh("r");
    let x = s.fresh("x");
    let y = s.fresh("y");
    let ab = Type::prod(a.clone(), b.clone());
    let moved = interleave(sig, Term::var_n(&r), a, q.clone(), b)?;
    let finish = do_nu(
        sig,
        &ctx.extend(&x, a.clone()),
        &y,
        q,
        b,
        &ret_nu(pair_of(&x, &y), &ab),
        &ab,
    )?;
    let t = Term::bind(
        &v,
        Term::out(p),
        Term::case(Term::var_n(&v), &r, cont(moved, &ab), &x, cont(finish, &ab)),
    );
    Ok(tuo_with(t, &ab, &mut s))
}

/// Right merge `p |> q`: as [`left_merge`] with `q` taking the first step.
pub fn right_merge(
    sig: &Signature,
    ctx: &Context,
    p: Term,
    a: &Type,
    q: Term,
    b: &Type,
) -> Result<Term, CorecError> {
    let mut s = supply_for(&[&p, &q], ctx);
    let v = s.fresh("v");
    let r = s.fresh("r");
    let x = s.fresh("x");
    let y = s.fresh("y");
    let ab = Type::prod(a.clone(), b.clone());
    let moved = interleave(sig, p.clone(), a, Term::var_n(&r), b)?;
    let finish = do_nu(
        sig,
        &ctx.extend(&y, b.clone()),
        &x,
        p,
        a,
        &ret_nu(pair_of(&x, &y), &ab),
        &ab,
    )?;
    let t = Term::bind(
        &v,
        Term::out(q),
        Term::case(Term::var_n(&v), &r, cont(moved, &ab), &y, cont(finish, &ab)),
    );
    Ok(tuo_with(t, &ab, &mut s))
}

/// `raise e = ret (inr e : a + e_ty)`.
pub fn raise(e: Term, a: &Type, e_ty: &Type) -> Term {
    Term::ret(Term::inr(e, Some(Type::sum(a.clone(), e_ty.clone()))))
}

/// `try p with e -> h = do z <- p; case z of inl v -> ret (inl v : a + e2) | inr e -> h`.
pub fn try_with(p: Term, a: &Type, e: &Name, h: Term, e2: &Type) -> Term {
    let mut s = supply_for(&[&p, &h], &Context::new());
    s.avoid(e);
    let z = s.fresh("z");
    let v = s.fresh("v");
    Term::bind(
        &z,
        p,
        Term::case(
            Term::var_n(&z),
            &v,
            Term::ret(Term::inl(
                Term::var_n(&v),
                Some(Type::sum(a.clone(), e2.clone())),
            )),
            e,
            h,
        ),
    )
}
