//! Typed translation of surface terms into the primitive term language.
//!
//! Abbreviations (`cont`, `stop`, `casenext`, `if`, n-ary injections and
//! cases) expand to primitives directly; process combinators expand through
//! the corecursion library. Types flow inward from the context of use so that
//! every injection and `nil` in the output carries its annotation.

use super::parser::{Block, Pattern};
use super::{
    case_n, inj, name, Context, Name, NameSupply, Signature, Span, Surface, SurfaceKind, Term, Type,
};
use crate::corec::{stdlib, CorecError};
use crate::typecheck::{self, TypeError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesugarError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("{span}: {form} expects {expected}, found {found}")]
    Arity {
        form: &'static str,
        expected: String,
        found: String,
        span: Span,
    },
    #[error("{span}: {source}")]
    Corec { source: CorecError, span: Span },
}

/// Signature-aware desugarer.
pub struct DesugarCtx<'a> {
    pub sig: &'a Signature,
}

/// Desugar `s` in context `ctx`, optionally against an expected type.
pub fn desugar(
    sig: &Signature,
    ctx: &Context,
    s: &Surface,
    expected: Option<&Type>,
) -> Result<(Term, Type), DesugarError> {
    let d = DesugarCtx { sig };
    let (t, ty) = d.go(ctx, s, expected)?;
    typecheck::check(sig, ctx, &t, &ty)?;
    Ok((t, ty))
}

pub fn desugar_closed(sig: &Signature, s: &Surface) -> Result<(Term, Type), DesugarError> {
    desugar(sig, &Context::new(), s, None)
}

fn rule(k: &SurfaceKind) -> &'static str {
    use SurfaceKind::*;
    match k {
        Var(_) => "var",
        Call(..) | Get(_) | Set(..) | Const(..) => "app",
        Star => "1",
        Tt | Ff | Inl(_) => "inl",
        Inr(_) => "inr",
        Inj(..) => "inj",
        Pair(..) => "pair",
        Fst(_) => "fst",
        Snd(_) => "snd",
        Case(..) | CaseN(..) | If(..) => "case",
        CaseNext(..) => "casenext",
        IfNu(..) => "if_nu",
        Ret(_) => "ret",
        Cont(_) => "cont",
        Stop(_) => "stop",
        Bind(Block::Do, ..) => "do",
        Bind(Block::DoNu, ..) => "do_nu",
        Bind(Block::Seq, ..) => "seq",
        Nil => "nil",
        NilNu => "nil_nu",
        Plus(..) => "plus",
        PlusNu(..) => "plus_nu",
        Out(_) => "out",
        Init(..) => "unf",
        Tuo(_) => "tuo",
        Exec(_) => "exec",
        RetNu(_) => "ret_nu",
        Step(_) => "step",
        Await(_) => "await",
        While(..) => "while",
        Repeat(..) => "repeat",
        Interleave(..) => "interleave",
        LeftMerge(..) => "left merge",
        RightMerge(..) => "right merge",
        Raise(_) => "raise",
        Try(..) => "try",
        Ascribe(..) => "ascription",
    }
}

fn mismatch(s: &Surface, expected: impl ToString, found: &Type) -> DesugarError {
    TypeError::Mismatch {
        rule: rule(&s.kind),
        expected: expected.to_string(),
        found: found.to_string(),
        span: Some(s.span),
    }
    .into()
}

fn needs_annotation(s: &Surface) -> DesugarError {
    TypeError::AnnotationRequired {
        rule: rule(&s.kind),
        span: Some(s.span),
    }
    .into()
}

fn is_annotation_error(e: &DesugarError) -> bool {
    matches!(e, DesugarError::Type(TypeError::AnnotationRequired { .. }))
}

fn spanned(t: Term, span: Span) -> Term {
    if t.span().is_some() {
        t
    } else {
        Term::with_span(t.kind().clone(), Some(span))
    }
}

fn supply(ctx: &Context, terms: &[&Term]) -> NameSupply {
    let mut s = NameSupply::avoiding(ctx.names());
    for t in terms {
        s.avoid_term(t);
    }
    s
}

fn as_t(ty: &Type) -> Option<&Type> {
    match ty {
        Type::T(a) => Some(a),
        _ => None,
    }
}

fn as_tnu(ty: &Type) -> Option<&Type> {
    match ty {
        Type::TNu(a) => Some(a),
        _ => None,
    }
}

fn as_sum(ty: &Type) -> Option<(&Type, &Type)> {
    match ty {
        Type::Sum(a, b) => Some((a, b)),
        _ => None,
    }
}

fn as_prod(ty: &Type) -> Option<(&Type, &Type)> {
    match ty {
        Type::Prod(a, b) => Some((a, b)),
        _ => None,
    }
}

impl DesugarCtx<'_> {
    pub fn term(
        &self,
        ctx: &Context,
        s: &Surface,
        expected: Option<&Type>,
    ) -> Result<(Term, Type), DesugarError> {
        self.go(ctx, s, expected)
    }

    fn go(
        &self,
        ctx: &Context,
        s: &Surface,
        exp: Option<&Type>,
    ) -> Result<(Term, Type), DesugarError> {
        let (t, ty) = self.inner(ctx, s, exp)?;
        if let Some(e) = exp {
            if *e != ty {
                return Err(mismatch(s, e, &ty));
            }
        }
        Ok((spanned(t, s.span), ty))
    }

    fn corec(&self, s: &Surface, r: Result<Term, CorecError>) -> Result<Term, DesugarError> {
        r.map_err(|source| DesugarError::Corec {
            source,
            span: s.span,
        })
    }

    fn symbol(&self, s: &Surface, f: &str) -> Result<(Type, Type), DesugarError> {
        self.sig.lookup(f).cloned().ok_or_else(|| {
            TypeError::UnknownSymbol {
                name: name(f),
                span: Some(s.span),
            }
            .into()
        })
    }

    fn computation(
        &self,
        ctx: &Context,
        s: &Surface,
        exp: Option<&Type>,
    ) -> Result<(Term, Type), DesugarError> {
        let (t, ty) = self.go(ctx, s, exp)?;
        match as_t(&ty) {
            Some(a) => {
                let a = a.clone();
                Ok((t, a))
            }
            None => Err(mismatch(s, "a computation type T _", &ty)),
        }
    }

    fn process(
        &self,
        ctx: &Context,
        s: &Surface,
        exp: Option<&Type>,
    ) -> Result<(Term, Type), DesugarError> {
        let (t, ty) = self.go(ctx, s, exp)?;
        match as_tnu(&ty) {
            Some(a) => {
                let a = a.clone();
                Ok((t, a))
            }
            None => Err(mismatch(s, "a process type T_nu _", &ty)),
        }
    }

    /// Two subterms that must share a type: infer one, check the other.
    fn same(
        &self,
        ctx_a: &Context,
        a: &Surface,
        ctx_b: &Context,
        b: &Surface,
        exp: Option<&Type>,
    ) -> Result<(Term, Term, Type), DesugarError> {
        match self.go(ctx_a, a, exp) {
            Ok((ta, ty)) => {
                let (tb, _) = self.go(ctx_b, b, Some(&ty))?;
                Ok((ta, tb, ty))
            }
            Err(e) if exp.is_none() && is_annotation_error(&e) => {
                let (tb, ty) = self.go(ctx_b, b, None)?;
                let (ta, _) = self.go(ctx_a, a, Some(&ty))?;
                Ok((ta, tb, ty))
            }
            Err(e) => Err(e),
        }
    }

    /// Arguments of a call, matched against the right-nested product `dom`.
    fn args(
        &self,
        ctx: &Context,
        call: &Surface,
        args: &[Surface],
        dom: &Type,
    ) -> Result<Term, DesugarError> {
        match args {
            [] if *dom == Type::Unit => Ok(Term::star()),
            [] => Err(DesugarError::Arity {
                form: "call",
                expected: format!("an argument of type {dom}"),
                found: "none".into(),
                span: call.span,
            }),
            [a] => Ok(self.go(ctx, a, Some(dom))?.0),
            [a, rest @ ..] => match as_prod(dom) {
                Some((l, r)) => Ok(Term::pair(
                    self.go(ctx, a, Some(l))?.0,
                    self.args(ctx, call, rest, r)?,
                )),
                None => Err(DesugarError::Arity {
                    form: "call",
                    expected: format!("one argument of type {dom}"),
                    found: format!("{} arguments", args.len()),
                    span: call.span,
                }),
            },
        }
    }

    /// Bind a pattern: returns the binder and the body rewritten to use it.
    fn pattern(
        &self,
        ctx: &Context,
        pat: &Pattern,
        a: &Type,
        bound: &Surface,
        body: &Surface,
        exp: Option<&Type>,
    ) -> Result<(Name, Context, Term, Type), DesugarError> {
        match pat {
            Pattern::Var(x) => {
                let inner = ctx.extend(x, a.clone());
                let (t, ty) = self.go(&inner, body, exp)?;
                Ok((x.clone(), inner, t, ty))
            }
            Pattern::Wild => {
                let (t, ty) = self.go(ctx, body, exp)?;
                let x = supply(ctx, &[&t]).fresh("_");
                Ok((x.clone(), ctx.extend(&x, a.clone()), t, ty))
            }
            Pattern::Pair(l, r) => {
                let Some((al, ar)) = as_prod(a) else {
                    return Err(mismatch(bound, "a pair", a));
                };
                let inner = ctx.extend(l, al.clone()).extend(r, ar.clone());
                let (t, ty) = self.go(&inner, body, exp)?;
                let mut sup = supply(&inner, &[&t]);
                let z = sup.fresh("z");
                let map: BTreeMap<Name, Term> = [
                    (l.clone(), Term::fst(Term::var_n(&z))),
                    (r.clone(), Term::snd(Term::var_n(&z))),
                ]
                .into_iter()
                .collect();
                Ok((z.clone(), ctx.extend(&z, a.clone()), t.subst_many(&map), ty))
            }
        }
    }

    fn inner(
        &self,
        ctx: &Context,
        s: &Surface,
        exp: Option<&Type>,
    ) -> Result<(Term, Type), DesugarError> {
        use SurfaceKind as K;
        let sig = self.sig;
        Ok(match &s.kind {
            K::Var(x) => match ctx.lookup(x) {
                Some(ty) => (Term::var_n(x), ty.clone()),
                None => match sig.lookup(x) {
                    Some((Type::Unit, cod)) => (Term::app(x, Term::star()), cod.clone()),
                    Some((dom, _)) => {
                        return Err(DesugarError::Arity {
                            form: "call",
                            expected: format!("an argument of type {dom}"),
                            found: "none".into(),
                            span: s.span,
                        })
                    }
                    None => {
                        return Err(TypeError::UnboundVariable {
                            name: x.clone(),
                            span: Some(s.span),
                        }
                        .into())
                    }
                },
            },
            K::Call(f, args) => {
                let (dom, cod) = self.symbol(s, f)?;
                (Term::app(f, self.args(ctx, s, args, &dom)?), cod)
            }
            K::Get(l) => {
                let f = format!("get.{l}");
                let (_, cod) = self.symbol(s, &f)?;
                (Term::app(&f, Term::star()), cod)
            }
            K::Set(l, v) => {
                let f = format!("set.{l}");
                let (dom, cod) = self.symbol(s, &f)?;
                (Term::app(&f, self.go(ctx, v, Some(&dom))?.0), cod)
            }
            K::Const(c, e) => {
                let f = format!("{c}.{e}");
                let (_, cod) = self.symbol(s, &f)?;
                (Term::app(&f, Term::star()), cod)
            }
            K::Star => (Term::star(), Type::Unit),
            K::Tt => (Term::tt(), Type::bool()),
            K::Ff => (Term::ff(), Type::bool()),
            K::Pair(a, b) => {
                let (ea, eb) = match exp.and_then(as_prod) {
                    Some((l, r)) => (Some(l), Some(r)),
                    None => (None, None),
                };
                let (ta, tya) = self.go(ctx, a, ea)?;
                let (tb, tyb) = self.go(ctx, b, eb)?;
                (Term::pair(ta, tb), Type::prod(tya, tyb))
            }
            K::Fst(a) | K::Snd(a) => {
                let (t, ty) = self.go(ctx, a, None)?;
                let Some((l, r)) = as_prod(&ty) else {
                    return Err(mismatch(s, "a pair", &ty));
                };
                if matches!(s.kind, K::Fst(_)) {
                    (Term::fst(t), l.clone())
                } else {
                    (Term::snd(t), r.clone())
                }
            }
            K::Inl(a) | K::Inr(a) => {
                let Some(whole) = exp else {
                    return Err(needs_annotation(s));
                };
                let Some((l, r)) = as_sum(whole) else {
                    return Err(mismatch(
                        s,
                        whole,
                        &Type::sum(Type::Base(name("?")), Type::Base(name("?"))),
                    ));
                };
                if matches!(s.kind, K::Inl(_)) {
                    (
                        Term::inl(self.go(ctx, a, Some(l))?.0, Some(whole.clone())),
                        whole.clone(),
                    )
                } else {
                    (
                        Term::inr(self.go(ctx, a, Some(r))?.0, Some(whole.clone())),
                        whole.clone(),
                    )
                }
            }
            K::Inj(i, n, a) => {
                let Some(whole) = exp else {
                    return Err(needs_annotation(s));
                };
                let comps = whole.split_nsum(*n).ok_or_else(|| DesugarError::Arity {
                    form: "inj",
                    expected: format!("a {n}-ary sum"),
                    found: whole.to_string(),
                    span: s.span,
                })?;
                if *i == 0 || i > n {
                    return Err(DesugarError::Arity {
                        form: "inj",
                        expected: format!("an index in 1..={n}"),
                        found: i.to_string(),
                        span: s.span,
                    });
                }
                let (t, _) = self.go(ctx, a, Some(&comps[i - 1]))?;
                (inj(*i, &comps, t), whole.clone())
            }
            K::Case(sc, x, l, y, r) => {
                let (st, sty) = self.go(ctx, sc, None)?;
                let Some((a, b)) = as_sum(&sty) else {
                    return Err(mismatch(sc, "a sum", &sty));
                };
                let (lt, rt, ty) = self.same(
                    &ctx.extend(x, a.clone()),
                    l,
                    &ctx.extend(y, b.clone()),
                    r,
                    exp,
                )?;
                (Term::case(st, x, lt, y, rt), ty)
            }
            K::CaseN(sc, branches) => {
                let (st, sty) = self.go(ctx, sc, None)?;
                let n = branches.len();
                let comps = sty.split_nsum(n).ok_or_else(|| DesugarError::Arity {
                    form: "case",
                    expected: format!("a {n}-ary sum"),
                    found: sty.to_string(),
                    span: s.span,
                })?;
                let mut result = exp.cloned();
                let mut bodies: Vec<Option<Term>> = vec![None; n];
                let mut pending = Vec::new();
                for (j, ((x, b), c)) in branches.iter().zip(&comps).enumerate() {
                    match self.go(&ctx.extend(x, c.clone()), b, result.as_ref()) {
                        Ok((t, ty)) => {
                            result.get_or_insert(ty);
                            bodies[j] = Some(t);
                        }
                        Err(e) if result.is_none() && is_annotation_error(&e) => pending.push(j),
                        Err(e) => return Err(e),
                    }
                }
                let Some(ty) = result else {
                    return Err(needs_annotation(s));
                };
                for j in pending {
                    let (x, b) = &branches[j];
                    bodies[j] = Some(self.go(&ctx.extend(x, comps[j].clone()), b, Some(&ty))?.0);
                }
                let arms: Vec<(Name, Term)> = branches
                    .iter()
                    .zip(bodies)
                    .map(|((x, _), t)| (x.clone(), t.unwrap()))
                    .collect();
                let terms: Vec<&Term> = arms.iter().map(|(_, t)| t).collect();
                let mut sup = supply(ctx, &terms);
                (case_n(st, arms, &mut sup), ty)
            }
            K::CaseNext(p, x, l, y, r) => {
                let (pt, pty) = self.computation(ctx, p, None)?;
                let Some((a, b)) = as_sum(&pty) else {
                    return Err(mismatch(p, "T (_ + _)", &Type::t(pty.clone())));
                };
                let (lt, rt, ty) = self.same(
                    &ctx.extend(x, a.clone()),
                    l,
                    &ctx.extend(y, b.clone()),
                    r,
                    exp,
                )?;
                if as_t(&ty).is_none() {
                    return Err(mismatch(s, "a computation type T _", &ty));
                }
                let z = supply(ctx, &[&lt, &rt]).fresh("z");
                (
                    Term::bind(&z, pt, Term::case(Term::var_n(&z), x, lt, y, rt)),
                    ty,
                )
            }
            K::If(c, a, b) => {
                let (ct, _) = self.go(ctx, c, Some(&Type::bool()))?;
                let (at, bt, ty) = self.same(ctx, a, ctx, b, exp)?;
                let u = supply(ctx, &[&at, &bt]).fresh("_");
                (Term::case(ct, &u, at, &u, bt), ty)
            }
            K::IfNu(c, a, b) => {
                let (ct, _) = self.go(ctx, c, Some(&Type::t(Type::bool())))?;
                let (at, bt, ty) = self.same(ctx, a, ctx, b, exp)?;
                let Some(inner) = as_tnu(&ty) else {
                    return Err(mismatch(s, "a process type T_nu _", &ty));
                };
                (stdlib::if_nu(ct, at, bt, inner), ty.clone())
            }
            K::Ret(a) => {
                let (t, ty) = self.go(ctx, a, exp.and_then(as_t))?;
                (Term::ret(t), Type::t(ty))
            }
            K::Cont(a) => {
                let hint = exp.and_then(as_t).and_then(as_sum);
                let (t, ty) = self.go(ctx, a, hint.map(|(l, _)| l))?;
                let right = match (hint, as_tnu(&ty)) {
                    (Some((_, r)), _) => r.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => return Err(needs_annotation(s)),
                };
                let whole = Type::sum(ty, right);
                (Term::ret(Term::inl(t, Some(whole.clone()))), Type::t(whole))
            }
            K::Stop(a) => {
                let hint = exp.and_then(as_t).and_then(as_sum);
                let (t, ty) = self.go(ctx, a, hint.map(|(_, r)| r))?;
                let left = hint
                    .map(|(l, _)| l.clone())
                    .unwrap_or_else(|| Type::tnu(ty.clone()));
                let whole = Type::sum(left, ty);
                (Term::ret(Term::inr(t, Some(whole.clone()))), Type::t(whole))
            }
            K::Bind(Block::Do, pat, bound, body) => {
                let (bt, a) = self.computation(ctx, bound, None)?;
                let (x, _, body_t, ty) = self.pattern(ctx, pat, &a, bound, body, exp)?;
                if as_t(&ty).is_none() {
                    return Err(mismatch(body, "a computation type T _", &ty));
                }
                (Term::bind(&x, bt, body_t), ty)
            }
            K::Bind(block, pat, bound, body) => {
                let (bt, a) = self.process(ctx, bound, None)?;
                let (x, _, body_t, ty) = self.pattern(ctx, pat, &a, bound, body, exp)?;
                let Some(b) = as_tnu(&ty) else {
                    return Err(mismatch(body, "a process type T_nu _", &ty));
                };
                let r = if *block == Block::Seq {
                    stdlib::seq(sig, ctx, &x, bt, &a, &body_t, b)
                } else {
                    stdlib::do_nu(sig, ctx, &x, bt, &a, &body_t, b)
                };
                (self.corec(s, r)?, ty.clone())
            }
            K::Nil => match exp {
                Some(ty @ Type::T(_)) => (Term::nil(Some(ty.clone())), ty.clone()),
                Some(ty) => return Err(mismatch(s, ty, &Type::t(Type::Base(name("?"))))),
                None => return Err(needs_annotation(s)),
            },
            K::NilNu => match exp.and_then(as_tnu) {
                Some(a) => (stdlib::nil_nu(a), Type::tnu(a.clone())),
                None => return Err(needs_annotation(s)),
            },
            K::Plus(a, b) => {
                let (at, bt, ty) = self.same(ctx, a, ctx, b, exp)?;
                if as_t(&ty).is_none() {
                    return Err(mismatch(s, "a computation type T _", &ty));
                }
                (Term::plus(at, bt), ty)
            }
            K::PlusNu(a, b) => {
                let (at, bt, ty) = self.same(ctx, a, ctx, b, exp)?;
                let Some(inner) = as_tnu(&ty) else {
                    return Err(mismatch(s, "a process type T_nu _", &ty));
                };
                (stdlib::plus_nu(at, bt, inner), ty.clone())
            }
            K::Out(a) => {
                let hint = exp
                    .and_then(as_t)
                    .and_then(as_sum)
                    .map(|(_, r)| Type::tnu(r.clone()));
                let (t, a) = self.process(ctx, a, hint.as_ref())?;
                (Term::out(t), stdlib::layer(&a))
            }
            K::Init(x, seed, body) => {
                let (st, a) = self.go(ctx, seed, None)?;
                let hint = exp
                    .and_then(as_tnu)
                    .map(|b| Type::t(Type::sum(a.clone(), b.clone())));
                let (bt, bty) = self.go(&ctx.extend(x, a.clone()), body, hint.as_ref())?;
                let b = match as_t(&bty).and_then(as_sum) {
                    Some((l, r)) if *l == a => r.clone(),
                    _ => return Err(mismatch(body, format!("T ({a} + _)"), &bty)),
                };
                (Term::init(x, st, bt), Type::tnu(b))
            }
            K::Tuo(a) => {
                let hint = exp.and_then(as_tnu).map(stdlib::layer);
                let (t, ty) = self.computation(ctx, a, hint.as_ref())?;
                let b = match as_sum(&ty) {
                    Some((Type::TNu(l), r)) if **l == *r => r.clone(),
                    _ => return Err(mismatch(a, "T (T_nu B + B)", &Type::t(ty))),
                };
                (stdlib::tuo(t, &b), Type::tnu(b))
            }
            K::Exec(a) => {
                let (t, b) = self.process(ctx, a, exp)?;
                (stdlib::exec(t, &b), Type::tnu(b))
            }
            K::RetNu(a) => {
                let (t, b) = self.go(ctx, a, exp.and_then(as_tnu))?;
                (stdlib::ret_nu(t, &b), Type::tnu(b))
            }
            K::Step(a) => {
                let hint = exp.and_then(as_tnu).map(|b| Type::t(b.clone()));
                let (t, b) = self.computation(ctx, a, hint.as_ref())?;
                (stdlib::step(t, &b), Type::tnu(b))
            }
            K::Await(b) => {
                let (bt, _) = self.go(ctx, b, Some(&Type::t(Type::bool())))?;
                (
                    self.corec(s, stdlib::await_(sig, ctx, &bt))?,
                    Type::tnu(Type::Unit),
                )
            }
            K::While(binder, cond, body) | K::Repeat(binder, body, cond) => {
                let (x, pt, a) = match binder {
                    Some((x, p)) => {
                        let (pt, a) = self.go(ctx, p, exp.and_then(as_tnu))?;
                        (x.clone(), pt, a)
                    }
                    None => (name("%x"), Term::star(), Type::Unit),
                };
                let inner = ctx.extend(&x, a.clone());
                let (ct, _) = self.go(&inner, cond, Some(&Type::t(Type::bool())))?;
                let (qt, _) = self.go(&inner, body, Some(&Type::tnu(a.clone())))?;
                let r = if matches!(s.kind, K::While(..)) {
                    stdlib::while_loop(sig, ctx, &x, pt, &a, &ct, &qt)
                } else {
                    stdlib::repeat_until(sig, ctx, &x, pt, &a, &qt, &ct)
                };
                (self.corec(s, r)?, Type::tnu(a))
            }
            K::Interleave(p, q) | K::LeftMerge(p, q) | K::RightMerge(p, q) => {
                let hint = exp.and_then(as_tnu).and_then(as_prod);
                let (pt, a) =
                    self.process(ctx, p, hint.map(|(l, _)| Type::tnu(l.clone())).as_ref())?;
                let (qt, b) =
                    self.process(ctx, q, hint.map(|(_, r)| Type::tnu(r.clone())).as_ref())?;
                let r = match &s.kind {
                    K::Interleave(..) => stdlib::interleave(sig, pt, &a, qt, &b),
                    K::LeftMerge(..) => stdlib::left_merge(sig, ctx, pt, &a, qt, &b),
                    _ => stdlib::right_merge(sig, ctx, pt, &a, qt, &b),
                };
                (self.corec(s, r)?, Type::tnu(Type::prod(a, b)))
            }
            K::Raise(e) => {
                let Some((a, ety)) = exp.and_then(as_t).and_then(as_sum) else {
                    return Err(needs_annotation(s));
                };
                let (et, _) = self.go(ctx, e, Some(ety))?;
                (stdlib::raise(et, a, ety), exp.unwrap().clone())
            }
            K::Try(body, e, h) => {
                let (bt, bty) = self.computation(ctx, body, None)?;
                let Some((a, ety)) = as_sum(&bty) else {
                    return Err(mismatch(body, "T (A + E)", &Type::t(bty.clone())));
                };
                let (ht, hty) = self.computation(&ctx.extend(e, ety.clone()), h, exp)?;
                let e2 = match as_sum(&hty) {
                    Some((l, r)) if l == a => r.clone(),
                    _ => return Err(mismatch(h, format!("T ({a} + E)"), &Type::t(hty))),
                };
                (
                    stdlib::try_with(bt, a, e, ht, &e2),
                    Type::t(Type::sum(a.clone(), e2)),
                )
            }
            K::Ascribe(t, ty) => {
                sig.check_type(ty).map_err(TypeError::UndeclaredType)?;
                self.go(ctx, t, Some(ty))?
            }
        })
    }
}
