//! The typing judgement `Γ ▷ t : A`, decided bidirectionally.
//!
//! Inference is syntax-directed; `inl`, `inr` and `nil` need either their
//! annotation or a type pushed in from the context of use.

use crate::syntax::{Context, Name, Signature, Span, Term, TermKind, Type};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("{}rule ({rule}): expected {expected}, found {found}", at(.span))]
    Mismatch {
        rule: &'static str,
        expected: String,
        found: String,
        span: Option<Span>,
    },
    #[error("{}unbound variable `{name}`", at(.span))]
    UnboundVariable { name: Name, span: Option<Span> },
    #[error("{}unknown symbol `{name}`", at(.span))]
    UnknownSymbol { name: Name, span: Option<Span> },
    #[error("{}rule ({rule}): annotation required", at(.span))]
    AnnotationRequired {
        rule: &'static str,
        span: Option<Span>,
    },
    #[error("undeclared base type `{0}`")]
    UndeclaredType(Name),
}

fn at(span: &Option<Span>) -> String {
    span.map(|s| format!("{s}: ")).unwrap_or_default()
}

impl TypeError {
    pub fn rule(&self) -> Option<&'static str> {
        match self {
            TypeError::Mismatch { rule, .. } | TypeError::AnnotationRequired { rule, .. } => {
                Some(rule)
            }
            TypeError::UnboundVariable { .. } => Some("var"),
            TypeError::UnknownSymbol { .. } => Some("app"),
            TypeError::UndeclaredType(_) => None,
        }
    }
}

fn mismatch(rule: &'static str, expected: impl ToString, found: &Type, t: &Term) -> TypeError {
    TypeError::Mismatch {
        rule,
        expected: expected.to_string(),
        found: found.to_string(),
        span: t.span(),
    }
}

/// Infer the type of `t` in context `ctx`.
pub fn infer(sig: &Signature, ctx: &Context, t: &Term) -> Result<Type, TypeError> {
    Checker { sig }.infer(ctx, t)
}

/// Check `t` against `ty`.
pub fn check(sig: &Signature, ctx: &Context, t: &Term, ty: &Type) -> Result<(), TypeError> {
    Checker { sig }.check(ctx, t, ty)
}

struct Checker<'a> {
    sig: &'a Signature,
}

impl Checker<'_> {
    fn infer(&self, ctx: &Context, t: &Term) -> Result<Type, TypeError> {
        match t.kind() {
            TermKind::Var(x) => ctx
                .lookup(x)
                .cloned()
                .ok_or_else(|| TypeError::UnboundVariable {
                    name: x.clone(),
                    span: t.span(),
                }),
            TermKind::App(f, a) => {
                let (dom, cod) = self.sig.lookup(f).ok_or_else(|| TypeError::UnknownSymbol {
                    name: f.clone(),
                    span: t.span(),
                })?;
                self.check_rule(ctx, a, dom, "app")?;
                Ok(cod.clone())
            }
            TermKind::Star => Ok(Type::Unit),
            TermKind::Pair(a, b) => Ok(Type::prod(self.infer(ctx, a)?, self.infer(ctx, b)?)),
            TermKind::Fst(a) | TermKind::Snd(a) => {
                let rule = if matches!(t.kind(), TermKind::Fst(_)) {
                    "fst"
                } else {
                    "snd"
                };
                match self.infer(ctx, a)? {
                    Type::Prod(l, r) => Ok(if rule == "fst" { *l } else { *r }),
                    other => Err(mismatch(rule, "a product", &other, a)),
                }
            }
            TermKind::Inl(_, ann) | TermKind::Inr(_, ann) => {
                let rule = if matches!(t.kind(), TermKind::Inl(..)) {
                    "inl"
                } else {
                    "inr"
                };
                let ann = ann.clone().ok_or(TypeError::AnnotationRequired {
                    rule,
                    span: t.span(),
                })?;
                self.check(ctx, t, &ann)?;
                Ok(ann)
            }
            TermKind::Case(s, x, l, y, r) => {
                let (a, b) = self.scrutinee(ctx, s)?;
                let c = self.infer(&ctx.extend(x, a), l)?;
                self.check_rule(&ctx.extend(y, b), r, &c, "case")?;
                Ok(c)
            }
            TermKind::Ret(a) => Ok(Type::t(self.infer(ctx, a)?)),
            TermKind::Do(x, p, q) => {
                let a = self.computation(ctx, p, "do")?;
                let b = self.infer(&ctx.extend(x, a), q)?;
                match b {
                    Type::T(_) => Ok(b),
                    other => Err(mismatch("do", "a computation type T B", &other, q)),
                }
            }
            TermKind::Nil(ann) => match ann {
                Some(ty @ Type::T(_)) => Ok(ty.clone()),
                Some(other) => Err(mismatch("nil", "a computation type T A", other, t)),
                None => Err(TypeError::AnnotationRequired {
                    rule: "nil",
                    span: t.span(),
                }),
            },
            TermKind::Plus(p, q) => {
                let a = self.infer(ctx, p)?;
                if !matches!(a, Type::T(_)) {
                    return Err(mismatch("plus", "a computation type T A", &a, p));
                }
                self.check_rule(ctx, q, &a, "plus")?;
                Ok(a)
            }
            TermKind::Out(p) => match self.infer(ctx, p)? {
                Type::TNu(a) => Ok(Type::t(Type::sum(Type::TNu(a.clone()), *a))),
                other => Err(mismatch("out", "a process type T_nu A", &other, p)),
            },
            TermKind::Init(x, p, q) => {
                let a = self.infer(ctx, p)?;
                match self.infer(&ctx.extend(x, a.clone()), q)? {
                    Type::T(inner) => match *inner {
                        Type::Sum(a2, b) if *a2 == a => Ok(Type::TNu(b)),
                        other => Err(mismatch("unf", format!("T ({a} + B)"), &Type::t(other), q)),
                    },
                    other => Err(mismatch("unf", format!("T ({a} + B)"), &other, q)),
                }
            }
        }
    }

    fn scrutinee(&self, ctx: &Context, s: &Term) -> Result<(Type, Type), TypeError> {
        match self.infer(ctx, s)? {
            Type::Sum(a, b) => Ok((*a, *b)),
            other => Err(mismatch("case", "a sum type", &other, s)),
        }
    }

    fn computation(&self, ctx: &Context, p: &Term, rule: &'static str) -> Result<Type, TypeError> {
        match self.infer(ctx, p)? {
            Type::T(a) => Ok(*a),
            other => Err(mismatch(rule, "a computation type T A", &other, p)),
        }
    }

    fn check_rule(
        &self,
        ctx: &Context,
        t: &Term,
        ty: &Type,
        rule: &'static str,
    ) -> Result<(), TypeError> {
        match self.check(ctx, t, ty) {
            Err(TypeError::Mismatch {
                expected,
                found,
                span,
                ..
            }) if span == t.span() => Err(TypeError::Mismatch {
                rule,
                expected,
                found,
                span,
            }),
            other => other,
        }
    }

    fn check(&self, ctx: &Context, t: &Term, ty: &Type) -> Result<(), TypeError> {
        match (t.kind(), ty) {
            (TermKind::Pair(a, b), Type::Prod(l, r)) => {
                self.check(ctx, a, l)?;
                self.check(ctx, b, r)
            }
            (TermKind::Inl(a, ann), Type::Sum(l, _)) | (TermKind::Inr(a, ann), Type::Sum(_, l)) => {
                let rule = if matches!(t.kind(), TermKind::Inl(..)) {
                    "inl"
                } else {
                    "inr"
                };
                if let Some(ann) = ann {
                    if ann != ty {
                        return Err(mismatch(rule, ty, ann, t));
                    }
                }
                self.check_rule(ctx, a, l, rule)
            }
            (TermKind::Inl(..), _) | (TermKind::Inr(..), _) => {
                let rule = if matches!(t.kind(), TermKind::Inl(..)) {
                    "inl"
                } else {
                    "inr"
                };
                Err(TypeError::Mismatch {
                    rule,
                    expected: ty.to_string(),
                    found: "an injection".into(),
                    span: t.span(),
                })
            }
            (TermKind::Case(s, x, l, y, r), _) => {
                let (a, b) = self.scrutinee(ctx, s)?;
                self.check_rule(&ctx.extend(x, a), l, ty, "case")?;
                self.check_rule(&ctx.extend(y, b), r, ty, "case")
            }
            (TermKind::Ret(a), Type::T(inner)) => self.check_rule(ctx, a, inner, "ret"),
            (TermKind::Do(x, p, q), Type::T(_)) => {
                let a = self.computation(ctx, p, "do")?;
                self.check_rule(&ctx.extend(x, a), q, ty, "do")
            }
            (TermKind::Nil(ann), Type::T(_)) => match ann {
                Some(a) if a != ty => Err(mismatch("nil", ty, a, t)),
                _ => Ok(()),
            },
            (TermKind::Plus(p, q), Type::T(_)) => {
                self.check_rule(ctx, p, ty, "plus")?;
                self.check_rule(ctx, q, ty, "plus")
            }
            (TermKind::Init(x, p, q), Type::TNu(b)) => {
                let a = self.infer(ctx, p)?;
                let body = Type::t(Type::sum(a.clone(), (**b).clone()));
                self.check_rule(&ctx.extend(x, a), q, &body, "unf")
            }
            _ => {
                let found = self.infer(ctx, t)?;
                if &found == ty {
                    Ok(())
                } else {
                    Err(mismatch(rule_of(t), ty, &found, t))
                }
            }
        }
    }
}

fn rule_of(t: &Term) -> &'static str {
    match t.kind() {
        TermKind::Var(_) => "var",
        TermKind::App(..) => "app",
        TermKind::Star => "1",
        TermKind::Pair(..) => "pair",
        TermKind::Fst(_) => "fst",
        TermKind::Snd(_) => "snd",
        TermKind::Inl(..) => "inl",
        TermKind::Inr(..) => "inr",
        TermKind::Case(..) => "case",
        TermKind::Ret(_) => "ret",
        TermKind::Do(..) => "do",
        TermKind::Nil(_) => "nil",
        TermKind::Plus(..) => "plus",
        TermKind::Out(_) => "out",
        TermKind::Init(..) => "unf",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::name;

    fn sig() -> Signature {
        let mut s = Signature::with_prelude();
        s.add_fn("get.l", Type::Unit, Type::t(Type::bool()));
        s
    }

    #[test]
    fn star_is_unit() {
        assert_eq!(
            infer(&sig(), &Context::new(), &Term::star()).unwrap(),
            Type::Unit
        );
    }

    #[test]
    fn init_has_process_type() {
        // init x := * in ret (inr x : 1 + 1)
        let body = Term::ret(Term::inr(Term::var("x"), Some(Type::bool())));
        let t = Term::init(&name("x"), Term::star(), body);
        assert_eq!(
            infer(&sig(), &Context::new(), &t).unwrap(),
            Type::tnu(Type::Unit)
        );
    }

    #[test]
    fn out_unfolds_one_layer() {
        let ctx = Context::from_pairs([(name("p"), Type::tnu(Type::bool()))]);
        let t = Term::out(Term::var("p"));
        assert_eq!(
            infer(&sig(), &ctx, &t).unwrap(),
            Type::t(Type::sum(Type::tnu(Type::bool()), Type::bool()))
        );
    }

    #[test]
    fn unannotated_injection_needs_expectation() {
        let t = Term::inl(Term::star(), None);
        let e = infer(&sig(), &Context::new(), &t).unwrap_err();
        assert!(matches!(
            e,
            TypeError::AnnotationRequired { rule: "inl", .. }
        ));
        assert!(check(&sig(), &Context::new(), &t, &Type::bool()).is_ok());
        let r = Term::ret(t);
        assert!(check(&sig(), &Context::new(), &r, &Type::t(Type::bool())).is_ok());
    }

    #[test]
    fn plus_requires_equal_sides() {
        let t = Term::plus(Term::ret(Term::star()), Term::ret(Term::tt()));
        let e = infer(&sig(), &Context::new(), &t).unwrap_err();
        assert_eq!(e.rule(), Some("plus"));
    }

    #[test]
    fn do_threads_binder_type() {
        let t = Term::bind(
            &name("x"),
            Term::app("get.l", Term::star()),
            Term::ret(Term::app("not", Term::var("x"))),
        );
        assert_eq!(
            infer(&sig(), &Context::new(), &t).unwrap(),
            Type::t(Type::bool())
        );
    }

    #[test]
    fn unknown_symbol_is_reported() {
        let e = infer(&sig(), &Context::new(), &Term::app("nope", Term::star())).unwrap_err();
        assert!(matches!(e, TypeError::UnknownSymbol { .. }));
    }

    #[test]
    fn shadowing_uses_innermost_binding() {
        let t = Term::bind(
            &name("x"),
            Term::ret(Term::star()),
            Term::bind(&name("x"), Term::ret(Term::tt()), Term::ret(Term::var("x"))),
        );
        assert_eq!(
            infer(&sig(), &Context::new(), &t).unwrap(),
            Type::t(Type::bool())
        );
    }
}
