//! Guarded corecursive schemes: representation, validation and the
//! expansion-law rewrite. Elaboration into closed `init` terms lives in
//! [`elaborate`]; the derived process combinators in [`stdlib`].

pub mod check;
pub mod elaborate;
pub mod stdlib;

use crate::syntax::{case_n, Context, Name, NameSupply, Signature, Span, Term, TermKind, Type};
use crate::typecheck::{self, TypeError};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

pub use elaborate::{elaborate, ElabOptions, Elaboration, SigmaChoice, Solution, TraceStep};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorecError {
    #[error("{}`{def}`: the prefix calls `{callee}`; calls may only appear as `cont f(e)` branches", at(.span))]
    PrefixCall {
        def: Name,
        callee: Name,
        span: Option<Span>,
    },
    #[error("{}`{def}`, branch {branch}: call to `{callee}` is not of the form `cont {callee}(e)`", at(.span))]
    NotGuarded {
        def: Name,
        branch: usize,
        callee: Name,
        span: Option<Span>,
    },
    #[error("{}`{def}`, branch {branch}: argument of `{callee}` contains a nested call", at(.span))]
    NestedCall {
        def: Name,
        branch: usize,
        callee: Name,
        span: Option<Span>,
    },
    #[error("`{def}` (result {cod}) calls `{callee}` whose result type is {callee_cod}")]
    CrossCodomain {
        def: Name,
        cod: Type,
        callee: Name,
        callee_cod: Type,
    },
    #[error("`{def}`: {source}")]
    Type { def: Name, source: TypeError },
    #[error("duplicate definition `{0}` in scheme")]
    Duplicate(Name),
    #[error("scheme `{0}` has no equations")]
    Empty(Name),
}

fn at(span: &Option<Span>) -> String {
    span.map(|s| format!("{s}: ")).unwrap_or_default()
}

/// One branch `inj_j x_j -> body` of a guarded equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub var: Name,
    pub ty: Type,
    pub body: Term,
}

/// `out(f(arg)) = do z <- prefix; case z of inj_1 x_1 -> b_1 | ... | inj_n x_n -> b_n`
/// with `f : dom -> T_nu cod`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorecDef {
    pub name: Name,
    pub arg: Name,
    pub dom: Type,
    pub cod: Type,
    pub prefix: Term,
    pub branches: Vec<Branch>,
}

impl CorecDef {
    /// The profile `dom -> T_nu cod`.
    pub fn profile(&self) -> (Type, Type) {
        (self.dom.clone(), Type::tnu(self.cod.clone()))
    }

    /// The layer type `T (T_nu cod + cod)` of the right-hand side.
    pub fn layer_type(&self) -> Type {
        Type::t(Type::sum(Type::tnu(self.cod.clone()), self.cod.clone()))
    }

    /// Reassemble the right-hand side as a single term.
    pub fn rhs(&self, supply: &mut NameSupply) -> Term {
        let z = supply.fresh("z");
        let branches = self
            .branches
            .iter()
            .map(|b| (b.var.clone(), b.body.clone()))
            .collect();
        Term::bind(
            &z,
            self.prefix.clone(),
            case_n(Term::var_n(&z), branches, supply),
        )
    }
}

/// A system of guarded corecursive equations over fresh symbols `f_1..f_k`.
/// `params` types the free variables shared by all right-hand sides.
#[derive(Clone, Debug, PartialEq)]
pub struct CorecScheme {
    pub name: Name,
    pub params: Context,
    pub defs: Vec<CorecDef>,
}

/// How a call branch looks after validation: `cont f_m(e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Call {
    pub callee: Name,
    pub arg: Term,
}

impl CorecScheme {
    pub fn def(&self, f: &str) -> Option<&CorecDef> {
        self.defs.iter().find(|d| &*d.name == f)
    }

    pub fn symbols(&self) -> BTreeSet<Name> {
        self.defs.iter().map(|d| d.name.clone()).collect()
    }

    /// The signature extended with every `f_i` at its profile.
    pub fn extended_signature(&self, sig: &Signature) -> Signature {
        let mut s = sig.clone();
        for d in &self.defs {
            let (a, b) = d.profile();
            s.functions.insert(d.name.clone(), (a, b));
        }
        s
    }

    /// Every name occurring in the scheme, for fresh-name generation.
    pub fn supply(&self) -> NameSupply {
        let mut s = NameSupply::avoiding(self.params.names());
        for d in &self.defs {
            s.avoid(&d.name);
            s.avoid(&d.arg);
            s.avoid_term(&d.prefix);
            for b in &d.branches {
                s.avoid(&b.var);
                s.avoid_term(&b.body);
            }
        }
        s
    }

    fn calls_in(&self, t: &Term) -> Option<Name> {
        t.symbols().into_iter().find(|f| self.def(f).is_some())
    }

    /// Classify a branch body as a call `cont f(e)`, or `None` if it is plain.
    pub fn as_call(&self, body: &Term) -> Option<Call> {
        if let TermKind::Ret(inner) = body.kind() {
            if let TermKind::Inl(app, _) = inner.kind() {
                if let TermKind::App(f, e) = app.kind() {
                    if self.def(f).is_some() {
                        return Some(Call {
                            callee: f.clone(),
                            arg: e.clone(),
                        });
                    }
                }
            }
        }
        None
    }
}

/// Split a right-hand side into prefix and branches.
///
/// `do z <- p; case z of inl x1 -> b1 | inr w -> case w of ...` is flattened
/// into an n-ary case. A `do` whose body does not scrutinise its binder is a
/// single branch. A term without calls is its own prefix with branch `ret z`;
/// any other term gets the trivial prefix `ret *`.
pub fn decompose(
    sig: &Signature,
    ctx: &Context,
    symbols: &BTreeSet<Name>,
    rhs: &Term,
    supply: &mut NameSupply,
) -> Result<(Term, Vec<Branch>), TypeError> {
    let mentions = |t: &Term| t.symbols().iter().any(|f| symbols.contains(f));
    if let TermKind::Do(z, p, body) = rhs.kind() {
        if !mentions(p) {
            let prefix_ty = match typecheck::infer(sig, ctx, p)? {
                Type::T(a) => *a,
                _ => unreachable!("do-bound term has computation type"),
            };
            let mut bodies = Vec::new();
            let mut scrut = z.clone();
            let mut cur = body.clone();
            loop {
                match cur.kind() {
                    TermKind::Case(s, x, l, y, r)
                        if matches!(s.kind(), TermKind::Var(v) if *v == scrut)
                            && !l.mentions_free(&scrut)
                            && !r.mentions_free(&scrut) =>
                    {
                        bodies.push((x.clone(), l.clone()));
                        scrut = y.clone();
                        let next = r.clone();
                        cur = next;
                    }
                    _ => {
                        bodies.push((scrut.clone(), cur.clone()));
                        break;
                    }
                }
            }
            let tys = prefix_ty
                .split_nsum(bodies.len())
                .expect("case tree matches the prefix's coproduct");
            let branches = bodies
                .into_iter()
                .zip(tys)
                .map(|((var, body), ty)| Branch { var, ty, body })
                .collect();
            return Ok((p.clone(), branches));
        }
    }
    if !mentions(rhs) {
        let ty = match typecheck::infer(sig, ctx, rhs)? {
            Type::T(a) => *a,
            _ => unreachable!("right-hand side has a layer type"),
        };
        let z = supply.fresh("z");
        return Ok((
            rhs.clone(),
            vec![Branch {
                var: z.clone(),
                ty,
                body: Term::ret(Term::var_n(&z)),
            }],
        ));
    }
    let u = supply.fresh("u");
    Ok((
        Term::ret(Term::star()),
        vec![Branch {
            var: u,
            ty: Type::Unit,
            body: rhs.clone(),
        }],
    ))
}

/// Build a scheme from raw right-hand sides `(f, arg, dom, cod, rhs)`.
pub fn scheme_from_equations(
    name: &Name,
    sig: &Signature,
    params: Context,
    eqs: Vec<(Name, Name, Type, Type, Term)>,
) -> Result<CorecScheme, CorecError> {
    if eqs.is_empty() {
        return Err(CorecError::Empty(name.clone()));
    }
    let mut seen = BTreeSet::new();
    for (f, ..) in &eqs {
        if !seen.insert(f.clone()) {
            return Err(CorecError::Duplicate(f.clone()));
        }
    }
    let mut ext = sig.clone();
    for (f, _, dom, cod, _) in &eqs {
        ext.functions
            .insert(f.clone(), (dom.clone(), Type::tnu(cod.clone())));
    }
    let mut supply = NameSupply::avoiding(params.names());
    for (f, a, _, _, rhs) in &eqs {
        supply.avoid(f);
        supply.avoid(a);
        supply.avoid_term(rhs);
    }
    let mut defs = Vec::new();
    for (f, arg, dom, cod, rhs) in eqs {
        let ctx = params.extend(&arg, dom.clone());
        let (prefix, branches) =
            decompose(&ext, &ctx, &seen, &rhs, &mut supply).map_err(|source| CorecError::Type {
                def: f.clone(),
                source,
            })?;
        defs.push(CorecDef {
            name: f,
            arg,
            dom,
            cod,
            prefix,
            branches,
        });
    }
    Ok(CorecScheme {
        name: name.clone(),
        params,
        defs,
    })
}

/// Check the guardedness side conditions and the typing of every equation.
pub fn validate_scheme(s: &CorecScheme, sig: &Signature) -> Result<(), CorecError> {
    if s.defs.is_empty() {
        return Err(CorecError::Empty(s.name.clone()));
    }
    let mut seen = BTreeSet::new();
    for d in &s.defs {
        if !seen.insert(d.name.clone()) {
            return Err(CorecError::Duplicate(d.name.clone()));
        }
    }
    let ext = s.extended_signature(sig);
    for d in &s.defs {
        if let Some(callee) = s.calls_in(&d.prefix) {
            return Err(CorecError::PrefixCall {
                def: d.name.clone(),
                callee,
                span: d.prefix.span(),
            });
        }
        for (j, b) in d.branches.iter().enumerate() {
            let Some(callee) = s.calls_in(&b.body) else {
                continue;
            };
            match s.as_call(&b.body) {
                Some(call) => {
                    if let Some(nested) = s.calls_in(&call.arg) {
                        return Err(CorecError::NestedCall {
                            def: d.name.clone(),
                            branch: j + 1,
                            callee: nested,
                            span: call.arg.span(),
                        });
                    }
                    let target = s.def(&call.callee).expect("callee is a scheme symbol");
                    if target.cod != d.cod {
                        return Err(CorecError::CrossCodomain {
                            def: d.name.clone(),
                            cod: d.cod.clone(),
                            callee: call.callee,
                            callee_cod: target.cod.clone(),
                        });
                    }
                }
                None => {
                    return Err(CorecError::NotGuarded {
                        def: d.name.clone(),
                        branch: j + 1,
                        callee,
                        span: b.body.span(),
                    })
                }
            }
        }
        let ctx = s.params.extend(&d.arg, d.dom.clone());
        let ty_err = |source| CorecError::Type {
            def: d.name.clone(),
            source,
        };
        let comps: Vec<Type> = d.branches.iter().map(|b| b.ty.clone()).collect();
        typecheck::check(&ext, &ctx, &d.prefix, &Type::t(Type::nsum(&comps))).map_err(ty_err)?;
        for b in &d.branches {
            typecheck::check(
                &ext,
                &ctx.extend(&b.var, b.ty.clone()),
                &b.body,
                &d.layer_type(),
            )
            .map_err(ty_err)?;
        }
    }
    Ok(())
}

/// Rewrite equations whose right-hand side is a sum of `out(g(e))` over
/// other scheme symbols (the expansion-law style) into guarded form, by
/// instantiating each `g`'s equation and tagging its branches into one
/// combined coproduct.
pub fn unfold_prefix_calls(s: &CorecScheme, sig: &Signature) -> Result<CorecScheme, CorecError> {
    let mut out = s.clone();
    let mut supply = s.supply();
    for (i, d) in s.defs.iter().enumerate() {
        let Some(leaves) = expansion_leaves(s, d) else {
            continue;
        };
        let mut parts = Vec::new();
        for (g, e) in leaves {
            let target = s.def(&g).expect("leaf calls a scheme symbol");
            if expansion_leaves(s, target).is_some() {
                return Err(CorecError::PrefixCall {
                    def: d.name.clone(),
                    callee: g,
                    span: d.prefix.span(),
                });
            }
            let inst = |t: &Term| t.subst(&target.arg, &e);
            parts.push((
                inst(&target.prefix),
                target
                    .branches
                    .iter()
                    .map(|b| Branch {
                        var: b.var.clone(),
                        ty: b.ty.clone(),
                        body: inst(&b.body),
                    })
                    .collect::<Vec<_>>(),
            ));
        }
        let all: Vec<Type> = parts
            .iter()
            .flat_map(|(_, bs)| bs.iter().map(|b| b.ty.clone()))
            .collect();
        let mut offset = 0;
        let mut prefix: Option<Term> = None;
        let mut branches = Vec::new();
        for (p, bs) in parts {
            let z = supply.fresh("z");
            let arms = bs
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let x = supply.fresh(&b.var);
                    (
                        x.clone(),
                        Term::ret(crate::syntax::inj(offset + j + 1, &all, Term::var_n(&x))),
                    )
                })
                .collect();
            let tagged = Term::bind(&z, p, case_n(Term::var_n(&z), arms, &mut supply));
            prefix = Some(match prefix {
                None => tagged,
                Some(acc) => Term::plus(acc, tagged),
            });
            offset += bs.len();
            branches.extend(bs);
        }
        out.defs[i].prefix = prefix.expect("at least one leaf");
        out.defs[i].branches = branches;
    }
    validate_scheme(&out, sig)?;
    Ok(out)
}

/// `out(g1(e1)) + ... + out(gm(em))` with a trivial branch, as produced by
/// [`decompose`] for such a right-hand side.
fn expansion_leaves(s: &CorecScheme, d: &CorecDef) -> Option<Vec<(Name, Term)>> {
    let [b] = d.branches.as_slice() else {
        return None;
    };
    let trivial = matches!(b.body.kind(), TermKind::Ret(v) if matches!(v.kind(), TermKind::Var(x) if *x == b.var));
    let unit_prefix =
        matches!(d.prefix.kind(), TermKind::Ret(v) if matches!(v.kind(), TermKind::Star));
    let tree = if trivial {
        &d.prefix
    } else if unit_prefix && !b.body.mentions_free(&b.var) {
        &b.body
    } else {
        return None;
    };
    fn collect(s: &CorecScheme, t: &Term, out: &mut Vec<(Name, Term)>) -> bool {
        match t.kind() {
            TermKind::Plus(a, b) => collect(s, a, out) && collect(s, b, out),
            TermKind::Out(inner) => match inner.kind() {
                TermKind::App(g, e) if s.def(g).is_some() => {
                    out.push((g.clone(), e.clone()));
                    true
                }
                _ => false,
            },
            _ => false,
        }
    }
    let mut leaves = Vec::new();
    if collect(s, tree, &mut leaves) && !leaves.is_empty() {
        Some(leaves)
    } else {
        None
    }
}

impl fmt::Display for CorecScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scheme {}", self.name)?;
        for (x, t) in self.params.entries() {
            writeln!(f, "  param {x} : {t}")?;
        }
        let mut supply = self.supply();
        for d in &self.defs {
            writeln!(
                f,
                "  corec {}({} : {}) : {} = {}",
                d.name,
                d.arg,
                d.dom,
                Type::tnu(d.cod.clone()),
                d.rhs(&mut supply)
            )?;
        }
        write!(f, "end")
    }
}
