//! Abstract syntax of types and terms, capture-avoiding substitution,
//! alpha-equivalence, and a printer whose output the parser reads back.

mod desugar;
mod lexer;
mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

pub use desugar::{desugar, desugar_closed, DesugarCtx, DesugarError};
pub use lexer::{Span, Token, TokenKind};
pub use parser::{
    parse_file, parse_surface_term, parse_type, Block, Item, ModelItem, ParseError, Pattern,
    SchemeItem, Surface, SurfaceKind,
};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Types: `W | 1 | A*B | A+B | T A | T_nu A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Base(Name),
    Unit,
    Prod(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
    T(Box<Type>),
    TNu(Box<Type>),
}

impl Type {
    pub fn bool() -> Type {
        Type::sum(Type::Unit, Type::Unit)
    }

    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    pub fn t(a: Type) -> Type {
        Type::T(Box::new(a))
    }

    pub fn tnu(a: Type) -> Type {
        Type::TNu(Box::new(a))
    }

    /// The n-ary coproduct `A1 + ... + An`, nested to the right so that the
    /// injections follow `inj_1^1 = id`, `inj_1^{n+1} = inl`,
    /// `inj_{i+1}^{n+1} = inr . inj_i^n`.
    pub fn nsum(components: &[Type]) -> Type {
        match components {
            [] => panic!("empty coproduct"),
            [only] => only.clone(),
            [first, rest @ ..] => Type::sum(first.clone(), Type::nsum(rest)),
        }
    }

    /// Inverse of [`Type::nsum`] for a known arity.
    pub fn split_nsum(&self, n: usize) -> Option<Vec<Type>> {
        if n == 0 {
            return None;
        }
        let mut out = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 1..n {
            match cur {
                Type::Sum(a, b) => {
                    out.push((**a).clone());
                    cur = b;
                }
                _ => return None,
            }
        }
        out.push(cur.clone());
        Some(out)
    }

    pub fn is_bool(&self) -> bool {
        *self == Type::bool()
    }

    /// Does the type mention `T` or `T_nu` anywhere.
    pub fn is_first_order(&self) -> bool {
        match self {
            Type::Base(_) | Type::Unit => true,
            Type::Prod(a, b) | Type::Sum(a, b) => a.is_first_order() && b.is_first_order(),
            Type::T(_) | Type::TNu(_) => false,
        }
    }
}

/// Source position of a term, excluded from term equality.
pub type Pos = Option<Span>;

/// A term. Cheap to clone; equality is syntactic (not alpha) and ignores spans.
#[derive(Clone)]
pub struct Term(Arc<TermNode>);

pub struct TermNode {
    kind: TermKind,
    span: Pos,
    fv: OnceLock<Arc<BTreeSet<Name>>>,
}

/// The primitive term formers. `Inl`, `Inr` and `Nil` carry an optional
/// annotation with their full type (`A + B` resp. `T A`), which is what the
/// checker needs where neither inference nor an expected type fixes it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum TermKind {
    Var(Name),
    App(Name, Term),
    Star,
    Pair(Term, Term),
    Fst(Term),
    Snd(Term),
    Inl(Term, Option<Type>),
    Inr(Term, Option<Type>),
    Case(Term, Name, Term, Name, Term),
    Ret(Term),
    Do(Name, Term, Term),
    Nil(Option<Type>),
    Plus(Term, Term),
    Out(Term),
    Init(Name, Term, Term),
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.kind == other.0.kind
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.kind.hash(state)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Term {
    pub fn new(kind: TermKind) -> Term {
        Term(Arc::new(TermNode {
            kind,
            span: None,
            fv: OnceLock::new(),
        }))
    }

    pub fn with_span(kind: TermKind, span: Pos) -> Term {
        Term(Arc::new(TermNode {
            kind,
            span,
            fv: OnceLock::new(),
        }))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    pub fn span(&self) -> Pos {
        self.0.span
    }

    /// Identity of the underlying node; stable for as long as the term lives.
    pub fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn var(x: &str) -> Term {
        Term::new(TermKind::Var(name(x)))
    }
    pub fn var_n(x: &Name) -> Term {
        Term::new(TermKind::Var(x.clone()))
    }
    pub fn app(f: &str, t: Term) -> Term {
        Term::new(TermKind::App(name(f), t))
    }
    pub fn star() -> Term {
        Term::new(TermKind::Star)
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Term::new(TermKind::Pair(a, b))
    }
    pub fn fst(t: Term) -> Term {
        Term::new(TermKind::Fst(t))
    }
    pub fn snd(t: Term) -> Term {
        Term::new(TermKind::Snd(t))
    }
    pub fn inl(t: Term, ann: Option<Type>) -> Term {
        Term::new(TermKind::Inl(t, ann))
    }
    pub fn inr(t: Term, ann: Option<Type>) -> Term {
        Term::new(TermKind::Inr(t, ann))
    }
    pub fn case(s: Term, x: &Name, l: Term, y: &Name, r: Term) -> Term {
        Term::new(TermKind::Case(s, x.clone(), l, y.clone(), r))
    }
    pub fn ret(t: Term) -> Term {
        Term::new(TermKind::Ret(t))
    }
    pub fn bind(x: &Name, p: Term, q: Term) -> Term {
        Term::new(TermKind::Do(x.clone(), p, q))
    }
    pub fn nil(ann: Option<Type>) -> Term {
        Term::new(TermKind::Nil(ann))
    }
    pub fn plus(p: Term, q: Term) -> Term {
        Term::new(TermKind::Plus(p, q))
    }
    pub fn out(p: Term) -> Term {
        Term::new(TermKind::Out(p))
    }
    pub fn init(x: &Name, p: Term, q: Term) -> Term {
        Term::new(TermKind::Init(x.clone(), p, q))
    }

    /// `tt = inl *`, the left summand of `2 = 1 + 1`.
    pub fn tt() -> Term {
        Term::inl(Term::star(), Some(Type::bool()))
    }
    pub fn ff() -> Term {
        Term::inr(Term::star(), Some(Type::bool()))
    }

    pub fn free_vars(&self) -> &BTreeSet<Name> {
        self.0.fv.get_or_init(|| Arc::new(self.compute_free_vars()))
    }

    fn compute_free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let bound = |t: &Term, x: &Name, out: &mut BTreeSet<Name>| {
            out.extend(t.free_vars().iter().filter(|v| *v != x).cloned());
        };
        match self.kind() {
            TermKind::Var(x) => {
                out.insert(x.clone());
            }
            TermKind::Star | TermKind::Nil(_) => {}
            TermKind::App(_, t)
            | TermKind::Fst(t)
            | TermKind::Snd(t)
            | TermKind::Inl(t, _)
            | TermKind::Inr(t, _)
            | TermKind::Ret(t)
            | TermKind::Out(t) => out.extend(t.free_vars().iter().cloned()),
            TermKind::Pair(a, b) | TermKind::Plus(a, b) => {
                out.extend(a.free_vars().iter().cloned());
                out.extend(b.free_vars().iter().cloned());
            }
            TermKind::Case(s, x, l, y, r) => {
                out.extend(s.free_vars().iter().cloned());
                bound(l, x, &mut out);
                bound(r, y, &mut out);
            }
            TermKind::Do(x, p, q) | TermKind::Init(x, p, q) => {
                out.extend(p.free_vars().iter().cloned());
                bound(q, x, &mut out);
            }
        }
        out
    }

    pub fn mentions_free(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }

    /// Every function symbol applied anywhere in the term.
    pub fn symbols(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let TermKind::App(f, _) = t.kind() {
                out.insert(f.clone());
            }
        });
        out
    }

    pub fn mentions_symbol(&self, f: &str) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if let TermKind::App(g, _) = t.kind() {
                if &**g == f {
                    found = true;
                }
            }
        });
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self.kind() {
            TermKind::Var(_) | TermKind::Star | TermKind::Nil(_) => vec![],
            TermKind::App(_, t)
            | TermKind::Fst(t)
            | TermKind::Snd(t)
            | TermKind::Inl(t, _)
            | TermKind::Inr(t, _)
            | TermKind::Ret(t)
            | TermKind::Out(t) => vec![t],
            TermKind::Pair(a, b) | TermKind::Plus(a, b) => vec![a, b],
            TermKind::Case(s, _, l, _, r) => vec![s, l, r],
            TermKind::Do(_, p, q) | TermKind::Init(_, p, q) => vec![p, q],
        }
    }

    /// All variable names bound anywhere in the term.
    pub fn binders(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.visit(&mut |t| match t.kind() {
            TermKind::Case(_, x, _, y, _) => {
                out.push(x.clone());
                out.push(y.clone());
            }
            TermKind::Do(x, _, _) | TermKind::Init(x, _, _) => out.push(x.clone()),
            _ => {}
        });
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Capture-avoiding substitution `self[s/x]`.
    pub fn subst(&self, x: &str, s: &Term) -> Term {
        if !self.free_vars().contains(x) {
            return self.clone();
        }
        let span = self.span();
        let k = match self.kind() {
            TermKind::Var(_) => return s.clone(),
            TermKind::Star | TermKind::Nil(_) => unreachable!("no free variables"),
            TermKind::App(f, t) => TermKind::App(f.clone(), t.subst(x, s)),
            TermKind::Fst(t) => TermKind::Fst(t.subst(x, s)),
            TermKind::Snd(t) => TermKind::Snd(t.subst(x, s)),
            TermKind::Inl(t, a) => TermKind::Inl(t.subst(x, s), a.clone()),
            TermKind::Inr(t, a) => TermKind::Inr(t.subst(x, s), a.clone()),
            TermKind::Ret(t) => TermKind::Ret(t.subst(x, s)),
            TermKind::Out(t) => TermKind::Out(t.subst(x, s)),
            TermKind::Pair(a, b) => TermKind::Pair(a.subst(x, s), b.subst(x, s)),
            TermKind::Plus(a, b) => TermKind::Plus(a.subst(x, s), b.subst(x, s)),
            TermKind::Case(sc, y, l, z, r) => {
                let (y2, l2) = subst_under(y, l, x, s);
                let (z2, r2) = subst_under(z, r, x, s);
                TermKind::Case(sc.subst(x, s), y2, l2, z2, r2)
            }
            TermKind::Do(y, p, q) => {
                let (y2, q2) = subst_under(y, q, x, s);
                TermKind::Do(y2, p.subst(x, s), q2)
            }
            TermKind::Init(y, p, q) => {
                let (y2, q2) = subst_under(y, q, x, s);
                TermKind::Init(y2, p.subst(x, s), q2)
            }
        };
        Term::with_span(k, span)
    }

    /// Simultaneous substitution of several variables.
    pub fn subst_many(&self, map: &BTreeMap<Name, Term>) -> Term {
        if map.is_empty() || !self.free_vars().iter().any(|v| map.contains_key(v)) {
            return self.clone();
        }
        // Rename the targets apart first so that sequential substitution
        // behaves simultaneously.
        let mut avoid: BTreeSet<Name> = self.free_vars().clone();
        for s in map.values() {
            avoid.extend(s.free_vars().iter().cloned());
        }
        avoid.extend(map.keys().cloned());
        let mut staged = self.clone();
        let mut finals = Vec::new();
        for (x, s) in map {
            let tmp = fresh_name(x, |c| avoid.contains(c));
            avoid.insert(tmp.clone());
            staged = staged.subst(x, &Term::var_n(&tmp));
            finals.push((tmp, s.clone()));
        }
        for (tmp, s) in finals {
            staged = staged.subst(&tmp, &s);
        }
        staged
    }

    pub fn rename_bound(&self, from: &Name, to: &Name) -> Term {
        self.subst(from, &Term::var_n(to))
    }
}

fn subst_under(y: &Name, body: &Term, x: &str, s: &Term) -> (Name, Term) {
    if &**y == x || !body.free_vars().contains(x) {
        return (y.clone(), body.clone());
    }
    if s.free_vars().contains(y) {
        let fresh = fresh_name(y, |c| {
            s.free_vars().contains(c) || body.free_vars().contains(c) || c == x
        });
        let renamed = body.subst(y, &Term::var_n(&fresh));
        (fresh.clone(), renamed.subst(x, s))
    } else {
        (y.clone(), body.subst(x, s))
    }
}

/// Strip a trailing `'k` suffix.
pub fn base_name(x: &str) -> &str {
    match x.rfind('\'') {
        Some(i) if x[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < x.len() => &x[..i],
        _ => x,
    }
}

/// `x'k` for the least `k >= 1` not rejected by `taken`.
pub fn fresh_name(x: &str, taken: impl Fn(&str) -> bool) -> Name {
    let base = base_name(x);
    let base = if base.is_empty() || base == "_" {
        "v"
    } else {
        base
    };
    (1..)
        .map(|k| format!("{base}'{k}"))
        .find(|c| !taken(c))
        .map(|c| name(&c))
        .expect("unbounded supply")
}

/// A deterministic supply of fresh names that never collide with a given
/// avoid-set nor with each other.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    taken: BTreeSet<Name>,
}

impl NameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding<'a>(names: impl IntoIterator<Item = &'a Name>) -> Self {
        NameSupply {
            taken: names.into_iter().cloned().collect(),
        }
    }

    pub fn avoid(&mut self, x: &Name) {
        self.taken.insert(x.clone());
    }

    pub fn avoid_term(&mut self, t: &Term) {
        self.taken.extend(t.free_vars().iter().cloned());
        self.taken.extend(t.binders());
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        let n = fresh_name(base, |c| self.taken.contains(c));
        self.taken.insert(n.clone());
        n
    }
}

/// Alpha-equivalence of terms (annotations compared exactly).
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, env: &mut Vec<(Name, Name)>) -> bool {
        use TermKind::*;
        match (a.kind(), b.kind()) {
            (Var(x), Var(y)) => {
                for (l, r) in env.iter().rev() {
                    if l == x || r == y {
                        return l == x && r == y;
                    }
                }
                x == y
            }
            (App(f, s), App(g, t)) => f == g && go(s, t, env),
            (Star, Star) => true,
            (Pair(a1, b1), Pair(a2, b2)) | (Plus(a1, b1), Plus(a2, b2)) => {
                go(a1, a2, env) && go(b1, b2, env)
            }
            (Fst(s), Fst(t)) | (Snd(s), Snd(t)) | (Ret(s), Ret(t)) | (Out(s), Out(t)) => {
                go(s, t, env)
            }
            (Inl(s, x), Inl(t, y)) | (Inr(s, x), Inr(t, y)) => x == y && go(s, t, env),
            (Nil(x), Nil(y)) => x == y,
            (Case(s1, x1, l1, y1, r1), Case(s2, x2, l2, y2, r2)) => {
                go(s1, s2, env) && under(x1, l1, x2, l2, env) && under(y1, r1, y2, r2, env)
            }
            (Do(x1, p1, q1), Do(x2, p2, q2)) | (Init(x1, p1, q1), Init(x2, p2, q2)) => {
                go(p1, p2, env) && under(x1, q1, x2, q2, env)
            }
            _ => false,
        }
    }
    fn under(x: &Name, s: &Term, y: &Name, t: &Term, env: &mut Vec<(Name, Name)>) -> bool {
        env.push((x.clone(), y.clone()));
        let r = go(s, t, env);
        env.pop();
        r
    }
    go(a, b, &mut Vec::new())
}

/// `inj_i^n t` (1-based) into the coproduct with the given components.
/// Annotations are filled in from `components`.
pub fn inj(i: usize, components: &[Type], t: Term) -> Term {
    let n = components.len();
    assert!(i >= 1 && i <= n, "injection index {i} out of range 1..={n}");
    if n == 1 {
        return t;
    }
    let whole = Type::nsum(components);
    if i == 1 {
        Term::inl(t, Some(whole))
    } else {
        Term::inr(inj(i - 1, &components[1..], t), Some(whole))
    }
}

/// `case s of inj_1 x1 -> b1 | ... | inj_n xn -> bn`, encoded by nested binary
/// case on the right-nested coproduct. For `n = 1` the branch is instantiated
/// with the scrutinee directly.
pub fn case_n(scrut: Term, branches: Vec<(Name, Term)>, supply: &mut NameSupply) -> Term {
    let n = branches.len();
    assert!(n >= 1, "n-ary case needs at least one branch");
    let mut it = branches.into_iter();
    let (x1, b1) = it.next().unwrap();
    if n == 1 {
        return b1.subst(&x1, &scrut);
    }
    let rest: Vec<(Name, Term)> = it.collect();
    if rest.len() == 1 {
        let (y, r) = rest.into_iter().next().unwrap();
        return Term::case(scrut, &x1, b1, &y, r);
    }
    let y = supply.fresh("w");
    let inner = case_n(Term::var_n(&y), rest, supply);
    Term::case(scrut, &x1, b1, &y, inner)
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::fmt_type(self, f, 0)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::fmt_term(self, f)
    }
}

pub use print::pretty;

/// Function signature: atomic types and function symbol profiles.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub atomic_types: BTreeSet<Name>,
    pub functions: BTreeMap<Name, (Type, Type)>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_type(&mut self, t: &str) {
        self.atomic_types.insert(name(t));
    }

    pub fn add_fn(&mut self, f: &str, dom: Type, cod: Type) {
        self.functions.insert(name(f), (dom, cod));
    }

    pub fn lookup(&self, f: &str) -> Option<&(Type, Type)> {
        self.functions.get(f)
    }

    /// Symbols available in every program: Boolean connectives on `2`.
    pub fn with_prelude() -> Self {
        let mut s = Signature::new();
        let b = Type::bool();
        let bb = Type::prod(b.clone(), b.clone());
        s.add_fn("not", b.clone(), b.clone());
        for f in ["and", "or", "implies", "iff"] {
            s.add_fn(f, bb.clone(), b.clone());
        }
        s
    }

    /// Check that every base type mentioned is declared.
    pub fn check_type(&self, t: &Type) -> Result<(), Name> {
        match t {
            Type::Base(b) if !self.atomic_types.contains(b) => Err(b.clone()),
            Type::Base(_) | Type::Unit => Ok(()),
            Type::Prod(a, b) | Type::Sum(a, b) => {
                self.check_type(a)?;
                self.check_type(b)
            }
            Type::T(a) | Type::TNu(a) => self.check_type(a),
        }
    }
}

/// Typing context: an ordered list of typed variables. Extending with a
/// variable already present shadows the old entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Context {
    entries: Vec<(Name, Type)>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, Type)>) -> Self {
        let mut c = Context::new();
        for (x, t) in pairs {
            c.push(x, t);
        }
        c
    }

    pub fn push(&mut self, x: Name, t: Type) {
        self.entries.retain(|(y, _)| *y != x);
        self.entries.push((x, t));
    }

    pub fn extend(&self, x: &Name, t: Type) -> Context {
        let mut c = self.clone();
        c.push(x.clone(), t);
        c
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries
            .iter()
            .rev()
            .find(|(y, _)| &**y == x)
            .map(|(_, t)| t)
    }

    pub fn entries(&self) -> &[(Name, Type)] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.entries.iter().map(|(x, _)| x)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
