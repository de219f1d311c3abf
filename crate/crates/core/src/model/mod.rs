//! The concrete model: the non-deterministic state monad
//! `T X = S -> P_fin(S x X)` over a finite store universe, with an
//! interpreter for primitive terms.
//!
//! Computations and processes are hash-consed per model, so structurally
//! identical descriptions share one identity and one memo entry. Running a
//! computation at a store is memoized, as are equality checks.

mod value;

pub use value::{
    Builtin, Comp, CompKind, Kont, NativeFn, Outcomes, Proc, ProcKind, StoreId, Value,
};

use crate::syntax::{name, Name, Signature, Term, TermKind, Type};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Mutex, OnceLock, RwLock};
use thiserror::Error;
use value::{CompNode, ProcNode};

/// Default observation depth for equality of computations and processes.
pub const DEFAULT_DEPTH: u32 = 8;

/// Default bound on the number of stores.
pub const DEFAULT_UNIVERSE_BOUND: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape error: expected {expected}, found {found}")]
    Shape {
        expected: &'static str,
        found: String,
    },
    #[error("unbound variable `{0}` during evaluation")]
    UnboundVariable(Name),
    #[error("no denotation for symbol `{0}`")]
    NoDenotation(Name),
    #[error("type {0} has no finite carrier")]
    NotFinite(Type),
    #[error("unknown carrier `{0}`")]
    UnknownCarrier(Name),
    #[error("unknown location `{0}`")]
    UnknownLocation(Name),
    #[error("store universe has {size} stores, above the bound {bound}")]
    UniverseTooLarge { size: u128, bound: u64 },
    #[error("cannot read `{text}` as a value of type {ty}")]
    BadValue { text: String, ty: Type },
    #[error("symbol `{0}` already has a denotation")]
    Redefined(Name),
    #[error("arity mismatch calling `{0}`")]
    Arity(Name),
}

/// Locations and base-type carriers of a model.
#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub locations: Vec<(Name, Type)>,
    pub carriers: Vec<(Name, Vec<Name>)>,
    pub universe_bound: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            locations: Vec::new(),
            carriers: Vec::new(),
            universe_bound: DEFAULT_UNIVERSE_BOUND,
        }
    }
}

impl ModelConfig {
    /// `n` Boolean locations named `l1..ln`.
    pub fn booleans(n: usize) -> Self {
        ModelConfig {
            locations: (1..=n)
                .map(|i| (name(&format!("l{i}")), Type::bool()))
                .collect(),
            ..Default::default()
        }
    }
}

pub type NativeValueFn = dyn Fn(&Value) -> Result<Value, ModelError> + Send + Sync;

/// How a signature symbol is interpreted.
#[derive(Clone)]
pub enum Denotation {
    Get(usize),
    Set(usize),
    Const(Value),
    Native(Arc<NativeValueFn>),
    /// A definition `f(x1, ..., xn) = body` closed over `env`; the argument
    /// is the right-nested tuple of the parameters.
    Def {
        params: Vec<Name>,
        body: Term,
        env: Env,
    },
}

/// An evaluation environment: a persistent list of bindings.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<(Name, Value, Env)>>);

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, x: &Name, v: Value) -> Env {
        Env(Some(Arc::new((x.clone(), v, self.clone()))))
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, Value)>) -> Env {
        pairs
            .into_iter()
            .fold(Env::new(), |e, (x, v)| e.bind(&x, v))
    }

    pub fn lookup(&self, x: &str) -> Option<&Value> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if &*node.0 == x {
                return Some(&node.1);
            }
            cur = &node.2;
        }
        None
    }
}

struct Location {
    name: Name,
    ty: Type,
    values: Vec<Value>,
    index: HashMap<Value, u32>,
    stride: u32,
}

/// A concrete model with its interning tables and memo caches.
pub struct Model {
    sig: Signature,
    carriers: BTreeMap<Name, Vec<Name>>,
    locations: Vec<Location>,
    store_count: u32,
    symbols: RwLock<HashMap<Name, Denotation>>,
    comps: Mutex<HashMap<CompKind, Comp>>,
    procs: Mutex<HashMap<ProcKind, Proc>>,
    next_comp: AtomicU32,
    next_proc: AtomicU32,
    runs: Mutex<HashMap<(u32, StoreId), Outcomes>>,
    eqs: Mutex<HashMap<(u32, u32, u32), bool>>,
    bisims: Mutex<HashMap<(u32, u32, u32), bool>>,
}

fn bool2(v: &Value) -> Result<bool, ModelError> {
    v.as_bool().ok_or_else(|| ModelError::Shape {
        expected: "a boolean",
        found: v.shape(),
    })
}

fn bool_pair(v: &Value) -> Result<(bool, bool), ModelError> {
    match v {
        Value::Pair(p) => Ok((bool2(&p.0)?, bool2(&p.1)?)),
        other => Err(ModelError::Shape {
            expected: "a pair of booleans",
            found: other.shape(),
        }),
    }
}

impl Model {
    /// Build a model over `sig` (which should already contain the prelude).
    /// Locations add `get.l : 1 -> T A` and `set.l : A -> T 1`; carriers add
    /// their base type and constants `C.e : 1 -> C`.
    pub fn new(mut sig: Signature, cfg: ModelConfig) -> Result<Model, ModelError> {
        let carriers: BTreeMap<Name, Vec<Name>> = cfg.carriers.iter().cloned().collect();
        let mut symbols = HashMap::new();
        for (c, elems) in &cfg.carriers {
            sig.add_type(c);
            for (i, e) in elems.iter().enumerate() {
                let f = name(&format!("{c}.{e}"));
                sig.add_fn(&f, Type::Unit, Type::Base(c.clone()));
                symbols.insert(
                    f,
                    Denotation::Const(Value::Atom {
                        ty: c.clone(),
                        elem: i as u32,
                    }),
                );
            }
        }
        let not: Arc<NativeValueFn> = Arc::new(|v| Ok(Value::bool(!bool2(v)?)));
        symbols.insert(name("not"), Denotation::Native(not));
        let ops: [(&str, fn(bool, bool) -> bool); 4] = [
            ("and", |a, b| a && b),
            ("or", |a, b| a || b),
            ("implies", |a, b| !a || b),
            ("iff", |a, b| a == b),
        ];
        for (f, op) in ops {
            let native: Arc<NativeValueFn> = Arc::new(move |v| {
                let (a, b) = bool_pair(v)?;
                Ok(Value::bool(op(a, b)))
            });
            symbols.insert(name(f), Denotation::Native(native));
        }
        let mut model = Model {
            sig: Signature::new(),
            carriers,
            locations: Vec::new(),
            store_count: 1,
            symbols: RwLock::new(HashMap::new()),
            comps: Mutex::new(HashMap::new()),
            procs: Mutex::new(HashMap::new()),
            next_comp: AtomicU32::new(0),
            next_proc: AtomicU32::new(0),
            runs: Mutex::new(HashMap::new()),
            eqs: Mutex::new(HashMap::new()),
            bisims: Mutex::new(HashMap::new()),
        };
        let mut size: u128 = 1;
        let mut locations = Vec::new();
        for (i, (l, ty)) in cfg.locations.iter().enumerate() {
            let values = model.enumerate(ty)?;
            let index = values
                .iter()
                .enumerate()
                .map(|(k, v)| (v.clone(), k as u32))
                .collect();
            let stride = size as u32;
            size *= values.len() as u128;
            if size > cfg.universe_bound as u128 {
                return Err(ModelError::UniverseTooLarge {
                    size,
                    bound: cfg.universe_bound,
                });
            }
            sig.add_fn(&format!("get.{l}"), Type::Unit, Type::t(ty.clone()));
            sig.add_fn(&format!("set.{l}"), ty.clone(), Type::t(Type::Unit));
            symbols.insert(name(&format!("get.{l}")), Denotation::Get(i));
            symbols.insert(name(&format!("set.{l}")), Denotation::Set(i));
            locations.push(Location {
                name: l.clone(),
                ty: ty.clone(),
                values,
                index,
                stride,
            });
        }
        model.sig = sig;
        model.locations = locations;
        model.store_count = size as u32;
        model.symbols = RwLock::new(symbols);
        Ok(model)
    }

    /// A model over `n` Boolean locations `l1..ln` with the prelude signature.
    pub fn booleans(n: usize) -> Model {
        Model::new(Signature::with_prelude(), ModelConfig::booleans(n))
            .expect("small Boolean model")
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// Give `f` a denotation. A symbol is defined at most once, so memoized
    /// results never depend on a superseded meaning.
    pub fn define(&self, f: &str, d: Denotation) -> Result<(), ModelError> {
        let mut table = self.symbols.write().unwrap();
        if table.contains_key(f) {
            return Err(ModelError::Redefined(name(f)));
        }
        table.insert(name(f), d);
        Ok(())
    }

    pub fn has_denotation(&self, f: &str) -> bool {
        self.symbols.read().unwrap().contains_key(f)
    }

    // ---- carriers and stores ----

    /// All values of a first-order type, in canonical order.
    pub fn enumerate(&self, ty: &Type) -> Result<Vec<Value>, ModelError> {
        Ok(match ty {
            Type::Unit => vec![Value::Unit],
            Type::Base(b) => {
                let elems = self
                    .carriers
                    .get(b)
                    .ok_or_else(|| ModelError::UnknownCarrier(b.clone()))?;
                (0..elems.len() as u32)
                    .map(|elem| Value::Atom {
                        ty: b.clone(),
                        elem,
                    })
                    .collect()
            }
            Type::Sum(a, b) => {
                let mut out: Vec<Value> = self.enumerate(a)?.into_iter().map(Value::inl).collect();
                out.extend(self.enumerate(b)?.into_iter().map(Value::inr));
                out
            }
            Type::Prod(a, b) => {
                let bs = self.enumerate(b)?;
                let mut out = Vec::new();
                for x in self.enumerate(a)? {
                    for y in &bs {
                        out.push(Value::pair(x.clone(), y.clone()));
                    }
                }
                out
            }
            Type::T(_) | Type::TNu(_) => return Err(ModelError::NotFinite(ty.clone())),
        })
    }

    pub fn store_count(&self) -> u32 {
        self.store_count
    }

    pub fn stores(&self) -> impl Iterator<Item = StoreId> {
        0..self.store_count
    }

    pub fn location_names(&self) -> Vec<Name> {
        self.locations.iter().map(|l| l.name.clone()).collect()
    }

    pub fn location_index(&self, l: &str) -> Result<usize, ModelError> {
        self.locations
            .iter()
            .position(|x| &*x.name == l)
            .ok_or_else(|| ModelError::UnknownLocation(name(l)))
    }

    pub fn location_type(&self, i: usize) -> &Type {
        &self.locations[i].ty
    }

    pub fn read(&self, s: StoreId, loc: usize) -> Value {
        let l = &self.locations[loc];
        let k = (s / l.stride) % l.values.len() as u32;
        l.values[k as usize].clone()
    }

    pub fn write(&self, s: StoreId, loc: usize, v: &Value) -> Result<StoreId, ModelError> {
        let l = &self.locations[loc];
        let new = *l.index.get(v).ok_or_else(|| ModelError::Shape {
            expected: "a value of the location's carrier",
            found: v.shape(),
        })?;
        let old = (s / l.stride) % l.values.len() as u32;
        Ok(s - old * l.stride + new * l.stride)
    }

    /// `l1=v1,l2=v2,...` in declaration order.
    pub fn show_store(&self, s: StoreId) -> String {
        (0..self.locations.len())
            .map(|i| format!("{}={}", self.locations[i].name, self.show(&self.read(s, i))))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Read a store from `l=v` assignments; unmentioned locations take the
    /// first value of their carrier.
    pub fn parse_store(&self, text: &str) -> Result<StoreId, ModelError> {
        let mut s = 0;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (l, v) = part.split_once('=').ok_or_else(|| ModelError::BadValue {
                text: part.to_string(),
                ty: Type::Unit,
            })?;
            let i = self.location_index(l.trim())?;
            let v = self.parse_value(&self.locations[i].ty, v.trim())?;
            s = self.write(s, i, &v)?;
        }
        Ok(s)
    }

    pub fn parse_value(&self, ty: &Type, text: &str) -> Result<Value, ModelError> {
        self.enumerate(ty)?
            .into_iter()
            .find(|v| self.show(v) == text)
            .ok_or_else(|| ModelError::BadValue {
                text: text.to_string(),
                ty: ty.clone(),
            })
    }

    /// Surface rendering of a value.
    pub fn show(&self, v: &Value) -> String {
        match v {
            Value::Unit => "*".into(),
            v if v.as_bool().is_some() => if v.as_bool().unwrap() { "tt" } else { "ff" }.into(),
            Value::Pair(p) => format!("<{}, {}>", self.show(&p.0), self.show(&p.1)),
            Value::Inl(a) => format!("inl {}", self.show_tight(a)),
            Value::Inr(a) => format!("inr {}", self.show_tight(a)),
            Value::Atom { ty, elem } => match self.carriers.get(ty) {
                Some(es) => format!("{ty}.{}", es[*elem as usize]),
                None => format!("{ty}#{elem}"),
            },
            Value::Comp(c) => format!("comp#{}", c.id()),
            Value::Proc(p) => format!("proc#{}", p.id()),
        }
    }

    fn show_tight(&self, v: &Value) -> String {
        match v {
            Value::Inl(_) | Value::Inr(_) if v.as_bool().is_none() => format!("({})", self.show(v)),
            _ => self.show(v),
        }
    }

    // ---- interning ----

    pub fn comp(&self, kind: CompKind) -> Comp {
        let mut table = self.comps.lock().unwrap();
        if let Some(c) = table.get(&kind) {
            return c.clone();
        }
        let id = self.next_comp.fetch_add(1, Ordering::Relaxed);
        let c = Comp(Arc::new(CompNode {
            id,
            kind: kind.clone(),
        }));
        table.insert(kind, c.clone());
        c
    }

    pub fn proc(&self, kind: ProcKind) -> Proc {
        let mut table = self.procs.lock().unwrap();
        if let Some(p) = table.get(&kind) {
            return p.clone();
        }
        let id = self.next_proc.fetch_add(1, Ordering::Relaxed);
        let p = Proc(Arc::new(ProcNode {
            id,
            kind: kind.clone(),
            step: OnceLock::new(),
        }));
        table.insert(kind, p.clone());
        p
    }

    /// Number of distinct computations and processes created so far.
    pub fn interned(&self) -> (usize, usize) {
        (
            self.comps.lock().unwrap().len(),
            self.procs.lock().unwrap().len(),
        )
    }

    pub fn unit_t(&self, v: Value) -> Comp {
        self.comp(CompKind::Ret(v))
    }

    pub fn nil_t(&self) -> Comp {
        self.comp(CompKind::Nil)
    }

    pub fn plus_t(&self, a: &Comp, b: &Comp) -> Comp {
        self.comp(CompKind::Plus(a.clone(), b.clone()))
    }

    pub fn bind_t(&self, c: &Comp, k: Kont) -> Comp {
        self.comp(CompKind::Bind(c.clone(), k))
    }

    pub fn get_t(&self, loc: usize) -> Comp {
        self.comp(CompKind::Get(loc))
    }

    pub fn set_t(&self, loc: usize, v: Value) -> Comp {
        self.comp(CompKind::Set(loc, v))
    }

    /// A computation given by its outcome set at every store.
    pub fn table(&self, f: impl Fn(StoreId) -> Vec<(StoreId, Value)>) -> Comp {
        let rows: Vec<Outcomes> = self.stores().map(|s| canonical(f(s))).collect();
        self.comp(CompKind::Table(rows.into()))
    }

    pub fn native(
        f: impl Fn(&Model, Value) -> Result<Comp, ModelError> + Send + Sync + 'static,
    ) -> Kont {
        Kont::Native(Arc::new(f))
    }

    // ---- evaluation ----

    pub fn eval_closed(&self, t: &Term) -> Result<Value, ModelError> {
        self.eval(&Env::new(), t)
    }

    pub fn eval_comp(&self, env: &Env, t: &Term) -> Result<Comp, ModelError> {
        Ok(self.eval(env, t)?.as_comp()?.clone())
    }

    pub fn eval_proc(&self, env: &Env, t: &Term) -> Result<Proc, ModelError> {
        Ok(self.eval(env, t)?.as_proc()?.clone())
    }

    /// Compositional interpretation of a well-typed term.
    pub fn eval(&self, env: &Env, t: &Term) -> Result<Value, ModelError> {
        Ok(match t.kind() {
            TermKind::Var(x) => env
                .lookup(x)
                .cloned()
                .ok_or_else(|| ModelError::UnboundVariable(x.clone()))?,
            TermKind::App(f, a) => {
                let v = self.eval(env, a)?;
                self.apply_symbol(f, v)?
            }
            TermKind::Star => Value::Unit,
            TermKind::Pair(a, b) => Value::pair(self.eval(env, a)?, self.eval(env, b)?),
            TermKind::Fst(a) | TermKind::Snd(a) => match self.eval(env, a)? {
                Value::Pair(p) => {
                    if matches!(t.kind(), TermKind::Fst(_)) {
                        p.0.clone()
                    } else {
                        p.1.clone()
                    }
                }
                other => {
                    return Err(ModelError::Shape {
                        expected: "a pair",
                        found: other.shape(),
                    })
                }
            },
            TermKind::Inl(a, _) => Value::inl(self.eval(env, a)?),
            TermKind::Inr(a, _) => Value::inr(self.eval(env, a)?),
            TermKind::Case(s, x, l, y, r) => match self.eval(env, s)? {
                Value::Inl(v) => self.eval(&env.bind(x, (*v).clone()), l)?,
                Value::Inr(v) => self.eval(&env.bind(y, (*v).clone()), r)?,
                other => {
                    return Err(ModelError::Shape {
                        expected: "inl or inr",
                        found: other.shape(),
                    })
                }
            },
            TermKind::Ret(a) => Value::Comp(self.unit_t(self.eval(env, a)?)),
            TermKind::Do(x, p, q) => {
                let c = self.eval_comp(env, p)?;
                Value::Comp(self.bind_t(&c, self.lam(env, x, q)?))
            }
            TermKind::Nil(_) => Value::Comp(self.nil_t()),
            TermKind::Plus(a, b) => {
                let a = self.eval_comp(env, a)?;
                let b = self.eval_comp(env, b)?;
                Value::Comp(self.plus_t(&a, &b))
            }
            TermKind::Out(p) => Value::Comp(self.comp(CompKind::Out(self.eval_proc(env, p)?))),
            TermKind::Init(x, seed, body) => {
                let seed = self.eval(env, seed)?;
                Value::Proc(self.proc(ProcKind::Unfold {
                    body: self.lam(env, x, body)?,
                    seed,
                }))
            }
        })
    }

    /// Close `λx. body` over the current values of its other free variables.
    pub fn lam(&self, env: &Env, x: &Name, body: &Term) -> Result<Kont, ModelError> {
        let mut vals = Vec::new();
        for y in body.free_vars().iter().filter(|y| *y != x) {
            vals.push(
                env.lookup(y)
                    .cloned()
                    .ok_or_else(|| ModelError::UnboundVariable(y.clone()))?,
            );
        }
        Ok(Kont::Lam {
            var: x.clone(),
            body: body.clone(),
            env: vals.into(),
        })
    }

    fn apply_symbol(&self, f: &Name, v: Value) -> Result<Value, ModelError> {
        let d = self
            .symbols
            .read()
            .unwrap()
            .get(f)
            .cloned()
            .ok_or_else(|| ModelError::NoDenotation(f.clone()))?;
        Ok(match d {
            Denotation::Get(i) => Value::Comp(self.get_t(i)),
            Denotation::Set(i) => Value::Comp(self.set_t(i, v)),
            Denotation::Const(c) => c,
            Denotation::Native(g) => g(&v)?,
            Denotation::Def { params, body, env } => {
                let mut env = env;
                let mut rest = v;
                for (i, p) in params.iter().enumerate() {
                    if i + 1 == params.len() {
                        env = env.bind(p, rest.clone());
                        break;
                    }
                    match rest {
                        Value::Pair(pair) => {
                            env = env.bind(p, pair.0.clone());
                            rest = pair.1.clone();
                        }
                        _ => return Err(ModelError::Arity(f.clone())),
                    }
                }
                self.eval(&env, &body)?
            }
        })
    }

    /// Apply a continuation to a value.
    pub fn apply(&self, k: &Kont, v: Value) -> Result<Comp, ModelError> {
        match k {
            Kont::Lam { var, body, env } => {
                let mut e = Env::new();
                for (y, val) in body
                    .free_vars()
                    .iter()
                    .filter(|y| *y != var)
                    .zip(env.iter())
                {
                    e = e.bind(y, val.clone());
                }
                self.eval_comp(&e.bind(var, v), body)
            }
            Kont::Builtin(Builtin::Collapse, _) => match v {
                Value::Inl(r) => Ok(self.comp(CompKind::Out(r.as_proc()?.clone()))),
                Value::Inr(_) => Ok(self.unit_t(v)),
                other => Err(ModelError::Shape {
                    expected: "inl or inr",
                    found: other.shape(),
                }),
            },
            Kont::Builtin(Builtin::Discard, _) => Ok(self.unit_t(Value::Unit)),
            Kont::Native(f) => f(self, v),
        }
    }

    // ---- running ----

    /// The observation of a process: one layer of type `T (T_nu A + A)`.
    pub fn step(&self, p: &Proc) -> Result<Comp, ModelError> {
        if let Some(r) = p.0.step.get() {
            return r.clone();
        }
        let r = match p.kind() {
            ProcKind::Tuo(c) => Ok(c.clone()),
            ProcKind::Unfold { body, seed } => self
                .apply(body, seed.clone())
                .map(|inner| self.comp(CompKind::Layer(inner, body.clone()))),
        };
        let _ = p.0.step.set(r);
        p.0.step.get().unwrap().clone()
    }

    /// The outcome set of `c` started in store `s`.
    pub fn run(&self, c: &Comp, s: StoreId) -> Result<Outcomes, ModelError> {
        if let Some(o) = self.runs.lock().unwrap().get(&(c.id(), s)) {
            return Ok(o.clone());
        }
        let out = match c.kind() {
            CompKind::Ret(v) => canonical(vec![(s, v.clone())]),
            CompKind::Nil => canonical(Vec::new()),
            CompKind::Plus(a, b) => {
                let mut all: Vec<_> = self.run(a, s)?.to_vec();
                all.extend(self.run(b, s)?.iter().cloned());
                canonical(all)
            }
            CompKind::Bind(inner, k) => {
                let mut all = Vec::new();
                for (s1, v) in self.run(inner, s)?.iter() {
                    let next = self.apply(k, v.clone())?;
                    all.extend(self.run(&next, *s1)?.iter().cloned());
                }
                canonical(all)
            }
            CompKind::Out(p) => self.run(&self.step(p)?, s)?,
            CompKind::Get(i) => canonical(vec![(s, self.read(s, *i))]),
            CompKind::Set(i, v) => canonical(vec![(self.write(s, *i, v)?, Value::Unit)]),
            CompKind::Layer(inner, body) => {
                let mut all = Vec::new();
                for (s1, v) in self.run(inner, s)?.iter() {
                    let v = match v {
                        Value::Inl(a) => Value::inl(Value::Proc(self.proc(ProcKind::Unfold {
                            body: body.clone(),
                            seed: (**a).clone(),
                        }))),
                        Value::Inr(_) => v.clone(),
                        other => {
                            return Err(ModelError::Shape {
                                expected: "inl or inr",
                                found: other.shape(),
                            })
                        }
                    };
                    all.push((*s1, v));
                }
                canonical(all)
            }
            CompKind::Table(rows) => rows[s as usize].clone(),
        };
        self.runs.lock().unwrap().insert((c.id(), s), out.clone());
        Ok(out)
    }

    // ---- equality ----

    /// Extensional equality at the default depth.
    pub fn eq_t(&self, a: &Comp, b: &Comp) -> Result<bool, ModelError> {
        self.eq_comp(a, b, DEFAULT_DEPTH)
    }

    /// `a` and `b` have the same outcomes at every store, with embedded
    /// processes compared up to `depth` layers and embedded computations
    /// compared at `depth`.
    pub fn eq_comp(&self, a: &Comp, b: &Comp, depth: u32) -> Result<bool, ModelError> {
        if a == b {
            return Ok(true);
        }
        let key = (a.id().min(b.id()), a.id().max(b.id()), depth);
        if let Some(r) = self.eqs.lock().unwrap().get(&key) {
            return Ok(*r);
        }
        let mut result = true;
        for s in self.stores() {
            if !self.eq_outcomes(&self.run(a, s)?, &self.run(b, s)?, depth)? {
                result = false;
                break;
            }
        }
        self.eqs.lock().unwrap().insert(key, result);
        Ok(result)
    }

    /// The first store at which `a` and `b` differ, if any.
    pub fn distinguishing_store(
        &self,
        a: &Comp,
        b: &Comp,
        depth: u32,
    ) -> Result<Option<StoreId>, ModelError> {
        for s in self.stores() {
            if !self.eq_outcomes(&self.run(a, s)?, &self.run(b, s)?, depth)? {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    /// Equality of outcome sets modulo value equivalence at `depth`.
    pub fn eq_outcomes(&self, x: &Outcomes, y: &Outcomes, depth: u32) -> Result<bool, ModelError> {
        if x == y {
            return Ok(true);
        }
        Ok(self.covered(x, y, depth)? && self.covered(y, x, depth)?)
    }

    fn covered(&self, x: &Outcomes, y: &Outcomes, depth: u32) -> Result<bool, ModelError> {
        'outer: for (s, v) in x.iter() {
            for (t, w) in y.iter().filter(|(t, _)| t == s) {
                let _ = t;
                if self.eq_value(v, w, depth)? {
                    continue 'outer;
                }
            }
            return Ok(false);
        }
        Ok(true)
    }

    pub fn eq_value(&self, v: &Value, w: &Value, depth: u32) -> Result<bool, ModelError> {
        if v == w {
            return Ok(true);
        }
        Ok(match (v, w) {
            (Value::Pair(a), Value::Pair(b)) => {
                self.eq_value(&a.0, &b.0, depth)? && self.eq_value(&a.1, &b.1, depth)?
            }
            (Value::Inl(a), Value::Inl(b)) | (Value::Inr(a), Value::Inr(b)) => {
                self.eq_value(a, b, depth)?
            }
            (Value::Comp(a), Value::Comp(b)) => self.eq_comp(a, b, depth)?,
            (Value::Proc(a), Value::Proc(b)) => self.bisim(a, b, depth)?,
            _ => false,
        })
    }

    /// Bounded bisimilarity: `depth = 0` identifies everything; otherwise
    /// the observations agree with successors compared at `depth - 1`.
    pub fn bisim(&self, a: &Proc, b: &Proc, depth: u32) -> Result<bool, ModelError> {
        if depth == 0 || a == b {
            return Ok(true);
        }
        let key = (a.id().min(b.id()), a.id().max(b.id()), depth);
        if let Some(r) = self.bisims.lock().unwrap().get(&key) {
            return Ok(*r);
        }
        let r = self.eq_comp(&self.step(a)?, &self.step(b)?, depth - 1)?;
        self.bisims.lock().unwrap().insert(key, r);
        Ok(r)
    }
}

/// Sort and deduplicate an outcome list.
pub fn canonical(v: Vec<(StoreId, Value)>) -> Outcomes {
    let set: BTreeSet<(StoreId, Value)> = v.into_iter().collect();
    set.into_iter().collect::<Vec<_>>().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{desugar, parse_surface_term, Context};

    fn term(m: &Model, src: &str) -> Term {
        desugar(
            m.signature(),
            &Context::new(),
            &parse_surface_term(src).unwrap(),
            None,
        )
        .unwrap()
        .0
    }

    fn comp(m: &Model, src: &str) -> Comp {
        m.eval_comp(&Env::new(), &term(m, src)).unwrap()
    }

    #[test]
    fn unit_is_singleton_at_every_store() {
        let m = Model::booleans(2);
        let c = m.unit_t(Value::tt());
        for s in m.stores() {
            assert_eq!(&*m.run(&c, s).unwrap(), &[(s, Value::tt())]);
        }
    }

    #[test]
    fn plus_unions_outcomes() {
        let m = Model::booleans(1);
        let c = comp(&m, "ret tt + ret ff");
        let s = m.parse_store("l1=ff").unwrap();
        assert_eq!(
            &*m.run(&c, s).unwrap(),
            &[(s, Value::tt()), (s, Value::ff())]
        );
    }

    #[test]
    fn bind_of_choice_into_setter() {
        let m = Model::booleans(1);
        let c = comp(&m, "do x <- ret tt + ret ff; set(l1, x)");
        let s = m.parse_store("l1=ff").unwrap();
        let mut got: Vec<String> = m
            .run(&c, s)
            .unwrap()
            .iter()
            .map(|(t, v)| format!("{} {}", m.show_store(*t), m.show(v)))
            .collect();
        got.sort();
        assert_eq!(got, vec!["l1=ff *", "l1=tt *"]);
    }

    #[test]
    fn negated_read() {
        let m = Model::booleans(1);
        let c = comp(&m, "do x <- get(l1); ret not(x)");
        let s = m.parse_store("l1=tt").unwrap();
        assert_eq!(&*m.run(&c, s).unwrap(), &[(s, Value::ff())]);
    }

    #[test]
    fn nil_absorbs_binding_and_sum() {
        let m = Model::booleans(2);
        let nil = comp(&m, "(nil : T 2)");
        let bound = comp(&m, "do x <- (nil : T 2); set(l1, x)");
        let unit_nil = comp(&m, "(nil : T 1)");
        assert!(m.eq_t(&bound, &unit_nil).unwrap());
        let c = comp(&m, "get(l2)");
        assert!(m.eq_t(&m.plus_t(&c, &nil), &c).unwrap());
        assert!(m.eq_t(&m.plus_t(&c, &c), &c).unwrap());
    }

    #[test]
    fn eq_distinguishes_constants() {
        let m = Model::booleans(1);
        assert!(!m
            .eq_t(&m.unit_t(Value::tt()), &m.unit_t(Value::ff()))
            .unwrap());
        let c = comp(&m, "get(l1)");
        assert!(m.eq_t(&c, &c).unwrap());
    }

    #[test]
    fn interning_shares_identical_descriptions() {
        let m = Model::booleans(1);
        let t = term(&m, "do x <- get(l1); ret x");
        let a = m.eval_comp(&Env::new(), &t).unwrap();
        let b = m.eval_comp(&Env::new(), &t).unwrap();
        assert_eq!(a.id(), b.id());
        let c = comp(&m, "do x <- get(l1); ret x");
        assert!(m.eq_t(&a, &c).unwrap());
    }

    #[test]
    fn stores_round_trip() {
        let m = Model::booleans(3);
        assert_eq!(m.store_count(), 8);
        for s in m.stores() {
            assert_eq!(m.parse_store(&m.show_store(s)).unwrap(), s);
        }
    }

    #[test]
    fn universe_bound_is_enforced() {
        let cfg = ModelConfig {
            universe_bound: 4,
            ..ModelConfig::booleans(3)
        };
        assert!(matches!(
            Model::new(Signature::with_prelude(), cfg),
            Err(ModelError::UniverseTooLarge { size: 8, bound: 4 })
        ));
    }

    #[test]
    fn carriers_enumerate_in_declaration_order() {
        let cfg = ModelConfig {
            carriers: vec![(name("N3"), vec![name("0"), name("1"), name("2")])],
            locations: vec![(name("n"), Type::Base(name("N3")))],
            ..Default::default()
        };
        let m = Model::new(Signature::with_prelude(), cfg).unwrap();
        assert_eq!(m.store_count(), 3);
        let c = comp(&m, "do _ <- set(n, N3.2); get(n)");
        let out = m.run(&c, 0).unwrap();
        assert_eq!(m.show(&out[0].1), "N3.2");
    }
}
