//! Brute-force explicit-state evaluator over Boolean stores, written
//! directly against the core term syntax. Shares nothing with the model.

#![allow(dead_code)]

use menu_core::syntax::{Name, Term, TermKind};
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

pub type Store = Vec<bool>;

#[derive(Clone)]
pub enum OV {
    Unit,
    Pair(Rc<OV>, Rc<OV>),
    Inl(Rc<OV>),
    Inr(Rc<OV>),
    Comp(Rc<Clo>),
    Proc(Rc<Unfold>),
}

pub enum Clo {
    Term(Term, Env),
    Get(usize),
    Set(usize, OV),
}

pub struct Unfold {
    x: Name,
    body: Term,
    env: Env,
    seed: OV,
}

#[derive(Clone, Default)]
pub struct Env(Option<Rc<(Name, OV, Env)>>);

impl Env {
    fn bind(&self, x: &Name, v: OV) -> Env {
        Env(Some(Rc::new((x.clone(), v, self.clone()))))
    }

    fn get(&self, x: &str) -> OV {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if &*node.0 == x {
                return node.1.clone();
            }
            cur = &node.2;
        }
        panic!("oracle: unbound {x}")
    }
}

/// A canonical observation of a value at a store, to a bounded depth.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Obs {
    Unit,
    Pair(Box<Obs>, Box<Obs>),
    Inl(Box<Obs>),
    Inr(Box<Obs>),
    /// Outcomes of a computation, or of one process layer.
    Outcomes(BTreeSet<(Store, Obs)>),
    Truncated,
}

pub struct Oracle {
    locations: Vec<String>,
    defs: BTreeMap<String, (Vec<Name>, Term)>,
}

fn tt() -> OV {
    OV::Inl(Rc::new(OV::Unit))
}

fn ff() -> OV {
    OV::Inr(Rc::new(OV::Unit))
}

fn boolean(b: bool) -> OV {
    if b {
        tt()
    } else {
        ff()
    }
}

fn truth(v: &OV) -> bool {
    match v {
        OV::Inl(_) => true,
        OV::Inr(_) => false,
        _ => panic!("oracle: not a Boolean"),
    }
}

fn pair_parts(v: &OV) -> (OV, OV) {
    match v {
        OV::Pair(a, b) => ((**a).clone(), (**b).clone()),
        _ => panic!("oracle: not a pair"),
    }
}

impl Oracle {
    pub fn new(locations: Vec<String>, defs: BTreeMap<String, (Vec<Name>, Term)>) -> Oracle {
        Oracle { locations, defs }
    }

    /// Every store, first location most significant, `tt` before `ff`.
    pub fn stores(&self) -> Vec<Store> {
        let n = self.locations.len();
        (0..1u32 << n)
            .map(|k| (0..n).map(|i| k & (1 << (n - 1 - i)) == 0).collect())
            .collect()
    }

    fn loc(&self, l: &str) -> usize {
        self.locations
            .iter()
            .position(|x| x == l)
            .unwrap_or_else(|| panic!("oracle: no location {l}"))
    }

    fn apply(&self, f: &str, v: OV) -> OV {
        match f {
            "not" => boolean(!truth(&v)),
            "and" | "or" | "implies" | "iff" => {
                let (a, b) = pair_parts(&v);
                let (a, b) = (truth(&a), truth(&b));
                boolean(match f {
                    "and" => a && b,
                    "or" => a || b,
                    "implies" => !a || b,
                    _ => a == b,
                })
            }
            _ if f.starts_with("get.") => OV::Comp(Rc::new(Clo::Get(self.loc(&f[4..])))),
            _ if f.starts_with("set.") => OV::Comp(Rc::new(Clo::Set(self.loc(&f[4..]), v))),
            _ => {
                let (params, body) = self
                    .defs
                    .get(f)
                    .unwrap_or_else(|| panic!("oracle: unknown symbol {f}"));
                let mut env = Env::default();
                let mut rest = v;
                for (k, x) in params.iter().enumerate() {
                    if k + 1 == params.len() {
                        env = env.bind(x, rest.clone());
                    } else {
                        let (a, b) = pair_parts(&rest);
                        env = env.bind(x, a);
                        rest = b;
                    }
                }
                self.value(body, &env)
            }
        }
    }

    /// The value of a term; computations and processes are suspended.
    pub fn value(&self, t: &Term, env: &Env) -> OV {
        match t.kind() {
            TermKind::Var(x) => env.get(x),
            TermKind::App(f, e) => self.apply(f, self.value(e, env)),
            TermKind::Star => OV::Unit,
            TermKind::Pair(a, b) => {
                OV::Pair(Rc::new(self.value(a, env)), Rc::new(self.value(b, env)))
            }
            TermKind::Fst(p) => pair_parts(&self.value(p, env)).0,
            TermKind::Snd(p) => pair_parts(&self.value(p, env)).1,
            TermKind::Inl(a, _) => OV::Inl(Rc::new(self.value(a, env))),
            TermKind::Inr(a, _) => OV::Inr(Rc::new(self.value(a, env))),
            TermKind::Case(s, x, l, y, r) => match self.value(s, env) {
                OV::Inl(v) => self.value(l, &env.bind(x, (*v).clone())),
                OV::Inr(v) => self.value(r, &env.bind(y, (*v).clone())),
                _ => panic!("oracle: case on a non-sum"),
            },
            TermKind::Init(x, seed, body) => OV::Proc(Rc::new(Unfold {
                x: x.clone(),
                body: body.clone(),
                env: env.clone(),
                seed: self.value(seed, env),
            })),
            TermKind::Ret(_)
            | TermKind::Do(..)
            | TermKind::Nil(_)
            | TermKind::Plus(..)
            | TermKind::Out(_) => OV::Comp(Rc::new(Clo::Term(t.clone(), env.clone()))),
        }
    }

    /// All outcomes of a computation started at `s`.
    pub fn run(&self, c: &OV, s: &Store) -> Vec<(Store, OV)> {
        let OV::Comp(clo) = c else {
            panic!("oracle: running a non-computation")
        };
        match &**clo {
            Clo::Get(i) => vec![(s.clone(), boolean(s[*i]))],
            Clo::Set(i, v) => {
                let mut t = s.clone();
                t[*i] = truth(v);
                vec![(t, OV::Unit)]
            }
            Clo::Term(t, env) => self.run_term(t, env, s),
        }
    }

    fn run_term(&self, t: &Term, env: &Env, s: &Store) -> Vec<(Store, OV)> {
        match t.kind() {
            TermKind::Ret(e) => vec![(s.clone(), self.value(e, env))],
            TermKind::Nil(_) => Vec::new(),
            TermKind::Plus(p, q) => {
                let mut out = self.run_term(p, env, s);
                out.extend(self.run_term(q, env, s));
                out
            }
            TermKind::Do(x, p, q) => {
                let mut out = Vec::new();
                for (s1, v) in self.run_term(p, env, s) {
                    out.extend(self.run_term(q, &env.bind(x, v), &s1));
                }
                out
            }
            TermKind::Out(p) => match self.value(p, env) {
                OV::Proc(u) => self.layer(&u, s),
                _ => panic!("oracle: out of a non-process"),
            },
            _ => self.run(&self.value(t, env), s),
        }
    }

    fn layer(&self, u: &Unfold, s: &Store) -> Vec<(Store, OV)> {
        self.run_term(&u.body, &u.env.bind(&u.x, u.seed.clone()), s)
            .into_iter()
            .map(|(t, v)| match v {
                OV::Inl(a) => {
                    let next = Unfold {
                        x: u.x.clone(),
                        body: u.body.clone(),
                        env: u.env.clone(),
                        seed: (*a).clone(),
                    };
                    (t, OV::Inl(Rc::new(OV::Proc(Rc::new(next)))))
                }
                other => (t, other),
            })
            .collect()
    }

    /// Observe `v` at store `s`: computations by their outcome sets,
    /// processes by their layer trees of height `depth`.
    pub fn observe(&self, v: &OV, s: &Store, depth: u32) -> Obs {
        match v {
            OV::Unit => Obs::Unit,
            OV::Pair(a, b) => Obs::Pair(
                Box::new(self.observe(a, s, depth)),
                Box::new(self.observe(b, s, depth)),
            ),
            OV::Inl(a) => Obs::Inl(Box::new(self.observe(a, s, depth))),
            OV::Inr(a) => Obs::Inr(Box::new(self.observe(a, s, depth))),
            OV::Comp(_) => Obs::Outcomes(
                self.run(v, s)
                    .iter()
                    .map(|(t, x)| (t.clone(), self.observe(x, t, depth)))
                    .collect(),
            ),
            OV::Proc(u) => {
                if depth == 0 {
                    return Obs::Truncated;
                }
                Obs::Outcomes(
                    self.layer(u, s)
                        .iter()
                        .map(|(t, x)| (t.clone(), self.observe(x, t, depth - 1)))
                        .collect(),
                )
            }
        }
    }
}
