//! Semantic values, computation and process handles, and continuations.

use crate::syntax::{Name, Term};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use super::ModelError;

/// A value of the concrete model. Computations and processes are handles
/// into the owning [`super::Model`]; they compare by identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Pair(Arc<(Value, Value)>),
    Inl(Arc<Value>),
    Inr(Arc<Value>),
    Atom { ty: Name, elem: u32 },
    Comp(Comp),
    Proc(Proc),
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Arc::new((a, b)))
    }

    pub fn inl(v: Value) -> Value {
        Value::Inl(Arc::new(v))
    }

    pub fn inr(v: Value) -> Value {
        Value::Inr(Arc::new(v))
    }

    pub fn tt() -> Value {
        Value::inl(Value::Unit)
    }

    pub fn ff() -> Value {
        Value::inr(Value::Unit)
    }

    pub fn bool(b: bool) -> Value {
        if b {
            Value::tt()
        } else {
            Value::ff()
        }
    }

    /// `Some(b)` for the two values of `2 = 1 + 1`.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Inl(v) if **v == Value::Unit => Some(true),
            Value::Inr(v) if **v == Value::Unit => Some(false),
            _ => None,
        }
    }

    pub fn as_comp(&self) -> Result<&Comp, ModelError> {
        match self {
            Value::Comp(c) => Ok(c),
            other => Err(ModelError::Shape {
                expected: "a computation",
                found: other.shape(),
            }),
        }
    }

    pub fn as_proc(&self) -> Result<&Proc, ModelError> {
        match self {
            Value::Proc(p) => Ok(p),
            other => Err(ModelError::Shape {
                expected: "a process",
                found: other.shape(),
            }),
        }
    }

    pub fn shape(&self) -> String {
        match self {
            Value::Unit => "*".into(),
            Value::Pair(_) => "a pair".into(),
            Value::Inl(_) => "inl _".into(),
            Value::Inr(_) => "inr _".into(),
            Value::Atom { ty, .. } => format!("an element of {ty}"),
            Value::Comp(_) => "a computation".into(),
            Value::Proc(_) => "a process".into(),
        }
    }

    /// Whether the value contains no computation or process handles.
    pub fn is_first_order(&self) -> bool {
        match self {
            Value::Unit | Value::Atom { .. } => true,
            Value::Pair(p) => p.0.is_first_order() && p.1.is_first_order(),
            Value::Inl(v) | Value::Inr(v) => v.is_first_order(),
            Value::Comp(_) | Value::Proc(_) => false,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "*"),
            Value::Pair(p) => write!(f, "<{:?}, {:?}>", p.0, p.1),
            v if v.as_bool().is_some() => {
                write!(f, "{}", if v.as_bool().unwrap() { "tt" } else { "ff" })
            }
            Value::Inl(v) => write!(f, "inl {v:?}"),
            Value::Inr(v) => write!(f, "inr {v:?}"),
            Value::Atom { ty, elem } => write!(f, "{ty}#{elem}"),
            Value::Comp(c) => write!(f, "comp#{}", c.id()),
            Value::Proc(p) => write!(f, "proc#{}", p.id()),
        }
    }
}

/// Built-in continuations used by the semantic operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `inl r -> out r | inr v -> ret (inr v)`: fuses two layers.
    Collapse,
    /// `inl r -> ret (inl r) | inr v -> ret (inr v)` projected to `ret *`.
    Discard,
}

pub type NativeFn = dyn Fn(&super::Model, Value) -> Result<Comp, ModelError> + Send + Sync;

/// A continuation `Value -> Comp`.
#[derive(Clone)]
pub enum Kont {
    /// `λ var. body` closed over the values of the body's other free
    /// variables, in sorted name order.
    Lam {
        var: Name,
        body: Term,
        env: Arc<[Value]>,
    },
    Builtin(Builtin, Arc<[Value]>),
    Native(Arc<NativeFn>),
}

impl Kont {
    fn key(
        &self,
    ) -> (
        u8,
        usize,
        Option<&Name>,
        Option<&Arc<[Value]>>,
        Option<Builtin>,
    ) {
        match self {
            Kont::Lam { var, body, env } => (0, body.node_id(), Some(var), Some(env), None),
            Kont::Builtin(b, env) => (1, 0, None, Some(env), Some(*b)),
            Kont::Native(f) => (2, Arc::as_ptr(f) as *const () as usize, None, None, None),
        }
    }
}

impl PartialEq for Kont {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Kont {}

impl Hash for Kont {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Debug for Kont {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kont::Lam { var, body, .. } => write!(f, "\\{var}. {body}"),
            Kont::Builtin(b, _) => write!(f, "{b:?}"),
            Kont::Native(_) => write!(f, "<native>"),
        }
    }
}

/// Store index into the model's finite store universe.
pub type StoreId = u32;

/// A canonical outcome set: sorted, without duplicates.
pub type Outcomes = Arc<[(StoreId, Value)]>;

/// The description of a computation, interned per model.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum CompKind {
    Ret(Value),
    Nil,
    Plus(Comp, Comp),
    Bind(Comp, Kont),
    Out(Proc),
    Get(usize),
    Set(usize, Value),
    /// One coiteration layer: `inl a` continues as `unfold(body, a)`.
    Layer(Comp, Kont),
    /// An explicit outcome table, one entry per store.
    Table(Arc<[Outcomes]>),
}

pub struct CompNode {
    pub(super) id: u32,
    pub(super) kind: CompKind,
}

/// A computation `S -> P_fin(S x X)`; see [`super::Model::run`].
#[derive(Clone)]
pub struct Comp(pub(super) Arc<CompNode>);

impl Comp {
    pub fn id(&self) -> u32 {
        self.0.id
    }

    pub fn kind(&self) -> &CompKind {
        &self.0.kind
    }
}

impl PartialEq for Comp {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Comp {}

impl Hash for Comp {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl PartialOrd for Comp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Comp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.id.cmp(&other.0.id)
    }
}

impl fmt::Debug for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "comp#{}", self.0.id)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ProcKind {
    /// `init x := seed in body`.
    Unfold { body: Kont, seed: Value },
    /// `tuo c`: a process whose single observation is `c`.
    Tuo(Comp),
}

pub struct ProcNode {
    pub(super) id: u32,
    pub(super) kind: ProcKind,
    pub(super) step: OnceLock<Result<Comp, ModelError>>,
}

/// A resumption: a memoized thunk whose observation is a layer computation.
#[derive(Clone)]
pub struct Proc(pub(super) Arc<ProcNode>);

impl Proc {
    pub fn id(&self) -> u32 {
        self.0.id
    }

    pub fn kind(&self) -> &ProcKind {
        &self.0.kind
    }
}

impl PartialEq for Proc {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Proc {}

impl Hash for Proc {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl PartialOrd for Proc {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Proc {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.id.cmp(&other.0.id)
    }
}

impl fmt::Debug for Proc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "proc#{}", self.0.id)
    }
}
