//! Purity, filters, Hoare triples, process invariants and bounded safety.

use crate::model::{Comp, Env, Model, ModelError, Proc, StoreId, Value};
use crate::syntax::{name, Name, Term};
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{which} is not a pure test")]
    NotPure { which: String },
    #[error("filter encoding says {filter} but the tuple equation says {tuple}")]
    EncodingMismatch { filter: bool, tuple: bool },
    #[error("{from} does not imply {to} at store {store}")]
    NotImplied {
        from: String,
        to: String,
        store: String,
    },
}

/// The outcome of one purity condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Purity {
    pub discardable: bool,
    pub copyable: bool,
    /// Index of the first probe that does not commute with the program.
    pub non_commuting_probe: Option<usize>,
}

impl Purity {
    pub fn is_pure(&self) -> bool {
        self.discardable && self.copyable && self.non_commuting_probe.is_none()
    }
}

/// Where a direct safety sweep first fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub n: usize,
    /// Store snapshots, one per layer, from a start store satisfying the
    /// precondition to a store failing the postcondition.
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantVerdict {
    pub depth: u32,
    pub holds: bool,
    /// A configuration reachable within `depth` layers whose next step
    /// leaves the invariant, as store snapshots, if the invariant fails.
    pub trace: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SafetyReport {
    pub horizon: usize,
    /// `None` when every `exec^n` for `n <= horizon` satisfies the triple.
    pub direct: Option<Violation>,
    /// The invariant route, when an invariant was supplied.
    pub invariant: Option<InvariantVerdict>,
}

impl SafetyReport {
    pub fn direct_safe(&self) -> bool {
        self.direct.is_none()
    }

    pub fn invariant_safe(&self) -> Option<bool> {
        self.invariant.as_ref().map(|v| v.holds)
    }
}

/// Verification over one model, with a fixed comparison depth and probe set.
pub struct Verifier<'m> {
    m: &'m Model,
    pub depth: u32,
    probes: Vec<Comp>,
    filter: Term,
    tuple_lhs: Term,
    tuple_rhs: Term,
    filter_nu: Term,
    vars: Vars,
}

struct Vars {
    p: Name,
    phi: Name,
    psi: Name,
}

impl<'m> Verifier<'m> {
    /// The default probe set: every getter and `ret` of every element of
    /// every location carrier.
    pub fn new(m: &'m Model, depth: u32) -> Self {
        let mut probes: Vec<Comp> = (0..m.location_names().len()).map(|i| m.get_t(i)).collect();
        let mut seen = Vec::new();
        for i in 0..m.location_names().len() {
            for v in m.enumerate(m.location_type(i)).unwrap_or_default() {
                if !seen.contains(&v) {
                    seen.push(v.clone());
                    probes.push(m.unit_t(v));
                }
            }
        }
        let vars = Vars {
            p: name("p"),
            phi: name("phi"),
            psi: name("psi"),
        };
        let v = |x: &str| Term::var(x);
        let [x, y, z, w] = ["x", "y", "z", "w"].map(name);
        let prefix = |tail: Term| {
            Term::bind(
                &x,
                v("phi"),
                Term::bind(&y, v("p"), Term::bind(&z, v("psi"), tail)),
            )
        };
        let imp = Term::app("implies", Term::pair(v("x"), v("z")));
        let u = name("_");
        let filter = prefix(Term::case(
            imp.clone(),
            &u,
            Term::ret(v("y")),
            &u,
            Term::nil(None),
        ));
        let tuple = |last: Term| {
            Term::ret(Term::pair(
                v("x"),
                Term::pair(v("y"), Term::pair(v("z"), last)),
            ))
        };
        let tuple_lhs = prefix(tuple(imp));
        let tuple_rhs = prefix(tuple(Term::tt()));
        let filtered_layer = Term::bind(
            &x,
            v("phi"),
            Term::bind(
                &y,
                Term::out(v("w")),
                Term::bind(
                    &z,
                    v("psi"),
                    Term::case(
                        Term::app("implies", Term::pair(v("x"), v("z"))),
                        &u,
                        Term::ret(v("y")),
                        &u,
                        Term::nil(None),
                    ),
                ),
            ),
        );
        let filter_nu = Term::init(&w, v("p"), filtered_layer);
        Verifier {
            m,
            depth,
            probes,
            filter,
            tuple_lhs,
            tuple_rhs,
            filter_nu,
            vars,
        }
    }

    pub fn model(&self) -> &'m Model {
        self.m
    }

    pub fn add_probe(&mut self, c: Comp) {
        self.probes.push(c);
    }

    fn env(&self, p: Value, phi: &Comp, psi: &Comp) -> Env {
        Env::new()
            .bind(&self.vars.p, p)
            .bind(&self.vars.phi, Value::Comp(phi.clone()))
            .bind(&self.vars.psi, Value::Comp(psi.clone()))
    }

    fn eq(&self, a: &Comp, b: &Comp) -> Result<bool, ModelError> {
        self.m.eq_comp(a, b, self.depth)
    }

    fn pair_after(&self, first: &Comp, second: &Comp, swap: bool) -> Comp {
        let second = second.clone();
        self.m.bind_t(
            first,
            Model::native(move |m, x| {
                Ok(m.bind_t(
                    &second,
                    Model::native(move |m, y| {
                        Ok(m.unit_t(if swap {
                            Value::pair(y, x.clone())
                        } else {
                            Value::pair(x.clone(), y)
                        }))
                    }),
                ))
            }),
        )
    }

    pub fn discardable(&self, p: &Comp) -> Result<bool, ModelError> {
        let dropped = self
            .m
            .bind_t(p, Model::native(|m, _| Ok(m.unit_t(Value::Unit))));
        self.eq(&dropped, &self.m.unit_t(Value::Unit))
    }

    pub fn copyable(&self, p: &Comp) -> Result<bool, ModelError> {
        let twice = self.pair_after(p, p, false);
        let once = self.m.bind_t(
            p,
            Model::native(|m, x| Ok(m.unit_t(Value::pair(x.clone(), x)))),
        );
        self.eq(&twice, &once)
    }

    pub fn commutes(&self, p: &Comp, q: &Comp) -> Result<bool, ModelError> {
        self.eq(&self.pair_after(p, q, false), &self.pair_after(q, p, true))
    }

    pub fn purity(&self, p: &Comp) -> Result<Purity, ModelError> {
        let discardable = self.discardable(p)?;
        let copyable = self.copyable(p)?;
        let mut non_commuting_probe = None;
        for (i, q) in self.probes.iter().enumerate() {
            if !self.commutes(p, q)? {
                non_commuting_probe = Some(i);
                break;
            }
        }
        Ok(Purity {
            discardable,
            copyable,
            non_commuting_probe,
        })
    }

    pub fn is_pure(&self, p: &Comp) -> Result<bool, ModelError> {
        Ok(self.purity(p)?.is_pure())
    }

    fn require_pure(&self, which: &str, t: &Comp) -> Result<(), VerifyError> {
        if self.is_pure(t)? {
            Ok(())
        } else {
            Err(VerifyError::NotPure {
                which: which.to_string(),
            })
        }
    }

    /// `do x <- phi; y <- p; z <- psi; if x => z then ret y else nil`.
    pub fn filter(&self, p: &Comp, phi: &Comp, psi: &Comp) -> Result<Comp, ModelError> {
        self.m
            .eval_comp(&self.env(Value::Comp(p.clone()), phi, psi), &self.filter)
    }

    /// The Hoare triple by both encodings; they must agree.
    pub fn hoare(&self, phi: &Comp, p: &Comp, psi: &Comp) -> Result<bool, VerifyError> {
        self.require_pure("precondition", phi)?;
        self.require_pure("postcondition", psi)?;
        self.hoare_unchecked(phi, p, psi)
    }

    /// [`Self::hoare`] without the purity checks.
    pub fn hoare_unchecked(&self, phi: &Comp, p: &Comp, psi: &Comp) -> Result<bool, VerifyError> {
        let (filter, tuple) = self.encodings(phi, p, psi)?;
        if filter != tuple {
            return Err(VerifyError::EncodingMismatch { filter, tuple });
        }
        Ok(filter)
    }

    /// The verdicts of the filter encoding and of the tuple equation.
    pub fn encodings(&self, phi: &Comp, p: &Comp, psi: &Comp) -> Result<(bool, bool), ModelError> {
        let filter = self.eq(&self.filter(p, phi, psi)?, p)?;
        let env = self.env(Value::Comp(p.clone()), phi, psi);
        let lhs = self.m.eval_comp(&env, &self.tuple_lhs)?;
        let rhs = self.m.eval_comp(&env, &self.tuple_rhs)?;
        Ok((filter, self.eq(&lhs, &rhs)?))
    }

    /// `init w := r in filter(out w, phi, psi)`.
    pub fn filter_nu(&self, r: &Proc, phi: &Comp, psi: &Comp) -> Result<Proc, ModelError> {
        Ok(self
            .m
            .eval_proc(&self.env(Value::Proc(r.clone()), phi, psi), &self.filter_nu)?)
    }

    /// `filter_nu(r, phi, phi)` is bisimilar to `r` at depth `k`.
    pub fn is_invariant(&self, r: &Proc, phi: &Comp, k: u32) -> Result<bool, ModelError> {
        let filtered = self.filter_nu(r, phi, phi)?;
        self.m.bisim(&filtered, r, k)
    }

    /// Whether the test holds (yields `tt`) at a store.
    pub fn holds(&self, t: &Comp, s: StoreId) -> Result<bool, ModelError> {
        Ok(self
            .m
            .run(t, s)?
            .iter()
            .any(|(_, v)| v.as_bool() == Some(true)))
    }

    fn fails(&self, t: &Comp, s: StoreId) -> Result<bool, ModelError> {
        Ok(self
            .m
            .run(t, s)?
            .iter()
            .any(|(_, v)| v.as_bool() != Some(true)))
    }

    /// `from => to` at every store.
    pub fn implies(&self, from: &Comp, to: &Comp) -> Result<Option<StoreId>, ModelError> {
        for s in self.m.stores() {
            if self.holds(from, s)? && self.fails(to, s)? {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    /// Safety of `r` with respect to `psi` at `phi`: the direct sweep over
    /// `exec^n r` for `n <= horizon`, and, given `xi`, the invariant route.
    pub fn check_safety(
        &self,
        r: &Proc,
        phi: &Comp,
        psi: &Comp,
        xi: Option<&Comp>,
        horizon: usize,
    ) -> Result<SafetyReport, VerifyError> {
        self.require_pure("precondition", phi)?;
        self.require_pure("postcondition", psi)?;
        let mut direct = None;
        let mut cur = r.clone();
        for n in 0..=horizon {
            if n > 0 {
                cur = self.m.exec_r(&cur)?;
            }
            let layer = self.m.out_r(&cur)?;
            if !self.hoare_unchecked(phi, &layer, psi)? {
                direct = Some(Violation {
                    n,
                    trace: self.violation_trace(r, phi, psi, n as u32)?,
                });
                break;
            }
        }
        let invariant = match xi {
            None => None,
            Some(xi) => {
                self.require_pure("invariant", xi)?;
                for (from, to, a, b) in [
                    (phi, xi, "precondition", "invariant"),
                    (xi, psi, "invariant", "postcondition"),
                ] {
                    if let Some(s) = self.implies(from, to)? {
                        return Err(VerifyError::NotImplied {
                            from: a.into(),
                            to: b.into(),
                            store: self.m.show_store(s),
                        });
                    }
                }
                let depth = horizon as u32;
                let holds = self.is_invariant(r, xi, depth)?;
                let trace = if holds {
                    None
                } else {
                    self.invariant_breach(r, xi, depth)?
                };
                Some(InvariantVerdict {
                    depth,
                    holds,
                    trace,
                })
            }
        };
        Ok(SafetyReport {
            horizon,
            direct,
            invariant,
        })
    }

    /// A shortest run of at most `n + 1` layers from a store satisfying
    /// `phi` to a store failing `psi`.
    fn violation_trace(
        &self,
        r: &Proc,
        phi: &Comp,
        psi: &Comp,
        n: u32,
    ) -> Result<Vec<String>, ModelError> {
        for s in self.m.stores() {
            if !self.holds(phi, s)? {
                continue;
            }
            if let Some(path) = self.search(r, s, n + 1, |t| self.fails(psi, t))? {
                return Ok(path.into_iter().map(|t| self.m.show_store(t)).collect());
            }
        }
        Ok(Vec::new())
    }

    /// A reachable configuration satisfying `xi` whose next layer can end in
    /// a store failing `xi`, with the stores leading to it. Start stores
    /// satisfying `xi` are tried first.
    fn invariant_breach(
        &self,
        r: &Proc,
        xi: &Comp,
        depth: u32,
    ) -> Result<Option<Vec<String>>, ModelError> {
        let mut starts = Vec::new();
        let mut rest = Vec::new();
        for s in self.m.stores() {
            if self.holds(xi, s)? {
                starts.push(s);
            } else {
                rest.push(s);
            }
        }
        starts.extend(rest);
        for s in starts {
            for reached in self.m.reachable(r, s, depth.saturating_sub(1))? {
                if !self.holds(xi, reached.store)? {
                    continue;
                }
                for (t, _) in self
                    .m
                    .run(&self.m.out_r(&reached.proc)?, reached.store)?
                    .iter()
                {
                    if self.fails(xi, *t)? {
                        let mut trace: Vec<String> = reached
                            .trace
                            .iter()
                            .map(|x| self.m.show_store(*x))
                            .collect();
                        trace.push(self.m.show_store(*t));
                        return Ok(Some(trace));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Breadth-first search over layers for a store satisfying `bad`,
    /// including final stores of terminated branches.
    fn search(
        &self,
        r: &Proc,
        s: StoreId,
        layers: u32,
        bad: impl Fn(StoreId) -> Result<bool, ModelError>,
    ) -> Result<Option<Vec<StoreId>>, ModelError> {
        let mut parent: BTreeMap<(u32, StoreId, u32), Option<(u32, StoreId, u32)>> =
            BTreeMap::new();
        let mut procs = BTreeMap::new();
        let start = (r.id(), s, 0);
        parent.insert(start, None);
        procs.insert(r.id(), r.clone());
        let mut queue = VecDeque::from([start]);
        let path = |parent: &BTreeMap<_, Option<(u32, StoreId, u32)>>,
                    mut at: (u32, StoreId, u32),
                    last: Option<StoreId>| {
            let mut out = Vec::new();
            out.extend(last);
            loop {
                out.push(at.1);
                match parent[&at] {
                    Some(p) => at = p,
                    None => break,
                }
            }
            out.reverse();
            out
        };
        while let Some(node) = queue.pop_front() {
            let (pid, store, layer) = node;
            if layer >= layers {
                continue;
            }
            let p: Proc = procs[&pid].clone();
            for (t, v) in self.m.run(&self.m.out_r(&p)?, store)?.iter() {
                match v {
                    Value::Inl(next) => {
                        let next = next.as_proc()?.clone();
                        let key = (next.id(), *t, layer + 1);
                        if parent.contains_key(&key) {
                            continue;
                        }
                        parent.insert(key, Some(node));
                        procs.insert(next.id(), next);
                        if bad(*t)? {
                            return Ok(Some(path(&parent, key, None)));
                        }
                        queue.push_back(key);
                    }
                    _ => {
                        if bad(*t)? {
                            return Ok(Some(path(&parent, node, Some(*t))));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use crate::syntax::{desugar, parse_surface_term, Context};

    fn comp(m: &Model, src: &str) -> Comp {
        let t = desugar(
            m.signature(),
            &Context::new(),
            &parse_surface_term(src).unwrap(),
            None,
        )
        .unwrap()
        .0;
        m.eval_comp(&Env::new(), &t).unwrap()
    }

    fn proc(m: &Model, src: &str) -> Proc {
        let t = desugar(
            m.signature(),
            &Context::new(),
            &parse_surface_term(src).unwrap(),
            None,
        )
        .unwrap()
        .0;
        m.eval_proc(&Env::new(), &t).unwrap()
    }

    #[test]
    fn getters_are_pure_and_setters_are_not() {
        let m = Model::booleans(2);
        let v = Verifier::new(&m, 4);
        assert!(v.is_pure(&comp(&m, "get(l1)")).unwrap());
        assert!(v.is_pure(&comp(&m, "ret tt")).unwrap());
        let set = v.purity(&comp(&m, "set(l1, tt)")).unwrap();
        assert!(!set.discardable);
        assert!(!v.is_pure(&comp(&m, "ret tt + ret ff")).unwrap());
    }

    #[test]
    fn hoare_examples() {
        let m = Model::booleans(1);
        let v = Verifier::new(&m, 4);
        let top = comp(&m, "ret tt");
        let get = comp(&m, "get(l1)");
        assert!(v.hoare(&top, &comp(&m, "set(l1, tt)"), &get).unwrap());
        assert!(v.hoare(&get, &comp(&m, "(nil : T 1)"), &get).unwrap());
        assert!(!v
            .hoare(&get, &comp(&m, "do x <- get(l1); set(l1, not(x))"), &get)
            .unwrap());
    }

    #[test]
    fn false_postcondition_filters_everything() {
        let m = Model::booleans(1);
        let v = Verifier::new(&m, 4);
        let p = comp(&m, "set(l1, ff) + ret *");
        let f = v
            .filter(&p, &comp(&m, "ret tt"), &comp(&m, "ret ff"))
            .unwrap();
        assert!(m.eq_t(&f, &m.nil_t()).unwrap());
    }

    #[test]
    fn impure_tests_are_rejected() {
        let m = Model::booleans(1);
        let v = Verifier::new(&m, 4);
        let bad = comp(&m, "do _ <- set(l1, tt); ret tt");
        assert!(matches!(
            v.hoare(&bad, &bad, &bad),
            Err(VerifyError::NotPure { .. })
        ));
    }

    #[test]
    fn invariants_of_small_processes() {
        let m = Model::booleans(1);
        let v = Verifier::new(&m, 4);
        let get = comp(&m, "get(l1)");
        assert!(v.is_invariant(&m.ret_nu(Value::Unit), &get, 6).unwrap());
        assert!(!v
            .is_invariant(&proc(&m, "step(set(l1, ff))"), &get, 1)
            .unwrap());
        assert!(v
            .is_invariant(&proc(&m, "step(set(l1, tt))"), &get, 4)
            .unwrap());
    }

    #[test]
    fn deadlock_is_safe() {
        let m = Model::booleans(1);
        let v = Verifier::new(&m, 4);
        let get = comp(&m, "get(l1)");
        let not_get = comp(&m, "do x <- get(l1); ret not(x)");
        let r = v
            .check_safety(&m.nil_nu(), &get, &not_get, None, 5)
            .unwrap();
        assert!(r.direct_safe());
    }

    #[test]
    fn late_violation_has_a_trace() {
        let m = Model::booleans(2);
        let v = Verifier::new(&m, 4);
        let p = proc(&m, "seq step(set(l2, tt)); step(set(l1, tt))");
        let pre = comp(&m, "do x <- get(l1); ret not(x)");
        let r = v.check_safety(&p, &pre, &pre, None, 4).unwrap();
        let violation = r.direct.unwrap();
        assert_eq!(violation.n, 1);
        assert_eq!(violation.trace.last().unwrap(), "l1=tt,l2=tt");
    }
}
