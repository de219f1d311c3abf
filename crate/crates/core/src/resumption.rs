//! The process layer over a [`Model`]: coiteration, `out`/`tuo`, partial
//! execution, bounded bisimilarity and layer unfolding.

use crate::model::{Builtin, Comp, Kont, Model, ModelError, Proc, ProcKind, StoreId, Value};
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};

impl Model {
    /// The final coalgebra structure: one observable layer.
    pub fn out_r(&self, p: &Proc) -> Result<Comp, ModelError> {
        self.step(p)
    }

    /// The coiteration `init x := seed in body`.
    pub fn init_r(&self, seed: Value, body: Kont) -> Proc {
        self.proc(ProcKind::Unfold { body, seed })
    }

    /// The process whose observation is `c`.
    pub fn tuo_r(&self, c: &Comp) -> Proc {
        self.proc(ProcKind::Tuo(c.clone()))
    }

    /// `tuo` after checking that every outcome of `c` is a layer value.
    pub fn tuo_checked(&self, c: &Comp) -> Result<Proc, ModelError> {
        for s in self.stores() {
            for (_, v) in self.run(c, s)?.iter() {
                match v {
                    Value::Inl(r) => {
                        r.as_proc()?;
                    }
                    Value::Inr(_) => {}
                    other => {
                        return Err(ModelError::Shape {
                            expected: "inl or inr",
                            found: other.shape(),
                        })
                    }
                }
            }
        }
        Ok(self.tuo_r(c))
    }

    pub fn ret_nu(&self, v: Value) -> Proc {
        self.tuo_r(&self.unit_t(Value::inr(v)))
    }

    pub fn nil_nu(&self) -> Proc {
        self.tuo_r(&self.nil_t())
    }

    pub fn plus_nu(&self, p: &Proc, q: &Proc) -> Result<Proc, ModelError> {
        Ok(self.tuo_r(&self.plus_t(&self.step(p)?, &self.step(q)?)))
    }

    /// The one-step process `tuo(do x <- c; stop x)`.
    pub fn step_nu(&self, c: &Comp) -> Proc {
        let stop = Model::native(|m, v| Ok(m.unit_t(Value::inr(v))));
        self.tuo_r(&self.bind_t(c, stop))
    }

    /// The observation of `exec p`: the first two layers fused into one.
    pub fn exec_layer(&self, p: &Proc) -> Result<Comp, ModelError> {
        Ok(self.bind_t(
            &self.step(p)?,
            Kont::Builtin(Builtin::Collapse, Vec::new().into()),
        ))
    }

    /// Partial execution: collapse the first and the second layer.
    pub fn exec_r(&self, p: &Proc) -> Result<Proc, ModelError> {
        Ok(self.tuo_r(&self.exec_layer(p)?))
    }

    /// `exec^n p`.
    pub fn exec_n(&self, p: &Proc, n: usize) -> Result<Proc, ModelError> {
        let mut cur = p.clone();
        for _ in 0..n {
            cur = self.exec_r(&cur)?;
        }
        Ok(cur)
    }

    /// Bounded bisimilarity of two processes.
    pub fn bisim_k(&self, a: &Proc, b: &Proc, k: u32) -> Result<bool, ModelError> {
        self.bisim(a, b, k)
    }

    /// The `depth`-layer unfolding tree of `p` started in store `s`.
    pub fn unfold_tree(&self, p: &Proc, s: StoreId, depth: u32) -> Result<UnfoldTree, ModelError> {
        let mut branches = Vec::new();
        if depth > 0 {
            for (t, v) in self.run(&self.step(p)?, s)?.iter() {
                let store = self.show_store(*t);
                branches.push(match v {
                    Value::Inl(r) => {
                        let next = self.unfold_tree(r.as_proc()?, *t, depth - 1)?;
                        Branch::Rest { store, next }
                    }
                    Value::Inr(v) => Branch::Done {
                        store,
                        value: self.show(v),
                    },
                    other => {
                        return Err(ModelError::Shape {
                            expected: "inl or inr",
                            found: other.shape(),
                        })
                    }
                });
            }
        }
        Ok(UnfoldTree {
            truncated: depth == 0,
            branches,
        })
    }

    /// Breadth-first exploration of the `(process, store)` configurations
    /// reachable from `(p, s)` within `depth` layers. Every configuration is
    /// reported once, with the shortest trace of stores leading to it.
    pub fn reachable(&self, p: &Proc, s: StoreId, depth: u32) -> Result<Vec<Reached>, ModelError> {
        let mut seen: BTreeMap<(u32, StoreId), usize> = BTreeMap::new();
        let mut out = vec![Reached {
            proc: p.clone(),
            store: s,
            layer: 0,
            trace: vec![s],
        }];
        seen.insert((p.id(), s), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let Reached {
                proc,
                store,
                layer,
                trace,
            } = out[i].clone();
            if layer >= depth {
                continue;
            }
            for (t, v) in self.run(&self.step(&proc)?, store)?.iter() {
                if let Value::Inl(r) = v {
                    let r = r.as_proc()?.clone();
                    if seen.contains_key(&(r.id(), *t)) {
                        continue;
                    }
                    seen.insert((r.id(), *t), out.len());
                    let mut trace = trace.clone();
                    trace.push(*t);
                    queue.push_back(out.len());
                    out.push(Reached {
                        proc: r,
                        store: *t,
                        layer: layer + 1,
                        trace,
                    });
                }
            }
        }
        Ok(out)
    }

    /// The process kind as a one-line description.
    pub fn describe_proc(&self, p: &Proc) -> String {
        match p.kind() {
            ProcKind::Tuo(c) => format!("tuo comp#{}", c.id()),
            ProcKind::Unfold { body, seed } => format!("init {:?} from {}", body, self.show(seed)),
        }
    }
}

/// A configuration found by [`Model::reachable`].
#[derive(Clone, Debug)]
pub struct Reached {
    pub proc: Proc,
    pub store: StoreId,
    pub layer: u32,
    pub trace: Vec<StoreId>,
}

/// A bounded unfolding of a process from one store.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct UnfoldTree {
    pub truncated: bool,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Branch {
    Rest { store: String, next: UnfoldTree },
    Done { store: String, value: String },
}

impl UnfoldTree {
    /// Indented text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        if self.truncated {
            out.push_str(&format!("{pad}...\n"));
            return;
        }
        if self.branches.is_empty() {
            out.push_str(&format!("{pad}deadlock\n"));
        }
        for b in &self.branches {
            match b {
                Branch::Rest { store, next } => {
                    out.push_str(&format!("{pad}rest [{store}]\n"));
                    next.render_into(indent + 1, out);
                }
                Branch::Done { store, value } => {
                    out.push_str(&format!("{pad}done {value} [{store}]\n"))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m() -> Model {
        Model::booleans(2)
    }

    #[test]
    fn ret_nu_unfolds_in_one_step() {
        let m = m();
        let p = m.ret_nu(Value::tt());
        assert!(m
            .eq_t(&m.out_r(&p).unwrap(), &m.unit_t(Value::inr(Value::tt())))
            .unwrap());
    }

    #[test]
    fn nil_nu_is_deadlocked() {
        let m = m();
        assert!(m.eq_t(&m.out_r(&m.nil_nu()).unwrap(), &m.nil_t()).unwrap());
        assert_eq!(
            m.unfold_tree(&m.nil_nu(), 0, 3).unwrap().render(),
            "deadlock\n"
        );
    }

    #[test]
    fn out_after_tuo_is_identity() {
        let m = m();
        let c = m.plus_t(
            &m.unit_t(Value::inr(Value::ff())),
            &m.unit_t(Value::inl(Value::Proc(m.nil_nu()))),
        );
        assert_eq!(m.out_r(&m.tuo_r(&c)).unwrap(), c);
    }

    #[test]
    fn tuo_checked_rejects_non_layers() {
        let m = m();
        assert!(m.tuo_checked(&m.unit_t(Value::Unit)).is_err());
    }

    #[test]
    fn exec_fuses_two_steps() {
        let m = m();
        let set = m.set_t(0, Value::tt());
        let a = m.step_nu(&set);
        let get = m.get_t(1);
        let b = m.step_nu(&get);
        let two = m.tuo_r(&m.bind_t(
            &m.step(&a).unwrap(),
            Model::native({
                let b = b.clone();
                move |m, _| Ok(m.unit_t(Value::inl(Value::Proc(b.clone()))))
            }),
        ));
        let fused = m.exec_r(&two).unwrap();
        let direct = m.step_nu(&m.bind_t(&set, Model::native(|m, _| Ok(m.get_t(1)))));
        assert!(m.bisim_k(&fused, &direct, 8).unwrap());
        assert!(!m.bisim_k(&two, &direct, 2).unwrap());
    }

    #[test]
    fn bisim_separates_step_from_ret() {
        let m = m();
        let stepper = m.step_nu(&m.set_t(0, Value::tt()));
        assert!(!m.bisim_k(&stepper, &m.ret_nu(Value::Unit), 1).unwrap());
        assert!(m.bisim_k(&stepper, &m.ret_nu(Value::Unit), 0).unwrap());
    }

    #[test]
    fn reachable_loops_are_finite() {
        let m = m();
        let looping = Model::native(|m, v| Ok(m.unit_t(Value::inl(v))));
        let p = m.init_r(Value::Unit, looping);
        let r = m.reachable(&p, 0, 50).unwrap();
        assert_eq!(r.len(), 1);
    }
}
