//! Seeded random generation of well-typed programs, tests, processes and
//! guarded schemes over a model with Boolean locations.

use crate::corec::{self, stdlib, CorecError, CorecScheme};
use crate::syntax::{case_n, name, Context, Name, NameSupply, Signature, Term, TermKind, Type};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random generator over the given Boolean locations.
pub struct Gen {
    rng: ChaCha8Rng,
    locations: Vec<Name>,
    supply: NameSupply,
    next: usize,
}

impl Gen {
    pub fn new(seed: u64, locations: &[Name]) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            locations: locations.to_vec(),
            supply: NameSupply::new(),
            next: 0,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn fresh(&mut self, base: &str) -> Name {
        self.next += 1;
        let x = name(&format!("{base}'{}", self.next));
        self.supply.avoid(&x);
        x
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("nonempty choice").clone()
    }

    /// One of `1`, `2`, `2 * 2`, `2 + 1`.
    pub fn first_order_type(&mut self) -> Type {
        let b = Type::bool();
        match self.rng.gen_range(0..4) {
            0 => Type::Unit,
            1 => b,
            2 => Type::prod(b.clone(), b),
            _ => Type::sum(b, Type::Unit),
        }
    }

    fn vars_of(ctx: &Context, ty: &Type) -> Vec<Name> {
        ctx.entries()
            .iter()
            .filter(|(_, t)| t == ty)
            .map(|(x, _)| x.clone())
            .collect()
    }

    /// A pure expression of first-order type `ty`.
    pub fn value(&mut self, ctx: &Context, ty: &Type, depth: u32) -> Term {
        let vars = Self::vars_of(ctx, ty);
        if !vars.is_empty() && self.rng.gen_bool(0.4) {
            return Term::var_n(&self.pick(&vars));
        }
        match ty {
            Type::Unit => Term::star(),
            t if t.is_bool() => {
                if depth == 0 {
                    return if self.rng.gen() {
                        Term::tt()
                    } else {
                        Term::ff()
                    };
                }
                match self.rng.gen_range(0..5) {
                    0 => Term::tt(),
                    1 => Term::ff(),
                    2 => Term::app("not", self.value(ctx, ty, depth - 1)),
                    3 => {
                        let f = self.pick(&["and", "or", "implies", "iff"]);
                        Term::app(
                            f,
                            Term::pair(
                                self.value(ctx, ty, depth - 1),
                                self.value(ctx, ty, depth - 1),
                            ),
                        )
                    }
                    _ => {
                        let pairs = Self::vars_of(ctx, &Type::prod(Type::bool(), Type::bool()));
                        match pairs.first() {
                            Some(p) if self.rng.gen() => Term::fst(Term::var_n(p)),
                            Some(p) => Term::snd(Term::var_n(p)),
                            None => Term::app("not", self.value(ctx, ty, depth - 1)),
                        }
                    }
                }
            }
            Type::Prod(a, b) => Term::pair(
                self.value(ctx, a, depth.saturating_sub(1)),
                self.value(ctx, b, depth.saturating_sub(1)),
            ),
            Type::Sum(a, b) => {
                if self.rng.gen() {
                    Term::inl(
                        self.value(ctx, a, depth.saturating_sub(1)),
                        Some(ty.clone()),
                    )
                } else {
                    Term::inr(
                        self.value(ctx, b, depth.saturating_sub(1)),
                        Some(ty.clone()),
                    )
                }
            }
            other => panic!("no random values of {other}"),
        }
    }

    fn condition(&mut self, ctx: &Context, depth: u32) -> Term {
        let c = self.value(ctx, &Type::bool(), depth);
        match c.kind() {
            TermKind::Var(_) => Term::app("not", c),
            _ => c,
        }
    }

    /// A closed-over-`ctx` computation of type `T ty`, using reads, writes,
    /// choice, deadlock, sequencing and branching.
    pub fn comp(&mut self, ctx: &Context, ty: &Type, depth: u32) -> Term {
        if depth == 0 {
            return self.leaf(ctx, ty);
        }
        match self.rng.gen_range(0..10) {
            0 | 1 => self.leaf(ctx, ty),
            2 => Term::nil(Some(Type::t(ty.clone()))),
            3 | 4 => Term::plus(self.comp(ctx, ty, depth - 1), self.comp(ctx, ty, depth - 1)),
            5..=7 => {
                let a = self.first_order_type();
                let x = self.fresh("x");
                let p = self.comp(ctx, &a, depth - 1);
                let q = self.comp(&ctx.extend(&x, a), ty, depth - 1);
                Term::bind(&x, p, q)
            }
            _ => {
                let u = self.fresh("u");
                let c = self.condition(ctx, 1);
                Term::case(
                    c,
                    &u,
                    self.comp(ctx, ty, depth - 1),
                    &u,
                    self.comp(ctx, ty, depth - 1),
                )
            }
        }
    }

    fn leaf(&mut self, ctx: &Context, ty: &Type) -> Term {
        let r = self.rng.gen_range(0..4);
        if !self.locations.is_empty() && r == 1 {
            let l = self.pick(&self.locations.clone());
            let v = self.value(ctx, &Type::bool(), 1);
            let u = self.fresh("w");
            let rest = self.leaf(ctx, ty);
            return Term::bind(&u, Term::app(&format!("set.{l}"), v), rest);
        }
        if !self.locations.is_empty() && r == 0 {
            let l = self.pick(&self.locations.clone());
            if ty.is_bool() {
                return Term::app(&format!("get.{l}"), Term::star());
            }
            if *ty == Type::Unit {
                let v = self.value(ctx, &Type::bool(), 1);
                return Term::app(&format!("set.{l}"), v);
            }
        }
        Term::ret(self.value(ctx, ty, 1))
    }

    /// A pure test: reads of some locations followed by a Boolean formula.
    pub fn test(&mut self, depth: u32) -> Term {
        let k = if self.locations.is_empty() {
            0
        } else {
            self.rng.gen_range(1..=self.locations.len().min(3))
        };
        let mut reads = Vec::new();
        let mut ctx = Context::new();
        for _ in 0..k {
            let l = self.pick(&self.locations.clone());
            let x = self.fresh("r");
            ctx.push(x.clone(), Type::bool());
            reads.push((x, l));
        }
        let mut t = Term::ret(self.value(&ctx, &Type::bool(), depth));
        for (x, l) in reads.into_iter().rev() {
            t = Term::bind(&x, Term::app(&format!("get.{l}"), Term::star()), t);
        }
        t
    }

    /// A finite process of type `T_nu ty`.
    pub fn process(&mut self, ctx: &Context, ty: &Type, depth: u32) -> Term {
        if depth == 0 {
            return match self.rng.gen_range(0..3) {
                0 => stdlib::nil_nu(ty),
                _ => stdlib::ret_nu(self.value(ctx, ty, 1), ty),
            };
        }
        match self.rng.gen_range(0..8) {
            0 => stdlib::ret_nu(self.value(ctx, ty, 1), ty),
            1 => stdlib::nil_nu(ty),
            2 | 3 => stdlib::step(self.comp(ctx, ty, depth - 1), ty),
            4 => stdlib::plus_nu(
                self.process(ctx, ty, depth - 1),
                self.process(ctx, ty, depth - 1),
                ty,
            ),
            _ => {
                let x = self.fresh("x");
                let c = self.comp(ctx, &Type::bool(), depth - 1);
                let inner = ctx.extend(&x, Type::bool());
                let u = self.fresh("u");
                let rest = stdlib::cont(self.process(&inner, ty, depth - 1), ty);
                let other = if self.rng.gen() {
                    stdlib::stop(self.value(&inner, ty, 1), ty)
                } else {
                    stdlib::cont(self.process(&inner, ty, depth - 1), ty)
                };
                let layer = Term::bind(
                    &x,
                    c,
                    Term::case(Term::app("not", Term::var_n(&x)), &u, rest, &u, other),
                );
                stdlib::tuo(layer, ty)
            }
        }
    }

    /// A body `q : T (a + b)` for `init x := _ in q`, with `x : a` free.
    pub fn guarded_body(&mut self, x: &Name, a: &Type, b: &Type, depth: u32) -> Term {
        let ctx = Context::from_pairs([(x.clone(), a.clone())]);
        self.comp(&ctx, &Type::sum(a.clone(), b.clone()), depth)
    }

    /// A random guarded scheme of one to three equations with a shared
    /// codomain, validated by the elaborator's checks.
    pub fn scheme(&mut self, sig: &Signature, depth: u32) -> Result<CorecScheme, CorecError> {
        let k = self.rng.gen_range(1..=3);
        let cod = if self.rng.gen() {
            Type::bool()
        } else {
            Type::Unit
        };
        let defs: Vec<(Name, Name, Type)> = (0..k)
            .map(|i| {
                let dom = if self.rng.gen() {
                    Type::bool()
                } else {
                    Type::Unit
                };
                (name(&format!("f{i}")), name(&format!("a{i}")), dom)
            })
            .collect();
        let mut eqs = Vec::new();
        for (f, arg, dom) in &defs {
            let ctx = Context::from_pairs([(arg.clone(), dom.clone())]);
            let n = self.rng.gen_range(1..=3);
            let comps: Vec<Type> = (0..n)
                .map(|_| {
                    if self.rng.gen() {
                        Type::bool()
                    } else {
                        Type::Unit
                    }
                })
                .collect();
            let prefix = self.comp(&ctx, &Type::nsum(&comps), depth);
            let mut branches = Vec::new();
            for (j, c) in comps.iter().enumerate() {
                let xj = self.fresh("b");
                let inner = ctx.extend(&xj, c.clone());
                let body = if j == 0 || self.rng.gen_bool(0.5) {
                    let (g, _, gdom) = self.pick(&defs);
                    stdlib::cont(Term::app(&g, self.value(&inner, &gdom, 1)), &cod)
                } else if self.rng.gen() {
                    stdlib::stop(self.value(&inner, &cod, 1), &cod)
                } else {
                    let y = self.fresh("y");
                    let c = self.comp(&inner, &cod, depth.saturating_sub(1));
                    Term::bind(&y, c, stdlib::stop(Term::var_n(&y), &cod))
                };
                branches.push((xj, body));
            }
            let z = self.fresh("z");
            let rhs = if branches.len() == 1 {
                let (x, body) = branches.pop().unwrap();
                Term::bind(&x, prefix, body)
            } else {
                Term::bind(
                    &z,
                    prefix,
                    case_n(Term::var_n(&z), branches, &mut self.supply),
                )
            };
            eqs.push((f.clone(), arg.clone(), dom.clone(), cod.clone(), rhs));
        }
        let scheme = corec::scheme_from_equations(&name("random"), sig, Context::new(), eqs)?;
        corec::validate_scheme(&scheme, sig)?;
        Ok(scheme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corec::{elaborate, ElabOptions};
    use crate::model::Model;
    use crate::typecheck;

    fn locs() -> Vec<Name> {
        vec![name("l1"), name("l2"), name("l3")]
    }

    #[test]
    fn programs_are_well_typed() {
        let m = Model::booleans(3);
        let mut g = Gen::new(7, &locs());
        for _ in 0..200 {
            let ty = g.first_order_type();
            let t = g.comp(&Context::new(), &ty, 4);
            typecheck::check(m.signature(), &Context::new(), &t, &Type::t(ty.clone())).unwrap();
            m.eval_closed(&t).unwrap();
        }
    }

    #[test]
    fn tests_are_pure() {
        let m = Model::booleans(3);
        let v = crate::verify::Verifier::new(&m, 4);
        let mut g = Gen::new(3, &locs());
        for _ in 0..50 {
            let t = g.test(2);
            let c = m.eval_comp(&crate::model::Env::new(), &t).unwrap();
            assert!(v.is_pure(&c).unwrap(), "{t}");
        }
    }

    #[test]
    fn processes_are_well_typed() {
        let m = Model::booleans(3);
        let mut g = Gen::new(11, &locs());
        for _ in 0..100 {
            let t = g.process(&Context::new(), &Type::bool(), 3);
            typecheck::check(m.signature(), &Context::new(), &t, &Type::tnu(Type::bool())).unwrap();
        }
    }

    #[test]
    fn schemes_elaborate() {
        let m = Model::booleans(3);
        let mut g = Gen::new(5, &locs());
        for _ in 0..30 {
            let s = g.scheme(m.signature(), 2).unwrap();
            elaborate(&s, m.signature(), &ElabOptions::default()).unwrap();
        }
    }

    #[test]
    fn same_seed_same_programs() {
        let mut a = Gen::new(9, &locs());
        let mut b = Gen::new(9, &locs());
        for _ in 0..20 {
            assert_eq!(
                a.comp(&Context::new(), &Type::bool(), 3).to_string(),
                b.comp(&Context::new(), &Type::bool(), 3).to_string()
            );
        }
    }
}
