//! Loading `.mnu` program files: signature, model, definitions and schemes.

use crate::corec::{self, elaborate, CorecError, CorecScheme, ElabOptions, Elaboration};
use crate::model::{
    Denotation, Env, Model, ModelConfig, ModelError, Value, DEFAULT_UNIVERSE_BOUND,
};
use crate::syntax::{
    desugar, parse_file, parse_surface_term, Context, DesugarError, Item, ModelItem, Name,
    ParseError, Signature, Term, Type,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("in `{def}`: {source}")]
    Desugar { def: Name, source: DesugarError },
    #[error("in scheme `{scheme}`: {source}")]
    Corec { scheme: Name, source: CorecError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("`{name}` is declared as {declared} but defined as {defined}")]
    ProfileMismatch {
        name: Name,
        declared: String,
        defined: String,
    },
    #[error(
        "`{def}` uses `{symbol}`, which has no definition yet (definitions may not be recursive)"
    )]
    Undefined { def: Name, symbol: Name },
    #[error("`{0}` is defined twice")]
    Duplicate(Name),
    #[error("`{def}`: a corecursive equation must have result type T_nu B, found {found}")]
    NotProcess { def: Name, found: Type },
    #[error("unknown definition `{0}`")]
    UnknownDef(Name),
}

/// A checked definition `f(x1:A1, ..., xn:An) : B = term`.
#[derive(Clone, Debug)]
pub struct Def {
    pub name: Name,
    pub params: Vec<(Name, Type)>,
    pub ret: Type,
    pub term: Term,
}

impl Def {
    pub fn context(&self) -> Context {
        Context::from_pairs(self.params.iter().cloned())
    }
}

/// An elaborated scheme. Each solution `f` becomes a symbol taking the
/// scheme parameters followed by its own argument.
#[derive(Clone, Debug)]
pub struct SchemeEntry {
    pub scheme: CorecScheme,
    pub elaboration: Elaboration,
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub universe_bound: u64,
    pub elab: ElabOptions,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            universe_bound: DEFAULT_UNIVERSE_BOUND,
            elab: ElabOptions::default(),
        }
    }
}

/// A loaded program: its model, extended signature, definitions and schemes.
pub struct Program {
    pub model: Model,
    pub sig: Signature,
    pub defs: Vec<Def>,
    pub schemes: Vec<SchemeEntry>,
}

/// Right-nested product of the parameter types, `1` when there are none.
pub fn params_type(params: &[(Name, Type)]) -> Type {
    match params.split_last() {
        None => Type::Unit,
        Some((last, init)) => init
            .iter()
            .rev()
            .fold(last.1.clone(), |acc, (_, t)| Type::prod(t.clone(), acc)),
    }
}

impl Program {
    pub fn load(src: &str) -> Result<Program, ProgramError> {
        Program::load_with(src, &LoadOptions::default())
    }

    pub fn load_with(src: &str, opts: &LoadOptions) -> Result<Program, ProgramError> {
        let items = parse_file(src)?;
        let mut sig = Signature::with_prelude();
        let mut cfg = ModelConfig {
            universe_bound: opts.universe_bound,
            ..Default::default()
        };
        for item in &items {
            match item {
                Item::Type(t, _) => sig.add_type(t),
                Item::Fn(f, a, b, _) => sig.add_fn(f, a.clone(), b.clone()),
                Item::Model(decls) => {
                    for d in decls {
                        match d {
                            ModelItem::Loc(l, ty, _) => cfg.locations.push((l.clone(), ty.clone())),
                            ModelItem::Carrier(c, elems, _) => {
                                cfg.carriers.push((c.clone(), elems.clone()))
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        let model = Model::new(sig, cfg)?;
        let mut prog = Program {
            sig: model.signature().clone(),
            model,
            defs: Vec::new(),
            schemes: Vec::new(),
        };
        for item in items {
            match item {
                Item::Def {
                    name,
                    params,
                    ret,
                    body,
                    ..
                } => {
                    let ctx = Context::from_pairs(params.iter().cloned());
                    let (term, _) =
                        desugar(&prog.sig, &ctx, &body, Some(&ret)).map_err(|source| {
                            ProgramError::Desugar {
                                def: name.clone(),
                                source,
                            }
                        })?;
                    prog.add_def(Def {
                        name,
                        params,
                        ret,
                        term,
                    })?;
                }
                Item::Scheme {
                    name, params, eqs, ..
                } => {
                    let ctx = Context::from_pairs(params.iter().cloned());
                    let mut ext = prog.sig.clone();
                    let mut cods = Vec::new();
                    for eq in &eqs {
                        let cod = match &eq.cod {
                            Type::TNu(b) => (**b).clone(),
                            other => {
                                return Err(ProgramError::NotProcess {
                                    def: eq.name.clone(),
                                    found: other.clone(),
                                })
                            }
                        };
                        ext.functions
                            .insert(eq.name.clone(), (eq.dom.clone(), eq.cod.clone()));
                        cods.push(cod);
                    }
                    let mut raw = Vec::new();
                    for (eq, cod) in eqs.iter().zip(cods) {
                        let layer = corec::stdlib::layer(&cod);
                        let (rhs, _) = desugar(
                            &ext,
                            &ctx.extend(&eq.arg, eq.dom.clone()),
                            &eq.rhs,
                            Some(&layer),
                        )
                        .map_err(|source| ProgramError::Desugar {
                            def: eq.name.clone(),
                            source,
                        })?;
                        raw.push((eq.name.clone(), eq.arg.clone(), eq.dom.clone(), cod, rhs));
                    }
                    prog.add_scheme(&name, ctx, raw, &opts.elab)?;
                }
                _ => {}
            }
        }
        Ok(prog)
    }

    fn check_fresh(&self, f: &Name, dom: &Type, cod: &Type) -> Result<(), ProgramError> {
        if self.model.has_denotation(f) {
            return Err(ProgramError::Duplicate(f.clone()));
        }
        if let Some((d, c)) = self.sig.lookup(f) {
            if d != dom || c != cod {
                return Err(ProgramError::ProfileMismatch {
                    name: f.clone(),
                    declared: format!("{d} -> {c}"),
                    defined: format!("{dom} -> {cod}"),
                });
            }
        }
        Ok(())
    }

    fn require_defined(&self, def: &Name, t: &Term) -> Result<(), ProgramError> {
        match t
            .symbols()
            .into_iter()
            .find(|f| !self.model.has_denotation(f))
        {
            Some(symbol) => Err(ProgramError::Undefined {
                def: def.clone(),
                symbol,
            }),
            None => Ok(()),
        }
    }

    /// Register a checked definition with the signature and the model.
    pub fn add_def(&mut self, def: Def) -> Result<(), ProgramError> {
        let dom = params_type(&def.params);
        self.check_fresh(&def.name, &dom, &def.ret)?;
        self.require_defined(&def.name, &def.term)?;
        self.sig.add_fn(&def.name, dom, def.ret.clone());
        self.model.define(
            &def.name,
            Denotation::Def {
                params: def.params.iter().map(|(x, _)| x.clone()).collect(),
                body: def.term.clone(),
                env: Env::new(),
            },
        )?;
        self.defs.push(def);
        Ok(())
    }

    /// Build, rewrite, elaborate and register a scheme from desugared
    /// right-hand sides.
    pub fn add_scheme(
        &mut self,
        name: &Name,
        params: Context,
        raw: Vec<(Name, Name, Type, Type, Term)>,
        opts: &ElabOptions,
    ) -> Result<(), ProgramError> {
        let err = |source| ProgramError::Corec {
            scheme: name.clone(),
            source,
        };
        let scheme =
            corec::scheme_from_equations(name, &self.sig, params.clone(), raw).map_err(err)?;
        let scheme = corec::unfold_prefix_calls(&scheme, &self.sig).map_err(err)?;
        let elaboration = elaborate(&scheme, &self.sig, opts).map_err(err)?;
        for s in &elaboration.solutions {
            let mut ps: Vec<(Name, Type)> = params.entries().to_vec();
            ps.push((s.arg.clone(), s.dom.clone()));
            let def = Def {
                name: s.name.clone(),
                params: ps,
                ret: Type::tnu(s.cod.clone()),
                term: s.term.clone(),
            };
            self.add_def(def)?;
        }
        self.schemes.push(SchemeEntry {
            scheme,
            elaboration,
        });
        Ok(())
    }

    pub fn def(&self, f: &str) -> Option<&Def> {
        self.defs.iter().find(|d| &*d.name == f)
    }

    pub fn scheme(&self, name: &str) -> Option<&SchemeEntry> {
        self.schemes.iter().find(|s| &*s.scheme.name == name)
    }

    /// Parse and desugar a closed surface term against the program.
    pub fn term(&self, src: &str, expected: Option<&Type>) -> Result<(Term, Type), ProgramError> {
        self.term_in(&Context::new(), src, expected)
    }

    /// Parse and desugar a surface term open over `ctx`.
    pub fn term_in(
        &self,
        ctx: &Context,
        src: &str,
        expected: Option<&Type>,
    ) -> Result<(Term, Type), ProgramError> {
        let s = parse_surface_term(src)?;
        desugar(&self.sig, ctx, &s, expected).map_err(|source| ProgramError::Desugar {
            def: crate::syntax::name("<input>"),
            source,
        })
    }

    /// Evaluate a closed surface term.
    pub fn eval(&self, src: &str) -> Result<(Value, Type), ProgramError> {
        let (t, ty) = self.term(src, None)?;
        Ok((self.model.eval_closed(&t)?, ty))
    }

    /// The value of a parameterless definition, or of a term.
    pub fn value(&self, name_or_term: &str) -> Result<(Value, Type), ProgramError> {
        match self.def(name_or_term) {
            Some(d) if d.params.is_empty() => Ok((self.model.eval_closed(&d.term)?, d.ret.clone())),
            _ => self.eval(name_or_term),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "
        -- a counter that toggles a flag
        model
          loc l : 2
        end
        def toggle : T 1 = do x <- get(l); set(l, not(x))
        def twice : T 1 = do _ <- toggle; toggle
        def pick(a: 2, b: 2) : T 2 = ret a + ret b
        scheme ticker
          corec tick(u : 1) : T_nu 1 = do _ <- toggle; cont tick(u)
        end
    ";

    #[test]
    fn loads_defs_and_schemes() {
        let p = Program::load(SRC).unwrap();
        assert_eq!(p.defs.len(), 4);
        let (v, ty) = p.value("twice").unwrap();
        assert_eq!(ty, Type::t(Type::Unit));
        let id = p.model.unit_t(Value::Unit);
        assert!(p.model.eq_t(v.as_comp().unwrap(), &id).unwrap());
        let (v, _) = p.eval("pick(tt, ff)").unwrap();
        assert_eq!(p.model.run(v.as_comp().unwrap(), 0).unwrap().len(), 2);
        assert!(p.scheme("ticker").is_some());
        let (v, ty) = p.eval("tick(*)").unwrap();
        assert_eq!(ty, Type::tnu(Type::Unit));
        let tree = p
            .model
            .unfold_tree(v.as_proc().unwrap(), 0, 2)
            .unwrap()
            .render();
        assert_eq!(tree, "rest [l=ff]\n  rest [l=tt]\n    ...\n");
    }

    #[test]
    fn recursion_is_rejected() {
        let src = "signature fn f : 1 -> T 1 end def f : T 1 = f(*)";
        assert!(matches!(
            Program::load(src),
            Err(ProgramError::Undefined { .. })
        ));
    }

    #[test]
    fn declared_profiles_are_enforced() {
        let src = "signature fn f : 2 -> T 1 end def f : T 1 = ret *";
        assert!(matches!(
            Program::load(src),
            Err(ProgramError::ProfileMismatch { .. })
        ));
    }

    #[test]
    fn params_type_is_right_nested() {
        let b = Type::bool();
        let ps = vec![
            (crate::syntax::name("a"), b.clone()),
            (crate::syntax::name("c"), Type::Unit),
        ];
        assert_eq!(params_type(&ps), Type::prod(b, Type::Unit));
        assert_eq!(params_type(&[]), Type::Unit);
    }
}
