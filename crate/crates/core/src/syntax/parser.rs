//! Recursive-descent parser for the surface language.
//!
//! The surface language extends the primitive term formers with the usual
//! abbreviations (`cont`, `stop`, `casenext`, `if`, n-ary injections and
//! cases) and the process combinators of the standard library. Surface terms
//! are turned into primitive terms by [`super::desugar`].

use super::lexer::{tokenize, LexError, Span, Token, TokenKind};
use super::{name, Name, Type};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{span}: expected {expected}, found {found}")]
    Unexpected {
        expected: String,
        found: String,
        span: Span,
    },
    #[error("{span}: `{word}` is a reserved word")]
    Reserved { word: String, span: Span },
    #[error("{span}: {message}")]
    Invalid { message: String, span: Span },
}

/// A pattern on the left of `<-`.
#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Var(Name),
    Wild,
    Pair(Name, Name),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub kind: SurfaceKind,
    pub span: Span,
}

/// Which monadic block a `do`-chain belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Do,
    DoNu,
    Seq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceKind {
    Var(Name),
    Call(Name, Vec<Surface>),
    Get(Name),
    Set(Name, Box<Surface>),
    Const(Name, Name),
    Star,
    Tt,
    Ff,
    Pair(Box<Surface>, Box<Surface>),
    Fst(Box<Surface>),
    Snd(Box<Surface>),
    Inl(Box<Surface>),
    Inr(Box<Surface>),
    Inj(usize, usize, Box<Surface>),
    Case(Box<Surface>, Name, Box<Surface>, Name, Box<Surface>),
    CaseN(Box<Surface>, Vec<(Name, Surface)>),
    CaseNext(Box<Surface>, Name, Box<Surface>, Name, Box<Surface>),
    If(Box<Surface>, Box<Surface>, Box<Surface>),
    IfNu(Box<Surface>, Box<Surface>, Box<Surface>),
    Ret(Box<Surface>),
    Cont(Box<Surface>),
    Stop(Box<Surface>),
    Bind(Block, Pattern, Box<Surface>, Box<Surface>),
    Nil,
    NilNu,
    Plus(Box<Surface>, Box<Surface>),
    PlusNu(Box<Surface>, Box<Surface>),
    Out(Box<Surface>),
    Init(Name, Box<Surface>, Box<Surface>),
    Tuo(Box<Surface>),
    Exec(Box<Surface>),
    RetNu(Box<Surface>),
    Step(Box<Surface>),
    Await(Box<Surface>),
    While(Option<(Name, Box<Surface>)>, Box<Surface>, Box<Surface>),
    Repeat(Option<(Name, Box<Surface>)>, Box<Surface>, Box<Surface>),
    Interleave(Box<Surface>, Box<Surface>),
    LeftMerge(Box<Surface>, Box<Surface>),
    RightMerge(Box<Surface>, Box<Surface>),
    Raise(Box<Surface>),
    Try(Box<Surface>, Name, Box<Surface>),
    Ascribe(Box<Surface>, Type),
}

/// Location and carrier declarations of a `model` block.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelItem {
    Loc(Name, Type, Span),
    Carrier(Name, Vec<Name>, Span),
}

/// One `corec` equation inside a `scheme` block.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeItem {
    pub name: Name,
    pub arg: Name,
    pub dom: Type,
    pub cod: Type,
    pub rhs: Surface,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Type(Name, Span),
    Fn(Name, Type, Type, Span),
    Model(Vec<ModelItem>),
    Def {
        name: Name,
        params: Vec<(Name, Type)>,
        ret: Type,
        body: Surface,
        span: Span,
    },
    Scheme {
        name: Name,
        params: Vec<(Name, Type)>,
        eqs: Vec<SchemeItem>,
        span: Span,
    },
}

const KEYWORDS: &[&str] = &[
    "ret",
    "do",
    "do_nu",
    "seq",
    "case",
    "of",
    "inl",
    "inr",
    "inj",
    "fst",
    "snd",
    "out",
    "init",
    "in",
    "cont",
    "stop",
    "rest",
    "done",
    "nil",
    "nil_nu",
    "ret_nu",
    "casenext",
    "if",
    "then",
    "else",
    "if_nu",
    "while",
    "repeat",
    "until",
    "step",
    "await",
    "tuo",
    "exec",
    "tt",
    "ff",
    "get",
    "set",
    "try",
    "with",
    "raise",
    "def",
    "scheme",
    "corec",
    "param",
    "signature",
    "model",
    "end",
    "fn",
    "type",
    "loc",
    "carrier",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

fn bx(s: Surface) -> Box<Surface> {
    Box::new(s)
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &TokenKind {
        &self.toks[self.pos].kind
    }

    fn peek_at(&self, k: usize) -> &TokenKind {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].kind
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::Unexpected {
            expected: expected.to_string(),
            found: self.peek().to_string(),
            span: self.span(),
        })
    }

    fn eat(&mut self, k: &TokenKind) -> bool {
        if self.peek() == k {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, k: &TokenKind) -> PResult<Span> {
        if self.peek() == k {
            Ok(self.bump().span)
        } else {
            self.unexpected(&k.to_string())
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.is_word(w) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{w}`"))
        }
    }

    /// A non-reserved identifier.
    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            TokenKind::Ident(s) if is_keyword(&s) => Err(ParseError::Reserved {
                word: s,
                span: self.span(),
            }),
            TokenKind::Ident(s) => {
                self.bump();
                Ok(name(&s))
            }
            _ => self.unexpected("identifier"),
        }
    }

    /// A binder: identifier or `_`.
    fn binder(&mut self) -> PResult<Name> {
        self.ident()
    }

    fn number(&mut self) -> PResult<u64> {
        match self.peek() {
            TokenKind::Num(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("number"),
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == TokenKind::Eof
    }

    // ----- types -----

    fn ty(&mut self) -> PResult<Type> {
        let left = self.ty_prod()?;
        if self.eat(&TokenKind::Plus) {
            Ok(Type::sum(left, self.ty()?))
        } else {
            Ok(left)
        }
    }

    fn ty_prod(&mut self) -> PResult<Type> {
        let left = self.ty_unary()?;
        if self.eat(&TokenKind::Star) {
            Ok(Type::prod(left, self.ty_prod()?))
        } else {
            Ok(left)
        }
    }

    fn ty_unary(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            TokenKind::Ident(s) if s == "T" => {
                self.bump();
                Ok(Type::t(self.ty_unary()?))
            }
            TokenKind::Ident(s) if s == "T_nu" => {
                self.bump();
                Ok(Type::tnu(self.ty_unary()?))
            }
            TokenKind::Num(1) => {
                self.bump();
                Ok(Type::Unit)
            }
            TokenKind::Num(2) => {
                self.bump();
                Ok(Type::bool())
            }
            TokenKind::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&TokenKind::RParen)?;
                Ok(t)
            }
            TokenKind::Ident(_) => Ok(Type::Base(self.ident()?)),
            _ => self.unexpected("type"),
        }
    }

    // ----- terms -----

    fn term(&mut self) -> PResult<Surface> {
        self.sum()
    }

    fn sum(&mut self) -> PResult<Surface> {
        let mut left = self.merge()?;
        loop {
            let span = self.span();
            if self.eat(&TokenKind::Plus) {
                let right = self.merge()?;
                left = Surface {
                    kind: SurfaceKind::Plus(bx(left), bx(right)),
                    span,
                };
            } else if self.eat(&TokenKind::PlusNu) {
                let right = self.merge()?;
                left = Surface {
                    kind: SurfaceKind::PlusNu(bx(left), bx(right)),
                    span,
                };
            } else {
                return Ok(left);
            }
        }
    }

    fn merge(&mut self) -> PResult<Surface> {
        let mut left = self.prefix()?;
        loop {
            let span = self.span();
            let kind: fn(Box<Surface>, Box<Surface>) -> SurfaceKind = match self.peek() {
                TokenKind::Par => SurfaceKind::Interleave,
                TokenKind::LMerge => SurfaceKind::LeftMerge,
                TokenKind::RMerge => SurfaceKind::RightMerge,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.prefix()?;
            left = Surface {
                kind: kind(bx(left), bx(right)),
                span,
            };
        }
    }

    /// Prefix operators and binder forms; binder forms extend as far right
    /// as possible.
    fn prefix(&mut self) -> PResult<Surface> {
        let span = self.span();
        let word = match self.peek() {
            TokenKind::Ident(s) => s.clone(),
            _ => return self.atom(),
        };
        let unary: Option<fn(Box<Surface>) -> SurfaceKind> = match word.as_str() {
            "ret" => Some(SurfaceKind::Ret),
            "cont" => Some(SurfaceKind::Cont),
            "stop" => Some(SurfaceKind::Stop),
            "out" => Some(SurfaceKind::Out),
            "fst" => Some(SurfaceKind::Fst),
            "snd" => Some(SurfaceKind::Snd),
            "inl" => Some(SurfaceKind::Inl),
            "inr" => Some(SurfaceKind::Inr),
            "tuo" => Some(SurfaceKind::Tuo),
            "exec" => Some(SurfaceKind::Exec),
            "ret_nu" => Some(SurfaceKind::RetNu),
            "step" => Some(SurfaceKind::Step),
            "await" => Some(SurfaceKind::Await),
            "raise" => Some(SurfaceKind::Raise),
            _ => None,
        };
        if let Some(k) = unary {
            self.bump();
            let arg = self.prefix()?;
            return Ok(Surface {
                kind: k(bx(arg)),
                span,
            });
        }
        match word.as_str() {
            "do" => {
                self.bump();
                self.block(Block::Do, span)
            }
            "do_nu" => {
                self.bump();
                self.block(Block::DoNu, span)
            }
            "seq" => {
                self.bump();
                self.block(Block::Seq, span)
            }
            "inj" => {
                self.bump();
                self.expect(&TokenKind::LBracket)?;
                let i = self.number()? as usize;
                self.expect(&TokenKind::Comma)?;
                let n = self.number()? as usize;
                self.expect(&TokenKind::RBracket)?;
                if i == 0 || i > n {
                    return Err(ParseError::Invalid {
                        message: format!("injection index {i} out of range 1..={n}"),
                        span,
                    });
                }
                let arg = self.prefix()?;
                Ok(Surface {
                    kind: SurfaceKind::Inj(i, n, bx(arg)),
                    span,
                })
            }
            "init" => {
                self.bump();
                let x = self.binder()?;
                self.expect(&TokenKind::Assign)?;
                let seed = self.term()?;
                self.expect_word("in")?;
                let body = self.term()?;
                Ok(Surface {
                    kind: SurfaceKind::Init(x, bx(seed), bx(body)),
                    span,
                })
            }
            "case" => {
                self.bump();
                self.case(span)
            }
            "casenext" => {
                self.bump();
                let scrut = self.term()?;
                self.expect_word("of")?;
                self.eat(&TokenKind::Bar);
                self.expect_word("rest")?;
                let x = self.binder()?;
                self.expect(&TokenKind::Arrow)?;
                let l = self.term()?;
                self.expect(&TokenKind::Bar)?;
                self.expect_word("done")?;
                let y = self.binder()?;
                self.expect(&TokenKind::Arrow)?;
                let r = self.term()?;
                Ok(Surface {
                    kind: SurfaceKind::CaseNext(bx(scrut), x, bx(l), y, bx(r)),
                    span,
                })
            }
            "if" | "if_nu" => {
                self.bump();
                let c = self.term()?;
                self.expect_word("then")?;
                let t = self.term()?;
                self.expect_word("else")?;
                let e = self.term()?;
                let kind = if word == "if" {
                    SurfaceKind::If(bx(c), bx(t), bx(e))
                } else {
                    SurfaceKind::IfNu(bx(c), bx(t), bx(e))
                };
                Ok(Surface { kind, span })
            }
            "while" => {
                self.bump();
                let binder = self.loop_binder()?;
                let cond = self.term()?;
                let body = self.braced()?;
                Ok(Surface {
                    kind: SurfaceKind::While(binder, bx(cond), bx(body)),
                    span,
                })
            }
            "repeat" => {
                self.bump();
                let binder = self.loop_binder()?;
                let body = self.braced()?;
                self.expect_word("until")?;
                let cond = self.prefix()?;
                Ok(Surface {
                    kind: SurfaceKind::Repeat(binder, bx(body), bx(cond)),
                    span,
                })
            }
            "try" => {
                self.bump();
                let body = self.term()?;
                self.expect_word("with")?;
                let e = self.binder()?;
                self.expect(&TokenKind::Arrow)?;
                let handler = self.term()?;
                Ok(Surface {
                    kind: SurfaceKind::Try(bx(body), e, bx(handler)),
                    span,
                })
            }
            _ => self.atom(),
        }
    }

    /// Optional `(x := p)` after `while`/`repeat`.
    fn loop_binder(&mut self) -> PResult<Option<(Name, Box<Surface>)>> {
        let is_binder = *self.peek() == TokenKind::LParen
            && matches!(self.peek_at(1), TokenKind::Ident(_))
            && *self.peek_at(2) == TokenKind::Assign;
        if !is_binder {
            return Ok(None);
        }
        self.bump();
        let x = self.binder()?;
        self.expect(&TokenKind::Assign)?;
        let p = self.term()?;
        self.expect(&TokenKind::RParen)?;
        Ok(Some((x, bx(p))))
    }

    fn braced(&mut self) -> PResult<Surface> {
        self.expect(&TokenKind::LBrace)?;
        let t = self.term()?;
        self.expect(&TokenKind::RBrace)?;
        Ok(t)
    }

    fn pattern_ahead(&self) -> bool {
        match self.peek() {
            TokenKind::Ident(s) if !is_keyword(s) => *self.peek_at(1) == TokenKind::LArrow,
            TokenKind::Lt => {
                matches!(self.peek_at(1), TokenKind::Ident(_))
                    && *self.peek_at(2) == TokenKind::Comma
                    && matches!(self.peek_at(3), TokenKind::Ident(_))
                    && *self.peek_at(4) == TokenKind::Gt
                    && *self.peek_at(5) == TokenKind::LArrow
            }
            _ => false,
        }
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        if self.eat(&TokenKind::Lt) {
            let a = self.binder()?;
            self.expect(&TokenKind::Comma)?;
            let b = self.binder()?;
            self.expect(&TokenKind::Gt)?;
            return Ok(Pattern::Pair(a, b));
        }
        let x = self.binder()?;
        Ok(if &*x == "_" {
            Pattern::Wild
        } else {
            Pattern::Var(x)
        })
    }

    /// `stmt ; stmt ; ... ; term` where `stmt` is `pat <- term` or `term`.
    fn block(&mut self, block: Block, span: Span) -> PResult<Surface> {
        let pat = if self.pattern_ahead() {
            let p = self.pattern()?;
            self.expect(&TokenKind::LArrow)?;
            Some(p)
        } else {
            None
        };
        let bound = self.term()?;
        if !self.eat(&TokenKind::Semi) {
            if pat.is_some() {
                return self.unexpected("`;`");
            }
            return Ok(bound);
        }
        let rest_span = self.span();
        let rest = self.block(block, rest_span)?;
        Ok(Surface {
            kind: SurfaceKind::Bind(block, pat.unwrap_or(Pattern::Wild), bx(bound), bx(rest)),
            span,
        })
    }

    fn case(&mut self, span: Span) -> PResult<Surface> {
        let scrut = self.term()?;
        self.expect_word("of")?;
        self.eat(&TokenKind::Bar);
        if self.is_word("inj") {
            let mut branches = Vec::new();
            loop {
                self.expect_word("inj")?;
                let x = self.binder()?;
                self.expect(&TokenKind::Arrow)?;
                let body = self.term()?;
                branches.push((x, body));
                if !self.eat(&TokenKind::Bar) {
                    break;
                }
            }
            return Ok(Surface {
                kind: SurfaceKind::CaseN(bx(scrut), branches),
                span,
            });
        }
        self.expect_word("inl")?;
        let x = self.binder()?;
        self.expect(&TokenKind::Arrow)?;
        let l = self.term()?;
        self.expect(&TokenKind::Bar)?;
        self.expect_word("inr")?;
        let y = self.binder()?;
        self.expect(&TokenKind::Arrow)?;
        let r = self.term()?;
        Ok(Surface {
            kind: SurfaceKind::Case(bx(scrut), x, bx(l), y, bx(r)),
            span,
        })
    }

    fn atom(&mut self) -> PResult<Surface> {
        let span = self.span();
        let kind = match self.peek().clone() {
            TokenKind::Star => {
                self.bump();
                SurfaceKind::Star
            }
            TokenKind::Lt => {
                self.bump();
                let a = self.term()?;
                self.expect(&TokenKind::Comma)?;
                let b = self.term()?;
                self.expect(&TokenKind::Gt)?;
                SurfaceKind::Pair(bx(a), bx(b))
            }
            TokenKind::LParen => {
                self.bump();
                let t = self.term()?;
                if self.eat(&TokenKind::Colon) {
                    let ty = self.ty()?;
                    self.expect(&TokenKind::RParen)?;
                    SurfaceKind::Ascribe(bx(t), ty)
                } else {
                    self.expect(&TokenKind::RParen)?;
                    return Ok(t);
                }
            }
            TokenKind::Ident(w) => match w.as_str() {
                "tt" => {
                    self.bump();
                    SurfaceKind::Tt
                }
                "ff" => {
                    self.bump();
                    SurfaceKind::Ff
                }
                "nil" => {
                    self.bump();
                    SurfaceKind::Nil
                }
                "nil_nu" => {
                    self.bump();
                    SurfaceKind::NilNu
                }
                "get" => {
                    self.bump();
                    self.expect(&TokenKind::LParen)?;
                    let l = self.ident()?;
                    self.expect(&TokenKind::RParen)?;
                    SurfaceKind::Get(l)
                }
                "set" => {
                    self.bump();
                    self.expect(&TokenKind::LParen)?;
                    let l = self.ident()?;
                    self.expect(&TokenKind::Comma)?;
                    let v = self.term()?;
                    self.expect(&TokenKind::RParen)?;
                    SurfaceKind::Set(l, bx(v))
                }
                _ => {
                    let f = self.ident()?;
                    if *self.peek() == TokenKind::Dot {
                        self.bump();
                        let elem = match self.bump().kind {
                            TokenKind::Num(n) => name(&n.to_string()),
                            TokenKind::Ident(s) => name(&s),
                            other => {
                                return Err(ParseError::Unexpected {
                                    expected: "carrier element".into(),
                                    found: other.to_string(),
                                    span: self.span(),
                                })
                            }
                        };
                        SurfaceKind::Const(f, elem)
                    } else if *self.peek() == TokenKind::LParen {
                        self.bump();
                        let mut args = Vec::new();
                        if !self.eat(&TokenKind::RParen) {
                            loop {
                                args.push(self.term()?);
                                if self.eat(&TokenKind::Comma) {
                                    continue;
                                }
                                self.expect(&TokenKind::RParen)?;
                                break;
                            }
                        }
                        SurfaceKind::Call(f, args)
                    } else {
                        SurfaceKind::Var(f)
                    }
                }
            },
            _ => return self.unexpected("term"),
        };
        Ok(Surface { kind, span })
    }

    // ----- items -----

    fn params(&mut self) -> PResult<Vec<(Name, Type)>> {
        let mut out = Vec::new();
        if !self.eat(&TokenKind::LParen) {
            return Ok(out);
        }
        if self.eat(&TokenKind::RParen) {
            return Ok(out);
        }
        loop {
            let x = self.ident()?;
            self.expect(&TokenKind::Colon)?;
            let t = self.ty()?;
            out.push((x, t));
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(&TokenKind::RParen)?;
            return Ok(out);
        }
    }

    fn items(&mut self) -> PResult<Vec<Item>> {
        let mut items = Vec::new();
        while !self.at_eof() {
            let span = self.span();
            if self.eat_word("signature") {
                while !self.eat_word("end") {
                    let span = self.span();
                    if self.eat_word("type") {
                        items.push(Item::Type(self.ident()?, span));
                    } else if self.eat_word("fn") {
                        let f = self.ident()?;
                        self.expect(&TokenKind::Colon)?;
                        let a = self.ty()?;
                        self.expect(&TokenKind::Arrow)?;
                        let b = self.ty()?;
                        items.push(Item::Fn(f, a, b, span));
                    } else {
                        return self.unexpected("`type`, `fn` or `end`");
                    }
                }
            } else if self.eat_word("model") {
                let mut decls = Vec::new();
                while !self.eat_word("end") {
                    let span = self.span();
                    if self.eat_word("loc") {
                        let l = self.ident()?;
                        self.expect(&TokenKind::Colon)?;
                        decls.push(ModelItem::Loc(l, self.ty()?, span));
                    } else if self.eat_word("carrier") {
                        let c = self.ident()?;
                        self.expect(&TokenKind::Eq)?;
                        decls.push(ModelItem::Carrier(c, self.carrier()?, span));
                    } else {
                        return self.unexpected("`loc`, `carrier` or `end`");
                    }
                }
                items.push(Item::Model(decls));
            } else if self.eat_word("def") {
                let f = self.ident()?;
                let params = self.params()?;
                self.expect(&TokenKind::Colon)?;
                let ret = self.ty()?;
                self.expect(&TokenKind::Eq)?;
                let body = self.term()?;
                items.push(Item::Def {
                    name: f,
                    params,
                    ret,
                    body,
                    span,
                });
            } else if self.eat_word("scheme") {
                let s = self.ident()?;
                let mut params = Vec::new();
                let mut eqs = Vec::new();
                while !self.eat_word("end") {
                    let span = self.span();
                    if self.eat_word("param") {
                        let x = self.ident()?;
                        self.expect(&TokenKind::Colon)?;
                        params.push((x, self.ty()?));
                    } else if self.eat_word("corec") {
                        let f = self.ident()?;
                        self.expect(&TokenKind::LParen)?;
                        let arg = self.ident()?;
                        self.expect(&TokenKind::Colon)?;
                        let dom = self.ty()?;
                        self.expect(&TokenKind::RParen)?;
                        self.expect(&TokenKind::Colon)?;
                        let cod = self.ty()?;
                        self.expect(&TokenKind::Eq)?;
                        let rhs = self.term()?;
                        eqs.push(SchemeItem {
                            name: f,
                            arg,
                            dom,
                            cod,
                            rhs,
                            span,
                        });
                    } else {
                        return self.unexpected("`param`, `corec` or `end`");
                    }
                }
                items.push(Item::Scheme {
                    name: s,
                    params,
                    eqs,
                    span,
                });
            } else {
                return self.unexpected("`signature`, `model`, `def` or `scheme`");
            }
        }
        Ok(items)
    }

    /// `{0..4}` or `{a, b, c}`.
    fn carrier(&mut self) -> PResult<Vec<Name>> {
        let span = self.expect(&TokenKind::LBrace)?;
        if let (TokenKind::Num(lo), TokenKind::DotDot) = (self.peek().clone(), self.peek_at(1)) {
            self.bump();
            self.bump();
            let hi = self.number()?;
            self.expect(&TokenKind::RBrace)?;
            if hi < lo {
                return Err(ParseError::Invalid {
                    message: "empty carrier range".into(),
                    span,
                });
            }
            return Ok((lo..=hi).map(|n| name(&n.to_string())).collect());
        }
        let mut out = Vec::new();
        loop {
            match self.bump().kind {
                TokenKind::Ident(s) => out.push(name(&s)),
                TokenKind::Num(n) => out.push(name(&n.to_string())),
                _ => {
                    return Err(ParseError::Invalid {
                        message: "bad carrier element".into(),
                        span,
                    })
                }
            }
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(&TokenKind::RBrace)?;
            return Ok(out);
        }
    }
}

/// Parse a whole `.mnu` file into its items.
pub fn parse_file(src: &str) -> Result<Vec<Item>, ParseError> {
    Parser::new(src)?.items()
}

/// Parse a single surface term.
pub fn parse_surface_term(src: &str) -> Result<Surface, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if !p.at_eof() {
        return p.unexpected("end of input");
    }
    Ok(t)
}

/// Parse a type.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    if !p.at_eof() {
        return p.unexpected("end of input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(s: &str) -> SurfaceKind {
        parse_surface_term(s).unwrap().kind
    }

    #[test]
    fn parses_ret_star() {
        assert!(matches!(kind("ret *"), SurfaceKind::Ret(b) if b.kind == SurfaceKind::Star));
    }

    #[test]
    fn parses_do_chain() {
        match kind("do x <- p; y <- q; r") {
            SurfaceKind::Bind(Block::Do, Pattern::Var(x), _, rest) => {
                assert_eq!(&*x, "x");
                assert!(matches!(
                    rest.kind,
                    SurfaceKind::Bind(Block::Do, Pattern::Var(_), _, _)
                ));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_init() {
        assert!(matches!(kind("init x := p in q"), SurfaceKind::Init(..)));
    }

    #[test]
    fn prefix_binds_tighter_than_plus() {
        match kind("ret x + ret y") {
            SurfaceKind::Plus(a, b) => {
                assert!(matches!(a.kind, SurfaceKind::Ret(_)));
                assert!(matches!(b.kind, SurfaceKind::Ret(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_types_with_precedence() {
        assert_eq!(
            parse_type("T 2 + 1 * W").unwrap(),
            Type::sum(
                Type::t(Type::bool()),
                Type::prod(Type::Unit, Type::Base(name("W")))
            )
        );
        assert_eq!(parse_type("T_nu (1 + 1)").unwrap(), Type::tnu(Type::bool()));
    }

    #[test]
    fn parses_nary_case_and_injection() {
        match kind("case z of inj a -> ret a | inj b -> ret b | inj c -> ret c") {
            SurfaceKind::CaseN(_, bs) => assert_eq!(bs.len(), 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(kind("inj[2,3] a"), SurfaceKind::Inj(2, 3, _)));
    }

    #[test]
    fn reports_position_on_error() {
        let e = parse_surface_term("do x <- ; q").unwrap_err();
        match e {
            ParseError::Unexpected { span, .. } => assert_eq!(span, Span { line: 1, col: 9 }),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_loops_and_pairs_patterns() {
        assert!(matches!(
            kind("while (x := *) b { q }"),
            SurfaceKind::While(Some(_), _, _)
        ));
        assert!(matches!(
            kind("while b { q }"),
            SurfaceKind::While(None, _, _)
        ));
        assert!(matches!(
            kind("repeat { q } until b"),
            SurfaceKind::Repeat(None, _, _)
        ));
        assert!(matches!(
            kind("do <a, b> <- p; q"),
            SurfaceKind::Bind(Block::Do, Pattern::Pair(_, _), _, _)
        ));
    }

    #[test]
    fn parses_items() {
        let src = "signature\n type W\n fn f : W -> T 1\nend\nmodel\n carrier W = {0..2}\n loc l : 2\nend\ndef main : T 2 = get(l)\n";
        let items = parse_file(src).unwrap();
        assert_eq!(items.len(), 4);
        assert!(matches!(&items[2], Item::Model(d) if d.len() == 2));
    }
}
