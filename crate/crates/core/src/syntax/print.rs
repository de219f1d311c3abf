//! Printing of types and primitive terms in the surface syntax.

use super::{Term, TermKind, Type};
use std::fmt;

pub(super) fn fmt_type(t: &Type, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match t {
        Type::Base(b) => write!(f, "{b}"),
        Type::Unit => write!(f, "1"),
        Type::Sum(a, b) if **a == Type::Unit && **b == Type::Unit => write!(f, "2"),
        Type::Sum(a, b) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            fmt_type(a, f, 1)?;
            write!(f, " + ")?;
            fmt_type(b, f, 0)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Prod(a, b) => {
            if prec > 1 {
                write!(f, "(")?;
            }
            fmt_type(a, f, 2)?;
            write!(f, " * ")?;
            fmt_type(b, f, 1)?;
            if prec > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::T(a) => {
            write!(f, "T ")?;
            fmt_type(a, f, 2)
        }
        Type::TNu(a) => {
            write!(f, "T_nu ")?;
            fmt_type(a, f, 2)
        }
    }
}

/// Terms that can appear as the argument of a prefix operator unparenthesised.
fn is_tight(t: &Term) -> bool {
    matches!(
        t.kind(),
        TermKind::Var(_)
            | TermKind::App(..)
            | TermKind::Star
            | TermKind::Pair(..)
            | TermKind::Nil(_)
            | TermKind::Fst(_)
            | TermKind::Snd(_)
            | TermKind::Ret(_)
            | TermKind::Out(_)
            | TermKind::Inl(..)
            | TermKind::Inr(..)
    )
}

fn tight(t: &Term, out: &mut String) {
    if is_tight(t) {
        write_term(t, out);
    } else {
        out.push('(');
        write_term(t, out);
        out.push(')');
    }
}

fn write_term(t: &Term, out: &mut String) {
    match t.kind() {
        TermKind::Var(x) => out.push_str(x),
        TermKind::App(f, a) => {
            if let Some(l) = f.strip_prefix("get.") {
                out.push_str(&format!("get({l})"));
            } else if let Some(l) = f.strip_prefix("set.") {
                out.push_str(&format!("set({l}, "));
                write_term(a, out);
                out.push(')');
            } else if f.contains('.') && matches!(a.kind(), TermKind::Star) {
                out.push_str(f);
            } else {
                out.push_str(f);
                out.push('(');
                write_term(a, out);
                out.push(')');
            }
        }
        TermKind::Star => out.push('*'),
        TermKind::Pair(a, b) => {
            out.push('<');
            write_term(a, out);
            out.push_str(", ");
            write_term(b, out);
            out.push('>');
        }
        TermKind::Fst(a) => {
            out.push_str("fst ");
            tight(a, out);
        }
        TermKind::Snd(a) => {
            out.push_str("snd ");
            tight(a, out);
        }
        TermKind::Inl(a, ann) | TermKind::Inr(a, ann) => {
            let kw = if matches!(t.kind(), TermKind::Inl(..)) {
                "inl "
            } else {
                "inr "
            };
            if ann.is_some() {
                out.push('(');
            }
            out.push_str(kw);
            tight(a, out);
            if let Some(ty) = ann {
                out.push_str(&format!(" : {ty})"));
            }
        }
        TermKind::Case(s, x, l, y, r) => {
            out.push_str("case ");
            tight(s, out);
            out.push_str(&format!(" of inl {x} -> "));
            tight(l, out);
            out.push_str(&format!(" | inr {y} -> "));
            write_term(r, out);
        }
        TermKind::Ret(a) => {
            out.push_str("ret ");
            tight(a, out);
        }
        TermKind::Do(x, p, q) => {
            out.push_str(&format!("do {x} <- "));
            tight(p, out);
            out.push_str("; ");
            write_term(q, out);
        }
        TermKind::Nil(None) => out.push_str("nil"),
        TermKind::Nil(Some(ty)) => out.push_str(&format!("(nil : {ty})")),
        TermKind::Plus(a, b) => {
            tight(a, out);
            out.push_str(" + ");
            tight(b, out);
        }
        TermKind::Out(a) => {
            out.push_str("out ");
            tight(a, out);
        }
        TermKind::Init(x, p, q) => {
            out.push_str(&format!("init {x} := "));
            tight(p, out);
            out.push_str(" in ");
            write_term(q, out);
        }
    }
}

pub(super) fn fmt_term(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut s = String::new();
    write_term(t, &mut s);
    f.write_str(&s)
}

/// Multi-line rendering: binders start new lines, nested bodies are indented.
pub fn pretty(t: &Term) -> String {
    let mut out = String::new();
    pretty_at(t, 0, &mut out);
    out
}

fn indent(n: usize, out: &mut String) {
    out.push('\n');
    for _ in 0..n {
        out.push_str("  ");
    }
}

fn pretty_at(t: &Term, level: usize, out: &mut String) {
    let flat = t.to_string();
    if flat.len() <= 72 {
        out.push_str(&flat);
        return;
    }
    let paren = |t: &Term, level: usize, out: &mut String| {
        if is_tight(t) {
            pretty_at(t, level, out);
        } else {
            out.push('(');
            pretty_at(t, level, out);
            out.push(')');
        }
    };
    match t.kind() {
        TermKind::Do(x, p, q) => {
            out.push_str(&format!("do {x} <- "));
            paren(p, level + 1, out);
            out.push(';');
            indent(level, out);
            pretty_at(q, level, out);
        }
        TermKind::Init(x, p, q) => {
            out.push_str(&format!("init {x} := "));
            paren(p, level + 1, out);
            out.push_str(" in");
            indent(level + 1, out);
            pretty_at(q, level + 1, out);
        }
        TermKind::Case(s, x, l, y, r) => {
            out.push_str("case ");
            paren(s, level + 1, out);
            out.push_str(" of");
            indent(level + 1, out);
            out.push_str(&format!("inl {x} -> "));
            paren(l, level + 2, out);
            indent(level + 1, out);
            out.push_str(&format!("| inr {y} -> "));
            pretty_at(r, level + 2, out);
        }
        TermKind::Plus(a, b) => {
            paren(a, level, out);
            indent(level, out);
            out.push_str("+ ");
            paren(b, level, out);
        }
        TermKind::Ret(a) => {
            out.push_str("ret ");
            paren(a, level, out);
        }
        TermKind::Out(a) => {
            out.push_str("out ");
            paren(a, level, out);
        }
        _ => out.push_str(&flat),
    }
}
