//! Tokenizer for `.mnu` sources and term strings.

use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Semi,
    Colon,
    Assign,
    Arrow,
    LArrow,
    Bar,
    Plus,
    PlusNu,
    Par,
    LMerge,
    RMerge,
    Star,
    Eq,
    DotDot,
    Dot,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(s) => return write!(f, "`{s}`"),
            TokenKind::Num(n) => return write!(f, "`{n}`"),
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Lt => "<",
            TokenKind::Gt => ">",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::Colon => ":",
            TokenKind::Assign => ":=",
            TokenKind::Arrow => "->",
            TokenKind::LArrow => "<-",
            TokenKind::Bar => "|",
            TokenKind::Plus => "+",
            TokenKind::PlusNu => "<+>",
            TokenKind::Par => "||",
            TokenKind::LMerge => "<|",
            TokenKind::RMerge => "|>",
            TokenKind::Star => "*",
            TokenKind::Eq => "=",
            TokenKind::DotDot => "..",
            TokenKind::Dot => ".",
            TokenKind::Eof => return write!(f, "end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unexpected character {ch:?} at {span}")]
pub struct LexError {
    pub ch: char,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let peek = chars.get(i + 1).copied();
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && peek == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            out.push(Token {
                kind: TokenKind::Ident(s),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let n = s.parse().map_err(|_| LexError { ch: c, span })?;
            out.push(Token {
                kind: TokenKind::Num(n),
                span,
            });
            continue;
        }
        let three: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (kind, width) = if three == "<+>" {
            (TokenKind::PlusNu, 3)
        } else {
            match (c, peek) {
                (':', Some('=')) => (TokenKind::Assign, 2),
                ('-', Some('>')) => (TokenKind::Arrow, 2),
                ('<', Some('-')) => (TokenKind::LArrow, 2),
                ('|', Some('|')) => (TokenKind::Par, 2),
                ('<', Some('|')) => (TokenKind::LMerge, 2),
                ('|', Some('>')) => (TokenKind::RMerge, 2),
                ('.', Some('.')) => (TokenKind::DotDot, 2),
                ('(', _) => (TokenKind::LParen, 1),
                (')', _) => (TokenKind::RParen, 1),
                ('{', _) => (TokenKind::LBrace, 1),
                ('}', _) => (TokenKind::RBrace, 1),
                ('[', _) => (TokenKind::LBracket, 1),
                (']', _) => (TokenKind::RBracket, 1),
                ('<', _) => (TokenKind::Lt, 1),
                ('>', _) => (TokenKind::Gt, 1),
                (',', _) => (TokenKind::Comma, 1),
                (';', _) => (TokenKind::Semi, 1),
                (':', _) => (TokenKind::Colon, 1),
                ('|', _) => (TokenKind::Bar, 1),
                ('+', _) => (TokenKind::Plus, 1),
                ('*', _) => (TokenKind::Star, 1),
                ('=', _) => (TokenKind::Eq, 1),
                ('.', _) => (TokenKind::Dot, 1),
                _ => return Err(LexError { ch: c, span }),
            }
        };
        out.push(Token { kind, span });
        i += width;
        col += width as u32;
    }
    out.push(Token {
        kind: TokenKind::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        tokenize(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn lexes_operators() {
        assert_eq!(
            kinds("p <+> q || r <- s"),
            vec![
                TokenKind::Ident("p".into()),
                TokenKind::PlusNu,
                TokenKind::Ident("q".into()),
                TokenKind::Par,
                TokenKind::Ident("r".into()),
                TokenKind::LArrow,
                TokenKind::Ident("s".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn skips_comments_and_tracks_lines() {
        let toks = tokenize("-- note\n  x'1").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident("x'1".into()));
        assert_eq!(toks[0].span, Span { line: 2, col: 3 });
    }

    #[test]
    fn rejects_stray_characters() {
        let e = tokenize("ret $").unwrap_err();
        assert_eq!(e.ch, '$');
        assert_eq!(e.span, Span { line: 1, col: 5 });
    }
}
