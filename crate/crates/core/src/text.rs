//! Tokenizer shared by the formula grammar and the rationale DSL.

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Str(s) => write!(f, "string {}", quote(s)),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "<->", "->", "&&", "||", "==", "<=", "(", ")", "{", "}", "[", "]", ",", ":", ";", ".", "!", "<", "=", "+", "-", "*",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    tokenize_at(src, Pos { line: 1, col: 1 })
}

/// Tokenizes `src` as if it started at `origin` in a larger document.
pub fn tokenize_at(src: &str, origin: Pos) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = origin.line;
    let mut col = origin.col;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap();
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            col += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), pos, start, end: i });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            col += i - start;
            out.push(Token { tok: Tok::Number(src[start..i].to_string()), pos, start, end: i });
            continue;
        }
        if c == '"' {
            i += 1;
            col += 1;
            let mut text = String::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(LexError { pos, message: "unterminated string literal".into() });
                };
                i += ch.len_utf8();
                col += 1;
                match ch {
                    '"' => break,
                    '\\' => {
                        let esc = src[i..].chars().next();
                        match esc {
                            Some('"') => text.push('"'),
                            Some('\\') => text.push('\\'),
                            _ => {
                                return Err(LexError {
                                    pos: Pos { line, col: col - 1 },
                                    message: "invalid escape (only \\\" and \\\\ are allowed)".into(),
                                })
                            }
                        }
                        i += 1;
                        col += 1;
                    }
                    '\n' => {
                        return Err(LexError { pos, message: "newline in string literal".into() });
                    }
                    other => text.push(other),
                }
            }
            out.push(Token { tok: Tok::Str(text), pos, start, end: i });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token { tok: Tok::Sym(sym), pos, start, end: i });
            }
            None => {
                return Err(LexError { pos, message: format!("unexpected character `{c}`") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col }, start: bytes.len(), end: bytes.len() });
    Ok(out)
}

/// Double-quoted literal with `\"` and `\\` escapes.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Trims and collapses internal whitespace runs to one space.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
