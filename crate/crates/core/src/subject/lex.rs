//! Line-oriented lexer producing `Newline`/`Indent`/`Dedent` tokens.
//! Newlines inside brackets are ignored.

use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum T {
    Ident(String),
    Num(String),
    Str(String),
    Sym(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Lexeme {
    pub t: T,
    pub span: Span,
}

const SYMBOLS: &[&str] =
    &["+=", "-=", "==", "!=", "<=", ">=", "<", ">", "=", "+", "-", "*", "(", ")", "[", "]", "{", "}", ",", ":", "."];

pub(crate) fn lex(src: &str) -> Result<Vec<Lexeme>, (Span, String)> {
    let mut out: Vec<Lexeme> = Vec::new();
    let mut indents = vec![0usize];
    let mut depth = 0usize;
    for (lineno, line) in src.lines().enumerate() {
        let line_no = lineno + 1;
        let bytes = line.as_bytes();
        let mut i = 0;
        if depth == 0 {
            while i < bytes.len() && bytes[i] == b' ' {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'\t' {
                return Err((Span { line: line_no, col: i + 1 }, "tabs are not allowed in indentation".into()));
            }
            let rest = line[i..].trim_end();
            if rest.is_empty() || rest.starts_with('#') {
                continue;
            }
            let span = Span { line: line_no, col: i + 1 };
            let top = *indents.last().unwrap();
            if i > top {
                indents.push(i);
                out.push(Lexeme { t: T::Indent, span });
            } else {
                while i < *indents.last().unwrap() {
                    indents.pop();
                    out.push(Lexeme { t: T::Dedent, span });
                }
                if i != *indents.last().unwrap() {
                    return Err((span, "inconsistent dedent".into()));
                }
            }
        }
        while i < bytes.len() {
            let c = line[i..].chars().next().unwrap();
            let span = Span { line: line_no, col: line[..i].chars().count() + 1 };
            if c == ' ' || c == '\t' || c == '\r' {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            let start = i;
            if c.is_ascii_alphabetic() || c == '_' {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Lexeme { t: T::Ident(line[start..i].to_string()), span });
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
                out.push(Lexeme { t: T::Num(line[start..i].to_string()), span });
                continue;
            }
            if c == '"' {
                i += 1;
                let mut text = String::new();
                loop {
                    let Some(ch) = line[i..].chars().next() else {
                        return Err((span, "unterminated string literal".into()));
                    };
                    i += ch.len_utf8();
                    match ch {
                        '"' => break,
                        '\\' => {
                            match line[i..].chars().next() {
                                Some(e @ ('"' | '\\')) => text.push(e),
                                _ => return Err((span, "invalid escape in string literal".into())),
                            }
                            i += 1;
                        }
                        other => text.push(other),
                    }
                }
                out.push(Lexeme { t: T::Str(text), span });
                continue;
            }
            match SYMBOLS.iter().find(|s| line[i..].starts_with(**s)) {
                Some(sym) => {
                    i += sym.len();
                    match *sym {
                        "(" | "[" | "{" => depth += 1,
                        ")" | "]" | "}" => depth = depth.saturating_sub(1),
                        _ => {}
                    }
                    out.push(Lexeme { t: T::Sym(sym), span });
                }
                None => return Err((span, format!("unexpected character `{c}`"))),
            }
        }
        if depth == 0 && out.last().is_some_and(|l| !matches!(l.t, T::Newline | T::Indent | T::Dedent)) {
            out.push(Lexeme { t: T::Newline, span: Span { line: line_no, col: line.chars().count() + 1 } });
        }
    }
    let end = Span { line: src.lines().count() + 1, col: 1 };
    if depth > 0 {
        return Err((end, "unclosed bracket at end of input".into()));
    }
    while indents.len() > 1 {
        indents.pop();
        out.push(Lexeme { t: T::Dedent, span: end });
    }
    out.push(Lexeme { t: T::Eof, span: end });
    Ok(out)
}
