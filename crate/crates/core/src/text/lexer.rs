//! Outer-syntax lexer for Isabelle theory and proof text.
//!
//! Lexing happens in two layers. [`scan`] splits the source into code,
//! comment, string and cartouche regions; everything that must ignore
//! masked text (placeholder detection, normalization) works on that layer.
//! [`tokenize`] then breaks code regions into words, delimiters and
//! symbols for the structural parsers.
//!
//! Comments `(* ... *)` nest. Cartouches nest and may be written either as
//! `‹...›` or with the ASCII `\<open>`/`\<close>` escapes.

use std::ops::Range;

use super::TextError;

const OPEN_ESC: &str = "\\<open>";
const CLOSE_ESC: &str = "\\<close>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Code,
    Comment,
    Str,
    Cartouche,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub kind: RegionKind,
    pub span: Range<usize>,
}

/// How to treat a string or cartouche that runs off the end of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Literals {
    /// Report `UnterminatedString`.
    Strict,
    /// Mask everything up to end of input.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Str,
    Cartouche,
    Comment,
    Open(Delim),
    Close(Delim),
    Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delim {
    Paren,
    Bracket,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub span: Range<usize>,
}

impl Token<'_> {
    pub fn is_word(&self, w: &str) -> bool {
        self.kind == TokenKind::Word && self.text == w
    }

    pub fn is_symbol(&self, s: &str) -> bool {
        self.kind == TokenKind::Symbol && self.text == s
    }
}

/// Splits `src` into maximal code/comment/string/cartouche regions.
pub fn scan(src: &str, literals: Literals) -> Result<Vec<Region>, TextError> {
    let bytes = src.as_bytes();
    let mut regions = Vec::new();
    let mut code_start = 0;
    let mut i = 0;

    let push = |regions: &mut Vec<Region>, kind, span: Range<usize>| {
        if !span.is_empty() {
            regions.push(Region { kind, span });
        }
    };

    while i < bytes.len() {
        let rest = &src[i..];
        let (kind, end) = if rest.starts_with("(*") {
            (RegionKind::Comment, comment_end(src, i)?)
        } else if bytes[i] == b'"' {
            match string_end(src, i) {
                Some(end) => (RegionKind::Str, end),
                None if literals == Literals::Lenient => (RegionKind::Str, src.len()),
                None => return Err(TextError::UnterminatedString { offset: i }),
            }
        } else if rest.starts_with('‹') || rest.starts_with(OPEN_ESC) {
            match cartouche_end(src, i) {
                Some(end) => (RegionKind::Cartouche, end),
                None if literals == Literals::Lenient => (RegionKind::Cartouche, src.len()),
                None => return Err(TextError::UnterminatedString { offset: i }),
            }
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
            continue;
        };
        push(&mut regions, RegionKind::Code, code_start..i);
        push(&mut regions, kind, i..end);
        i = end;
        code_start = end;
    }
    push(&mut regions, RegionKind::Code, code_start..src.len());
    Ok(regions)
}

fn comment_end(src: &str, start: usize) -> Result<usize, TextError> {
    let mut depth = 0usize;
    let mut i = start;
    while i < src.len() {
        let rest = &src[i..];
        if rest.starts_with("(*") {
            depth += 1;
            i += 2;
        } else if rest.starts_with("*)") {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return Ok(i);
            }
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
        }
    }
    Err(TextError::UnterminatedComment { offset: start })
}

fn string_end(src: &str, start: usize) -> Option<usize> {
    let bytes = src.as_bytes();
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

fn cartouche_end(src: &str, start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut i = start;
    while i < src.len() {
        let rest = &src[i..];
        if rest.starts_with('‹') {
            depth += 1;
            i += '‹'.len_utf8();
        } else if rest.starts_with(OPEN_ESC) {
            depth += 1;
            i += OPEN_ESC.len();
        } else if rest.starts_with('›') || rest.starts_with(CLOSE_ESC) {
            i += if rest.starts_with('›') { '›'.len_utf8() } else { CLOSE_ESC.len() };
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
        }
    }
    None
}

pub(crate) fn is_word_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Tokenizes `src`; whitespace is dropped, comments are kept as tokens.
pub fn tokenize(src: &str, literals: Literals) -> Result<Vec<Token<'_>>, TextError> {
    let mut tokens = Vec::new();
    for region in scan(src, literals)? {
        let kind = match region.kind {
            RegionKind::Comment => TokenKind::Comment,
            RegionKind::Str => TokenKind::Str,
            RegionKind::Cartouche => TokenKind::Cartouche,
            RegionKind::Code => {
                tokenize_code(src, region.span, &mut tokens);
                continue;
            }
        };
        tokens.push(Token { kind, text: &src[region.span.clone()], span: region.span });
    }
    Ok(tokens)
}

fn tokenize_code<'a>(src: &'a str, span: Range<usize>, out: &mut Vec<Token<'a>>) {
    let text = &src[span.clone()];
    let base = span.start;
    let mut chars = text.char_indices().peekable();
    while let Some((off, c)) = chars.next() {
        let start = base + off;
        if c.is_whitespace() {
            continue;
        }
        let (kind, end) = if is_word_start(c) {
            let mut end = off + c.len_utf8();
            while let Some(&(o, n)) = chars.peek() {
                let long_name_dot = n == '.'
                    && text[o + 1..].chars().next().is_some_and(is_word_start);
                if is_word_char(n) || long_name_dot {
                    chars.next();
                    end = o + n.len_utf8();
                } else {
                    break;
                }
            }
            (TokenKind::Word, base + end)
        } else if c == '\\' && text[off..].starts_with("\\<") {
            // symbol escape such as \<Longrightarrow>
            match text[off..].find('>') {
                Some(rel) => {
                    let end = off + rel + 1;
                    while chars.peek().is_some_and(|&(o, _)| o < end) {
                        chars.next();
                    }
                    (TokenKind::Symbol, base + end)
                }
                None => (TokenKind::Symbol, start + 1),
            }
        } else {
            let kind = match c {
                '(' => TokenKind::Open(Delim::Paren),
                ')' => TokenKind::Close(Delim::Paren),
                '[' => TokenKind::Open(Delim::Bracket),
                ']' => TokenKind::Close(Delim::Bracket),
                _ => TokenKind::Symbol,
            };
            (kind, start + c.len_utf8())
        };
        out.push(Token { kind, text: &src[start..end], span: start..end });
    }
}

/// Inner text of a `(* ... *)` comment token, trimmed.
pub fn comment_body(comment: &str) -> &str {
    comment
        .strip_prefix("(*")
        .and_then(|c| c.strip_suffix("*)"))
        .unwrap_or(comment)
        .trim()
}
