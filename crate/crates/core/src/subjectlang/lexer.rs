//! Tokenizer with Python-style indentation tracking.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;

use super::ParseError;
use crate::num::Int;

#[derive(Clone, Debug, PartialEq)]
pub enum TokKind {
    Name(String),
    Int(Int),
    Float(f64),
    Str(String),
    /// Undecoded body of an f-string.
    FStr { body: String, raw: bool },
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
}

pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<(u32, u32)>,
}

const OPS3: &[&str] = &["**=", "//=", ">>=", "<<=", "..."];
const OPS2: &[&str] = &[
    "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "->", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", ":=",
];
const OPS1: &[&str] = &[
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":",
    ".", ";", "=", "@",
];

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    depth: usize,
    indents: Vec<u32>,
    tokens: Vec<Token>,
    comments: Vec<(u32, u32)>,
    _src: &'a str,
}

pub fn tokenize(src: &str) -> Result<Lexed, ParseError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 0,
        depth: 0,
        indents: alloc::vec![0],
        tokens: Vec::new(),
        comments: Vec::new(),
        _src: src,
    };
    lx.run()?;
    Ok(Lexed { tokens: lx.tokens, comments: lx.comments })
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 0;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokKind, line: u32, col: u32) {
        self.tokens.push(Token { kind, line, col });
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line.max(1), message: msg.into() }
    }

    fn last_is_newline(&self) -> bool {
        matches!(
            self.tokens.last().map(|t| &t.kind),
            None | Some(TokKind::Newline) | Some(TokKind::Indent) | Some(TokKind::Dedent)
        )
    }

    fn run(&mut self) -> Result<(), ParseError> {
        let mut line_start = true;
        loop {
            if line_start && self.depth == 0 {
                line_start = false;
                let mut width = 0u32;
                while let Some(c) = self.peek() {
                    match c {
                        ' ' => width += 1,
                        '\t' => width = (width / 8 + 1) * 8,
                        '\x0c' => width = 0,
                        _ => break,
                    }
                    self.bump();
                }
                match self.peek() {
                    None => break,
                    Some('\n') | Some('\r') => {
                        self.skip_line_end();
                        line_start = true;
                        continue;
                    }
                    Some('#') => {
                        self.comment();
                        self.skip_line_end();
                        line_start = true;
                        continue;
                    }
                    Some('\\') if matches!(self.peek_at(1), Some('\n') | Some('\r')) => {}
                    _ => {}
                }
                let cur = *self.indents.last().unwrap_or(&0);
                if width > cur {
                    self.indents.push(width);
                    self.push(TokKind::Indent, self.line, 0);
                } else if width < cur {
                    while *self.indents.last().unwrap_or(&0) > width {
                        self.indents.pop();
                        self.push(TokKind::Dedent, self.line, 0);
                    }
                    if *self.indents.last().unwrap_or(&0) != width {
                        return Err(self.syntax("unindent does not match any outer indentation level"));
                    }
                }
            }
            let Some(c) = self.peek() else { break };
            match c {
                '\n' => {
                    if self.depth == 0 {
                        if !self.last_is_newline() {
                            self.push(TokKind::Newline, self.line, self.col);
                        }
                        line_start = true;
                    }
                    self.bump();
                }
                '\r' => {
                    self.bump();
                }
                ' ' | '\t' | '\x0c' => {
                    self.bump();
                }
                '#' => self.comment(),
                '\\' => {
                    self.bump();
                    match self.peek() {
                        Some('\r') => {
                            self.bump();
                            if self.peek() == Some('\n') {
                                self.bump();
                            }
                        }
                        Some('\n') => {
                            self.bump();
                        }
                        _ => return Err(self.syntax("unexpected character after line continuation character")),
                    }
                }
                c if c == '_' || c.is_alphabetic() => self.name_or_string()?,
                c if c.is_ascii_digit() => self.number()?,
                '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => self.number()?,
                '"' | '\'' => {
                    let (line, col) = (self.line, self.col);
                    self.string("", line, col)?;
                }
                _ => self.op()?,
            }
        }
        if self.depth > 0 {
            return Err(self.syntax("unexpected EOF while inside brackets"));
        }
        if !self.last_is_newline() {
            self.push(TokKind::Newline, self.line, self.col);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokKind::Dedent, self.line, 0);
        }
        self.push(TokKind::Eof, self.line, self.col);
        Ok(())
    }

    fn skip_line_end(&mut self) {
        while let Some(c) = self.peek() {
            self.bump();
            if c == '\n' {
                break;
            }
        }
    }

    fn comment(&mut self) {
        self.comments.push((self.line, self.col));
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn op(&mut self) -> Result<(), ParseError> {
        let (line, col) = (self.line, self.col);
        let rest: String = self.chars[self.pos..(self.pos + 3).min(self.chars.len())].iter().collect();
        let found = OPS3
            .iter()
            .chain(OPS2.iter())
            .chain(OPS1.iter())
            .find(|op| rest.starts_with(**op))
            .copied();
        let Some(op) = found else {
            let c = self.peek().unwrap_or(' ');
            return Err(self.syntax(format!("invalid character '{c}'")));
        };
        for _ in 0..op.chars().count() {
            self.bump();
        }
        match op {
            "(" | "[" | "{" => self.depth += 1,
            ")" | "]" | "}" => {
                if self.depth == 0 {
                    return Err(ParseError::Syntax { line, message: format!("unmatched '{op}'") });
                }
                self.depth -= 1;
            }
            ":=" => return Err(ParseError::Unsupported { line, construct: "assignment expression".to_string() }),
            "..." => return Err(ParseError::Unsupported { line, construct: "Ellipsis".to_string() }),
            "@" => return Err(ParseError::Unsupported { line, construct: "decorator or matrix operator".to_string() }),
            _ => {}
        }
        self.push(TokKind::Op(op), line, col);
        Ok(())
    }

    fn name_or_string(&mut self) -> Result<(), ParseError> {
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '_' || c.is_alphanumeric() {
                self.bump();
            } else {
                break;
            }
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        if matches!(self.peek(), Some('"') | Some('\'')) {
            let lower = word.to_ascii_lowercase();
            if matches!(lower.as_str(), "r" | "u" | "f" | "b" | "rb" | "br" | "fr" | "rf") {
                return self.string(&lower, line, col);
            }
        }
        self.push(TokKind::Name(word), line, col);
        Ok(())
    }

    fn number(&mut self) -> Result<(), ParseError> {
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        if self.peek() == Some('0') && matches!(self.peek_at(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B')) {
            let radix = match self.peek_at(1).unwrap_or('x').to_ascii_lowercase() {
                'x' => 16,
                'o' => 8,
                _ => 2,
            };
            self.bump();
            self.bump();
            let ds = self.pos;
            while let Some(c) = self.peek() {
                if c == '_' || c.is_digit(radix) {
                    self.bump();
                } else {
                    break;
                }
            }
            let digits: String = self.chars[ds..self.pos].iter().filter(|c| **c != '_').collect();
            let v = Int::parse_radix(&digits, radix).ok_or_else(|| self.syntax("invalid integer literal"))?;
            self.push(TokKind::Int(v), line, col);
            return Ok(());
        }
        let mut is_float = false;
        self.digits();
        if self.peek() == Some('.') {
            is_float = true;
            self.bump();
            self.digits();
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = (self.pos, self.line, self.col);
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                self.digits();
            } else {
                (self.pos, self.line, self.col) = save;
            }
        }
        if matches!(self.peek(), Some('j' | 'J')) {
            return Err(ParseError::Unsupported { line, construct: "complex literal".to_string() });
        }
        if self.peek().is_some_and(|c| c == '_' || c.is_alphabetic()) {
            return Err(self.syntax("invalid decimal literal"));
        }
        let text: String = self.chars[start..self.pos].iter().filter(|c| **c != '_').collect();
        if is_float {
            let v: f64 = text.parse().map_err(|_| self.syntax("invalid float literal"))?;
            self.push(TokKind::Float(v), line, col);
        } else {
            if text.len() > 1 && text.starts_with('0') && text.chars().any(|c| c != '0') {
                return Err(self.syntax("leading zeros in decimal integer literals are not permitted"));
            }
            let v = Int::parse_radix(&text, 10).ok_or_else(|| self.syntax("invalid integer literal"))?;
            self.push(TokKind::Int(v), line, col);
        }
        Ok(())
    }

    fn digits(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || (c == '_' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn string(&mut self, prefix: &str, line: u32, col: u32) -> Result<(), ParseError> {
        if prefix.contains('b') {
            return Err(ParseError::Unsupported { line, construct: "bytes literal".to_string() });
        }
        let raw = prefix.contains('r');
        let fmt = prefix.contains('f');
        let q = self.bump().unwrap_or('"');
        let triple = self.peek() == Some(q) && self.peek_at(1) == Some(q);
        if triple {
            self.bump();
            self.bump();
        }
        let mut body = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(ParseError::Syntax { line, message: "unterminated string literal".to_string() });
            };
            if c == '\\' {
                self.bump();
                body.push('\\');
                if let Some(n) = self.bump() {
                    body.push(n);
                }
                continue;
            }
            if c == '\n' && !triple {
                return Err(ParseError::Syntax { line, message: "unterminated string literal".to_string() });
            }
            if c == q {
                if !triple {
                    self.bump();
                    break;
                }
                if self.peek_at(1) == Some(q) && self.peek_at(2) == Some(q) {
                    self.bump();
                    self.bump();
                    self.bump();
                    break;
                }
            }
            self.bump();
            body.push(c);
        }
        if fmt {
            self.push(TokKind::FStr { body, raw }, line, col);
        } else {
            let value = if raw { body } else { decode_escapes(&body).map_err(|m| ParseError::Syntax { line, message: m })? };
            self.push(TokKind::Str(value), line, col);
        }
        Ok(())
    }
}

/// Decodes backslash escapes in a non-raw string body.
pub fn decode_escapes(body: &str) -> Result<String, String> {
    let mut out = String::with_capacity(body.len());
    let mut it = body.chars().peekable();
    while let Some(c) = it.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let Some(e) = it.next() else {
            out.push('\\');
            break;
        };
        match e {
            '\n' => {}
            '\r' => {
                if it.peek() == Some(&'\n') {
                    it.next();
                }
            }
            '\\' => out.push('\\'),
            '\'' => out.push('\''),
            '"' => out.push('"'),
            'a' => out.push('\x07'),
            'b' => out.push('\x08'),
            'f' => out.push('\x0c'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            't' => out.push('\t'),
            'v' => out.push('\x0b'),
            '0'..='7' => {
                let mut v = e.to_digit(8).unwrap_or(0);
                for _ in 0..2 {
                    match it.peek().and_then(|d| d.to_digit(8)) {
                        Some(d) => {
                            v = v * 8 + d;
                            it.next();
                        }
                        None => break,
                    }
                }
                out.push(char::from_u32(v).ok_or("invalid octal escape")?);
            }
            'x' | 'u' | 'U' => {
                let n = match e {
                    'x' => 2,
                    'u' => 4,
                    _ => 8,
                };
                let mut v = 0u32;
                for _ in 0..n {
                    let d = it.next().and_then(|d| d.to_digit(16)).ok_or_else(|| format!("truncated \\{e} escape"))?;
                    v = v * 16 + d;
                }
                out.push(char::from_u32(v).ok_or("invalid unicode escape")?);
            }
            'N' => return Err("\\N{...} escapes are not supported".to_string()),
            other => {
                out.push('\\');
                out.push(other);
            }
        }
    }
    Ok(out)
}
