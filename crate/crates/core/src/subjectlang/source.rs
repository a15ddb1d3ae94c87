use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use sha2::{Digest, Sha256};

/// Program text plus its content hash and line index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceUnit {
    pub text: String,
    /// Lower-case hex SHA-256 of `text`.
    pub id: String,
    /// Byte range of each line, newline included; ranges tile `text`.
    pub lines: Vec<Range<usize>>,
}

impl SourceUnit {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let id = sha256_hex(text.as_bytes());
        let lines = line_ranges(&text);
        SourceUnit { text, id, lines }
    }

    pub fn line_count(&self) -> u32 {
        self.lines.len() as u32
    }

    /// Line `n` (1-based) without its terminator.
    pub fn line(&self, n: u32) -> Option<&str> {
        let r = self.lines.get((n as usize).checked_sub(1)?)?.clone();
        let s = &self.text[r];
        let s = s.strip_suffix('\n').unwrap_or(s);
        Some(s.strip_suffix('\r').unwrap_or(s))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        out.push(char::from_digit((b >> 4) as u32, 16).unwrap_or('0'));
        out.push(char::from_digit((b & 15) as u32, 16).unwrap_or('0'));
    }
    out
}

fn line_ranges(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, b) in text.bytes().enumerate() {
        if b == b'\n' {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < text.len() {
        out.push(start..text.len());
    }
    out
}

pub fn count_lines(text: &str) -> u32 {
    line_ranges(text).len() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition() {
        let u = SourceUnit::new("a\n\nbc");
        assert_eq!(u.line_count(), 3);
        assert_eq!(u.line(2), Some(""));
        assert_eq!(u.line(3), Some("bc"));
        assert_eq!(u.line(4), None);
        let joined: String = u.lines.iter().map(|r| &u.text[r.clone()]).collect();
        assert_eq!(joined, u.text);
        assert_eq!(SourceUnit::new("").line_count(), 0);
        assert_eq!(u.id.len(), 64);
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
