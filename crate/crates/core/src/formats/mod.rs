//! Trace serializations, monologue narration and task prefixes.

mod annotate;
mod constraints;
mod monologue;
mod prefix;

pub use annotate::{annotated_listing, faulty_listing, to_concise, to_next, to_scratchpad, FaultyOutcome};
pub use constraints::{abstract_constraints, backward_monologue, ConstraintFacts, Fact, Shape};
pub use monologue::{forward_monologue, LOOP_NARRATION_CAP};
pub use prefix::{with_prefix, TaskPrefix};

use alloc::string::String;

use crate::subjectlang::sha256_hex;
use crate::tracer::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TraceFormat {
    Scratchpad,
    Next,
    Concise,
    ForwardMonologue,
    BackwardMonologue,
}

impl TraceFormat {
    pub const ALL: [TraceFormat; 5] = [
        TraceFormat::Scratchpad,
        TraceFormat::Next,
        TraceFormat::Concise,
        TraceFormat::ForwardMonologue,
        TraceFormat::BackwardMonologue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceFormat::Scratchpad => "scratchpad",
            TraceFormat::Next => "next",
            TraceFormat::Concise => "concise",
            TraceFormat::ForwardMonologue => "forward-monologue",
            TraceFormat::BackwardMonologue => "backward-monologue",
        }
    }

    pub fn from_name(s: &str) -> Option<TraceFormat> {
        let s = s.replace('_', "-");
        TraceFormat::ALL.iter().copied().find(|f| f.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceDoc {
    pub format: TraceFormat,
    pub text: String,
    pub program_id: String,
    pub input_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("UnsupportedTrace: the run failed with {0}")]
    UnsupportedTrace(String),
    #[error("WitnessMismatch: {0}")]
    WitnessMismatch(String),
    #[error("UnsupportedConstruct: {0}")]
    UnsupportedConstruct(String),
}

/// Which per-line change events survive: all when a line has at most
/// `threshold`, otherwise the first `keep_first + keep_second` and the last `keep_last`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationRule {
    pub keep_first: usize,
    pub keep_second: usize,
    pub keep_last: usize,
    pub threshold: usize,
}

impl Default for TruncationRule {
    fn default() -> Self {
        TruncationRule { keep_first: 1, keep_second: 1, keep_last: 1, threshold: 3 }
    }
}

impl TruncationRule {
    /// Positions (0-based) kept out of `count` events, and where the ellipsis goes
    /// (it precedes the kept position at that index).
    pub fn retained(&self, count: usize) -> (alloc::vec::Vec<usize>, Option<usize>) {
        if count <= self.threshold {
            return ((0..count).collect(), None);
        }
        let head = (self.keep_first + self.keep_second).min(count);
        let tail = self.keep_last.min(count - head);
        let mut v: alloc::vec::Vec<usize> = (0..head).collect();
        let cut = v.len();
        v.extend(count - tail..count);
        (v, if tail > 0 { Some(cut) } else { None })
    }
}

/// Short id of the input a trace was recorded on.
pub fn input_id(trace: &Trace) -> String {
    let mut h = sha256_hex(trace.input_json().as_bytes());
    h.truncate(16);
    h
}

fn between<'a>(text: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let end = text.rfind(close)?;
    let start = text[..end].rfind(open)? + open.len();
    Some(text[start..end].trim())
}

/// Payload of the `[INPUT]` tag.
pub fn extract_input(text: &str) -> Option<&str> {
    let start = text.find("[INPUT]")? + "[INPUT]".len();
    let end = text[start..].find("[/INPUT]")? + start;
    Some(text[start..end].trim())
}

/// Payload of the last `[OUTPUT]` tag.
pub fn extract_output(text: &str) -> Option<&str> {
    between(text, "[OUTPUT]", "[/OUTPUT]")
}

/// Payload of the last `[ANSWER]` tag.
pub fn extract_answer(text: &str) -> Option<&str> {
    between(text, "[ANSWER]", "[/ANSWER]")
}

/// Payload of the last `[Refined]` tag.
pub fn extract_refined(text: &str) -> Option<&str> {
    between(text, "[Refined]", "[/Refined]")
}
