//! Comment-annotated listings (Scratchpad, NeXT, faulty traces) and the Concise trace.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{input_id, FormatError, TraceDoc, TraceFormat, TruncationRule};
use crate::program::Program;
use crate::tracer::{render_value, EventKind, Outcome, Trace, TraceEvent, Value};

/// How a faulty run ended, for the closing annotation.
#[derive(Clone, Debug)]
pub enum FaultyOutcome {
    Failed,
    Wrong { expected: Value },
}

enum Tail {
    Output { line: u32, json: String },
    Exception { line: u32, text: String },
}

fn require_return(trace: &Trace) -> Result<(), FormatError> {
    match &trace.outcome {
        Outcome::Return(_) => Ok(()),
        Outcome::Failure { kind, .. } => Err(FormatError::UnsupportedTrace(kind.to_string())),
    }
}

fn doc(program: &Program, trace: &Trace, format: TraceFormat, text: String) -> TraceDoc {
    TraceDoc { format, text, program_id: program.id.clone(), input_id: input_id(trace) }
}

fn top(trace: &Trace) -> Vec<&TraceEvent> {
    trace.top_events().collect()
}

fn return_tail(trace: &Trace) -> Option<Tail> {
    let v = trace.outcome.value()?;
    let line = trace.top_events().filter(|e| e.kind == EventKind::Return).last()?.line;
    Some(Tail::Output { line, json: render_value(v) })
}

/// Source lines kept in a listing: everything up to the end of the entry
/// function, with leading blanks dropped and blank runs collapsed.
fn listing_lines(program: &Program) -> Vec<(u32, &str)> {
    let tree = &program.tree;
    let all: Vec<&str> = program.source.lines().collect();
    let mut end = all.len() as u32;
    if let Some(pos) = tree.body.iter().position(|s| tree.function_stmt(&program.entry).is_some_and(|f| f.id == s.id)) {
        if let Some(next) = tree.body.get(pos + 1) {
            end = next.span.line - 1;
        }
    }
    let mut out: Vec<(u32, &str)> = Vec::new();
    for (i, text) in all.iter().enumerate().take(end as usize) {
        let blank = text.trim().is_empty();
        if blank && out.last().map_or(true, |(_, t)| t.trim().is_empty()) {
            continue;
        }
        out.push((i as u32 + 1, text));
    }
    while out.last().is_some_and(|(_, t)| t.trim().is_empty()) {
        out.pop();
    }
    out
}

fn code_part(program: &Program, line: u32, text: &str) -> String {
    match program.tree.comment_col(line) {
        Some(col) => {
            let cut: String = text.chars().take(col as usize).collect();
            cut.trim_end().to_string()
        }
        None => text.to_string(),
    }
}

fn render_listing(program: &Program, trace: &Trace, numbered: bool, rule: Option<TruncationRule>, tail: Option<Tail>) -> String {
    let events = top(trace);
    let def_line = program.tree.function_stmt(&program.entry).map(|s| s.span.line);
    let mut states: BTreeMap<u32, Vec<(usize, String)>> = BTreeMap::new();
    let mut counter = 0usize;
    for e in &events {
        if e.kind == EventKind::Entry || e.changed.is_empty() {
            continue;
        }
        states.entry(e.line).or_default().push((counter, e.changed_json()));
        counter += 1;
    }
    let block = |k: usize, json: &str| {
        if numbered {
            format!("[STATE-{k}] {json} [/STATE-{k}]")
        } else {
            format!("[STATE] {json} [/STATE]")
        }
    };
    let mut out = String::new();
    for (line, text) in listing_lines(program) {
        let mut groups: Vec<String> = Vec::new();
        if Some(line) == def_line {
            groups.push(format!("[INPUT] {} [/INPUT]", trace.input_json()));
        }
        if let Some(list) = states.get(&line) {
            let (keep, gap) = match rule {
                Some(r) => r.retained(list.len()),
                None => ((0..list.len()).collect(), None),
            };
            let mut s = String::new();
            for (i, idx) in keep.iter().enumerate() {
                if gap == Some(i) {
                    s.push_str(" ... ");
                }
                let (k, json) = &list[*idx];
                s.push_str(&block(*k, json));
            }
            groups.push(s);
        }
        match &tail {
            Some(Tail::Output { line: l, json }) if *l == line => groups.push(format!("[OUTPUT] {json} [/OUTPUT]")),
            Some(Tail::Exception { line: l, text }) if *l == line => groups.push(format!("[EXCEPTION] {text} [/EXCEPTION]")),
            _ => {}
        }
        if groups.is_empty() {
            out.push_str(text);
        } else {
            out.push_str(&code_part(program, line, text));
            out.push_str(" # ");
            out.push_str(&groups.join(" "));
        }
        out.push('\n');
    }
    out
}

/// Listing with unnumbered `[STATE]` blocks for every change event.
pub fn to_scratchpad(program: &Program, trace: &Trace) -> Result<TraceDoc, FormatError> {
    require_return(trace)?;
    let text = render_listing(program, trace, false, None, return_tail(trace));
    Ok(doc(program, trace, TraceFormat::Scratchpad, text))
}

/// Listing with globally numbered `[STATE-k]` blocks, truncated per line by `rule`.
pub fn to_next(program: &Program, trace: &Trace, rule: TruncationRule) -> Result<TraceDoc, FormatError> {
    require_return(trace)?;
    let text = render_listing(program, trace, true, Some(rule), return_tail(trace));
    Ok(doc(program, trace, TraceFormat::Next, text))
}

/// NeXT-style listing of any run with a custom rule; `None` keeps every event.
pub fn annotated_listing(program: &Program, trace: &Trace, rule: Option<TruncationRule>) -> String {
    let tail = match &trace.outcome {
        Outcome::Return(_) => return_tail(trace),
        Outcome::Failure { kind, line, message } => Some(Tail::Exception { line: *line, text: exc_text(kind.name(), message) }),
    };
    render_listing(program, trace, true, rule, tail)
}

fn exc_text(kind: &str, message: &str) -> String {
    if message.is_empty() {
        kind.to_string()
    } else {
        format!("{kind}: {message}")
    }
}

/// Faulty-trace listing: a failed run ends at the failing line with the
/// error; a wrong result is followed by a comparison with the expected value.
pub fn faulty_listing(program: &Program, trace: &Trace, rule: TruncationRule, expected: Option<&Value>) -> String {
    let mut text = annotated_listing(program, trace, Some(rule));
    if let (Outcome::Return(v), Some(want)) = (&trace.outcome, expected) {
        text.push_str(&format!("# [EXPECTED] {} [/EXPECTED] but [OUTPUT] {} [/OUTPUT]\n", render_value(want), render_value(v)));
    }
    text
}

/// One `[Ln] … [/Ln]` block per executed statement of the entry frame.
pub fn to_concise(program: &Program, trace: &Trace) -> Result<TraceDoc, FormatError> {
    require_return(trace)?;
    let out_json = trace.outcome.value().map(render_value).unwrap_or_default();
    let mut text = String::from("\"\"\"\n");
    for e in top(trace) {
        let l = e.line;
        let mut parts: Vec<String> = Vec::new();
        match e.kind {
            EventKind::Entry => parts.push(format!("[INPUT] {} [/INPUT]", trace.input_json())),
            _ if !e.changed.is_empty() => parts.push(e.changed_json()),
            _ => {}
        }
        if e.kind == EventKind::Return {
            parts.push(format!("[OUTPUT] {out_json} [/OUTPUT]"));
        }
        if parts.is_empty() {
            text.push_str(&format!("[L{l}] [/L{l}]\n"));
        } else {
            text.push_str(&format!("[L{l}] {} [/L{l}]\n", parts.join(" ")));
        }
    }
    text.push_str("\"\"\"\n");
    Ok(doc(program, trace, TraceFormat::Concise, text))
}
