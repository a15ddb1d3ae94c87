//! Recorded executions and coverage accounting.

use alloc::collections::BTreeSet;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;

use super::error::ErrorKind;
use super::value::Value;
use crate::subjectlang::{list_executable_lines_for, StmtId, StmtKind, SyntaxTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Entry,
    Statement,
    Return,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Entry => "entry",
            EventKind::Statement => "statement",
            EventKind::Return => "return",
        }
    }

    pub fn from_name(s: &str) -> Option<EventKind> {
        match s {
            "entry" => Some(EventKind::Entry),
            "statement" => Some(EventKind::Statement),
            "return" => Some(EventKind::Return),
            _ => None,
        }
    }
}

/// One variable binding as recorded in an event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: Rc<str>,
    /// Trace rendering (see [`render_value`](super::render_value)).
    pub json: String,
    /// Literal form.
    pub repr: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub line: u32,
    /// How many times `line` has produced an event so far, this one included.
    pub ordinal: u32,
    pub changed: Vec<Binding>,
    pub kind: EventKind,
    /// Statement that produced the event; `None` for entry events.
    pub stmt: Option<StmtId>,
    /// Outcome of the branch site, for `if`/`for`/`while` events.
    pub branch: Option<bool>,
    /// Call depth, 0 for the entry function.
    pub depth: u32,
    /// Sequence number of the frame the event belongs to.
    pub frame: u32,
    pub func: Rc<str>,
}

impl TraceEvent {
    pub fn changed_json(&self) -> String {
        super::render::render_bindings(self.changed.iter().map(|b| (&*b.name, b.json.as_str())))
    }

    pub fn changed_names(&self) -> Vec<&str> {
        self.changed.iter().map(|b| &*b.name).collect()
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Return(Value),
    Failure { kind: ErrorKind, line: u32, message: String },
}

impl Outcome {
    pub fn is_return(&self) -> bool {
        matches!(self, Outcome::Return(_))
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Outcome::Return(v) => Some(v),
            _ => None,
        }
    }

    pub fn error_kind(&self) -> Option<ErrorKind> {
        match self {
            Outcome::Failure { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageStats {
    pub lines_executed: usize,
    pub lines_total: usize,
    pub branches_taken: usize,
    pub branches_total: usize,
    pub line_rate: f64,
    pub branch_rate: f64,
}

fn rate(hit: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

/// Lines and branch outcomes observed by one or more runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Covered {
    pub lines: BTreeSet<u32>,
    pub branches: BTreeSet<(StmtId, bool)>,
}

impl Covered {
    pub fn merge(&mut self, other: &Covered) {
        self.lines.extend(other.lines.iter().copied());
        self.branches.extend(other.branches.iter().copied());
    }

    /// Measures against the executable lines and branch sites of `tree`.
    pub fn stats(&self, tree: &SyntaxTree, entry: Option<&str>) -> CoverageStats {
        let entry = entry
            .map(String::from)
            .or_else(|| tree.sole_function().or_else(|| tree.functions().next()).map(|f| f.name.clone()));
        let lines = list_executable_lines_for(tree, entry.as_deref());
        let sites = branch_sites(tree, entry.as_deref());
        let lines_executed = lines.iter().filter(|l| self.lines.contains(l)).count();
        let branches_taken = sites
            .iter()
            .map(|id| self.branches.contains(&(*id, true)) as usize + self.branches.contains(&(*id, false)) as usize)
            .sum();
        let branches_total = sites.len() * 2;
        CoverageStats {
            lines_executed,
            lines_total: lines.len(),
            branches_taken,
            branches_total,
            line_rate: rate(lines_executed, lines.len()),
            branch_rate: rate(branches_taken, branches_total),
        }
    }
}

/// Ids of the `if`/`for`/`while` statements of the entry function.
pub fn branch_sites(tree: &SyntaxTree, entry: Option<&str>) -> Vec<StmtId> {
    let Some(stmt) = entry.and_then(|e| tree.function_stmt(e)) else { return Vec::new() };
    stmt.flatten()
        .into_iter()
        .filter(|s| matches!(s.kind, StmtKind::If { .. } | StmtKind::For { .. } | StmtKind::While { .. }))
        .map(|s| s.id)
        .collect()
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub entry: String,
    pub events: Vec<TraceEvent>,
    /// Argument renderings at call time, in parameter order.
    pub input: Vec<Binding>,
    pub outcome: Outcome,
    pub stdout: String,
    pub covered: Covered,
    pub step_count: u64,
}

impl Trace {
    pub fn input_json(&self) -> String {
        super::render::render_bindings(self.input.iter().map(|b| (&*b.name, b.json.as_str())))
    }

    pub fn coverage(&self, tree: &SyntaxTree) -> CoverageStats {
        self.covered.stats(tree, Some(&self.entry))
    }

    /// Events of the entry frame only.
    pub fn top_events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.depth == 0)
    }
}

/// Bindings of `after` that are new or whose literal form differs from `before`.
pub fn diff_state(before: &[Binding], after: &[Binding]) -> Vec<Binding> {
    after
        .iter()
        .filter(|b| !before.iter().any(|p| p.name == b.name && p.repr == b.repr))
        .cloned()
        .collect()
}

/// `coverage(trace, tree)`.
pub fn coverage(trace: &Trace, tree: &SyntaxTree) -> CoverageStats {
    trace.coverage(tree)
}

/// Coverage of several runs of the same program taken together.
pub fn merged_coverage<'a>(traces: impl IntoIterator<Item = &'a Trace>, tree: &SyntaxTree, entry: Option<&str>) -> CoverageStats {
    let mut all = Covered::default();
    for t in traces {
        all.merge(&t.covered);
    }
    all.stats(tree, entry)
}
