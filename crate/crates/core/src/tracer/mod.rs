//! Deterministic tracing interpreter for the subject language.

mod builtins;
mod error;
mod format;
mod interp;
mod iter;
mod methods;
mod ops;
mod render;
mod trace;
mod value;

pub use builtins::{builtin_name, is_type_name, IMPLEMENTED as IMPLEMENTED_BUILTINS};
pub use error::{ErrorKind, Exc, VResult};
pub use format::{format_value, percent_format, str_format};
pub use interp::Interp;
pub use iter::IterState;
pub use ops::{binop, contains, order, unary};
pub use render::{render_bindings, render_value, repr, to_str};
pub use trace::{
    branch_sites, coverage, diff_state, merged_coverage, Binding, CoverageStats, Covered, EventKind, Outcome, Trace,
    TraceEvent,
};
pub use value::{py_eq, strict_eq, Dict, Func, HashKey, RangeV, Set, Value, ViewKind};

use alloc::string::String;

use crate::subjectlang::SyntaxTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of recorded events.
    pub step_budget: u64,
    /// Maximum number of simultaneously active calls.
    pub recursion_budget: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { step_budget: 100_000, recursion_budget: 200 }
    }
}

/// Calls `entry` with positional `args` and records the execution.
pub fn run(tree: &SyntaxTree, entry: &str, args: &[Value], limits: Limits) -> Trace {
    Interp::new(tree, limits).run(entry, args, &[])
}

/// Like [`run`] with keyword arguments as well.
pub fn run_with_kwargs(tree: &SyntaxTree, entry: &str, args: &[Value], kwargs: &[(String, Value)], limits: Limits) -> Trace {
    Interp::new(tree, limits).run(entry, args, kwargs)
}
