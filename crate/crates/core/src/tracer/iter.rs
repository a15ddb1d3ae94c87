//! Lazy iterator states. Advancing them lives in the interpreter because
//! `map`, `filter` and generator expressions call back into evaluation.

use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cell::RefCell;

use super::value::{Value, ViewKind};
use crate::num::Int;
use crate::subjectlang::Expr;

#[derive(Debug)]
pub enum IterState {
    /// Live view of a list: appends during iteration are observed.
    List { list: Rc<RefCell<Vec<Value>>>, idx: usize },
    /// Fixed sequence of items (tuples, strings, dict/set snapshots).
    Items { items: Rc<[Value]>, idx: usize },
    Range { next: i64, left: usize, step: i64 },
    Enumerate { inner: Value, count: Int },
    Zip { inners: Vec<Value> },
    Map { func: Value, inners: Vec<Value> },
    Filter { func: Value, inner: Value },
    Gen(GenState),
    /// Produced by `reversed()`.
    Reversed { items: Rc<[Value]>, idx: usize },
    Done,
}

#[derive(Debug)]
pub struct GenState {
    /// The `GenExp`/comprehension node.
    pub node: Rc<Expr>,
    pub captured: Rc<Vec<(Rc<str>, Value)>>,
    /// Comprehension-variable bindings.
    pub scope: Vec<(Rc<str>, Value)>,
    /// One active iterator per entered generator clause.
    pub stack: Vec<Value>,
}

impl IterState {
    pub fn type_name(&self) -> &'static str {
        match self {
            IterState::List { .. } => "list_iterator",
            IterState::Items { .. } => "iterator",
            IterState::Range { .. } => "range_iterator",
            IterState::Enumerate { .. } => "enumerate",
            IterState::Zip { .. } => "zip",
            IterState::Map { .. } => "map",
            IterState::Filter { .. } => "filter",
            IterState::Gen(_) => "generator",
            IterState::Reversed { .. } => "list_reverseiterator",
            IterState::Done => "iterator",
        }
    }
}

pub fn view_items(kind: ViewKind, d: &super::value::Dict) -> Vec<Value> {
    match kind {
        ViewKind::Keys => d.keys().cloned().collect(),
        ViewKind::Values => d.entries().iter().map(|(_, v)| v.clone()).collect(),
        ViewKind::Items => d.entries().iter().map(|(k, v)| Value::tuple(alloc::vec![k.clone(), v.clone()])).collect(),
    }
}
