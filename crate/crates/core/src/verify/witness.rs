//! Deterministic search for an input producing a given output.

use alloc::vec::Vec;

use rand::Rng;

use crate::inputs::{mutate, stream, InputTuple, MutationPolicy};
use crate::program::Program;
use crate::tracer::{strict_eq, Limits, Outcome, Value};

/// Rough distance between two values, 0 only for equal ones. Guides the search.
pub fn value_distance(a: &Value, b: &Value) -> f64 {
    if strict_eq(a, b) {
        return 0.0;
    }
    if let (Some(x), Some(y)) = (a.as_f64(), b.as_f64()) {
        let d = libm::fabs(x - y);
        return if d.is_finite() { d.max(1e-9) } else { 1e12 };
    }
    if let (Value::Str(x), Value::Str(y)) = (a, b) {
        let (x, y): (Vec<char>, Vec<char>) = (x.chars().collect(), y.chars().collect());
        let mut d = (x.len() as f64 - y.len() as f64).abs();
        d += x.iter().zip(&y).filter(|(p, q)| p != q).count() as f64;
        return d.max(1e-9);
    }
    let seq = |v: &Value| -> Option<Vec<Value>> {
        match v {
            Value::List(l) => Some(l.borrow().clone()),
            Value::Tuple(t) => Some(t.to_vec()),
            _ => None,
        }
    };
    match (seq(a), seq(b)) {
        (Some(x), Some(y)) if a.type_name() == b.type_name() => {
            let mut d = (x.len() as f64 - y.len() as f64).abs();
            for (p, q) in x.iter().zip(&y) {
                d += value_distance(p, q).min(1.0);
            }
            d.max(1e-9)
        }
        _ if a.type_name() == b.type_name() => 1.0,
        _ => 1e12,
    }
}

/// Step budget for search runs. Found witnesses are re-verified by callers.
const SEARCH_STEPS: u64 = 5_000;

fn output(program: &Program, input: &InputTuple) -> Option<Value> {
    let limits = Limits { step_budget: SEARCH_STEPS, ..Limits::default() };
    match program.run(input, limits).outcome {
        Outcome::Return(v) => Some(v),
        Outcome::Failure { .. } => None,
    }
}

/// Tries corpus members first, then up to `budget` mutations, each derived
/// from one of the inputs whose output was closest to `expected` so far.
pub fn find_witness_input(
    program: &Program,
    expected: &Value,
    corpus: &[InputTuple],
    policy: &MutationPolicy,
    budget: usize,
) -> Option<InputTuple> {
    let mut pool: Vec<(f64, InputTuple)> = Vec::new();
    for input in corpus {
        if let Some(v) = output(program, input) {
            if strict_eq(&v, expected) {
                return Some(input.clone());
            }
            pool.push((value_distance(&v, expected), input.clone()));
        }
    }
    if pool.is_empty() {
        return None;
    }
    let mut seen: alloc::collections::BTreeSet<alloc::string::String> =
        pool.iter().map(|(_, i)| i.canonical_text.clone()).collect();
    let mut pick = stream(policy.master_seed, &program.id, u64::MAX / 2);
    for attempt in 0..budget {
        pool.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
        let top = pool.len().min(4);
        let base = pool[pick.gen_range(0..top)].1.clone();
        let cand = mutate(&base, policy, &program.id, (1 << 40) + attempt as u64);
        if !seen.insert(cand.canonical_text.clone()) {
            continue;
        }
        if let Some(v) = output(program, &cand) {
            if strict_eq(&v, expected) {
                return Some(cand);
            }
            pool.push((value_distance(&v, expected), cand));
        }
    }
    None
}
