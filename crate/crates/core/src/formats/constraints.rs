//! Abstract input constraints and the backward narration built on them.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{input_id, FormatError, TraceDoc, TraceFormat};
use crate::inputs::{mutate, InputTuple, MutationPolicy};
use crate::program::Program;
use crate::subjectlang::walk::visit_stmts;
use crate::subjectlang::{ExprKind, StmtKind};
use crate::tracer::{repr, strict_eq, Limits, Outcome, Value};

/// Top-level type of a value plus the element types it contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub top: &'static str,
    pub elems: BTreeSet<&'static str>,
    /// Value types, for dicts.
    pub values: BTreeSet<&'static str>,
}

impl Shape {
    pub fn of(v: &Value) -> Shape {
        let mut elems = BTreeSet::new();
        let mut values = BTreeSet::new();
        match v {
            Value::List(l) => l.borrow().iter().for_each(|x| {
                elems.insert(x.type_name());
            }),
            Value::Tuple(t) => t.iter().for_each(|x| {
                elems.insert(x.type_name());
            }),
            Value::Set(s) => s.borrow().items().iter().for_each(|x| {
                elems.insert(x.type_name());
            }),
            Value::Dict(d) => d.borrow().entries().iter().for_each(|(k, x)| {
                elems.insert(k.type_name());
                values.insert(x.type_name());
            }),
            _ => {}
        }
        Shape { top: v.type_name(), elems, values }
    }

    /// Same top-level type, and no element type the witness lacked.
    pub fn admits(&self, v: &Value) -> bool {
        let s = Shape::of(v);
        s.top == self.top && s.elems.is_subset(&self.elems) && s.values.is_subset(&self.values)
    }

    pub fn describe(&self) -> String {
        let noun = |t: &str| -> &'static str {
            match t {
                "int" => "integers",
                "float" => "floats",
                "str" => "strings",
                "bool" => "booleans",
                "list" => "lists",
                "tuple" => "tuples",
                "dict" => "dicts",
                "set" => "sets",
                "NoneType" => "None values",
                _ => "values",
            }
        };
        let group = |set: &BTreeSet<&'static str>| {
            let parts: Vec<String> = set.iter().map(|t| noun(t).to_string()).collect();
            parts.join(" or ")
        };
        let article = match self.top {
            "int" => "an integer",
            "float" => "a float",
            "str" => "a string",
            "bool" => "a boolean",
            "NoneType" => "None",
            "list" => "a list",
            "tuple" => "a tuple",
            "set" => "a set",
            "dict" => "a dict",
            other => return format!("a value of type {other}"),
        };
        if self.top == "dict" && !self.elems.is_empty() {
            format!("a dict mapping {} to {}", group(&self.elems), group(&self.values))
        } else if self.elems.is_empty() {
            article.to_string()
        } else {
            format!("{article} of {}", group(&self.elems))
        }
    }
}

#[derive(Clone, Debug)]
pub enum Fact {
    Arity(usize),
    Tag { arg: usize, name: String, shape: Shape },
    Equals { arg: usize, name: String, value: Value },
    Length { arg: usize, name: String, len: usize },
    /// Element counts by literal form, in first-appearance order.
    Multiset { arg: usize, name: String, counts: Vec<(String, usize)>, numeric: bool },
    Distinct { arg: usize, name: String, count: usize },
}

fn elements(v: &Value) -> Option<Vec<Value>> {
    match v {
        Value::List(l) => Some(l.borrow().clone()),
        Value::Tuple(t) => Some(t.to_vec()),
        Value::Set(s) => Some(s.borrow().items().to_vec()),
        Value::Str(s) => Some(s.chars().map(|c| Value::str(c.encode_utf8(&mut [0u8; 4]))).collect()),
        Value::Dict(d) => Some(d.borrow().keys().cloned().collect()),
        _ => None,
    }
}

fn counts(v: &Value) -> Option<Vec<(String, usize)>> {
    let mut out: Vec<(String, usize)> = Vec::new();
    for e in elements(v)? {
        let r = repr(&e);
        match out.iter_mut().find(|(k, _)| *k == r) {
            Some((_, n)) => *n += 1,
            None => out.push((r, 1)),
        }
    }
    Some(out)
}

fn same_counts(a: &[(String, usize)], b: &[(String, usize)]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

fn number_word(n: usize) -> String {
    const WORDS: [&str; 13] =
        ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve"];
    WORDS.get(n).map(|w| w.to_string()).unwrap_or_else(|| n.to_string())
}

impl Fact {
    pub fn holds(&self, input: &InputTuple) -> bool {
        let arg = |i: &usize| input.positional.get(*i);
        match self {
            Fact::Arity(n) => input.len() == *n,
            Fact::Tag { arg: i, shape, .. } => arg(i).is_some_and(|v| shape.admits(v)),
            Fact::Equals { arg: i, value, .. } => arg(i).is_some_and(|v| strict_eq(v, value)),
            Fact::Length { arg: i, len, .. } => arg(i).and_then(elements).is_some_and(|e| e.len() == *len),
            Fact::Multiset { arg: i, counts: want, .. } => {
                arg(i).and_then(counts).is_some_and(|c| same_counts(&c, want))
            }
            Fact::Distinct { arg: i, count, .. } => arg(i).and_then(counts).is_some_and(|c| c.len() == *count),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Fact::Arity(1) => "the call takes one argument".into(),
            Fact::Arity(n) => format!("the call takes {} arguments", number_word(*n)),
            Fact::Tag { name, shape, .. } => format!("{name} is {}", shape.describe()),
            Fact::Equals { name, value, .. } => format!("{name} equals {}", repr(value)),
            Fact::Length { name, len, .. } => format!("{name} has {} elements", number_word(*len)),
            Fact::Multiset { name, counts, numeric, .. } => {
                let parts: Vec<String> = counts
                    .iter()
                    .map(|(r, n)| match (n, numeric) {
                        (1, _) => format!("one {r}"),
                        (_, true) => format!("{} {r}s", number_word(*n)),
                        (_, false) => format!("{} copies of {r}", number_word(*n)),
                    })
                    .collect();
                let body = match parts.len() {
                    0 => return format!("{name} is empty"),
                    1 => parts[0].clone(),
                    n => format!("{}, and {}", parts[..n - 1].join(", "), parts[n - 1]),
                };
                format!("{name} contains {body}, in some order")
            }
            Fact::Distinct { name, count, .. } => format!("{name} holds {} distinct values", number_word(*count)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintFacts {
    pub arity: usize,
    pub facts: Vec<Fact>,
    /// Probing with mutated inputs never changed the output.
    pub output_independent: bool,
}

impl ConstraintFacts {
    pub fn holds(&self, input: &InputTuple) -> bool {
        self.facts.iter().all(|f| f.holds(input))
    }
}

const ORDER_DESTROYING: &[&str] = &["sorted", "set", "sum", "min", "max", "len", "any", "all", "dict"];

fn order_destroying(program: &Program) -> bool {
    let Some(f) = program.tree.function(&program.entry) else { return false };
    let mut hit = false;
    visit_stmts(
        &f.body,
        &mut |_| {},
        &mut |e| match &e.kind {
            ExprKind::Call { func, .. } if ORDER_DESTROYING.contains(&func.as_str()) => hit = true,
            ExprKind::MethodCall { method, .. } if method == "sort" => hit = true,
            ExprKind::SetComp { .. } | ExprKind::DictComp { .. } => hit = true,
            _ => {}
        },
    );
    hit
}

/// Index of the parameter the function returns unchanged, if that is all it does.
fn identity_param(program: &Program) -> Option<usize> {
    let f = program.tree.function(&program.entry)?;
    let mut names = f.body.iter().map(|s| match &s.kind {
        StmtKind::Return(Some(e)) => match &e.kind {
            ExprKind::Name(n) => Some(n.clone()),
            _ => None,
        },
        _ => None,
    });
    let first = names.next()??;
    if names.all(|n| n.as_deref() == Some(first.as_str())) {
        f.params.iter().position(|p| p.name == first)
    } else {
        None
    }
}

fn output_of(program: &Program, input: &InputTuple) -> Option<Value> {
    match program.run(input, Limits::default()).outcome {
        Outcome::Return(v) => Some(v),
        Outcome::Failure { .. } => None,
    }
}

fn param_names(program: &Program, n: usize) -> Vec<String> {
    let declared: Vec<String> = program
        .tree
        .function(&program.entry)
        .map(|f| f.params.iter().map(|p| p.name.clone()).collect())
        .unwrap_or_default();
    (0..n).map(|i| declared.get(i).cloned().unwrap_or_else(|| format!("argument {}", i + 1))).collect()
}

/// Facts that hold for `witness` and describe inputs producing `output`.
pub fn abstract_constraints(program: &Program, output: &Value, witness: &InputTuple) -> Result<ConstraintFacts, FormatError> {
    match output_of(program, witness) {
        Some(v) if strict_eq(&v, output) => {}
        Some(v) => return Err(FormatError::WitnessMismatch(format!("witness returns {}, not {}", repr(&v), repr(output)))),
        None => return Err(FormatError::WitnessMismatch("witness does not return".into())),
    }
    let arity = witness.len();
    let names = param_names(program, arity);
    let mut facts = alloc::vec![Fact::Arity(arity)];
    for (i, v) in witness.positional.iter().enumerate() {
        facts.push(Fact::Tag { arg: i, name: names[i].clone(), shape: Shape::of(v) });
    }

    let policy = MutationPolicy::with_seed(0);
    let mut returned = 0;
    let mut differs = false;
    for round in 0..12 {
        let m = mutate(witness, &policy, &program.id, round);
        if let Some(v) = output_of(program, &m) {
            returned += 1;
            differs |= !strict_eq(&v, output);
        }
    }
    let output_independent = returned >= 3 && !differs;
    if output_independent {
        return Ok(ConstraintFacts { arity, facts, output_independent });
    }

    if let Some(i) = identity_param(program) {
        facts.push(Fact::Equals { arg: i, name: names[i].clone(), value: output.deep_copy() });
        return Ok(ConstraintFacts { arity, facts, output_independent });
    }

    let destroying = order_destroying(program);
    for (i, v) in witness.positional.iter().enumerate() {
        let Some(c) = counts(v) else { continue };
        let len = elements(v).map(|e| e.len()).unwrap_or(0);
        let name = names[i].clone();
        if destroying && !matches!(v, Value::Dict(_)) {
            let numeric = elements(v).unwrap_or_default().iter().all(|e| e.is_numeric());
            let distinct = c.len();
            facts.push(Fact::Multiset { arg: i, name: name.clone(), counts: c, numeric });
            facts.push(Fact::Length { arg: i, name: name.clone(), len });
            facts.push(Fact::Distinct { arg: i, name, count: distinct });
        } else {
            facts.push(Fact::Length { arg: i, name, len });
        }
    }
    Ok(ConstraintFacts { arity, facts, output_independent })
}

/// Constraint-first narration ending in the completed call inside `[ANSWER]` tags.
pub fn backward_monologue(
    program: &Program,
    output: &Value,
    facts: &ConstraintFacts,
    witness: &InputTuple,
) -> Result<TraceDoc, FormatError> {
    let trace = program.run(witness, Limits::default());
    match &trace.outcome {
        Outcome::Return(v) if strict_eq(v, output) => {}
        _ => return Err(FormatError::WitnessMismatch("witness does not reproduce the output".into())),
    }
    if let Some(f) = facts.facts.iter().find(|f| !f.holds(witness)) {
        return Err(FormatError::WitnessMismatch(format!("witness violates: {}", f.describe())));
    }
    let out = repr(output);
    let call = format!("{}({})", program.entry, witness.call_args());
    let mut lines = alloc::vec![
        format!("We need an input for which `{}` returns {out}.", program.entry),
        "The input has to satisfy these constraints:".to_string(),
    ];
    for f in &facts.facts {
        lines.push(format!("- {}", f.describe()));
    }
    if facts.output_independent {
        lines.push("The output does not depend on the particular argument values, so any input of these types works.".into());
    }
    let names = param_names(program, witness.len());
    let binds: Vec<String> = names.iter().zip(&witness.positional).map(|(n, v)| format!("{n} = {}", repr(v))).collect();
    if binds.is_empty() {
        lines.push(format!("With no arguments, executing `{call}` returns {out}."));
    } else {
        lines.push(format!(
            "One input satisfying all of them is {}; executing `{call}` returns {out}.",
            binds.join(", ")
        ));
    }
    lines.push(format!("[ANSWER]\n{call}\n[/ANSWER]"));
    let mut text = lines.join("\n");
    text.push('\n');
    Ok(TraceDoc { format: TraceFormat::BackwardMonologue, text, program_id: program.id.clone(), input_id: input_id(&trace) })
}
