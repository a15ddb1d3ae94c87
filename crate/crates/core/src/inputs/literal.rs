//! Literal argument lists.

use alloc::string::String;
use alloc::vec::Vec;

use crate::subjectlang::{parse_expression, Expr, ExprKind, Literal, UnaryOpKind};
use crate::tracer::{repr, Dict, Set, Value};

/// Positional arguments of one call.
#[derive(Clone, Debug)]
pub struct InputTuple {
    pub positional: Vec<Value>,
    /// Tuple literal of the arguments; the dedup key.
    pub canonical_text: String,
}

impl InputTuple {
    pub fn new(positional: Vec<Value>) -> Self {
        let canonical_text = canonical_text(&positional);
        InputTuple { positional, canonical_text }
    }

    pub fn len(&self) -> usize {
        self.positional.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positional.is_empty()
    }

    /// Independent copy of the argument values.
    pub fn deep_copy(&self) -> InputTuple {
        InputTuple {
            positional: self.positional.iter().map(Value::deep_copy).collect(),
            canonical_text: self.canonical_text.clone(),
        }
    }

    /// Argument list as written at a call site, without the parentheses.
    pub fn call_args(&self) -> String {
        let parts: Vec<String> = self.positional.iter().map(repr).collect();
        parts.join(", ")
    }
}

impl PartialEq for InputTuple {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_text == other.canonical_text
    }
}

pub fn canonical_text(values: &[Value]) -> String {
    let mut out = String::from("(");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&repr(v));
    }
    if values.len() == 1 {
        out.push(',');
    }
    out.push(')');
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("LiteralParseError at position {position}: {message}")]
pub struct LiteralParseError {
    /// Character offset into the text.
    pub position: usize,
    pub message: String,
}

const CALLEE: &str = "__args__";

/// Parses the argument list of a call: `(1, "a")`, `([1, 2])` or a bare `1, "a"`.
/// Only literals and displays of literals are accepted.
pub fn parse_input_literal(text: &str) -> Result<InputTuple, LiteralParseError> {
    let trimmed = text.trim();
    let lead = text.chars().count() - text.trim_start().chars().count();
    let mut attempts: Vec<(String, usize)> = Vec::new();
    if trimmed.starts_with('(') {
        attempts.push((alloc::format!("{CALLEE}{trimmed}"), CALLEE.len()));
    }
    attempts.push((alloc::format!("{CALLEE}({trimmed})"), CALLEE.len() + 1));
    let mut first_err = None;
    for (src, shift) in attempts {
        let offset = |line: u32, col: u32| {
            let before: usize = src.split('\n').take(line.saturating_sub(1) as usize).map(|l| l.chars().count() + 1).sum();
            (before + col as usize).saturating_sub(shift) + lead
        };
        match parse_expression(&src, 0) {
            Ok(Expr { kind: ExprKind::Call { func, args, kwargs }, .. }) if func == CALLEE => {
                if let Some((name, e)) = kwargs.first() {
                    return Err(LiteralParseError {
                        position: offset(e.span.line, e.span.col),
                        message: alloc::format!("keyword argument '{name}' is not supported"),
                    });
                }
                let mut values = Vec::with_capacity(args.len());
                for a in &args {
                    values.push(literal_value(a).map_err(|(span, message)| LiteralParseError {
                        position: offset(span.0, span.1),
                        message,
                    })?);
                }
                return Ok(InputTuple::new(values));
            }
            Ok(_) => {
                first_err.get_or_insert(LiteralParseError { position: lead, message: "not an argument list".into() });
            }
            Err(e) => {
                first_err.get_or_insert(LiteralParseError {
                    position: offset(e.line(), 0),
                    message: alloc::format!("{e}"),
                });
            }
        }
    }
    Err(first_err.unwrap_or(LiteralParseError { position: 0, message: "empty".into() }))
}

type LitErr = ((u32, u32), String);

fn bad(e: &Expr, what: &str) -> LitErr {
    ((e.span.line, e.span.col), alloc::format!("{what} is not a literal"))
}

/// Value of a literal expression tree.
pub fn literal_value(e: &Expr) -> Result<Value, LitErr> {
    Ok(match &e.kind {
        ExprKind::Literal(l) => match l {
            Literal::None => Value::None,
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Int(i) => Value::Int(i.clone()),
            Literal::Float(f) => Value::Float(*f),
            Literal::Str(s) => Value::str(s),
        },
        ExprKind::UnaryOp { op: op @ (UnaryOpKind::Neg | UnaryOpKind::Pos), operand } => match literal_value(operand)? {
            Value::Int(i) if *op == UnaryOpKind::Neg => Value::Int(i.neg()),
            Value::Float(f) if *op == UnaryOpKind::Neg => Value::Float(-f),
            v @ (Value::Int(_) | Value::Float(_)) => v,
            _ => return Err(bad(e, "signed non-number")),
        },
        ExprKind::List(items) => Value::list(items.iter().map(literal_value).collect::<Result<_, _>>()?),
        ExprKind::Tuple(items) => Value::tuple(items.iter().map(literal_value).collect::<Result<_, _>>()?),
        ExprKind::Set(items) => {
            let vals: Vec<Value> = items.iter().map(literal_value).collect::<Result<_, _>>()?;
            Value::set(Set::from_values(vals).map_err(|x| ((e.span.line, e.span.col), x.message))?)
        }
        ExprKind::Dict(pairs) => {
            let mut d = Dict::new();
            for (k, v) in pairs {
                let kv = literal_value(k)?;
                let vv = literal_value(v)?;
                d.insert(kv, vv).map_err(|x| ((k.span.line, k.span.col), x.message))?;
            }
            Value::dict(d)
        }
        ExprKind::Call { func, args, kwargs } if func == "set" && args.is_empty() && kwargs.is_empty() => Value::set(Set::new()),
        ExprKind::Name(n) => return Err(bad(e, &alloc::format!("name '{n}'"))),
        ExprKind::Call { func, .. } => return Err(bad(e, &alloc::format!("call of '{func}'"))),
        other => return Err(bad(e, other_name(other))),
    })
}

fn other_name(k: &ExprKind) -> &'static str {
    match k {
        ExprKind::FString(_) => "f-string",
        ExprKind::BinOp { .. } => "operator expression",
        ExprKind::Lambda { .. } => "lambda",
        ExprKind::MethodCall { .. } => "method call",
        _ => "expression",
    }
}

/// Parses a single literal value such as `[3, 1, 0]`.
pub fn parse_value_literal(text: &str) -> Result<Value, LiteralParseError> {
    let lead = text.chars().count() - text.trim_start().chars().count();
    let e = parse_expression(text.trim(), 0)
        .map_err(|e| LiteralParseError { position: lead, message: alloc::format!("{e}") })?;
    literal_value(&e).map_err(|((line, col), message)| {
        let before: usize = text.trim().split('\n').take(line.saturating_sub(1) as usize).map(|l| l.chars().count() + 1).sum();
        LiteralParseError { position: lead + before + col as usize, message }
    })
}
