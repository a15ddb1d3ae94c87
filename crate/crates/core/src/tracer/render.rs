//! Text forms of values: `repr`, `str`, and the JSON-ish trace rendering.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::value::{Func, Value, ViewKind};
use crate::pyrepr::{float_repr, json_string, str_repr};

/// `repr(v)`.
pub fn repr(v: &Value) -> String {
    let mut out = String::new();
    let mut seen = Vec::new();
    repr_into(&mut out, v, &mut seen);
    out
}

/// `str(v)`: identical to `repr` except for strings.
pub fn to_str(v: &Value) -> String {
    match v {
        Value::Str(s) => s.to_string(),
        other => repr(other),
    }
}

fn container_ptr(v: &Value) -> Option<usize> {
    match v {
        Value::List(l) => Some(l.as_ptr() as usize),
        Value::Dict(d) => Some(d.as_ptr() as usize),
        Value::Set(s) => Some(s.as_ptr() as usize),
        _ => None,
    }
}

fn seq_into(out: &mut String, items: &[Value], seen: &mut Vec<usize>) {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        repr_into(out, x, seen);
    }
}

fn repr_into(out: &mut String, v: &Value, seen: &mut Vec<usize>) {
    if let Some(p) = container_ptr(v) {
        if seen.contains(&p) {
            out.push_str(match v {
                Value::List(_) => "[...]",
                _ => "{...}",
            });
            return;
        }
        seen.push(p);
    }
    match v {
        Value::None => out.push_str("None"),
        Value::Bool(true) => out.push_str("True"),
        Value::Bool(false) => out.push_str("False"),
        Value::Int(i) => out.push_str(&i.to_string()),
        Value::Float(f) => out.push_str(&float_repr(*f)),
        Value::Str(s) => out.push_str(&str_repr(s)),
        Value::List(l) => {
            out.push('[');
            seq_into(out, &l.borrow(), seen);
            out.push(']');
        }
        Value::Tuple(t) => {
            out.push('(');
            seq_into(out, t, seen);
            if t.len() == 1 {
                out.push(',');
            }
            out.push(')');
        }
        Value::Dict(d) => {
            out.push('{');
            for (i, (k, x)) in d.borrow().entries().iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                repr_into(out, k, seen);
                out.push_str(": ");
                repr_into(out, x, seen);
            }
            out.push('}');
        }
        Value::Set(s) => {
            let s = s.borrow();
            if s.is_empty() {
                out.push_str("set()");
            } else {
                out.push('{');
                seq_into(out, s.items(), seen);
                out.push('}');
            }
        }
        Value::Range(r) => {
            out.push_str(&alloc::format!("range({}, {}", r.start, r.stop));
            if r.step != 1 {
                out.push_str(&alloc::format!(", {}", r.step));
            }
            out.push(')');
        }
        Value::View(kind, d) => {
            let d = d.borrow();
            let (name, items): (&str, Vec<Value>) = match kind {
                ViewKind::Keys => ("dict_keys", d.keys().cloned().collect()),
                ViewKind::Values => ("dict_values", d.entries().iter().map(|(_, v)| v.clone()).collect()),
                ViewKind::Items => (
                    "dict_items",
                    d.entries().iter().map(|(k, v)| Value::tuple(alloc::vec![k.clone(), v.clone()])).collect(),
                ),
            };
            out.push_str(name);
            out.push_str("([");
            seq_into(out, &items, seen);
            out.push_str("])");
        }
        Value::Iter(it) => {
            out.push_str(&alloc::format!("<{} object>", it.borrow().type_name()));
        }
        Value::Func(f) => match &**f {
            Func::Builtin(n) if super::builtins::is_type_name(n) => out.push_str(&alloc::format!("<class '{n}'>")),
            Func::Builtin(n) => out.push_str(&alloc::format!("<built-in function {n}>")),
            Func::Method { receiver, name } => out.push_str(&alloc::format!(
                "<built-in method {name} of {} object>",
                receiver.type_name()
            )),
            Func::Lambda { .. } => out.push_str("<function <lambda>>"),
            Func::User(n) => out.push_str(&alloc::format!("<function {n}>")),
        },
    }
    if container_ptr(v).is_some() {
        seen.pop();
    }
}

/// True when `v` renders as a native JSON token rather than a quoted literal.
fn is_native(v: &Value, depth: usize) -> bool {
    if depth > 64 {
        return false;
    }
    match v {
        Value::Bool(_) | Value::Int(_) | Value::Str(_) => true,
        Value::Float(f) => f.is_finite(),
        Value::List(l) => l.try_borrow().map(|l| l.iter().all(|x| is_native(x, depth + 1))).unwrap_or(false),
        Value::Dict(d) => d
            .try_borrow()
            .map(|d| d.entries().iter().all(|(k, x)| matches!(k, Value::Str(_)) && is_native(x, depth + 1)))
            .unwrap_or(false),
        _ => false,
    }
}

fn native_into(out: &mut String, v: &Value) {
    match v {
        Value::Bool(true) => out.push_str("true"),
        Value::Bool(false) => out.push_str("false"),
        Value::Int(i) => out.push_str(&i.to_string()),
        Value::Float(f) => out.push_str(&float_repr(*f)),
        Value::Str(s) => out.push_str(&json_string(s)),
        Value::List(l) => {
            out.push('[');
            for (i, x) in l.borrow().iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                native_into(out, x);
            }
            out.push(']');
        }
        Value::Dict(d) => {
            out.push('{');
            for (i, (k, x)) in d.borrow().entries().iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                native_into(out, k);
                out.push_str(": ");
                native_into(out, x);
            }
            out.push('}');
        }
        other => out.push_str(&json_string(&repr(other))),
    }
}

/// Trace rendering: scalars, strings, and lists/str-keyed dicts of those as
/// JSON; anything else as a JSON string holding its literal form.
pub fn render_value(v: &Value) -> String {
    let mut out = String::new();
    if is_native(v, 0) {
        native_into(&mut out, v);
    } else {
        out.push_str(&json_string(&repr(v)));
    }
    out
}

/// JSON object of `name: rendering` pairs, in the given order.
pub fn render_bindings<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut out = String::from("{");
    for (i, (k, v)) in pairs.into_iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&json_string(k));
        out.push_str(": ");
        out.push_str(v);
    }
    out.push('}');
    out
}
