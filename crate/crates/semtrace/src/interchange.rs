//! Shared JSON trace schema, also produced by the reference-runtime adapter.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use semtrace_core::inputs::InputTuple;
use semtrace_core::tracer::{render_value, Binding, Dict, Outcome, Trace, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceInterchange {
    pub program_id: String,
    pub entry: String,
    pub input: Map<String, Json>,
    pub events: Vec<InterchangeEvent>,
    pub outcome: InterchangeOutcome,
    pub stdout: String,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterchangeEvent {
    pub line: u32,
    pub ordinal: u32,
    pub changed: Map<String, Json>,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterchangeOutcome {
    /// `return`, `error`, or `oracle-failure` from the adapter.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

fn rendered(json: &str) -> Json {
    serde_json::from_str(json).unwrap_or_else(|_| Json::String(json.to_string()))
}

fn bindings(bs: &[Binding]) -> Map<String, Json> {
    bs.iter().map(|b| (b.name.to_string(), rendered(&b.json))).collect()
}

pub fn to_interchange(program_id: &str, trace: &Trace) -> TraceInterchange {
    let outcome = match &trace.outcome {
        Outcome::Return(v) => InterchangeOutcome {
            status: "return".into(),
            value: Some(rendered(&render_value(v))),
            error_kind: None,
            line: None,
            message: None,
        },
        Outcome::Failure { kind, line, message } => InterchangeOutcome {
            status: "error".into(),
            value: None,
            error_kind: Some(kind.name().into()),
            line: Some(*line),
            message: Some(message.clone()),
        },
    };
    TraceInterchange {
        program_id: program_id.to_string(),
        entry: trace.entry.clone(),
        input: bindings(&trace.input),
        events: trace
            .events
            .iter()
            .map(|e| InterchangeEvent {
                line: e.line,
                ordinal: e.ordinal,
                changed: bindings(&e.changed),
                kind: e.kind.name().into(),
            })
            .collect(),
        outcome,
        stdout: trace.stdout.clone(),
        steps: trace.step_count,
    }
}

/// Converts plain JSON to a subject value: objects become dicts, arrays lists.
pub fn value_from_json(j: &Json) -> Value {
    match j {
        Json::Null => Value::None,
        Json::Bool(b) => Value::Bool(*b),
        Json::Number(n) => match n.as_i64() {
            Some(i) => Value::int(i),
            None => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Json::String(s) => Value::str(s),
        Json::Array(xs) => Value::list(xs.iter().map(value_from_json).collect()),
        Json::Object(m) => {
            let mut d = Dict::new();
            for (k, v) in m {
                let _ = d.insert(Value::str(k), value_from_json(v));
            }
            Value::dict(d)
        }
    }
}

/// Reads an argument tuple given either as a subject-language literal or as a
/// JSON array of positional arguments.
pub fn parse_input_arg(text: &str) -> Result<InputTuple, String> {
    if let Ok(Json::Array(xs)) = serde_json::from_str::<Json>(text) {
        return Ok(InputTuple::new(xs.iter().map(value_from_json).collect()));
    }
    semtrace_core::inputs::parse_input_literal(text).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DivergenceReport {
    /// Differences in event order, lines, changed names, or outcome status.
    pub structural: Vec<String>,
    /// Differences only in how values were rendered.
    pub rendering: Vec<String>,
    pub stdout_differs: bool,
    /// Set when some rendering difference involves a set literal.
    pub nondeterministic_set_order: bool,
}

impl DivergenceReport {
    pub fn is_empty(&self) -> bool {
        self.structural.is_empty() && self.rendering.is_empty() && !self.stdout_differs
    }
}

fn mentions_set(j: &Json) -> bool {
    match j {
        Json::String(s) => (s.contains('{') && !s.contains(':')) || s.contains("set()"),
        Json::Array(xs) => xs.iter().any(mentions_set),
        Json::Object(m) => m.values().any(mentions_set),
        _ => false,
    }
}

pub fn compare_traces(primary: &TraceInterchange, oracle: &TraceInterchange) -> DivergenceReport {
    let mut r = DivergenceReport::default();
    let note_value = |r: &mut DivergenceReport, what: String, a: &Json, b: &Json| {
        if a != b {
            if mentions_set(a) || mentions_set(b) {
                r.nondeterministic_set_order = true;
            }
            r.rendering.push(format!("{what}: {a} vs {b}"));
        }
    };
    let (po, oo) = (&primary.outcome, &oracle.outcome);
    if po.status != oo.status || po.error_kind != oo.error_kind {
        r.structural.push(format!(
            "outcome: {} {:?} vs {} {:?}",
            po.status, po.error_kind, oo.status, oo.error_kind
        ));
    } else if let (Some(a), Some(b)) = (&po.value, &oo.value) {
        note_value(&mut r, "return value".into(), a, b);
    }
    let n = primary.events.len().max(oracle.events.len());
    for i in 0..n {
        match (primary.events.get(i), oracle.events.get(i)) {
            (Some(a), Some(b)) => {
                let an: std::collections::BTreeSet<&String> = a.changed.keys().collect();
                let bn: std::collections::BTreeSet<&String> = b.changed.keys().collect();
                if a.line != b.line || an != bn {
                    r.structural.push(format!(
                        "event {i}: line {} {:?} vs line {} {:?}",
                        a.line, an, b.line, bn
                    ));
                    break;
                }
                for (k, v) in &a.changed {
                    note_value(&mut r, format!("event {i} L{} {k}", a.line), v, &b.changed[k]);
                }
            }
            (Some(a), None) => {
                r.structural.push(format!("event {i}: line {} missing from oracle", a.line));
                break;
            }
            (None, Some(b)) => {
                r.structural.push(format!("event {i}: line {} missing from primary", b.line));
                break;
            }
            (None, None) => unreachable!(),
        }
    }
    r.stdout_differs = primary.stdout != oracle.stdout;
    r
}
