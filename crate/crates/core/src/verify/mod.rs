//! Execution-grounded checks: predicted outputs and inputs, differential
//! testing, and witness search.

mod witness;

pub use witness::{find_witness_input, value_distance};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::formats::extract_answer;
use crate::inputs::{literal_value, parse_input_literal, parse_value_literal, InputTuple};
use crate::program::Program;
use crate::subjectlang::{parse_expression, CmpOp, ExprKind};
use crate::tracer::{render_value, strict_eq, ErrorKind, Limits, Outcome, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Actual {
    Value(String),
    Error(ErrorKind),
    /// The prediction could not be parsed.
    Unparsable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject { expected: String, actual: Actual },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// The literal inside `[ANSWER]` tags if present, else the whole text.
fn payload(text: &str) -> &str {
    extract_answer(text).unwrap_or(text).trim()
}

/// Output literal of a prediction; `assert f(...) == X` yields `X`.
fn output_literal(text: &str) -> &str {
    let p = payload(text);
    if let Some(rest) = p.strip_prefix("assert ") {
        if let Some(i) = rest.rfind("==") {
            return rest[i + 2..].trim();
        }
    }
    p
}

/// Runs `input` and accepts when the result equals the predicted literal.
pub fn verify_forward(program: &Program, input: &InputTuple, predicted: &str) -> Verdict {
    verify_forward_with(program, input, predicted, Limits::default())
}

pub fn verify_forward_with(program: &Program, input: &InputTuple, predicted: &str, limits: Limits) -> Verdict {
    let trace = program.run(input, limits);
    let reject = |actual| {
        let expected = match &trace.outcome {
            Outcome::Return(v) => render_value(v),
            Outcome::Failure { kind, .. } => kind.to_string(),
        };
        Verdict::Reject { expected, actual }
    };
    let want = match parse_value_literal(output_literal(predicted)) {
        Ok(v) => v,
        Err(e) => return reject(Actual::Unparsable(e.to_string())),
    };
    match &trace.outcome {
        Outcome::Return(v) if strict_eq(v, &want) => Verdict::Accept,
        // The "expected" side is what execution says; "actual" is the prediction.
        _ => reject(Actual::Value(render_value(&want))),
    }
}

/// Arguments of a predicted call: `f(1, 2)`, `assert f(1, 2) == 3`, or a bare argument list.
pub fn predicted_arguments(program: &Program, predicted: &str) -> Result<InputTuple, String> {
    let p = payload(predicted);
    let p = p.strip_prefix("assert ").unwrap_or(p);
    if let Ok(e) = parse_expression(p, 0) {
        let call = match &e.kind {
            ExprKind::Compare { left, ops } if ops.len() == 1 && ops[0].0 == CmpOp::Eq => Some(&**left),
            _ => Some(&e),
        };
        if let Some(ExprKind::Call { func, args, kwargs }) = call.map(|c| &c.kind) {
            if *func == program.entry {
                if !kwargs.is_empty() {
                    return Err("keyword arguments are not supported".into());
                }
                let vals: Result<Vec<Value>, _> = args.iter().map(literal_value).collect();
                return vals.map(InputTuple::new).map_err(|(_, m)| m);
            }
        }
    }
    parse_input_literal(p).map_err(|e| e.to_string())
}

/// Runs the predicted input and accepts when it returns `expected`.
pub fn verify_backward(program: &Program, predicted: &str, expected: &Value) -> Verdict {
    verify_backward_with(program, predicted, expected, Limits::default())
}

pub fn verify_backward_with(program: &Program, predicted: &str, expected: &Value, limits: Limits) -> Verdict {
    let expected_r = render_value(expected);
    let input = match predicted_arguments(program, predicted) {
        Ok(i) => i,
        Err(e) => return Verdict::Reject { expected: expected_r, actual: Actual::Unparsable(e) },
    };
    match program.run(&input, limits).outcome {
        Outcome::Return(v) if strict_eq(&v, expected) => Verdict::Accept,
        Outcome::Return(v) => Verdict::Reject { expected: expected_r, actual: Actual::Value(render_value(&v)) },
        Outcome::Failure { kind, .. } => Verdict::Reject { expected: expected_r, actual: Actual::Error(kind) },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiffResult {
    Agree,
    ValueMismatch { candidate: String, reference: String },
    CandidateError(ErrorKind),
    ReferenceError(ErrorKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overall {
    EquivalentOnCorpus,
    Buggy,
}

impl Overall {
    pub fn name(self) -> &'static str {
        match self {
            Overall::EquivalentOnCorpus => "equivalent-on-corpus",
            Overall::Buggy => "buggy",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiffReport {
    /// One entry per corpus member, in corpus order.
    pub results: Vec<(InputTuple, DiffResult)>,
    pub overall: Overall,
    /// Members on which the two programs printed different text.
    pub stdout_divergence: Vec<usize>,
}

impl DiffReport {
    /// First member that did not agree, with its result.
    pub fn first_failure(&self) -> Option<&(InputTuple, DiffResult)> {
        self.results.iter().find(|(_, r)| *r != DiffResult::Agree)
    }
}

fn outcome_text(o: &Outcome) -> String {
    match o {
        Outcome::Return(v) => render_value(v),
        Outcome::Failure { kind, .. } => kind.to_string(),
    }
}

/// Compares return values of `candidate` and `reference` on every member of `corpus`.
pub fn differential_test(candidate: &Program, reference: &Program, corpus: &[InputTuple]) -> DiffReport {
    differential_test_with(candidate, reference, corpus, Limits::default())
}

pub fn differential_test_with(candidate: &Program, reference: &Program, corpus: &[InputTuple], limits: Limits) -> DiffReport {
    let mut results = Vec::with_capacity(corpus.len());
    let mut stdout_divergence = Vec::new();
    for (i, input) in corpus.iter().enumerate() {
        let c = candidate.run(input, limits);
        let r = reference.run(input, limits);
        if c.stdout != r.stdout {
            stdout_divergence.push(i);
        }
        let res = match (&c.outcome, &r.outcome) {
            (Outcome::Return(a), Outcome::Return(b)) if strict_eq(a, b) => DiffResult::Agree,
            (Outcome::Return(_), Outcome::Return(_)) => {
                DiffResult::ValueMismatch { candidate: outcome_text(&c.outcome), reference: outcome_text(&r.outcome) }
            }
            (Outcome::Failure { kind: a, .. }, Outcome::Failure { kind: b, .. }) if a == b => DiffResult::Agree,
            (Outcome::Failure { .. }, Outcome::Failure { .. }) => {
                DiffResult::ValueMismatch { candidate: outcome_text(&c.outcome), reference: outcome_text(&r.outcome) }
            }
            (Outcome::Failure { kind, .. }, _) => DiffResult::CandidateError(*kind),
            (_, Outcome::Failure { kind, .. }) => DiffResult::ReferenceError(*kind),
        };
        results.push((input.clone(), res));
    }
    let overall = if results.iter().all(|(_, r)| *r == DiffResult::Agree) { Overall::EquivalentOnCorpus } else { Overall::Buggy };
    if !stdout_divergence.is_empty() {
        log::warn!("stdout differs on {} corpus members", stdout_divergence.len());
    }
    DiffReport { results, overall, stdout_divergence }
}

/// `Accept` re-check of a forward prediction against a freshly parsed program.
pub fn recheck_forward(source: &str, entry: &str, input: &InputTuple, predicted: &str) -> Result<Verdict, String> {
    let p = Program::parse("recheck", source, Some(entry)).map_err(|e| format!("{e}"))?;
    Ok(verify_forward(&p, input, predicted))
}
