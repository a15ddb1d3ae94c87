//! Debugging samples: buggy candidates, their faulty traces, and verified patches.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::formats::{extract_refined, faulty_listing, with_prefix, FormatError, TaskPrefix, TruncationRule};
use crate::harness::{Decoding, ModelClient};
use crate::inputs::InputTuple;
use crate::program::{Problem, Program};
use crate::tracer::{repr, ErrorKind, Limits, Outcome, Value};
use crate::verify::{differential_test, DiffResult, Overall};

#[derive(Clone, Debug)]
pub struct BuggyRecord {
    pub problem_id: String,
    pub prompt: String,
    pub entry: String,
    pub buggy_source: String,
    pub failing_input: InputTuple,
    pub expected_output: Value,
    pub faulty_trace: String,
    pub rationale: Option<String>,
    pub patch: Option<String>,
    /// Set only after the patch passed differential testing on the full corpus.
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skip {
    pub problem_id: String,
    pub reason: String,
}

/// Source code in a model reply: the `[Refined]` payload, a fenced block, or the whole text.
pub fn extract_code(reply: &str) -> String {
    if let Some(r) = extract_refined(reply) {
        return strip_fence(r).to_string();
    }
    strip_fence(reply).to_string()
}

fn strip_fence(text: &str) -> &str {
    let Some(start) = text.find("```") else { return text };
    let after = &text[start + 3..];
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
    let body = &after[body_start..];
    match body.find("```") {
        Some(end) => &body[..end],
        None => body,
    }
}

/// Parses a candidate against the problem's entry point and screens it.
pub fn candidate_program(problem: &Problem, source: &str) -> Result<Program, String> {
    Program::parse_eligible(format!("{}-candidate", problem.id), source, Some(&problem.reference.entry)).map_err(|e| e.to_string())
}

/// NeXT-style annotated listing of a failing run.
pub fn faulty_trace(
    program: &Program,
    failing_input: &InputTuple,
    rule: TruncationRule,
    expected: Option<&Value>,
) -> Result<String, FormatError> {
    let trace = program.run(failing_input, Limits::default());
    if let Outcome::Failure { kind: ErrorKind::UnsupportedConstruct, message, .. } = &trace.outcome {
        return Err(FormatError::UnsupportedConstruct(message.clone()));
    }
    Ok(faulty_listing(program, &trace, rule, expected))
}

fn reference_output(problem: &Problem, input: &InputTuple) -> Value {
    problem.reference.run(input, Limits::default()).outcome.value().cloned().unwrap_or(Value::None)
}

/// Builds a record when `source` disagrees with the reference somewhere on the corpus.
pub fn buggy_record(problem: &Problem, source: &str) -> Result<Option<BuggyRecord>, String> {
    let candidate = candidate_program(problem, source)?;
    let report = differential_test(&candidate, &problem.reference, &problem.corpus);
    if report.overall == Overall::EquivalentOnCorpus {
        return Ok(None);
    }
    let Some((input, result)) = report.first_failure() else { return Ok(None) };
    if let DiffResult::ReferenceError(k) = result {
        return Err(format!("reference fails with {k} on a corpus member"));
    }
    let expected = reference_output(problem, input);
    let trace = faulty_trace(&candidate, input, TruncationRule::default(), Some(&expected)).map_err(|e| e.to_string())?;
    Ok(Some(BuggyRecord {
        problem_id: problem.id.clone(),
        prompt: problem.prompt.clone(),
        entry: problem.reference.entry.clone(),
        buggy_source: candidate.source.clone(),
        failing_input: input.clone(),
        expected_output: expected,
        faulty_trace: trace,
        rationale: None,
        patch: None,
        verified: false,
    }))
}

/// Asks `solver` for a solution to every problem and keeps the buggy ones.
pub fn collect_buggy(problems: &[Problem], solver: &mut dyn ModelClient) -> (Vec<BuggyRecord>, Vec<Skip>) {
    let mut records = Vec::new();
    let mut skips = Vec::new();
    for p in problems {
        let reply = match solver.generate(&p.prompt, &Decoding::greedy()) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("solver failed on {}: {e}", p.id);
                skips.push(Skip { problem_id: p.id.clone(), reason: format!("client-error: {e}") });
                continue;
            }
        };
        match buggy_record(p, &extract_code(&reply)) {
            Ok(Some(r)) => records.push(r),
            Ok(None) => {}
            Err(reason) => skips.push(Skip { problem_id: p.id.clone(), reason }),
        }
    }
    (records, skips)
}

/// The failed test as an assertion.
pub fn failed_test(record: &BuggyRecord) -> String {
    format!("assert {}({}) == {}", record.entry, record.failing_input.call_args(), repr(&record.expected_output))
}

/// Prompt body for debugging: problem, faulty trace and failed test.
pub fn debug_prompt(prompt: &str, faulty_trace: &str, failed_test: &str) -> String {
    format!("<Prompt>\n{prompt}\n\n<Faulty Trace>\n{faulty_trace}\n<Failed Test>\n{failed_test}\n")
}

/// DebugRefine sample text. Records whose patch failed verification yield `None`.
pub fn assemble_debug_sample(record: &BuggyRecord) -> Option<String> {
    if record.patch.is_some() && !record.verified {
        return None;
    }
    let prompt = debug_prompt(&record.prompt, &record.faulty_trace, &failed_test(record));
    let completion = match &record.patch {
        Some(patch) => {
            let mut c = String::new();
            if let Some(r) = &record.rationale {
                c.push_str(r.trim_end());
                c.push('\n');
            }
            c.push_str("[Refined]\n");
            c.push_str(patch.trim_end());
            c.push_str("\n[/Refined]");
            c
        }
        None => String::new(),
    };
    Some(with_prefix(TaskPrefix::DebugRefine, &prompt, &completion))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchCheck {
    pub passed: bool,
    pub reason: Option<String>,
}

/// True iff the patch is equivalent to the reference on the whole corpus.
pub fn verify_patch(patch_source: &str, reference: &Program, corpus: &[InputTuple]) -> PatchCheck {
    let patch = match Program::parse_eligible("patch", patch_source, Some(&reference.entry)) {
        Ok(p) => p,
        Err(e) => return PatchCheck { passed: false, reason: Some(e.to_string()) },
    };
    let report = differential_test(&patch, reference, corpus);
    match report.first_failure() {
        None => PatchCheck { passed: true, reason: None },
        Some((input, r)) => PatchCheck { passed: false, reason: Some(format!("{r:?} on {}", input.canonical_text)) },
    }
}

/// Attaches a rationale and patch, verifying the patch against the problem.
pub fn attach_patch(record: &mut BuggyRecord, problem: &Problem, rationale: Option<String>, patch: String) -> PatchCheck {
    let check = verify_patch(&patch, &problem.reference, &problem.corpus);
    record.rationale = rationale;
    record.patch = Some(patch);
    record.verified = check.passed;
    check
}

/// Splits a refine reply into rationale (text before `[Refined]`) and code.
pub fn split_reply(reply: &str) -> (Option<String>, String) {
    let code = extract_code(reply);
    let rationale = reply.find("[Refined]").map(|i| reply[..i].trim().to_string()).filter(|s| !s.is_empty());
    (rationale, code)
}
