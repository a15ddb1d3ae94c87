#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value as Json;

use semtrace::interchange::{compare_traces, to_interchange, TraceInterchange};
use semtrace::jsonl;
use semtrace::problems::{CandidateSpec, ProblemSpec};
use semtrace_core::inputs::{parse_input_literal, InputTuple};
use semtrace_core::tracer::{render_value, Limits, Outcome};
use semtrace_core::verify::{differential_test, Overall};
use semtrace_core::Program;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn oracle_script() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../oracle/ref_oracle.py")
}

pub fn specs() -> Vec<ProblemSpec> {
    jsonl::read(&corpus_dir().join("programs.jsonl")).unwrap()
}

pub fn programs() -> BTreeMap<String, Program> {
    specs().iter().map(|s| (s.id.clone(), s.program().unwrap())).collect()
}

#[derive(Deserialize)]
struct InputsLine {
    id: String,
    inputs: Vec<String>,
}

/// Expanded input corpora, by program id.
pub fn inputs() -> BTreeMap<String, Vec<InputTuple>> {
    jsonl::read::<InputsLine>(&corpus_dir().join("inputs.jsonl"))
        .unwrap()
        .into_iter()
        .map(|l| (l.id, l.inputs.iter().map(|s| parse_input_literal(s).unwrap()).collect()))
        .collect()
}

pub fn mutants() -> Vec<CandidateSpec> {
    jsonl::read(&corpus_dir().join("mutants.jsonl")).unwrap()
}

#[derive(Deserialize)]
pub struct Golden {
    pub program_id: String,
    pub input: String,
    pub outcome: Json,
    pub events: Vec<(u32, Vec<String>)>,
    pub stdout: String,
}

pub fn goldens() -> Vec<Golden> {
    jsonl::read(&corpus_dir().join("golden.jsonl")).unwrap()
}

/// Runs every golden case and describes each disagreement.
pub fn golden_mismatches(programs: &BTreeMap<String, Program>, goldens: &[Golden]) -> Vec<String> {
    let mut bad = Vec::new();
    for g in goldens {
        let p = &programs[&g.program_id];
        let t = p.run(&parse_input_literal(&g.input).unwrap(), Limits::default());
        let case = format!("{}{}", g.program_id, g.input);
        match &t.outcome {
            Outcome::Return(v) => {
                let got: Json = serde_json::from_str(&render_value(v)).unwrap_or(Json::Null);
                if g.outcome["status"] != "return" || g.outcome["value"] != got {
                    bad.push(format!("{case}: returned {got}, golden {}", g.outcome));
                    continue;
                }
            }
            Outcome::Failure { kind, .. } => {
                if g.outcome["error_kind"] != kind.name() {
                    bad.push(format!("{case}: raised {kind}, golden {}", g.outcome));
                    continue;
                }
            }
        }
        let got: Vec<(u32, BTreeSet<&str>)> = t.events.iter().map(|e| (e.line, e.changed_names().into_iter().collect())).collect();
        let want: Vec<(u32, BTreeSet<&str>)> =
            g.events.iter().map(|(l, ns)| (*l, ns.iter().map(String::as_str).collect())).collect();
        if got != want {
            let at = got.iter().zip(&want).position(|(a, b)| a != b).unwrap_or(got.len().min(want.len()));
            bad.push(format!("{case}: events differ at {at}: {:?} vs {:?}", got.get(at), want.get(at)));
        }
        if t.stdout != g.stdout {
            bad.push(format!("{case}: stdout differs"));
        }
    }
    bad
}

/// Mutants not flagged buggy, then references not equivalent to themselves.
pub fn differential_failures(programs: &BTreeMap<String, Program>, inputs: &BTreeMap<String, Vec<InputTuple>>) -> Vec<String> {
    let mut bad = Vec::new();
    for m in mutants() {
        let r = &programs[&m.problem_id];
        let c = Program::parse(m.id.clone(), m.source.clone(), Some(&r.entry)).unwrap();
        if differential_test(&c, r, &inputs[&m.problem_id]).overall != Overall::Buggy {
            bad.push(format!("mutant {} not flagged", m.id));
        }
    }
    for (id, p) in programs {
        if differential_test(p, p, &inputs[id]).overall != Overall::EquivalentOnCorpus {
            bad.push(format!("reference {id} differs from itself"));
        }
    }
    bad
}

pub fn python() -> Option<&'static str> {
    let ok = std::process::Command::new("python3").arg("--version").output().is_ok_and(|o| o.status.success());
    ok.then_some("python3")
}

/// Traces `cases` under the reference runtime and compares; `None` without python3.
/// Returns (compared, divergent descriptions, set-order flagged).
pub fn oracle_divergences(programs: &BTreeMap<String, Program>, cases: &[(String, InputTuple)]) -> Option<(usize, Vec<String>, usize)> {
    use std::io::Write;
    let py = python()?;
    let reqs: Vec<Json> = cases
        .iter()
        .map(|(id, i)| {
            let p = &programs[id];
            serde_json::json!({"program_id": id, "source": p.source, "entry": p.entry, "input": i.canonical_text})
        })
        .collect();
    let mut child = std::process::Command::new(py)
        .arg(oracle_script())
        .arg("--batch")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .ok()?;
    child.stdin.take().unwrap().write_all(serde_json::to_string(&reqs).unwrap().as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "oracle exited with {}", out.status);
    let traces: Vec<TraceInterchange> = serde_json::from_slice(&out.stdout).unwrap();
    let (mut bad, mut flagged) = (Vec::new(), 0);
    for ((id, i), o) in cases.iter().zip(&traces) {
        let t = programs[id].run(i, Limits::default());
        let r = compare_traces(&to_interchange(id, &t), o);
        if r.nondeterministic_set_order {
            flagged += 1;
        } else if !r.is_empty() {
            bad.push(format!("{id}{}: {:?}", i.canonical_text, r));
        }
    }
    Some((traces.len(), bad, flagged))
}
