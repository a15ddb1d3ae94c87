//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;
use sha2::{Digest, Sha256};

use common::*;
use semtrace::config::{BuildConfig, RecordKind};
use semtrace::pipeline::{build_dataset, decontaminate, BenchmarkPair, DatasetRecord};
use semtrace::{jsonl, with_big_stack};
use semtrace_core::formats::{to_concise, to_next, to_scratchpad, TruncationRule};
use semtrace_core::harness::{run_episode, score_curve, Decoding, EpisodeResult, ModelClient, Schedule};
use semtrace_core::inputs::{expand, mutate, parse_input_literal, parse_value_literal, stream, validate, Goal, InputTuple, MutationPolicy};
use semtrace_core::subjectlang::BinOpKind;
use semtrace_core::tracer::{binop, repr, strict_eq, Dict, EventKind, Limits, Outcome, Value};
use semtrace_core::verify::{verify_backward, verify_forward};
use semtrace_core::{Problem, Program};

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: String, took: Duration) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {name}: {detail} ({:.2}s)", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/golden").join(name)).unwrap()
}

fn golden_fixtures(rep: &mut Report) {
    let ((ok, n), took) = timed(|| {
        let p = Program::parse("usi", fixture("unique_sorted_indices.py"), None).unwrap();
        let t = p.run(&parse_input_literal("([10.5, 8.2, 10.5, 7.1, 8.2],)").unwrap(), Limits::default());
        let got = [
            (to_scratchpad(&p, &t).unwrap().text, fixture("scratchpad.txt")),
            (to_next(&p, &t, TruncationRule::default()).unwrap().text, fixture("next.txt")),
            (to_concise(&p, &t).unwrap().text, fixture("concise.txt")),
        ];
        (got.iter().filter(|(a, b)| a == b).count(), got.len())
    });
    rep.line("golden-fixtures", ok == n && took < Duration::from_secs(1), format!("{ok}/{n} listings byte-exact"), took);
}

fn corpus_tracer(rep: &mut Report) {
    let ((bad, cases, progs), took) = timed(|| {
        let p = programs();
        let g = goldens();
        (golden_mismatches(&p, &g), g.len(), p.len())
    });
    let pass = bad.is_empty() && progs >= 50 && took < Duration::from_secs(10);
    let mut detail = format!("{} of {cases} golden traces over {progs} programs match", cases - bad.len());
    if let Some(b) = bad.first() {
        detail.push_str(&format!("; first mismatch {b}"));
    }
    rep.line("corpus-tracer", pass, detail, took);
}

fn loop_program(bodies: &[u8]) -> String {
    let mut s = String::from("def f(n):\n    acc = 0\n    for i in range(n):\n");
    for (k, b) in bodies.iter().enumerate() {
        match b % 3 {
            0 => s.push_str(&format!("        acc = acc + {}\n", k + 1)),
            1 => s.push_str(&format!("        if i % {} == 0:\n            acc = acc * 2\n", k + 2)),
            _ => s.push_str("        acc = acc\n"),
        }
    }
    s.push_str("    return acc\n");
    s
}

/// Checks the state-block indices of one NeXT listing against its raw events.
fn truncation_holds(bodies: &[u8], n: usize) -> Result<usize, String> {
    let p = Program::parse("t", loop_program(bodies), None).unwrap();
    let t = p.run(&parse_input_literal(&format!("({n},)")).unwrap(), Limits::default());
    let text = to_next(&p, &t, TruncationRule::default()).map_err(|e| e.to_string())?.text;
    let mut k = 0usize;
    let mut per_line: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for e in t.top_events() {
        if e.kind == EventKind::Entry || e.changed.is_empty() {
            continue;
        }
        per_line.entry(e.line).or_default().push(k);
        k += 1;
    }
    let rows: Vec<&str> = text.lines().collect();
    let mut truncated = 0;
    for (line, ks) in per_line {
        let row = rows[line as usize - 1];
        let got: Vec<usize> = row
            .match_indices("[STATE-")
            .filter_map(|(i, _)| {
                let rest = &row[i + 7..];
                rest[..rest.find(']')?].parse().ok()
            })
            .collect();
        let want: Vec<usize> = if ks.len() > 3 { vec![ks[0], ks[1], ks[ks.len() - 1]] } else { ks.clone() };
        if got != want || row.contains(" ... ") != (ks.len() > 3) {
            return Err(format!("line {line}: blocks {got:?}, want {want:?}"));
        }
        truncated += (ks.len() > 3) as usize;
    }
    Ok(truncated)
}

fn next_truncation(rep: &mut Report) {
    let ((res, cases, truncated), took) = timed(|| {
        let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
        let truncated = std::cell::Cell::new(0usize);
        let cases = std::cell::Cell::new(0usize);
        let res = runner.run(&(prop::collection::vec(any::<u8>(), 1..4), 0usize..9), |(bodies, n)| {
            cases.set(cases.get() + 1);
            let t = truncation_holds(&bodies, n).map_err(TestCaseError::fail)?;
            truncated.set(truncated.get() + t);
            Ok(())
        });
        (res, cases.get(), truncated.get())
    });
    let detail = match &res {
        Ok(()) => format!("{cases} random loop programs, {truncated} truncated lines, blocks = min(c, 3) with first/second/last kept"),
        Err(e) => format!("{e}"),
    };
    rep.line("next-truncation", res.is_ok() && cases >= 1000, detail, took);
}

fn coverage(rep: &mut Report) {
    let ((line, branch, n), took) = timed(|| {
        let policy = MutationPolicy::with_seed(0);
        let (mut l, mut b, mut n) = (0.0, 0.0, 0usize);
        for s in specs() {
            let p = s.program().unwrap();
            let c = expand(&p, &s.inputs().unwrap(), &Goal::size(20), &policy, Limits::default(), None).unwrap();
            l += c.coverage.line_rate;
            b += c.coverage.branch_rate;
            n += 1;
        }
        (l / n as f64, b / n as f64, n)
    });
    let pass = line >= 0.90 && branch >= 0.85 && took < Duration::from_secs(60);
    rep.line("coverage", pass, format!("{n} programs, mean line rate {line:.3}, mean branch rate {branch:.3}"), took);
}

/// A value of the same shape that is strictly different from `v`.
fn perturb(v: &Value, rng: &mut impl Rng) -> Value {
    let p = match v {
        Value::None => Value::int(0),
        Value::Bool(b) => Value::Bool(!b),
        Value::Int(_) => {
            let d = rng.gen_range(1..4) * if rng.gen_bool(0.5) { 1 } else { -1 };
            binop(BinOpKind::Add, v, &Value::int(d)).unwrap_or(Value::None)
        }
        Value::Float(f) if f.is_finite() => Value::Float(f + rng.gen_range(1..4) as f64 * 0.5),
        Value::Str(s) if !s.is_empty() && rng.gen_bool(0.5) => {
            let mut t = s.to_string();
            t.pop();
            Value::str(&t)
        }
        Value::Str(s) => Value::str(&format!("{s}x")),
        Value::List(_) | Value::Tuple(_) => {
            let mut items = match v {
                Value::List(l) => l.borrow().clone(),
                Value::Tuple(t) => t.to_vec(),
                _ => unreachable!(),
            };
            match rng.gen_range(0..3) {
                0 if !items.is_empty() => {
                    let k = rng.gen_range(0..items.len());
                    items[k] = perturb(&items[k], rng);
                }
                1 if !items.is_empty() => {
                    items.pop();
                }
                _ => items.push(Value::int(7)),
            }
            if matches!(v, Value::List(_)) {
                Value::list(items)
            } else {
                Value::tuple(items)
            }
        }
        Value::Dict(d) => {
            let mut nd = Dict::new();
            let entries = d.borrow().entries().to_vec();
            for (k, (key, val)) in entries.iter().enumerate() {
                let val = if k == 0 { perturb(val, rng) } else { val.clone() };
                nd.insert(key.clone(), val).unwrap();
            }
            if entries.is_empty() {
                nd.insert(Value::str("zz"), Value::int(0)).unwrap();
            }
            Value::dict(nd)
        }
        _ => Value::list(vec![v.clone()]),
    };
    if strict_eq(&p, v) {
        Value::list(vec![v.clone()])
    } else {
        p
    }
}

fn prediction_text(entry: &str, input: &InputTuple, lit: &str, style: u32) -> String {
    match style {
        0 => lit.to_string(),
        1 => format!("[ANSWER]\n{lit}\n[/ANSWER]"),
        _ => format!("[ANSWER]\nassert {entry}({}) == {lit}\n[/ANSWER]", input.call_args()),
    }
}

fn rejection_sampling(rep: &mut Report) {
    let ((pairs, false_acc, false_rej, first), took) = timed(|| {
        let inputs = inputs();
        let policy = MutationPolicy::with_seed(0);
        let search = Limits { step_budget: 10_000, ..Limits::default() };
        let (mut pairs, mut false_acc, mut false_rej, mut first) = (0usize, 0usize, 0usize, None);
        for s in specs() {
            let p = s.program().unwrap();
            let pool = &inputs[&s.id];
            let mut rng = stream(0, &s.id, 7);
            for k in 0..1000u64 {
                let base = &pool[rng.gen_range(0..pool.len())];
                let mut input = base.clone();
                if rng.gen_bool(0.5) {
                    let m = mutate(base, &policy, &s.id, (1 << 32) + k);
                    if validate(&p, &m, search).is_accepted() {
                        input = m;
                    }
                }
                let Outcome::Return(v) = p.run(&input, Limits::default()).outcome else { unreachable!("validated input failed") };
                let correct = k % 2 == 0;
                let shown = if correct { v.clone() } else { perturb(&v, &mut rng) };
                let text = prediction_text(&p.entry, &input, &repr(&shown), rng.gen_range(0..3));
                let accepted = verify_forward(&p, &input, &text).is_accept();
                pairs += 1;
                if accepted != correct {
                    if accepted {
                        false_acc += 1;
                    } else {
                        false_rej += 1;
                    }
                    first.get_or_insert_with(|| format!("{}{} predicted {}", s.id, input.canonical_text, repr(&shown)));
                }
            }
        }
        (pairs, false_acc, false_rej, first)
    });
    let pass = false_acc == 0 && false_rej == 0 && took < Duration::from_secs(30);
    let mut detail = format!("{pairs} pairs, {false_acc} false accepts, {false_rej} false rejects");
    if let Some(f) = first {
        detail.push_str(&format!("; first error {f}"));
    }
    rep.line("rejection-sampling", pass, detail, took);
}

fn differential(rep: &mut Report) {
    let ((bad, n), took) = timed(|| (differential_failures(&programs(), &inputs()), mutants().len()));
    let pass = bad.is_empty() && n >= 20;
    let mut detail = format!("{n} mutants flagged buggy, every reference equivalent to itself");
    if !bad.is_empty() {
        detail = format!("{} failures, first {}", bad.len(), bad[0]);
    }
    rep.line("differential-testing", pass, detail, took);
}

const ONE_ROUND: usize = 1;

struct Scripted {
    replies: Vec<String>,
    calls: usize,
}

impl Scripted {
    fn new(replies: Vec<String>) -> Self {
        Scripted { replies, calls: 0 }
    }

    fn next(&mut self) -> Result<String, String> {
        let r = self.replies[self.calls.min(self.replies.len() - 1)].clone();
        self.calls += 1;
        Ok(r)
    }
}

impl ModelClient for Scripted {
    fn generate(&mut self, _: &str, _: &Decoding) -> Result<String, String> {
        self.next()
    }
    fn refine(&mut self, _: &str, _: &str, _: &str, _: &Decoding) -> Result<String, String> {
        self.next()
    }
}

fn self_refine(rep: &mut Report) {
    let ((checks, detail), took) = timed(|| {
        let inputs = inputs();
        let mut problems: BTreeMap<String, Problem> = BTreeMap::new();
        for s in specs() {
            let corpus = inputs[&s.id].clone();
            problems.insert(s.id.clone(), Problem { id: s.id.clone(), prompt: s.prompt.clone(), reference: s.program().unwrap(), corpus });
        }
        let sched = Schedule::default();
        let correct: Vec<EpisodeResult> = problems
            .values()
            .map(|p| run_episode(p, &mut Scripted::new(vec![p.reference.source.clone()]), 5, &sched))
            .collect();
        let always = score_curve(&correct, 5)[ONE_ROUND - 1];

        let mut fix3 = Vec::new();
        let mut never_rounds = BTreeSet::new();
        let mut never_calls = BTreeSet::new();
        for m in mutants() {
            let p = &problems[&m.problem_id];
            let reference = p.reference.source.clone();
            fix3.push(run_episode(p, &mut Scripted::new(vec![m.source.clone(), m.source.clone(), reference]), 5, &sched));
            let mut never = Scripted::new(vec![m.source.clone()]);
            let r = run_episode(p, &mut never, 5, &sched);
            never_rounds.insert(r.rounds.len());
            never_calls.insert(never.calls);
        }
        let curve3 = score_curve(&fix3, 5);

        let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
        let monotone = runner
            .run(&prop::collection::vec(prop::option::of(1usize..7), 0..40), |firsts| {
                let rs: Vec<EpisodeResult> =
                    firsts.into_iter().map(|f| EpisodeResult { problem_id: "p".into(), rounds: vec![], first_pass_round: f }).collect();
                let c = score_curve(&rs, 6);
                prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
                Ok(())
            })
            .is_ok();
        let checks = always == 1.0
            && curve3 == vec![0.0, 0.0, 1.0, 1.0, 1.0]
            && never_rounds == BTreeSet::from([5])
            && never_calls == BTreeSet::from([5])
            && monotone;
        let detail = format!(
            "always-correct pass@1 {always} over {} problems; fix-at-3 curve {curve3:?} over {} mutants; never-fixing rounds {never_rounds:?}, client calls {never_calls:?}; monotone on 1000 fuzzed sets: {monotone}",
            correct.len(),
            fix3.len()
        );
        (checks, detail)
    });
    rep.line("self-refine", checks, detail, took);
}

fn file_hashes(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        let bytes = std::fs::read(e.path()).unwrap();
        let h: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        out.insert(e.file_name().to_string_lossy().into_owned(), h);
    }
    out
}

fn read_kind(dir: &Path, kind: RecordKind) -> Vec<DatasetRecord> {
    jsonl::read(&dir.join(format!("{}.jsonl", kind.name()))).unwrap()
}

/// Builds the bundled corpus twice; returns the first output directory.
fn determinism(rep: &mut Report, tmp: &Path) -> std::path::PathBuf {
    let ((a, b, took_each), took) = timed(|| {
        let mut cfg = BuildConfig::load(&corpus_dir().join("pyx.json")).unwrap();
        assert!(cfg.suggester.is_none());
        let mut each = Vec::new();
        let mut hashes = Vec::new();
        for name in ["a", "b"] {
            cfg.out_dir = tmp.join(name);
            let (r, t) = timed(|| build_dataset(&cfg));
            r.unwrap();
            each.push(t.as_secs_f64());
            hashes.push(file_hashes(&cfg.out_dir));
        }
        (hashes.remove(0), hashes.remove(0), each)
    });
    let pass = a == b && a.len() == RecordKind::ALL.len() + 1;
    let records: usize = RecordKind::ALL.iter().map(|k| read_kind(&tmp.join("a"), *k).len()).sum();
    rep.line(
        "determinism",
        pass,
        format!("{} files, {records} records, identical hashes across two builds ({:.1}s, {:.1}s)", a.len(), took_each[0], took_each[1]),
        took,
    );
    tmp.join("a")
}

fn backward_witness(rep: &mut Report, dir: &Path) {
    let ((n, bad), took) = timed(|| {
        let programs = programs();
        let recs = read_kind(dir, RecordKind::BackwardMonologue);
        let bad = recs
            .iter()
            .filter(|r| {
                let want = parse_value_literal(r.output.as_deref().unwrap()).unwrap();
                !verify_backward(&programs[&r.program_id], &r.text, &want).is_accept()
            })
            .count();
        (recs.len(), bad)
    });
    rep.line("backward-witness", n > 0 && bad == 0, format!("{} of {n} backward records re-verify from their text", n - bad), took);
}

fn forward_reverify(rep: &mut Report, dir: &Path) {
    let ((n, bad), took) = timed(|| {
        let programs = programs();
        let recs = read_kind(dir, RecordKind::ForwardMonologue);
        let bad = recs
            .iter()
            .filter(|r| {
                let i = parse_input_literal(r.input.as_deref().unwrap()).unwrap();
                !verify_forward(&programs[&r.program_id], &i, &r.text).is_accept()
            })
            .count();
        (recs.len(), bad)
    });
    rep.line("forward-records", n > 0 && bad == 0, format!("{} of {n} forward records re-verify from their text", n - bad), took);
}

fn decontamination(rep: &mut Report, dir: &Path) {
    let ((pass, detail), took) = timed(|| {
        let mut all = Vec::new();
        for k in RecordKind::ALL {
            all.extend(read_kind(dir, k));
        }
        let with_io: Vec<&DatasetRecord> = all.iter().filter(|r| r.input.is_some()).collect();
        // Inject three pairs drawn from the dataset, spelled without canonical spacing, plus one absent pair.
        let picks = [with_io[0], with_io[with_io.len() / 2], with_io[with_io.len() - 1]];
        let squash = |s: &str| s.replace(", ", ",");
        let mut bench: Vec<BenchmarkPair> = picks
            .iter()
            .map(|r| BenchmarkPair::canonical(&squash(r.input.as_ref().unwrap()), &squash(r.output.as_ref().unwrap())))
            .collect();
        bench.push(BenchmarkPair::canonical("(123456789,)", "'never'"));
        let targets: BTreeSet<(String, String)> =
            picks.iter().map(|r| (r.input.clone().unwrap(), r.output.clone().unwrap())).collect();
        let want: BTreeSet<&str> = all
            .iter()
            .filter(|r| matches!((&r.input, &r.output), (Some(i), Some(o)) if targets.contains(&(i.clone(), o.clone()))))
            .map(|r| r.id.as_str())
            .collect();
        let (kept, log) = decontaminate(&all, &bench);
        let removed: BTreeSet<&str> = log.iter().map(|l| l.record_id.as_str()).collect();
        let (again, log2) = decontaminate(&kept, &bench);
        let pass = removed == want && log.len() == want.len() && kept.len() + log.len() == all.len() && again == kept && log2.is_empty();
        (pass, format!("{} pairs injected, {} of {} records removed as expected, second pass removes {}", bench.len(), log.len(), all.len(), log2.len()))
    });
    rep.line("decontamination", pass, detail, took);
}

fn oracle() {
    let (res, took) = timed(|| {
        let programs = programs();
        let inputs = inputs();
        let cases: Vec<(String, InputTuple)> =
            inputs.iter().flat_map(|(id, is)| is.iter().map(|i| (id.clone(), i.clone())).collect::<Vec<_>>()).collect();
        oracle_divergences(&programs, &cases)
    });
    match res {
        None => println!("SKIP oracle-equivalence (secondary): python3 not available"),
        Some((n, bad, flagged)) => {
            let detail = format!("{} of {n} traces agree with the reference runtime, {flagged} set-order flagged", n - bad.len() - flagged);
            println!("{} oracle-equivalence (secondary): {detail} ({:.2}s)", if bad.is_empty() { "PASS" } else { "FAIL" }, took.as_secs_f64());
        }
    }
}

fn main() {
    let code = with_big_stack(|| {
        let mut rep = Report { failed: 0 };
        golden_fixtures(&mut rep);
        corpus_tracer(&mut rep);
        next_truncation(&mut rep);
        coverage(&mut rep);
        rejection_sampling(&mut rep);
        differential(&mut rep);
        let tmp = tempfile::tempdir().unwrap();
        let dir = determinism(&mut rep, tmp.path());
        backward_witness(&mut rep, &dir);
        forward_reverify(&mut rep, &dir);
        self_refine(&mut rep);
        decontamination(&mut rep, &dir);
        oracle();
        rep.failed
    });
    if code > 0 {
        println!("{code} criteria failed");
        std::process::exit(1);
    }
}
