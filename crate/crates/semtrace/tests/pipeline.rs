use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use semtrace::config::{BuildConfig, RecordKind};
use semtrace::pipeline::*;
use semtrace::problems::{CandidateSpec, ProblemSpec};
use semtrace::{jsonl, with_big_stack};
use semtrace_core::inputs::{expand, parse_input_literal, parse_value_literal, validate, Goal, MutationPolicy, Validation};
use semtrace_core::tracer::Limits;
use semtrace_core::verify::{verify_backward, verify_forward};

const GOLDEN_INPUT: &str = "([10.5, 8.2, 10.5, 7.1, 8.2],)";
const SUBSET: [&str; 6] = ["unique_sorted_indices", "dedupe_keep_order", "reverse_string", "squares_dict", "distinct_count", "parse_kv"];

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn specs() -> Vec<ProblemSpec> {
    jsonl::read(&corpus().join("programs.jsonl")).unwrap()
}

fn rec(id: &str, input: Option<&str>, output: Option<&str>, text: &str) -> DatasetRecord {
    DatasetRecord {
        kind: RecordKind::ForwardMonologue,
        id: id.into(),
        program_id: "unique_sorted_indices".into(),
        input_id: None,
        text: text.into(),
        input: input.map(String::from),
        output: output.map(String::from),
        provenance: Provenance { generator: Generator::Deterministic, seed: 0, tool_version: TOOL_VERSION.into() },
    }
}

/// Writes the subset problems and their mutants under `dir` and returns a config for them.
fn subset_config(dir: &Path, ids: &[&str], out: &str) -> BuildConfig {
    let specs: Vec<ProblemSpec> = specs().into_iter().filter(|s| ids.contains(&s.id.as_str())).collect();
    let cands: Vec<CandidateSpec> = jsonl::read::<CandidateSpec>(&corpus().join("mutants.jsonl"))
        .unwrap()
        .into_iter()
        .filter(|c| ids.contains(&c.problem_id.as_str()))
        .collect();
    jsonl::write(&dir.join("programs.jsonl"), &specs).unwrap();
    jsonl::write(&dir.join("mutants.jsonl"), &cands).unwrap();
    let cfg = format!(r#"{{"programs": "programs.jsonl", "candidates": "mutants.jsonl", "out_dir": "{out}", "master_seed": 0}}"#);
    BuildConfig::from_json(&cfg, dir).unwrap()
}

fn kind_strategy() -> impl Strategy<Value = RecordKind> {
    prop::sample::select(RecordKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn records_round_trip(
        kind in kind_strategy(),
        id in ".{0,20}",
        text in "(.|\n){0,200}",
        input in prop::option::of("[ -~]{0,30}"),
        output in prop::option::of("[ -~]{0,30}"),
        seed in any::<u64>(),
        client in any::<bool>(),
    ) {
        let r = DatasetRecord {
            kind,
            id: id.clone(),
            program_id: id,
            input_id: input.as_ref().map(|_| "0123456789abcdef".to_string()),
            text,
            input,
            output,
            provenance: Provenance {
                generator: if client { Generator::Client } else { Generator::Deterministic },
                seed,
                tool_version: TOOL_VERSION.into(),
            },
        };
        let line = jsonl::to_string(std::slice::from_ref(&r)).unwrap();
        prop_assert!(line.ends_with('\n'));
        prop_assert_eq!(line.matches('\n').count(), 1);
        let back: DatasetRecord = serde_json::from_str(line.trim_end()).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(jsonl::to_string(&[back]).unwrap(), line);
    }
}

#[test]
fn identical_record_scores_one() {
    let t = "def f(x):\n    return x + 1\n";
    let rep = similarity_report(&[rec("a", None, None, t)], &[t.to_string()], 0.75);
    assert_eq!(rep.scores[0].max_similarity, 1.0);
    assert_eq!(rep.flagged, vec!["a".to_string()]);
    assert_eq!(rep.histogram[9], 1);
    assert_eq!(rep.measure, "shingle-cosine-k8");
}

#[test]
fn empty_benchmark_scores_zero() {
    let rep = similarity_report(&[rec("a", None, None, "anything at all")], &[], 0.75);
    assert_eq!(rep.scores[0].max_similarity, 0.0);
    assert_eq!(rep.scores[0].nearest, None);
    assert!(rep.flagged.is_empty());
    assert_eq!(rep.histogram[0], 1);
}

fn reference_cosine(a: &str, b: &str) -> f64 {
    let grams = |s: &str| -> HashSet<String> {
        let c: Vec<char> = s.chars().collect();
        c.windows(8).map(|w| w.iter().collect()).collect()
    };
    let (x, y) = (grams(a), grams(b));
    x.intersection(&y).count() as f64 / ((x.len() * y.len()) as f64).sqrt()
}

#[test]
fn half_shared_shingles() {
    // 15 shared chars give 8 common shingles; each side has 16.
    let shared = "abcdefghijklmno";
    let a = format!("{shared}PQRSTUVW");
    let b = format!("{shared}12345678");
    let want = reference_cosine(&a, &b);
    assert!((want - 0.5).abs() < 1e-12);
    assert!((shingle_cosine(&a, &b) - want).abs() < 1e-12);
    let rep = similarity_report(&[rec("a", None, None, &a)], &[b], 0.75);
    assert!(rep.flagged.is_empty());
    assert_eq!(rep.histogram[5], 1);
}

#[test]
fn short_and_empty_texts() {
    assert_eq!(shingles("", 8).len(), 0);
    assert_eq!(shingles("abc", 8).len(), 1);
    assert_eq!(shingle_cosine("", ""), 1.0);
    assert_eq!(shingle_cosine("", "abcdefghij"), 0.0);
    assert_eq!(shingle_cosine("abc", "abc"), 1.0);
}

#[test]
fn decontamination_examples() {
    let bench = [BenchmarkPair::canonical("([10.5, 8.2, 10.5, 7.1, 8.2])", "[3,1,0]")];
    let data = vec![
        rec("hit", Some(GOLDEN_INPUT), Some("[3, 1, 0]"), "x"),
        rec("other-input", Some("([1.0, 2.0],)"), Some("[0, 1]"), "x"),
        rec("no-io", None, None, "x"),
    ];
    let (kept, log) = decontaminate(&data, &bench);
    assert_eq!(kept.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["other-input", "no-io"]);
    assert_eq!(log.len(), 1);
    assert_eq!(log[0].record_id, "hit");
    assert_eq!(log[0].matched, BenchmarkPair { input: GOLDEN_INPUT.into(), output: "[3, 1, 0]".into() });

    let dup = vec![rec("a", Some(GOLDEN_INPUT), Some("[3, 1, 0]"), "x"), rec("b", Some(GOLDEN_INPUT), Some("[3, 1, 0]"), "y")];
    let (kept, log) = decontaminate(&dup, &bench);
    assert!(kept.is_empty());
    assert_eq!(log.len(), 2);

    // Same input, different output is not the same pair.
    let (kept, _) = decontaminate(&[rec("c", Some(GOLDEN_INPUT), Some("[3, 1]"), "x")], &bench);
    assert_eq!(kept.len(), 1);
}

proptest! {
    #[test]
    fn decontamination_is_idempotent(picks in prop::collection::vec((0usize..4, 0usize..4), 0..20), bench in prop::collection::vec((0usize..4, 0usize..4), 0..4)) {
        let ins = ["(1,)", "(2,)", "([],)", "('a',)"];
        let outs = ["1", "2", "[]", "'a'"];
        let data: Vec<DatasetRecord> = picks.iter().enumerate()
            .map(|(k, (i, o))| rec(&k.to_string(), Some(ins[*i]), Some(outs[*o]), ""))
            .collect();
        let bench: Vec<BenchmarkPair> = bench.iter().map(|(i, o)| BenchmarkPair::canonical(ins[*i], outs[*o])).collect();
        let (kept, log) = decontaminate(&data, &bench);
        prop_assert_eq!(kept.len() + log.len(), data.len());
        let (again, log2) = decontaminate(&kept, &bench);
        prop_assert_eq!(again, kept);
        prop_assert!(log2.is_empty());
    }
}

#[test]
fn error_table_examples() {
    let t = error_stats(["NameError", "TypeError", "NameError"]);
    assert_eq!(t.rows, vec![("NameError".to_string(), 2), ("TypeError".to_string(), 1)]);
    assert_eq!(t.total(), 3);
    assert_eq!(t.render(), "Error Type  #Cases\nNameError   2\nTypeError   1\n");
    let e = error_stats([]);
    assert!(e.rows.is_empty());
    assert_eq!(e.render(), "");
}

#[test]
fn error_table_matches_recount_of_rejected_inputs() {
    with_big_stack(|| {
        let policy = MutationPolicy::with_seed(0);
        for spec in specs().iter().filter(|s| SUBSET.contains(&s.id.as_str()) || s.id == "safe_divide") {
            let p = spec.program().unwrap();
            let c = expand(&p, &spec.inputs().unwrap(), &Goal::size(20), &policy, Limits::default(), None).unwrap();
            let table = error_stats(c.rejections.iter().map(|(_, k)| k.name()));
            let mut tally: BTreeMap<String, usize> = BTreeMap::new();
            for (text, _) in &c.rejections {
                match validate(&p, &parse_input_literal(text).unwrap(), Limits::default()) {
                    Validation::Rejected(k) => *tally.entry(k.name().to_string()).or_default() += 1,
                    Validation::Accepted(_) => panic!("{}: {text} was logged as rejected", spec.id),
                }
            }
            let rows: BTreeMap<String, usize> = table.rows.iter().cloned().collect();
            assert_eq!(rows, tally, "{}", spec.id);
            assert_eq!(table.total(), c.rejections.len());
        }
    });
}

#[test]
fn zero_eligible_programs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        ("rand", "import random\n\ndef f():\n    return random.random()\n"),
        ("io", "def f(path):\n    return open(path).read()\n"),
        ("syntax", "def f(:\n    return 1\n"),
    ];
    let specs: Vec<ProblemSpec> = bad
        .iter()
        .map(|(id, src)| ProblemSpec { id: id.to_string(), prompt: "p".into(), source: src.to_string(), entry: None, corpus: vec!["()".into()] })
        .collect();
    jsonl::write(&dir.path().join("programs.jsonl"), &specs).unwrap();
    let cfg = BuildConfig::from_json(r#"{"programs": "programs.jsonl", "out_dir": "out"}"#, dir.path()).unwrap();
    let out = with_big_stack(|| build_dataset(&cfg)).unwrap();
    let m = &out.manifest;
    assert_eq!((m.programs.total, m.programs.eligible, m.programs.rejected), (3, 0, 3));
    assert_eq!(m.rejection_breakdown.values().sum::<usize>(), 3);
    assert_eq!(m.rejection_breakdown.get("SyntaxError"), Some(&1));
    assert_eq!(m.rejections.iter().find(|r| r.program_id == "syntax").unwrap().stage, "parse");
    for k in RecordKind::ALL {
        let text = std::fs::read_to_string(dir.path().join("out").join(format!("{}.jsonl", k.name()))).unwrap();
        assert_eq!(text, "");
        assert_eq!(m.counts[k.name()], 0);
    }
}

#[test]
fn subset_build_counts_verify_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = subset_config(dir.path(), &SUBSET, "a");
    let out = with_big_stack(|| build_dataset(&cfg)).unwrap();
    let m = &out.manifest;
    assert_eq!(m.programs.eligible, SUBSET.len());
    let on_disk: Manifest = serde_json::from_str(&std::fs::read_to_string(cfg.out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(&on_disk, m);
    for (kind, file) in &m.files {
        let n = std::fs::read_to_string(cfg.out_dir.join(file)).unwrap().lines().count();
        assert_eq!(m.counts[kind], n, "{kind}");
        assert!(n > 0, "{kind}");
    }

    // Every record passes its check again, starting from the stored text.
    let programs: BTreeMap<String, _> = specs().into_iter().map(|s| (s.id.clone(), s.program().unwrap())).collect();
    with_big_stack(|| {
        for kind in RecordKind::ALL {
            let recs: Vec<DatasetRecord> = jsonl::read(&cfg.out_dir.join(format!("{}.jsonl", kind.name()))).unwrap();
            for r in &recs {
                assert!(r.has_valid_prefix(), "{}", r.id);
                let p = &programs[&r.program_id];
                match kind {
                    RecordKind::ForwardMonologue => {
                        let i = parse_input_literal(r.input.as_ref().unwrap()).unwrap();
                        assert!(verify_forward(p, &i, &r.text).is_accept(), "{}", r.id);
                    }
                    RecordKind::BackwardMonologue => {
                        let want = parse_value_literal(r.output.as_ref().unwrap()).unwrap();
                        assert!(verify_backward(p, &r.text, &want).is_accept(), "{}", r.id);
                    }
                    RecordKind::DebugRefine => {
                        let i = parse_input_literal(r.input.as_ref().unwrap()).unwrap();
                        assert!(verify_forward(p, &i, r.output.as_ref().unwrap()).is_accept(), "{}", r.id);
                        assert!(r.text.contains("[Refined]"), "{}", r.id);
                    }
                    RecordKind::Nl2code => assert!(r.input.is_none()),
                }
            }
        }
    });

    let cfg_b = subset_config(dir.path(), &SUBSET, "b");
    with_big_stack(|| build_dataset(&cfg_b)).unwrap();
    for f in m.files.values().chain(std::iter::once(&"manifest.json".to_string())) {
        let a = std::fs::read(cfg.out_dir.join(f)).unwrap();
        let b = std::fs::read(cfg_b.out_dir.join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let all = specs();
    let subset: Vec<ProblemSpec> = all.into_iter().filter(|s| SUBSET.contains(&s.id.as_str())).collect();
    let base = tempfile::tempdir().unwrap();
    let mut cfg = subset_config(base.path(), &SUBSET, "x");
    let (one, four) = with_big_stack(|| {
        cfg.workers = 1;
        let one = build_records(&cfg, &subset, &[]);
        cfg.workers = 4;
        let four = build_records(&cfg, &subset, &[]);
        (one, four)
    });
    assert_eq!(one.records, four.records);
    assert_eq!(one.manifest, four.manifest);
}

#[test]
fn invalid_configs() {
    let base = Path::new("/tmp");
    for text in [
        r#"{"programs": "p", "out_dir": "o", "bogus": 1}"#,
        r#"{"programs": "p", "out_dir": "o", "goal": {"target_size": 0}}"#,
        r#"{"programs": "p", "out_dir": "o", "kinds": []}"#,
        r#"{"programs": "p", "out_dir": "o", "kinds": ["scratchpad"]}"#,
        r#"{"programs": "p", "out_dir": "o", "truncation": {"threshold": 1}}"#,
        r#"{"out_dir": "o"}"#,
    ] {
        assert!(BuildConfig::from_json(text, base).is_err(), "{text}");
    }
    let ok = BuildConfig::from_json(r#"{"programs": "p", "out_dir": "o"}"#, base).unwrap();
    assert_eq!(ok.programs, base.join("p"));
    assert_eq!(ok.kinds, RecordKind::ALL.to_vec());
}
