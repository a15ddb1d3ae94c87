use proptest::prelude::*;
use semtrace_core::formats::{extract_output, TruncationRule};
use semtrace_core::harness::*;
use semtrace_core::inputs::{parse_input_literal, InputTuple};
use semtrace_core::refinery::*;
use semtrace_core::tracer::repr;
use semtrace_core::{Problem, Program};

const GOLDEN: &str = include_str!("fixtures/golden/unique_sorted_indices.py");
const GOLDEN_INPUT: &str = "([10.5, 8.2, 10.5, 7.1, 8.2])";
const NO_DEDUP: &str = "def unique_sorted_indices(energies):\n    energy_dict = {}\n    for idx, energy in enumerate(energies):\n        energy_dict.setdefault(energy, idx)\n    sorted_unique_energies = sorted(energies)\n    return [energy_dict[e] for e in sorted_unique_energies]\n";

fn lit(s: &str) -> InputTuple {
    parse_input_literal(s).unwrap()
}

fn golden_problem() -> Problem {
    Problem {
        id: "usi".into(),
        prompt: "Return the indices of the first occurrence of each distinct energy, ordered by energy.".into(),
        reference: Program::parse_eligible("usi", GOLDEN, None).unwrap(),
        corpus: vec![lit("([1.0, 2.0],)"), lit(GOLDEN_INPUT), lit("([],)")],
    }
}

const SUM_REF: &str = "def total(xs):\n    s = 0\n    for x in xs:\n        s += x\n    return s\n";
const SUM_OFF_BY_ONE: &str = "def total(xs):\n    s = 0\n    for i in range(len(xs) - 1):\n        s += xs[i]\n    return s\n";

fn sum_problem() -> Problem {
    Problem {
        id: "sum".into(),
        prompt: "Sum a list of integers.".into(),
        reference: Program::parse_eligible("sum", SUM_REF, None).unwrap(),
        corpus: vec![lit("([],)"), lit("([1, 2, 3],)"), lit("([5],)")],
    }
}

struct Scripted {
    replies: Vec<Result<String, String>>,
    calls: usize,
    prompts: Vec<String>,
}

impl Scripted {
    fn new(replies: Vec<&str>) -> Self {
        Scripted { replies: replies.into_iter().map(|r| Ok(r.to_string())).collect(), calls: 0, prompts: vec![] }
    }

    fn next(&mut self, prompt: &str) -> Result<String, String> {
        self.prompts.push(prompt.to_string());
        let r = self.replies[self.calls.min(self.replies.len() - 1)].clone();
        self.calls += 1;
        r
    }
}

impl ModelClient for Scripted {
    fn generate(&mut self, prompt: &str, _: &Decoding) -> Result<String, String> {
        self.next(prompt)
    }
    fn refine(&mut self, prompt: &str, _: &str, _: &str, _: &Decoding) -> Result<String, String> {
        self.next(prompt)
    }
}

#[test]
fn collect_buggy_records() {
    let problems = vec![sum_problem()];
    let (recs, skips) = collect_buggy(&problems, &mut Scripted::new(vec![SUM_REF]));
    assert!(recs.is_empty() && skips.is_empty());

    let (recs, _) = collect_buggy(&problems, &mut Scripted::new(vec![SUM_OFF_BY_ONE]));
    assert_eq!(recs.len(), 1);
    // Corpus order decides: [] agrees, [1, 2, 3] is the first failure.
    assert_eq!(recs[0].failing_input.canonical_text, "([1, 2, 3],)");
    assert_eq!(repr(&recs[0].expected_output), "6");

    let (recs, skips) = collect_buggy(&problems, &mut Scripted::new(vec!["def total(xs:\n    return"]));
    assert!(recs.is_empty());
    assert!(skips[0].reason.contains("SyntaxError"), "{:?}", skips);
}

#[test]
fn faulty_trace_of_wrong_result() {
    let m = Program::parse("m", NO_DEDUP, None).unwrap();
    let expected = parse_input_literal("([3, 1, 0],)").unwrap().positional[0].clone();
    let text = faulty_trace(&m, &lit(GOLDEN_INPUT), TruncationRule::default(), Some(&expected)).unwrap();
    assert!(text.contains("[EXPECTED] [3, 1, 0] [/EXPECTED]"), "{text}");
    assert_eq!(extract_output(&text), Some("[3, 1, 1, 0, 0]"));
}

#[test]
fn faulty_trace_truncates_long_lines() {
    let m = Program::parse("m", SUM_OFF_BY_ONE, None).unwrap();
    let text = faulty_trace(&m, &lit("([1, 2, 3, 4, 5, 6],)"), TruncationRule::default(), None).unwrap();
    let loop_line = text.lines().nth(2).unwrap();
    assert_eq!(loop_line.matches("[STATE-").count(), 3);
    assert!(loop_line.contains(" ... "));
}

#[test]
fn faulty_trace_of_failure() {
    let src = "def f(d, keys):\n    out = 0\n    for k in keys:\n        out += 1\n        out += d[k]\n    return out\n";
    let m = Program::parse("m", src, None).unwrap();
    let text = faulty_trace(&m, &lit("({'a': 1}, ['a', 'b'])"), TruncationRule::default(), None).unwrap();
    let l5 = text.lines().nth(4).unwrap();
    assert!(l5.ends_with("[EXCEPTION] KeyError: 'b' [/EXCEPTION]"), "{l5}");
    assert!(!text.contains("[OUTPUT]"));
}

#[test]
fn debug_samples() {
    let p = sum_problem();
    let mut rec = buggy_record(&p, SUM_OFF_BY_ONE).unwrap().unwrap();
    let prompt_only = assemble_debug_sample(&rec).unwrap();
    assert!(prompt_only.contains("<Faulty Trace>"));
    assert!(!prompt_only.contains("[Refined]\n"));

    let bad = attach_patch(&mut rec, &p, None, SUM_OFF_BY_ONE.into());
    assert!(!bad.passed);
    assert!(assemble_debug_sample(&rec).is_none());

    let good = attach_patch(&mut rec, &p, Some("The loop stops one element early.".into()), SUM_REF.into());
    assert!(good.passed && rec.verified);
    let text = assemble_debug_sample(&rec).unwrap();
    assert!(text.starts_with("Debug and Refine the Code:"));
    assert!(text.contains("<Faulty Trace>"));
    assert!(text.contains("[Refined]\ndef total(xs):"));
    assert!(text.ends_with("return s\n[/Refined]"));
}

#[test]
fn patch_verification() {
    let p = sum_problem();
    assert!(verify_patch(SUM_REF, &p.reference, &p.corpus).passed);
    assert!(!verify_patch(SUM_OFF_BY_ONE, &p.reference, &p.corpus).passed);
    // Right on the failing input only.
    let narrow = "def total(xs):\n    if xs == [1, 2, 3]:\n        return 6\n    return 0\n";
    let corpus = vec![lit("([1, 2, 3],)"), lit("([4],)")];
    assert!(!verify_patch(narrow, &p.reference, &corpus).passed);
    let check = verify_patch("def total(:", &p.reference, &corpus);
    assert!(!check.passed && check.reason.is_some());
}

#[test]
fn code_extraction() {
    assert_eq!(extract_code("x\n[Refined]\ndef f():\n    return 1\n[/Refined]"), "def f():\n    return 1");
    assert_eq!(extract_code("Here:\n```python\ndef f():\n    return 1\n```\n"), "def f():\n    return 1\n");
    assert_eq!(extract_code("def f():\n    return 1\n"), "def f():\n    return 1\n");
}

#[test]
fn episode_immediate_pass() {
    let mut c = Scripted::new(vec![SUM_REF]);
    let r = run_episode(&sum_problem(), &mut c, 5, &Schedule::default());
    assert_eq!(r.first_pass_round, Some(1));
    assert_eq!(r.rounds.len(), 1);
    assert_eq!(r.rounds[0].decoding, Decoding::greedy());
}

#[test]
fn episode_fix_at_round_two_sees_trace() {
    let mut c = Scripted::new(vec![SUM_OFF_BY_ONE, SUM_REF]);
    let r = run_episode(&sum_problem(), &mut c, 5, &Schedule::default());
    assert_eq!(r.first_pass_round, Some(2));
    let trace1 = r.rounds[0].faulty_trace.clone().unwrap();
    assert!(r.rounds[1].prompt.contains(&trace1));
    assert!(c.prompts[1].contains(&trace1));
    assert!(!c.prompts[0].contains("[STATE"));
    assert_eq!(r.rounds[1].decoding.mode, DecodingMode::TopP);
}

#[test]
fn episode_never_fixed_runs_five_rounds() {
    let mut c = Scripted::new(vec![SUM_OFF_BY_ONE]);
    let r = run_episode(&sum_problem(), &mut c, 5, &Schedule::default());
    assert_eq!(r.first_pass_round, None);
    assert_eq!(r.rounds.len(), 5);
    assert_eq!(c.calls, 5);
}

#[test]
fn episode_client_error_stops() {
    let mut c = Scripted { replies: vec![Ok(SUM_OFF_BY_ONE.into()), Err("boom".into())], calls: 0, prompts: vec![] };
    let r = run_episode(&sum_problem(), &mut c, 5, &Schedule::default());
    assert_eq!(r.rounds.len(), 2);
    assert_eq!(r.rounds[1].verdict, RoundVerdict::Fail("client-error: boom".into()));
    assert_eq!(c.calls, 2);
}

fn fake(first: Option<usize>) -> EpisodeResult {
    EpisodeResult { problem_id: "x".into(), rounds: vec![], first_pass_round: first }
}

#[test]
fn scores() {
    let all = vec![fake(Some(1)), fake(Some(1))];
    assert_eq!(score_curve(&all, 5), vec![1.0; 5]);
    let mixed = vec![fake(Some(1)), fake(Some(2)), fake(None)];
    assert_eq!(score_curve(&mixed, 5), vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
    assert_eq!(score(&[], 1), 0.0);
}

proptest! {
    #[test]
    fn score_is_monotone(firsts in proptest::collection::vec(proptest::option::of(1usize..6), 0..30)) {
        let rs: Vec<EpisodeResult> = firsts.into_iter().map(fake).collect();
        let curve = score_curve(&rs, 5);
        for w in curve.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }
}

#[test]
fn golden_episode_fix_at_round_three() {
    let mut c = Scripted::new(vec![NO_DEDUP, NO_DEDUP, GOLDEN]);
    let r = run_episode(&golden_problem(), &mut c, 5, &Schedule::default());
    assert_eq!(r.first_pass_round, Some(3));
    let curve = score_curve(&[r], 5);
    assert_eq!(curve, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
}
