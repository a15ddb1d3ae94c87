use proptest::prelude::*;
use semtrace_core::inputs::{parse_input_literal, parse_value_literal, InputTuple, MutationPolicy};
use semtrace_core::tracer::{repr, ErrorKind, Limits};
use semtrace_core::verify::*;
use semtrace_core::Program;

const GOLDEN: &str = include_str!("fixtures/golden/unique_sorted_indices.py");
const GOLDEN_INPUT: &str = "([10.5, 8.2, 10.5, 7.1, 8.2])";

fn golden() -> Program {
    Program::parse_eligible("golden", GOLDEN, None).unwrap()
}

fn lit(s: &str) -> InputTuple {
    parse_input_literal(s).unwrap()
}

#[test]
fn forward_verdicts() {
    let p = golden();
    let i = lit(GOLDEN_INPUT);
    assert_eq!(verify_forward(&p, &i, "[3, 1, 0]"), Verdict::Accept);
    assert_eq!(verify_forward(&p, &i, "[3, 1, 0 ]"), Verdict::Accept);
    assert_eq!(verify_forward(&p, &i, "[ANSWER]\nassert unique_sorted_indices([10.5]) == [3,1,0]\n[/ANSWER]"), Verdict::Accept);
    match verify_forward(&p, &i, "[3, 1]") {
        Verdict::Reject { expected, .. } => assert_eq!(expected, "[3, 1, 0]"),
        v => panic!("{v:?}"),
    }
    assert!(matches!(verify_forward(&p, &i, "[3, 1,"), Verdict::Reject { actual: Actual::Unparsable(_), .. }));
    // Tags must agree exactly.
    assert!(!verify_forward(&p, &i, "[3.0, 1, 0]").is_accept());
}

#[test]
fn backward_verdicts() {
    let p = golden();
    let out = parse_value_literal("[3, 1, 0]").unwrap();
    assert_eq!(verify_backward(&p, GOLDEN_INPUT, &out), Verdict::Accept);
    assert_eq!(verify_backward(&p, "unique_sorted_indices([10.5, 8.2, 10.5, 7.1, 8.2])", &out), Verdict::Accept);
    let permuted = verify_backward(&p, "([8.2, 10.5, 7.1, 10.5, 8.2])", &out);
    // Indices of first occurrences: 7.1 at 2, 8.2 at 0, 10.5 at 1.
    assert_eq!(permuted, Verdict::Reject { expected: "[3, 1, 0]".into(), actual: Actual::Value("[2, 0, 1]".into()) });
    let list_program = Program::parse("l", "def f(xs):\n    return sorted(xs)\n", None).unwrap();
    assert_eq!(
        verify_backward(&list_program, "(1,)", &parse_value_literal("[1]").unwrap()),
        Verdict::Reject { expected: "[1]".into(), actual: Actual::Error(ErrorKind::TypeError) }
    );
}

const MUTANT: &str = "from typing import List\n\n\ndef unique_sorted_indices(energies: List[float]) -> List[int]:\n    energy_dict = {}\n    for idx, energy in enumerate(energies):\n        energy_dict.setdefault(energy, idx)\n    sorted_unique_energies = sorted(energies)\n    unique_sorted_indices = [energy_dict[energy] for energy in sorted_unique_energies]\n    return unique_sorted_indices\n";

#[test]
fn differential_testing() {
    let p = golden();
    let corpus = vec![lit("([1.0, 2.0],)"), lit(GOLDEN_INPUT)];
    let same = differential_test(&p, &p, &corpus);
    assert_eq!(same.overall, Overall::EquivalentOnCorpus);
    let m = Program::parse("m", MUTANT, None).unwrap();
    let r = differential_test(&m, &p, &corpus);
    assert_eq!(r.overall, Overall::Buggy);
    assert_eq!(r.first_failure().unwrap().0.canonical_text, lit(GOLDEN_INPUT).canonical_text);

    let div = Program::parse("d", "def f(x):\n    return 10 // x\n", None).unwrap();
    let safe = Program::parse("s", "def f(x):\n    return 10 // x if x else 0\n", None).unwrap();
    let c = vec![lit("(2,)"), lit("(0,)")];
    let r = differential_test(&div, &safe, &c);
    assert_eq!(r.results[1].1, DiffResult::CandidateError(ErrorKind::ZeroDivisionError));
    let swapped = differential_test(&safe, &div, &c);
    assert_eq!(swapped.results[1].1, DiffResult::ReferenceError(ErrorKind::ZeroDivisionError));
}

#[test]
fn stdout_difference_is_only_a_warning() {
    let a = Program::parse("a", "def f(x):\n    print(x)\n    return x\n", None).unwrap();
    let b = Program::parse("b", "def f(x):\n    return x\n", None).unwrap();
    let r = differential_test(&a, &b, &[lit("(1,)")]);
    assert_eq!(r.overall, Overall::EquivalentOnCorpus);
    assert_eq!(r.stdout_divergence, vec![0]);
}

#[test]
fn witness_search() {
    let p = golden();
    let out = parse_value_literal("[3, 1, 0]").unwrap();
    let policy = MutationPolicy::default();
    let w = find_witness_input(&p, &out, &[lit("([1.0],)"), lit(GOLDEN_INPUT)], &policy, 0).unwrap();
    assert_eq!(w.canonical_text, lit(GOLDEN_INPUT).canonical_text);

    let id = Program::parse("id", "def f(x):\n    return x\n", None).unwrap();
    let w = find_witness_input(&id, &parse_value_literal("42").unwrap(), &[lit("(7,)")], &policy, 2000).unwrap();
    assert_eq!(repr(&w.positional[0]), "42");
    assert!(verify_backward(&id, &w.canonical_text, &parse_value_literal("42").unwrap()).is_accept());

    let zero = Program::parse("z", "def f(x):\n    return 0\n", None).unwrap();
    assert!(find_witness_input(&zero, &parse_value_literal("1").unwrap(), &[lit("(7,)")], &policy, 200).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accepts_exactly_the_true_output(xs in proptest::collection::vec(-20i64..20, 0..6), bump in 1i64..5) {
        let p = Program::parse("s", "def f(xs):\n    return [x * 2 for x in sorted(set(xs))]\n", None).unwrap();
        let input = lit(&format!("({xs:?},)"));
        let truth = repr(p.run(&input, Limits::default()).outcome.value().unwrap());
        prop_assert!(verify_forward(&p, &input, &truth).is_accept());
        let wrong = format!("{truth}[:-1] + [{bump}]");
        prop_assert!(!verify_forward(&p, &input, &wrong).is_accept());
        let mut v: Vec<i64> = xs.clone();
        v.push(bump * 1000);
        let other = format!("{:?}", v);
        prop_assert!(!verify_forward(&p, &input, &other).is_accept() || truth == other);
    }

    #[test]
    fn accept_is_idempotent(n in 0i64..30) {
        let p = Program::parse("t", "def f(n):\n    return sum(range(n))\n", None).unwrap();
        let input = lit(&format!("({n},)"));
        let pred = format!("{}", n * (n - 1) / 2);
        let first = verify_forward(&p, &input, &pred);
        prop_assert!(first.is_accept());
        prop_assert_eq!(recheck_forward(&p.source, &p.entry, &input, &pred).unwrap(), first);
    }
}
