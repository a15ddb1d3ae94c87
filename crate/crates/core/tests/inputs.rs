use proptest::prelude::*;
use semtrace_core::inputs::*;
use semtrace_core::tracer::{repr, ErrorKind, Limits, Value};
use semtrace_core::Program;

const GOLDEN: &str = include_str!("fixtures/golden/unique_sorted_indices.py");

fn golden() -> Program {
    Program::parse_eligible("golden", GOLDEN, None).unwrap()
}

fn tag(v: &Value) -> &'static str {
    v.type_name()
}

#[test]
fn literal_argument_lists() {
    let t = parse_input_literal("([10.5, 8.2, 10.5, 7.1, 8.2])").unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(repr(&t.positional[0]), "[10.5, 8.2, 10.5, 7.1, 8.2]");
    assert_eq!(t.canonical_text, "([10.5, 8.2, 10.5, 7.1, 8.2],)");

    let t = parse_input_literal(r#"(1, "a", {2: [3]})"#).unwrap();
    let tags: Vec<_> = t.positional.iter().map(tag).collect();
    assert_eq!(tags, vec!["int", "str", "dict"]);

    assert_eq!(parse_input_literal("((1, 2))").unwrap().len(), 1);
    assert_eq!(parse_input_literal("(1, 2)").unwrap().len(), 2);
    assert_eq!(parse_input_literal("()").unwrap().len(), 0);
    assert_eq!(parse_input_literal("((),)").unwrap().canonical_text, "((),)");
    assert_eq!(parse_input_literal("-3, 2.5").unwrap().canonical_text, "(-3, 2.5)");
    assert_eq!(parse_input_literal("(set(), {1, 1}, None, True)").unwrap().canonical_text, "(set(), {1}, None, True)");
}

#[test]
fn non_literals_are_rejected_with_position() {
    let e = parse_input_literal("(f(1),)").unwrap_err();
    assert_eq!(e.position, 1);
    let e = parse_input_literal("(1, x)").unwrap_err();
    assert_eq!(e.position, 4);
    assert!(parse_input_literal("(1 + 2,)").is_err());
    assert!(parse_input_literal("(a=1)").is_err());
    assert!(parse_input_literal("([1,)").is_err());
}

#[test]
fn mutation_preserves_tags_and_changes_value() {
    let base = parse_input_literal("([10.5, 8.2, 10.5, 7.1, 8.2])").unwrap();
    let m = mutate(&base, &MutationPolicy::with_seed(1), "golden", 1);
    assert_ne!(m.canonical_text, base.canonical_text);
    let Value::List(items) = &m.positional[0] else { panic!("tag changed") };
    assert!(items.borrow().iter().all(|v| matches!(v, Value::Float(_))));
    let again = mutate(&base, &MutationPolicy::with_seed(1), "golden", 1);
    assert_eq!(again.canonical_text, m.canonical_text);
}

#[test]
fn integer_mutation_reachable_set() {
    let base = parse_input_literal("(5,)").unwrap();
    let policy = MutationPolicy::with_seed(7);
    let allowed = ["2", "3", "4", "6", "7", "8", "-5", "0"];
    let mut hit = std::collections::BTreeSet::new();
    for round in 0..400 {
        let m = mutate(&base, &policy, "p", round);
        let r = repr(&m.positional[0]);
        assert!(allowed.contains(&r.as_str()), "{r}");
        hit.insert(r);
    }
    assert_eq!(hit.len(), allowed.len());
}

#[test]
fn empty_tuple_mutation() {
    let base = parse_input_literal("((),)").unwrap();
    let m = mutate(&base, &MutationPolicy::default(), "p", 3);
    assert!(m.canonical_text == "((),)" || m.canonical_text == "((0,),)", "{}", m.canonical_text);
}

#[test]
fn validation_verdicts() {
    let p = golden();
    match validate(&p, &parse_input_literal("([10.5, 8.2, 10.5, 7.1, 8.2])").unwrap(), Limits::default()) {
        Validation::Accepted(t) => assert_eq!(repr(t.outcome.value().unwrap()), "[3, 1, 0]"),
        v => panic!("{v:?}"),
    }
    // One string element sorts fine and indexes fine.
    assert!(validate(&p, &parse_input_literal(r#"(["a"],)"#).unwrap(), Limits::default()).is_accepted());
    match validate(&p, &parse_input_literal(r#"(["a", 1.0],)"#).unwrap(), Limits::default()) {
        Validation::Rejected(k) => assert_eq!(k, ErrorKind::TypeError),
        v => panic!("{v:?}"),
    }
    let looping = Program::parse("l", "def f(n):\n    while n > 0:\n        n = n + 1\n    return n\n", None).unwrap();
    match validate(&looping, &parse_input_literal("(1,)").unwrap(), Limits::default()) {
        Validation::Rejected(k) => assert_eq!(k, ErrorKind::StepLimitExceeded),
        v => panic!("{v:?}"),
    }
}

#[test]
fn expansion_of_golden_program() {
    let p = golden();
    let seeds = vec![parse_input_literal("([10.5, 8.2, 10.5, 7.1, 8.2])").unwrap()];
    let policy = MutationPolicy::with_seed(0);
    let c = expand(&p, &seeds, &Goal::size(20), &policy, Limits::default(), None).unwrap();
    assert_eq!(c.len(), 20);
    assert_eq!(c.coverage.line_rate, 1.0);
    assert!(c.shortfall.is_none());
    let mut keys: Vec<_> = c.inputs().map(|i| i.canonical_text.clone()).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 20);
    for m in &c.members {
        assert!(validate(&p, &m.input, Limits::default()).is_accepted());
    }
    let again = expand(&p, &seeds, &Goal::size(20), &policy, Limits::default(), None).unwrap();
    let a: Vec<_> = c.inputs().map(|i| i.canonical_text.clone()).collect();
    let b: Vec<_> = again.inputs().map(|i| i.canonical_text.clone()).collect();
    assert_eq!(a, b);
}

#[test]
fn unreachable_branch_leaves_shortfall() {
    let src = "def f(x):\n    if x == 123456:\n        return 1\n    return 0\n";
    let p = Program::parse("u", src, None).unwrap();
    let seeds = vec![parse_input_literal("(1,)").unwrap()];
    let goal = Goal { target_size: 1000, min_size: 1, line_goal: Some(1.0), branch_goal: Some(1.0) };
    let policy = MutationPolicy { max_rounds: 4, ..MutationPolicy::default() };
    let c = expand(&p, &seeds, &goal, &policy, Limits::default(), None).unwrap();
    let s = c.shortfall.expect("budget exhausted");
    assert!(s.branch_rate < 1.0);
    assert!(c.attempts <= 4 * policy.max_attempts_per_round + 1);
}

#[test]
fn no_valid_seed() {
    let p = golden();
    let seeds = vec![parse_input_literal("(1,)").unwrap(), parse_input_literal("(None,)").unwrap()];
    let r = expand(&p, &seeds, &Goal::size(5), &MutationPolicy::default(), Limits::default(), None);
    assert_eq!(r.unwrap_err(), ExpandError::NoValidSeed(2));
}

struct Scripted(Vec<String>);

impl SuggesterClient for Scripted {
    fn suggest(&mut self, _: &SuggestRequest) -> Result<Vec<String>, String> {
        Ok(std::mem::take(&mut self.0))
    }
}

#[test]
fn suggester_candidates_are_validated() {
    let p = golden();
    let seeds = vec![parse_input_literal("([1.0],)").unwrap()];
    let mut client = Scripted(vec!["([2.0, 2.0],)".into(), "(oops".into(), "(5,)".into(), "([1.0],)".into()]);
    let policy = MutationPolicy { max_attempts_per_round: 1, ..MutationPolicy::default() };
    let c = expand(&p, &seeds, &Goal::size(10), &policy, Limits::default(), Some(&mut client)).unwrap();
    let from_client: Vec<_> =
        c.members.iter().filter(|m| m.source == MemberSource::Suggester).map(|m| m.input.canonical_text.clone()).collect();
    assert_eq!(from_client, vec!["([2.0, 2.0],)"]);
    assert!(c.rejections.iter().any(|(t, k)| t == "(5,)" && *k == ErrorKind::TypeError));
}

proptest! {
    #[test]
    fn canonical_text_round_trips(xs in proptest::collection::vec(-1000i64..1000, 0..6), s in "[a-z ]{0,6}", f in -1e6f64..1e6) {
        let lit = format!("({xs:?}, {s:?}, {f:?})");
        let t = parse_input_literal(&lit).unwrap();
        let back = parse_input_literal(&t.canonical_text).unwrap();
        prop_assert_eq!(&back.canonical_text, &t.canonical_text);
    }

    #[test]
    fn mutation_preserves_argument_tags(seed in 0u64..1000, round in 0u64..1000) {
        let base = parse_input_literal(r#"(3, 2.5, "abc", [1, 2], (1, "x"), {"k": 1}, {4, 5}, True, None)"#).unwrap();
        let m = mutate(&base, &MutationPolicy::with_seed(seed), "p", round);
        prop_assert_eq!(m.len(), base.len());
        for (a, b) in base.positional.iter().zip(&m.positional) {
            prop_assert_eq!(a.type_name(), b.type_name());
        }
    }

    #[test]
    fn corpus_coverage_is_monotone(seed in 0u64..50) {
        let p = golden();
        let seeds = vec![parse_input_literal("([3.0, 1.0],)").unwrap()];
        let c = expand(&p, &seeds, &Goal::size(6), &MutationPolicy::with_seed(seed), Limits::default(), None).unwrap();
        let mut acc = semtrace_core::tracer::Covered::default();
        let mut last = 0.0;
        for m in &c.members {
            acc.merge(&m.covered);
            let r = acc.stats(&p.tree, Some(&p.entry)).line_rate;
            prop_assert!(r >= last);
            last = r;
        }
    }
}
