use proptest::prelude::*;
use semtrace_core::formats::*;
use semtrace_core::inputs::parse_input_literal;
use semtrace_core::tracer::{repr, Limits, Trace};
use semtrace_core::Program;

const GOLDEN: &str = include_str!("fixtures/golden/unique_sorted_indices.py");
const GOLDEN_INPUT: &str = "([10.5, 8.2, 10.5, 7.1, 8.2])";

fn run(src: &str, args: &str) -> (Program, Trace) {
    let p = Program::parse("t", src, None).unwrap();
    let t = p.run(&parse_input_literal(args).unwrap(), Limits::default());
    (p, t)
}

#[test]
fn golden_scratchpad_is_byte_exact() {
    let (p, t) = run(GOLDEN, GOLDEN_INPUT);
    assert_eq!(to_scratchpad(&p, &t).unwrap().text, include_str!("fixtures/golden/scratchpad.txt"));
}

#[test]
fn golden_next_is_byte_exact() {
    let (p, t) = run(GOLDEN, GOLDEN_INPUT);
    assert_eq!(to_next(&p, &t, TruncationRule::default()).unwrap().text, include_str!("fixtures/golden/next.txt"));
}

#[test]
fn golden_concise_is_byte_exact() {
    let (p, t) = run(GOLDEN, GOLDEN_INPUT);
    assert_eq!(to_concise(&p, &t).unwrap().text, include_str!("fixtures/golden/concise.txt"));
}

#[test]
fn minimal_program_listings() {
    let (p, t) = run("def f():\n    return 0\n", "()");
    assert_eq!(to_scratchpad(&p, &t).unwrap().text, "def f(): # [INPUT] {} [/INPUT]\n    return 0 # [OUTPUT] 0 [/OUTPUT]\n");
    assert_eq!(to_concise(&p, &t).unwrap().text, "\"\"\"\n[L1] [INPUT] {} [/INPUT] [/L1]\n[L2] [OUTPUT] 0 [/OUTPUT] [/L2]\n\"\"\"\n");
}

#[test]
fn failures_are_not_serializable() {
    let (p, t) = run("def f(x):\n    return 1 / x\n", "(0,)");
    assert!(matches!(to_scratchpad(&p, &t), Err(FormatError::UnsupportedTrace(_))));
    assert!(matches!(to_next(&p, &t, TruncationRule::default()), Err(FormatError::UnsupportedTrace(_))));
    assert!(matches!(to_concise(&p, &t), Err(FormatError::UnsupportedTrace(_))));
    assert!(matches!(forward_monologue(&p, &t), Err(FormatError::UnsupportedTrace(_))));
}

#[test]
fn next_threshold_boundary() {
    let src = "def f(n):\n    s = 0\n    for i in range(n):\n        s += 1\n    return s\n";
    let (p, t) = run(src, "(3,)");
    let text = to_next(&p, &t, TruncationRule::default()).unwrap().text;
    assert!(!text.contains(" ... "));
    let (p, t) = run(src, "(4,)");
    let text = to_next(&p, &t, TruncationRule::default()).unwrap().text;
    let l3 = text.lines().nth(2).unwrap();
    assert!(l3.ends_with(r#"[STATE-1] {"i": 0} [/STATE-1][STATE-3] {"i": 1} [/STATE-3] ... [STATE-7] {"i": 3} [/STATE-7]"#), "{l3}");
}

#[test]
fn straight_line_next_numbers_like_scratchpad() {
    let src = "def f(a):\n    b = a + 1\n    c = b * 2\n    return c\n";
    let (p, t) = run(src, "(1,)");
    let next = to_next(&p, &t, TruncationRule::default()).unwrap().text;
    let sp = to_scratchpad(&p, &t).unwrap().text;
    assert!(next.contains("[STATE-0] {\"b\": 2} [/STATE-0]"));
    assert!(next.contains("[STATE-1] {\"c\": 4} [/STATE-1]"));
    assert_eq!(next.replace("STATE-0", "STATE").replace("STATE-1", "STATE"), sp);
}

#[test]
fn unchanged_line_has_no_state_comment() {
    let src = "def f(xs):\n    out = []\n    for x in xs:\n        out.sort()\n    return out\n";
    let (p, t) = run(src, "([1, 2],)");
    let text = to_scratchpad(&p, &t).unwrap().text;
    assert_eq!(text.lines().nth(3).unwrap(), "        out.sort()");
}

#[test]
fn concise_block_count_matches_events() {
    let src = "def f(n):\n    t = 0\n    for i in range(n):\n        for j in range(i):\n            t += j\n    return t\n";
    let (p, t) = run(src, "(4,)");
    let text = to_concise(&p, &t).unwrap().text;
    assert_eq!(text.lines().count() - 2, t.top_events().count());
}

#[test]
fn forward_monologue_golden() {
    let (p, t) = run(GOLDEN, GOLDEN_INPUT);
    let d = forward_monologue(&p, &t).unwrap();
    assert_eq!(extract_answer(&d.text), Some("[3, 1, 0]"));
    assert!(d.text.contains("Line 7: `for idx, energy in enumerate(energies):` starts iteration 1 with idx = 0 and energy = 10.5."));
    assert!(d.text.contains("Line 8: `energy_dict.setdefault(energy, idx)` runs and leaves every variable unchanged."));
}

#[test]
fn forward_monologue_untaken_branch() {
    let src = "def f(x):\n    if x > 0:\n        y = 1\n    else:\n        y = 2\n    return y\n";
    let (p, t) = run(src, "(5,)");
    let d = forward_monologue(&p, &t).unwrap();
    assert!(d.text.contains("Line 5 (`y = 2`) is not executed."), "{}", d.text);
    assert_eq!(extract_answer(&d.text), Some("1"));
}

#[test]
fn forward_monologue_sentence_count() {
    let src = "def f(a):\n    b = a + 1\n    c = b * 2\n    return c\n";
    let (p, t) = run(src, "(1,)");
    let d = forward_monologue(&p, &t).unwrap();
    assert_eq!(d.text.lines().filter(|l| l.starts_with("Line ")).count(), 3);
}

#[test]
fn forward_monologue_caps_long_loops() {
    let src = "def f(n):\n    s = 0\n    for i in range(n):\n        s += i\n    return s\n";
    let (p, t) = run(src, "(40,)");
    let d = forward_monologue(&p, &t).unwrap();
    let iters = d.text.lines().filter(|l| l.contains("starts iteration")).count();
    assert_eq!(iters, 16);
    assert!(d.text.contains("Iterations 17 to 40 of the loop on line 3 proceed likewise, after which i = 39 and s = 780."), "{}", d.text);
    assert!(d.text.contains("has no items left"));
    assert_eq!(extract_answer(&d.text), Some("780"));
}

#[test]
fn constraint_facts_for_golden() {
    let (p, _) = run(GOLDEN, GOLDEN_INPUT);
    let w = parse_input_literal(GOLDEN_INPUT).unwrap();
    let out = parse_input_literal("([3, 1, 0])").unwrap().positional[0].clone();
    let facts = abstract_constraints(&p, &out, &w).unwrap();
    let text: Vec<String> = facts.facts.iter().map(|f| f.describe()).collect();
    assert!(text.contains(&"energies is a list of floats".to_string()), "{text:?}");
    assert!(text.contains(&"energies contains two 10.5s, two 8.2s, and one 7.1, in some order".to_string()), "{text:?}");
    assert!(facts.holds(&w));
    let d = backward_monologue(&p, &out, &facts, &w).unwrap();
    assert_eq!(extract_answer(&d.text), Some("unique_sorted_indices([10.5, 8.2, 10.5, 7.1, 8.2])"));
}

#[test]
fn constraint_facts_identity_and_constant() {
    let (p, _) = run("def f(x):\n    return x\n", "(7,)");
    let w = parse_input_literal("(7,)").unwrap();
    let facts = abstract_constraints(&p, &w.positional[0], &w).unwrap();
    assert!(facts.facts.iter().any(|f| f.describe() == "x equals 7"));
    let sw = parse_input_literal("('x',)").unwrap();
    let sfacts = abstract_constraints(&p, &sw.positional[0], &sw).unwrap();
    let d = backward_monologue(&p, &sw.positional[0], &sfacts, &sw).unwrap();
    assert_eq!(extract_answer(&d.text), Some("f('x')"));

    let (c, _) = run("def g(x):\n    return 0\n", "(7,)");
    let zero = parse_input_literal("(0,)").unwrap().positional[0].clone();
    let facts = abstract_constraints(&c, &zero, &w).unwrap();
    assert!(facts.output_independent);
    assert_eq!(facts.facts.len(), 2);

    let one = parse_input_literal("(1,)").unwrap().positional[0].clone();
    assert!(matches!(abstract_constraints(&c, &one, &w), Err(FormatError::WitnessMismatch(_))));
}

#[test]
fn prefixes_are_verbatim() {
    let fixtures = [
        (TaskPrefix::NL2Code, include_str!("fixtures/prefixes/nl2code.txt")),
        (TaskPrefix::SimulateExecution, include_str!("fixtures/prefixes/simulate_execution.txt")),
        (TaskPrefix::DeduceConstraints, include_str!("fixtures/prefixes/deduce_constraints.txt")),
        (TaskPrefix::DebugRefine, include_str!("fixtures/prefixes/debug_refine.txt")),
    ];
    for (t, want) in fixtures {
        assert_eq!(t.template(), want);
    }
    assert!(with_prefix(TaskPrefix::SimulateExecution, "p", "c").starts_with("Simulate the Execution: You are given"));
    assert!(with_prefix(TaskPrefix::DeduceConstraints, "p", "c").starts_with("Deduce the Semantic Constraints: You are given"));
    let empty = with_prefix(TaskPrefix::NL2Code, "", "");
    assert!(empty.contains("<NL_Description>\n\n\n<Code>\n"));
    assert!(with_prefix(TaskPrefix::DebugRefine, "{completion}", "X").contains("{completion}\nX"));
}

#[test]
fn extractors_round_trip_golden() {
    let (p, t) = run(GOLDEN, GOLDEN_INPUT);
    for text in [
        to_scratchpad(&p, &t).unwrap().text,
        to_next(&p, &t, TruncationRule::default()).unwrap().text,
        to_concise(&p, &t).unwrap().text,
    ] {
        assert_eq!(extract_input(&text), Some(t.input_json().as_str()));
        assert_eq!(extract_output(&text), Some("[3, 1, 0]"));
    }
    assert_eq!(repr(t.outcome.value().unwrap()), "[3, 1, 0]");
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn next_truncation_keeps_first_second_last(bodies in proptest::collection::vec(any::<u8>(), 1..4), n in 0usize..9) {
        let src = loop_program(&bodies);
        let (p, t) = run(&src, &format!("({n},)"));
        let text = to_next(&p, &t, TruncationRule::default()).unwrap().text;
        // Expected numbering from the raw events.
        let mut k = 0usize;
        let mut per_line: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
        for e in t.top_events() {
            if e.kind == semtrace_core::tracer::EventKind::Entry || e.changed.is_empty() { continue; }
            per_line.entry(e.line).or_default().push(k);
            k += 1;
        }
        let src_lines: Vec<&str> = text.lines().collect();
        for (line, ks) in per_line {
            let row = src_lines[line as usize - 1];
            let got: Vec<usize> = row.match_indices("[STATE-").filter_map(|(i, _)| {
                let rest = &row[i + 7..];
                rest[..rest.find(']').unwrap()].parse().ok()
            }).collect();
            let want: Vec<usize> = if ks.len() > 3 { vec![ks[0], ks[1], ks[ks.len() - 1]] } else { ks.clone() };
            prop_assert_eq!(got.len(), ks.len().min(3));
            prop_assert_eq!(got, want);
            prop_assert_eq!(row.contains(" ... "), ks.len() > 3);
        }
    }
}

