use semtrace_core::subjectlang::*;

const GOLDEN: &str = include_str!("fixtures/golden/unique_sorted_indices.py");

fn tree(src: &str) -> SyntaxTree {
    parse(&SourceUnit::new(src)).expect("parses")
}

#[test]
fn golden_program_parses_with_expected_lines() {
    let t = tree(GOLDEN);
    let def = t.function_stmt("unique_sorted_indices").unwrap();
    assert_eq!(def.span.line, 5);
    assert_eq!(t.functions().count(), 1);
    let last = t.body.last().unwrap();
    assert!(matches!(last.kind, StmtKind::Assert { .. }));
    assert_eq!(last.span.line, 13);
    assert!(matches!(t.body[0].kind, StmtKind::TypingImport { .. }));
    assert_eq!(t.body[0].span.line, 2);
}

#[test]
fn empty_text_gives_empty_tree() {
    assert!(tree("").is_empty());
    assert!(tree("\n\n# only a comment\n").is_empty());
}

#[test]
fn malformed_header_is_syntax_error_at_line_one() {
    let err = parse(&SourceUnit::new("def f(:")).unwrap_err();
    assert!(matches!(err, ParseError::Syntax { line: 1, .. }), "{err:?}");
}

#[test]
fn unsupported_constructs_name_their_line() {
    let cases = [
        ("class A:\n    pass\n", 1, "class"),
        ("def f():\n    try:\n        pass\n    except E:\n        pass\n", 2, "exception"),
        ("def f():\n    with x as y:\n        pass\n", 2, "resource"),
        ("import os\n", 1, "os"),
        ("from math import sqrt\n", 1, "math"),
        ("def f():\n    x = 1\n    del x\n", 3, "del"),
    ];
    for (src, line, word) in cases {
        match parse(&SourceUnit::new(src)) {
            Err(ParseError::Unsupported { line: l, construct }) => {
                assert_eq!(l, line, "{src}");
                assert!(construct.contains(word), "{construct} should mention {word}");
            }
            other => panic!("{src}: expected unsupported, got {other:?}"),
        }
    }
}

#[test]
fn source_unit_identity_and_partition() {
    let a = SourceUnit::new(GOLDEN);
    let b = SourceUnit::new(String::from(GOLDEN));
    assert_eq!(a.id, b.id);
    assert_ne!(a.id, SourceUnit::new("x").id);
    let joined: String = a.lines.iter().map(|r| &a.text[r.clone()]).collect();
    assert_eq!(joined, a.text);
    assert_eq!(a.line_count(), 13);
}

#[test]
fn golden_program_is_eligible() {
    let r = check_eligibility(&tree(GOLDEN));
    assert!(r.eligible(), "{r:?}");
}

#[test]
fn open_call_fails_external_resources() {
    let r = check_eligibility(&tree("def f(p):\n    return open(p)\n"));
    assert!(!r.external_resources.pass);
    assert!(!r.eligible());
    assert_eq!(r.external_resources.diagnostics[0].line, 2);
}

#[test]
fn two_functions_fail_single_function() {
    let r = check_eligibility(&tree("def f():\n    return 1\n\ndef g():\n    return 2\n"));
    assert!(!r.single_function.pass);
    assert_eq!(r.single_function.diagnostics[0].line, 4);
    assert!(r.external_resources.pass && r.deterministic.pass);
}

#[test]
fn randomness_fails_deterministic() {
    let r = check_eligibility(&tree("def f(xs):\n    return random.choice(xs)\n"));
    assert!(!r.deterministic.pass);
    assert!(r.deterministic.diagnostics.iter().all(|d| d.line == 2));
    let s = screen("import random\ndef f():\n    return 1\n", &EligibilityConfig::default()).unwrap();
    assert!(!s.report.deterministic.pass);
}

#[test]
fn top_level_driver_statements() {
    let ok = check_eligibility(&tree("def f(x):\n    return x\n\nassert f(1) == 1\nf(2)\n"));
    assert!(ok.eligible());
    let bad = check_eligibility(&tree("def f(x):\n    return x\n\ny = f(1)\n"));
    assert!(!bad.single_function.pass);
    assert_eq!(bad.single_function.diagnostics[0].line, 4);
}

#[test]
fn unknown_free_names_fail_builtin_types() {
    let r = check_eligibility(&tree("def f(x):\n    return Counter(x)\n"));
    assert!(!r.builtin_types_only.pass);
    let ok = check_eligibility_with(
        &tree("def f(x):\n    return ord(x)\n"),
        &EligibilityConfig { extra_builtins: vec!["ord".into()] },
    );
    assert!(ok.eligible());
}

#[test]
fn locals_shadowing_denylisted_names_are_fine() {
    let r = check_eligibility(&tree("def f(input, time):\n    id = input + time\n    return id\n"));
    assert!(r.eligible(), "{r:?}");
}

#[test]
fn executable_lines_of_golden_program() {
    let lines: Vec<u32> = list_executable_lines(&tree(GOLDEN)).into_iter().collect();
    assert_eq!(lines, vec![2, 5, 6, 7, 8, 9, 10, 11, 13]);
}

#[test]
fn executable_lines_minimal_and_static() {
    let lines: Vec<u32> = list_executable_lines(&tree("def f():\n    return 0\n")).into_iter().collect();
    assert_eq!(lines, vec![1, 2]);
    let src = "def f(x):\n    \"\"\"Doc.\"\"\"\n    return x\n    x = 2\n";
    let lines: Vec<u32> = list_executable_lines(&tree(src)).into_iter().collect();
    assert_eq!(lines, vec![1, 3, 4]);
}

#[test]
fn seed_sampling() {
    let t = tree(GOLDEN);
    let a = sample_seed(&t, 7, 50).unwrap();
    let b = sample_seed(&t, 7, 50).unwrap();
    assert_eq!(a, b);
    assert!(a.node_count <= 50);
    parse_source(&a.text).expect("fragment re-parses");
    assert_eq!(a.origin.0, t.source_id);

    let single = tree("x = 1\n");
    for seed in 0..5 {
        assert_eq!(sample_seed(&single, seed, 10).unwrap().text, "x = 1\n");
    }
    assert_eq!(sample_seed(&tree(""), 0, 10), Err(SeedError::EmptyTree));
}

#[test]
fn printer_round_trips_golden() {
    let t = tree(GOLDEN);
    let printed = print_tree(&t);
    let again = parse_source(&printed).unwrap();
    assert!(structurally_equal(&t, &again), "{printed}");
    assert_eq!(print_tree(&again), printed);
}

#[test]
fn printer_round_trips_assorted_constructs() {
    let srcs = [
        "def f(a, b=2, *, c=3):\n    return a\n",
        "x = (-2) ** 2 ** -1\n",
        "y = a if b else (lambda q: q + 1)\n",
        "z = [i * j for i in range(3) if i for j in 'ab']\n",
        "w = {k: v for k, v in d.items()}\n",
        "s = f'{x!r:>10} and {{braces}} {y[\"k\"]}'\n",
        "t = x[1:2, ::3]\n",
        "u = not a < b <= c and (d or e)\n",
        "a, b = b, a\n",
        "v = sum(x for x in xs)\n",
        "if a:\n    pass\nelif b:\n    x = 1\nelse:\n    y = 2\n",
        "while n > 0:\n    n //= 2\n    if n == 3:\n        break\n    continue\n",
        "q = sorted(xs, key=lambda p: (-p[1], p[0]), reverse=True)\n",
        "r = 'it\\'s' + \"\\n\" + 'é'\n",
        "m = x.y.z(1)[0].w\n",
        "n = (1,)\n",
    ];
    for src in srcs {
        let t = match parse_source(src) {
            Ok(t) => t,
            Err(ParseError::Unsupported { .. }) => continue,
            Err(e) => panic!("{src}: {e}"),
        };
        let printed = print_tree(&t);
        let again = parse_source(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert!(structurally_equal(&t, &again), "{src} -> {printed}");
    }
}

#[test]
fn diagnostics_stay_within_source_bounds() {
    let src = "def f(x):\n    return open(x) + random.random() + g(x)\n\nh = 1\n";
    let unit = SourceUnit::new(src);
    let r = check_eligibility(&parse(&unit).unwrap());
    for (_, c) in r.criteria() {
        if !c.pass {
            assert!(!c.diagnostics.is_empty());
        }
        for d in &c.diagnostics {
            assert!(d.line >= 1 && d.line <= unit.line_count());
        }
    }
}
