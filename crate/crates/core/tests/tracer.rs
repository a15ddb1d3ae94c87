use proptest::prelude::*;
use semtrace_core::inputs::parse_input_literal;
use semtrace_core::tracer::*;
use semtrace_core::Program;

const GOLDEN: &str = include_str!("fixtures/golden/unique_sorted_indices.py");

fn program(src: &str) -> Program {
    Program::parse("t", src, None).expect("parses")
}

fn trace_with(src: &str, args: &str, limits: Limits) -> Trace {
    let p = program(src);
    let input = parse_input_literal(args).expect("literal");
    p.run(&input, limits)
}

fn trace(src: &str, args: &str) -> Trace {
    trace_with(src, args, Limits::default())
}

fn ret(src: &str, args: &str) -> String {
    let t = trace(src, args);
    match &t.outcome {
        Outcome::Return(v) => repr(v),
        Outcome::Failure { kind, line, message } => format!("!{kind}@{line}: {message}"),
    }
}

fn failure(src: &str, args: &str) -> (ErrorKind, u32) {
    match trace(src, args).outcome {
        Outcome::Failure { kind, line, .. } => (kind, line),
        Outcome::Return(v) => panic!("returned {}", repr(&v)),
    }
}

fn lines(t: &Trace) -> Vec<u32> {
    t.top_events().map(|e| e.line).collect()
}

#[test]
fn golden_trace_events() {
    let t = trace(GOLDEN, "([10.5, 8.2, 10.5, 7.1, 8.2])");
    assert_eq!(repr(t.outcome.value().unwrap()), "[3, 1, 0]");
    assert_eq!(t.input_json(), r#"{"energies": [10.5, 8.2, 10.5, 7.1, 8.2]}"#);
    let e = &t.events;
    assert_eq!(e[0].kind, EventKind::Entry);
    assert_eq!(e[0].line, 5);
    assert_eq!(lines(&t), vec![5, 6, 7, 8, 7, 8, 7, 8, 7, 8, 7, 8, 7, 9, 10, 11]);
    let first7 = e.iter().find(|e| e.line == 7).unwrap();
    assert_eq!(first7.ordinal, 1);
    assert_eq!(first7.changed_json(), r#"{"idx": 0, "energy": 10.5}"#);
    let l9 = e.iter().find(|e| e.line == 9).unwrap();
    assert_eq!(l9.changed_json(), r#"{"sorted_unique_energies": [7.1, 8.2, 10.5]}"#);
    let l8: Vec<String> = e.iter().filter(|e| e.line == 8).map(|e| e.changed_json()).collect();
    assert_eq!(l8[2], "{}");
    assert_eq!(l8[3], r#"{"energy_dict": "{10.5: 0, 8.2: 1, 7.1: 3}"}"#);
    let last7 = e.iter().filter(|e| e.line == 7).last().unwrap();
    assert_eq!(last7.ordinal, 6);
    assert!(last7.changed.is_empty());
    assert_eq!(e.last().unwrap().kind, EventKind::Return);
    assert_eq!(e.last().unwrap().line, 11);
    let cov = t.coverage(&program(GOLDEN).tree);
    assert_eq!(cov.line_rate, 1.0);
    assert_eq!(cov.branch_rate, 1.0);
}

#[test]
fn trivial_function() {
    let t = trace("def f():\n    return 42\n", "()");
    assert_eq!(repr(t.outcome.value().unwrap()), "42");
    assert_eq!(lines(&t), vec![1, 2]);
    assert_eq!(t.events[1].kind, EventKind::Return);
}

#[test]
fn endless_loop_hits_step_budget() {
    let t = trace_with(
        "def f():\n    while True:\n        pass\n",
        "()",
        Limits { step_budget: 1000, ..Default::default() },
    );
    match t.outcome {
        Outcome::Failure { kind, line, .. } => {
            assert_eq!(kind, ErrorKind::StepLimitExceeded);
            assert!(line == 2 || line == 3);
        }
        _ => panic!("should fail"),
    }
    assert!(t.events.len() <= 1000);
}

#[test]
fn unbounded_recursion_hits_recursion_budget() {
    let (k, _) = failure("def f(n):\n    return f(n + 1)\n", "(0,)");
    assert_eq!(k, ErrorKind::RecursionLimit);
}

#[test]
fn branch_coverage_of_one_sided_if() {
    let src = "def f(x):\n    if x > 0:\n        return 1\n    return 0\n";
    let p = program(src);
    let t = trace(src, "(5,)");
    let c = t.coverage(&p.tree);
    assert_eq!(c.branch_rate, 0.5);
    assert_eq!(c.branches_total, 2);
    let t2 = trace(src, "(-5,)");
    let m = merged_coverage([&t, &t2], &p.tree, Some("f"));
    assert_eq!(m.branch_rate, 1.0);
    assert_eq!(m.line_rate, 1.0);
}

#[test]
fn rendering_rules() {
    assert_eq!(render_value(&Value::int(3)), "3");
    assert_eq!(render_value(&Value::Float(2.0)), "2.0");
    assert_eq!(render_value(&Value::str("a\"b")), r#""a\"b""#);
    assert_eq!(render_value(&Value::Bool(true)), "true");
    assert_eq!(render_value(&Value::None), r#""None""#);
    let t = parse_input_literal(r#"({"a": [1, 2]}, {1: 2}, (1, 2), {3})"#).unwrap();
    let r: Vec<String> = t.positional.iter().map(render_value).collect();
    assert_eq!(r, vec![r#"{"a": [1, 2]}"#, r#""{1: 2}""#, r#""(1, 2)""#, r#""{3}""#]);
    assert_eq!(render_value(&Value::Float(f64::INFINITY)), r#""inf""#);
}

#[test]
fn diff_state_compares_literal_forms() {
    let b = |n: &str, r: &str| Binding { name: n.into(), json: r.into(), repr: r.into() };
    assert!(diff_state(&[b("x", "1")], &[b("x", "1")]).is_empty());
    assert_eq!(diff_state(&[b("x", "1")], &[b("x", "2")]), vec![b("x", "2")]);
    assert_eq!(diff_state(&[], &[b("y", "[]")]), vec![b("y", "[]")]);
    // 1 and 1.0 are equal values but differ in form.
    assert_eq!(diff_state(&[b("x", "1")], &[b("x", "1.0")]).len(), 1);
}

#[test]
fn list_mutation_is_a_change() {
    let t = trace("def f(xs):\n    xs.append(1)\n    return xs\n", "([],)");
    assert_eq!(t.events[1].changed_json(), r#"{"xs": [1]}"#);
}

#[test]
fn failures_report_innermost_line() {
    assert_eq!(failure("def f(d):\n    x = 1\n    return d['k']\n", "({},)"), (ErrorKind::KeyError, 3));
    assert_eq!(failure("def f(a):\n    return 1 / a\n", "(0,)"), (ErrorKind::ZeroDivisionError, 2));
    assert_eq!(failure("def f(xs):\n    return xs[5]\n", "([1],)"), (ErrorKind::IndexError, 2));
    assert_eq!(failure("def f(x):\n    return x + 'a'\n", "(1,)"), (ErrorKind::TypeError, 2));
    assert_eq!(failure("def f(x):\n    return int(x)\n", "('q',)"), (ErrorKind::ValueError, 2));
    assert_eq!(failure("def f(x):\n    return y\n", "(1,)"), (ErrorKind::NameError, 2));
    assert_eq!(failure("def f(x):\n    return x.foo()\n", "(1,)"), (ErrorKind::AttributeError, 2));
    assert_eq!(failure("def f(x):\n    assert x > 1\n    return x\n", "(1,)"), (ErrorKind::AssertionError, 2));
    let (k, _) = failure("def f(x):\n    return x\n", "(1, 2)");
    assert_eq!(k, ErrorKind::TypeError);
}

#[test]
fn python_semantics_spot_checks() {
    let cases: &[(&str, &str, &str)] = &[
        ("def f(a, b):\n    return a // b, a % b\n", "(-7, 2)", "(-4, 1)"),
        ("def f(a):\n    return round(a), round(2.5), round(3.5)\n", "(0.5,)", "(0, 2, 4)"),
        ("def f(x):\n    return 2 ** x\n", "(100,)", "1267650600228229401496703205376"),
        ("def f(x):\n    return x / 3\n", "(1,)", "0.3333333333333333"),
        ("def f(x):\n    return 0.1 + 0.2\n", "(1,)", "0.30000000000000004"),
        ("def f(s):\n    return s[::-1], s[1:3], s.upper()\n", "('hello',)", "('olleh', 'el', 'HELLO')"),
        ("def f(xs):\n    return sorted(xs, key=lambda p: (-p[1], p[0]))\n", "([('a', 1), ('b', 2), ('c', 2)],)", "[('b', 2), ('c', 2), ('a', 1)]"),
        ("def f(xs):\n    return max(xs), min(xs), sum(xs), len(xs)\n", "([3, 1, 2],)", "(3, 1, 6, 3)"),
        ("def f(n):\n    return [i * i for i in range(n) if i % 2 == 0]\n", "(7,)", "[0, 4, 16, 36]"),
        ("def f(d):\n    return {v: k for k, v in d.items()}\n", "({'a': 1, 'b': 2},)", "{1: 'a', 2: 'b'}"),
        ("def f(s):\n    return ' '.join(reversed(s.split()))\n", "('a b  c',)", "'c b a'"),
        ("def f(x):\n    return f'{x:.2f}|{x!r}|{x:>8}'\n", "(3.14159,)", "'3.14|3.14159| 3.14159'"),
        ("def f(x):\n    return '%05d %s' % (x, [x])\n", "(42,)", "'00042 [42]'"),
        ("def f(xs):\n    return list(zip(xs, xs[1:])), list(enumerate(xs, 1))\n", "([1, 2, 3],)", "([(1, 2), (2, 3)], [(1, 1), (2, 2), (3, 3)])"),
        ("def f(a):\n    return 1 < a < 3, a == 2.0, True + True\n", "(2,)", "(True, True, 2)"),
        ("def f(xs):\n    return any(x > 2 for x in xs), all(xs), abs(-3.5)\n", "([1, 2, 3],)", "(True, True, 3.5)"),
        ("def f(x):\n    return str(x), float('1e3'), int('-12'), bool('')\n", "(1.0,)", "('1.0', 1000.0, -12, False)"),
        ("def f(s):\n    return s.count('a'), s.find('z'), s.replace('a', 'o', 1)\n", "('banana',)", "(3, -1, 'bonana')"),
        ("def f(x):\n    return 1e16, 1e-5, 123456789.0 * 10, -0.0\n", "(0,)", "(1e+16, 1e-05, 1234567890.0, -0.0)"),
        ("def f(n):\n    a, b = 0, 1\n    for _ in range(n):\n        a, b = b, a + b\n    return a\n", "(90,)", "2880067194370816120"),
        ("def f(xs):\n    xs.sort(reverse=True)\n    return xs, xs.pop(), xs.index(2)\n", "([1, 3, 2],)", "([3, 2], 1, 1)"),
        ("def f(s):\n    return set(s) == {'a', 'b'}, sorted(set(s))\n", "('abba',)", "(True, ['a', 'b'])"),
        ("def f(x):\n    return divmod(x, 3), pow(2, 10, 1000), hex(x), bin(5), chr(65), ord('a')\n", "(10,)", "((3, 1), 24, '0xa', '0b101', 'A', 97)"),
        ("def f(xs):\n    total = 0\n    i = 0\n    while i < len(xs):\n        if xs[i] < 0:\n            i += 1\n            continue\n        if xs[i] > 100:\n            break\n        total += xs[i]\n        i += 1\n    return total\n", "([1, -2, 3, 200, 5],)", "4"),
    ];
    for (src, args, want) in cases {
        assert_eq!(ret(src, args), *want, "{src}");
    }
}

#[test]
fn nested_definitions_are_unsupported() {
    let src = "def f(n):\n    def g(k):\n        return k * 2\n    return g(n) + 1\n";
    assert_eq!(failure(src, "(3,)"), (ErrorKind::UnsupportedConstruct, 2));
}

#[test]
fn recursion_traces_every_frame() {
    let src = "def fact(n):\n    if n <= 1:\n        return 1\n    return n * fact(n - 1)\n";
    let t = trace(src, "(4,)");
    assert_eq!(repr(t.outcome.value().unwrap()), "24");
    assert_eq!(t.events.iter().filter(|e| e.kind == EventKind::Entry).count(), 4);
    assert_eq!(t.events.iter().map(|e| e.depth).max(), Some(3));
}

#[test]
fn print_goes_to_stdout() {
    let t = trace("def f(x):\n    print('x =', x, end='!')\n    print()\n    return x\n", "(2,)");
    assert_eq!(t.stdout, "x = 2!\n");
}

#[test]
fn arguments_are_not_aliased_with_caller() {
    let p = program("def f(xs):\n    xs.append(9)\n    return len(xs)\n");
    let input = parse_input_literal("([1],)").unwrap();
    let a = p.run(&input, Limits::default());
    let b = p.run(&input, Limits::default());
    assert_eq!(repr(a.outcome.value().unwrap()), "2");
    assert_eq!(repr(b.outcome.value().unwrap()), "2");
    assert_eq!(input.canonical_text, "([1],)");
}

fn loop_src(n_body_lines: usize) -> String {
    let mut s = String::from("def f(n):\n    acc = 0\n    for i in range(n):\n");
    for k in 0..n_body_lines {
        s.push_str(&format!("        acc = acc + i * {}\n", k + 1));
    }
    s.push_str("    return acc\n");
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ordinals_count_line_visits(n in 0usize..12, body in 1usize..4) {
        let t = trace(&loop_src(body), &format!("({n},)"));
        let mut seen = std::collections::BTreeMap::new();
        for e in &t.events {
            let c = seen.entry(e.line).or_insert(0u32);
            *c += 1;
            prop_assert_eq!(e.ordinal, *c);
        }
        prop_assert_eq!(seen.get(&3).copied().unwrap_or(0), n as u32 + 1);
        prop_assert!(t.outcome.is_return());
    }

    #[test]
    fn tracing_is_deterministic(xs in proptest::collection::vec(-50i64..50, 0..8)) {
        let src = "def f(xs):\n    seen = set()\n    out = []\n    for x in xs:\n        if x not in seen:\n            seen.add(x)\n            out.append(x * 2)\n    return sorted(out)\n";
        let lit = format!("({:?},)", xs);
        let a = trace(src, &lit);
        let b = trace(src, &lit);
        prop_assert_eq!(a.events, b.events);
        let mut want: Vec<i64> = Vec::new();
        for x in &xs { if !want.contains(&(x * 2)) { want.push(x * 2); } }
        want.sort();
        prop_assert_eq!(repr(a.outcome.value().unwrap()), format!("{:?}", want));
    }

    #[test]
    fn integer_arithmetic_matches_reference(a in -10_000i64..10_000, b in -100i64..100) {
        prop_assume!(b != 0);
        let got = ret("def f(a, b):\n    return a // b, a % b, a * b, a - b\n", &format!("({a}, {b})"));
        let fd = a.div_euclid(b) - if b < 0 && a.rem_euclid(b) != 0 { 1 } else { 0 };
        let md = a - fd * b;
        prop_assert_eq!(got, format!("({fd}, {md}, {}, {})", a * b, a - b));
    }
}
