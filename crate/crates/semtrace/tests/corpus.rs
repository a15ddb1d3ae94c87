mod common;

use common::*;
use semtrace::with_big_stack;
use semtrace_core::inputs::parse_input_literal;

#[test]
fn corpus_shape() {
    let specs = specs();
    assert!(specs.len() >= 50);
    let inputs = inputs();
    for s in &specs {
        assert!(s.program().is_ok(), "{} is not eligible", s.id);
        assert_eq!(inputs[&s.id].len(), 20, "{}", s.id);
        for seed in &s.corpus {
            parse_input_literal(seed).unwrap();
        }
    }
    assert_eq!(goldens().len(), 20 * specs.len());
    assert!(mutants().len() >= 20);
}

#[test]
fn tracer_matches_goldens() {
    let bad = with_big_stack(|| golden_mismatches(&programs(), &goldens()));
    assert!(bad.is_empty(), "{} mismatches, first: {:?}", bad.len(), &bad[..bad.len().min(5)]);
}

#[test]
fn mutants_are_flagged_and_references_agree_with_themselves() {
    let bad = with_big_stack(|| differential_failures(&programs(), &inputs()));
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn reference_runtime_agrees_on_seeds() {
    let res = with_big_stack(|| {
        let cases: Vec<_> = specs()
            .iter()
            .flat_map(|s| s.inputs().unwrap().into_iter().map(|i| (s.id.clone(), i)).collect::<Vec<_>>())
            .collect();
        oracle_divergences(&programs(), &cases).map(|r| (cases.len(), r))
    });
    let Some((total, (n, bad, _))) = res else {
        eprintln!("python3 not found; skipping the reference-runtime comparison");
        return;
    };
    assert_eq!(n, total);
    assert!(bad.is_empty(), "{bad:?}");
}
