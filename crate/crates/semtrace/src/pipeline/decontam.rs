use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DatasetRecord;
use semtrace_core::inputs::{parse_input_literal, parse_value_literal};
use semtrace_core::tracer::repr;

/// A benchmark test case in canonical rendering.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BenchmarkPair {
    pub input: String,
    pub output: String,
}

impl BenchmarkPair {
    /// Canonicalizes literal input and output text; unparsable parts are kept verbatim.
    pub fn canonical(input: &str, output: &str) -> BenchmarkPair {
        let input = parse_input_literal(input).map(|t| t.canonical_text).unwrap_or_else(|_| input.trim().to_string());
        let output = parse_value_literal(output).map(|v| repr(&v)).unwrap_or_else(|_| output.trim().to_string());
        BenchmarkPair { input, output }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub record_id: String,
    pub matched: BenchmarkPair,
}

/// Drops records whose (input, output) pair equals a benchmark pair.
pub fn decontaminate(dataset: &[DatasetRecord], benchmark: &[BenchmarkPair]) -> (Vec<DatasetRecord>, Vec<Removal>) {
    let bench: BTreeSet<(&str, &str)> = benchmark.iter().map(|p| (p.input.as_str(), p.output.as_str())).collect();
    let mut kept = Vec::new();
    let mut log = Vec::new();
    for r in dataset {
        match (&r.input, &r.output) {
            (Some(i), Some(o)) if bench.contains(&(i.as_str(), o.as_str())) => log.push(Removal {
                record_id: r.id.clone(),
                matched: BenchmarkPair { input: i.clone(), output: o.clone() },
            }),
            _ => kept.push(r.clone()),
        }
    }
    (kept, log)
}
