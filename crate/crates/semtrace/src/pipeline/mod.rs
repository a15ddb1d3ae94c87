//! Dataset construction: records, builds, similarity and contamination checks.
//!
//! Every dataset file is JSONL of [`DatasetRecord`]:
//!
//! ```text
//! {"kind": "forward_monologue", "id": "...", "program_id": "...", "input_id": "...",
//!  "text": "...", "input": "([1, 2],)", "output": "3",
//!  "provenance": {"generator": "deterministic", "seed": 0, "tool_version": "0.1.0"}}
//! ```
//!
//! `input_id`, `input` and `output` are omitted for kinds without a concrete
//! execution (`nl2code`). Debug-refine files written by `build-pyxr` use
//! [`BuggyRecordJson`] instead.

mod build;
mod decontam;
mod debug;
mod similarity;
mod stats;

pub use build::{build_dataset, build_records, write_output, BuildOutput, CoverageSummary, Manifest, ProgramCounts, ProgramRejection, ShortfallRecord, VerificationCounts};
pub use debug::{episode_json, BuggyRecordJson};
pub use decontam::{decontaminate, BenchmarkPair, Removal};
pub use similarity::{shingle_cosine, shingles, EmbeddingMeasure, Embedder, ShingleCosine, SimilarityMeasure, SimilarityReport, similarity_report, similarity_report_with};
pub use stats::{error_stats, ErrorTable};

use serde::{Deserialize, Serialize};

use crate::config::RecordKind;
use semtrace_core::formats::TaskPrefix;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Deterministic,
    Client,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub generator: Generator,
    pub seed: u64,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub kind: RecordKind,
    pub id: String,
    pub program_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_id: Option<String>,
    /// Task prefix, prompt and completion.
    pub text: String,
    /// Argument tuple literal of the execution the record describes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Literal of the value that execution returned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub provenance: Provenance,
}

pub fn prefix_for(kind: RecordKind) -> TaskPrefix {
    match kind {
        RecordKind::Nl2code => TaskPrefix::NL2Code,
        RecordKind::ForwardMonologue => TaskPrefix::SimulateExecution,
        RecordKind::BackwardMonologue => TaskPrefix::DeduceConstraints,
        RecordKind::DebugRefine => TaskPrefix::DebugRefine,
    }
}

impl DatasetRecord {
    pub fn has_valid_prefix(&self) -> bool {
        self.text.starts_with(prefix_for(self.kind).head())
    }
}
