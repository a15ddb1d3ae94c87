use serde::{Deserialize, Serialize};
use serde_json::json;

use semtrace_core::harness::{DecodingMode, EpisodeResult};
use semtrace_core::refinery::BuggyRecord;
use semtrace_core::tracer::repr;

/// `build-pyxr` output line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuggyRecordJson {
    pub problem_id: String,
    pub prompt: String,
    pub entry: String,
    pub buggy_source: String,
    pub failing_input: String,
    pub expected_output: String,
    pub faulty_trace: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<String>,
    pub verified: bool,
    /// Prompt-only debug sample, or the full sample once a patch is verified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
}

impl From<&BuggyRecord> for BuggyRecordJson {
    fn from(r: &BuggyRecord) -> Self {
        BuggyRecordJson {
            problem_id: r.problem_id.clone(),
            prompt: r.prompt.clone(),
            entry: r.entry.clone(),
            buggy_source: r.buggy_source.clone(),
            failing_input: r.failing_input.canonical_text.clone(),
            expected_output: repr(&r.expected_output),
            faulty_trace: r.faulty_trace.clone(),
            rationale: r.rationale.clone(),
            patch: r.patch.clone(),
            verified: r.verified,
            sample: semtrace_core::refinery::assemble_debug_sample(r),
        }
    }
}

pub fn episode_json(e: &EpisodeResult) -> serde_json::Value {
    let rounds: Vec<_> = e
        .rounds
        .iter()
        .map(|r| {
            json!({
                "round": r.round,
                "decoding": {
                    "mode": if r.decoding.mode == DecodingMode::Greedy { "greedy" } else { "top_p" },
                    "p": r.decoding.p,
                    "temperature": r.decoding.temperature,
                },
                "prompt": r.prompt,
                "source": r.source,
                "verdict": r.verdict.label(),
                "faulty_trace": r.faulty_trace,
                "failed_test": r.failed_test,
            })
        })
        .collect();
    json!({"problem_id": e.problem_id, "first_pass_round": e.first_pass_round, "rounds": rounds})
}
