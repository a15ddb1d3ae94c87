//! Self-refinement evaluation: generate, test, trace, refine.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::formats::{with_prefix, TaskPrefix, TruncationRule};
use crate::program::Problem;
use crate::refinery::{candidate_program, debug_prompt, extract_code, faulty_trace};
use crate::tracer::{repr, Limits};
use crate::verify::{differential_test, Overall};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodingMode {
    Greedy,
    TopP,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decoding {
    pub mode: DecodingMode,
    pub p: f64,
    pub temperature: f64,
}

impl Decoding {
    pub fn greedy() -> Self {
        Decoding { mode: DecodingMode::Greedy, p: 1.0, temperature: 0.0 }
    }

    pub fn top_p(p: f64, temperature: f64) -> Self {
        Decoding { mode: DecodingMode::TopP, p, temperature }
    }
}

/// A code model. Replies are untrusted and always parsed, screened and tested.
pub trait ModelClient {
    fn generate(&mut self, prompt: &str, decoding: &Decoding) -> Result<String, String>;
    fn refine(&mut self, prompt: &str, prior: &str, faulty_trace: &str, decoding: &Decoding) -> Result<String, String>;
}

/// Decoding per round (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub first: Decoding,
    pub later: Decoding,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { first: Decoding::greedy(), later: Decoding::top_p(0.95, 0.8) }
    }
}

impl Schedule {
    pub fn for_round(&self, round: usize) -> Decoding {
        if round <= 1 { self.first } else { self.later }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoundVerdict {
    Pass,
    Fail(String),
}

#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub round: usize,
    pub decoding: Decoding,
    /// Full text of what the client was shown.
    pub prompt: String,
    pub source: String,
    pub verdict: RoundVerdict,
    pub faulty_trace: Option<String>,
    pub failed_test: Option<String>,
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub problem_id: String,
    pub rounds: Vec<RoundRecord>,
    pub first_pass_round: Option<usize>,
}

/// Evaluates one candidate: a pass, or a failure with the feedback for the next round.
fn judge(problem: &Problem, source: &str) -> (RoundVerdict, Option<(String, String)>) {
    let candidate = match candidate_program(problem, source) {
        Ok(p) => p,
        Err(e) => return (RoundVerdict::Fail(e.clone()), Some((format!("{source}\n# {e}\n"), String::new()))),
    };
    let report = differential_test(&candidate, &problem.reference, &problem.corpus);
    if report.overall == Overall::EquivalentOnCorpus {
        return (RoundVerdict::Pass, None);
    }
    let (input, result) = report.first_failure().expect("buggy report has a failure");
    let expected = problem.reference.run(input, Limits::default()).outcome.value().cloned();
    let trace = faulty_trace(&candidate, input, TruncationRule::default(), expected.as_ref()).unwrap_or_else(|e| format!("# {e}\n"));
    let test = format!(
        "assert {}({}) == {}",
        problem.reference.entry,
        input.call_args(),
        expected.as_ref().map(repr).unwrap_or_default()
    );
    (RoundVerdict::Fail(format!("{result:?}")), Some((trace, test)))
}

/// Runs up to `max_rounds` rounds, stopping at the first pass or client error.
pub fn run_episode(problem: &Problem, client: &mut dyn ModelClient, max_rounds: usize, schedule: &Schedule) -> EpisodeResult {
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut first_pass_round = None;
    for round in 1..=max_rounds {
        let decoding = schedule.for_round(round);
        let (prompt, reply) = match rounds.last() {
            None => (problem.prompt.clone(), client.generate(&problem.prompt, &decoding)),
            Some(prev) => {
                let trace = prev.faulty_trace.clone().unwrap_or_default();
                let test = prev.failed_test.clone().unwrap_or_default();
                let text = with_prefix(TaskPrefix::DebugRefine, &debug_prompt(&problem.prompt, &trace, &test), "");
                let reply = client.refine(&text, &prev.source, &trace, &decoding);
                (text, reply)
            }
        };
        let reply = match reply {
            Ok(r) => r,
            Err(e) => {
                rounds.push(RoundRecord {
                    round,
                    decoding,
                    prompt,
                    source: String::new(),
                    verdict: RoundVerdict::Fail(format!("client-error: {e}")),
                    faulty_trace: None,
                    failed_test: None,
                });
                break;
            }
        };
        let source = extract_code(&reply);
        let (verdict, feedback) = judge(problem, &source);
        let passed = verdict == RoundVerdict::Pass;
        let (faulty_trace, failed_test) = match feedback {
            Some((t, f)) => (Some(t), Some(f)),
            None => (None, None),
        };
        rounds.push(RoundRecord { round, decoding, prompt, source, verdict, faulty_trace, failed_test });
        if passed {
            first_pass_round = Some(round);
            break;
        }
    }
    EpisodeResult { problem_id: problem.id.clone(), rounds, first_pass_round }
}

/// Fraction of episodes solved by round `round`; 0.0 for no episodes.
pub fn score(results: &[EpisodeResult], round: usize) -> f64 {
    if results.is_empty() {
        log::warn!("score of an empty episode list");
        return 0.0;
    }
    let solved = results.iter().filter(|r| r.first_pass_round.is_some_and(|k| k <= round)).count();
    solved as f64 / results.len() as f64
}

/// `score` for rounds 1..=max_rounds.
pub fn score_curve(results: &[EpisodeResult], max_rounds: usize) -> Vec<f64> {
    (1..=max_rounds).map(|r| score(results, r)).collect()
}

impl RoundVerdict {
    pub fn label(&self) -> String {
        match self {
            RoundVerdict::Pass => "pass".to_string(),
            RoundVerdict::Fail(r) => format!("fail({r})"),
        }
    }
}
