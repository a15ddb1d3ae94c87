//! Corpus expansion: validated, deduplicated growth toward size and coverage goals.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::literal::{parse_input_literal, InputTuple};
use super::mutate::{mutate, stream, MutationPolicy};
use crate::program::Program;
use crate::tracer::{CoverageStats, Covered, ErrorKind, Limits, Outcome, Trace, Value};

#[derive(Debug)]
pub enum Validation {
    Accepted(Trace),
    Rejected(ErrorKind),
}

impl Validation {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Validation::Accepted(_))
    }
}

/// Runs `candidate`; only a run that returns within `limits` is accepted.
pub fn validate(program: &Program, candidate: &InputTuple, limits: Limits) -> Validation {
    let trace = program.run(candidate, limits);
    match trace.outcome {
        Outcome::Return(_) => Validation::Accepted(trace),
        Outcome::Failure { kind, .. } => Validation::Rejected(kind),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemberSource {
    Seed,
    Mutation,
    Suggester,
}

impl MemberSource {
    pub fn name(self) -> &'static str {
        match self {
            MemberSource::Seed => "seed",
            MemberSource::Mutation => "mutation",
            MemberSource::Suggester => "suggester",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Member {
    pub input: InputTuple,
    pub output: Value,
    pub source: MemberSource,
    pub covered: Covered,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub target_size: usize,
    /// Size required before coverage goals may stop expansion.
    pub min_size: usize,
    pub line_goal: Option<f64>,
    pub branch_goal: Option<f64>,
}

impl Goal {
    pub fn size(target_size: usize) -> Self {
        Goal { target_size, min_size: target_size, line_goal: None, branch_goal: None }
    }
}

/// What was still missing when the attempt budget ran out.
#[derive(Clone, Debug, PartialEq)]
pub struct Shortfall {
    pub missing_members: usize,
    pub line_rate: f64,
    pub branch_rate: f64,
}

#[derive(Clone, Debug)]
pub struct InputCorpus {
    pub program_id: String,
    pub members: Vec<Member>,
    pub coverage: CoverageStats,
    pub attempts: usize,
    /// Rejected candidates with the error they raised.
    pub rejections: Vec<(String, ErrorKind)>,
    pub shortfall: Option<Shortfall>,
}

impl InputCorpus {
    pub fn inputs(&self) -> impl Iterator<Item = &InputTuple> {
        self.members.iter().map(|m| &m.input)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SuggestRequest {
    pub source: String,
    pub known: Vec<String>,
    pub count: usize,
}

/// Proposes input literals; everything it returns is validated before admission.
pub trait SuggesterClient {
    fn suggest(&mut self, request: &SuggestRequest) -> Result<Vec<String>, String>;
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("NoValidSeed: all {0} seeds were rejected")]
    NoValidSeed(usize),
}

struct Builder<'a> {
    program: &'a Program,
    limits: Limits,
    members: Vec<Member>,
    seen: BTreeSet<String>,
    covered: Covered,
    rejections: Vec<(String, ErrorKind)>,
    attempts: usize,
}

impl Builder<'_> {
    fn offer(&mut self, input: InputTuple, source: MemberSource) -> bool {
        if self.seen.contains(&input.canonical_text) {
            return false;
        }
        self.attempts += 1;
        self.seen.insert(input.canonical_text.clone());
        match validate(self.program, &input, self.limits) {
            Validation::Accepted(trace) => {
                self.covered.merge(&trace.covered);
                let output = trace.outcome.value().cloned().unwrap_or(Value::None);
                self.members.push(Member { input, output, source, covered: trace.covered });
                true
            }
            Validation::Rejected(kind) => {
                self.rejections.push((input.canonical_text, kind));
                false
            }
        }
    }

    fn stats(&self) -> CoverageStats {
        self.covered.stats(&self.program.tree, Some(&self.program.entry))
    }

    fn done(&self, goal: &Goal) -> bool {
        if self.members.len() >= goal.target_size {
            return true;
        }
        if goal.line_goal.is_none() && goal.branch_goal.is_none() {
            return false;
        }
        let s = self.stats();
        self.members.len() >= goal.min_size
            && goal.line_goal.map_or(true, |g| s.line_rate >= g)
            && goal.branch_goal.map_or(true, |g| s.branch_rate >= g)
    }
}

/// Grows a corpus from `seeds`. Mutation rounds alternate with suggester
/// rounds when a suggester is given.
pub fn expand(
    program: &Program,
    seeds: &[InputTuple],
    goal: &Goal,
    policy: &MutationPolicy,
    limits: Limits,
    mut suggester: Option<&mut dyn SuggesterClient>,
) -> Result<InputCorpus, ExpandError> {
    let mut b = Builder {
        program,
        limits,
        members: Vec::new(),
        seen: BTreeSet::new(),
        covered: Covered::default(),
        rejections: Vec::new(),
        attempts: 0,
    };
    for s in seeds {
        if b.members.len() >= goal.target_size {
            break;
        }
        b.offer(s.deep_copy(), MemberSource::Seed);
    }
    if b.members.is_empty() {
        return Err(ExpandError::NoValidSeed(seeds.len()));
    }
    let per_round = policy.max_attempts_per_round.max(1) as u64;
    let mut round = 0u64;
    while !b.done(goal) && (round as usize) < policy.max_rounds {
        round += 1;
        if let (Some(client), true) = (suggester.as_deref_mut(), round % 2 == 0) {
            let request = SuggestRequest {
                source: program.source.clone(),
                known: b.members.iter().map(|m| m.input.canonical_text.clone()).collect(),
                count: goal.target_size.saturating_sub(b.members.len()),
            };
            if let Ok(lines) = client.suggest(&request) {
                for line in lines {
                    if b.done(goal) {
                        break;
                    }
                    match parse_input_literal(&line) {
                        Ok(t) if t.len() == program.arity() => {
                            b.offer(t, MemberSource::Suggester);
                        }
                        _ => log::debug!("suggester candidate dropped: {line}"),
                    }
                }
            }
            continue;
        }
        let mut pick = stream(policy.master_seed, &program.id, u64::MAX - round);
        for k in 0..per_round {
            if b.done(goal) {
                break;
            }
            let base = b.members[pick.gen_range(0..b.members.len())].input.clone();
            let cand = mutate(&base, policy, &program.id, round * per_round + k);
            b.offer(cand, MemberSource::Mutation);
        }
    }
    let coverage = b.stats();
    let shortfall = if b.done(goal) {
        None
    } else {
        Some(Shortfall {
            missing_members: goal.target_size.saturating_sub(b.members.len()),
            line_rate: coverage.line_rate,
            branch_rate: coverage.branch_rate,
        })
    };
    Ok(InputCorpus {
        program_id: program.id.clone(),
        members: b.members,
        coverage,
        attempts: b.attempts,
        rejections: b.rejections,
        shortfall,
    })
}
