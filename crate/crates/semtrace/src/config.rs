//! JSON run configuration. Every knob lives in one document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use semtrace_core::formats::TruncationRule;
use semtrace_core::inputs::{Goal, MutationPolicy};
use semtrace_core::tracer::Limits;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Nl2code,
    ForwardMonologue,
    BackwardMonologue,
    DebugRefine,
}

impl RecordKind {
    pub const ALL: [RecordKind; 4] =
        [RecordKind::Nl2code, RecordKind::ForwardMonologue, RecordKind::BackwardMonologue, RecordKind::DebugRefine];

    pub fn name(self) -> &'static str {
        match self {
            RecordKind::Nl2code => "nl2code",
            RecordKind::ForwardMonologue => "forward_monologue",
            RecordKind::BackwardMonologue => "backward_monologue",
            RecordKind::DebugRefine => "debug_refine",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsConfig {
    pub step_budget: u64,
    pub recursion_budget: u32,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        let l = Limits::default();
        LimitsConfig { step_budget: l.step_budget, recursion_budget: l.recursion_budget }
    }
}

impl LimitsConfig {
    pub fn limits(&self) -> Limits {
        Limits { step_budget: self.step_budget, recursion_budget: self.recursion_budget }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoalConfig {
    pub target_size: usize,
    pub min_size: Option<usize>,
    pub line_goal: Option<f64>,
    pub branch_goal: Option<f64>,
}

impl Default for GoalConfig {
    fn default() -> Self {
        GoalConfig { target_size: 20, min_size: None, line_goal: None, branch_goal: None }
    }
}

impl GoalConfig {
    pub fn goal(&self) -> Goal {
        Goal {
            target_size: self.target_size,
            min_size: self.min_size.unwrap_or(self.target_size),
            line_goal: self.line_goal,
            branch_goal: self.branch_goal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MutationConfig {
    pub max_attempts_per_round: usize,
    pub max_rounds: usize,
    pub max_container: usize,
    pub max_str_len: usize,
}

impl Default for MutationConfig {
    fn default() -> Self {
        let p = MutationPolicy::default();
        MutationConfig {
            max_attempts_per_round: p.max_attempts_per_round,
            max_rounds: p.max_rounds,
            max_container: p.max_container,
            max_str_len: p.max_str_len,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    pub keep_first: usize,
    pub keep_second: usize,
    pub keep_last: usize,
    pub threshold: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        let r = TruncationRule::default();
        TruncationConfig { keep_first: r.keep_first, keep_second: r.keep_second, keep_last: r.keep_last, threshold: r.threshold }
    }
}

impl TruncationConfig {
    pub fn rule(&self) -> TruncationRule {
        TruncationRule {
            keep_first: self.keep_first,
            keep_second: self.keep_second,
            keep_last: self.keep_last,
            threshold: self.threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    /// Problem JSONL; relative paths resolve against the config file.
    pub programs: PathBuf,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "all_kinds")]
    pub kinds: Vec<RecordKind>,
    #[serde(default)]
    pub goal: GoalConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
    #[serde(default)]
    pub mutation: MutationConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    /// Corpus members per program that get monologue records.
    #[serde(default = "default_samples")]
    pub samples_per_program: usize,
    /// Mutation budget for backward witness search.
    #[serde(default = "default_witness_budget")]
    pub witness_budget: usize,
    /// Candidate JSONL whose buggy entries become debug-refine records.
    #[serde(default)]
    pub candidates: Option<PathBuf>,
    /// Subprocess input suggester; leave unset for reproducible builds.
    #[serde(default)]
    pub suggester: Option<String>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn all_kinds() -> Vec<RecordKind> {
    RecordKind::ALL.to_vec()
}
fn default_samples() -> usize {
    3
}
fn default_witness_budget() -> usize {
    2000
}
fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl BuildConfig {
    pub fn from_json(text: &str, base: &Path) -> Result<BuildConfig, ConfigError> {
        let mut c: BuildConfig = serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        c.programs = base.join(&c.programs);
        c.out_dir = base.join(&c.out_dir);
        c.candidates = c.candidates.map(|p| base.join(p));
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<BuildConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        BuildConfig::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.goal.target_size == 0 {
            return bad("goal.target_size must be at least 1");
        }
        if self.goal.min_size.is_some_and(|m| m > self.goal.target_size) {
            return bad("goal.min_size exceeds goal.target_size");
        }
        for g in [self.goal.line_goal, self.goal.branch_goal].into_iter().flatten() {
            if !(0.0..=1.0).contains(&g) {
                return bad("coverage goals must lie in [0, 1]");
            }
        }
        if self.limits.step_budget == 0 || self.limits.recursion_budget == 0 {
            return bad("limits must be positive");
        }
        if self.mutation.max_attempts_per_round == 0 {
            return bad("mutation.max_attempts_per_round must be positive");
        }
        if self.truncation.threshold < self.truncation.keep_first + self.truncation.keep_second + self.truncation.keep_last
        {
            return bad("truncation.threshold must cover the kept states");
        }
        if self.kinds.is_empty() {
            return bad("kinds is empty");
        }
        if self.workers == 0 {
            return bad("workers must be positive");
        }
        Ok(())
    }

    pub fn policy(&self) -> MutationPolicy {
        MutationPolicy {
            master_seed: self.master_seed,
            max_attempts_per_round: self.mutation.max_attempts_per_round,
            max_rounds: self.mutation.max_rounds,
            max_container: self.mutation.max_container,
            max_str_len: self.mutation.max_str_len,
            ..MutationPolicy::default()
        }
    }
}
