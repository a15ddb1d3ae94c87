//! On-disk problem descriptions shared by the dataset and refinement commands.

use anyhow::{anyhow, Result};
use serde::{Deserialize, Serialize};

use semtrace_core::inputs::{parse_input_literal, InputTuple};
use semtrace_core::{Problem, Program};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub id: String,
    /// Natural-language task description.
    pub prompt: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    /// Argument tuples as literals, e.g. `"([1, 2], 3)"`.
    #[serde(default)]
    pub corpus: Vec<String>,
}

/// A candidate implementation to be checked against a problem's reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub id: String,
    pub problem_id: String,
    #[serde(default)]
    pub kind: String,
    pub source: String,
}

impl ProblemSpec {
    pub fn program(&self) -> Result<Program, semtrace_core::ProgramError> {
        Program::parse_eligible(self.id.clone(), self.source.clone(), self.entry.as_deref())
    }

    pub fn inputs(&self) -> Result<Vec<InputTuple>> {
        self.corpus
            .iter()
            .map(|s| parse_input_literal(s).map_err(|e| anyhow!("{}: bad input {s}: {e}", self.id)))
            .collect()
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            id: self.id.clone(),
            prompt: self.prompt.clone(),
            reference: self.program().map_err(|e| anyhow!("{}: {e}", self.id))?,
            corpus: self.inputs()?,
        })
    }
}
