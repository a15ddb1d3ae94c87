//! A parsed subject program together with its entry point.

use alloc::string::{String, ToString};

use crate::inputs::InputTuple;
use crate::subjectlang::{check_eligibility, parse_source, EligibilityReport, ParseError, SyntaxTree};
use crate::tracer::{self, Limits, Trace};

#[derive(Clone, Debug)]
pub struct Program {
    pub id: String,
    pub source: String,
    pub tree: SyntaxTree,
    pub entry: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no function named '{0}'")]
    NoSuchEntry(String),
    #[error("program defines no function")]
    NoFunction,
    #[error("ineligible ({criterion}) at line {line}: {message}")]
    Ineligible { criterion: &'static str, line: u32, message: String },
}

impl Program {
    /// Parses `source`; without `entry` the sole (or first) function is used.
    pub fn parse(id: impl Into<String>, source: impl Into<String>, entry: Option<&str>) -> Result<Program, ProgramError> {
        let source = source.into();
        let mut tree = parse_source(&source)?;
        let id = id.into();
        tree.source_id = id.clone();
        let entry = match entry {
            Some(e) if tree.function(e).is_some() => e.to_string(),
            Some(e) => return Err(ProgramError::NoSuchEntry(e.to_string())),
            None => tree
                .sole_function()
                .or_else(|| tree.functions().next())
                .map(|f| f.name.clone())
                .ok_or(ProgramError::NoFunction)?,
        };
        Ok(Program { id, source, tree, entry })
    }

    /// Like [`Program::parse`], also requiring eligibility.
    pub fn parse_eligible(id: impl Into<String>, source: impl Into<String>, entry: Option<&str>) -> Result<Program, ProgramError> {
        let p = Program::parse(id, source, entry)?;
        let report = p.eligibility();
        if let Some((criterion, d)) = report.first_failure() {
            return Err(ProgramError::Ineligible { criterion, line: d.line, message: d.message.clone() });
        }
        Ok(p)
    }

    pub fn eligibility(&self) -> EligibilityReport {
        check_eligibility(&self.tree)
    }

    pub fn arity(&self) -> usize {
        self.tree.function(&self.entry).map(|f| f.params.len()).unwrap_or(0)
    }

    pub fn run(&self, input: &InputTuple, limits: Limits) -> Trace {
        tracer::run(&self.tree, &self.entry, &input.positional, limits)
    }
}

/// A programming task: description, reference solution and validated inputs.
#[derive(Clone, Debug)]
pub struct Problem {
    pub id: String,
    /// Natural-language description shown to solvers.
    pub prompt: String,
    pub reference: Program,
    pub corpus: alloc::vec::Vec<InputTuple>,
}
