//! Subject-language front end: source units, parsing, printing, eligibility
//! screening and seed sampling.

pub mod ast;
mod eligibility;
mod lexer;
mod parser;
mod printer;
mod seed;
mod source;
pub mod walk;

use alloc::collections::BTreeSet;
use alloc::string::String;

pub use ast::*;
pub use eligibility::{
    check_eligibility, check_eligibility_with, screen, Criterion, Diagnostic, EligibilityConfig, EligibilityReport,
    Screening, BUILTINS, OPTIONAL_BUILTINS,
};
pub use parser::{parse_expression, parse_source};
pub use printer::{print_expr, print_stmt, print_stmts, print_tree};
pub use seed::{sample_seed, SeedError, SeedFragment};
pub use source::{sha256_hex, SourceUnit};
pub use walk::structurally_equal;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("SyntaxError at line {line}: {message}")]
    Syntax { line: u32, message: String },
    #[error("UnsupportedConstruct at line {line}: {construct}")]
    Unsupported { line: u32, construct: String },
}

impl ParseError {
    pub fn line(&self) -> u32 {
        match self {
            ParseError::Syntax { line, .. } | ParseError::Unsupported { line, .. } => *line,
        }
    }
}

/// Parses a source unit; the tree records the unit's id.
pub fn parse(source: &SourceUnit) -> Result<SyntaxTree, ParseError> {
    let mut tree = parse_source(&source.text)?;
    tree.source_id = source.id.clone();
    Ok(tree)
}

/// Static executable lines: every statement of the entry function (its
/// `def` line included) plus every top-level statement.
pub fn list_executable_lines(tree: &SyntaxTree) -> BTreeSet<u32> {
    let entry = tree.sole_function().or_else(|| tree.functions().next()).map(|f| f.name.clone());
    list_executable_lines_for(tree, entry.as_deref())
}

pub fn list_executable_lines_for(tree: &SyntaxTree, entry: Option<&str>) -> BTreeSet<u32> {
    let mut lines = BTreeSet::new();
    for s in &tree.body {
        lines.insert(s.span.line);
        if let StmtKind::FunctionDef(f) = &s.kind {
            if Some(f.name.as_str()) == entry {
                for inner in s.flatten() {
                    lines.insert(inner.span.line);
                }
            }
        }
    }
    lines
}
