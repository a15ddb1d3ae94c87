//! Static screening against the four selection criteria.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::walk::{bound_names, visit_stmts};
use super::{parse_source, ParseError};

pub const BUILTINS: &[&str] = &[
    "len", "range", "enumerate", "sorted", "sum", "min", "max", "abs", "round", "zip", "map", "filter", "reversed",
    "any", "all", "isinstance", "set", "dict", "list", "tuple", "str", "int", "float", "bool", "print",
];

/// Builtins the interpreter implements beyond the default allowlist; enable via config.
pub const OPTIONAL_BUILTINS: &[&str] = &["ord", "chr", "divmod", "pow"];

const EXTERNAL: &[&str] = &[
    "open", "input", "exec", "eval", "compile", "__import__", "breakpoint", "exit", "quit", "help", "globals",
    "locals", "vars", "getattr", "setattr", "delattr", "os", "sys", "socket", "subprocess", "pathlib", "shutil",
    "urllib", "requests", "http", "io", "glob", "pickle", "sqlite3", "ftplib", "smtplib", "tempfile", "environ",
    "getenv", "signal", "threading", "multiprocessing", "asyncio",
];

const NONDETERMINISTIC: &[&str] =
    &["random", "time", "datetime", "uuid", "secrets", "id", "hash", "numpy", "np", "perf_counter", "monotonic", "getpid"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Criterion {
    pub pass: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl Criterion {
    fn ok() -> Self {
        Criterion { pass: true, diagnostics: Vec::new() }
    }

    fn fail(&mut self, line: u32, message: String) {
        self.pass = false;
        if !self.diagnostics.iter().any(|d| d.line == line && d.message == message) {
            self.diagnostics.push(Diagnostic { line, message });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EligibilityReport {
    pub external_resources: Criterion,
    pub builtin_types_only: Criterion,
    pub single_function: Criterion,
    pub deterministic: Criterion,
}

impl EligibilityReport {
    fn passing() -> Self {
        EligibilityReport {
            external_resources: Criterion::ok(),
            builtin_types_only: Criterion::ok(),
            single_function: Criterion::ok(),
            deterministic: Criterion::ok(),
        }
    }

    pub fn eligible(&self) -> bool {
        self.external_resources.pass && self.builtin_types_only.pass && self.single_function.pass && self.deterministic.pass
    }

    pub fn criteria(&self) -> [(&'static str, &Criterion); 4] {
        [
            ("external_resources", &self.external_resources),
            ("builtin_types_only", &self.builtin_types_only),
            ("single_function", &self.single_function),
            ("deterministic", &self.deterministic),
        ]
    }

    /// First failure message, for rejection logs.
    pub fn first_failure(&self) -> Option<(&'static str, &Diagnostic)> {
        self.criteria().into_iter().find_map(|(n, c)| c.diagnostics.first().map(|d| (n, d)))
    }
}

#[derive(Clone, Debug, Default)]
pub struct EligibilityConfig {
    /// Names admitted on top of [`BUILTINS`].
    pub extra_builtins: Vec<String>,
}

pub fn check_eligibility(tree: &SyntaxTree) -> EligibilityReport {
    check_eligibility_with(tree, &EligibilityConfig::default())
}

pub fn check_eligibility_with(tree: &SyntaxTree, cfg: &EligibilityConfig) -> EligibilityReport {
    let mut r = EligibilityReport::passing();
    let mut n_funcs = 0;
    let mut typing_names: BTreeSet<String> = BTreeSet::new();
    for s in &tree.body {
        match &s.kind {
            StmtKind::FunctionDef(_) => {
                n_funcs += 1;
                if n_funcs > 1 {
                    r.single_function.fail(s.span.line, "additional top-level function definition".into());
                }
            }
            StmtKind::TypingImport { names } => {
                for (n, a) in names {
                    typing_names.insert(a.clone().unwrap_or_else(|| n.clone()));
                }
            }
            StmtKind::Assert { .. } | StmtKind::Expr(_) => {}
            other => r
                .single_function
                .fail(s.span.line, format!("top-level {} statement outside the function", other.name())),
        }
    }
    if n_funcs == 0 {
        r.single_function.fail(1, "no top-level function definition".into());
    }

    // Names bound by the program: parameters, locals, function names, typing imports.
    let mut bound: BTreeSet<String> = typing_names;
    for f in tree.functions() {
        bound.insert(f.name.clone());
        bound.extend(bound_names(f));
    }
    let allowed = |n: &str| BUILTINS.contains(&n) || cfg.extra_builtins.iter().any(|b| b == n);

    for s in &tree.body {
        if let StmtKind::FunctionDef(f) = &s.kind {
            visit_stmts(
                &f.body,
                &mut |inner| {
                    if let StmtKind::FunctionDef(g) = &inner.kind {
                        r.single_function.fail(inner.span.line, format!("nested function definition '{}'", g.name));
                    }
                },
                &mut |_| {},
            );
        }
    }

    let mut names: Vec<(u32, String)> = Vec::new();
    visit_stmts(&tree.body, &mut |_| {}, &mut |e| match &e.kind {
        ExprKind::Name(n) => names.push((e.span.line, n.clone())),
        ExprKind::Call { func, .. } => names.push((e.span.line, func.clone())),
        ExprKind::Attribute { attr, .. } | ExprKind::MethodCall { method: attr, .. } => {
            if EXTERNAL.contains(&attr.as_str()) || NONDETERMINISTIC.contains(&attr.as_str()) {
                names.push((e.span.line, attr.clone()));
            }
        }
        _ => {}
    });
    for (line, n) in names {
        let is_bound = bound.contains(&n);
        if EXTERNAL.contains(&n.as_str()) && !is_bound {
            r.external_resources.fail(line, format!("reference to external resource '{n}'"));
        } else if NONDETERMINISTIC.contains(&n.as_str()) && !is_bound {
            r.deterministic.fail(line, format!("reference to nondeterministic primitive '{n}'"));
        } else if !is_bound && !allowed(&n) {
            r.builtin_types_only.fail(line, format!("name '{n}' is not a builtin on the allowlist"));
        }
    }
    r
}

/// Result of screening raw text: parse-level rejections of imports and
/// classes are reported as criterion failures instead of errors.
#[derive(Clone, Debug)]
pub struct Screening {
    pub tree: Option<SyntaxTree>,
    pub report: EligibilityReport,
}

pub fn screen(text: &str, cfg: &EligibilityConfig) -> Result<Screening, ParseError> {
    match parse_source(text) {
        Ok(tree) => {
            let report = check_eligibility_with(&tree, cfg);
            Ok(Screening { tree: Some(tree), report })
        }
        Err(ParseError::Unsupported { line, construct }) => {
            let mut report = EligibilityReport::passing();
            if construct.starts_with("import of") {
                let module = construct.split('\'').nth(1).unwrap_or("").split('.').next().unwrap_or("").to_string();
                if EXTERNAL.contains(&module.as_str()) {
                    report.external_resources.fail(line, construct.clone());
                } else if NONDETERMINISTIC.contains(&module.as_str()) {
                    report.deterministic.fail(line, construct.clone());
                } else {
                    report.builtin_types_only.fail(line, construct.clone());
                }
                Ok(Screening { tree: None, report })
            } else if construct == "class definition" {
                report.builtin_types_only.fail(line, construct);
                Ok(Screening { tree: None, report })
            } else {
                Err(ParseError::Unsupported { line, construct })
            }
        }
        Err(e) => Err(e),
    }
}
