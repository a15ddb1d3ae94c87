//! Deterministic forward narration of a run.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{input_id, FormatError, TraceDoc, TraceFormat};
use crate::program::Program;
use crate::subjectlang::{Stmt, StmtId, StmtKind};
use crate::tracer::{repr, Binding, EventKind, Outcome, Trace, TraceEvent};

/// Iterations narrated per loop run; later ones are summarized.
pub const LOOP_NARRATION_CAP: usize = 16;

fn code(program: &Program, line: u32) -> String {
    let text = program.source.lines().nth(line as usize - 1).unwrap_or("");
    let text: String = match program.tree.comment_col(line) {
        Some(c) => text.chars().take(c as usize).collect(),
        None => text.to_string(),
    };
    text.trim().to_string()
}

fn assignments(bs: &[Binding]) -> String {
    let parts: Vec<String> = bs.iter().map(|b| format!("{} = {}", b.name, b.repr)).collect();
    join_and(&parts)
}

fn join_and(parts: &[String]) -> String {
    match parts.len() {
        0 => String::new(),
        1 => parts[0].clone(),
        2 => format!("{} and {}", parts[0], parts[1]),
        n => format!("{}, and {}", parts[..n - 1].join(", "), parts[n - 1]),
    }
}

fn effect(bs: &[Binding]) -> String {
    if bs.is_empty() {
        "leaves every variable unchanged".into()
    } else {
        format!("so now {}", assignments(bs))
    }
}

struct LoopRun {
    stmt: StmtId,
    line: u32,
    iterations: usize,
    /// Latest values of variables changed during summarized iterations.
    hidden: Vec<Binding>,
}

struct Narrator<'a> {
    program: &'a Program,
    stmts: BTreeMap<StmtId, &'a Stmt>,
    /// For each loop, the ids inside its body.
    bodies: BTreeMap<StmtId, BTreeSet<StmtId>>,
    out: Vec<String>,
}

impl<'a> Narrator<'a> {
    fn inside(&self, run: &LoopRun, id: Option<StmtId>) -> bool {
        id.is_some_and(|id| id == run.stmt || self.bodies.get(&run.stmt).is_some_and(|b| b.contains(&id)))
    }

    fn close(&mut self, run: LoopRun) {
        if run.iterations > LOOP_NARRATION_CAP {
            let mut s = format!(
                "Iterations {} to {} of the loop on line {} proceed likewise",
                LOOP_NARRATION_CAP + 1,
                run.iterations,
                run.line
            );
            if !run.hidden.is_empty() {
                s.push_str(&format!(", after which {}", assignments(&run.hidden)));
            }
            s.push('.');
            self.out.push(s);
        }
    }

    fn sentence(&self, e: &TraceEvent, iteration: usize, result: &str) -> String {
        let line = e.line;
        let c = code(self.program, line);
        let kind = e.stmt.and_then(|id| self.stmts.get(&id)).map(|s| &s.kind);
        let body = match kind {
            Some(StmtKind::If { .. }) => {
                if e.branch == Some(true) {
                    format!("the condition of `{c}` is true, so its block runs")
                } else {
                    format!("the condition of `{c}` is false, so its block is skipped")
                }
            }
            Some(StmtKind::For { .. }) => {
                if e.branch == Some(true) {
                    if e.changed.is_empty() {
                        format!("`{c}` starts iteration {iteration} with the loop variables unchanged")
                    } else {
                        format!("`{c}` starts iteration {iteration} with {}", assignments(&e.changed))
                    }
                } else {
                    format!("`{c}` has no items left, so the loop ends")
                }
            }
            Some(StmtKind::While { .. }) => {
                if e.branch == Some(true) {
                    format!("the condition of `{c}` holds, so iteration {iteration} runs")
                } else {
                    format!("the condition of `{c}` no longer holds, so the loop ends")
                }
            }
            Some(StmtKind::Break) => "`break` leaves the loop".into(),
            Some(StmtKind::Continue) => "`continue` jumps to the next iteration".into(),
            Some(StmtKind::Pass) => "`pass` does nothing".into(),
            Some(StmtKind::Assert { .. }) => format!("the assertion `{c}` holds"),
            Some(StmtKind::Return(_)) => format!("`{c}` returns {result}"),
            Some(StmtKind::Assign { .. } | StmtKind::AugAssign { .. }) => format!("`{c}` runs, {}", effect(&e.changed)),
            _ => format!("`{c}` runs and {}", effect(&e.changed).replacen("so now", "now", 1)),
        };
        let explicit_return = matches!(kind, Some(StmtKind::Return(_)));
        if e.kind == EventKind::Return && !explicit_return {
            format!("Line {line}: {body}; the function then ends and returns {result}.")
        } else {
            format!("Line {line}: {body}.")
        }
    }
}

/// Summarizes a finished loop run, unless an enclosing run is itself being summarized.
fn close(n: &mut Narrator<'_>, runs: &mut [LoopRun], run: LoopRun) {
    if let Some(outer) = runs.iter_mut().find(|o| o.iterations > LOOP_NARRATION_CAP) {
        for b in run.hidden {
            outer.hidden.retain(|h| h.name != b.name);
            outer.hidden.push(b);
        }
        return;
    }
    n.close(run);
}

/// Line-by-line narration ending in the predicted output inside `[ANSWER]` tags.
pub fn forward_monologue(program: &Program, trace: &Trace) -> Result<TraceDoc, FormatError> {
    let result = match &trace.outcome {
        Outcome::Return(v) => repr(v),
        Outcome::Failure { kind, .. } => return Err(FormatError::UnsupportedTrace(kind.to_string())),
    };
    let fstmt = program
        .tree
        .function_stmt(&program.entry)
        .ok_or_else(|| FormatError::UnsupportedConstruct(format!("no function {}", program.entry)))?;
    let mut stmts = BTreeMap::new();
    let mut bodies = BTreeMap::new();
    for s in fstmt.flatten() {
        stmts.insert(s.id, s);
        if matches!(s.kind, StmtKind::For { .. } | StmtKind::While { .. }) {
            let inner: BTreeSet<StmtId> = s.flatten().into_iter().skip(1).map(|c| c.id).collect();
            bodies.insert(s.id, inner);
        }
    }
    let mut n = Narrator { program, stmts, bodies, out: Vec::new() };

    let args: Vec<String> = trace.input.iter().map(|b| b.repr.clone()).collect();
    let call = format!("{}({})", program.entry, args.join(", "));
    let mut intro = format!("We call `{call}`. Execution enters the function defined on line {}", fstmt.span.line);
    if trace.input.is_empty() {
        intro.push_str(", which takes no arguments.");
    } else {
        intro.push_str(&format!(" with {}.", assignments(&trace.input)));
    }
    n.out.push(intro);

    let mut runs: Vec<LoopRun> = Vec::new();
    let events: Vec<&TraceEvent> = trace.top_events().filter(|e| e.kind != EventKind::Entry).collect();
    for e in events {
        // Leaving loops whose body this statement is not part of.
        while let Some(r) = runs.last() {
            if n.inside(r, e.stmt) {
                break;
            }
            let r = runs.pop().unwrap();
            close(&mut n, &mut runs, r);
        }
        let is_loop = e.stmt.is_some_and(|id| n.bodies.contains_key(&id));
        let mut iteration = 0;
        let mut ending = false;
        if is_loop {
            let id = e.stmt.unwrap();
            if e.branch == Some(true) {
                match runs.last_mut() {
                    Some(r) if r.stmt == id => r.iterations += 1,
                    _ => runs.push(LoopRun { stmt: id, line: e.line, iterations: 1, hidden: Vec::new() }),
                }
                iteration = runs.last().unwrap().iterations;
            } else {
                ending = true;
            }
        }
        if e.kind == EventKind::Return {
            while let Some(r) = runs.pop() {
                close(&mut n, &mut runs, r);
            }
        }
        let hidden_by = runs.iter().position(|r| r.iterations > LOOP_NARRATION_CAP);
        match hidden_by {
            Some(i) if e.kind != EventKind::Return && !(ending && runs.len() == i + 1 && runs[i].stmt == e.stmt.unwrap_or(u32::MAX)) => {
                let hidden = &mut runs[i].hidden;
                for b in &e.changed {
                    hidden.retain(|h| h.name != b.name);
                    hidden.push(b.clone());
                }
            }
            _ => {
                if ending {
                    if let Some(r) = runs.last() {
                        if Some(r.stmt) == e.stmt {
                            let r = runs.pop().unwrap();
                            close(&mut n, &mut runs, r);
                        }
                    }
                }
                let s = n.sentence(e, iteration, &result);
                n.out.push(s);
            }
        }
    }
    while let Some(r) = runs.pop() {
        close(&mut n, &mut runs, r);
    }

    let executed = &trace.covered.lines;
    let missing: Vec<u32> = fstmt
        .flatten()
        .into_iter()
        .skip(1)
        .map(|s| s.span.line)
        .filter(|l| !executed.contains(l))
        .collect::<BTreeSet<u32>>()
        .into_iter()
        .collect();
    for l in &missing {
        n.out.push(format!("Line {l} (`{}`) is not executed.", code(program, *l)));
    }
    n.out.push(format!("So `{call}` returns {result}."));
    n.out.push(format!("[ANSWER]\n{result}\n[/ANSWER]"));
    let mut text = n.out.join("\n");
    text.push('\n');
    Ok(TraceDoc { format: TraceFormat::ForwardMonologue, text, program_id: program.id.clone(), input_id: input_id(trace) })
}
