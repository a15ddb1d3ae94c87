//! Task prefixes wrapped around training samples.

use alloc::string::String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TaskPrefix {
    NL2Code,
    SimulateExecution,
    DeduceConstraints,
    DebugRefine,
}

impl TaskPrefix {
    pub const ALL: [TaskPrefix; 4] =
        [TaskPrefix::NL2Code, TaskPrefix::SimulateExecution, TaskPrefix::DeduceConstraints, TaskPrefix::DebugRefine];

    /// Template text with `{prompt}` and `{completion}` slots.
    pub fn template(self) -> &'static str {
        match self {
            TaskPrefix::NL2Code => include_str!("templates/nl2code.txt"),
            TaskPrefix::SimulateExecution => include_str!("templates/simulate_execution.txt"),
            TaskPrefix::DeduceConstraints => include_str!("templates/deduce_constraints.txt"),
            TaskPrefix::DebugRefine => include_str!("templates/debug_refine.txt"),
        }
    }

    /// Text before the `{prompt}` slot.
    pub fn head(self) -> &'static str {
        let t = self.template();
        &t[..t.find("{prompt}").unwrap_or(t.len())]
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskPrefix::NL2Code => "nl2code",
            TaskPrefix::SimulateExecution => "simulate_execution",
            TaskPrefix::DeduceConstraints => "deduce_constraints",
            TaskPrefix::DebugRefine => "debug_refine",
        }
    }
}

/// Fills both slots in one pass, so slot markers inside `prompt` survive.
pub fn with_prefix(task: TaskPrefix, prompt: &str, completion: &str) -> String {
    let t = task.template();
    let p = t.find("{prompt}").expect("template has a prompt slot");
    let rest = &t[p + "{prompt}".len()..];
    let c = rest.find("{completion}").expect("template has a completion slot");
    let mut out = String::with_capacity(t.len() + prompt.len() + completion.len());
    out.push_str(&t[..p]);
    out.push_str(prompt);
    out.push_str(&rest[..c]);
    out.push_str(completion);
    out.push_str(&rest[c + "{completion}".len()..]);
    out
}
