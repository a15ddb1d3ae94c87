use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Counts per error type, most frequent first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub rows: Vec<(String, usize)>,
}

pub fn error_stats<'a>(kinds: impl IntoIterator<Item = &'a str>) -> ErrorTable {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for k in kinds {
        *counts.entry(k).or_default() += 1;
    }
    let mut rows: Vec<(String, usize)> = counts.into_iter().map(|(k, n)| (k.to_string(), n)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ErrorTable { rows }
}

impl ErrorTable {
    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.1).sum()
    }

    /// Two-column plain-text table; empty string when there are no rows.
    pub fn render(&self) -> String {
        if self.rows.is_empty() {
            return String::new();
        }
        let w = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("Error Type".len());
        let mut s = format!("{:<w$}  #Cases\n", "Error Type");
        for (k, n) in &self.rows {
            s.push_str(&format!("{k:<w$}  {n}\n"));
        }
        s
    }
}
