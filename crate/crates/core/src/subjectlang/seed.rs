//! Seeded sampling of statement-level subtrees.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::{Span, SyntaxTree};
use super::printer::print_stmt;
use super::walk::node_count;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedFragment {
    pub text: String,
    pub node_count: usize,
    /// `(source id, root span)`.
    pub origin: (String, Span),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SeedError {
    #[error("EmptyTree: the tree has no statements")]
    EmptyTree,
}

/// Picks a statement subtree uniformly among those with at most `max_nodes`
/// nodes. When none is small enough the smallest subtree is returned.
pub fn sample_seed(tree: &SyntaxTree, seed: u64, max_nodes: usize) -> Result<SeedFragment, SeedError> {
    let all = tree.statements();
    if all.is_empty() {
        return Err(SeedError::EmptyTree);
    }
    let sized: Vec<_> = all.iter().map(|s| (*s, node_count(s))).collect();
    let fitting: Vec<_> = sized.iter().filter(|(_, n)| *n <= max_nodes).collect();
    let (stmt, n) = if fitting.is_empty() {
        *sized.iter().min_by_key(|(_, n)| *n).unwrap_or(&sized[0])
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = rng.gen_range(0..fitting.len() as u64) as usize;
        *fitting[idx]
    };
    Ok(SeedFragment { text: print_stmt(stmt), node_count: n, origin: (tree.source_id.clone(), stmt.span) })
}
