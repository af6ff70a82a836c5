//! The layout DSL: ordered labeled trees, per-platform grammars, parsing and
//! canonical serialization.
//!
//! Every stage of the pipeline exchanges layouts as [`DslTree`] values. The
//! token alphabet is closed; grammars restrict which containers admit which
//! children and how many.

mod grammar;
mod parse;
mod serialize;

pub use grammar::{Grammar, Platform, Violation, UNION_ALPHABET};
pub use parse::parse;
pub use serialize::serialize;

use thiserror::Error;

/// Errors from parsing or serializing DSL text.
#[derive(Debug, Error)]
pub enum DslError {
    /// Malformed source text. Callers scoring generated DSLs must map this
    /// to similarity 0.
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    /// A tree labeled with a token outside the closed alphabet.
    #[error("invalid tree: unknown token `{label}`")]
    InvalidTree { label: String },
}

/// An ordered labeled tree over the DSL token alphabet.
///
/// Child order is significant and preserved by the parse/serialize round
/// trip. Equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DslTree {
    label: String,
    children: Vec<DslTree>,
}

impl DslTree {
    pub fn new(label: impl Into<String>, children: Vec<DslTree>) -> Self {
        Self {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(label: impl Into<String>) -> Self {
        Self::new(label, Vec::new())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn children(&self) -> &[DslTree] {
        &self.children
    }

    /// Total number of nodes (at least 1).
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(DslTree::node_count).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_tree() -> DslTree {
        DslTree::new(
            "body",
            vec![
                DslTree::new("row", vec![DslTree::leaf("label"), DslTree::leaf("btn")]),
                DslTree::new("footer", vec![DslTree::leaf("btn-home")]),
            ],
        )
    }

    #[test]
    fn node_count_single_leaf() {
        assert_eq!(DslTree::leaf("btn-home").node_count(), 1);
    }

    #[test]
    fn node_count_nested() {
        // body { row { label btn } } has 4 nodes, counted by hand.
        let t = DslTree::new(
            "body",
            vec![DslTree::new(
                "row",
                vec![DslTree::leaf("label"), DslTree::leaf("btn")],
            )],
        );
        assert_eq!(t.node_count(), 4);
    }

    #[test]
    fn node_count_is_structural_sum() {
        let t = example_tree();
        let by_children: usize = 1 + t.children().iter().map(DslTree::node_count).sum::<usize>();
        assert_eq!(t.node_count(), by_children);
        assert_eq!(t.node_count(), 6);
    }
}
