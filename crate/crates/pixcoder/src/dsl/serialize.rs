//! Canonical pretty-printer: one node per line, two-space indent per depth.
//!
//! The format is fixed so golden tests stay byte-stable; `parse(serialize(t))`
//! reproduces `t` for every tree over the union alphabet.

use super::grammar::in_union_alphabet;
use super::{DslError, DslTree};

/// Render a tree as canonical DSL text (no trailing newline).
pub fn serialize(tree: &DslTree) -> Result<String, DslError> {
    let mut out = String::new();
    write_node(tree, 0, &mut out)?;
    Ok(out)
}

fn write_node(node: &DslTree, depth: usize, out: &mut String) -> Result<(), DslError> {
    if !in_union_alphabet(node.label()) {
        return Err(DslError::InvalidTree {
            label: node.label().to_string(),
        });
    }
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(node.label());
    if !node.children().is_empty() {
        out.push_str(" {\n");
        for child in node.children() {
            write_node(child, depth + 1, out)?;
            out.push('\n');
        }
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push('}');
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn leaf_serializes_to_its_label() {
        assert_eq!(serialize(&DslTree::leaf("btn-home")).unwrap(), "btn-home");
    }

    #[test]
    fn canonical_form_is_frozen() {
        let t = parse("body { row { title text btn } footer { link-home link-about } }").unwrap();
        let expected = "\
body {
  row {
    title
    text
    btn
  }
  footer {
    link-home
    link-about
  }
}";
        assert_eq!(serialize(&t).unwrap(), expected);
    }

    #[test]
    fn unknown_label_is_invalid() {
        let t = DslTree::leaf("frobnicator");
        assert!(matches!(
            serialize(&t),
            Err(DslError::InvalidTree { label }) if label == "frobnicator"
        ));
    }

    #[test]
    fn round_trip_identity() {
        let t = parse("body { stack { row { label slider label } } footer { btn-home btn-search } }")
            .unwrap();
        assert_eq!(parse(&serialize(&t).unwrap()).unwrap(), t);
    }
}
