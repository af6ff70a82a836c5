//! Bit-vector layouts and the bijection between grammar-valid trees and
//! fixed-width one-hot style vectors.
//!
//! A layout carves `[0, width)` into disjoint regions. In a valid vector each
//! region is one-hot or (for row regions only) all zero, occupied rows are
//! packed to the top, and the footer is never empty. Pruned layouts give each
//! row a single region whose bits name admissible control sequences; unpruned
//! layouts give every control slot its own region with one bit per control
//! type, which is where the 4x5x8+4x4 = 176 bit arithmetic for the unpruned
//! iOS vector comes from.

mod enumerate;
mod layout;

pub use enumerate::{count_valid, iter_valid, iter_valid_capped, sample_tree, sample_vector, DEFAULT_ITER_CAP};
pub use layout::{layout_for, parse_layout_id, Region, RegionKind, VectorLayout};

use thiserror::Error;

use crate::dsl::{DslTree, Grammar};

/// Errors from the codec layer.
#[derive(Debug, Error)]
pub enum CodecError {
    #[error("tree cannot be encoded in layout `{layout}`: {reason}")]
    UnencodableTree { layout: String, reason: String },
    #[error("bit vector is not valid for layout `{layout}`: {reasons}")]
    InvalidVector { layout: String, reasons: String },
    #[error("layout `{layout}` has {count} valid vectors, above the iteration cap of {cap}")]
    Capacity { layout: String, count: u128, cap: u128 },
    #[error("unknown layout id `{0}`")]
    UnknownLayoutId(String),
    #[error("layout descriptor mismatch: {0}")]
    DescriptorMismatch(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A fixed-width vector of 0/1 values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn zeros(width: usize) -> Self {
        Self { bits: vec![0; width] }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i] != 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b != 0).then_some(i))
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b != 0 { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self, CodecError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => {
                    return Err(CodecError::DescriptorMismatch(format!(
                        "bit string contains `{other}`"
                    )))
                }
            }
        }
        Ok(Self { bits })
    }
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVector({})", self.to_bit_string())
    }
}

/// One way a vector fails its layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VectorViolation {
    WidthMismatch { expected: usize, found: usize },
    /// Two or more bits set inside one region.
    Conflict { region: String },
    /// Footer block carries no choice at all.
    EmptyFooter,
    /// No row is occupied.
    NoRows,
    /// An empty row sits above an occupied one.
    RowGap { row: usize },
    /// An empty control slot sits left of an occupied one.
    SlotGap { row: usize, slot: usize },
}

impl std::fmt::Display for VectorViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorViolation::WidthMismatch { expected, found } => {
                write!(f, "width {found}, layout expects {expected}")
            }
            VectorViolation::Conflict { region } => write!(f, "conflicting bits in {region}"),
            VectorViolation::EmptyFooter => write!(f, "footer region is empty"),
            VectorViolation::NoRows => write!(f, "no occupied row"),
            VectorViolation::RowGap { row } => write!(f, "row {row} is empty below an occupied row"),
            VectorViolation::SlotGap { row, slot } => {
                write!(f, "row {row} slot {slot} is empty left of an occupied slot")
            }
        }
    }
}

/// Check vector validity; violations are data.
pub fn is_valid(bits: &BitVector, layout: &VectorLayout) -> (bool, Vec<VectorViolation>) {
    let mut v = Vec::new();
    if bits.width() != layout.width() {
        v.push(VectorViolation::WidthMismatch {
            expected: layout.width(),
            found: bits.width(),
        });
        return (false, v);
    }
    for region in layout.regions() {
        if region.ones_in(bits) > 1 {
            v.push(VectorViolation::Conflict {
                region: region.describe(),
            });
        }
    }

    let occupied: Vec<bool> = (0..layout.max_rows()).map(|r| layout.row_occupied(bits, r)).collect();
    if !occupied.iter().any(|&o| o) {
        v.push(VectorViolation::NoRows);
    }
    let mut seen_empty: Option<usize> = None;
    for (row, &occ) in occupied.iter().enumerate() {
        if !occ && seen_empty.is_none() {
            seen_empty = Some(row);
        }
        if occ {
            if let Some(gap) = seen_empty {
                v.push(VectorViolation::RowGap { row: gap });
                break;
            }
        }
    }
    // Slot-level packing only exists in unpruned layouts.
    if !layout.pruned() {
        for row in 0..layout.max_rows() {
            let mut empty_at: Option<usize> = None;
            for slot in 0..layout.slots_per_block() {
                let occ = layout.row_slot_region(row, slot).ones_in(bits) == 1;
                if !occ && empty_at.is_none() {
                    empty_at = Some(slot);
                }
                if occ {
                    if let Some(gap) = empty_at {
                        v.push(VectorViolation::SlotGap { row, slot: gap });
                        break;
                    }
                }
            }
        }
        let mut empty_at: Option<usize> = None;
        let mut footer_any = false;
        for slot in 0..layout.slots_per_block() {
            let occ = layout.footer_slot_region(slot).ones_in(bits) == 1;
            footer_any |= occ;
            if !occ && empty_at.is_none() {
                empty_at = Some(slot);
            }
            if occ {
                if let Some(gap) = empty_at {
                    v.push(VectorViolation::SlotGap { row: usize::MAX, slot: gap });
                    break;
                }
            }
        }
        if !footer_any {
            v.push(VectorViolation::EmptyFooter);
        }
    } else if layout.footer_pattern_region().ones_in(bits) == 0 {
        v.push(VectorViolation::EmptyFooter);
    }

    (v.is_empty(), v)
}

fn blocks_from_tree<'t>(
    grammar: &Grammar,
    tree: &'t DslTree,
) -> Result<(Vec<Vec<&'t str>>, Vec<&'t str>), String> {
    let violations = grammar.validate(tree);
    if let Some(first) = violations.first() {
        return Err(first.to_string());
    }
    let (row_nodes, footer) = if grammar.has_stack() {
        let stack = &tree.children()[0];
        (stack.children(), &tree.children()[1])
    } else {
        let n = tree.children().len();
        (&tree.children()[..n - 1], &tree.children()[n - 1])
    };
    let rows = row_nodes
        .iter()
        .map(|r| r.children().iter().map(|c| c.label()).collect())
        .collect();
    let footer_tokens = footer.children().iter().map(|c| c.label()).collect();
    Ok((rows, footer_tokens))
}

fn tree_from_blocks(grammar: &Grammar, rows: Vec<Vec<&str>>, footer: Vec<&str>) -> DslTree {
    let row_nodes: Vec<DslTree> = rows
        .into_iter()
        .map(|tokens| DslTree::new("row", tokens.into_iter().map(DslTree::leaf).collect()))
        .collect();
    let footer_node = DslTree::new("footer", footer.into_iter().map(DslTree::leaf).collect());
    if grammar.has_stack() {
        DslTree::new("body", vec![DslTree::new("stack", row_nodes), footer_node])
    } else {
        let mut children = row_nodes;
        children.push(footer_node);
        DslTree::new("body", children)
    }
}

/// Encode a grammar-valid tree as its one-hot style vector.
pub fn encode(tree: &DslTree, layout: &VectorLayout) -> Result<BitVector, CodecError> {
    let (rows, footer) =
        blocks_from_tree(layout.grammar(), tree).map_err(|reason| CodecError::UnencodableTree {
            layout: layout.id(),
            reason,
        })?;
    let mut bits = BitVector::zeros(layout.width());
    for (row, tokens) in rows.iter().enumerate() {
        let option = layout
            .row_option_index(tokens)
            .ok_or_else(|| CodecError::UnencodableTree {
                layout: layout.id(),
                reason: format!("row {} pattern `{}` not in the layout table", row + 1, tokens.join(" ")),
            })?;
        layout.write_row_option(&mut bits, row, option);
    }
    let option = layout
        .footer_option_index(&footer)
        .ok_or_else(|| CodecError::UnencodableTree {
            layout: layout.id(),
            reason: format!("footer pattern `{}` not in the layout table", footer.join(" ")),
        })?;
    layout.write_footer_option(&mut bits, option);
    Ok(bits)
}

/// Decode a valid vector back into its tree.
///
/// The caller must standardize raw model output first; an invalid vector is
/// an error, not a repair opportunity.
pub fn decode(bits: &BitVector, layout: &VectorLayout) -> Result<DslTree, CodecError> {
    let (ok, violations) = is_valid(bits, layout);
    if !ok {
        let reasons = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CodecError::InvalidVector {
            layout: layout.id(),
            reasons,
        });
    }
    let mut rows = Vec::new();
    for row in 0..layout.max_rows() {
        match layout.read_row_option(bits, row) {
            Some(option) => rows.push(layout.row_option_tokens(option)),
            None => break,
        }
    }
    let footer = layout
        .read_footer_option(bits)
        .map(|option| layout.footer_option_tokens(option))
        .expect("valid vector has a footer");
    Ok(tree_from_blocks(layout.grammar(), rows, footer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Platform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_widths_match_design() {
        assert_eq!(layout_for(Platform::Web, true).width(), 40);
        assert_eq!(layout_for(Platform::Ios, true).width(), 72);
        assert_eq!(layout_for(Platform::Android, true).width(), 88);
        assert_eq!(layout_for(Platform::Web, false).width(), 92);
        assert_eq!(layout_for(Platform::Ios, false).width(), 176);
        assert_eq!(layout_for(Platform::Android, false).width(), 208);
    }

    #[test]
    fn minimal_ios_tree_sets_two_bits() {
        let layout = layout_for(Platform::Ios, true);
        let tree = tree_from_blocks(
            layout.grammar(),
            vec![vec!["label", "btn"]],
            vec!["btn-home", "btn-search"],
        );
        let bits = encode(&tree, &layout).unwrap();
        assert_eq!(bits.count_ones(), 2);
        assert!(bits.get(0), "first row, first pattern");
        assert!(bits.get(8 * 7), "footer region starts after the row regions");
    }

    #[test]
    fn eight_rows_set_nine_bits() {
        let layout = layout_for(Platform::Ios, true);
        let rows = vec![vec!["label", "btn"]; 8];
        let tree = tree_from_blocks(layout.grammar(), rows, vec!["btn-home", "btn-search"]);
        let bits = encode(&tree, &layout).unwrap();
        assert_eq!(bits.count_ones(), 9);
    }

    #[test]
    fn decode_rejects_two_hot_region() {
        let layout = layout_for(Platform::Ios, true);
        let mut bits = BitVector::zeros(layout.width());
        bits.set(0, true);
        bits.set(1, true); // same row region
        bits.set(8 * 7, true);
        let (ok, violations) = is_valid(&bits, &layout);
        assert!(!ok);
        assert!(violations.iter().any(|v| matches!(v, VectorViolation::Conflict { .. })));
        assert!(matches!(
            decode(&bits, &layout),
            Err(CodecError::InvalidVector { .. })
        ));
    }

    #[test]
    fn row_gap_is_invalid() {
        let layout = layout_for(Platform::Ios, true);
        let mut bits = BitVector::zeros(layout.width());
        bits.set(0, true); // row 1
        bits.set(2 * 7, true); // row 3; row 2 left empty
        bits.set(8 * 7, true);
        let (ok, violations) = is_valid(&bits, &layout);
        assert!(!ok);
        assert!(violations.iter().any(|v| matches!(v, VectorViolation::RowGap { row: 1 })));
    }

    #[test]
    fn footer_only_vector_is_invalid() {
        let layout = layout_for(Platform::Ios, true);
        let mut bits = BitVector::zeros(layout.width());
        bits.set(8 * 7 + 3, true);
        let (ok, violations) = is_valid(&bits, &layout);
        assert!(!ok);
        assert!(violations.contains(&VectorViolation::NoRows));
    }

    #[test]
    fn round_trip_all_platforms_both_prunings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for platform in Platform::ALL {
            for pruned in [true, false] {
                let layout = layout_for(platform, pruned);
                for _ in 0..500 {
                    let tree = sample_tree(&layout, &mut rng);
                    assert!(layout.grammar().accepts(&tree));
                    let bits = encode(&tree, &layout).unwrap();
                    let (ok, violations) = is_valid(&bits, &layout);
                    assert!(ok, "{platform} pruned={pruned}: {violations:?}");
                    assert_eq!(decode(&bits, &layout).unwrap(), tree);
                }
            }
        }
    }

    #[test]
    fn encode_rejects_pattern_outside_pruned_table() {
        let layout = layout_for(Platform::Ios, true);
        // `slider` alone is fine unpruned but was pruned away.
        let tree = tree_from_blocks(
            layout.grammar(),
            vec![vec!["slider", "slider"]],
            vec!["btn-home", "btn-search"],
        );
        assert!(matches!(
            encode(&tree, &layout),
            Err(CodecError::UnencodableTree { .. })
        ));
    }

    #[test]
    fn bit_string_round_trip() {
        let layout = layout_for(Platform::Web, true);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits = sample_vector(&layout, &mut rng);
        let s = bits.to_bit_string();
        assert_eq!(BitVector::from_bit_string(&s).unwrap(), bits);
    }
}
