//! Layout construction and the JSON descriptor schema.

use serde::{Deserialize, Serialize};

use crate::dsl::{Grammar, Platform};

use super::{BitVector, CodecError};

/// What a region's bits choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    /// Pruned: the whole control sequence of one row (1-based index).
    RowPattern { row: usize },
    /// Unpruned: a single control slot within a row.
    RowSlot { row: usize, slot: usize },
    /// Pruned: the whole footer control sequence.
    FooterPattern,
    /// Unpruned: a single footer control slot.
    FooterSlot { slot: usize },
}

/// A contiguous bit span; in a valid vector at most one of its bits is set,
/// and the set bit picks one pattern from the table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub offset: usize,
    /// Admissible patterns in bit order. Slot regions hold one-token patterns.
    pub patterns: Vec<Vec<String>>,
}

impl Region {
    pub fn width(&self) -> usize {
        self.patterns.len()
    }

    pub fn span(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.width()
    }

    pub(crate) fn ones_in(&self, bits: &BitVector) -> usize {
        self.span().filter(|&i| bits.get(i)).count()
    }

    /// Index of the single set bit within this region, if any.
    pub(crate) fn selected(&self, bits: &BitVector) -> Option<usize> {
        self.span().find(|&i| bits.get(i)).map(|i| i - self.offset)
    }

    pub(crate) fn describe(&self) -> String {
        match self.kind {
            RegionKind::RowPattern { row } => format!("row {row}"),
            RegionKind::RowSlot { row, slot } => format!("row {row} slot {slot}"),
            RegionKind::FooterPattern => "footer".to_string(),
            RegionKind::FooterSlot { slot } => format!("footer slot {slot}"),
        }
    }
}

/// A per-platform region schema plus the grammar it encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorLayout {
    platform: Platform,
    pruned: bool,
    width: usize,
    regions: Vec<Region>,
    slots_per_block: usize,
    grammar: Grammar,
}

/// Build the layout for a platform.
///
/// Pruned layouts use one pattern region per row plus one footer pattern
/// region; unpruned layouts use one slot region per control position. The
/// unpruned iOS width is 4 slots x 5 controls x 8 rows + 4 slots x 4
/// controls = 176; pruning shrinks it to 8 x 7 + 16 = 72.
pub fn layout_for(platform: Platform, pruned: bool) -> VectorLayout {
    from_grammar(Grammar::for_platform(platform, pruned))
}

/// Reduced layout for enumeration tests.
#[cfg(test)]
pub(crate) fn custom_pruned_for_tests(grammar: Grammar) -> VectorLayout {
    from_grammar(grammar)
}

fn from_grammar(grammar: Grammar) -> VectorLayout {
    let platform = grammar.platform();
    let pruned = grammar.pruned();
    let slots_per_block = grammar.max_block_controls();
    let mut regions = Vec::new();
    let mut offset = 0usize;
    if pruned {
        let row_patterns: Vec<Vec<String>> = grammar
            .row_patterns()
            .iter()
            .map(|p| p.iter().map(|t| t.to_string()).collect())
            .collect();
        for row in 1..=grammar.max_rows() {
            regions.push(Region {
                kind: RegionKind::RowPattern { row },
                offset,
                patterns: row_patterns.clone(),
            });
            offset += row_patterns.len();
        }
        let footer_patterns: Vec<Vec<String>> = grammar
            .footer_patterns()
            .iter()
            .map(|p| p.iter().map(|t| t.to_string()).collect())
            .collect();
        regions.push(Region {
            kind: RegionKind::FooterPattern,
            offset,
            patterns: footer_patterns.clone(),
        });
        offset += footer_patterns.len();
    } else {
        let row_tokens: Vec<Vec<String>> = grammar
            .row_controls()
            .iter()
            .map(|t| vec![t.to_string()])
            .collect();
        for row in 1..=grammar.max_rows() {
            for slot in 1..=slots_per_block {
                regions.push(Region {
                    kind: RegionKind::RowSlot { row, slot },
                    offset,
                    patterns: row_tokens.clone(),
                });
                offset += row_tokens.len();
            }
        }
        let footer_tokens: Vec<Vec<String>> = grammar
            .footer_controls()
            .iter()
            .map(|t| vec![t.to_string()])
            .collect();
        for slot in 1..=slots_per_block {
            regions.push(Region {
                kind: RegionKind::FooterSlot { slot },
                offset,
                patterns: footer_tokens.clone(),
            });
            offset += footer_tokens.len();
        }
    }
    VectorLayout {
        platform,
        pruned,
        width: offset,
        regions,
        slots_per_block,
        grammar,
    }
}

/// Parse an id like `ios-pruned` back into its layout.
pub fn parse_layout_id(id: &str) -> Result<VectorLayout, CodecError> {
    let (platform, pruned) = match id.rsplit_once('-') {
        Some((p, "pruned")) => (p, true),
        Some((p, "unpruned")) => (p, false),
        _ => return Err(CodecError::UnknownLayoutId(id.to_string())),
    };
    let platform: Platform = platform
        .parse()
        .map_err(|_| CodecError::UnknownLayoutId(id.to_string()))?;
    Ok(layout_for(platform, pruned))
}

#[derive(Serialize, Deserialize)]
struct LayoutDescriptor {
    platform: Platform,
    pruned: bool,
    width: usize,
    regions: Vec<Region>,
}

impl VectorLayout {
    pub fn platform(&self) -> Platform {
        self.platform
    }

    pub fn pruned(&self) -> bool {
        self.pruned
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn max_rows(&self) -> usize {
        self.grammar.max_rows()
    }

    pub(crate) fn slots_per_block(&self) -> usize {
        self.slots_per_block
    }

    /// Stable identifier embedded in manifests and checkpoints.
    pub fn id(&self) -> String {
        format!(
            "{}-{}",
            self.platform,
            if self.pruned { "pruned" } else { "unpruned" }
        )
    }

    /// Serialize the full region schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LayoutDescriptor {
            platform: self.platform,
            pruned: self.pruned,
            width: self.width,
            regions: self.regions.clone(),
        })
        .expect("layout serializes")
    }

    /// Rebuild a layout from a descriptor, verifying it matches the built-in
    /// schema for that platform.
    pub fn from_json(text: &str) -> Result<Self, CodecError> {
        let desc: LayoutDescriptor = serde_json::from_str(text)?;
        let built = layout_for(desc.platform, desc.pruned);
        if desc.width != built.width || desc.regions != built.regions {
            return Err(CodecError::DescriptorMismatch(format!(
                "descriptor for `{}` does not match the built-in schema",
                built.id()
            )));
        }
        Ok(built)
    }

    pub(crate) fn row_pattern_region(&self, row: usize) -> &Region {
        debug_assert!(self.pruned);
        &self.regions[row]
    }

    pub(crate) fn footer_pattern_region(&self) -> &Region {
        debug_assert!(self.pruned);
        &self.regions[self.grammar.max_rows()]
    }

    pub(crate) fn row_slot_region(&self, row: usize, slot: usize) -> &Region {
        debug_assert!(!self.pruned);
        &self.regions[row * self.slots_per_block + slot]
    }

    pub(crate) fn footer_slot_region(&self, slot: usize) -> &Region {
        debug_assert!(!self.pruned);
        &self.regions[self.grammar.max_rows() * self.slots_per_block + slot]
    }

    pub(crate) fn row_occupied(&self, bits: &BitVector, row: usize) -> bool {
        if self.pruned {
            self.row_pattern_region(row).ones_in(bits) >= 1
        } else {
            (0..self.slots_per_block)
                .any(|slot| self.row_slot_region(row, slot).ones_in(bits) >= 1)
        }
    }

    // ---- block options -----------------------------------------------------
    //
    // A "block option" is one admissible control sequence for a row (or the
    // footer). Pruned layouts read options straight from the pattern table;
    // unpruned layouts enumerate every sequence of 1..=4 controls, ordered by
    // length and then lexicographically by control index.

    fn seq_option_count(tokens: usize, max_len: usize) -> usize {
        let mut total = 0usize;
        let mut pow = 1usize;
        for _ in 1..=max_len {
            pow *= tokens;
            total += pow;
        }
        total
    }

    fn seq_for_option(option: usize, tokens: usize, max_len: usize) -> Vec<usize> {
        let mut rest = option;
        for len in 1..=max_len {
            let count = tokens.pow(len as u32);
            if rest < count {
                let mut digits = vec![0usize; len];
                let mut v = rest;
                for d in (0..len).rev() {
                    digits[d] = v % tokens;
                    v /= tokens;
                }
                return digits;
            }
            rest -= count;
        }
        unreachable!("option index out of range")
    }

    fn option_for_seq(indices: &[usize], tokens: usize) -> usize {
        let mut base = 0usize;
        for len in 1..indices.len() {
            base += tokens.pow(len as u32);
        }
        let mut v = 0usize;
        for &d in indices {
            v = v * tokens + d;
        }
        base + v
    }

    pub(crate) fn row_option_count(&self) -> usize {
        if self.pruned {
            self.grammar.row_patterns().len()
        } else {
            Self::seq_option_count(self.grammar.row_controls().len(), self.slots_per_block)
        }
    }

    pub(crate) fn footer_option_count(&self) -> usize {
        if self.pruned {
            self.grammar.footer_patterns().len()
        } else {
            Self::seq_option_count(self.grammar.footer_controls().len(), self.slots_per_block)
        }
    }

    pub(crate) fn row_option_tokens(&self, option: usize) -> Vec<&str> {
        if self.pruned {
            self.grammar.row_patterns()[option].to_vec()
        } else {
            let controls = self.grammar.row_controls();
            Self::seq_for_option(option, controls.len(), self.slots_per_block)
                .into_iter()
                .map(|i| controls[i])
                .collect()
        }
    }

    pub(crate) fn footer_option_tokens(&self, option: usize) -> Vec<&str> {
        if self.pruned {
            self.grammar.footer_patterns()[option].to_vec()
        } else {
            let controls = self.grammar.footer_controls();
            Self::seq_for_option(option, controls.len(), self.slots_per_block)
                .into_iter()
                .map(|i| controls[i])
                .collect()
        }
    }

    pub(crate) fn row_option_index(&self, tokens: &[&str]) -> Option<usize> {
        if self.pruned {
            self.grammar
                .row_patterns()
                .iter()
                .position(|p| p.as_slice() == tokens)
        } else {
            let controls = self.grammar.row_controls();
            let indices: Option<Vec<usize>> = tokens
                .iter()
                .map(|t| controls.iter().position(|c| c == t))
                .collect();
            indices
                .filter(|ix| (1..=self.slots_per_block).contains(&ix.len()))
                .map(|ix| Self::option_for_seq(&ix, controls.len()))
        }
    }

    pub(crate) fn footer_option_index(&self, tokens: &[&str]) -> Option<usize> {
        if self.pruned {
            self.grammar
                .footer_patterns()
                .iter()
                .position(|p| p.as_slice() == tokens)
        } else {
            let controls = self.grammar.footer_controls();
            let indices: Option<Vec<usize>> = tokens
                .iter()
                .map(|t| controls.iter().position(|c| c == t))
                .collect();
            indices
                .filter(|ix| (1..=self.slots_per_block).contains(&ix.len()))
                .map(|ix| Self::option_for_seq(&ix, controls.len()))
        }
    }

    pub(crate) fn write_row_option(&self, bits: &mut BitVector, row: usize, option: usize) {
        if self.pruned {
            bits.set(self.row_pattern_region(row).offset + option, true);
        } else {
            let controls = self.grammar.row_controls().len();
            for (slot, token_ix) in Self::seq_for_option(option, controls, self.slots_per_block)
                .into_iter()
                .enumerate()
            {
                bits.set(self.row_slot_region(row, slot).offset + token_ix, true);
            }
        }
    }

    pub(crate) fn write_footer_option(&self, bits: &mut BitVector, option: usize) {
        if self.pruned {
            bits.set(self.footer_pattern_region().offset + option, true);
        } else {
            let controls = self.grammar.footer_controls().len();
            for (slot, token_ix) in Self::seq_for_option(option, controls, self.slots_per_block)
                .into_iter()
                .enumerate()
            {
                bits.set(self.footer_slot_region(slot).offset + token_ix, true);
            }
        }
    }

    /// Read the option of an occupied row from a valid vector.
    pub(crate) fn read_row_option(&self, bits: &BitVector, row: usize) -> Option<usize> {
        if self.pruned {
            self.row_pattern_region(row).selected(bits)
        } else {
            let mut indices = Vec::new();
            for slot in 0..self.slots_per_block {
                match self.row_slot_region(row, slot).selected(bits) {
                    Some(ix) => indices.push(ix),
                    None => break,
                }
            }
            if indices.is_empty() {
                None
            } else {
                Some(Self::option_for_seq(&indices, self.grammar.row_controls().len()))
            }
        }
    }

    pub(crate) fn read_footer_option(&self, bits: &BitVector) -> Option<usize> {
        if self.pruned {
            self.footer_pattern_region().selected(bits)
        } else {
            let mut indices = Vec::new();
            for slot in 0..self.slots_per_block {
                match self.footer_slot_region(slot).selected(bits) {
                    Some(ix) => indices.push(ix),
                    None => break,
                }
            }
            if indices.is_empty() {
                None
            } else {
                Some(Self::option_for_seq(&indices, self.grammar.footer_controls().len()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_are_disjoint_and_cover_width() {
        for platform in Platform::ALL {
            for pruned in [true, false] {
                let layout = layout_for(platform, pruned);
                let mut next = 0usize;
                for region in layout.regions() {
                    assert_eq!(region.offset, next, "{}", layout.id());
                    next += region.width();
                }
                assert_eq!(next, layout.width(), "{}", layout.id());
            }
        }
    }

    #[test]
    fn layout_id_round_trip() {
        for platform in Platform::ALL {
            for pruned in [true, false] {
                let layout = layout_for(platform, pruned);
                assert_eq!(parse_layout_id(&layout.id()).unwrap(), layout);
            }
        }
        assert!(parse_layout_id("ios").is_err());
        assert!(parse_layout_id("osx-pruned").is_err());
    }

    #[test]
    fn json_descriptor_round_trip() {
        let layout = layout_for(Platform::Ios, true);
        let rebuilt = VectorLayout::from_json(&layout.to_json()).unwrap();
        assert_eq!(rebuilt, layout);
    }

    #[test]
    fn unpruned_option_indexing_round_trips() {
        let layout = layout_for(Platform::Ios, false);
        for option in 0..layout.row_option_count() {
            let tokens = layout.row_option_tokens(option);
            assert_eq!(layout.row_option_index(&tokens), Some(option));
        }
        // 5 + 25 + 125 + 625 sequences of length 1..=4 over 5 controls.
        assert_eq!(layout.row_option_count(), 780);
        assert_eq!(layout.footer_option_count(), 340);
    }
}
