//! Score-vector standardization: thresholding plus ambiguity repair.
//!
//! `binarize` turns raw scores into bits; `resolve` repairs every possible
//! ambiguity (region conflicts, row gaps, empty footer, zero rows) so that
//! decoding can never hit a syntax error. Repairs always keep the
//! highest-scoring choice and break ties toward the lower bit index.

use crate::codec::{is_valid, BitVector, Region, VectorLayout};
use crate::nn::ScoreVector;
use crate::num::Scalar;

/// bit = 1 iff score > threshold.
pub fn binarize<F: Scalar>(scores: &ScoreVector<F>, threshold: f64) -> BitVector {
    let t = F::from_f64_lossy(threshold);
    let mut bits = BitVector::zeros(scores.width());
    for i in 0..scores.width() {
        if scores.get(i) > t {
            bits.set(i, true);
        }
    }
    bits
}

fn argmax_in<F: Scalar>(scores: &ScoreVector<F>, region: &Region, only_set: Option<&BitVector>) -> usize {
    let mut best = region.offset;
    let mut best_score = F::neg_infinity();
    for i in region.span() {
        if let Some(bits) = only_set {
            if !bits.get(i) {
                continue;
            }
        }
        if scores.get(i) > best_score {
            best_score = scores.get(i);
            best = i;
        }
    }
    best
}

fn clear_region(bits: &mut BitVector, region: &Region) {
    for i in region.span() {
        bits.set(i, false);
    }
}

/// Repair a raw bit vector into a valid one.
///
/// Conflicted regions keep their score argmax; occupied slots and rows pack
/// to the front preserving order; an empty footer takes its argmax pattern;
/// a rowless vector takes the single best-scoring row choice. Total: any
/// score vector resolves to something `decode` accepts.
pub fn resolve<F: Scalar>(raw: &BitVector, scores: &ScoreVector<F>, layout: &VectorLayout) -> BitVector {
    assert_eq!(raw.width(), layout.width(), "raw width matches layout");
    assert_eq!(scores.width(), layout.width(), "scores width matches layout");
    let mut bits = raw.clone();

    // Conflicting patterns inside one region: keep the strongest.
    for region in layout.regions() {
        if region.ones_in(&bits) > 1 {
            let keep = argmax_in(scores, region, Some(&bits));
            clear_region(&mut bits, region);
            bits.set(keep, true);
        }
    }

    if layout.pruned() {
        // Pack occupied rows to the top, preserving order.
        let picks: Vec<usize> = (0..layout.max_rows())
            .filter_map(|r| layout.row_pattern_region(r).selected(&bits))
            .collect();
        for r in 0..layout.max_rows() {
            clear_region(&mut bits, layout.row_pattern_region(r));
        }
        for (r, &pattern) in picks.iter().enumerate() {
            let region = layout.row_pattern_region(r);
            bits.set(region.offset + pattern, true);
        }
        if picks.is_empty() {
            // No row survived: take the single best row choice overall.
            let mut best = (0usize, 0usize, F::neg_infinity());
            for r in 0..layout.max_rows() {
                let region = layout.row_pattern_region(r);
                let i = argmax_in(scores, region, None);
                if scores.get(i) > best.2 {
                    best = (r, i - region.offset, scores.get(i));
                }
            }
            let region = layout.row_pattern_region(0);
            bits.set(region.offset + best.1, true);
        }
        let footer = layout.footer_pattern_region();
        if footer.ones_in(&bits) == 0 {
            bits.set(argmax_in(scores, footer, None), true);
        }
    } else {
        let slots = layout.slots_per_block();
        // Left-pack slots within each row.
        let mut row_tokens: Vec<Vec<usize>> = Vec::with_capacity(layout.max_rows());
        for r in 0..layout.max_rows() {
            let tokens: Vec<usize> = (0..slots)
                .filter_map(|s| layout.row_slot_region(r, s).selected(&bits))
                .collect();
            row_tokens.push(tokens);
        }
        // Drop empty rows, packing the rest to the top.
        let mut packed: Vec<Vec<usize>> = row_tokens.into_iter().filter(|t| !t.is_empty()).collect();
        if packed.is_empty() {
            let mut best = (0usize, F::neg_infinity());
            for r in 0..layout.max_rows() {
                for s in 0..slots {
                    let region = layout.row_slot_region(r, s);
                    let i = argmax_in(scores, region, None);
                    if scores.get(i) > best.1 {
                        best = (i - region.offset, scores.get(i));
                    }
                }
            }
            packed.push(vec![best.0]);
        }
        for r in 0..layout.max_rows() {
            for s in 0..slots {
                clear_region(&mut bits, layout.row_slot_region(r, s));
            }
        }
        for (r, tokens) in packed.iter().enumerate() {
            for (s, &token) in tokens.iter().enumerate() {
                bits.set(layout.row_slot_region(r, s).offset + token, true);
            }
        }
        // Footer: left-pack, then fill slot 0 if nothing survived.
        let footer_tokens: Vec<usize> = (0..slots)
            .filter_map(|s| layout.footer_slot_region(s).selected(&bits))
            .collect();
        for s in 0..slots {
            clear_region(&mut bits, layout.footer_slot_region(s));
        }
        if footer_tokens.is_empty() {
            let region = layout.footer_slot_region(0);
            bits.set(argmax_in(scores, region, None), true);
        } else {
            for (s, &token) in footer_tokens.iter().enumerate() {
                bits.set(layout.footer_slot_region(s).offset + token, true);
            }
        }
    }

    debug_assert!(is_valid(&bits, layout).0, "resolve output must be valid");
    bits
}
