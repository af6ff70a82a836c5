//! Counting, enumeration and sampling of valid vectors.

use rand::Rng;

use crate::dsl::DslTree;

use super::{decode, BitVector, CodecError, VectorLayout};

/// Full iteration above this many vectors is refused.
pub const DEFAULT_ITER_CAP: u128 = 2_000_000;

/// Exact number of valid vectors, by closed form: with R row options, F
/// footer options and 1..=k occupied rows the count is `F * sum_{n=1..k} R^n`.
pub fn count_valid(layout: &VectorLayout) -> u128 {
    let row_options = layout.row_option_count() as u128;
    let footer_options = layout.footer_option_count() as u128;
    let mut total = 0u128;
    let mut pow = 1u128;
    for _ in 1..=layout.max_rows() {
        pow *= row_options;
        total += pow;
    }
    total * footer_options
}

/// Iterate every valid vector exactly once, under [`DEFAULT_ITER_CAP`].
pub fn iter_valid(layout: &VectorLayout) -> Result<ValidVectors<'_>, CodecError> {
    iter_valid_capped(layout, DEFAULT_ITER_CAP)
}

/// Iterate every valid vector exactly once, refusing layouts above `cap`.
pub fn iter_valid_capped(layout: &VectorLayout, cap: u128) -> Result<ValidVectors<'_>, CodecError> {
    let count = count_valid(layout);
    if count > cap {
        return Err(CodecError::Capacity {
            layout: layout.id(),
            count,
            cap,
        });
    }
    Ok(ValidVectors {
        layout,
        rows: 1,
        odometer: vec![0; 2],
        done: false,
    })
}

/// Iterator over all valid vectors of a layout, ordered by occupied row
/// count, then row options most-significant-first, then the footer option.
pub struct ValidVectors<'a> {
    layout: &'a VectorLayout,
    rows: usize,
    /// One digit per occupied row plus a final footer digit.
    odometer: Vec<usize>,
    done: bool,
}

impl Iterator for ValidVectors<'_> {
    type Item = BitVector;

    fn next(&mut self) -> Option<BitVector> {
        if self.done {
            return None;
        }
        let mut bits = BitVector::zeros(self.layout.width());
        for (row, &option) in self.odometer[..self.rows].iter().enumerate() {
            self.layout.write_row_option(&mut bits, row, option);
        }
        self.layout.write_footer_option(&mut bits, self.odometer[self.rows]);

        // Advance the mixed-radix odometer; the footer digit is the fastest.
        let row_options = self.layout.row_option_count();
        let footer_options = self.layout.footer_option_count();
        let mut pos = self.rows;
        loop {
            let radix = if pos == self.rows { footer_options } else { row_options };
            self.odometer[pos] += 1;
            if self.odometer[pos] < radix {
                break;
            }
            self.odometer[pos] = 0;
            if pos == 0 {
                self.rows += 1;
                if self.rows > self.layout.max_rows() {
                    self.done = true;
                } else {
                    self.odometer = vec![0; self.rows + 1];
                }
                break;
            }
            pos -= 1;
        }
        Some(bits)
    }
}

/// Sample a valid vector: occupied row count uniform over `1..=max_rows`,
/// then each block option uniform. Row counts come out evenly represented,
/// which keeps synthetic datasets balanced across layout depths.
pub fn sample_vector<R: Rng>(layout: &VectorLayout, rng: &mut R) -> BitVector {
    let rows = rng.gen_range(1..=layout.max_rows());
    let mut bits = BitVector::zeros(layout.width());
    for row in 0..rows {
        let option = rng.gen_range(0..layout.row_option_count());
        layout.write_row_option(&mut bits, row, option);
    }
    let option = rng.gen_range(0..layout.footer_option_count());
    layout.write_footer_option(&mut bits, option);
    bits
}

/// Sample a grammar-valid tree through the vector sampler.
pub fn sample_tree<R: Rng>(layout: &VectorLayout, rng: &mut R) -> DslTree {
    let bits = sample_vector(layout, rng);
    decode(&bits, layout).expect("sampled vectors are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{is_valid, layout_for};
    use crate::dsl::Platform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn web_pruned_count_is_enumerable_and_exact() {
        let layout = layout_for(Platform::Web, true);
        // 10 footer patterns * sum_{n=1..5} 6^n.
        assert_eq!(count_valid(&layout), 10 * (6 + 36 + 216 + 1296 + 7776));
        let mut seen = HashSet::new();
        let mut n = 0u128;
        for bits in iter_valid(&layout).unwrap() {
            assert!(is_valid(&bits, &layout).0);
            assert!(seen.insert(bits.to_bit_string()), "duplicate vector");
            n += 1;
        }
        assert_eq!(n, count_valid(&layout));
    }

    #[test]
    fn ios_pruned_count_documented() {
        // 16 footer patterns * sum_{n=1..8} 7^n. Too large to iterate.
        let layout = layout_for(Platform::Ios, true);
        assert_eq!(count_valid(&layout), 16 * 6_725_600);
        assert!(matches!(
            iter_valid(&layout),
            Err(CodecError::Capacity { .. })
        ));
    }

    #[test]
    fn unpruned_counts_match_slot_arithmetic() {
        // Independent arithmetic: per-row options are sum_{c=1..4} t^c.
        fn expected(row_types: u128, footer_types: u128, max_rows: u32) -> u128 {
            let per_row: u128 = (1..=4).map(|c| row_types.pow(c)).sum();
            let footer: u128 = (1..=4).map(|c| footer_types.pow(c)).sum();
            let rows: u128 = (1..=max_rows).map(|n| per_row.pow(n)).sum();
            rows * footer
        }
        let ios = count_valid(&layout_for(Platform::Ios, false));
        assert_eq!(ios, expected(5, 4, 8));
        // 4.66e25 valid unpruned iOS vectors.
        assert_eq!(ios / 10u128.pow(23), 466);

        let android = count_valid(&layout_for(Platform::Android, false));
        assert_eq!(android, expected(6, 4, 8));
        // 1.16e28 valid unpruned Android vectors (1.157... rounds to 1.16).
        assert_eq!((android + 5 * 10u128.pow(25)) / 10u128.pow(26), 116);

        let web = count_valid(&layout_for(Platform::Web, false));
        assert_eq!(web, expected(4, 3, 5));
        // Complexity ordering: web < ios < android, before and after pruning.
        assert!(web < ios && ios < android);
        let pruned: Vec<u128> = Platform::ALL
            .iter()
            .map(|&p| count_valid(&layout_for(p, true)))
            .collect();
        assert!(pruned[0] < pruned[1] && pruned[1] < pruned[2]);
    }

    #[test]
    fn degenerate_layout_has_one_vector() {
        let grammar = crate::dsl::Grammar::custom_for_tests(
            vec![vec!["title", "text"]],
            vec![vec!["link-home", "link-about"]],
            1,
        );
        let layout = crate::codec::layout::custom_pruned_for_tests(grammar);
        assert_eq!(count_valid(&layout), 1);
        assert_eq!(iter_valid(&layout).unwrap().count(), 1);
    }

    #[test]
    fn closed_form_matches_brute_force_on_reduced_layouts() {
        let row_pool: Vec<Vec<&'static str>> = vec![
            vec!["title", "text"],
            vec!["text", "btn"],
            vec!["img", "text"],
        ];
        let footer_pool: Vec<Vec<&'static str>> = vec![
            vec!["link-home", "link-about"],
            vec!["link-home", "link-contact"],
            vec!["link-about", "link-contact"],
        ];
        for r in 1..=3usize {
            for f in 1..=3usize {
                for k in 1..=3usize {
                    let grammar = crate::dsl::Grammar::custom_for_tests(
                        row_pool[..r].to_vec(),
                        footer_pool[..f].to_vec(),
                        k,
                    );
                    let layout = crate::codec::layout::custom_pruned_for_tests(grammar);
                    let mut seen = HashSet::new();
                    for bits in iter_valid(&layout).unwrap() {
                        assert!(is_valid(&bits, &layout).0);
                        assert!(seen.insert(bits.to_bit_string()));
                    }
                    let brute = seen.len() as u128;
                    let closed: u128 =
                        (1..=k as u32).map(|n| (r as u128).pow(n)).sum::<u128>() * f as u128;
                    assert_eq!(count_valid(&layout), closed, "r={r} f={f} k={k}");
                    assert_eq!(brute, closed, "r={r} f={f} k={k}");
                }
            }
        }
    }

    #[test]
    fn sampled_vectors_are_valid_and_rows_balanced() {
        let layout = layout_for(Platform::Ios, true);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut row_hist = [0usize; 8];
        let n = 10_000;
        for _ in 0..n {
            let bits = sample_vector(&layout, &mut rng);
            assert!(is_valid(&bits, &layout).0);
            let rows = (0..8).filter(|&r| layout.row_occupied(&bits, r)).count();
            row_hist[rows - 1] += 1;
        }
        // Each bin within 3 sigma of the binomial expectation n/8.
        let expect = n as f64 / 8.0;
        let sigma = (n as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
        for (i, &count) in row_hist.iter().enumerate() {
            assert!(
                (count as f64 - expect).abs() < 3.0 * sigma,
                "row count {} seen {} times, expected {expect}±{sigma}",
                i + 1,
                count
            );
        }
    }
}
