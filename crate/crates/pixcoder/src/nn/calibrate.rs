//! Automatic decision-threshold selection from calibration records.

use super::CalibRecord;

/// Pick the binarization threshold from recorded score extremes.
///
/// Let `m1` be the smallest score ever observed for a target-1 bit and `m0`
/// the largest for a target-0 bit. When the classes separate (`m0 < m1`) the
/// threshold is the interval midpoint. Otherwise every recorded extreme is a
/// candidate and the one misclassifying the fewest records wins, ties going
/// to the smaller value. The result is clamped into (0, 1).
pub fn calibrate_threshold(records: &[CalibRecord]) -> f64 {
    assert!(!records.is_empty(), "calibration needs at least one record");
    let m1 = records.iter().map(|r| r.min_one).fold(f64::INFINITY, f64::min);
    let m0 = records.iter().map(|r| r.max_zero).fold(f64::NEG_INFINITY, f64::max);
    let threshold = if m0 < m1 {
        (m0 + m1) / 2.0
    } else {
        // Overlap: sweep recorded candidates. A bit is predicted 1 when its
        // score exceeds the threshold, so candidate t misclassifies a
        // record's one-side when min_one <= t and its zero-side when
        // max_zero > t.
        let mut candidates: Vec<f64> = records
            .iter()
            .flat_map(|r| [r.min_one, r.max_zero])
            .collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let mut best = candidates[0];
        let mut best_errors = usize::MAX;
        for &t in &candidates {
            let errors = records
                .iter()
                .map(|r| usize::from(r.min_one <= t) + usize::from(r.max_zero > t))
                .sum::<usize>();
            if errors < best_errors {
                best_errors = errors;
                best = t;
            }
        }
        best
    };
    threshold.clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(epoch: usize, min_one: f64, max_zero: f64) -> CalibRecord {
        CalibRecord { epoch, min_one, max_zero }
    }

    #[test]
    fn separable_records_give_the_midpoint() {
        let records = [rec(6, 0.8, 0.2)];
        assert!((calibrate_threshold(&records) - 0.5).abs() < 1e-15);
        let records = [rec(6, 0.9, 0.1), rec(7, 0.8, 0.25), rec(8, 0.85, 0.2)];
        // m1 = 0.8, m0 = 0.25.
        assert!((calibrate_threshold(&records) - 0.525).abs() < 1e-15);
    }

    #[test]
    fn overlapping_records_minimize_misclassifications() {
        // Brute-force oracle over the same candidate set.
        let records = [
            rec(6, 0.30, 0.55),
            rec(7, 0.60, 0.20),
            rec(8, 0.70, 0.25),
            rec(9, 0.40, 0.45),
        ];
        let got = calibrate_threshold(&records);
        let candidates: Vec<f64> = records.iter().flat_map(|r| [r.min_one, r.max_zero]).collect();
        let errors = |t: f64| {
            records
                .iter()
                .map(|r| usize::from(r.min_one <= t) + usize::from(r.max_zero > t))
                .sum::<usize>()
        };
        let best = candidates
            .iter()
            .copied()
            .min_by(|a, b| errors(*a).cmp(&errors(*b)).then(a.total_cmp(b)))
            .unwrap();
        assert_eq!(got, best);
        assert_eq!(errors(got), 2, "0.25 keeps records 7 and 8 clean");
    }

    #[test]
    fn ties_prefer_the_smaller_candidate() {
        // Any t in the candidate set misclassifies exactly one side of the
        // single record; the smaller candidate must win.
        let records = [rec(6, 0.4, 0.4)];
        assert_eq!(calibrate_threshold(&records), 0.4);
    }

    #[test]
    fn degenerate_extremes_stay_inside_the_open_interval() {
        let records = [rec(6, 0.0, 0.0)];
        let t = calibrate_threshold(&records);
        assert!(t > 0.0 && t < 1.0);
    }
}
