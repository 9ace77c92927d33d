//! Replicate summary statistics: mean, sample standard deviation, and the
//! five-number summary used by the boxplot figures.

use serde::Serialize;

/// Summary of one metric over a set of replicates.
///
/// Accumulation happens over a sorted copy of the samples, so the summary is
/// identical no matter what order replicates finished in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn from_samples(samples: &[f64]) -> Option<Summary> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("summary samples must not be NaN"));
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            let ss = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            (ss / (n - 1) as f64).sqrt()
        };
        Some(Summary {
            mean,
            sd,
            min: sorted[0],
            q1: percentile(&sorted, 0.25),
            median: percentile(&sorted, 0.50),
            q3: percentile(&sorted, 0.75),
            max: sorted[n - 1],
        })
    }
}

/// Linear-interpolation percentile (the common "type 7" rule) over a sorted
/// slice; `p` in [0, 1].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn five_number_summary_of_one_to_five() {
        let s = Summary::from_samples(&[5.0, 3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!(s.min, 1.0);
        assert_eq!(s.q1, 2.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.q3, 4.0);
        assert_eq!(s.max, 5.0);
        assert_eq!(s.mean, 3.0);
        assert!((s.sd - (2.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_sample_is_degenerate() {
        let s = Summary::from_samples(&[7.25]).unwrap();
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.min, 7.25);
        assert_eq!(s.max, 7.25);
        assert_eq!(s.median, 7.25);
    }

    #[test]
    fn empty_input_yields_none() {
        assert!(Summary::from_samples(&[]).is_none());
    }

    #[test]
    fn interpolated_quartiles() {
        // even count: quartiles fall between samples
        let s = Summary::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q3, 3.25);
    }

    proptest! {
        #[test]
        fn summary_is_ordered_and_order_independent(
            mut xs in proptest::collection::vec(-1e6f64..1e6, 1..40),
        ) {
            let a = Summary::from_samples(&xs).unwrap();
            prop_assert!(a.min <= a.q1 && a.q1 <= a.median);
            prop_assert!(a.median <= a.q3 && a.q3 <= a.max);
            prop_assert!(a.mean >= a.min - 1e-9 && a.mean <= a.max + 1e-9);
            xs.reverse();
            let b = Summary::from_samples(&xs).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
