//! The PAWN density-based index.
//!
//! For each input the sample is cut into `n` equal-count conditioning
//! intervals ordered by that input. The outputs of each interval are compared
//! with an unconditional subsample of size `N_c = floor(N / n)` through the
//! two-sample Kolmogorov–Smirnov statistic, and the `n` distances are
//! reduced to one number by a summary statistic.

use std::fmt;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Reduction applied to the KS distances of one input. Codes 1, 2, 3 are
/// used in configuration files and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Summary {
    Mean,
    Median,
    Max,
}

impl Summary {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Self::Mean),
            2 => Ok(Self::Median),
            3 => Ok(Self::Max),
            _ => Err(Error::Config(format!("summary statistic code {code} is not 1, 2 or 3"))),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Mean => 1,
            Self::Median => 2,
            Self::Max => 3,
        }
    }

    /// Reduces a non-empty set of values.
    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Self::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Self::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Self::Median => median(values),
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mean => "mean",
            Self::Median => "median",
            Self::Max => "max",
        })
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PawnConfig {
    /// Number of conditioning intervals.
    pub intervals: usize,
    pub summary: Summary,
    /// Seed for the unconditional subsample.
    pub seed: u64,
}

impl PawnConfig {
    pub fn new(intervals: usize, summary: Summary, seed: u64) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::Config(format!(
                "at least 2 conditioning intervals are needed, got {intervals}"
            )));
        }
        Ok(Self {
            intervals,
            summary,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningSplit {
    pub input_index: usize,
    /// Row indices of each interval, in increasing order of the input.
    pub groups: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PawnIndexVector {
    pub values: Vec<f64>,
    pub config: PawnConfig,
    pub sample_size: usize,
}

fn sorted_finite(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptySample);
    }
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidData);
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Largest absolute difference between the empirical CDFs of `a` and `b`,
/// evaluated exactly at every point of the merged sample.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_finite(a)?;
    let b = sorted_finite(b)?;
    Ok(ks_sorted(&a, &b))
}

pub(crate) fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Equal-count split of the rows by increasing value of `column`. Ties keep
/// their original row order; the first `N mod n` groups get one extra row.
pub fn split_conditional(column: &[f64], n: usize) -> Result<ConditioningSplit> {
    let rows = column.len();
    if n < 2 || n > rows / 2 {
        return Err(Error::InsufficientSample(format!(
            "{rows} rows cannot fill {n} conditioning intervals of at least 2 points"
        )));
    }
    if column.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidData);
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&p, &q| column[p].total_cmp(&column[q]));

    let (size, extra) = (rows / n, rows % n);
    let mut groups = Vec::with_capacity(n);
    let mut start = 0;
    for g in 0..n {
        let len = size + usize::from(g < extra);
        groups.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(ConditioningSplit {
        input_index: 0,
        groups,
    })
}

/// `size` elements of `y` drawn without replacement by a seeded partial
/// Fisher–Yates shuffle of the positions.
pub fn subsample_unconditional(y: &[f64], size: usize, seed: u64) -> Result<Vec<f64>> {
    if size == 0 || size > y.len() {
        return Err(Error::InsufficientSample(format!(
            "cannot draw {size} of {} values",
            y.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = (0..y.len()).collect();
    let (chosen, _) = positions.partial_shuffle(&mut rng, size);
    Ok(chosen.iter().map(|&p| y[p]).collect())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the unconditional subsample of `input`, derived from the
/// run-level seed.
pub fn derive_seed(seed: u64, input: usize) -> u64 {
    splitmix64(seed ^ splitmix64(input as u64 ^ 0x5057_4e00))
}

pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// KS distances between each conditional interval and the unconditional
/// subsample, for one input.
pub fn ks_values(
    column: &[f64],
    sorted_y: &[f64],
    y: &[f64],
    intervals: usize,
    subsample_seed: u64,
) -> Result<Vec<f64>> {
    let split = split_conditional(column, intervals)?;
    let cond_size = y.len() / intervals;
    let mut unconditional = subsample_unconditional(sorted_y, cond_size, subsample_seed)?;
    unconditional.sort_by(f64::total_cmp);
    let mut buf = Vec::with_capacity(cond_size + 1);
    Ok(split
        .groups
        .iter()
        .map(|g| {
            buf.clear();
            buf.extend(g.iter().map(|&r| y[r]));
            buf.sort_by(f64::total_cmp);
            ks_sorted(&unconditional, &buf)
        })
        .collect())
}

/// PAWN index of every column of `inputs`.
pub fn pawn_indices(inputs: ArrayView2<f64>, y: &[f64], config: &PawnConfig) -> Result<PawnIndexVector> {
    if inputs.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "{} input rows for {} outputs",
            inputs.nrows(),
            y.len()
        )));
    }
    // Subsampling from the sorted outputs makes the result independent of
    // the row order.
    let sorted_y = sorted_finite(y)?;
    let mut column = Vec::with_capacity(y.len());
    let values = (0..inputs.ncols())
        .map(|i| {
            column.clear();
            column.extend(inputs.column(i).iter().copied());
            let ks = ks_values(&column, &sorted_y, y, config.intervals, derive_seed(config.seed, i))?;
            Ok(config.summary.apply(&ks))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PawnIndexVector {
        values,
        config: *config,
        sample_size: y.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), 0.5);
        assert_eq!(ks_two_sample(&[], &[1.0]), Err(Error::EmptySample));
        assert_eq!(ks_two_sample(&[f64::NAN], &[1.0]), Err(Error::InvalidData));
    }

    #[test]
    fn split_examples() {
        let col: Vec<f64> = (0..10).map(|i| ((i * 7) % 10) as f64).collect();
        let s = split_conditional(&col, 5).unwrap();
        assert_eq!(s.groups.len(), 5);
        assert!(s.groups.iter().all(|g| g.len() == 2));
        for pair in s.groups.windows(2) {
            let hi = pair[0].iter().map(|&r| col[r]).fold(f64::MIN, f64::max);
            let lo = pair[1].iter().map(|&r| col[r]).fold(f64::MAX, f64::min);
            assert!(hi <= lo);
        }

        let s = split_conditional(&col, 3).unwrap();
        let sizes: Vec<usize> = s.groups.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 3, 3]);

        assert!(matches!(
            split_conditional(&[1.0, 2.0, 3.0, 4.0], 4),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn split_ties_are_stable() {
        let s = split_conditional(&[1.0, 0.0, 1.0, 0.0], 2).unwrap();
        assert_eq!(s.groups, vec![vec![1, 3], vec![0, 2]]);
    }

    #[test]
    fn subsample_examples() {
        let y = [5.0, 1.0, 4.0, 2.0, 3.0];
        let mut all = subsample_unconditional(&y, 5, 99).unwrap();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, vec![1.0, 2.0, 3.0, 4.0, 5.0]);

        let y: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(
            subsample_unconditional(&y, 10, 7).unwrap(),
            subsample_unconditional(&y, 10, 7).unwrap()
        );
        assert_ne!(
            subsample_unconditional(&y, 10, 7).unwrap(),
            subsample_unconditional(&y, 10, 8).unwrap()
        );
        assert!(subsample_unconditional(&y, 0, 1).is_err());
        assert!(subsample_unconditional(&y, 101, 1).is_err());
    }

    #[test]
    fn summaries() {
        let v = [0.1, 0.4, 0.2, 0.3];
        assert!((Summary::Mean.apply(&v) - 0.25).abs() < 1e-15);
        assert!((Summary::Median.apply(&v) - 0.25).abs() < 1e-15);
        assert_eq!(Summary::Median.apply(&[0.3, 0.1, 0.2]), 0.2);
        assert_eq!(Summary::Max.apply(&v), 0.4);
        for code in 1..=3 {
            assert_eq!(Summary::from_code(code).unwrap().code(), code);
        }
        assert!(Summary::from_code(4).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PawnConfig::new(1, Summary::Mean, 0).is_err());
        assert!(PawnConfig::new(2, Summary::Mean, 0).is_ok());
    }

    #[test]
    fn constant_output_gives_zero() {
        let inputs = crate::sampling::sobol_sequence(3, 200, 1).unwrap().into_inner();
        let y = vec![4.2; 200];
        for summary in [Summary::Mean, Summary::Median, Summary::Max] {
            let cfg = PawnConfig::new(10, summary, 3).unwrap();
            let idx = pawn_indices(inputs.view(), &y, &cfg).unwrap();
            assert_eq!(idx.values, vec![0.0; 3]);
        }
    }

    #[test]
    fn seeds_differ_per_input() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
