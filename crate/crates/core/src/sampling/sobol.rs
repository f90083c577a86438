//! Unscrambled Sobol' sequence with Joe–Kuo direction numbers.
//!
//! Points are produced in Gray-code order, so point `n` is the XOR of the
//! direction numbers selected by the bits of `n ^ (n >> 1)`. That lets us
//! jump straight to any offset instead of iterating from the origin.

use ndarray::Array2;

use super::joe_kuo::JOE_KUO;
use super::UnitSample;
use crate::error::{Error, Result};

const BITS: usize = 32;

/// Largest dimension the bundled direction table supports.
pub const MAX_SOBOL_DIM: usize = JOE_KUO.len() + 1;

/// Number of addressable points; direction numbers are 32 bits wide.
pub const SOBOL_PERIOD: u64 = 1 << BITS;

fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (bit, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (31 - bit);
        }
        return v;
    }
    let (degree, a, m) = JOE_KUO[dim - 1];
    let s = degree as usize;
    for bit in 0..s.min(BITS) {
        v[bit] = m[bit] << (31 - bit);
    }
    for bit in s..BITS {
        let mut x = v[bit - s] ^ (v[bit - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[bit - j];
            }
        }
        v[bit] = x;
    }
    v
}

/// Returns `count` consecutive points of the `dim`-dimensional sequence,
/// starting at index `skip` (index 0 is the origin).
pub fn sobol_sequence(dim: usize, count: usize, skip: u64) -> Result<UnitSample> {
    if dim == 0 || dim > MAX_SOBOL_DIM {
        return Err(Error::UnsupportedDimension {
            requested: dim,
            max: MAX_SOBOL_DIM,
        });
    }
    if count == 0 {
        return Err(Error::EmptySample);
    }
    if skip.saturating_add(count as u64) > SOBOL_PERIOD {
        return Err(Error::InsufficientSample(format!(
            "points {skip}..{} exceed the 2^32 sequence period",
            skip + count as u64
        )));
    }

    let table: Vec<[u32; BITS]> = (0..dim).map(directions).collect();
    let gray = skip ^ (skip >> 1);
    let mut state: Vec<u32> = table
        .iter()
        .map(|v| {
            (0..BITS)
                .filter(|&bit| (gray >> bit) & 1 == 1)
                .fold(0u32, |acc, bit| acc ^ v[bit])
        })
        .collect();

    let scale = 1.0 / SOBOL_PERIOD as f64;
    let mut out = Array2::zeros((count, dim));
    for (row, mut dest) in out.rows_mut().into_iter().enumerate() {
        for (d, x) in dest.iter_mut().zip(&state) {
            *d = *x as f64 * scale;
        }
        if row + 1 < count {
            let bit = (skip + row as u64).trailing_ones() as usize;
            for (x, v) in state.iter_mut().zip(&table) {
                *x ^= v[bit];
            }
        }
    }
    Ok(UnitSample::from_array_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_point_after_origin_is_one_half() {
        let s = sobol_sequence(3, 1, 1).unwrap();
        assert_eq!(s.values().row(0).to_vec(), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn van_der_corput_column() {
        let s = sobol_sequence(1, 4, 1).unwrap();
        let col: Vec<f64> = s.values().column(0).to_vec();
        assert_eq!(col, vec![0.5, 0.75, 0.25, 0.375]);
    }

    // Frozen from an independent unscrambled Joe–Kuo implementation (scipy.stats.qmc).
    #[test]
    fn matches_reference_points() {
        let s = sobol_sequence(50, 1030, 0).unwrap();
        let v = s.values();
        assert_eq!(v[[3, 0]], 0.25);
        assert_eq!(
            v.row(3).iter().take(6).copied().collect::<Vec<_>>(),
            vec![0.25, 0.75, 0.75, 0.75, 0.25, 0.25]
        );
        assert_eq!(v[[1000, 0]], 0.2197265625);
        assert_eq!(v[[1000, 7]], 0.8994140625);
        assert_eq!(v[[1000, 20]], 0.5224609375);
        assert_eq!(v[[1000, 41]], 0.2548828125);
        assert_eq!(v[[1000, 49]], 0.4794921875);
        assert_eq!(v[[1029, 10]], 0.69677734375);
        assert_eq!(v[[1029, 11]], 0.04638671875);
        assert_eq!(v[[1029, 12]], 0.33154296875);
        assert_eq!(v[[1029, 13]], 0.46337890625);
    }

    #[test]
    fn jumping_agrees_with_iterating() {
        let full = sobol_sequence(7, 300, 0).unwrap();
        let tail = sobol_sequence(7, 100, 200).unwrap();
        assert_eq!(
            full.values().slice(ndarray::s![200.., ..]),
            tail.values().view()
        );
    }

    #[test]
    fn errors() {
        assert_eq!(sobol_sequence(2, 0, 1), Err(Error::EmptySample));
        assert!(matches!(
            sobol_sequence(MAX_SOBOL_DIM + 1, 1, 1),
            Err(Error::UnsupportedDimension { .. })
        ));
        assert!(sobol_sequence(1, 2, SOBOL_PERIOD - 1).is_err());
        assert!(MAX_SOBOL_DIM >= 52);
    }

    #[test]
    fn balanced_mean() {
        for m in 2..12 {
            let n = 1usize << m;
            let s = sobol_sequence(1, n, 1).unwrap();
            let mean = s.values().column(0).sum() / n as f64;
            assert!((mean - 0.5).abs() <= 1.0 / n as f64, "m = {m}: {mean}");
        }
    }
}
