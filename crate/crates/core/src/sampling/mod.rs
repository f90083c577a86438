//! Quasi-random sampling: the Sobol' sequence, inverse-CDF transforms and
//! the A/B/mixed matrix designs used by pick-and-freeze estimators.

mod distribution;
mod joe_kuo;
mod sobol;

use ndarray::{Array2, ArrayView2, Axis};

pub use distribution::{chi_square_quantile, Distribution, CDF_TOLERANCE};
pub use sobol::{sobol_sequence, MAX_SOBOL_DIM, SOBOL_PERIOD};

use crate::error::{Error, Result};

/// Matrix of draws in the unit hypercube, one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSample(Array2<f64>);

impl UnitSample {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptySample);
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::Shape(format!("unit sample entry {bad} outside [0, 1)")));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_array_unchecked(values: Array2<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

/// Maps column `j` of `sample` through the inverse CDF of `specs[j]`.
pub fn transform(sample: &UnitSample, specs: &[Distribution]) -> Result<Array2<f64>> {
    transform_view(sample.values().view(), specs)
}

pub(crate) fn transform_view(sample: ArrayView2<f64>, specs: &[Distribution]) -> Result<Array2<f64>> {
    if specs.len() != sample.ncols() {
        return Err(Error::Shape(format!(
            "{} distributions for {} columns",
            specs.len(),
            sample.ncols()
        )));
    }
    let mut out = sample.to_owned();
    for (mut column, spec) in out.axis_iter_mut(Axis(1)).zip(specs) {
        for u in column.iter_mut() {
            *u = spec.quantile(*u)?;
        }
    }
    Ok(out)
}

/// A column subset paired with the matrix that takes those columns from B
/// and everything else from A.
#[derive(Debug, Clone, PartialEq)]
pub struct Mix<M> {
    pub columns: Vec<usize>,
    pub matrix: M,
}

/// Base matrix A, its independent mirror B and the mixed matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorDesign<M = UnitSample> {
    pub base: M,
    pub mirror: M,
    pub mixes: Vec<Mix<M>>,
}

impl<M> EstimatorDesign<M> {
    pub fn mix(&self, columns: &[usize]) -> Option<&M> {
        self.mixes
            .iter()
            .find(|m| m.columns == columns)
            .map(|m| &m.matrix)
    }
}

impl EstimatorDesign<UnitSample> {
    /// Applies the same per-column transform to every matrix of the design.
    pub fn transformed(&self, specs: &[Distribution]) -> Result<EstimatorDesign<Array2<f64>>> {
        Ok(EstimatorDesign {
            base: transform(&self.base, specs)?,
            mirror: transform(&self.mirror, specs)?,
            mixes: self
                .mixes
                .iter()
                .map(|m| {
                    Ok(Mix {
                        columns: m.columns.clone(),
                        matrix: transform(&m.matrix, specs)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

/// Every column subset of size 1..=max_order, ordered by size and then
/// lexicographically.
pub fn column_subsets(k: usize, max_order: usize) -> Vec<Vec<usize>> {
    fn extend(k: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for c in start..k {
            cur.push(c);
            extend(k, size, c + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=max_order.min(k) {
        extend(k, size, 0, &mut Vec::new(), &mut out);
    }
    out
}

pub(crate) fn mix_columns(base: &Array2<f64>, mirror: &Array2<f64>, columns: &[usize]) -> Array2<f64> {
    let mut out = base.clone();
    for &c in columns {
        out.column_mut(c).assign(&mirror.column(c));
    }
    out
}

/// Draws one `(base_size, 2k)` Sobol' block starting at point `seq_offset`,
/// splits it into A and B, and builds the mixes for every column subset up
/// to `max_subset_order`.
pub fn build_estimator_design(
    base_size: usize,
    k: usize,
    max_subset_order: usize,
    seq_offset: u64,
) -> Result<EstimatorDesign> {
    if k == 0 {
        return Err(Error::Shape("design needs at least one column".into()));
    }
    if base_size < 2 {
        return Err(Error::InsufficientSample(format!(
            "base size {base_size} is below 2"
        )));
    }
    if !(1..=3).contains(&max_subset_order) || max_subset_order > k {
        return Err(Error::InvalidOrder {
            order: max_subset_order,
            k,
        });
    }
    let draw = sobol_sequence(2 * k, base_size, seq_offset)?.into_inner();
    let base = draw.slice(ndarray::s![.., ..k]).to_owned();
    let mirror = draw.slice(ndarray::s![.., k..]).to_owned();
    let mixes = column_subsets(k, max_subset_order)
        .into_iter()
        .map(|columns| Mix {
            matrix: UnitSample(mix_columns(&base, &mirror, &columns)),
            columns,
        })
        .collect();
    Ok(EstimatorDesign {
        base: UnitSample(base),
        mirror: UnitSample(mirror),
        mixes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_structure() {
        let d = build_estimator_design(8, 2, 1, 1).unwrap();
        assert_eq!(d.mixes.len(), 2);
        assert_eq!(d.mixes[0].columns, vec![0]);
        assert_eq!(d.mixes[1].columns, vec![1]);
        assert_eq!(d.base.values().dim(), (8, 2));

        let d = build_estimator_design(8, 4, 3, 1).unwrap();
        assert_eq!(d.mixes.len(), 14);

        assert!(matches!(
            build_estimator_design(8, 2, 3, 1),
            Err(Error::InvalidOrder { order: 3, k: 2 })
        ));
    }

    #[test]
    fn mixes_differ_only_in_their_columns() {
        let d = build_estimator_design(16, 4, 3, 1).unwrap();
        let a = d.base.values();
        let b = d.mirror.values();
        for mix in &d.mixes {
            let m = mix.matrix.values();
            assert_eq!(m.dim(), a.dim());
            for c in 0..4 {
                let expected = if mix.columns.contains(&c) { b.column(c) } else { a.column(c) };
                assert_eq!(m.column(c), expected);
            }
            let restored = mix_columns(m, a, &mix.columns);
            assert_eq!(&restored, a);
        }
    }

    #[test]
    fn transform_checks_lengths() {
        let s = sobol_sequence(2, 4, 1).unwrap();
        let specs = [Distribution::uniform(0.0, 1.0).unwrap()];
        assert!(matches!(transform(&s, &specs), Err(Error::Shape(_))));
    }

    #[test]
    fn unit_sample_validation() {
        assert!(UnitSample::new(Array2::zeros((0, 2))).is_err());
        assert!(UnitSample::new(Array2::from_elem((2, 2), 1.0)).is_err());
        assert!(UnitSample::new(Array2::from_elem((2, 2), 0.25)).is_ok());
    }
}
