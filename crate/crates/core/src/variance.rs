//! Variance-based (Sobol') sensitivity indices from pick-and-freeze designs.
//!
//! With outputs `y_A`, `y_B` on two independent matrices and `y_u` on the
//! matrix that takes the columns in `u` from B and the rest from A:
//!
//! * first order: `mean(y_B * (y_{i} - y_A)) / V`
//! * closed index of a subset: `mean(y_B * (y_u - y_A)) / V`
//! * total order (Jansen): `mean((y_A - y_{i})^2) / (2V)`
//! * total order (Homma–Saltelli): `1 - (mean(y_A * y_{i}) - f0^2) / V`
//! * total order (Sobol' 2007): `mean(y_A * (y_A - y_{i})) / V`
//!
//! `f0` and `V` are the mean and (population) variance of `y_A` and `y_B`
//! together. Interaction indices follow from closed indices by
//! inclusion–exclusion.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::functions::{eval_rows, Model};
use crate::sampling::EstimatorDesign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TotalEstimator {
    Jansen,
    HommaSaltelli,
    Sobol2007,
}

impl TotalEstimator {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Self::Jansen),
            2 => Ok(Self::HommaSaltelli),
            3 => Ok(Self::Sobol2007),
            _ => Err(Error::Config(format!("estimator code {code} is not 1, 2 or 3"))),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Jansen => 1,
            Self::HommaSaltelli => 2,
            Self::Sobol2007 => 3,
        }
    }
}

impl fmt::Display for TotalEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Jansen => "jansen",
            Self::HommaSaltelli => "homma_saltelli",
            Self::Sobol2007 => "sobol2007",
        })
    }
}

/// Model outputs on every matrix of an estimator design.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedDesign {
    pub y_a: Vec<f64>,
    pub y_b: Vec<f64>,
    pub y_mix: BTreeMap<Vec<usize>, Vec<f64>>,
}

impl EvaluatedDesign {
    pub fn new(y_a: Vec<f64>, y_b: Vec<f64>, y_mix: BTreeMap<Vec<usize>, Vec<f64>>) -> Result<Self> {
        let n = y_a.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if (!y_b.is_empty() && y_b.len() != n) || y_mix.values().any(|v| v.len() != n) {
            return Err(Error::Shape("design outputs differ in length".into()));
        }
        Ok(Self { y_a, y_b, y_mix })
    }

    /// Evaluates `model` on every matrix of a transformed design. With
    /// `with_mirror == false` the B matrix is skipped, which is enough for
    /// total-order indices at `base * (k + 1)` model runs.
    pub fn evaluate<M: Model + ?Sized>(
        model: &M,
        design: &EstimatorDesign<Array2<f64>>,
        with_mirror: bool,
    ) -> Result<Self> {
        let y_mix = design
            .mixes
            .iter()
            .map(|m| Ok((m.columns.clone(), eval_rows(model, m.matrix.view())?)))
            .collect::<Result<_>>()?;
        Self::new(
            eval_rows(model, design.base.view())?,
            if with_mirror {
                eval_rows(model, design.mirror.view())?
            } else {
                Vec::new()
            },
            y_mix,
        )
    }

    pub fn base_size(&self) -> usize {
        self.y_a.len()
    }

    fn mix(&self, columns: &[usize]) -> Result<&[f64]> {
        self.y_mix
            .get(columns)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::DesignIncomplete(columns.to_vec()))
    }

    /// Mean and population variance of `y_A` and `y_B` pooled. When the
    /// mirror outputs were not evaluated only `y_A` is used.
    pub fn moments(&self) -> (f64, f64) {
        let n = (self.y_a.len() + self.y_b.len()) as f64;
        let all = || self.y_a.iter().chain(&self.y_b);
        let mean = all().sum::<f64>() / n;
        let var = all().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
        (mean, var)
    }

    /// The same design with `f0` subtracted from every output. The true
    /// indices are unchanged by the shift, but the first-order and closed
    /// estimators lose the error term proportional to the output mean.
    pub fn centered(&self) -> Self {
        let (f0, _) = self.moments();
        let shift = |v: &Vec<f64>| v.iter().map(|y| y - f0).collect::<Vec<f64>>();
        Self {
            y_a: shift(&self.y_a),
            y_b: shift(&self.y_b),
            y_mix: self.y_mix.iter().map(|(k, v)| (k.clone(), shift(v))).collect(),
        }
    }

    fn variance(&self) -> Result<f64> {
        let (_, v) = self.moments();
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::DegenerateOutput)
        }
    }
}

fn mean_of(n: usize, terms: impl Iterator<Item = f64>) -> f64 {
    terms.sum::<f64>() / n as f64
}

/// First-order index of input `i`.
pub fn first_order(ev: &EvaluatedDesign, i: usize) -> Result<f64> {
    closed_index(ev, &[i])
}

/// Closed index `V(E(Y | X_u)) / V` of a column subset.
pub fn closed_index(ev: &EvaluatedDesign, subset: &[usize]) -> Result<f64> {
    let y_u = ev.mix(subset)?;
    if ev.y_b.is_empty() {
        return Err(Error::MissingMirror);
    }
    let v = ev.variance()?;
    let vi = mean_of(
        ev.base_size(),
        ev.y_b.iter().zip(y_u).zip(&ev.y_a).map(|((b, u), a)| b * (u - a)),
    );
    Ok(vi / v)
}

pub fn total_order(ev: &EvaluatedDesign, i: usize, estimator: TotalEstimator) -> Result<f64> {
    let y_i = ev.mix(&[i])?;
    let (f0, v) = ev.moments();
    if !(v > 0.0) {
        return Err(Error::DegenerateOutput);
    }
    let n = ev.base_size();
    let pairs = || ev.y_a.iter().zip(y_i);
    Ok(match estimator {
        TotalEstimator::Jansen => mean_of(n, pairs().map(|(a, m)| (a - m) * (a - m))) / (2.0 * v),
        TotalEstimator::HommaSaltelli => 1.0 - (mean_of(n, pairs().map(|(a, m)| a * m)) - f0 * f0) / v,
        TotalEstimator::Sobol2007 => mean_of(n, pairs().map(|(a, m)| a * (a - m))) / v,
    })
}

/// Clamps an index estimate into [0, 1].
pub fn clamp(value: f64) -> f64 {
    value.clamp(0.0, 1.0)
}

/// Raw (unclamped) index estimates for one output.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolEstimates {
    pub first: Vec<f64>,
    pub second: BTreeMap<(usize, usize), f64>,
    pub third: BTreeMap<(usize, usize, usize), f64>,
    pub total: Vec<f64>,
    pub variance: f64,
    pub mean: f64,
    pub estimator: TotalEstimator,
}

impl SobolEstimates {
    /// The same estimates clamped into [0, 1].
    pub fn clamped(&self) -> Self {
        Self {
            first: self.first.iter().copied().map(clamp).collect(),
            second: self.second.iter().map(|(k, v)| (*k, clamp(*v))).collect(),
            third: self.third.iter().map(|(k, v)| (*k, clamp(*v))).collect(),
            total: self.total.iter().copied().map(clamp).collect(),
            ..self.clone()
        }
    }
}

/// First, total and every interaction index whose mixes are present in the
/// design. `k` is the number of inputs.
pub fn interaction_indices(ev: &EvaluatedDesign, k: usize, estimator: TotalEstimator) -> Result<SobolEstimates> {
    let (mean, variance) = ev.moments();
    let first = (0..k).map(|i| first_order(ev, i)).collect::<Result<Vec<_>>>()?;
    let total = (0..k)
        .map(|i| total_order(ev, i, estimator))
        .collect::<Result<Vec<_>>>()?;

    let mut second = BTreeMap::new();
    for i in 0..k {
        for j in i + 1..k {
            if ev.y_mix.contains_key(&vec![i, j]) {
                let c = closed_index(ev, &[i, j])?;
                second.insert((i, j), c - first[i] - first[j]);
            }
        }
    }

    let mut third = BTreeMap::new();
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                if !ev.y_mix.contains_key(&vec![i, j, l]) {
                    continue;
                }
                let pair = |p: usize, q: usize| {
                    second
                        .get(&(p, q))
                        .copied()
                        .ok_or_else(|| Error::DesignIncomplete(vec![p, q]))
                };
                let c = closed_index(ev, &[i, j, l])?;
                let value = c
                    - pair(i, j)?
                    - pair(i, l)?
                    - pair(j, l)?
                    - first[i]
                    - first[j]
                    - first[l];
                third.insert((i, j, l), value);
            }
        }
    }

    Ok(SobolEstimates {
        first,
        second,
        third,
        total,
        variance,
        mean,
        estimator,
    })
}
