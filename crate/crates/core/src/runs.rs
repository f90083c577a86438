//! Single-shot index computation and convergence scans over sample size.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::Model;
use crate::meta::{inner_offset, inner_sample_for, total_order_base_size};
use crate::pawn::{pawn_indices, PawnConfig, Summary};
use crate::sampling::build_estimator_design;
use crate::variance::{clamp, first_order, total_order, EvaluatedDesign, TotalEstimator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pawn,
    SobolFirst,
    SobolTotal,
    /// First and total order from one design.
    Sobol,
}

impl Method {
    pub const ALL: [Method; 4] = [Self::Pawn, Self::SobolFirst, Self::SobolTotal, Self::Sobol];

    pub fn key(self) -> &'static str {
        match self {
            Self::Pawn => "pawn",
            Self::SobolFirst => "sobol_first",
            Self::SobolTotal => "sobol_total",
            Self::Sobol => "sobol",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// Settings of one inner analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSpec {
    pub method: Method,
    /// Total model-run budget.
    pub sample_size: usize,
    /// Conditioning intervals (PAWN).
    pub intervals: usize,
    /// Summary statistic (PAWN) or total-order estimator (Sobol'), 1..=3.
    pub theta: u8,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub method: &'static str,
    pub input_label: String,
    pub value: f64,
    pub raw: f64,
}

fn row(method: &'static str, label: &str, raw: f64) -> IndexRow {
    IndexRow {
        method,
        input_label: label.to_string(),
        value: clamp(raw),
        raw,
    }
}

/// One index per input (two for `Method::Sobol`) within the run budget.
/// PAWN spends all `sample_size` runs; total order alone uses a base of
/// `N / (k + 1)`, and first order needs the B matrix too, so `N / (k + 2)`.
pub fn compute_indices<M: Model + ?Sized>(model: &M, spec: &RunSpec) -> Result<Vec<IndexRow>> {
    let labels = model.input_labels();
    let k = model.dimension();
    match spec.method {
        Method::Pawn => {
            let config = PawnConfig::new(spec.intervals, Summary::from_code(spec.theta)?, spec.seed)?;
            let n = spec.sample_size;
            let (x, y) = inner_sample_for(model, n, inner_offset(spec.seed, 0, n))?;
            let idx = pawn_indices(x.view(), &y, &config)?;
            Ok(labels
                .iter()
                .zip(idx.values)
                .map(|(l, v)| row("pawn", l, v))
                .collect())
        }
        method => {
            let estimator = TotalEstimator::from_code(spec.theta)?;
            let with_mirror = method != Method::SobolTotal;
            let base = if with_mirror {
                spec.sample_size / (k + 2)
            } else {
                total_order_base_size(spec.sample_size, k)
            };
            if base < 2 {
                return Err(Error::InsufficientSample(format!(
                    "N = {} is too small for {k} inputs",
                    spec.sample_size
                )));
            }
            let design = build_estimator_design(base, k, 1, inner_offset(spec.seed, 0, base))?
                .transformed(&model.input_distributions())?;
            let ev = EvaluatedDesign::evaluate(model, &design, with_mirror)?;
            let mut rows = Vec::new();
            if matches!(method, Method::SobolFirst | Method::Sobol) {
                for (i, l) in labels.iter().enumerate() {
                    rows.push(row("sobol_first", l, first_order(&ev, i)?));
                }
            }
            if matches!(method, Method::SobolTotal | Method::Sobol) {
                for (i, l) in labels.iter().enumerate() {
                    rows.push(row("sobol_total", l, total_order(&ev, i, estimator)?));
                }
            }
            Ok(rows)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub sample_size: usize,
    pub method: &'static str,
    pub input_label: String,
    pub mean: f64,
    pub sd: f64,
}

/// Mean and standard deviation of each index over `reps` seeds, for every
/// sample size in `sizes`. Replicate `r` uses seed `seed + r`.
pub fn convergence_scan<M: Model + ?Sized>(
    model: &M,
    base: &RunSpec,
    sizes: &[usize],
    reps: usize,
) -> Result<Vec<ConvergenceRow>> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if sizes.is_empty() {
        return Err(Error::Config("at least one sample size is needed".into()));
    }
    let mut out = Vec::new();
    for &n in sizes {
        let runs = (0..reps as u64)
            .into_par_iter()
            .map(|r| {
                compute_indices(
                    model,
                    &RunSpec {
                        sample_size: n,
                        seed: base.seed.wrapping_add(r),
                        ..*base
                    },
                )
            })
            .collect::<Result<Vec<_>>>()?;
        for j in 0..runs[0].len() {
            let vals: Vec<f64> = runs.iter().map(|r| r[j].value).collect();
            let mean = vals.iter().sum::<f64>() / reps as f64;
            let sd = if reps > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
            } else {
                0.0
            };
            out.push(ConvergenceRow {
                sample_size: n,
                method: runs[0][j].method,
                input_label: runs[0][j].input_label.clone(),
                mean,
                sd,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionSpec;

    fn spec(method: Method, n: usize) -> RunSpec {
        RunSpec {
            method,
            sample_size: n,
            intervals: 10,
            theta: 1,
            seed: 1,
        }
    }

    #[test]
    fn pawn_rows() {
        let rows = compute_indices(&FunctionSpec::Ishigami, &RunSpec { theta: 2, ..spec(Method::Pawn, 4000) }).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.value) && r.method == "pawn"));
    }

    #[test]
    fn sobol_rows() {
        let rows = compute_indices(&FunctionSpec::Liu, &spec(Method::Sobol, 4000)).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].method, "sobol_first");
        assert_eq!(rows[3].method, "sobol_total");
        assert!(compute_indices(&FunctionSpec::Liu, &spec(Method::SobolTotal, 4)).is_err());
    }

    #[test]
    fn scan_errors() {
        let f = FunctionSpec::Ishigami;
        assert!(convergence_scan(&f, &spec(Method::Pawn, 0), &[500], 0).is_err());
        let rows = convergence_scan(&f, &spec(Method::Pawn, 0), &[500], 2).unwrap();
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.key().parse::<Method>().unwrap(), m);
        }
        assert!("fast".parse::<Method>().is_err());
    }
}
