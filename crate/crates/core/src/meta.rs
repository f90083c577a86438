//! Sensitivity analysis of a sensitivity analysis.
//!
//! The design parameters of an inner analysis (sample size `N`, number of
//! conditioning intervals `n`, subsample seed `eps` and summary statistic or
//! estimator `theta`) are themselves sampled from a Sobol' design. Every row
//! of that design runs one inner PAWN or total-order analysis on a benchmark
//! model, and the resulting index values are treated as the outputs of a
//! meta-model whose Sobol' indices are then estimated.
//!
//! Each meta row draws its inner sample from its own segment of the Sobol'
//! sequence. Rows of the mixed matrices reuse the segment of the A row they
//! were built from, so the inner sample acts as a hidden input that is
//! always taken from A.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::{eval_rows, Model};
use crate::overlap::{overlap_matrix, OverlapMatrix};
use crate::pawn::{median, mix_seed, pawn_indices, PawnConfig, Summary};
use crate::sampling::{
    build_estimator_design, sobol_sequence, transform, transform_view, Distribution, SOBOL_PERIOD,
};
use crate::variance::{clamp, interaction_indices, total_order, EvaluatedDesign, SobolEstimates, TotalEstimator};

pub const MIN_META_ROWS: usize = 8;
/// Points reserved for each inner sample in the Sobol' sequence.
pub const SEGMENT_LEN: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setting {
    MaxInTheta,
    MaxNotInTheta,
    Optimum,
    TotalOrderStar,
}

impl Setting {
    pub const ALL: [Setting; 4] = [
        Self::MaxInTheta,
        Self::MaxNotInTheta,
        Self::Optimum,
        Self::TotalOrderStar,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Self::MaxInTheta => "max_in_theta",
            Self::MaxNotInTheta => "max_not_in_theta",
            Self::Optimum => "optimum",
            Self::TotalOrderStar => "total_order_star",
        }
    }

    pub fn is_pawn(self) -> bool {
        self != Self::TotalOrderStar
    }

    /// Number of design parameters.
    pub fn k_meta(self) -> usize {
        if self.is_pawn() {
            4
        } else {
            2
        }
    }

    pub fn parameter_labels(self) -> &'static [&'static str] {
        if self.is_pawn() {
            &["N", "n", "eps", "theta"]
        } else {
            &["N", "theta"]
        }
    }

    pub fn distributions(self) -> Vec<Distribution> {
        use Distribution::{ContinuousUniform as U, DiscreteUniform as DU};
        let eps = U { lo: 1.0, hi: 1000.0 };
        match self {
            Self::MaxInTheta => vec![
                U { lo: 200.0, hi: 2000.0 },
                U { lo: 5.0, hi: 20.0 },
                eps,
                DU { lo: 1, hi: 3 },
            ],
            Self::MaxNotInTheta => vec![
                U { lo: 200.0, hi: 2000.0 },
                U { lo: 5.0, hi: 20.0 },
                eps,
                DU { lo: 1, hi: 2 },
            ],
            Self::Optimum => vec![
                U { lo: 2500.0, hi: 4000.0 },
                U { lo: 15.0, hi: 20.0 },
                eps,
                DU { lo: 1, hi: 2 },
            ],
            Self::TotalOrderStar => vec![U { lo: 200.0, hi: 2000.0 }, DU { lo: 1, hi: 3 }],
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown setting '{s}'")))
    }
}

/// One realization of the design parameters of an inner analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignPoint {
    pub sample_size: usize,
    /// Conditioning intervals; PAWN only.
    pub intervals: Option<usize>,
    /// Unconditional subsample seed; PAWN only.
    pub eps: Option<u64>,
    pub theta: u8,
}

impl DesignPoint {
    /// Builds a point from one transformed design row, rounding the
    /// continuous parameters to the nearest integer.
    pub fn from_row(setting: Setting, row: &[f64]) -> Result<Self> {
        if row.len() != setting.k_meta() {
            return Err(Error::Shape(format!(
                "{} design parameters for setting {setting}",
                row.len()
            )));
        }
        let int = |v: f64| v.round() as usize;
        Ok(if setting.is_pawn() {
            Self {
                sample_size: int(row[0]),
                intervals: Some(int(row[1])),
                eps: Some(row[2].round() as u64),
                theta: row[3] as u8,
            }
        } else {
            Self {
                sample_size: int(row[0]),
                intervals: None,
                eps: None,
                theta: row[1] as u8,
            }
        })
    }

    /// The design parameters as numbers, in `parameter_labels` order.
    pub fn as_vec(&self) -> Vec<f64> {
        let mut v = vec![self.sample_size as f64];
        if let (Some(n), Some(eps)) = (self.intervals, self.eps) {
            v.push(n as f64);
            v.push(eps as f64);
        }
        v.push(self.theta as f64);
        v
    }
}

/// Which kind of row of the meta design a point belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    A,
    B,
    Mix(Vec<usize>),
}

/// The meta design: A, B and optionally mixed matrices of design points.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaDesign {
    pub setting: Setting,
    pub rows: usize,
    pub a: Vec<DesignPoint>,
    pub b: Vec<DesignPoint>,
    pub mixes: Vec<(Vec<usize>, Vec<DesignPoint>)>,
}

impl MetaDesign {
    /// Every point with its row id and inner-sample slot, in the order A, B,
    /// then each mix.
    pub fn points(&self) -> Vec<(usize, usize, DesignPoint)> {
        let r = self.rows;
        let mut out = Vec::with_capacity(r * (2 + self.mixes.len()));
        out.extend(self.a.iter().enumerate().map(|(v, p)| (v, v, *p)));
        out.extend(self.b.iter().enumerate().map(|(v, p)| (r + v, r + v, *p)));
        for (m, (_, pts)) in self.mixes.iter().enumerate() {
            out.extend(pts.iter().enumerate().map(|(v, p)| ((2 + m) * r + v, v, *p)));
        }
        out
    }

    pub fn block_of(&self, row_id: usize) -> Block {
        match row_id / self.rows {
            0 => Block::A,
            1 => Block::B,
            m => Block::Mix(self.mixes[m - 2].0.clone()),
        }
    }
}

fn design_points(setting: Setting, m: &Array2<f64>) -> Result<Vec<DesignPoint>> {
    m.rows()
        .into_iter()
        .map(|r| DesignPoint::from_row(setting, r.as_slice().expect("standard layout")))
        .collect()
}

/// Samples the design-parameter space of `setting`. `max_order` selects
/// which mixes are built: 0 for none (uncertainty analysis only), 1 for
/// first and total order, 2 or 3 for interaction indices.
pub fn build_meta_design(setting: Setting, rows: usize, max_order: usize) -> Result<MetaDesign> {
    if rows < MIN_META_ROWS {
        return Err(Error::Config(format!(
            "meta design needs at least {MIN_META_ROWS} rows, got {rows}"
        )));
    }
    let k = setting.k_meta();
    if max_order > 3 || max_order > k {
        return Err(Error::Config(format!(
            "order {max_order} is not available for setting {setting}"
        )));
    }
    let specs = setting.distributions();
    let design = build_estimator_design(rows, k, max_order.max(1), 1)?;
    let a = design_points(setting, &transform(&design.base, &specs)?)?;
    let b = design_points(setting, &transform(&design.mirror, &specs)?)?;
    let mixes = if max_order == 0 {
        Vec::new()
    } else {
        design
            .mixes
            .iter()
            .map(|m| Ok((m.columns.clone(), design_points(setting, &transform(&m.matrix, &specs)?)?)))
            .collect::<Result<_>>()?
    };
    Ok(MetaDesign {
        setting,
        rows,
        a,
        b,
        mixes,
    })
}

/// First Sobol' index of the inner sample stored in `slot`.
pub fn inner_offset(global_seed: u64, slot: usize, len: usize) -> u64 {
    let segment = SEGMENT_LEN.max((len as u64).next_power_of_two());
    let segments = SOBOL_PERIOD / segment - 1;
    let start = mix_seed(global_seed, 0x0ff5e7).wrapping_add(slot as u64) % segments;
    1 + start * segment
}

/// Transformed Sobol' sample of `rows` points starting at `offset`, with
/// the model outputs.
pub fn inner_sample_for<M: Model + ?Sized>(model: &M, rows: usize, offset: u64) -> Result<(Array2<f64>, Vec<f64>)> {
    let unit = sobol_sequence(model.dimension(), rows, offset)?;
    let x = transform(&unit, &model.input_distributions())?;
    let y = eval_rows(model, x.view())?;
    Ok((x, y))
}

/// Inner PAWN analysis for one design point; returns one index per input.
pub fn run_inner_pawn<M: Model + ?Sized>(
    point: &DesignPoint,
    model: &M,
    global_seed: u64,
    slot: usize,
) -> Result<Vec<f64>> {
    let (intervals, eps) = match (point.intervals, point.eps) {
        (Some(n), Some(e)) => (n, e),
        _ => return Err(Error::Config("PAWN needs n and eps".into())),
    };
    let size = point.sample_size;
    if size < 4 * intervals {
        return Err(Error::InsufficientSample(format!(
            "N = {size} is below 4n = {}",
            4 * intervals
        )));
    }
    let config = PawnConfig::new(intervals, Summary::from_code(point.theta)?, eps)?;
    let (x, y) = inner_sample_for(model, size, inner_offset(global_seed, slot, size))?;
    Ok(pawn_indices(x.view(), &y, &config)?.values)
}

/// Base size of a total-order design that fits in `budget` model runs.
pub fn total_order_base_size(budget: usize, k: usize) -> usize {
    budget / (k + 1)
}

/// Inner total-order analysis at `int(N / (k + 1))` base rows; raw values.
pub fn run_inner_total_order<M: Model + ?Sized>(
    point: &DesignPoint,
    model: &M,
    global_seed: u64,
    slot: usize,
) -> Result<Vec<f64>> {
    let k = model.dimension();
    let base = total_order_base_size(point.sample_size, k);
    if base < 8 {
        return Err(Error::InsufficientSample(format!(
            "N = {} leaves a base size of {base} for {k} inputs",
            point.sample_size
        )));
    }
    let estimator = TotalEstimator::from_code(point.theta)?;
    let design = build_estimator_design(base, k, 1, inner_offset(global_seed, slot, base))?
        .transformed(&model.input_distributions())?;
    let ev = EvaluatedDesign::evaluate(model, &design, false)?;
    (0..k).map(|i| total_order(&ev, i, estimator)).collect()
}

/// Index values of every meta row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaResult {
    pub function: String,
    pub design: MetaDesign,
    pub input_labels: Vec<String>,
    /// Raw values, indexed by row id then input.
    pub values: Vec<Vec<f64>>,
}

impl MetaResult {
    pub fn setting(&self) -> Setting {
        self.design.setting
    }

    pub fn row_count(&self) -> usize {
        self.values.len()
    }

    /// Clamped values of `input` over the A and B rows.
    pub fn distribution(&self, input: usize) -> Vec<f64> {
        self.values[..2 * self.design.rows]
            .iter()
            .map(|v| clamp(v[input]))
            .collect()
    }

    /// The clamped values of `input` arranged as an evaluated design over
    /// the design parameters.
    pub fn as_evaluated_design(&self, input: usize) -> Result<EvaluatedDesign> {
        let r = self.design.rows;
        let col = |start: usize| -> Vec<f64> {
            self.values[start..start + r].iter().map(|v| clamp(v[input])).collect()
        };
        let y_mix = self
            .design
            .mixes
            .iter()
            .enumerate()
            .map(|(m, (cols, _))| (cols.clone(), col((2 + m) * r)))
            .collect();
        EvaluatedDesign::new(col(0), col(r), y_mix)
    }
}

/// Runs `inner` for every point of `design` on a pool of `parallelism`
/// threads. Results land in row-id order whatever the schedule.
pub fn evaluate_design<F>(design: &MetaDesign, parallelism: usize, inner: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, &DesignPoint) -> Result<Vec<f64>> + Sync,
{
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let points = design.points();
    pool.install(|| {
        points
            .par_iter()
            .map(|(row, slot, p)| inner(*slot, p).map_err(|e| e.at_row(*row)))
            .collect()
    })
}

/// Runs the inner analysis of `setting` on every row of a fresh meta design.
pub fn run_meta<M: Model + ?Sized>(
    setting: Setting,
    model: &M,
    rows: usize,
    global_seed: u64,
    parallelism: usize,
    max_order: usize,
) -> Result<MetaResult> {
    let design = build_meta_design(setting, rows, max_order)?;
    let values = evaluate_design(&design, parallelism, |slot, p| {
        if setting.is_pawn() {
            run_inner_pawn(p, model, global_seed, slot)
        } else {
            run_inner_total_order(p, model, global_seed, slot)
        }
    })?;
    Ok(MetaResult {
        function: model.name().to_string(),
        design,
        input_labels: model.input_labels(),
        values,
    })
}

/// Sobol' indices of the design parameters, one set per model input.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaSensitivity {
    pub function: String,
    pub setting: Setting,
    pub parameter_labels: Vec<String>,
    pub input_labels: Vec<String>,
    pub per_input: Vec<SobolEstimates>,
}

/// First-order (Saltelli 2010) and total-order (Jansen) indices, plus any
/// interaction indices the design supports. Index values are centered
/// before estimation: their mean is large next to their spread, and the
/// uncentered first-order estimator would be dominated by that mean.
pub fn meta_sensitivity(meta: &MetaResult) -> Result<MetaSensitivity> {
    if meta.design.mixes.is_empty() {
        return Err(Error::DesignIncomplete(vec![0]));
    }
    let k = meta.setting().k_meta();
    let per_input = (0..meta.input_labels.len())
        .map(|i| {
            let ev = meta.as_evaluated_design(i)?.centered();
            interaction_indices(&ev, k, TotalEstimator::Jansen).map_err(|e| Error::Pair {
                left: meta.function.clone(),
                right: meta.input_labels[i].clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(MetaSensitivity {
        function: meta.function.clone(),
        setting: meta.setting(),
        parameter_labels: meta.setting().parameter_labels().iter().map(|s| s.to_string()).collect(),
        input_labels: meta.input_labels.clone(),
        per_input,
    })
}

/// Identifies one meta-level index: a single parameter (first or total
/// order) or a parameter group (interaction).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexKind {
    First(usize),
    Total(usize),
    Second(usize, usize),
    Third(usize, usize, usize),
}

impl IndexKind {
    pub fn order_name(&self) -> &'static str {
        match self {
            Self::First(_) => "first",
            Self::Total(_) => "total",
            Self::Second(..) => "second",
            Self::Third(..) => "third",
        }
    }

    pub fn parameters(&self, labels: &[String]) -> String {
        let idx: Vec<usize> = match *self {
            Self::First(i) | Self::Total(i) => vec![i],
            Self::Second(i, j) => vec![i, j],
            Self::Third(i, j, l) => vec![i, j, l],
        };
        idx.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join(":")
    }
}

impl MetaSensitivity {
    /// Every estimate for input `i` as (kind, raw value).
    pub fn entries(&self, i: usize) -> Vec<(IndexKind, f64)> {
        let e = &self.per_input[i];
        let mut out = Vec::new();
        out.extend(e.first.iter().enumerate().map(|(p, v)| (IndexKind::First(p), *v)));
        out.extend(e.total.iter().enumerate().map(|(p, v)| (IndexKind::Total(p), *v)));
        out.extend(e.second.iter().map(|(&(p, q), v)| (IndexKind::Second(p, q), *v)));
        out.extend(e.third.iter().map(|(&(p, q, r), v)| (IndexKind::Third(p, q, r), *v)));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    /// Every (function, input) pair is one observation.
    Equal,
    /// Each function carries the same total weight, split over its inputs.
    ByFunction,
}

impl Pooling {
    pub fn key(self) -> &'static str {
        match self {
            Self::Equal => "pooled_equal",
            Self::ByFunction => "pooled_by_function",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledSummary {
    pub kind: IndexKind,
    pub pooling: Pooling,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub count: usize,
}

fn weighted_quantile(sorted: &[(f64, f64)], p: f64) -> f64 {
    let total: f64 = sorted.iter().map(|(_, w)| w).sum();
    let target = p * total;
    let mut acc = 0.0;
    for (v, w) in sorted {
        acc += w;
        if acc >= target - 1e-12 * total {
            return *v;
        }
    }
    sorted[sorted.len() - 1].0
}

/// Pools the meta-level estimates of several runs (normally one per
/// function, all from the same setting) and summarizes each index.
pub fn pool(results: &[MetaSensitivity], pooling: Pooling) -> Vec<PooledSummary> {
    let mut kinds: Vec<IndexKind> = results
        .iter()
        .flat_map(|r| (0..r.per_input.len()).flat_map(move |i| r.entries(i).into_iter().map(|(k, _)| k)))
        .collect();
    kinds.sort();
    kinds.dedup();

    kinds
        .into_iter()
        .map(|kind| {
            let mut obs: Vec<(f64, f64)> = Vec::new();
            for r in results {
                let k = r.per_input.len() as f64;
                for i in 0..r.per_input.len() {
                    if let Some((_, v)) = r.entries(i).into_iter().find(|(kk, _)| *kk == kind) {
                        let w = match pooling {
                            Pooling::Equal => 1.0,
                            Pooling::ByFunction => 1.0 / k,
                        };
                        obs.push((v, w));
                    }
                }
            }
            obs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (q1, median, q3) = match pooling {
                Pooling::Equal => {
                    let v: Vec<f64> = obs.iter().map(|o| o.0).collect();
                    (quantile7(&v, 0.25), quantile7(&v, 0.5), quantile7(&v, 0.75))
                }
                Pooling::ByFunction => (
                    weighted_quantile(&obs, 0.25),
                    weighted_quantile(&obs, 0.5),
                    weighted_quantile(&obs, 0.75),
                ),
            };
            PooledSummary {
                kind,
                pooling,
                min: obs[0].0,
                q1,
                median,
                q3,
                max: obs[obs.len() - 1].0,
                count: obs.len(),
            }
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Distribution summary of one input's index values.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSummary {
    pub label: String,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Fraction of raw values outside [0, 1].
    pub out_of_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub overlap: OverlapMatrix,
    pub inputs: Vec<InputSummary>,
    /// Overlap of inputs adjacent in the ranking by median, most
    /// influential first.
    pub prioritization: Vec<(String, String, f64)>,
    /// Overlap of every (influential, non-influential) pair.
    pub screening: Vec<(String, String, f64)>,
}

/// Overlap diagnostics of the index distributions over the A and B rows.
/// `influential` holds the indices of inputs known to matter.
pub fn ranking_screening_report(meta: &MetaResult, influential: Option<&[usize]>) -> Result<RankingReport> {
    let k = meta.input_labels.len();
    if k < 2 {
        return Err(Error::InsufficientSample("ranking needs at least 2 inputs".into()));
    }
    let samples: Vec<(String, Vec<f64>)> = (0..k)
        .map(|i| (meta.input_labels[i].clone(), meta.distribution(i)))
        .collect();
    let overlap = overlap_matrix(&samples)?;

    let rows = 2 * meta.design.rows;
    let inputs: Vec<InputSummary> = samples
        .iter()
        .enumerate()
        .map(|(i, (label, v))| {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            let outside = meta.values[..rows]
                .iter()
                .filter(|r| !(0.0..=1.0).contains(&r[i]))
                .count();
            InputSummary {
                label: label.clone(),
                q1: quantile7(&s, 0.25),
                median: median(&s),
                q3: quantile7(&s, 0.75),
                out_of_range: outside as f64 / rows as f64,
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| inputs[q].median.total_cmp(&inputs[p].median).then(p.cmp(&q)));
    let prioritization = order
        .windows(2)
        .map(|w| {
            (
                meta.input_labels[w[0]].clone(),
                meta.input_labels[w[1]].clone(),
                overlap.values[[w[0], w[1]]],
            )
        })
        .collect();

    let screening = match influential {
        Some(set) => {
            let mut out = Vec::new();
            for &i in set {
                for j in (0..k).filter(|j| !set.contains(j)) {
                    out.push((
                        meta.input_labels[i].clone(),
                        meta.input_labels[j].clone(),
                        overlap.values[[i, j]],
                    ));
                }
            }
            out
        }
        None => Vec::new(),
    };

    Ok(RankingReport {
        overlap,
        inputs,
        prioritization,
        screening,
    })
}

/// Known influential inputs of the benchmarks: every input that carries a
/// non-zero first-order or interaction term.
pub fn influential_inputs(function: crate::functions::FunctionSpec) -> Vec<usize> {
    use crate::functions::FunctionSpec::*;
    match function {
        Liu => vec![0, 1],
        Ishigami => vec![0, 2],
        SobolG => vec![0, 1, 2, 3],
        Morris => (0..10).collect(),
    }
}

/// Transformed design-parameter matrix; handy for inspection and tests.
pub fn design_parameter_matrix(setting: Setting, unit: &Array2<f64>) -> Result<Array2<f64>> {
    transform_view(unit.view(), &setting.distributions())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionSpec;

    #[test]
    fn setting_names() {
        for s in Setting::ALL {
            assert_eq!(s.key().parse::<Setting>().unwrap(), s);
            assert_eq!(s.distributions().len(), s.k_meta());
        }
        assert!("best".parse::<Setting>().is_err());
    }

    #[test]
    fn meta_design_shapes() {
        let d = build_meta_design(Setting::MaxInTheta, 64, 0).unwrap();
        assert_eq!((d.a.len(), d.b.len(), d.mixes.len()), (64, 64, 0));
        let d = build_meta_design(Setting::TotalOrderStar, 64, 1).unwrap();
        assert_eq!(d.mixes.len(), 2);
        assert!(d.a.iter().all(|p| p.intervals.is_none()));
        let d = build_meta_design(Setting::MaxNotInTheta, 64, 3).unwrap();
        assert_eq!(d.mixes.len(), 14);
        assert_eq!(d.points().len(), 64 * 16);
        assert!(matches!(build_meta_design(Setting::MaxInTheta, 4, 1), Err(Error::Config(_))));
        assert!(build_meta_design(Setting::TotalOrderStar, 64, 3).is_err());
    }

    #[test]
    fn design_points_stay_in_support() {
        for setting in Setting::ALL {
            let d = build_meta_design(setting, 256, 1).unwrap();
            let (nlo, nhi) = if setting == Setting::Optimum { (2500, 4000) } else { (200, 2000) };
            let theta_hi = match setting {
                Setting::MaxInTheta | Setting::TotalOrderStar => 3,
                _ => 2,
            };
            for (_, _, p) in d.points() {
                assert!((nlo..=nhi).contains(&p.sample_size));
                assert!((1..=theta_hi).contains(&p.theta));
                if let (Some(n), Some(eps)) = (p.intervals, p.eps) {
                    let nlo = if setting == Setting::Optimum { 15 } else { 5 };
                    assert!((nlo..=20).contains(&n));
                    assert!((1..=1000).contains(&eps));
                }
            }
        }
    }

    #[test]
    fn mix_points_follow_their_columns() {
        let d = build_meta_design(Setting::MaxInTheta, 32, 2).unwrap();
        for (cols, pts) in &d.mixes {
            for v in 0..32 {
                let (a, b, m) = (d.a[v].as_vec(), d.b[v].as_vec(), pts[v].as_vec());
                for c in 0..4 {
                    let want = if cols.contains(&c) { b[c] } else { a[c] };
                    assert_eq!(m[c], want);
                }
            }
        }
    }

    #[test]
    fn offsets_are_distinct_segments() {
        let mut starts: Vec<u64> = (0..2048).map(|s| inner_offset(42, s, 4000)).collect();
        starts.sort_unstable();
        assert!(starts.windows(2).all(|w| w[1] - w[0] >= SEGMENT_LEN));
        assert!(starts.iter().all(|&s| s + 4000 <= SOBOL_PERIOD));
    }

    #[test]
    fn morris_base_size() {
        assert_eq!(total_order_base_size(2000, FunctionSpec::Morris.dimension()), 95);
    }

    #[test]
    fn inner_pawn_shape() {
        let p = DesignPoint {
            sample_size: 2000,
            intervals: Some(10),
            eps: Some(5),
            theta: 1,
        };
        let v = run_inner_pawn(&p, &FunctionSpec::Ishigami, 1, 0).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));

        let small = DesignPoint { sample_size: 39, ..p };
        assert!(matches!(
            run_inner_pawn(&small, &FunctionSpec::Ishigami, 1, 0),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn weighted_quantiles() {
        let obs = [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0)];
        assert_eq!(weighted_quantile(&obs, 0.5), 2.0);
        assert_eq!(weighted_quantile(&obs, 0.75), 3.0);
        assert_eq!(quantile7(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
    }
}
