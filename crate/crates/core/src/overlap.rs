//! Coefficient of overlapping between two empirical distributions: the area
//! under the pointwise minimum of their Gaussian kernel density estimates.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const GRID_POINTS: usize = 1024;
pub const MIN_KDE_SAMPLE: usize = 10;
/// Kernel contributions beyond this many bandwidths are dropped.
const KERNEL_CUTOFF: f64 = 8.0;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A density tabulated on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityEstimate {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }
}

/// Gaussian kernel density estimate with Silverman's rule-of-thumb bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKde {
    sorted: Vec<f64>,
    bandwidth: f64,
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl GaussianKde {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.len() < MIN_KDE_SAMPLE {
            return Err(Error::InsufficientSample(format!(
                "density estimation needs {MIN_KDE_SAMPLE} points, got {}",
                sample.len()
            )));
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidData);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / m;
        let sd = (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        if !(spread > 0.0) {
            return Err(Error::DegenerateSample);
        }
        Ok(Self {
            sorted,
            bandwidth: 0.9 * spread * m.powf(-0.2),
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Default grid: `GRID_POINTS` points over `[min - 3h, max + 3h]`.
    pub fn support(&self) -> (f64, f64) {
        let pad = 3.0 * self.bandwidth;
        (self.sorted[0] - pad, self.sorted[self.sorted.len() - 1] + pad)
    }

    /// Density at each point of an ascending grid.
    pub fn evaluate(&self, grid: &[f64]) -> Vec<f64> {
        let h = self.bandwidth;
        let reach = KERNEL_CUTOFF * h;
        let norm = INV_SQRT_2PI / (h * self.sorted.len() as f64);
        let mut start = 0;
        grid.iter()
            .map(|&x| {
                while start < self.sorted.len() && self.sorted[start] < x - reach {
                    start += 1;
                }
                let sum: f64 = self.sorted[start..]
                    .iter()
                    .take_while(|&&s| s <= x + reach)
                    .map(|&s| {
                        let z = (x - s) / h;
                        (-0.5 * z * z).exp()
                    })
                    .sum();
                sum * norm
            })
            .collect()
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        // `sum` would start from -0.0 and print a signed zero.
        .fold(0.0, |acc, v| acc + v)
}

pub fn kde(sample: &[f64]) -> Result<DensityEstimate> {
    let k = GaussianKde::new(sample)?;
    let (lo, hi) = k.support();
    let grid = linspace(lo, hi, GRID_POINTS);
    let density = k.evaluate(&grid);
    Ok(DensityEstimate {
        grid,
        density,
        bandwidth: k.bandwidth,
    })
}

fn constant_value(sample: &[f64]) -> Option<f64> {
    let first = *sample.first()?;
    sample.iter().all(|&x| x == first).then_some(first)
}

/// Overlap of two samples in [0, 1]. Two constant samples overlap fully
/// when their values coincide and not at all otherwise.
pub fn coefficient_of_overlapping(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() >= MIN_KDE_SAMPLE && b.len() >= MIN_KDE_SAMPLE {
        if let (Some(x), Some(y)) = (constant_value(a), constant_value(b)) {
            return Ok(if x == y { 1.0 } else { 0.0 });
        }
    }
    let ka = GaussianKde::new(a)?;
    let kb = GaussianKde::new(b)?;
    let (lo_a, hi_a) = ka.support();
    let (lo_b, hi_b) = kb.support();
    let grid = linspace(lo_a.min(lo_b), hi_a.max(hi_b), GRID_POINTS);
    let fa = ka.evaluate(&grid);
    let fb = kb.evaluate(&grid);
    let lower: Vec<f64> = fa.iter().zip(&fb).map(|(p, q)| p.min(*q)).collect();
    let area = trapezoid(&grid, &lower);
    if !(-0.02..=1.02).contains(&area) {
        return Err(Error::OverlapOutOfRange(area));
    }
    Ok(area.clamp(0.0, 1.0))
}

/// Symmetric matrix of pairwise overlaps with a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub labels: Vec<String>,
    pub values: Array2<f64>,
}

impl OverlapMatrix {
    pub fn get(&self, left: &str, right: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == left)?;
        let j = self.labels.iter().position(|l| l == right)?;
        Some(self.values[[i, j]])
    }
}

pub fn overlap_matrix(samples: &[(String, Vec<f64>)]) -> Result<OverlapMatrix> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::InsufficientSample(format!(
            "an overlap matrix needs at least 2 inputs, got {k}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let computed = pairs
        .par_iter()
        .map(|&(i, j)| {
            coefficient_of_overlapping(&samples[i].1, &samples[j].1).map_err(|e| Error::Pair {
                left: samples[i].0.clone(),
                right: samples[j].0.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = Array2::eye(k);
    for (&(i, j), v) in pairs.iter().zip(computed) {
        values[[i, j]] = v;
        values[[j, i]] = v;
    }
    Ok(OverlapMatrix {
        labels: samples.iter().map(|(l, _)| l.clone()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, mean: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + z
            })
            .collect::<Vec<f64>>()
    }

    #[test]
    fn standard_normal_density() {
        let d = kde(&normals(1000, 0.0, 1)).unwrap();
        let k = GaussianKde::new(&normals(1000, 0.0, 1)).unwrap();
        assert!((k.evaluate(&[0.0])[0] - 0.3989).abs() < 0.05);
        assert!((d.integral() - 1.0).abs() < 0.01);
        assert_eq!(d.grid.len(), GRID_POINTS);
        assert!(d.grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degenerate_samples() {
        assert_eq!(kde(&[2.0; 20]), Err(Error::DegenerateSample));
        assert!(kde(&[1.0; 5]).is_err());
        assert_eq!(coefficient_of_overlapping(&[2.0; 20], &[2.0; 20]).unwrap(), 1.0);
        assert_eq!(coefficient_of_overlapping(&[2.0; 20], &[3.0; 20]).unwrap(), 0.0);
        assert!(coefficient_of_overlapping(&[2.0; 20], &normals(20, 0.0, 2)).is_err());
    }

    #[test]
    fn zero_iqr_falls_back_to_sd() {
        let mut v = vec![0.0; 30];
        v.push(1.0);
        v.push(0.5);
        assert!(GaussianKde::new(&v).unwrap().bandwidth() > 0.0);
    }

    #[test]
    fn identical_and_disjoint() {
        let a = normals(1000, 0.0, 3);
        assert!((coefficient_of_overlapping(&a, &a).unwrap() - 1.0).abs() < 0.01);
        let b = normals(1000, 100.0, 4);
        assert!(coefficient_of_overlapping(&a, &b).unwrap() < 1e-6);
    }

    #[test]
    fn matrix_shape() {
        let a = normals(500, 0.0, 5);
        let samples = vec![
            ("X1".to_string(), a.clone()),
            ("X2".to_string(), a.clone()),
            ("X3".to_string(), normals(500, 50.0, 6)),
        ];
        let m = overlap_matrix(&samples).unwrap();
        assert_eq!(m.values[[0, 0]], 1.0);
        assert!((m.get("X1", "X2").unwrap() - 1.0).abs() < 0.01);
        assert!(m.get("X3", "X1").unwrap() < 0.01);
        assert_eq!(m.values[[0, 2]], m.values[[2, 0]]);
        assert!(overlap_matrix(&samples[..1]).is_err());
        let bad = vec![samples[0].clone(), ("X9".to_string(), vec![1.0; 3])];
        assert!(matches!(overlap_matrix(&bad), Err(Error::Pair { .. })));
    }
}
