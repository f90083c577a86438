//! Benchmark models: Liu, Ishigami, Sobol' G and Morris.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::sampling::Distribution;

pub const ISHIGAMI_A: f64 = 2.0;
pub const ISHIGAMI_B: f64 = 1.0;
pub const SOBOL_G_A: [f64; 8] = [0.0, 1.0, 4.5, 9.0, 99.0, 99.0, 99.0, 99.0];
pub const LIU_DF: [f64; 2] = [10.0, 13.978];

pub const MORRIS_BETA0: f64 = 0.0;
const MORRIS_FIRST: f64 = 20.0;
const MORRIS_SECOND: f64 = -15.0;
const MORRIS_THIRD: f64 = -10.0;
const MORRIS_FOURTH: f64 = 5.0;

/// A scalar model with independent inputs.
pub trait Model: Sync {
    fn name(&self) -> &str;

    /// Number of model inputs.
    fn dimension(&self) -> usize;

    fn input_distributions(&self) -> Vec<Distribution>;

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    fn input_labels(&self) -> Vec<String> {
        (1..=self.dimension()).map(|i| format!("X{i}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionSpec {
    Liu,
    Ishigami,
    SobolG,
    Morris,
}

impl FunctionSpec {
    pub const ALL: [FunctionSpec; 4] = [Self::Liu, Self::Ishigami, Self::SobolG, Self::Morris];

    pub fn key(self) -> &'static str {
        match self {
            Self::Liu => "liu",
            Self::Ishigami => "ishigami",
            Self::SobolG => "sobol_g",
            Self::Morris => "morris",
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown function '{s}'")))
    }
}

impl Model for FunctionSpec {
    fn name(&self) -> &str {
        self.key()
    }

    fn dimension(&self) -> usize {
        match self {
            Self::Liu => 2,
            Self::Ishigami => 3,
            Self::SobolG => 8,
            Self::Morris => 20,
        }
    }

    fn input_distributions(&self) -> Vec<Distribution> {
        match self {
            Self::Liu => LIU_DF
                .iter()
                .map(|&df| Distribution::ChiSquare { df })
                .collect(),
            Self::Ishigami => vec![Distribution::ContinuousUniform { lo: -PI, hi: PI }; 3],
            Self::SobolG | Self::Morris => {
                vec![Distribution::ContinuousUniform { lo: 0.0, hi: 1.0 }; self.dimension()]
            }
        }
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::Shape(format!(
                "{} expects {} inputs, got {}",
                self.key(),
                self.dimension(),
                x.len()
            )));
        }
        match self {
            Self::Liu => eval_liu(x),
            Self::Ishigami => Ok(eval_ishigami(x)),
            Self::SobolG => eval_sobol_g(x),
            Self::Morris => eval_morris(x),
        }
    }
}

pub fn eval_liu(x: &[f64]) -> Result<f64> {
    if x[1] == 0.0 {
        return Err(Error::DegenerateDivision);
    }
    Ok(x[0] / x[1])
}

pub fn eval_ishigami(x: &[f64]) -> f64 {
    let s1 = x[0].sin();
    s1 + ISHIGAMI_A * x[1].sin().powi(2) + ISHIGAMI_B * x[2].powi(4) * s1
}

fn check_unit(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(index) => Err(Error::Domain {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

pub fn eval_sobol_g(x: &[f64]) -> Result<f64> {
    check_unit(x)?;
    Ok(x.iter()
        .zip(SOBOL_G_A)
        .map(|(xi, a)| ((4.0 * xi - 2.0).abs() + a) / (1.0 + a))
        .product())
}

fn morris_w(i: usize, x: f64) -> f64 {
    // Inputs 4, 5 and 7 (1-based) are warped.
    if matches!(i, 3 | 4 | 6) {
        2.0 * (1.1 * x / (x + 0.1) - 0.5)
    } else {
        2.0 * (x - 0.5)
    }
}

/// Coefficients outside the listed index ranges are zero, so only the
/// first ten inputs enter linearly and only the first six interact.
pub fn eval_morris(x: &[f64]) -> Result<f64> {
    check_unit(x)?;
    let w: Vec<f64> = x.iter().enumerate().map(|(i, &xi)| morris_w(i, xi)).collect();

    let mut y = MORRIS_BETA0;
    y += MORRIS_FIRST * w[..10].iter().sum::<f64>();
    for i in 0..6 {
        for j in i + 1..6 {
            y += MORRIS_SECOND * w[i] * w[j];
        }
    }
    for i in 0..5 {
        for j in i + 1..5 {
            for l in j + 1..5 {
                y += MORRIS_THIRD * w[i] * w[j] * w[l];
            }
        }
    }
    y += MORRIS_FOURTH * w[0] * w[1] * w[2] * w[3];
    Ok(y)
}

/// Inputs and the model outputs evaluated on them.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationBatch {
    pub inputs: Array2<f64>,
    pub outputs: Vec<f64>,
}

/// Evaluates `model` on every row. One extra trailing column is accepted
/// and ignored, so a dummy input can ride along with the real ones.
pub fn eval_batch<M: Model + ?Sized>(model: &M, inputs: Array2<f64>) -> Result<EvaluationBatch> {
    let outputs = eval_rows(model, inputs.view())?;
    Ok(EvaluationBatch { inputs, outputs })
}

pub(crate) fn eval_rows<M: Model + ?Sized>(model: &M, inputs: ArrayView2<f64>) -> Result<Vec<f64>> {
    let k = model.dimension();
    if inputs.ncols() != k && inputs.ncols() != k + 1 {
        return Err(Error::Shape(format!(
            "{} expects {k} columns (or {} with a dummy), got {}",
            model.name(),
            k + 1,
            inputs.ncols()
        )));
    }
    let mut buf = vec![0.0; k];
    inputs
        .rows()
        .into_iter()
        .enumerate()
        .map(|(r, row)| {
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = *v;
            }
            let y = model.evaluate(&buf).map_err(|e| e.at_row(r))?;
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::InvalidData.at_row(r))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn liu() {
        assert_eq!(eval_liu(&[1.0, 2.0]).unwrap(), 0.5);
        assert_eq!(eval_liu(&[9.342, 9.342]).unwrap(), 1.0);
        assert!((eval_liu(&[10.0, 13.978]).unwrap() - 0.71541).abs() < 1e-5);
        assert_eq!(eval_liu(&[1.0, 0.0]), Err(Error::DegenerateDivision));
    }

    #[test]
    fn ishigami() {
        assert_eq!(eval_ishigami(&[0.0, 0.0, 0.0]), 0.0);
        assert!((eval_ishigami(&[FRAC_PI_2, FRAC_PI_2, 0.0]) - 3.0).abs() < 1e-12);
        let expected = 3.0 + FRAC_PI_2.powi(4);
        assert!((eval_ishigami(&[FRAC_PI_2; 3]) - expected).abs() < 1e-12);
        assert!((expected - 9.0881).abs() < 1e-4);
    }

    #[test]
    fn sobol_g() {
        assert_eq!(eval_sobol_g(&[0.5; 8]).unwrap(), 0.0);
        let zeros = eval_sobol_g(&[0.0; 8]).unwrap();
        let hand = 2.0 * 1.5 * (6.5 / 5.5) * 1.1 * 1.01f64.powi(4);
        assert!((zeros - hand).abs() < 1e-12);
        assert!((zeros - 4.0585).abs() < 5e-4);
        assert!((eval_sobol_g(&[1.0; 8]).unwrap() - zeros).abs() < 1e-12);
        assert!(matches!(eval_sobol_g(&[1.5; 8]), Err(Error::Domain { index: 0, .. })));
    }

    #[test]
    fn morris() {
        let y = eval_morris(&[0.5; 20]).unwrap();
        let w = 5.0 / 6.0;
        assert!((y - (3.0 * 20.0 * w - 15.0 * w * w)).abs() < 1e-12);
        assert!((y - 39.5833).abs() < 1e-4);

        let mut x = [0.5; 20];
        for i in [3, 4, 6] {
            x[i] = 1.0 / 12.0;
        }
        assert!(eval_morris(&x).unwrap().abs() < 1e-12);

        let mut bad = [0.5; 20];
        bad[13] = 1.5;
        assert!(matches!(eval_morris(&bad), Err(Error::Domain { index: 13, .. })));
    }

    #[test]
    fn batches() {
        let b = eval_batch(&FunctionSpec::Ishigami, Array2::zeros((2, 3))).unwrap();
        assert_eq!(b.outputs, vec![0.0, 0.0]);

        let b = eval_batch(&FunctionSpec::Liu, array![[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert_eq!(b.outputs, vec![0.5, 2.0]);

        let b = eval_batch(&FunctionSpec::SobolG, Array2::from_elem((1, 9), 0.5)).unwrap();
        assert_eq!(b.outputs, vec![0.0]);

        let err = eval_batch(&FunctionSpec::Liu, array![[1.0, 2.0], [1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }));
        assert!(eval_batch(&FunctionSpec::Liu, Array2::zeros((1, 4))).is_err());
    }

    #[test]
    fn names_round_trip() {
        for f in FunctionSpec::ALL {
            assert_eq!(f.key().parse::<FunctionSpec>().unwrap(), f);
            assert_eq!(f.input_distributions().len(), f.dimension());
        }
        assert!("rosenbrock".parse::<FunctionSpec>().is_err());
    }
}
