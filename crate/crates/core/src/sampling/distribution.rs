use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Absolute tolerance on the CDF scale for the chi-square inversion.
pub const CDF_TOLERANCE: f64 = 1e-10;
const MAX_STEPS: usize = 200;

/// Marginal distribution of one input column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    ContinuousUniform { lo: f64, hi: f64 },
    DiscreteUniform { lo: i64, hi: i64 },
    ChiSquare { df: f64 },
}

impl Distribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDistribution(format!(
                "uniform bounds must satisfy a < b, got ({lo}, {hi})"
            )));
        }
        Ok(Self::ContinuousUniform { lo, hi })
    }

    pub fn discrete_uniform(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidDistribution(format!(
                "discrete uniform bounds must satisfy lo <= hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self::DiscreteUniform { lo, hi })
    }

    pub fn chi_square(df: f64) -> Result<Self> {
        if !(df.is_finite() && df > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "chi-square degrees of freedom must be positive, got {df}"
            )));
        }
        Ok(Self::ChiSquare { df })
    }

    /// Inverse CDF at `u` in [0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        match *self {
            Self::ContinuousUniform { lo, hi } => Ok(lo + u * (hi - lo)),
            Self::DiscreteUniform { lo, hi } => {
                let span = (hi - lo + 1) as f64;
                Ok((lo as f64 + (u * span).floor()).min(hi as f64))
            }
            Self::ChiSquare { df } => chi_square_quantile(u, df),
        }
    }
}

fn chi_square_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(df / 2.0, x / 2.0)
    }
}

fn chi_square_pdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = df / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Safeguarded Newton iteration on the regularized lower incomplete gamma
/// function, falling back to bisection whenever a step leaves the bracket.
pub fn chi_square_quantile(u: f64, df: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) || !(df > 0.0) {
        return Err(Error::NonConvergence { u, df });
    }
    if u == 0.0 {
        return Ok(0.0);
    }

    // Wilson–Hilferty start.
    let z = statrs::function::erf::erfc_inv(2.0 * u) * -std::f64::consts::SQRT_2;
    let c = 2.0 / (9.0 * df);
    let mut x = (df * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8 * df);

    let mut lo = 0.0;
    let mut hi = df.max(1.0);
    while chi_square_cdf(hi, df) < u {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NonConvergence { u, df });
        }
    }
    if !(lo..=hi).contains(&x) {
        x = 0.5 * (lo + hi);
    }

    let mut best = (f64::INFINITY, x);
    for _ in 0..MAX_STEPS {
        let f = chi_square_cdf(x, df) - u;
        if f.abs() < best.0 {
            best = (f.abs(), x);
        }
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let pdf = chi_square_pdf(x, df);
        let newton = x - f / pdf;
        let next = if pdf > 0.0 && newton >= lo && newton <= hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
        x = next;
    }
    let (gap, x) = best;
    if gap <= CDF_TOLERANCE {
        Ok(x)
    } else {
        Err(Error::NonConvergence { u, df })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_midpoint() {
        let d = Distribution::uniform(200.0, 2000.0).unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), 1100.0);
    }

    #[test]
    fn discrete_top_bin() {
        let d = Distribution::discrete_uniform(1, 3).unwrap();
        assert_eq!(d.quantile(0.999).unwrap(), 3.0);
        assert_eq!(d.quantile(0.0).unwrap(), 1.0);
        assert_eq!(d.quantile(1.0 / 3.0 - 1e-12).unwrap(), 1.0);
        assert_eq!(d.quantile(0.5).unwrap(), 2.0);
    }

    // Reference quantiles frozen from scipy.stats.chi2.ppf.
    #[test]
    fn chi_square_reference_quantiles() {
        let cases = [
            (0.5, 10.0, 9.34181776559197),
            (0.5, 13.978, 13.317283970236563),
            (0.01, 10.0, 2.5582121601872063),
            (0.999, 13.978, 36.0884166758945),
            (1e-6, 10.0, 0.3381260032429545),
            (0.9, 1.0, 2.705543454095404),
            (0.3, 0.5, 0.010982604948550948),
        ];
        for (u, df, expected) in cases {
            let x = chi_square_quantile(u, df).unwrap();
            assert!(
                (x - expected).abs() <= 1e-8 * expected.max(1.0),
                "u={u} df={df}: {x} vs {expected}"
            );
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(Distribution::uniform(1.0, 1.0).is_err());
        assert!(Distribution::discrete_uniform(3, 1).is_err());
        assert!(Distribution::chi_square(0.0).is_err());
        assert!(matches!(
            chi_square_quantile(1.0, 3.0),
            Err(Error::NonConvergence { .. })
        ));
    }
}
