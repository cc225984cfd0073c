use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue convention for `(-Delta)^m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianVariant {
    /// `k1^(2m) + k2^(2m)`
    #[default]
    Split,
    /// `(k1^2 + k2^2)^m`
    Euclidean,
}

impl LaplacianVariant {
    pub fn eigenvalue(self, k1: i32, k2: i32, m: f64) -> f64 {
        match self {
            LaplacianVariant::Split => int_pow(k1.abs(), 2.0 * m) + int_pow(k2.abs(), 2.0 * m),
            LaplacianVariant::Euclidean => {
                let r2 = (k1 as f64).powi(2) + (k2 as f64).powi(2);
                if m.fract() == 0.0 {
                    r2.powi(m as i32)
                } else {
                    r2.powf(m)
                }
            }
        }
    }
}

impl std::str::FromStr for LaplacianVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "split" => Ok(LaplacianVariant::Split),
            "euclidean" => Ok(LaplacianVariant::Euclidean),
            other => Err(Error::InvalidParams(format!(
                "unknown Laplacian variant {other:?}"
            ))),
        }
    }
}

/// `k^p` for a nonnegative integer base, exact when `p` is integral.
pub(crate) fn int_pow(k: i32, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
        (k as f64).powi(p as i32)
    } else {
        (k as f64).powf(p)
    }
}

/// Truncation radius, regularization order, forcing amplitude and eigenvalue convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: f64,
    pub lambda: f64,
    #[serde(default)]
    pub variant: LaplacianVariant,
}

impl GridParams {
    pub fn new(n: usize, m: f64, lambda: f64) -> Result<Self> {
        let p = GridParams {
            n,
            m,
            lambda,
            variant: LaplacianVariant::Split,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(self.m >= 1.0) || !self.m.is_finite() {
            return Err(Error::InvalidParams(format!(
                "m must be >= 1 (got {})",
                self.m
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParams(format!(
                "lambda must be >= 0 (got {})",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_variant(mut self, variant: LaplacianVariant) -> Self {
        self.variant = variant;
        self
    }

    /// Eigenvalue of `(-Delta)^m` at mode `(k1, k2)`.
    pub fn laplacian(&self, k1: i32, k2: i32) -> f64 {
        self.variant.eigenvalue(k1, k2, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(GridParams::new(0, 2.0, 1.0).is_err());
        assert!(GridParams::new(4, 0.5, 1.0).is_err());
        assert!(GridParams::new(4, 2.0, -1.0).is_err());
        assert!(GridParams::new(4, 2.0, f64::NAN).is_err());
        assert!(GridParams::new(1, 1.0, 0.0).is_ok());
    }

    #[test]
    fn eigenvalue_conventions() {
        let split = LaplacianVariant::Split;
        let euc = LaplacianVariant::Euclidean;
        assert_eq!(split.eigenvalue(1, 1, 6.0), 2.0);
        assert_eq!(euc.eigenvalue(1, 1, 6.0), 64.0);
        assert_eq!(split.eigenvalue(0, -3, 1.0), 9.0);
        assert_eq!(euc.eigenvalue(2, -3, 1.5), 13f64.powf(1.5));
        // Euclidean bounds Split from above
        for k1 in -4..=4 {
            for k2 in -4..=4 {
                assert!(euc.eigenvalue(k1, k2, 3.0) >= split.eigenvalue(k1, k2, 3.0));
            }
        }
    }
}
