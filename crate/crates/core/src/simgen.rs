//! Data generators for the five simulation models.
//!
//! | model | covariates                      | response                                   | support   |
//! |-------|---------------------------------|--------------------------------------------|-----------|
//! | M1    | equicorrelated normal / t       | `0.9 + X1 − 0.5 X2 + ε`                    | {1,2}     |
//! | M2    | equicorrelated normal / t       | `5 X1 + 5 X2 + 5 X3 + ε`                   | {1,2,3}   |
//! | M3    | equicorrelated normal / t       | `exp(3 X1 + 1.5 X2 + 2 X3 + ε)`            | {1,2,3}   |
//! | M4    | `(W_j + tU)/(1 + t)`, uniform   | `5f1(X1) + 3f2(X2) + 4f3(X3) + 6f4(X4) + ε` | {1,2,3,4} |
//! | M5    | as M4                           | `exp(` M4 right-hand side `)`              | {1,2,3,4} |
//!
//! M4/M5 noise is normal with variance 1.74. Supports are reported 0-based.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::elliptical::{equicorrelation_matrix, EllipticalSampler, EllipticalSpec, Family};
use crate::rng::seeded;
use crate::{DataMatrix, Result, Scalar, ScreenError};

const ADDITIVE_NOISE_VARIANCE: f64 = 1.74;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimModel {
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl SimModel {
    pub fn is_linear_design(self) -> bool {
        matches!(self, SimModel::M1 | SimModel::M2 | SimModel::M3)
    }

    pub fn support_size(self) -> usize {
        match self {
            SimModel::M1 => 2,
            SimModel::M2 | SimModel::M3 => 3,
            SimModel::M4 | SimModel::M5 => 4,
        }
    }
}

impl fmt::Display for SimModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for SimModel {
    type Err = ScreenError;
    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_uppercase()
            .trim_start_matches("MODEL")
            .trim()
        {
            "M1" | "1" => Ok(SimModel::M1),
            "M2" | "2" => Ok(SimModel::M2),
            "M3" | "3" => Ok(SimModel::M3),
            "M4" | "4" => Ok(SimModel::M4),
            "M5" | "5" => Ok(SimModel::M5),
            _ => Err(ScreenError::Config(format!(
                "unknown model `{s}` (expected M1..M5)"
            ))),
        }
    }
}

/// Parameters of one simulation design.
///
/// `rho` and the two families apply to M1–M3 (families default to normal);
/// `t_mix` applies to M4–M5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimModelSpec {
    pub model: SimModel,
    pub p: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_mix: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov_family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_family: Option<Family>,
}

impl SimModelSpec {
    pub fn linear(
        model: SimModel,
        p: usize,
        n: usize,
        rho: f64,
        cov: Family,
        noise: Family,
    ) -> Self {
        Self {
            model,
            p,
            n,
            rho: Some(rho),
            t_mix: None,
            cov_family: Some(cov),
            noise_family: Some(noise),
        }
    }

    pub fn additive(model: SimModel, p: usize, n: usize, t_mix: f64) -> Self {
        Self {
            model,
            p,
            n,
            rho: None,
            t_mix: Some(t_mix),
            cov_family: None,
            noise_family: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = self.model.support_size();
        if self.p < need {
            return Err(ScreenError::Config(format!(
                "{} needs p >= {need}, got p = {}",
                self.model, self.p
            )));
        }
        if self.n < 2 {
            return Err(ScreenError::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.model.is_linear_design() {
            if self.t_mix.is_some() {
                return Err(ScreenError::Config(format!(
                    "t_mix does not apply to {}",
                    self.model
                )));
            }
            let rho = self
                .rho
                .ok_or_else(|| ScreenError::Config(format!("{} needs rho", self.model)))?;
            equicorrelation_matrix::<f64>(self.p, rho)?;
            for fam in [self.cov_family, self.noise_family].into_iter().flatten() {
                if let Family::StudentT { dof } = fam {
                    Family::student_t(dof)?;
                }
            }
        } else {
            if self.rho.is_some() || self.cov_family.is_some() || self.noise_family.is_some() {
                return Err(ScreenError::Config(format!(
                    "rho, cov_family and noise_family do not apply to {}",
                    self.model
                )));
            }
            let t = self
                .t_mix
                .ok_or_else(|| ScreenError::Config(format!("{} needs t_mix", self.model)))?;
            if !(t >= 0.0) || !t.is_finite() {
                return Err(ScreenError::Config(format!(
                    "t_mix must be nonnegative, got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn covariate_family(&self) -> Family {
        self.cov_family.unwrap_or(Family::Normal)
    }

    pub fn noise_family(&self) -> Family {
        self.noise_family.unwrap_or(Family::Normal)
    }

    /// 0-based indices of the nonzero coefficients.
    pub fn true_support(&self) -> BTreeSet<usize> {
        (0..self.model.support_size()).collect()
    }
}

/// A generated data set and its true support (0-based covariate indices).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<F> {
    pub data: DataMatrix<F>,
    pub true_support: BTreeSet<usize>,
}

/// Validated spec plus the cached covariate sampler.
#[derive(Debug, Clone)]
pub struct ModelGenerator {
    spec: SimModelSpec,
    sampler: Option<EllipticalSampler<f64>>,
}

impl ModelGenerator {
    pub fn new(spec: SimModelSpec) -> Result<Self> {
        spec.validate()?;
        let sampler = if spec.model.is_linear_design() {
            let scatter = equicorrelation_matrix::<f64>(spec.p, spec.rho.expect("validated"))?;
            let es = EllipticalSpec {
                family: spec.covariate_family(),
                scatter,
            };
            Some(EllipticalSampler::new(&es)?)
        } else {
            None
        };
        Ok(Self { spec, sampler })
    }

    pub fn spec(&self) -> &SimModelSpec {
        &self.spec
    }

    pub fn generate<F: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LabeledSample<F>> {
        let (x, y) = match self.spec.model {
            SimModel::M1 | SimModel::M2 | SimModel::M3 => self.linear(rng),
            SimModel::M4 | SimModel::M5 => self.additive(rng),
        };
        let x = x.mapv(F::lit);
        let y = y.mapv(F::lit);
        if y.iter().any(|v| v.is_nan()) {
            return Err(ScreenError::Numeric(format!(
                "{} response produced NaN",
                self.spec.model
            )));
        }
        Ok(LabeledSample {
            data: DataMatrix::from_parts(y, x)?,
            true_support: self.spec.true_support(),
        })
    }

    fn linear<R: Rng + ?Sized>(&self, rng: &mut R) -> (Array2<f64>, Array1<f64>) {
        let n = self.spec.n;
        let x = self
            .sampler
            .as_ref()
            .expect("linear design has a sampler")
            .sample(n, rng);
        let noise = self.spec.noise_family();
        let (intercept, beta): (f64, &[f64]) = match self.spec.model {
            SimModel::M1 => (0.9, &[1.0, -0.5]),
            SimModel::M2 => (0.0, &[5.0, 5.0, 5.0]),
            _ => (0.0, &[3.0, 1.5, 2.0]),
        };
        let y = Array1::from_iter(x.rows().into_iter().map(|row| {
            let lin: f64 = intercept + beta.iter().zip(row.iter()).map(|(b, v)| b * v).sum::<f64>();
            let v = lin + noise.sample_scalar(rng);
            if self.spec.model == SimModel::M3 {
                v.exp()
            } else {
                v
            }
        }));
        (x, y)
    }

    fn additive<R: Rng + ?Sized>(&self, rng: &mut R) -> (Array2<f64>, Array1<f64>) {
        let (n, p) = (self.spec.n, self.spec.p);
        let t = self.spec.t_mix.expect("validated");
        let noise = Normal::new(0.0, ADDITIVE_NOISE_VARIANCE.sqrt()).expect("positive sd");
        let mut x = Array2::<f64>::zeros((n, p));
        let mut y = Array1::<f64>::zeros(n);
        for i in 0..n {
            let u: f64 = rng.random();
            for j in 0..p {
                let w: f64 = rng.random();
                x[[i, j]] = (w + t * u) / (1.0 + t);
            }
            let eps: f64 = noise.sample(rng);
            let v = additive_signal(x[[i, 0]], x[[i, 1]], x[[i, 2]], x[[i, 3]]) + eps;
            y[i] = if self.spec.model == SimModel::M5 {
                v.exp()
            } else {
                v
            };
        }
        (x, y)
    }
}

/// `5 f1(x1) + 3 f2(x2) + 4 f3(x3) + 6 f4(x4)`.
pub fn additive_signal(x1: f64, x2: f64, x3: f64, x4: f64) -> f64 {
    5.0 * f1(x1) + 3.0 * f2(x2) + 4.0 * f3(x3) + 6.0 * f4(x4)
}

fn f1(x: f64) -> f64 {
    x
}

fn f2(x: f64) -> f64 {
    (2.0 * x - 1.0).powi(2)
}

fn f3(x: f64) -> f64 {
    let s = (2.0 * PI * x).sin();
    s / (2.0 - s)
}

fn f4(x: f64) -> f64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c.powi(3) + 0.5 * s.powi(3)
}

/// Validates `spec` and draws one sample from `rng`.
pub fn generate<F: Scalar, R: Rng + ?Sized>(
    spec: &SimModelSpec,
    rng: &mut R,
) -> Result<LabeledSample<F>> {
    ModelGenerator::new(spec.clone())?.generate(rng)
}

pub fn generate_seeded<F: Scalar>(spec: &SimModelSpec, seed: u64) -> Result<LabeledSample<F>> {
    generate(spec, &mut seeded(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_sets() {
        let s = SimModelSpec::linear(SimModel::M1, 10, 20, 0.0, Family::Normal, Family::Normal);
        assert_eq!(s.true_support(), [0, 1].into());
        let s = SimModelSpec::linear(SimModel::M3, 10, 20, 0.0, Family::Normal, Family::Normal);
        assert_eq!(s.true_support(), [0, 1, 2].into());
        assert_eq!(
            SimModelSpec::additive(SimModel::M5, 10, 20, 0.5).true_support(),
            [0, 1, 2, 3].into()
        );
    }

    #[test]
    fn applicability_checks() {
        let mut s = SimModelSpec::linear(SimModel::M2, 10, 20, 0.1, Family::Normal, Family::Normal);
        s.t_mix = Some(0.5);
        assert!(s.validate().unwrap_err().is_config());
        let mut s = SimModelSpec::additive(SimModel::M4, 10, 20, 0.0);
        s.rho = Some(0.5);
        assert!(s.validate().is_err());
        let s = SimModelSpec::linear(SimModel::M1, 10, 20, 1.2, Family::Normal, Family::Normal);
        assert!(s.validate().is_err());
        let s = SimModelSpec::additive(SimModel::M4, 3, 20, 0.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn exponentiated_models_are_positive() {
        for spec in [
            SimModelSpec::linear(
                SimModel::M3,
                20,
                200,
                0.5,
                Family::StudentT { dof: 3.0 },
                Family::StudentT { dof: 3.0 },
            ),
            SimModelSpec::additive(SimModel::M5, 20, 200, 1.0),
        ] {
            let s: LabeledSample<f64> = generate_seeded(&spec, 5).unwrap();
            assert!(s.data.response().iter().all(|&y| y > 0.0));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SimModelSpec::linear(
            SimModel::M2,
            30,
            25,
            0.5,
            Family::StudentT { dof: 1.0 },
            Family::Normal,
        );
        let a: LabeledSample<f64> = generate_seeded(&spec, 99).unwrap();
        let b: LabeledSample<f64> = generate_seeded(&spec, 99).unwrap();
        let c: LabeledSample<f64> = generate_seeded(&spec, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = SimModelSpec::linear(
            SimModel::M3,
            100,
            50,
            0.1,
            Family::Normal,
            Family::StudentT { dof: 3.0 },
        );
        let text = toml::to_string(&spec).unwrap();
        assert!(text.contains("noise_family = \"t3\""), "{text}");
        let back: SimModelSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn f4_at_zero() {
        // sin = 0, cos = 1
        assert!((f4(0.0) - 0.6).abs() < 1e-15);
        assert!((f3(0.25) - 1.0).abs() < 1e-15);
        assert_eq!(f2(0.5), 0.0);
    }
}
