//! Multivariate normal and multivariate t sampling with a unit-diagonal
//! scatter matrix.
//!
//! Normal rows are `L z` with `L` the Cholesky factor of the scatter and
//! `z` standard normal. Student-t rows divide one such draw by
//! `sqrt(w / ν)`, `w ~ χ²(ν)`, sharing the mixing variable across the row.
//! Location is always zero.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::cholesky;
use crate::{Result, Scalar, ScreenError};

/// Symmetric, unit-diagonal, positive-definite scatter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMatrix<F> {
    entries: Array2<F>,
}

impl<F: Scalar> ScatterMatrix<F> {
    /// Validates symmetry (exact) and the unit diagonal. Positive
    /// definiteness is checked when a sampler is built.
    pub fn from_matrix(entries: Array2<F>) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || entries.ncols() != d {
            return Err(ScreenError::Config(format!(
                "scatter matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..d {
            if entries[[i, i]] != F::one() {
                return Err(ScreenError::Config(format!(
                    "scatter diagonal entry {i} is {}, expected 1",
                    entries[[i, i]]
                )));
            }
            for j in 0..i {
                if entries[[i, j]] != entries[[j, i]] {
                    return Err(ScreenError::Config(format!(
                        "scatter matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<F> {
        &self.entries
    }
}

/// `p × p` matrix with unit diagonal and `rho` elsewhere.
///
/// Its eigenvalues are `1 + (p − 1)ρ` and `1 − ρ`, so it is positive
/// definite exactly when `−1/(p − 1) < ρ < 1`.
pub fn equicorrelation_matrix<F: Scalar>(p: usize, rho: f64) -> Result<ScatterMatrix<F>> {
    if p == 0 {
        return Err(ScreenError::Config(
            "equicorrelation dimension must be positive".into(),
        ));
    }
    let lower = if p > 1 {
        -1.0 / (p as f64 - 1.0)
    } else {
        f64::NEG_INFINITY
    };
    if !(rho > lower && rho < 1.0) {
        return Err(ScreenError::Config(format!(
            "rho = {rho} gives a non positive-definite {p}x{p} equicorrelation matrix; valid interval is ({lower}, 1)"
        )));
    }
    let mut m = Array2::from_elem((p, p), F::lit(rho));
    m.diag_mut().fill(F::one());
    Ok(ScatterMatrix { entries: m })
}

/// Radial law of an elliptical distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    Normal,
    StudentT { dof: f64 },
}

impl Family {
    pub fn student_t(dof: f64) -> Result<Self> {
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(ScreenError::Config(format!(
                "Student-t degrees of freedom must be positive, got {dof}"
            )));
        }
        Ok(Family::StudentT { dof })
    }

    /// Draws one scalar from the univariate member of the family.
    pub fn sample_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        match *self {
            Family::Normal => z,
            Family::StudentT { dof } => z / mixing_scale(dof, rng),
        }
    }
}

fn mixing_scale<R: Rng + ?Sized>(dof: f64, rng: &mut R) -> f64 {
    let chi = ChiSquared::new(dof).expect("validated dof");
    let w: f64 = chi.sample(rng);
    (w / dof).sqrt()
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Normal => f.write_str("normal"),
            Family::StudentT { dof } => write!(f, "t{dof}"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = ScreenError;

    /// Accepts `normal`, `t3`, `t(3)`, `student_t(3)` and the like.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "normal" || t == "gaussian" {
            return Ok(Family::Normal);
        }
        let rest = t
            .strip_prefix("student_t")
            .or_else(|| t.strip_prefix('t'))
            .ok_or_else(|| ScreenError::Config(format!("unknown family `{s}`")))?;
        let rest = rest
            .trim_start_matches(['(', ':', '='])
            .trim_end_matches(')');
        let dof: f64 = rest
            .parse()
            .map_err(|_| ScreenError::Config(format!("unknown family `{s}`")))?;
        Family::student_t(dof)
    }
}

impl TryFrom<String> for Family {
    type Error = ScreenError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticalSpec<F> {
    pub family: Family,
    pub scatter: ScatterMatrix<F>,
}

impl<F: Scalar> EllipticalSpec<F> {
    pub fn normal(scatter: ScatterMatrix<F>) -> Self {
        Self {
            family: Family::Normal,
            scatter,
        }
    }

    pub fn student_t(dof: f64, scatter: ScatterMatrix<F>) -> Result<Self> {
        Ok(Self {
            family: Family::student_t(dof)?,
            scatter,
        })
    }
}

/// Sampler holding the Cholesky factor so repeated draws skip the
/// factorisation.
#[derive(Debug, Clone)]
pub struct EllipticalSampler<F> {
    family: Family,
    factor: Array2<F>,
    lower_band: usize,
}

impl<F: Scalar> EllipticalSampler<F> {
    pub fn new(spec: &EllipticalSpec<F>) -> Result<Self> {
        if let Family::StudentT { dof } = spec.family {
            Family::student_t(dof)?;
        }
        let factor = cholesky(spec.scatter.entries().view()).ok_or_else(|| {
            ScreenError::Numeric(format!(
                "Cholesky factorisation failed: {d}x{d} scatter matrix is not positive definite",
                d = spec.scatter.dim()
            ))
        })?;
        let lower_band = lower_bandwidth(&factor);
        Ok(Self {
            family: spec.family,
            factor,
            lower_band,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// `n × dim` matrix of i.i.d. rows.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Array2<F> {
        let d = self.dim();
        let mut out = Array2::<F>::zeros((n, d));
        let mut z = vec![F::zero(); d];
        let lower_band = self.lower_band;
        for mut row in out.rows_mut() {
            for zi in z.iter_mut() {
                let v: f64 = StandardNormal.sample(rng);
                *zi = F::lit(v);
            }
            let scale = match self.family {
                Family::Normal => F::one(),
                Family::StudentT { dof } => F::one() / F::lit(mixing_scale(dof, rng)),
            };
            for i in 0..d {
                let start = i.saturating_sub(lower_band);
                let s = (start..=i).fold(F::zero(), |s, k| s + self.factor[[i, k]] * z[k]);
                row[i] = s * scale;
            }
        }
        out
    }
}

// Identity scatter gives a diagonal factor; skipping the zero band keeps
// large independent designs linear in the dimension.
fn lower_bandwidth<F: Scalar>(factor: &Array2<F>) -> usize {
    let d = factor.nrows();
    (1..d)
        .rev()
        .find(|&b| (b..d).any(|i| factor[[i, i - b]] != F::zero()))
        .unwrap_or(0)
}

/// One-shot sampling; see [`EllipticalSampler`] to reuse the factorisation.
pub fn sample_elliptical<F: Scalar, R: Rng + ?Sized>(
    spec: &EllipticalSpec<F>,
    n: usize,
    rng: &mut R,
) -> Result<Array2<F>> {
    if n == 0 {
        return Err(ScreenError::Config("sample size must be at least 1".into()));
    }
    Ok(EllipticalSampler::new(spec)?.sample(n, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use ndarray::array;

    #[test]
    fn equicorrelation_identity_and_two_by_two() {
        let m: ScatterMatrix<f64> = equicorrelation_matrix(3, 0.0).unwrap();
        assert_eq!(m.entries(), &Array2::<f64>::eye(3));
        let m: ScatterMatrix<f64> = equicorrelation_matrix(2, 0.5).unwrap();
        assert_eq!(m.entries(), &array![[1.0, 0.5], [0.5, 1.0]]);
    }

    #[test]
    fn equicorrelation_smallest_eigenvalue() {
        let m: ScatterMatrix<f64> = equicorrelation_matrix(4, 0.9).unwrap();
        let e = crate::linalg::symmetric_eigen(m.entries().view()).unwrap();
        assert!((e.min_value() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn equicorrelation_rejects_out_of_range() {
        let err = equicorrelation_matrix::<f64>(5, -0.25).unwrap_err();
        assert!(err.to_string().contains("(-0.25, 1)"), "{err}");
        assert!(equicorrelation_matrix::<f64>(5, 1.0).is_err());
        assert!(equicorrelation_matrix::<f64>(5, -0.24).is_ok());
    }

    #[test]
    fn scatter_validation() {
        assert!(ScatterMatrix::from_matrix(array![[1.0, 0.2], [0.3, 1.0]]).is_err());
        assert!(ScatterMatrix::from_matrix(array![[2.0, 0.2], [0.2, 1.0]]).is_err());
        assert!(ScatterMatrix::from_matrix(array![[1.0, 0.2], [0.2, 1.0]]).is_ok());
    }

    #[test]
    fn non_pd_scatter_is_numeric_error() {
        let s = ScatterMatrix::from_matrix(array![[1.0, 1.2], [1.2, 1.0]]).unwrap();
        let err = sample_elliptical(&EllipticalSpec::normal(s), 5, &mut seeded(1)).unwrap_err();
        assert!(matches!(err, ScreenError::Numeric(_)));
    }

    #[test]
    fn family_parsing() {
        assert_eq!("normal".parse::<Family>().unwrap(), Family::Normal);
        assert_eq!(
            "t1".parse::<Family>().unwrap(),
            Family::StudentT { dof: 1.0 }
        );
        assert_eq!(
            "t(3)".parse::<Family>().unwrap(),
            Family::StudentT { dof: 3.0 }
        );
        assert_eq!(
            "student_t(2.5)".parse::<Family>().unwrap(),
            Family::StudentT { dof: 2.5 }
        );
        assert!("t0".parse::<Family>().is_err());
        assert!("cauchy".parse::<Family>().is_err());
    }

    #[test]
    fn same_seed_same_sample() {
        let spec =
            EllipticalSpec::student_t(3.0, equicorrelation_matrix::<f64>(5, 0.3).unwrap()).unwrap();
        let a = sample_elliptical(&spec, 50, &mut seeded(11)).unwrap();
        let b = sample_elliptical(&spec, 50, &mut seeded(11)).unwrap();
        assert_eq!(a, b);
    }
}
