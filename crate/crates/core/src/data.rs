use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::{Result, Scalar, ScreenError};

/// `n` observations of one response and `p` covariates.
///
/// Column 0 of [`values`](Self::values) is the response; covariate `j`
/// (0-based) lives in column `j + 1`. Labels follow the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<F> {
    values: Array2<F>,
    labels: Vec<String>,
}

impl<F: Scalar> DataMatrix<F> {
    /// Builds a matrix from joint values `[response | covariates]`.
    pub fn new(values: Array2<F>, labels: Vec<String>) -> Result<Self> {
        if values.ncols() < 2 {
            return Err(ScreenError::Domain(format!(
                "need a response and at least one covariate, got {} column(s)",
                values.ncols()
            )));
        }
        if labels.len() != values.ncols() {
            return Err(ScreenError::Domain(format!(
                "{} labels for {} columns",
                labels.len(),
                values.ncols()
            )));
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| v.is_nan()) {
            return Err(ScreenError::Domain(format!(
                "NaN at row {row}, column `{}`",
                labels[col]
            )));
        }
        Ok(Self { values, labels })
    }

    /// Labels default to `Y, X1, …, Xp`.
    pub fn from_parts(response: Array1<F>, covariates: Array2<F>) -> Result<Self> {
        if response.len() != covariates.nrows() {
            return Err(ScreenError::Domain(format!(
                "response has {} rows, covariates {}",
                response.len(),
                covariates.nrows()
            )));
        }
        let p = covariates.ncols();
        let mut values = Array2::<F>::zeros((response.len(), p + 1));
        values.column_mut(0).assign(&response);
        values.slice_mut(ndarray::s![.., 1..]).assign(&covariates);
        Self::new(values, default_labels(p))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of covariates.
    pub fn p(&self) -> usize {
        self.values.ncols() - 1
    }

    pub fn values(&self) -> ArrayView2<'_, F> {
        self.values.view()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn response(&self) -> ArrayView1<'_, F> {
        self.values.column(0)
    }

    pub fn response_label(&self) -> &str {
        &self.labels[0]
    }

    pub fn covariate(&self, j: usize) -> ArrayView1<'_, F> {
        self.values.column(j + 1)
    }

    pub fn covariate_label(&self, j: usize) -> &str {
        &self.labels[j + 1]
    }

    pub fn covariate_labels(&self) -> &[String] {
        &self.labels[1..]
    }

    /// Keeps the response and the listed covariates, in the order given.
    pub fn select_covariates(&self, keep: &[usize]) -> Self {
        let mut cols = Vec::with_capacity(keep.len() + 1);
        cols.push(0);
        cols.extend(keep.iter().map(|j| j + 1));
        let values = self.values.select(Axis(1), &cols);
        let labels = cols.iter().map(|&c| self.labels[c].clone()).collect();
        Self { values, labels }
    }

    /// Rows in the order given; repeats allowed.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            values: self.values.select(Axis(0), rows),
            labels: self.labels.clone(),
        }
    }

    /// Applies `g` element-wise to joint column `col` (0 = response).
    pub fn map_column(&self, col: usize, g: impl Fn(F) -> F) -> Result<Self> {
        let mut values = self.values.clone();
        values.column_mut(col).mapv_inplace(g);
        Self::new(values, self.labels.clone())
    }

    pub fn into_values(self) -> Array2<F> {
        self.values
    }
}

pub(crate) fn default_labels(p: usize) -> Vec<String> {
    std::iter::once("Y".to_string())
        .chain((1..=p).map(|j| format!("X{j}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn layout_and_labels() {
        let d = DataMatrix::from_parts(array![1.0, 2.0], array![[3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.p(), 2);
        assert_eq!(d.covariate(1).to_vec(), vec![4.0, 6.0]);
        assert_eq!(d.labels(), &["Y", "X1", "X2"]);
        let s = d.select_covariates(&[1]);
        assert_eq!(s.labels(), &["Y", "X2"]);
        assert_eq!(s.covariate(0).to_vec(), vec![4.0, 6.0]);
    }

    #[test]
    fn rejects_nan() {
        let err = DataMatrix::from_parts(array![1.0, f64::NAN], array![[3.0], [5.0]]).unwrap_err();
        assert!(matches!(err, ScreenError::Domain(_)));
    }
}
