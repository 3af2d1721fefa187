//! Kendall's tau, the sine-transformed rank correlation matrix, Pearson
//! correlation and positive-definite repair of small blocks.
//!
//! Kendall's tau is accumulated as the integer `C − D` (concordant minus
//! discordant pairs; pairs tied in either coordinate count zero) and only
//! then divided by `n(n − 1)/2`. The pairwise scan and the merge-sort
//! algorithm therefore agree bit for bit, ties included.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::linalg::symmetric_eigen;
use crate::{Result, Scalar, ScreenError};

/// Below this many observations the quadratic pairwise scan is used.
const PAIRWISE_MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KendallAlgorithm {
    /// `n ≤ 64` → pairwise, otherwise merge sort.
    Auto,
    Pairwise,
    MergeSort,
}

#[inline]
fn cmp<F: Scalar>(a: F, b: F) -> Ordering {
    a.partial_cmp(&b).expect("NaN rejected before comparison")
}

fn check_pair<F: Scalar>(x: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> Result<()> {
    if x.len() != y.len() {
        return Err(ScreenError::Domain(format!(
            "Kendall's tau needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(ScreenError::Domain(format!(
            "Kendall's tau needs at least 2 observations, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y.iter()).any(|v| v.is_nan()) {
        return Err(ScreenError::Domain("NaN in Kendall's tau input".into()));
    }
    Ok(())
}

fn pair_count(n: usize) -> i64 {
    (n as i64) * (n as i64 - 1) / 2
}

fn sign_of(o: Ordering) -> i64 {
    match o {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// `Σ_{i<i'} sign(x_i − x_i') · sign(y_i − y_i')` by direct enumeration.
pub fn concordance_pairwise<F: Scalar>(x: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> i64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        let (xi, yi) = (x[i], y[i]);
        for j in (i + 1)..n {
            s += sign_of(cmp(xi, x[j])) * sign_of(cmp(yi, y[j]));
        }
    }
    s
}

/// Same statistic in `O(n log n)` (Knight's algorithm).
pub fn concordance_merge_sort<F: Scalar>(x: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> i64 {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| cmp(x[a], x[b]).then_with(|| cmp(y[a], y[b])));

    let mut tied_x = 0i64;
    let mut tied_xy = 0i64;
    let mut run_x = 1i64;
    let mut run_xy = 1i64;
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                tied_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            tied_x += run_x * (run_x - 1) / 2;
            tied_xy += run_xy * (run_xy - 1) / 2;
            run_x = 1;
            run_xy = 1;
        }
    }
    tied_x += run_x * (run_x - 1) / 2;
    tied_xy += run_xy * (run_xy - 1) / 2;

    let mut ys: Vec<F> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = ys.clone();
    let discordant = count_inversions(&mut ys, &mut buf);

    let mut tied_y = 0i64;
    let mut run_y = 1i64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            tied_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    tied_y += run_y * (run_y - 1) / 2;

    pair_count(n) - tied_x - tied_y + tied_xy - 2 * discordant
}

/// Bottom-up merge sort of `v` returning the number of strict inversions.
fn count_inversions<F: Scalar>(v: &mut [F], buf: &mut [F]) -> i64 {
    let n = v.len();
    let mut swaps = 0i64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    swaps += (mid - i) as i64;
                    buf[k] = v[j];
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + (hi - j)].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        v.copy_from_slice(buf);
        width *= 2;
    }
    swaps
}

fn tau_from_concordance<F: Scalar>(s: i64, n: usize) -> F {
    F::lit(s as f64) / F::lit(pair_count(n) as f64)
}

fn concordance<F: Scalar>(
    x: ArrayView1<'_, F>,
    y: ArrayView1<'_, F>,
    alg: KendallAlgorithm,
) -> i64 {
    match alg {
        KendallAlgorithm::Pairwise => concordance_pairwise(x, y),
        KendallAlgorithm::MergeSort => concordance_merge_sort(x, y),
        KendallAlgorithm::Auto if x.len() <= PAIRWISE_MAX_N => concordance_pairwise(x, y),
        KendallAlgorithm::Auto => concordance_merge_sort(x, y),
    }
}

/// Sample Kendall's tau (tau-a): `2/(n(n−1)) Σ_{i<i'} sign((x_i−x_i')(y_i−y_i'))`.
pub fn kendall_tau<F: Scalar>(x: &[F], y: &[F]) -> Result<F> {
    kendall_tau_with(
        ArrayView1::from(x),
        ArrayView1::from(y),
        KendallAlgorithm::Auto,
    )
}

pub fn kendall_tau_with<F: Scalar>(
    x: ArrayView1<'_, F>,
    y: ArrayView1<'_, F>,
    alg: KendallAlgorithm,
) -> Result<F> {
    check_pair(x, y)?;
    Ok(tau_from_concordance(concordance(x, y, alg), x.len()))
}

/// Pairwise Kendall's tau over the columns of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KendallTauMatrix<F> {
    pub values: Array2<F>,
    /// Columns with a single distinct value; their off-diagonal tau is 0.
    pub constant_columns: Vec<usize>,
}

impl<F: Scalar> KendallTauMatrix<F> {
    pub fn warnings(&self) -> Vec<String> {
        self.constant_columns
            .iter()
            .map(|c| {
                format!("column {c} is constant; its Kendall's tau with every other column is 0")
            })
            .collect()
    }
}

pub fn kendall_tau_matrix<F: Scalar>(data: ArrayView2<'_, F>) -> Result<KendallTauMatrix<F>> {
    kendall_tau_matrix_with(data, KendallAlgorithm::Auto)
}

pub fn kendall_tau_matrix_with<F: Scalar>(
    data: ArrayView2<'_, F>,
    alg: KendallAlgorithm,
) -> Result<KendallTauMatrix<F>> {
    let (n, d) = data.dim();
    if n < 2 {
        return Err(ScreenError::Domain(format!(
            "Kendall's tau matrix needs at least 2 rows, got {n}"
        )));
    }
    if data.iter().any(|v| v.is_nan()) {
        return Err(ScreenError::Domain("NaN in Kendall's tau input".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    let taus: Vec<F> = pairs
        .par_iter()
        .map(|&(j, k)| tau_from_concordance(concordance(data.column(j), data.column(k), alg), n))
        .collect();
    let mut values = Array2::<F>::eye(d);
    for (&(j, k), &t) in pairs.iter().zip(&taus) {
        values[[j, k]] = t;
        values[[k, j]] = t;
    }
    Ok(KendallTauMatrix {
        values,
        constant_columns: constant_columns(data),
    })
}

fn constant_columns<F: Scalar>(data: ArrayView2<'_, F>) -> Vec<usize> {
    data.columns()
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.iter().all(|&v| v == c[0]))
        .map(|(j, _)| j)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    KendallSine,
    Pearson,
}

/// Symmetric correlation estimate with unit diagonal and entries in `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate<F> {
    entries: Array2<F>,
    kind: CorrelationKind,
    warnings: Vec<String>,
}

impl<F: Scalar> CorrelationEstimate<F> {
    /// Validates and wraps an existing matrix.
    pub fn from_matrix(entries: Array2<F>, kind: CorrelationKind) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || entries.ncols() != d {
            return Err(ScreenError::Domain(
                "correlation matrix must be square and non-empty".into(),
            ));
        }
        for i in 0..d {
            if entries[[i, i]] != F::one() {
                return Err(ScreenError::Domain(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                let v = entries[[i, j]];
                if v != entries[[j, i]] {
                    return Err(ScreenError::Domain(format!("not symmetric at ({i}, {j})")));
                }
                if !(v.abs() <= F::one()) {
                    return Err(ScreenError::Domain(format!(
                        "entry ({i}, {j}) = {v} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            kind,
            warnings: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<F> {
        &self.entries
    }

    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.entries[[i, j]]
    }
}

/// `Ŝ_{jk} = sin(π/2 · τ̂_{jk})`, diagonal exactly 1.
pub fn sine_transform<F: Scalar>(tau: &KendallTauMatrix<F>) -> CorrelationEstimate<F> {
    let half_pi = F::FRAC_PI_2();
    let mut entries = tau
        .values
        .mapv(|t| (half_pi * t).sin().max(-F::one()).min(F::one()));
    entries.diag_mut().fill(F::one());
    CorrelationEstimate {
        entries,
        kind: CorrelationKind::KendallSine,
        warnings: tau.warnings(),
    }
}

/// Sample Pearson correlation of every column pair.
pub fn pearson_matrix<F: Scalar>(data: ArrayView2<'_, F>) -> Result<CorrelationEstimate<F>> {
    let (n, d) = data.dim();
    if n < 2 {
        return Err(ScreenError::Domain(format!(
            "Pearson correlation needs at least 2 rows, got {n}"
        )));
    }
    let centered = centered_columns(data)?;
    let norms: Vec<F> = centered
        .iter()
        .map(|c| c.iter().map(|&v| v * v).sum::<F>().sqrt())
        .collect();
    let mut entries = Array2::<F>::eye(d);
    for j in 0..d {
        for k in (j + 1)..d {
            let dot: F = centered[j]
                .iter()
                .zip(&centered[k])
                .map(|(&a, &b)| a * b)
                .sum();
            let r = (dot / (norms[j] * norms[k])).max(-F::one()).min(F::one());
            entries[[j, k]] = r;
            entries[[k, j]] = r;
        }
    }
    Ok(CorrelationEstimate {
        entries,
        kind: CorrelationKind::Pearson,
        warnings: Vec::new(),
    })
}

/// Pearson correlation between two columns; errors as [`pearson_matrix`].
pub fn pearson<F: Scalar>(x: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> Result<F> {
    let mut m = Array2::<F>::zeros((x.len(), 2));
    m.column_mut(0).assign(&x);
    m.column_mut(1).assign(&y);
    Ok(pearson_matrix(m.view())?.get(0, 1))
}

fn centered_columns<F: Scalar>(data: ArrayView2<'_, F>) -> Result<Vec<Vec<F>>> {
    let n = F::lit(data.nrows() as f64);
    data.columns()
        .into_iter()
        .enumerate()
        .map(|(j, col)| {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(ScreenError::Domain(format!(
                    "column {j} has non-finite values; Pearson correlation is undefined"
                )));
            }
            let mean = col.iter().copied().sum::<F>() / n;
            let c: Vec<F> = col.iter().map(|&v| v - mean).collect();
            if col.iter().all(|&v| v == col[0]) || c.iter().all(|&v| v == F::zero()) {
                return Err(ScreenError::ConstantColumn {
                    index: j,
                    label: format!("column {j}"),
                });
            }
            Ok(c)
        })
        .collect()
}

/// Clamps negative eigenvalues of a symmetric matrix to zero and, if the
/// smallest resulting eigenvalue is below `ridge`, adds `ridge · I`.
///
/// A matrix that needs neither step is returned as-is.
pub fn psd_project<F: Scalar>(s: ArrayView2<'_, F>, ridge: F) -> Result<Array2<F>> {
    if s.nrows() != s.ncols() {
        return Err(ScreenError::Domain(
            "psd_project needs a square matrix".into(),
        ));
    }
    if ridge < F::zero() || !ridge.is_finite() {
        return Err(ScreenError::Config(format!(
            "ridge must be a nonnegative finite number, got {ridge}"
        )));
    }
    let eig = symmetric_eigen(s).ok_or_else(|| {
        ScreenError::Numeric(format!(
            "eigendecomposition of {0}x{0} block failed",
            s.nrows()
        ))
    })?;
    let min = eig.min_value();
    if min >= ridge && min > F::zero() {
        return Ok(s.to_owned());
    }
    let mut values: Vec<F> = eig.values.iter().map(|&v| v.max(F::zero())).collect();
    if values.iter().copied().fold(F::infinity(), F::min) < ridge {
        values.iter_mut().for_each(|v| *v = *v + ridge);
    }
    Ok(eig.reconstruct_with(&values))
}
