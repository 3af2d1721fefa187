//! Monte Carlo runner for containment proportions, the grid CSV writer and
//! the variance pre-filter for real data.
//!
//! Replicate `r` of a cell draws its data from
//! [`substream`](crate::rng::substream)`(base_seed, r)`, so proportions do
//! not depend on the number of worker threads and any replicate can be
//! regenerated on its own.

mod config;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{parse_run_config, RunConfig};

use crate::rng::substream;
use crate::screening::{default_top_m, score_all, top_m_select, ActiveSet, ScreeningConfig};
use crate::simgen::{ModelGenerator, SimModelSpec};
use crate::{DataMatrix, Result, Scalar, ScreenError};

pub const GRID_CSV_HEADER: [&str; 15] = [
    "model",
    "p",
    "n",
    "rho",
    "t_mix",
    "cov_family",
    "noise_family",
    "method",
    "k",
    "k_n",
    "m",
    "reps",
    "proportion",
    "se",
    "seconds",
];

/// `truth ⊆ selected`.
pub fn containment(selected: &ActiveSet, truth: &BTreeSet<usize>) -> bool {
    truth.is_subset(&selected.members)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub label: String,
    pub config: ScreeningConfig,
}

impl MethodSpec {
    pub fn new(label: impl Into<String>, config: ScreeningConfig) -> Self {
        Self {
            label: label.into(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub spec: SimModelSpec,
    pub methods: Vec<MethodSpec>,
    pub replications: usize,
    /// Number of covariates kept per method; `None` means `⌊n / ln n⌋`.
    pub selection_m: Option<usize>,
    pub base_seed: u64,
}

impl ExperimentCell {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.replications == 0 {
            return Err(ScreenError::Config(
                "replications must be at least 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(ScreenError::Config("cell has no methods".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(m.label.as_str()) {
                return Err(ScreenError::Config(format!(
                    "duplicate method label `{}`",
                    m.label
                )));
            }
        }
        if self.selection_m == Some(0) {
            return Err(ScreenError::Config("selection m must be at least 1".into()));
        }
        Ok(())
    }

    pub fn selection_m(&self) -> usize {
        self.selection_m
            .unwrap_or_else(|| default_top_m(self.spec.n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProportionResult {
    pub label: String,
    pub proportion: f64,
    pub replications: usize,
    pub standard_error: f64,
}

impl ProportionResult {
    fn from_counts(label: String, hits: usize, replications: usize) -> Self {
        let proportion = hits as f64 / replications as f64;
        let standard_error = (proportion * (1.0 - proportion) / replications as f64).sqrt();
        Self {
            label,
            proportion,
            replications,
            standard_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: ExperimentCell,
    pub results: Vec<ProportionResult>,
    pub seconds: f64,
}

impl CellResult {
    pub fn get(&self, label: &str) -> Option<&ProportionResult> {
        self.results.iter().find(|r| r.label == label)
    }
}

/// Containment indicator per method for one replicate.
pub fn run_replicate<F: Scalar>(
    generator: &ModelGenerator,
    cell: &ExperimentCell,
    replicate: usize,
) -> Result<Vec<bool>> {
    let wrap = |e: ScreenError| ScreenError::Replicate {
        replicate,
        seed: cell.base_seed,
        source: Box::new(e),
    };
    let mut rng = substream(cell.base_seed, replicate as u64);
    let sample = generator.generate::<F, _>(&mut rng).map_err(wrap)?;
    let m = cell.selection_m();
    cell.methods
        .iter()
        .map(|method| {
            let scores = score_all(&sample.data, &method.config).map_err(wrap)?;
            Ok(containment(&top_m_select(&scores, m), &sample.true_support))
        })
        .collect()
}

/// Runs every replicate of a cell on the current rayon pool.
pub fn run_cell<F: Scalar>(cell: &ExperimentCell) -> Result<CellResult> {
    cell.validate()?;
    let start = Instant::now();
    let generator = ModelGenerator::new(cell.spec.clone())?;
    let hits: Vec<Vec<bool>> = (0..cell.replications)
        .into_par_iter()
        .map(|r| run_replicate::<F>(&generator, cell, r))
        .collect::<Result<_>>()?;
    let results = cell
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let count = hits.iter().filter(|h| h[k]).count();
            ProportionResult::from_counts(m.label.clone(), count, cell.replications)
        })
        .collect();
    Ok(CellResult {
        cell: cell.clone(),
        results,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn grid_rows(res: &CellResult) -> Vec<Vec<String>> {
    let spec = &res.cell.spec;
    let (cov, noise) = if spec.model.is_linear_design() {
        (
            spec.covariate_family().to_string(),
            spec.noise_family().to_string(),
        )
    } else {
        ("uniform".to_string(), "normal".to_string())
    };
    res.cell
        .methods
        .iter()
        .zip(&res.results)
        .map(|(m, r)| {
            vec![
                spec.model.to_string(),
                spec.p.to_string(),
                spec.n.to_string(),
                opt(spec.rho),
                opt(spec.t_mix),
                cov.clone(),
                noise.clone(),
                m.label.clone(),
                opt(m.config.neighborhood.map(|nb| nb.k)),
                opt(m.config.neighborhood.map(|nb| nb.k_n)),
                res.cell.selection_m().to_string(),
                r.replications.to_string(),
                r.proportion.to_string(),
                format!("{:.6}", r.standard_error),
                format!("{:.3}", res.seconds),
            ]
        })
        .collect()
}

/// Writes grid rows for already computed cells.
pub fn write_grid_csv<W: Write>(results: &[CellResult], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(GRID_CSV_HEADER)?;
    for res in results {
        for row in grid_rows(res) {
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs each cell in turn, appending its rows to the CSV at `out_path` as
/// soon as it finishes. `progress` sees `(cell index, result)`.
pub fn run_grid<F: Scalar>(
    cells: &[ExperimentCell],
    out_path: &Path,
    mut progress: impl FnMut(usize, &CellResult),
) -> Result<Vec<CellResult>> {
    if cells.is_empty() {
        return Err(ScreenError::Config("experiment grid has no cells".into()));
    }
    for cell in cells {
        cell.validate()?;
    }
    let io_err = |e: std::io::Error| ScreenError::Io {
        path: out_path.to_path_buf(),
        source: e,
    };
    let csv_err = |e: csv::Error| io_err(std::io::Error::other(e));
    let file = File::create(out_path).map_err(io_err)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(GRID_CSV_HEADER).map_err(csv_err)?;
    w.flush().map_err(io_err)?;
    let mut all = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let res = run_cell::<F>(cell)?;
        for row in grid_rows(&res) {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err)?;
        progress(i, &res);
        all.push(res);
    }
    Ok(all)
}

fn sample_variance<F: Scalar>(col: ndarray::ArrayView1<'_, F>) -> F {
    let n = F::lit(col.len() as f64);
    let mean = col.iter().copied().sum::<F>() / n;
    col.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / (n - F::one())
}

/// Keeps the `keep` covariates with the largest sample variance (ties to
/// the smaller index); survivors stay in their original relative order.
pub fn variance_filter<F: Scalar>(data: &DataMatrix<F>, keep: usize) -> Result<DataMatrix<F>> {
    let p = data.p();
    if keep == 0 || keep > p {
        return Err(ScreenError::Config(format!(
            "variance filter keep = {keep} must lie in 1..={p}"
        )));
    }
    if data.n() < 2 {
        return Err(ScreenError::Domain(
            "variance filter needs at least 2 rows".into(),
        ));
    }
    let vars: Vec<F> = (0..p).map(|j| sample_variance(data.covariate(j))).collect();
    if let Some(j) = vars.iter().position(|v| v.is_nan()) {
        return Err(ScreenError::Domain(format!(
            "variance of `{}` is undefined (non-finite values)",
            data.covariate_label(j)
        )));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        vars[b]
            .partial_cmp(&vars[a])
            .expect("no NaN")
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = order.into_iter().take(keep).collect();
    kept.sort_unstable();
    Ok(data.select_covariates(&kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screening::SelectionRule;
    use crate::simgen::SimModel;
    use crate::Family;
    use ndarray::array;

    fn active(v: &[usize]) -> ActiveSet {
        ActiveSet {
            members: v.iter().copied().collect(),
            rule: SelectionRule::TopM(v.len()),
        }
    }

    #[test]
    fn containment_examples() {
        let truth: BTreeSet<usize> = [1, 2].into();
        assert!(containment(&active(&[1, 2, 3]), &truth));
        assert!(!containment(&active(&[1, 3]), &truth));
        assert!(containment(&active(&[1, 2]), &truth));
    }

    #[test]
    fn single_replicate_cell() {
        let cell = ExperimentCell {
            spec: SimModelSpec::linear(SimModel::M1, 20, 30, 0.0, Family::Normal, Family::Normal),
            methods: vec![MethodSpec::new("CCH1", ScreeningConfig::cch(2, 2).unwrap())],
            replications: 1,
            selection_m: None,
            base_seed: 3,
        };
        let res = run_cell::<f64>(&cell).unwrap();
        let r = &res.results[0];
        assert!(r.proportion == 0.0 || r.proportion == 1.0);
        assert_eq!(r.standard_error, 0.0);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let cell = ExperimentCell {
            spec: SimModelSpec::additive(SimModel::M4, 10, 20, 0.0),
            methods: vec![
                MethodSpec::new("A", ScreeningConfig::sis()),
                MethodSpec::new("A", ScreeningConfig::rrcs()),
            ],
            replications: 2,
            selection_m: None,
            base_seed: 0,
        };
        assert!(run_cell::<f64>(&cell).unwrap_err().is_config());
    }

    #[test]
    fn variance_filter_examples() {
        // column variances 3, 1, 2 (scaled)
        let x = array![
            [0.0, 0.0, 0.0],
            [3.0f64.sqrt() * 2.0f64.sqrt(), 2.0f64.sqrt(), 2.0]
        ];
        let data = DataMatrix::from_parts(array![0.0, 1.0], x).unwrap();
        let out = variance_filter(&data, 2).unwrap();
        assert_eq!(out.covariate_labels(), &["X1", "X3"]);
        let all = variance_filter(&data, 3).unwrap();
        assert_eq!(all, data);
        assert!(variance_filter(&data, 4).unwrap_err().is_config());
    }
}
