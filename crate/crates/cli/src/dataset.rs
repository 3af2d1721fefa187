use std::fs::File;
use std::path::{Path, PathBuf};

use ecr_screen::DataMatrix;
use ndarray::Array2;

use crate::error::{io_error, CliError, CliResult};

/// A numeric CSV file with one response column.
#[derive(Debug, Clone)]
pub struct CsvDataset {
    pub path: PathBuf,
    /// Header name, or 0-based column position.
    pub response: String,
    pub delimiter: u8,
    pub header: bool,
}

fn parse_error(path: &Path, line: u64, column: usize, msg: String) -> CliError {
    CliError::Usage(format!("{}:{line}:{column}: {msg}", path.display()))
}

impl CsvDataset {
    /// Reads the file into a matrix with the response moved to column 0.
    pub fn load(&self) -> CliResult<DataMatrix<f64>> {
        let file = File::open(&self.path).map_err(|e| io_error(&self.path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(self.delimiter)
            .has_headers(self.header)
            .from_reader(file);

        let headers: Option<Vec<String>> = if self.header {
            let h = reader.headers().map_err(|e| self.csv_error(e))?;
            Some(h.iter().map(|s| s.trim().to_string()).collect())
        } else {
            None
        };

        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width = headers.as_ref().map(Vec::len);
        for record in reader.records() {
            let record = record.map_err(|e| self.csv_error(e))?;
            let line = record.position().map_or(0, |p| p.line());
            let w = *width.get_or_insert(record.len());
            if record.len() != w {
                return Err(parse_error(
                    &self.path,
                    line,
                    1,
                    format!("expected {w} fields, found {}", record.len()),
                ));
            }
            let mut row = Vec::with_capacity(w);
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    parse_error(
                        &self.path,
                        line,
                        j + 1,
                        format!("cannot parse `{field}` as a number"),
                    )
                })?;
                if !v.is_finite() {
                    return Err(parse_error(
                        &self.path,
                        line,
                        j + 1,
                        format!("value `{field}` is not finite"),
                    ));
                }
                row.push(v);
            }
            rows.push(row);
        }

        let width = width.unwrap_or(0);
        if rows.len() < 2 {
            return Err(CliError::Usage(format!(
                "{}: need at least 2 data rows, found {}",
                self.path.display(),
                rows.len()
            )));
        }
        if width < 2 {
            return Err(CliError::Usage(format!(
                "{}: need a response and at least one covariate",
                self.path.display()
            )));
        }
        let names = headers.unwrap_or_else(|| (0..width).map(|j| format!("col{j}")).collect());
        let r = self.response_index(&names)?;

        let order: Vec<usize> = std::iter::once(r)
            .chain((0..width).filter(|&j| j != r))
            .collect();
        let values = Array2::from_shape_fn((rows.len(), width), |(i, j)| rows[i][order[j]]);
        let labels = order.iter().map(|&j| names[j].clone()).collect();
        Ok(DataMatrix::new(values, labels)?)
    }

    fn response_index(&self, names: &[String]) -> CliResult<usize> {
        let hits: Vec<usize> = names
            .iter()
            .enumerate()
            .filter(|(_, n)| **n == self.response)
            .map(|(j, _)| j)
            .collect();
        match hits.len() {
            1 => return Ok(hits[0]),
            n if n > 1 => {
                return Err(CliError::Usage(format!(
                    "response column `{}` appears {n} times in {}",
                    self.response,
                    self.path.display()
                )))
            }
            _ => {}
        }
        match self.response.parse::<usize>() {
            Ok(j) if j < names.len() => Ok(j),
            _ => Err(CliError::Usage(format!(
                "response column `{}` not found in {} (columns: {})",
                self.response,
                self.path.display(),
                names.join(", ")
            ))),
        }
    }

    fn csv_error(&self, e: csv::Error) -> CliError {
        match e.position() {
            Some(p) => parse_error(&self.path, p.line(), 1, e.to_string()),
            None => io_error(&self.path, e),
        }
    }
}
