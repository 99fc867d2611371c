use serde::{Deserialize, Serialize};

use crate::features::stats;

use super::ClassifierError;

/// Per-column z-scoring fitted on training rows. Columns whose training
/// spread is zero are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    /// Indices of retained input columns.
    pub columns: Vec<usize>,
    /// Indices of dropped (constant) input columns.
    pub dropped: Vec<usize>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Fit on row-major `x` with `cols` columns.
    pub fn fit(x: &[f64], cols: usize) -> Result<Self, ClassifierError> {
        if cols == 0 || x.is_empty() || x.len() % cols != 0 {
            return Err(ClassifierError::Empty);
        }
        let mut out = Self {
            columns: Vec::new(),
            dropped: Vec::new(),
            means: Vec::new(),
            stds: Vec::new(),
        };
        let mut column = Vec::with_capacity(x.len() / cols);
        for j in 0..cols {
            column.clear();
            column.extend(x.iter().skip(j).step_by(cols));
            let sd = stats::std_dev_exact(&column);
            if sd > 0.0 {
                out.columns.push(j);
                out.means.push(stats::mean(&column));
                out.stds.push(sd);
            } else {
                out.dropped.push(j);
            }
        }
        if out.columns.is_empty() {
            return Err(ClassifierError::NoVariance);
        }
        Ok(out)
    }

    pub fn input_cols(&self) -> usize {
        self.columns.len() + self.dropped.len()
    }

    pub fn output_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn apply_row(&self, row: &[f64], out: &mut Vec<f64>) {
        for ((&j, m), s) in self.columns.iter().zip(&self.means).zip(&self.stds) {
            out.push((row[j] - m) / s);
        }
    }

    /// Transform row-major `x` with `input_cols()` columns.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let cols = self.input_cols();
        let mut out = Vec::with_capacity(x.len() / cols * self.output_cols());
        for row in x.chunks_exact(cols) {
            self.apply_row(row, &mut out);
        }
        out
    }
}
