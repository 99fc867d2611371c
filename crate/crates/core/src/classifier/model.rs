use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, FeatureSchema};
use crate::io;

use super::smo::{rbf, rbf_row, train_rbf_svm, SvmParams};
use super::standardize::Standardizer;
use super::ClassifierError;

/// A trained RBF-SVM together with the standardization it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmModel {
    pub schema: FeatureSchema,
    pub schema_hash: String,
    /// Feature names removed for zero training variance.
    pub dropped_features: Vec<String>,
    pub standardizer: Standardizer,
    /// Standardized support vectors, one per entry.
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i · y_i` per support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
}

/// A fitted model plus training bookkeeping that does not go to disk.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub model: SvmModel,
    /// Positions of the support vectors within the training rows passed in.
    pub support_rows: Vec<usize>,
    /// Decision values of the support vectors as tracked by the solver.
    pub support_decisions: Vec<f64>,
    pub iterations: usize,
}

impl SvmModel {
    /// Standardize, then train on the given rows of `m` (which must be labelled).
    pub fn fit(m: &FeatureMatrix, rows: &[usize], params: &SvmParams) -> Result<FittedModel, ClassifierError> {
        let labels = m.labels().ok_or(ClassifierError::Unlabelled)?;
        if rows.is_empty() {
            return Err(ClassifierError::Empty);
        }
        let cols = m.cols();
        let mut raw = Vec::with_capacity(rows.len() * cols);
        for &i in rows {
            raw.extend_from_slice(m.row(i));
        }
        let y: Vec<bool> = rows.iter().map(|&i| labels[i]).collect();
        Self::fit_dense(m.schema(), &raw, &y, params)
    }

    /// Train from raw (unstandardized) row-major values.
    pub fn fit_dense(
        schema: &FeatureSchema,
        raw: &[f64],
        labels: &[bool],
        params: &SvmParams,
    ) -> Result<FittedModel, ClassifierError> {
        let standardizer = Standardizer::fit(raw, schema.len())?;
        let z = standardizer.apply(raw);
        let d = standardizer.output_cols();
        let sol = train_rbf_svm(&z, d, labels, params)?;
        let support_vectors = sol
            .support
            .iter()
            .map(|&i| z[i * d..(i + 1) * d].to_vec())
            .collect();
        let model = SvmModel {
            schema: schema.clone(),
            schema_hash: schema.hash(),
            dropped_features: standardizer
                .dropped
                .iter()
                .map(|&j| schema.names()[j].clone())
                .collect(),
            standardizer,
            support_vectors,
            dual_coefs: sol.dual_coefs,
            bias: sol.bias,
            c: params.c,
            gamma: params.gamma,
        };
        Ok(FittedModel {
            model,
            support_rows: sol.support,
            support_decisions: sol.support_decisions,
            iterations: sol.iterations,
        })
    }

    /// Decision value for an already standardized vector.
    pub fn decision_standardized(&self, z: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, a)| a * rbf(sv, z, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    /// Decision value for a raw feature row in schema order.
    pub fn decision(&self, raw: &[f64]) -> Result<f64, ClassifierError> {
        if raw.len() != self.schema.len() {
            return Err(ClassifierError::Shape(format!(
                "row has {} features, model expects {}",
                raw.len(),
                self.schema.len()
            )));
        }
        let mut z = Vec::with_capacity(self.standardizer.output_cols());
        self.standardizer.apply_row(raw, &mut z);
        Ok(self.decision_standardized(&z))
    }

    pub fn predict_label(&self, raw: &[f64]) -> Result<bool, ClassifierError> {
        Ok(self.decision(raw)? > 0.0)
    }

    /// Decision values for every row; invalid rows yield `None`.
    pub fn decisions(&self, m: &FeatureMatrix) -> Result<Vec<Option<f64>>, ClassifierError> {
        self.check_schema(m.schema())?;
        let mut z = Vec::with_capacity(self.standardizer.output_cols());
        let flat: Vec<f64> = self.support_vectors.concat();
        let mut k = vec![0.0; self.support_vectors.len()];
        Ok((0..m.rows())
            .map(|i| {
                m.valid()[i].then(|| {
                    z.clear();
                    self.standardizer.apply_row(m.row(i), &mut z);
                    if z.is_empty() {
                        return self.decision_standardized(&z);
                    }
                    // Same summation order as `decision_standardized`.
                    rbf_row(&z, &flat, self.gamma, &mut k);
                    k.iter().zip(&self.dual_coefs).map(|(k, a)| a * k).sum::<f64>() + self.bias
                })
            })
            .collect())
    }

    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<(), ClassifierError> {
        let found = schema.hash();
        if found != self.schema_hash {
            return Err(ClassifierError::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Count of KKT violations on standardized training data at `tol`.
    pub fn kkt_violations(&self, z: &[f64], labels: &[bool], tol: f64) -> usize {
        let d = self.standardizer.output_cols();
        let mut alpha = vec![0.0; labels.len()];
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            // Support vectors are copies of training rows; match them back.
            if let Some(i) = z.chunks_exact(d).position(|r| r == sv.as_slice()) {
                alpha[i] += coef.abs();
            }
        }
        let mut violations = 0;
        for (i, row) in z.chunks_exact(d).enumerate() {
            let yf = if labels[i] { 1.0 } else { -1.0 } * self.decision_standardized(row);
            let a = alpha[i];
            let ok = if a <= 0.0 {
                yf >= 1.0 - tol
            } else if a >= self.c {
                yf <= 1.0 + tol
            } else {
                (yf - 1.0).abs() <= tol
            };
            if !ok {
                violations += 1;
            }
        }
        violations
    }

    pub fn write(&self, path: &Path) -> Result<(), ClassifierError> {
        Ok(io::write_json(path, self)?)
    }

    pub fn read(path: &Path) -> Result<Self, ClassifierError> {
        let m: Self = io::read_json(path)?;
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |r: &str| Err(ClassifierError::Shape(format!("model file: {r}")));
        if self.schema.hash() != self.schema_hash {
            return bad("schema hash does not match names");
        }
        if self.standardizer.input_cols() != self.schema.len() {
            return bad("standardizer width differs from schema");
        }
        if self.standardizer.stds.iter().any(|&s| !(s > 0.0)) {
            return bad("non-positive standard deviation");
        }
        let d = self.standardizer.output_cols();
        if self.support_vectors.len() != self.dual_coefs.len()
            || self.support_vectors.iter().any(|v| v.len() != d)
        {
            return bad("support vector shape");
        }
        if self.dual_coefs.iter().any(|a| a.abs() > self.c * (1.0 + 1e-12)) {
            return bad("dual coefficient exceeds C");
        }
        if !self.dual_coefs.iter().any(|&a| a > 0.0) || !self.dual_coefs.iter().any(|&a| a < 0.0) {
            return bad("support vectors must cover both classes");
        }
        Ok(())
    }
}
