//! Internal grid search and the leave-one-subject-out harness.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;

use super::model::SvmModel;
use super::sampling::{stratified_folds, undersample_balanced, UNDERSAMPLE_RATIO};
use super::smo::{rbf_row, train_rbf_svm, SvmParams};
use super::standardize::Standardizer;
use super::ClassifierError;

/// Training settings shared by every fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    #[serde(rename = "grid_C")]
    pub grid_c: Vec<f64>,
    /// Gamma candidates as multiples of `1 / #features`.
    pub grid_gamma_factors: Vec<f64>,
    pub inner_k: usize,
    pub undersample_ratio: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub cache_mb: usize,
    /// Cap on rows used for the inner grid search (stratified subsample).
    /// The final model of each fold always trains on every undersampled row.
    pub grid_max_rows: Option<usize>,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            grid_c: vec![0.1, 1.0, 10.0, 100.0],
            grid_gamma_factors: vec![0.01, 0.1, 1.0],
            inner_k: 3,
            undersample_ratio: UNDERSAMPLE_RATIO,
            tol: 1e-3,
            max_iter: 10_000_000,
            cache_mb: 256,
            grid_max_rows: None,
        }
    }
}

impl TrainerConfig {
    pub fn params(&self, c: f64, gamma: f64) -> SvmParams {
        SvmParams {
            c,
            gamma,
            tol: self.tol,
            max_iter: self.max_iter,
            cache_bytes: self.cache_mb << 20,
        }
    }

    /// Absolute `(C, gamma)` candidates for `features` standardized columns.
    pub fn candidates(&self, features: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &c in &self.grid_c {
            for &g in &self.grid_gamma_factors {
                out.push((c, g / features.max(1) as f64));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
    /// Mean inner-fold F1; `None` when the candidate failed on some fold.
    pub mean_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub c: f64,
    pub gamma: f64,
    pub scores: Vec<GridScore>,
}

/// Window-level F1 with 0 when undefined.
pub fn f1_score(truth: &[bool], pred: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.iter().zip(pred) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            _ => {}
        }
    }
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
    }
}

fn inner_f1(
    z: &[f64],
    cols: usize,
    labels: &[bool],
    folds: &[usize],
    k: usize,
    params: &SvmParams,
) -> Result<f64, ClassifierError> {
    let mut total = 0.0;
    for f in 0..k {
        let train: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == f).collect();
        let mut x = Vec::with_capacity(train.len() * cols);
        for &i in &train {
            x.extend_from_slice(&z[i * cols..(i + 1) * cols]);
        }
        let y: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let sol = train_rbf_svm(&x, cols, &y, params)?;
        let mut sv = Vec::with_capacity(sol.support.len() * cols);
        for &s in &sol.support {
            sv.extend_from_slice(&x[s * cols..(s + 1) * cols]);
        }
        let mut k = vec![0.0; sol.support.len()];
        let pred: Vec<bool> = test
            .iter()
            .map(|&i| {
                rbf_row(&z[i * cols..(i + 1) * cols], &sv, params.gamma, &mut k);
                let f: f64 = k.iter().zip(&sol.dual_coefs).map(|(k, a)| a * k).sum();
                f + sol.bias > 0.0
            })
            .collect();
        let truth: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
        total += f1_score(&truth, &pred);
    }
    Ok(total / k as f64)
}

/// Pick the candidate with the best mean inner-fold F1 on standardized
/// row-major `z`. Ties go to smaller C, then smaller gamma; candidates that
/// fail on any fold are skipped.
pub fn grid_search(
    z: &[f64],
    cols: usize,
    labels: &[bool],
    candidates: &[(f64, f64)],
    inner_k: usize,
    seed: u64,
    base: &SvmParams,
) -> Result<GridResult, ClassifierError> {
    if candidates.is_empty() {
        return Err(ClassifierError::GridExhausted);
    }
    let k = inner_k.max(2);
    let folds = stratified_folds(labels, k, seed);
    let mut order = candidates.to_vec();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    order.dedup();
    let mut scores = Vec::with_capacity(order.len());
    let mut best: Option<(f64, f64, f64)> = None;
    for (c, gamma) in order {
        let params = SvmParams { c, gamma, ..*base };
        let mean_f1 = inner_f1(z, cols, labels, &folds, k, &params).ok();
        if let Some(f1) = mean_f1 {
            if best.is_none_or(|b| f1 > b.2) {
                best = Some((c, gamma, f1));
            }
        }
        scores.push(GridScore { c, gamma, mean_f1 });
    }
    let (c, gamma, _) = best.ok_or(ClassifierError::GridExhausted)?;
    Ok(GridResult { c, gamma, scores })
}

/// Labelled windows of one subject.
#[derive(Debug, Clone)]
pub struct SubjectData {
    pub subject_id: String,
    pub matrix: FeatureMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub held_out: String,
    pub train_subjects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: Vec<Fold>,
    pub inner_k: usize,
    pub seed: u64,
}

impl CvPlan {
    /// One fold per subject, in the given order.
    pub fn leave_one_out(subjects: &[String], inner_k: usize, seed: u64) -> Result<Self, ClassifierError> {
        let unique: BTreeSet<&String> = subjects.iter().collect();
        if unique.len() != subjects.len() {
            return Err(ClassifierError::Plan("duplicate subject ids".into()));
        }
        if subjects.len() < 2 {
            return Err(ClassifierError::Plan("need at least 2 subjects".into()));
        }
        let folds = subjects
            .iter()
            .map(|h| Fold {
                held_out: h.clone(),
                train_subjects: subjects.iter().filter(|s| *s != h).cloned().collect(),
            })
            .collect();
        Ok(Self {
            folds,
            inner_k,
            seed,
        })
    }

    fn validate(&self, data: &[SubjectData]) -> Result<(), ClassifierError> {
        let known: BTreeSet<&str> = data.iter().map(|d| d.subject_id.as_str()).collect();
        let mut held = BTreeSet::new();
        for f in &self.folds {
            if !held.insert(f.held_out.as_str()) {
                return Err(ClassifierError::Plan(format!("{} held out twice", f.held_out)));
            }
            if f.train_subjects.contains(&f.held_out) {
                return Err(ClassifierError::Plan(format!("{} trains on itself", f.held_out)));
            }
            for s in std::iter::once(&f.held_out).chain(&f.train_subjects) {
                if !known.contains(s.as_str()) {
                    return Err(ClassifierError::Plan(format!("unknown subject {s}")));
                }
            }
        }
        if held != known {
            return Err(ClassifierError::Plan("every subject must be held out exactly once".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub held_out: String,
    pub train_subjects: Vec<String>,
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
    pub inner_scores: Vec<GridScore>,
    pub train_rows: usize,
    pub train_positives: usize,
    pub support_vectors: usize,
    /// Subjects whose rows ended up as support vectors.
    pub support_subjects: Vec<String>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub report: FoldReport,
    pub model: SvmModel,
    /// Decision value per window of the held-out subject; `None` for invalid rows.
    pub decisions: Vec<Option<f64>>,
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Nested leave-one-subject-out evaluation. Per fold: undersample the
/// training subjects, fit standardization, grid-search, train, and score
/// every window of the held-out subject.
pub fn lopo_evaluate(
    data: &[SubjectData],
    plan: &CvPlan,
    cfg: &TrainerConfig,
) -> Result<Vec<FoldOutcome>, ClassifierError> {
    plan.validate(data)?;
    check_subjects(data)?;
    let mut out = Vec::with_capacity(plan.folds.len());
    for (fi, fold) in plan.folds.iter().enumerate() {
        // Training rows come only from the fold's training subjects.
        let train: Vec<&SubjectData> = data
            .iter()
            .filter(|d| fold.train_subjects.contains(&d.subject_id))
            .collect();
        let (model, report) = fit_subjects(&train, cfg, plan.inner_k, fold_seed(plan.seed, fi))?;
        if report.support_subjects.contains(&fold.held_out) {
            return Err(ClassifierError::Plan(format!("{} leaked into its own model", fold.held_out)));
        }
        let held = data
            .iter()
            .find(|d| d.subject_id == fold.held_out)
            .expect("plan validated");
        let decisions = model.decisions(&held.matrix)?;
        out.push(FoldOutcome {
            report: FoldReport {
                held_out: fold.held_out.clone(),
                train_subjects: fold.train_subjects.clone(),
                c: report.c,
                gamma: report.gamma,
                inner_scores: report.inner_scores,
                train_rows: report.train_rows,
                train_positives: report.train_positives,
                support_vectors: report.support_vectors,
                support_subjects: report.support_subjects,
                iterations: report.iterations,
            },
            model,
            decisions,
        });
    }
    Ok(out)
}

/// Summary of one model fit on a set of subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_subjects: Vec<String>,
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
    pub inner_scores: Vec<GridScore>,
    pub train_rows: usize,
    pub train_positives: usize,
    pub support_vectors: usize,
    pub support_subjects: Vec<String>,
    pub iterations: usize,
}

/// Fit one model on every subject, with the same undersampling, scaling and
/// grid search as a LOPO fold.
pub fn train_all(data: &[SubjectData], cfg: &TrainerConfig, seed: u64) -> Result<(SvmModel, TrainReport), ClassifierError> {
    check_subjects(data)?;
    let all: Vec<&SubjectData> = data.iter().collect();
    fit_subjects(&all, cfg, cfg.inner_k, seed)
}

fn check_subjects(data: &[SubjectData]) -> Result<(), ClassifierError> {
    let first = data.first().ok_or(ClassifierError::Plan("no subjects".into()))?;
    for d in data {
        if d.matrix.rows() == 0 {
            return Err(ClassifierError::EmptySubject(d.subject_id.clone()));
        }
        if d.matrix.labels().is_none() {
            return Err(ClassifierError::Unlabelled);
        }
        if d.matrix.schema() != first.matrix.schema() {
            return Err(ClassifierError::Plan(format!("{} has a different schema", d.subject_id)));
        }
    }
    Ok(())
}

fn fit_subjects(
    train: &[&SubjectData],
    cfg: &TrainerConfig,
    inner_k: usize,
    seed: u64,
) -> Result<(SvmModel, TrainReport), ClassifierError> {
    let schema = train
        .first()
        .ok_or(ClassifierError::Plan("no training subjects".into()))?
        .matrix
        .schema();
    let mut raw = Vec::new();
    let mut labels = Vec::new();
    let mut origin = Vec::new();
    for d in train {
        let l = d.matrix.labels().ok_or(ClassifierError::Unlabelled)?;
        for i in d.matrix.valid_rows() {
            raw.extend_from_slice(d.matrix.row(i));
            labels.push(l[i]);
            origin.push(d.subject_id.as_str());
        }
    }
    let cols = schema.len();
    let keep = undersample_balanced(&labels, cfg.undersample_ratio, seed)?;
    let mut x = Vec::with_capacity(keep.len() * cols);
    for &i in &keep {
        x.extend_from_slice(&raw[i * cols..(i + 1) * cols]);
    }
    let y: Vec<bool> = keep.iter().map(|&i| labels[i]).collect();

    let std = Standardizer::fit(&x, cols)?;
    let z = std.apply(&x);
    let d = std.output_cols();
    let base = cfg.params(1.0, 1.0);
    let candidates = cfg.candidates(d);
    let grid = match cfg.grid_max_rows {
        Some(cap) if y.len() > cap => {
            let sub = stratified_subsample(&y, cap, seed);
            let mut zs = Vec::with_capacity(sub.len() * d);
            for &i in &sub {
                zs.extend_from_slice(&z[i * d..(i + 1) * d]);
            }
            let ys: Vec<bool> = sub.iter().map(|&i| y[i]).collect();
            grid_search(&zs, d, &ys, &candidates, inner_k, seed, &base)?
        }
        _ => grid_search(&z, d, &y, &candidates, inner_k, seed, &base)?,
    };
    let fitted = SvmModel::fit_dense(schema, &x, &y, &cfg.params(grid.c, grid.gamma))?;
    let support_subjects: BTreeSet<&str> = fitted.support_rows.iter().map(|&r| origin[keep[r]]).collect();
    let report = TrainReport {
        train_subjects: train.iter().map(|d| d.subject_id.clone()).collect(),
        c: grid.c,
        gamma: grid.gamma,
        inner_scores: grid.scores,
        train_rows: y.len(),
        train_positives: y.iter().filter(|&&l| l).count(),
        support_vectors: fitted.support_rows.len(),
        support_subjects: support_subjects.into_iter().map(String::from).collect(),
        iterations: fitted.iterations,
    };
    Ok((fitted.model, report))
}

/// At most `cap` row indices keeping the class proportions, ascending.
fn stratified_subsample(labels: &[bool], cap: usize, seed: u64) -> Vec<usize> {
    use rand::seq::index;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.rotate_left(17));
    let mut out = Vec::with_capacity(cap);
    for class in [true, false] {
        let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let take = ((idx.len() * cap) as f64 / labels.len() as f64).round() as usize;
        let take = take.clamp(1.min(idx.len()), idx.len());
        out.extend(index::sample(&mut rng, idx.len(), take).into_iter().map(|k| idx[k]));
    }
    out.sort_unstable();
    out
}
