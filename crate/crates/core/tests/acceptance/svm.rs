use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcsdet_core::classifier::{lopo_evaluate, CvPlan, SubjectData, SvmModel, SvmParams, TrainerConfig};
use tcsdet_core::features::{FeatureMatrix, FeatureSchema};
use tcsdet_core::io::Modality;

use crate::Check;

fn schema(cols: usize) -> FeatureSchema {
    FeatureSchema::new(Modality::Emg, (0..cols).map(|i| format!("f{i}")).collect()).unwrap()
}

fn clusters(rng: &mut ChaCha8Rng, centers: &[([f64; 2], bool)], per: usize, radius: f64) -> (Vec<f64>, Vec<bool>) {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for &(c, label) in centers {
        for _ in 0..per {
            let r = radius * rng.random::<f64>().sqrt();
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            x.extend([c[0] + r * t.cos(), c[1] + r * t.sin()]);
            y.push(label);
        }
    }
    (x, y)
}

fn training_accuracy(model: &SvmModel, x: &[f64], y: &[bool], cols: usize) -> f64 {
    let hits = x
        .chunks_exact(cols)
        .zip(y)
        .filter(|(row, &l)| model.predict_label(row).unwrap() == l)
        .count();
    hits as f64 / y.len() as f64
}

/// `b + Σ α_i y_i exp(-γ‖sv_i - z‖²)` with the standardization redone by hand.
fn naive_decision(model: &SvmModel, raw: &[f64]) -> f64 {
    let s = &model.standardizer;
    let z: Vec<f64> = s.columns.iter().enumerate().map(|(k, &j)| (raw[j] - s.means[k]) / s.stds[k]).collect();
    let mut f = model.bias;
    for (sv, a) in model.support_vectors.iter().zip(&model.dual_coefs) {
        let d2: f64 = sv.iter().zip(&z).map(|(u, v)| (u - v) * (u - v)).sum();
        f += a * (-model.gamma * d2).exp();
    }
    f
}

fn toys(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let separable = [([2.0, 2.0], true), ([-2.0, -2.0], false)];
    let xor = [([2.0, 2.0], true), ([-2.0, -2.0], true), ([2.0, -2.0], false), ([-2.0, 2.0], false)];
    for (name, centers, params) in [
        ("separable", &separable[..], SvmParams::new(1.0, 0.5)),
        ("xor", &xor[..], SvmParams::new(10.0, 1.0)),
    ] {
        let (x, y) = clusters(rng, centers, 40, 0.8);
        let fit = SvmModel::fit_dense(&schema(2), &x, &y, &params).map_err(|e| e.to_string())?;
        let acc = training_accuracy(&fit.model, &x, &y, 2);
        ensure!(acc == 1.0, "{name} toy training accuracy {acc}");
    }
    Ok(())
}

/// KKT audit and decision oracle on random non-separable problems.
fn kkt_and_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut models = 0;
    for trial in 0..8 {
        let cols = rng.random_range(2..8);
        let n = rng.random_range(100..400);
        let x: Vec<f64> = (0..n * cols).map(|_| rng.random_range(-2.0..2.0) * 10f64.powi(trial % 3)).collect();
        let y: Vec<bool> = x.chunks_exact(cols).map(|r| r[0] * r[1] + 0.5 * r[cols - 1] + rng.random_range(-0.5..0.5) > 0.0).collect();
        for (c, gamma_factor) in [(0.1, 1.0), (1.0, 0.1), (10.0, 1.0), (100.0, 0.5)] {
            let params = SvmParams::new(c, gamma_factor / cols as f64);
            let fit = SvmModel::fit_dense(&schema(cols), &x, &y, &params).map_err(|e| e.to_string())?;
            let m = &fit.model;
            let z = m.standardizer.apply(&x);
            let violations = m.kkt_violations(&z, &y, 1e-3);
            ensure!(violations == 0, "trial {trial} C={c}: {violations} KKT violations");
            let sum: f64 = m.dual_coefs.iter().sum();
            ensure!(sum.abs() < 1e-6, "trial {trial} C={c}: Σ α y = {sum:e}");
            for row in x.chunks_exact(cols) {
                let (a, b) = (m.decision(row).map_err(|e| e.to_string())?, naive_decision(m, row));
                ensure!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "trial {trial} C={c}: decision {a} vs oracle {b}");
            }
            models += 1;
        }
    }
    Ok(models)
}

fn subject(rng: &mut ChaCha8Rng, id: &str) -> SubjectData {
    let shift = rng.random_range(-0.5..0.5);
    let (x, y) = clusters(rng, &[([1.5 + shift, 1.5], true), ([-1.5, -1.5 + shift], false)], 30, 1.6);
    let mut m = FeatureMatrix::new(schema(2));
    for (k, row) in x.chunks_exact(2).enumerate() {
        m.push(k as f64, row).unwrap();
    }
    m.set_labels(y).unwrap();
    SubjectData {
        subject_id: id.into(),
        matrix: m,
    }
}

/// Structural leakage checks plus a perturbation test: rewriting the held-out
/// subject's rows and labels must not change that fold's model.
fn lopo_leakage(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let data: Vec<SubjectData> = ["s1", "s2", "s3", "s4"].iter().map(|id| subject(rng, id)).collect();
    let ids: Vec<String> = data.iter().map(|d| d.subject_id.clone()).collect();
    let plan = CvPlan::leave_one_out(&ids, 3, 11).map_err(|e| e.to_string())?;
    let cfg = TrainerConfig::default();
    let folds = lopo_evaluate(&data, &plan, &cfg).map_err(|e| e.to_string())?;
    ensure!(folds.len() == data.len(), "{} folds for {} subjects", folds.len(), data.len());
    for (f, d) in folds.iter().zip(&data) {
        let r = &f.report;
        ensure!(r.held_out == d.subject_id, "fold order");
        ensure!(!r.train_subjects.contains(&d.subject_id), "{} trains on itself", d.subject_id);
        ensure!(!r.support_subjects.contains(&d.subject_id), "{} rows among support vectors", d.subject_id);
        ensure!(f.decisions.len() == d.matrix.rows(), "{} decision count", d.subject_id);
    }
    for k in 0..data.len() {
        let mut altered = data.clone();
        let mut m = FeatureMatrix::new(schema(2));
        for i in 0..data[k].matrix.rows() {
            m.push(i as f64, &[rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0)]).unwrap();
        }
        m.set_labels((0..data[k].matrix.rows()).map(|_| rng.random_bool(0.5)).collect()).unwrap();
        altered[k].matrix = m;
        let again = lopo_evaluate(&altered, &plan, &cfg).map_err(|e| e.to_string())?;
        ensure!(again[k].model == folds[k].model, "fold {k} model depends on its held-out subject");
        ensure!(again[k].report.inner_scores == folds[k].report.inner_scores, "fold {k} grid search sees held-out data");
    }
    Ok(folds.len())
}

pub fn check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    toys(&mut rng)?;
    let models = kkt_and_oracle(&mut rng)?;
    let folds = lopo_leakage(&mut rng)?;
    Ok(format!("toys separated; {models} models KKT-clean and oracle-exact; {folds} folds leak-free"))
}
