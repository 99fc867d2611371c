use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcsdet_core::evaluation::score_events;
use tcsdet_core::io::{AnnotationSet, Detection, DetectionLog, Modality, SeizureEvent, SeizureType};

use crate::Check;

fn log(spans: &[(f64, f64)]) -> DetectionLog {
    let mut sorted = spans.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    DetectionLog::new(
        sorted
            .iter()
            .enumerate()
            .map(|(k, &(start_s, end_s))| Detection {
                id: format!("d{k}"),
                start_s,
                end_s,
                modalities: BTreeSet::from([Modality::Eeg]),
                mean_margin: None,
            })
            .collect(),
    )
    .unwrap()
}

fn truth(spans: &[(f64, f64)]) -> AnnotationSet {
    AnnotationSet::new(
        spans
            .iter()
            .map(|&(a, b)| SeizureEvent::new(a, b, SeizureType::Fbtc))
            .collect(),
    )
    .unwrap()
}

/// `(tp, fp, fn)` by checking every detection against every seizure.
fn oracle(dets: &[(f64, f64)], seizures: &[(f64, f64)]) -> (usize, usize, usize) {
    let within = |d: &(f64, f64), s: &(f64, f64)| s.0 <= d.0 && d.1 <= s.1;
    let tp = seizures.iter().filter(|s| dets.iter().any(|d| within(d, s))).count();
    let fp = dets.iter().filter(|d| !seizures.iter().any(|s| within(d, s))).count();
    (tp, fp, seizures.len() - tp)
}

fn scenarios() -> Check {
    let seizure = [(90.0, 200.0)];
    let cases: [(&str, &[(f64, f64)], &[(f64, f64)], (usize, usize, usize)); 4] = [
        ("inside", &[(100.0, 130.0)], &seizure, (1, 0, 0)),
        ("straddles onset", &[(80.0, 130.0)], &seizure, (0, 1, 1)),
        ("far away", &[(300.0, 340.0)], &[], (0, 1, 0)),
        ("two inside one", &[(100.0, 130.0), (150.0, 170.0)], &seizure, (1, 0, 0)),
    ];
    for (name, dets, seizures, want) in cases {
        let s = score_events(&log(dets), &truth(seizures), 24.0).map_err(|e| e.to_string())?;
        ensure!((s.tp, s.fp, s.fn_) == want, "{name}: got {:?}, want {want:?}", (s.tp, s.fp, s.fn_));
    }
    Ok(String::new())
}

/// Detection edges are drawn from a coarse grid so that edges coinciding
/// with seizure bounds are common.
fn random_scenario(rng: &mut ChaCha8Rng) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let coarse = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.random_range(lo..hi) / 5.0).round() * 5.0;
    let mut seizures = Vec::new();
    let mut t = coarse(rng, 0.0, 100.0);
    for _ in 0..rng.random_range(0..5) {
        let len = coarse(rng, 10.0, 200.0).max(5.0);
        seizures.push((t, t + len));
        t += len + coarse(rng, 0.0, 150.0);
    }
    let horizon = t + 100.0;
    let mut dets = Vec::new();
    for _ in 0..rng.random_range(0..9) {
        let (a, b) = match (rng.random_range(0..3), seizures.is_empty()) {
            // Somewhere inside or around a seizure.
            (0, false) => {
                let s: (f64, f64) = seizures[rng.random_range(0..seizures.len())];
                let a = coarse(rng, s.0 - 20.0, s.1);
                (a, a + coarse(rng, 5.0, 60.0).max(5.0))
            }
            // Exactly one seizure bound reused.
            (1, false) => {
                let s: (f64, f64) = seizures[rng.random_range(0..seizures.len())];
                if rng.random_bool(0.5) {
                    (s.0, s.0 + coarse(rng, 5.0, 2.0 * (s.1 - s.0)).max(5.0))
                } else {
                    let len = coarse(rng, 5.0, 2.0 * (s.1 - s.0)).max(5.0);
                    (s.1 - len, s.1)
                }
            }
            _ => {
                let a = coarse(rng, 0.0, horizon);
                (a, a + coarse(rng, 5.0, 80.0).max(5.0))
            }
        };
        dets.push((a.max(0.0), b.max(a.max(0.0) + 1.0)));
    }
    (dets, seizures)
}

pub fn check() -> Check {
    scenarios()?;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut tps, mut fps) = (0, 0);
    for trial in 0..10_000 {
        let (dets, seizures) = random_scenario(&mut rng);
        let hours = rng.random_range(0.5..48.0);
        let s = score_events(&log(&dets), &truth(&seizures), hours).map_err(|e| e.to_string())?;
        let (tp, fp, fn_) = oracle(&dets, &seizures);
        ensure!(
            (s.tp, s.fp, s.fn_) == (tp, fp, fn_),
            "scenario {trial}: got {:?}, oracle {:?} for detections {dets:?} seizures {seizures:?}",
            (s.tp, s.fp, s.fn_),
            (tp, fp, fn_)
        );
        ensure!(s.tp + s.fn_ == seizures.len(), "scenario {trial}: tp + fn != seizures");
        let fpr = fp as f64 * 24.0 / hours;
        ensure!((s.fpr_per_24h - fpr).abs() <= 1e-12 * fpr.max(1.0), "scenario {trial}: fpr {}", s.fpr_per_24h);
        tps += tp;
        fps += fp;
    }
    Ok(format!("4 scenarios; 10000 random scenarios equal ({tps} TP, {fps} FP in total)"))
}
