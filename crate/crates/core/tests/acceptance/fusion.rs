use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcsdet_core::fusion::{fuse, FusionRule, LabelSeries};
use tcsdet_core::io::Modality;

use crate::Check;

const MODALITIES: [Modality; 3] = [Modality::Eeg, Modality::Emg, Modality::Acc];
const WINDOW_S: f64 = 2.0;
const SPAN: usize = 20;

fn series(labels: &[Vec<bool>], t0: f64) -> Vec<LabelSeries> {
    labels
        .iter()
        .zip(MODALITIES)
        .map(|(l, m)| {
            let starts = (0..l.len()).map(|i| t0 + i as f64).collect();
            LabelSeries::new(m, starts, l.clone()).unwrap()
        })
        .collect()
}

fn spans(labels: &[Vec<bool>], t0: f64) -> Vec<(f64, f64)> {
    let rule = FusionRule::standard(MODALITIES[..labels.len()].iter().copied()).unwrap();
    fuse(&series(labels, t0), &rule)
        .unwrap()
        .detections()
        .iter()
        .map(|d| (d.start_s, d.end_s))
        .collect()
}

/// Every 20-slot run is counted from scratch; triggered runs that overlap or
/// touch are joined.
fn brute_force(labels: &[Vec<bool>], required: usize, t0: f64) -> Vec<(f64, f64)> {
    let n = labels[0].len();
    let mut hit = vec![false; n];
    for start in 0..n.saturating_sub(SPAN - 1) {
        let mut count = 0;
        for l in labels {
            for slot in start..start + SPAN {
                if l[slot] {
                    count += 1;
                }
            }
        }
        if count >= required {
            for h in &mut hit[start..start + SPAN] {
                *h = true;
            }
        }
    }
    // Overlapping or touching runs form one contiguous block of covered slots.
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if hit[i] {
            let a = i;
            while i < n && hit[i] {
                i += 1;
            }
            out.push((t0 + a as f64, t0 + (i - 1) as f64 + WINDOW_S));
        } else {
            i += 1;
        }
    }
    out
}

/// Maximal runs of at least 20 consecutive positives.
fn run_length(labels: &[bool], t0: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        if labels[i] {
            let a = i;
            while i < labels.len() && labels[i] {
                i += 1;
            }
            if i - a >= SPAN {
                out.push((t0 + a as f64, t0 + (i - 1) as f64 + WINDOW_S));
            }
        } else {
            i += 1;
        }
    }
    out
}

/// `k` modalities, all negative except slots 10..30, where `positives` of
/// the `20·k` slot decisions are set.
fn block(k: usize, positives: usize) -> Vec<Vec<bool>> {
    let mut labels = vec![vec![false; 60]; k];
    let mut left = positives;
    // Fill modality by modality, spreading the gaps of the last one.
    for l in labels.iter_mut() {
        let take = left.min(SPAN);
        let stride = SPAN as f64 / take.max(1) as f64;
        for j in 0..take {
            l[10 + (j as f64 * stride) as usize] = true;
        }
        left -= take;
    }
    labels
}

fn exact_pairs() -> Check {
    let mut uni = vec![vec![false; 60]];
    uni[0][10..30].fill(true);
    let got = spans(&uni, 0.0);
    ensure!(got == vec![(10.0, 31.0)], "20 consecutive: {got:?}");
    ensure!(got[0].1 - got[0].0 == 21.0, "event length {}", got[0].1 - got[0].0);
    uni[0][29] = false;
    ensure!(spans(&uni, 0.0).is_empty(), "19 consecutive triggered");

    for (k, required) in [(2, 36), (3, 54)] {
        let yes = block(k, required);
        let count: usize = yes.iter().map(|l| l.iter().filter(|&&b| b).count()).sum();
        ensure!(count == required, "built {count} positives, wanted {required}");
        let got = spans(&yes, 0.0);
        ensure!(got == vec![(10.0, 31.0)], "{required} of {}: {got:?}", 20 * k);
        let no = block(k, required - 1);
        let got = spans(&no, 0.0);
        ensure!(got.is_empty(), "{} of {}: {got:?}", required - 1, 20 * k);
    }
    Ok(String::new())
}

/// A shared burst pattern copied into each modality with random flips, so
/// that triggering is common but not certain.
fn random_grid(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<Vec<bool>> {
    let p_on = rng.random_range(0.005..0.05);
    let p_off = rng.random_range(0.005..0.05);
    let flip = rng.random_range(0.0..0.15);
    let mut on = rng.random_bool(0.3);
    let base: Vec<bool> = (0..n)
        .map(|_| {
            on = if on { !rng.random_bool(p_off) } else { rng.random_bool(p_on) };
            on
        })
        .collect();
    (0..k)
        .map(|_| base.iter().map(|&b| b != rng.random_bool(flip)).collect())
        .collect()
}

pub fn check() -> Check {
    exact_pairs()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let mut triggered = 0;
    for trial in 0..1000 {
        let k = 1 + trial % 3;
        let labels = random_grid(&mut rng, k, 200);
        let t0 = rng.random_range(0..10_000) as f64;
        let required = [20, 36, 54][k - 1];
        let got = spans(&labels, t0);
        let want = brute_force(&labels, required, t0);
        ensure!(got == want, "grid {trial} ({k} modalities): fuse {got:?} vs brute force {want:?}");
        if k == 1 {
            let runs = run_length(&labels[0], t0);
            ensure!(got == runs, "grid {trial}: fuse {got:?} vs run-length scanner {runs:?}");
        }
        triggered += usize::from(!got.is_empty());
    }
    Ok(format!("20/19, 36/35, 54/53 exact; 1000 random grids equal ({triggered} with events)"))
}
