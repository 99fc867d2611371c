use tcsdet_core::evaluation::{f1_from, EventScore};

use crate::Check;

pub fn check() -> Check {
    let s = EventScore::from_counts(43, 0, 1, 24.0);
    let sens = s.sensitivity * 100.0;
    ensure!((sens - 97.7).abs() <= 0.05, "sensitivity {sens:.3}% for tp=43 fn=1");

    let a = f1_from(0.430, 0.977) * 100.0;
    ensure!((a - 59.7).abs() <= 0.1, "F1 {a:.3}% for P=0.430 R=0.977");
    let b = f1_from(0.755, 0.909) * 100.0;
    ensure!((b - 82.5).abs() <= 0.1, "F1 {b:.3}% for P=0.755 R=0.909");

    // The same F1 values through the pooled score path.
    let pooled = EventScore::from_counts(43, 57, 1, 24.0);
    ensure!((pooled.precision - 0.43).abs() < 1e-12, "precision {}", pooled.precision);
    ensure!((pooled.f1 - f1_from(0.43, 43.0 / 44.0)).abs() < 1e-12, "pooled f1 {}", pooled.f1);
    Ok(format!("sensitivity {sens:.2}%, F1 {a:.2}% and {b:.2}%"))
}
