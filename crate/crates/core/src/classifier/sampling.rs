use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ClassifierError;

/// Non-seizure rows kept per seizure row.
pub const UNDERSAMPLE_RATIO: usize = 5;

/// All positive rows plus `min(ratio·#pos, #neg)` negatives drawn uniformly
/// without replacement. Returned indices are ascending.
pub fn undersample_balanced(labels: &[bool], ratio: usize, seed: u64) -> Result<Vec<usize>, ClassifierError> {
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i]);
    if pos.is_empty() {
        return Err(ClassifierError::NoPositives);
    }
    let keep = (ratio * pos.len()).min(neg.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = pos;
    out.extend(index::sample(&mut rng, neg.len(), keep).into_iter().map(|k| neg[k]));
    out.sort_unstable();
    Ok(out)
}

/// Assign each row to one of `k` folds, dealing shuffled positives and
/// negatives round-robin so every fold sees both classes in proportion.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for (n, i) in idx.into_iter().enumerate() {
            fold[i] = n % k.max(1);
        }
    }
    fold
}
