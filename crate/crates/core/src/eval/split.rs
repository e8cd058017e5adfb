use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math;

/// Repeated stratified train/test protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            train_fraction: 2.0 / 3.0,
            repeats: 20,
            seed: 0,
        }
    }
}

/// SplitMix64 step, used to derive independent seeds from one base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE5_E9B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stratified split of sample indices. Each class keeps
/// `round(fraction · n_k)` samples for training, clamped so both halves get
/// at least one. Both index lists are sorted.
pub fn split_indices(data: &Dataset, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (k, idx) in data.class_index().iter().enumerate() {
        let n = idx.len();
        if n < 3 {
            return Err(Error::ClassTooSmall {
                class: k,
                size: n,
                min: 3,
            });
        }
        let mut shuffled = idx.clone();
        shuffled.shuffle(&mut rng);
        let m = (math::round(fraction * n as f64) as usize).clamp(1, n - 1);
        train.extend_from_slice(&shuffled[..m]);
        test.extend_from_slice(&shuffled[m..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Train and test halves for one repeat of the plan.
pub fn split(data: &Dataset, plan: &SplitPlan, repeat: usize) -> Result<(Dataset, Dataset)> {
    let (tr, te) = split_indices(
        data,
        plan.train_fraction,
        derive_seed(plan.seed, repeat as u64),
    )?;
    Ok((data.subset(&tr)?, data.subset(&te)?))
}

/// Fold number of each sample: every class is shuffled and dealt
/// round-robin over `k` folds.
pub fn stratified_folds(labels: &[usize], num_classes: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = alloc::vec![0; labels.len()];
    for c in 0..num_classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold[i] = pos % k.max(1);
        }
    }
    fold
}
