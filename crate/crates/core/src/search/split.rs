use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            stratified: true,
            seed: 0,
        }
    }
}

fn check_fraction(f: f64, what: &str) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{what} must lie strictly between 0 and 1, got {f}"
        )))
    }
}

/// `⌊n·f⌋`, guarded against products like 0.7·10 landing just below an integer.
fn floor_share(n: usize, f: f64) -> usize {
    ((n as f64 * f + 1e-9).floor() as usize).min(n)
}

/// Picks `⌊n·fraction⌋` indices (returned first) and leaves the rest; both sorted.
/// Stratified picks take `⌊n_c·fraction⌋` per class and hand the remaining
/// slots to the classes with the largest fractional parts (ties to the
/// lower class index).
fn partition(
    labels: &[usize],
    classes: &[usize],
    fraction: f64,
    stratified: bool,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = labels.len();
    let target = floor_share(n, fraction);
    let mut taken = Vec::with_capacity(target);
    let mut rest = Vec::with_capacity(n - target);
    if !stratified {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        taken.extend_from_slice(&order[..target]);
        rest.extend_from_slice(&order[target..]);
    } else {
        let members: Vec<Vec<usize>> = classes
            .iter()
            .map(|&c| (0..n).filter(|&i| labels[i] == c).collect())
            .collect();
        let mut quota: Vec<usize> = members
            .iter()
            .map(|m| floor_share(m.len(), fraction))
            .collect();
        let assigned: usize = quota.iter().sum();
        let mut by_remainder: Vec<(usize, f64)> = members
            .iter()
            .enumerate()
            .map(|(k, m)| (k, m.len() as f64 * fraction - quota[k] as f64))
            .filter(|&(k, _)| quota[k] < members[k].len())
            .collect();
        by_remainder.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(k, _) in by_remainder.iter().take(target.saturating_sub(assigned)) {
            quota[k] += 1;
        }
        for (mut m, q) in members.into_iter().zip(quota) {
            m.shuffle(&mut rng);
            taken.extend_from_slice(&m[..q]);
            rest.extend_from_slice(&m[q..]);
        }
    }
    taken.sort_unstable();
    rest.sort_unstable();
    (taken, rest)
}

/// Seeded train/test partition of sample indices. Train size is `⌊n·f⌋`.
pub fn split(
    labels: &[usize],
    n_classes: usize,
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    check_fraction(spec.train_fraction, "train fraction")?;
    if labels.is_empty() {
        return Err(Error::EmptyDataset("nothing to split".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(Error::Config(format!("label index {bad} out of range")));
    }
    if spec.stratified {
        if let Some(c) = (0..n_classes).find(|c| !labels.contains(c)) {
            return Err(Error::EmptyClass(c));
        }
    }
    let classes: Vec<usize> = (0..n_classes).collect();
    Ok(partition(
        labels,
        &classes,
        spec.train_fraction,
        spec.stratified,
        spec.seed,
    ))
}

/// Splits a training set into (fit, validation) with `⌊n·fraction⌋`
/// validation samples. Stratification covers the classes present.
pub fn carve_validation(
    labels: &[usize],
    fraction: f64,
    stratified: bool,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    check_fraction(fraction, "validation fraction")?;
    if labels.is_empty() {
        return Err(Error::EmptyDataset("nothing to split".into()));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let (validation, fit) = partition(labels, &classes, fraction, stratified, seed);
    Ok((fit, validation))
}
