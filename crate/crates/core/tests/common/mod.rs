#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use rand::Rng;
use xmodal_core::rng::{seeded, SplitMix64};
use xmodal_core::synth::{product_catalog, SynthConfig};
use xmodal_core::{
    inject_errors, AlignedDataset, CorruptionConfig, ErrorMask, LabeledSet, ProbabilityMatrix,
    ValuationInput,
};

pub fn rng(seed: u64) -> SplitMix64 {
    seeded(seed)
}

/// Random valuation instance with `1..=max_dirty` dirty tuples on a small
/// integer grid (so distance ties occur).
pub fn random_valuation(
    rng: &mut SplitMix64,
    max_dirty: usize,
    max_classes: usize,
    max_clean: usize,
) -> ValuationInput {
    let dim = rng.random_range(1..=3);
    let classes = rng.random_range(1..=max_classes);
    let set = |rng: &mut SplitMix64, n: usize| {
        let features = (0..n)
            .map(|_| (0..dim).map(|_| f64::from(rng.random_range(-3..=3))).collect())
            .collect();
        let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
        LabeledSet::new(features, labels).unwrap()
    };
    let n_dirty = rng.random_range(1..=max_dirty);
    let dirty = set(rng, n_dirty);
    let n_clean = rng.random_range(1..=max_clean);
    let clean = set(rng, n_clean);
    ValuationInput::new(dirty, clean).unwrap()
}

/// Shapley values as the average marginal contribution over all `N!`
/// orderings of the dirty set, with the 1-NN utility evaluated directly.
pub fn permutation_shapley(input: &ValuationInput) -> Vec<f64> {
    let dirty = input.dirty();
    let clean = input.clean();
    let n = dirty.len();
    let utility = |members: &[usize]| -> f64 {
        if members.is_empty() {
            return 0.0;
        }
        let mut hits = 0.0;
        for (p, &label) in clean.features.iter().zip(&clean.labels) {
            let mut best: Option<(f64, usize)> = None;
            for &i in members {
                let d: f64 = dirty.features[i]
                    .iter()
                    .zip(p)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let better = match best {
                    None => true,
                    Some((bd, bi)) => d < bd || (d == bd && i < bi),
                };
                if better {
                    best = Some((d, i));
                }
            }
            if dirty.labels[best.unwrap().1] == label {
                hits += 1.0;
            }
        }
        hits / clean.len() as f64
    };
    let mut values = vec![0.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0usize;
    permute(&mut perm, 0, &mut |order| {
        count += 1;
        let mut prefix = Vec::with_capacity(n);
        let mut prev = 0.0;
        for &i in order {
            prefix.push(i);
            let u = utility(&prefix);
            values[i] += u - prev;
            prev = u;
        }
    });
    values.iter().map(|v| v / count as f64).collect()
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Random row-stochastic matrix where every class has at least one label.
pub fn random_probabilities(rng: &mut SplitMix64, max_rows: usize, max_classes: usize) -> ProbabilityMatrix {
    let m = rng.random_range(2..=max_classes);
    let n = rng.random_range(m..=max_rows);
    let mut labels: Vec<usize> = (0..n).map(|i| if i < m { i } else { rng.random_range(0..m) }).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let rows = (0..n)
        .map(|_| {
            // Coarse grid values make threshold ties likely.
            let raw: Vec<f64> = (0..m).map(|_| f64::from(rng.random_range(0..=4u8))).collect();
            let total: f64 = raw.iter().sum();
            if total == 0.0 {
                vec![1.0 / m as f64; m]
            } else {
                raw.iter().map(|v| v / total).collect()
            }
        })
        .collect();
    ProbabilityMatrix::new(rows, (0..m).map(|j| format!("c{j}")).collect(), labels).unwrap()
}

/// Confident joint by a plain double loop over rows and classes.
pub fn naive_confident_joint(p: &ProbabilityMatrix) -> Vec<Vec<usize>> {
    let n = p.n_rows();
    let m = p.n_classes();
    let mut t = vec![0.0; m];
    for j in 0..m {
        let mut sum = 0.0;
        let mut count = 0.0;
        for x in 0..n {
            if p.label(x) == j {
                sum += p.get(x, j);
                count += 1.0;
            }
        }
        t[j] = sum / count;
    }
    let mut c = vec![vec![0; m]; m];
    for x in 0..n {
        let mut best: Option<usize> = None;
        for j in 0..m {
            if p.get(x, j) >= t[j] && best.is_none_or(|b| p.get(x, j) > p.get(x, b)) {
                best = Some(j);
            }
        }
        if let Some(b) = best {
            c[p.label(x)][b] += 1;
        }
    }
    c
}

pub fn catalog(rows: usize, seed: u64) -> AlignedDataset {
    product_catalog(&SynthConfig {
        rows,
        seed,
        ..Default::default()
    })
    .unwrap()
}

/// Clean catalogue and a copy with half of its `Color` cells corrupted.
pub fn corrupted_colors(rows: usize, seed: u64) -> (AlignedDataset, AlignedDataset, ErrorMask) {
    let clean = catalog(rows, seed);
    let cfg = CorruptionConfig::new(0.5, seed, vec!["Color".into()])
        .with_propagation(vec!["Title".into()]);
    let (dirty, mask) = inject_errors(&clean, &cfg).unwrap();
    (clean, dirty, mask)
}

pub fn set(rows: &[usize]) -> BTreeSet<usize> {
    rows.iter().copied().collect()
}
