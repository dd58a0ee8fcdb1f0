//! Synthetic product catalogues with clustered image embeddings.
//!
//! Each row's embedding is drawn from an isotropic Gaussian around a mean
//! determined only by its `Color`; every other attribute is sampled
//! independently. The colour is therefore recoverable from the image and
//! from nothing else in the table, which makes these datasets a controlled
//! setting for cross-modal detection.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{AlignedDataset, ColumnSchema, Embeddings};
use crate::error::{Error, Result};
use crate::rng;

pub const COLORS: [&str; 6] = ["Blue", "Red", "Green", "Black", "White", "Yellow"];
pub const GENDERS: [&str; 4] = ["Men", "Women", "Boys", "Girls"];
pub const CATEGORIES: [(&str, &str); 6] = [
    ("Footwear", "Sandals"),
    ("Footwear", "Shoes"),
    ("Apparel", "Dress"),
    ("Apparel", "Tshirts"),
    ("Accessories", "Watches"),
    ("Accessories", "Bags"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub rows: usize,
    /// Number of distinct colours (embedding clusters).
    pub classes: usize,
    pub dim: usize,
    /// Distance of each cluster mean from the origin along its own axis,
    /// in units of the per-coordinate standard deviation.
    pub separation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rows: 400,
            classes: 4,
            dim: 8,
            separation: 10.0,
            seed: 0,
        }
    }
}

/// Builds a clean catalogue with columns
/// `Category, SubCategory, Gender, Color, Title`.
///
/// `Category`/`SubCategory` form a correlated group and `Title` is a
/// free-text propagation target of the form `"{Gender} {Color} {SubCategory}"`.
pub fn product_catalog(config: &SynthConfig) -> Result<AlignedDataset> {
    if !(2..=COLORS.len()).contains(&config.classes) {
        return Err(Error::InvalidConfig(format!(
            "classes must be in 2..={}",
            COLORS.len()
        )));
    }
    if config.dim < config.classes {
        return Err(Error::InvalidConfig("dim must be at least the class count".into()));
    }
    let mut rng = rng::seeded(config.seed);
    let mut rows = Vec::with_capacity(config.rows);
    let mut values = Vec::with_capacity(config.rows * config.dim);
    for i in 0..config.rows {
        let color = i % config.classes;
        let (category, sub) = CATEGORIES[rng.random_range(0..CATEGORIES.len())];
        let gender = GENDERS[rng.random_range(0..GENDERS.len())];
        rows.push(vec![
            category.to_string(),
            sub.to_string(),
            gender.to_string(),
            COLORS[color].to_string(),
            format!("{gender} {} {sub}", COLORS[color]),
        ]);
        for d in 0..config.dim {
            let noise: f64 = StandardNormal.sample(&mut rng);
            let mean = if d == color { config.separation } else { 0.0 };
            values.push((mean + noise) as f32);
        }
    }
    let columns = vec![
        ColumnSchema::categorical("Category").with_group("category"),
        ColumnSchema::categorical("SubCategory").with_group("category"),
        ColumnSchema::categorical("Gender"),
        ColumnSchema::categorical("Color"),
        ColumnSchema::free_text("Title"),
    ];
    AlignedDataset::new(columns, rows, Embeddings::new(config.rows, config.dim, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::column_stats;

    #[test]
    fn deterministic_and_balanced() {
        let cfg = SynthConfig {
            rows: 40,
            ..Default::default()
        };
        let a = product_catalog(&cfg).unwrap();
        assert_eq!(a, product_catalog(&cfg).unwrap());
        let s = column_stats(&a, "Color").unwrap();
        assert_eq!(s.distinct_count, 4);
        assert!(s.frequencies.values().all(|&c| c == 10));
        let title = a.column_index("Title").unwrap();
        assert!(a.cell(0, title).contains(a.cell(0, 3)));
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad = SynthConfig {
            classes: 1,
            ..Default::default()
        };
        assert!(product_catalog(&bad).is_err());
        let bad = SynthConfig {
            dim: 2,
            ..Default::default()
        };
        assert!(product_catalog(&bad).is_err());
    }
}
