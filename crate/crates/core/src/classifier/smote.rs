//! Synthetic minority oversampling (SMOTE).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::Dataset;
use crate::{Error, Result};

/// Parents of one synthetic row: indices into the input dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticParent {
    pub class: usize,
    pub seed_row: usize,
    pub neighbor_row: usize,
}

/// SMOTE output with per-synthetic-row provenance. The original rows are a
/// prefix of `data` in their original order; `parents[i]` describes
/// synthetic row `original_count + i`.
#[derive(Debug, Clone)]
pub struct SmoteOutput {
    pub data: Dataset,
    pub parents: Vec<SyntheticParent>,
}

/// Oversamples every minority class up to the majority count.
///
/// Each synthetic point is `x_i + u * (x_nn - x_i)` with `u` uniform on
/// `[0, 1)` and `x_nn` one of the `k_neighbors` same-class Euclidean nearest
/// neighbors of `x_i` (capped at class size - 1). Deterministic given the
/// seed.
pub fn smote(data: &Dataset, k_neighbors: usize, seed: u64) -> Result<Dataset> {
    smote_detailed(data, k_neighbors, seed).map(|out| out.data)
}

pub fn smote_detailed(data: &Dataset, k_neighbors: usize, seed: u64) -> Result<SmoteOutput> {
    if k_neighbors == 0 {
        return Err(Error::Validation("k_neighbors must be positive".into()));
    }
    let counts = data.class_counts();
    let majority = *counts.iter().max().expect("at least one class");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = data.features.clone();
    let mut labels = data.labels.clone();
    let mut parents = Vec::new();

    for (class, &count) in counts.iter().enumerate() {
        if count == majority || count == 0 {
            continue;
        }
        if count < 2 {
            return Err(Error::Validation(format!(
                "class {:?} has a single sample; SMOTE has no neighbor to interpolate toward",
                data.class_names[class]
            )));
        }
        let rows: Vec<usize> = (0..data.num_rows())
            .filter(|&i| data.labels[i] == class)
            .collect();
        let k = k_neighbors.min(count - 1);

        // same-class nearest neighbors per row, ties broken by row index
        let neighbors: Vec<Vec<usize>> = rows
            .iter()
            .map(|&i| {
                let mut others: Vec<usize> = rows.iter().copied().filter(|&j| j != i).collect();
                others.sort_by(|&a, &b| {
                    squared_distance(&data.features[i], &data.features[a])
                        .total_cmp(&squared_distance(&data.features[i], &data.features[b]))
                        .then(a.cmp(&b))
                });
                others.truncate(k);
                others
            })
            .collect();

        for j in 0..(majority - count) {
            let seed_pos = j % count;
            let seed_row = rows[seed_pos];
            let neighbor_row = neighbors[seed_pos][rng.gen_range(0..k)];
            let u: f64 = rng.gen_range(0.0..1.0);
            let point: Vec<f64> = data.features[seed_row]
                .iter()
                .zip(&data.features[neighbor_row])
                .map(|(a, b)| a + u * (b - a))
                .collect();
            features.push(point);
            labels.push(class);
            parents.push(SyntheticParent {
                class,
                seed_row,
                neighbor_row,
            });
        }
    }

    let data = Dataset::new(features, labels, data.class_names.clone())?;
    Ok(SmoteOutput { data, parents })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Residual of the best convex-combination explanation of `point` between
/// `a` and `b`: reconstructs `u` by projection and measures the gap.
pub fn convex_residual(point: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let denom: f64 = diff.iter().map(|d| d * d).sum();
    let u = if denom == 0.0 {
        0.0
    } else {
        point
            .iter()
            .zip(a)
            .zip(&diff)
            .map(|((p, x), d)| (p - x) * d)
            .sum::<f64>()
            / denom
    };
    point
        .iter()
        .zip(a)
        .zip(&diff)
        .map(|((p, x), d)| {
            let err = p - (x + u * d);
            err * err
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(counts: &[usize], dim: usize, seed: u64) -> Dataset {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (class, &count) in counts.iter().enumerate() {
            for _ in 0..count {
                features.push((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
                labels.push(class);
            }
        }
        let class_names = (0..counts.len()).map(|c| format!("class{c}")).collect();
        Dataset::new(features, labels, class_names).unwrap()
    }

    #[test]
    fn balanced_data_passes_through_unchanged() {
        let data = dataset(&[6, 6, 6], 3, 1);
        let out = smote(&data, 5, 9).unwrap();
        assert_eq!(out, data);
    }

    #[test]
    fn minority_class_is_filled_to_the_majority_count() {
        let data = dataset(&[10, 5], 4, 2);
        let out = smote(&data, 3, 9).unwrap();
        assert_eq!(out.class_counts(), vec![10, 10]);
        // originals are a prefix, in original order
        assert_eq!(&out.features[..15], &data.features[..]);
        assert_eq!(&out.labels[..15], &data.labels[..]);
    }

    #[test]
    fn synthetic_points_are_convex_combinations_of_their_parents() {
        let data = dataset(&[12, 4, 7], 5, 3);
        let out = smote_detailed(&data, 4, 9).unwrap();
        assert!(!out.parents.is_empty());
        for (offset, parent) in out.parents.iter().enumerate() {
            let point = &out.data.features[data.num_rows() + offset];
            let a = &data.features[parent.seed_row];
            let b = &data.features[parent.neighbor_row];
            assert_eq!(data.labels[parent.seed_row], parent.class);
            assert_eq!(data.labels[parent.neighbor_row], parent.class);
            assert!(convex_residual(point, a, b) < 1e-9);
        }
    }

    #[test]
    fn singleton_class_is_an_error() {
        let data = dataset(&[5, 1], 3, 4);
        let err = smote(&data, 5, 9).unwrap_err();
        assert_eq!(err.category(), "validation");
    }

    #[test]
    fn smote_is_deterministic_given_the_seed() {
        let data = dataset(&[9, 4], 3, 5);
        let a = smote(&data, 3, 77).unwrap();
        let b = smote(&data, 3, 77).unwrap();
        assert_eq!(a, b);
        let c = smote(&data, 3, 78).unwrap();
        assert_ne!(a, c);
    }
}
