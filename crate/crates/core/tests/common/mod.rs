#![allow(dead_code)]

use fca_outlier::{DataTable, FeatureMask, FormalContext, ObjectMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("x{j}")).collect()
}

/// Unit-variance Gaussian cloud over 4 attributes plus outliers pushed
/// 6 to 9 standard deviations away on a randomly chosen attribute pair,
/// with an independent random sign per coordinate.
pub fn planted_outliers(seed: u64, inliers: usize, outliers: usize) -> DataTable {
    let m = 4;
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(inliers + outliers);
    let mut labels = Vec::with_capacity(inliers + outliers);
    for _ in 0..inliers {
        rows.push((0..m).map(|_| normal(&mut r)).collect());
        labels.push(false);
    }
    for _ in 0..outliers {
        let mut row: Vec<f64> = (0..m).map(|_| normal(&mut r)).collect();
        let a = r.random_range(0..m);
        let mut b = r.random_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        for j in [a, b] {
            let shift = r.random_range(6.0..9.0);
            row[j] = if r.random_bool(0.5) { shift } else { -shift };
        }
        rows.push(row);
        labels.push(true);
    }
    DataTable::from_rows(names(m), rows, Some(labels)).unwrap()
}

/// Eight attributes. Inliers satisfy x1 ≈ x0; outliers satisfy x1 ≈ -x0
/// with |x0| in [1, 2], so neither coordinate is unusual on its own. The
/// remaining six attributes are independent noise for every record.
pub fn pair_only_outliers(seed: u64, inliers: usize, outliers: usize) -> DataTable {
    let m = 8;
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(inliers + outliers);
    let mut labels = Vec::with_capacity(inliers + outliers);
    for i in 0..inliers + outliers {
        let is_outlier = i >= inliers;
        let mut row: Vec<f64> = (0..m).map(|_| normal(&mut r)).collect();
        if is_outlier {
            let mag = r.random_range(1.0..2.0);
            let x0 = if r.random_bool(0.5) { mag } else { -mag };
            row[0] = x0;
            row[1] = -x0 + 0.1 * normal(&mut r);
        } else {
            row[1] = row[0] + 0.1 * normal(&mut r);
        }
        rows.push(row);
        labels.push(is_outlier);
    }
    DataTable::from_rows(names(m), rows, Some(labels)).unwrap()
}

/// Random context with the given incidence density.
pub fn random_context(
    r: &mut ChaCha8Rng,
    objects: usize,
    features: usize,
    density: f64,
) -> FormalContext {
    let rows: Vec<Vec<usize>> = (0..objects)
        .map(|_| (0..features).filter(|_| r.random_bool(density)).collect())
        .collect();
    FormalContext::build(
        rows,
        features,
        (0..objects).map(|i| i.to_string()).collect(),
        (0..features).map(|i| format!("f{i}")).collect(),
    )
    .unwrap()
}

/// Objects of `population` whose intent contains `intent ∩ agenda`, by a
/// direct scan of the relation.
pub fn brute_closure(
    ctx: &FormalContext,
    intent: &FeatureMask,
    agenda: &FeatureMask,
    population: &ObjectMask,
) -> Vec<usize> {
    let required: Vec<usize> = (0..ctx.num_features())
        .filter(|&x| intent.get(x) && agenda.get(x))
        .collect();
    (0..ctx.num_objects())
        .filter(|&b| population.get(b))
        .filter(|&b| required.iter().all(|&x| ctx.incidence(b, x)))
        .collect()
}

/// Features shared by every object of `objects`, restricted to `agenda`.
pub fn brute_common_features(
    ctx: &FormalContext,
    objects: &[usize],
    agenda: &FeatureMask,
) -> FeatureMask {
    FeatureMask::from_indices(
        ctx.num_features(),
        (0..ctx.num_features())
            .filter(|&x| agenda.get(x))
            .filter(|&x| objects.iter().all(|&b| ctx.incidence(b, x))),
    )
}
