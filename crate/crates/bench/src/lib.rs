//! Synthetic inputs shared by the benchmarks.

use fca_outlier::DataTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `rows` records of `columns` uniform attributes in `[0, 1)`; every 50th
/// record is pushed to the far corner and labelled an outlier.
pub fn uniform_table(rows: usize, columns: usize, seed: u64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for i in 0..rows {
        let outlier = i % 50 == 49;
        let row = (0..columns)
            .map(|_| {
                let v: f64 = rng.random();
                if outlier {
                    3.0 + v
                } else {
                    v
                }
            })
            .collect();
        data.push(row);
        labels.push(outlier);
    }
    let names = (0..columns).map(|j| format!("x{j}")).collect();
    DataTable::from_rows(names, data, Some(labels)).expect("rectangular table")
}
