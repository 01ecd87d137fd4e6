//! Interval scaling: each numeric attribute is cut into `bins` equal-width
//! intervals between its training minimum and maximum, and every interval
//! becomes one binary feature.
//!
//! Attribute `j` owns the feature block `j * bins .. (j + 1) * bins`. Bins are
//! half-open except the last, which also contains the maximum. Values seen
//! outside the fitted range clamp to the edge bins.

use serde::{Deserialize, Serialize};

use crate::context::{FeatureMask, FormalContext};
use crate::data::DataTable;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    column_names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    bins: usize,
}

impl Scaler {
    /// Fits per-attribute bounds on the rows of `table`.
    pub fn fit(table: &DataTable, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::ZeroBins);
        }
        if table.num_rows() == 0 {
            return Err(Error::EmptyTable);
        }
        let m = table.num_columns();
        let mut lower = vec![f64::INFINITY; m];
        let mut upper = vec![f64::NEG_INFINITY; m];
        for (r, row) in table.rows().iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: r,
                        column: table.column_names()[j].clone(),
                    });
                }
                lower[j] = lower[j].min(v);
                upper[j] = upper[j].max(v);
            }
        }
        Ok(Self {
            column_names: table.column_names().to_vec(),
            lower,
            upper,
            bins,
        })
    }

    /// Scaler with explicit bounds.
    pub fn from_bounds(
        column_names: Vec<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        bins: usize,
    ) -> Result<Self> {
        if bins == 0 {
            return Err(Error::ZeroBins);
        }
        for (what, v) in [("lower bounds", &lower), ("upper bounds", &upper)] {
            if v.len() != column_names.len() {
                return Err(Error::LengthMismatch {
                    what,
                    expected: column_names.len(),
                    found: v.len(),
                });
            }
        }
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidConfig(format!(
                    "attribute {:?} has invalid bounds [{lo}, {hi}]",
                    column_names[j]
                )));
            }
        }
        Ok(Self {
            column_names,
            lower,
            upper,
            bins,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn num_attributes(&self) -> usize {
        self.column_names.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_attributes() * self.bins
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn bounds(&self, attribute: usize) -> (f64, f64) {
        (self.lower[attribute], self.upper[attribute])
    }

    /// First feature index of an attribute's block.
    pub fn base(&self, attribute: usize) -> usize {
        attribute * self.bins
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn bin_index(&self, attribute: usize, value: f64) -> Result<usize> {
        if attribute >= self.num_attributes() {
            return Err(Error::IndexOutOfRange {
                what: "attribute",
                index: attribute,
                bound: self.num_attributes(),
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFinite {
                row: 0,
                column: self.column_names[attribute].clone(),
            });
        }
        Ok(self.bin_unchecked(attribute, value))
    }

    fn bin_unchecked(&self, attribute: usize, value: f64) -> usize {
        let (lo, hi) = (self.lower[attribute], self.upper[attribute]);
        if hi <= lo || value <= lo {
            return 0;
        }
        let pos = (self.bins as f64 * (value - lo) / (hi - lo)).floor();
        (pos as usize).min(self.bins - 1)
    }

    /// Feature set of one record: exactly one feature per attribute.
    pub fn intent(&self, row: &[f64]) -> Result<FeatureMask> {
        Ok(FeatureMask::from_indices(
            self.num_features(),
            self.feature_indices(row, 0)?,
        ))
    }

    fn feature_indices(&self, row: &[f64], row_number: usize) -> Result<Vec<usize>> {
        if row.len() != self.num_attributes() {
            return Err(Error::ColumnMismatch {
                expected: self.num_attributes(),
                found: row.len(),
            });
        }
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: row_number,
                        column: self.column_names[j].clone(),
                    });
                }
                Ok(self.base(j) + self.bin_unchecked(j, v))
            })
            .collect()
    }

    /// Intents of every row of `table`.
    pub fn intents(&self, table: &DataTable) -> Result<Vec<FeatureMask>> {
        self.check_columns(table)?;
        table
            .rows()
            .iter()
            .enumerate()
            .map(|(r, row)| {
                Ok(FeatureMask::from_indices(
                    self.num_features(),
                    self.feature_indices(row, r)?,
                ))
            })
            .collect()
    }

    /// Converts a table into a formal context, one object per row.
    pub fn binarize(&self, table: &DataTable) -> Result<FormalContext> {
        self.check_columns(table)?;
        let rows = table
            .rows()
            .iter()
            .enumerate()
            .map(|(r, row)| self.feature_indices(row, r))
            .collect::<Result<Vec<_>>>()?;
        FormalContext::build(
            rows,
            self.num_features(),
            table.record_ids().to_vec(),
            self.feature_names(),
        )
    }

    fn check_columns(&self, table: &DataTable) -> Result<()> {
        if table.num_columns() != self.num_attributes() {
            return Err(Error::ColumnMismatch {
                expected: self.num_attributes(),
                found: table.num_columns(),
            });
        }
        Ok(())
    }

    /// Labels such as `x1∈[2,4)`; the last bin of each attribute is closed.
    pub fn feature_names(&self) -> Vec<String> {
        let n = self.bins;
        let mut names = Vec::with_capacity(self.num_features());
        for (j, name) in self.column_names.iter().enumerate() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let width = (hi - lo) / n as f64;
            for i in 0..n {
                let a = lo + i as f64 * width;
                if i + 1 == n {
                    names.push(format!("{name}∈[{a},{hi}]"));
                } else {
                    names.push(format!("{name}∈[{a},{})", lo + (i + 1) as f64 * width));
                }
            }
        }
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(cols: &[&str], rows: Vec<Vec<f64>>) -> DataTable {
        DataTable::from_rows(cols.iter().map(|c| c.to_string()).collect(), rows, None).unwrap()
    }

    #[test]
    fn fit_bounds() {
        let s = Scaler::fit(&table(&["x"], vec![vec![0.0], vec![10.0]]), 5).unwrap();
        assert_eq!(s.bounds(0), (0.0, 10.0));
        let s = Scaler::fit(&table(&["x"], vec![vec![3.0]; 3]), 5).unwrap();
        assert_eq!(s.bounds(0), (3.0, 3.0));
        let s = Scaler::fit(&table(&["x", "y"], vec![vec![0.0, 1.0]]), 4).unwrap();
        assert_eq!((s.base(0), s.base(1)), (0, 4));
        assert_eq!(s.num_features(), 8);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            Scaler::fit(&table(&["x"], vec![]), 5),
            Err(Error::EmptyTable)
        ));
        assert!(matches!(
            Scaler::fit(&table(&["x"], vec![vec![1.0]]), 0),
            Err(Error::ZeroBins)
        ));
        let r = Scaler::fit(
            &table(&["x", "y"], vec![vec![1.0, 2.0], vec![f64::NAN, 0.0]]),
            3,
        );
        assert!(matches!(r, Err(Error::NonFinite { row: 1, .. })));
        let r = Scaler::fit(&table(&["x"], vec![vec![f64::INFINITY]]), 3);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn bin_index_examples() {
        let s = Scaler::from_bounds(vec!["x".into()], vec![0.0], vec![10.0], 5).unwrap();
        assert_eq!(s.bin_index(0, 3.0).unwrap(), 1);
        assert_eq!(s.bin_index(0, 10.0).unwrap(), 4);
        assert_eq!(s.bin_index(0, -7.0).unwrap(), 0);
        assert_eq!(s.bin_index(0, 25.0).unwrap(), 4);
        assert!(matches!(
            s.bin_index(0, f64::NAN),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            s.bin_index(1, 0.0),
            Err(Error::IndexOutOfRange { .. })
        ));
        let c = Scaler::from_bounds(vec!["x".into()], vec![3.0], vec![3.0], 5).unwrap();
        assert_eq!(c.bin_index(0, 3.0).unwrap(), 0);
        assert_eq!(c.bin_index(0, 100.0).unwrap(), 0);
    }

    #[test]
    fn binarize_examples() {
        let s = Scaler::from_bounds(vec!["x".into()], vec![0.0], vec![10.0], 5).unwrap();
        let ctx = s.binarize(&table(&["x"], vec![vec![3.0]])).unwrap();
        assert_eq!(ctx.intent(0).iter_ones().collect::<Vec<_>>(), vec![1]);

        let s2 = Scaler::from_bounds(
            vec!["x".into(), "y".into()],
            vec![0.0, 0.0],
            vec![10.0, 10.0],
            5,
        )
        .unwrap();
        let ctx = s2
            .binarize(&table(&["x", "y"], vec![vec![3.0, 10.0]; 2]))
            .unwrap();
        assert_eq!(ctx.intent(0).iter_ones().collect::<Vec<_>>(), vec![1, 9]);
        assert_eq!(ctx.intent(0), ctx.intent(1));
        assert_eq!(ctx.feature_names()[1], "x∈[2,4)");
        assert_eq!(ctx.feature_names()[9], "y∈[8,10]");

        let r = s2.binarize(&table(&["x"], vec![vec![1.0]]));
        assert!(matches!(
            r,
            Err(Error::ColumnMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    fn arb_table() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
        (1usize..4, 1usize..30, 1usize..25).prop_flat_map(|(m, n, bins)| {
            (
                proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, m), n),
                Just(bins),
            )
        })
    }

    proptest! {
        #[test]
        fn one_hot_per_attribute((rows, bins) in arb_table()) {
            let m = rows[0].len();
            let names: Vec<String> = (0..m).map(|j| format!("x{j}")).collect();
            let t = DataTable::from_rows(names, rows, None).unwrap();
            let s = Scaler::fit(&t, bins).unwrap();
            let ctx = s.binarize(&t).unwrap();
            for a in 0..ctx.num_objects() {
                let ones: Vec<usize> = ctx.intent(a).iter_ones().collect();
                prop_assert_eq!(ones.len(), m);
                for (j, x) in ones.iter().enumerate() {
                    prop_assert_eq!(x / bins, j);
                }
            }
        }

        #[test]
        fn training_values_need_no_clamping((rows, bins) in arb_table()) {
            let m = rows[0].len();
            let names: Vec<String> = (0..m).map(|j| format!("x{j}")).collect();
            let t = DataTable::from_rows(names, rows.clone(), None).unwrap();
            let s = Scaler::fit(&t, bins).unwrap();
            for row in &rows {
                for (j, &v) in row.iter().enumerate() {
                    let (lo, hi) = s.bounds(j);
                    prop_assert!(lo <= v && v <= hi);
                    if hi > lo && v < hi {
                        let raw = (bins as f64 * (v - lo) / (hi - lo)).floor();
                        prop_assert!(raw >= 0.0 && (raw as usize) < bins);
                    }
                }
            }
        }

        #[test]
        fn bin_index_is_monotone(a in -50f64..50.0, b in -50f64..50.0, bins in 1usize..40) {
            let s = Scaler::from_bounds(vec!["x".into()], vec![-20.0], vec![30.0], bins).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(s.bin_index(0, lo).unwrap() <= s.bin_index(0, hi).unwrap());
        }
    }
}
