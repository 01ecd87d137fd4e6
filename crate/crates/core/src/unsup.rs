//! Per-agenda outlier degrees and the unsupervised mean score.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agendas::{small_agendas, AgendaSpace};
use crate::context::{ClosureCounter, FeatureMask, FormalContext, ObjectMask};
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::scaling::Scaler;

/// RNG stream used for drawing gamma; splits use stream 0.
pub(crate) const GAMMA_STREAM: u64 = 1;

/// Outlier degree of an object whose closure holds `closure_size` objects:
/// `exp(-(gamma * size)^2)`. Equals 1 for an empty closure and decays to 0
/// as the closure grows.
#[inline]
pub fn degree(closure_size: usize, gamma: f64) -> f64 {
    let s = gamma * closure_size as f64;
    (-(s * s)).exp()
}

/// Mean of one row of per-agenda degrees.
pub fn score_unsup(row: &[f64]) -> Result<f64> {
    if row.is_empty() {
        return Err(Error::EmptyAgendaSpace);
    }
    Ok(row.iter().sum::<f64>() / row.len() as f64)
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

/// Draws gamma uniformly from `(0, 1]`.
pub fn draw_gamma(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GAMMA_STREAM);
    1.0 - rng.random::<f64>()
}

/// Row-major matrix of outlier degrees, one row per object and one column
/// per agenda.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    row_ids: Vec<String>,
    agenda_names: Vec<String>,
}

impl DegreeMatrix {
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        row_ids: Vec<String>,
        agenda_names: Vec<String>,
    ) -> Result<Self> {
        let cols = agenda_names.len();
        if row_ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                what: "degree matrix row ids",
                expected: rows.len(),
                found: row_ids.len(),
            });
        }
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    what: "degree matrix row",
                    expected: cols,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            values,
            row_ids,
            agenda_names,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_agendas(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, t: usize) -> f64 {
        self.values[r * self.cols + t]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn agenda_names(&self) -> &[String] {
        &self.agenda_names
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.row_ids.iter().position(|r| r == id)
    }
}

/// Hyper-parameters of the unsupervised detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnsupParams {
    pub bins: usize,
    pub alpha: usize,
    pub include_full: bool,
    /// Drawn uniformly from `(0, 1]` with `seed` when absent.
    pub gamma: Option<f64>,
    pub seed: u64,
}

impl UnsupParams {
    pub fn new(bins: usize) -> Self {
        Self {
            bins,
            alpha: 2,
            include_full: true,
            gamma: None,
            seed: 0,
        }
    }

    pub fn resolved_gamma(&self) -> Result<f64> {
        let g = self.gamma.unwrap_or_else(|| draw_gamma(self.seed));
        check_gamma(g)?;
        Ok(g)
    }
}

/// A fitted unsupervised detector: the binarized training objects, the
/// agenda space and gamma. `population` selects the training objects that
/// closures are counted over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnsupModel {
    context: FormalContext,
    scaler: Scaler,
    space: AgendaSpace,
    gamma: f64,
    population: ObjectMask,
    #[serde(skip)]
    masks: Vec<FeatureMask>,
}

impl UnsupModel {
    pub fn new(
        scaler: Scaler,
        train: &DataTable,
        space: AgendaSpace,
        gamma: f64,
        population: Option<ObjectMask>,
    ) -> Result<Self> {
        check_gamma(gamma)?;
        if space.is_empty() {
            return Err(Error::EmptyAgendaSpace);
        }
        if space.num_attributes() != scaler.num_attributes() {
            return Err(Error::ColumnMismatch {
                expected: scaler.num_attributes(),
                found: space.num_attributes(),
            });
        }
        let context = scaler.binarize(train)?;
        let population = population.unwrap_or_else(|| ObjectMask::all(context.num_objects()));
        if population.len() != context.num_objects() {
            return Err(Error::LengthMismatch {
                what: "population mask",
                expected: context.num_objects(),
                found: population.len(),
            });
        }
        let masks = space.feature_masks(scaler.bins());
        Ok(Self {
            context,
            scaler,
            space,
            gamma,
            population,
            masks,
        })
    }

    /// Restores derived state after deserialization.
    pub(crate) fn rehydrate(&mut self) -> Result<()> {
        self.context.validate()?;
        check_gamma(self.gamma)?;
        if self.context.num_features() != self.scaler.num_features()
            || self.space.num_attributes() != self.scaler.num_attributes()
            || self.population.len() != self.context.num_objects()
        {
            return Err(Error::ModelFormat("inconsistent dimensions".into()));
        }
        if let Some(a) = self.space.iter().find(|a| {
            a.attributes()
                .iter()
                .any(|&j| j >= self.scaler.num_attributes())
        }) {
            return Err(Error::ModelFormat(format!(
                "agenda {a} names a missing attribute"
            )));
        }
        self.masks = self.space.feature_masks(self.scaler.bins());
        Ok(())
    }

    pub fn context(&self) -> &FormalContext {
        &self.context
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn space(&self) -> &AgendaSpace {
        &self.space
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn population(&self) -> &ObjectMask {
        &self.population
    }

    pub fn masks(&self) -> &[FeatureMask] {
        &self.masks
    }

    /// The same model counting closures over a different population.
    pub fn with_population(&self, population: ObjectMask) -> Result<Self> {
        if population.len() != self.context.num_objects() {
            return Err(Error::LengthMismatch {
                what: "population mask",
                expected: self.context.num_objects(),
                found: population.len(),
            });
        }
        Ok(Self {
            population,
            ..self.clone()
        })
    }

    /// Degrees of arbitrary query intents against the model's population.
    pub fn degree_matrix(&self, queries: &[FeatureMask], ids: Vec<String>) -> Result<DegreeMatrix> {
        self.degree_matrix_with(queries, ids, &self.population)
    }

    pub fn degree_matrix_with(
        &self,
        queries: &[FeatureMask],
        ids: Vec<String>,
        population: &ObjectMask,
    ) -> Result<DegreeMatrix> {
        if ids.len() != queries.len() {
            return Err(Error::LengthMismatch {
                what: "query ids",
                expected: queries.len(),
                found: ids.len(),
            });
        }
        for q in queries {
            if q.len() != self.context.num_features() {
                return Err(Error::LengthMismatch {
                    what: "query intent",
                    expected: self.context.num_features(),
                    found: q.len(),
                });
            }
        }
        let gamma = self.gamma;
        let columns = self
            .masks
            .par_iter()
            .map(|mask| {
                let counter = ClosureCounter::new(&self.context, mask, population)?;
                queries
                    .iter()
                    .map(|q| counter.count(q).map(|c| degree(c, gamma)))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let cols = columns.len();
        let mut values = vec![0.0; queries.len() * cols];
        for (t, col) in columns.iter().enumerate() {
            for (q, &d) in col.iter().enumerate() {
                values[q * cols + t] = d;
            }
        }
        Ok(DegreeMatrix {
            rows: queries.len(),
            cols,
            values,
            row_ids: ids,
            agenda_names: self.space.iter().map(|a| a.name().to_string()).collect(),
        })
    }

    /// Degrees of the rows of `table`, binarized with the model's scaler.
    pub fn degree_matrix_for(&self, table: &DataTable) -> Result<DegreeMatrix> {
        let intents = self.scaler.intents(table)?;
        self.degree_matrix(&intents, table.record_ids().to_vec())
    }

    /// Degrees of the training objects themselves.
    pub fn training_degrees(&self) -> Result<DegreeMatrix> {
        let intents = (0..self.context.num_objects())
            .map(|a| self.context.query_intent(a))
            .collect::<Result<Vec<_>>>()?;
        self.degree_matrix(&intents, self.context.object_ids().to_vec())
    }

    pub fn scores(&self, degrees: &DegreeMatrix) -> Result<Vec<f64>> {
        degrees.rows().map(score_unsup).collect()
    }

    pub fn score_table(&self, table: &DataTable) -> Result<Vec<f64>> {
        self.scores(&self.degree_matrix_for(table)?)
    }
}

/// Fits the scaler on `table`, builds the agenda space of all agendas with at
/// most `alpha` attributes (plus the full agenda when requested) and counts
/// closures over every training object.
pub fn fit_unsup(table: &DataTable, params: &UnsupParams) -> Result<UnsupModel> {
    let scaler = Scaler::fit(table, params.bins)?;
    fit_unsup_with_scaler(scaler, table, params)
}

/// Like [`fit_unsup`] with a pre-fitted scaler.
pub fn fit_unsup_with_scaler(
    scaler: Scaler,
    table: &DataTable,
    params: &UnsupParams,
) -> Result<UnsupModel> {
    let gamma = params.resolved_gamma()?;
    let space = small_agendas(table.num_columns(), params.alpha, params.include_full)?
        .with_attribute_names(table.column_names())?;
    UnsupModel::new(scaler, table, space, gamma, None)
}
