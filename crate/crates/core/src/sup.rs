//! Supervised detector: agenda weights learned by full-batch gradient
//! descent on a class-balanced squared loss, scored with the weighted mean
//! of per-agenda degrees.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agendas::{adaptive_search, small_agendas, AdaptiveOutcome, AgendaSpace, FuzzyAgenda};
use crate::context::{FeatureMask, ObjectMask};
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::scaling::Scaler;
use crate::unsup::{DegreeMatrix, UnsupModel, UnsupParams};

/// RNG stream for weight initialization.
const INIT_STREAM: u64 = 2;

/// Which class is pulled towards a score of 0.
///
/// `Literal` penalizes `outdeg²` on outliers and `(1 - outdeg)² / bal` on
/// inliers. `Swapped` penalizes `(1 - outdeg)²` on outliers and
/// `outdeg² / bal` on inliers, so outliers are pushed towards high scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossOrientation {
    #[default]
    Literal,
    Swapped,
}

impl LossOrientation {
    /// `(target, coefficient)` of one training object's squared error.
    #[inline]
    fn term(self, is_outlier: bool, bal: f64) -> (f64, f64) {
        match (self, is_outlier) {
            (LossOrientation::Literal, true) => (0.0, 1.0),
            (LossOrientation::Literal, false) => (1.0, 1.0 / bal),
            (LossOrientation::Swapped, true) => (1.0, 1.0),
            (LossOrientation::Swapped, false) => (0.0, 1.0 / bal),
        }
    }
}

impl fmt::Display for LossOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossOrientation::Literal => "literal",
            LossOrientation::Swapped => "swapped",
        })
    }
}

impl FromStr for LossOrientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(LossOrientation::Literal),
            "swapped" => Ok(LossOrientation::Swapped),
            other => Err(Error::InvalidConfig(format!(
                "unknown loss orientation {other:?}"
            ))),
        }
    }
}

/// `Σ w` when it is at least `eps` in magnitude, `±eps` otherwise.
#[inline]
pub fn guarded_denominator(weight_sum: f64, eps: f64) -> f64 {
    if weight_sum.abs() >= eps {
        weight_sum
    } else if weight_sum < 0.0 {
        -eps
    } else {
        eps
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

/// `Σ w_t d_t / Σ w_t` with the denominator guarded by `eps`. Not clipped.
pub fn weighted_score(degrees: &[f64], weights: &[f64], eps: f64) -> Result<f64> {
    check_len("weights", degrees.len(), weights.len())?;
    Ok(ScaledWeights::new(weights, eps).score(degrees))
}

/// Weights divided by their largest magnitude. The ratio is unchanged, and
/// a constant weight vector becomes all ones, so its score is bit-for-bit
/// the plain mean.
pub(crate) struct ScaledWeights {
    unit: Vec<f64>,
    /// Denominator of the unit weights, or `±eps / scale` in the guard band.
    den: f64,
}

impl ScaledWeights {
    pub(crate) fn new(weights: &[f64], eps: f64) -> Self {
        let scale = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        if scale == 0.0 {
            return Self {
                unit: vec![0.0; weights.len()],
                den: eps,
            };
        }
        let unit: Vec<f64> = weights.iter().map(|w| w / scale).collect();
        let raw: f64 = weights.iter().sum();
        let den = if raw.abs() >= eps {
            unit.iter().sum()
        } else {
            guarded_denominator(raw, eps) / scale
        };
        Self { unit, den }
    }

    #[inline]
    pub(crate) fn score(&self, degrees: &[f64]) -> f64 {
        let num: f64 = degrees.iter().zip(&self.unit).map(|(d, u)| u * d).sum();
        num / self.den
    }
}

/// Training-set size over training outlier count.
pub fn compute_bal(labels: &[bool]) -> Result<f64> {
    let outliers = labels.iter().filter(|&&l| l).count();
    if outliers == 0 {
        return Err(Error::NoOutliersInTrain);
    }
    Ok(labels.len() as f64 / outliers as f64)
}

pub fn loss(
    scores: &[f64],
    labels: &[bool],
    bal: f64,
    orientation: LossOrientation,
) -> Result<f64> {
    check_len("labels", scores.len(), labels.len())?;
    if bal.is_nan() || bal <= 0.0 {
        return Err(Error::NonPositiveBal(bal));
    }
    Ok(scores
        .iter()
        .zip(labels)
        .map(|(&o, &l)| {
            let (target, c) = orientation.term(l, bal);
            c * (o - target) * (o - target)
        })
        .sum())
}

/// Gradient of the loss of the weighted-mean scores with respect to the
/// agenda weights.
///
/// With `S = Σ w`, `∂o_a/∂w_t = (d_{a,t} - o_a) / S`. Inside the guard band
/// `|Σ w| < eps` the denominator is the constant `±eps` and the derivative
/// is `d_{a,t} / S`.
pub fn loss_gradient(
    degrees: &DegreeMatrix,
    weights: &[f64],
    labels: &[bool],
    bal: f64,
    eps: f64,
    orientation: LossOrientation,
) -> Result<Vec<f64>> {
    check_len("weights", degrees.num_agendas(), weights.len())?;
    check_len("labels", degrees.num_rows(), labels.len())?;
    if bal.is_nan() || bal <= 0.0 {
        return Err(Error::NonPositiveBal(bal));
    }
    let mut grad = vec![0.0; weights.len()];
    gradient_into(degrees, weights, labels, bal, eps, orientation, &mut grad);
    Ok(grad)
}

/// Fills `grad` and returns the loss at `weights`.
fn gradient_into(
    degrees: &DegreeMatrix,
    weights: &[f64],
    labels: &[bool],
    bal: f64,
    eps: f64,
    orientation: LossOrientation,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let den: f64 = weights.iter().sum();
    let s = guarded_denominator(den, eps);
    let guarded = den.abs() < eps;
    let mut total = 0.0;
    for (row, &label) in degrees.rows().zip(labels) {
        let num: f64 = row.iter().zip(weights).map(|(d, w)| w * d).sum();
        let o = num / s;
        let (target, c) = orientation.term(label, bal);
        total += c * (o - target) * (o - target);
        let r = 2.0 * c * (o - target) / s;
        if guarded {
            for (g, &d) in grad.iter_mut().zip(row) {
                *g += r * d;
            }
        } else {
            for (g, &d) in grad.iter_mut().zip(row) {
                *g += r * (d - o);
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Initial weights are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub denominator_epsilon: f64,
    pub orientation: LossOrientation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.05,
            seed: 0,
            init_scale: 1.0,
            denominator_epsilon: 1e-8,
            orientation: LossOrientation::Literal,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "init scale {} must be positive",
                self.init_scale
            )));
        }
        if self.denominator_epsilon.is_nan() || self.denominator_epsilon <= 0.0 {
            return Err(Error::InvalidConfig(
                "denominator epsilon must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn initial_weights(&self, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(INIT_STREAM);
        (0..len)
            .map(|_| rng.random_range(-self.init_scale..=self.init_scale))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub weights: Vec<f64>,
    /// Loss of the predictions evaluated at the start of each epoch.
    pub loss_trace: Vec<f64>,
}

/// Gradient descent over precomputed training degrees.
pub fn train(
    degrees: &DegreeMatrix,
    labels: &[bool],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    check_len("labels", degrees.num_rows(), labels.len())?;
    if degrees.num_agendas() == 0 {
        return Err(Error::EmptyAgendaSpace);
    }
    let bal = compute_bal(labels)?;
    if labels.iter().all(|&l| l) {
        return Err(Error::DegenerateLabels);
    }
    let mut weights = config.initial_weights(degrees.num_agendas());
    let mut grad = vec![0.0; weights.len()];
    let mut loss_trace = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let l = gradient_into(
            degrees,
            &weights,
            labels,
            bal,
            config.denominator_epsilon,
            config.orientation,
            &mut grad,
        );
        loss_trace.push(l);
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= config.learning_rate * g;
        }
    }
    Ok(TrainOutcome {
        weights,
        loss_trace,
    })
}

/// A supervised detector. Its inner model counts closures over the training
/// inliers only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupModel {
    unsup: UnsupModel,
    weights: FuzzyAgenda,
    config: TrainConfig,
    loss_trace: Vec<f64>,
}

impl SupModel {
    pub(crate) fn rehydrate(&mut self) -> Result<()> {
        self.unsup.rehydrate()?;
        self.config.validate()?;
        if self.weights.len() != self.unsup.space().len() {
            return Err(Error::ModelFormat(
                "weight vector does not match agenda space".into(),
            ));
        }
        Ok(())
    }

    pub fn unsup(&self) -> &UnsupModel {
        &self.unsup
    }

    pub fn weights(&self) -> &FuzzyAgenda {
        &self.weights
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }

    pub fn eps(&self) -> f64 {
        self.config.denominator_epsilon
    }

    pub fn scores(&self, degrees: &DegreeMatrix) -> Result<Vec<f64>> {
        check_len("weights", degrees.num_agendas(), self.weights.len())?;
        let scaled = ScaledWeights::new(self.weights.weights(), self.eps());
        Ok(degrees.rows().map(|row| scaled.score(row)).collect())
    }

    pub fn predict(&self, queries: &[FeatureMask], ids: Vec<String>) -> Result<Vec<f64>> {
        self.scores(&self.unsup.degree_matrix(queries, ids)?)
    }

    pub fn score_table(&self, table: &DataTable) -> Result<Vec<f64>> {
        self.scores(&self.unsup.degree_matrix_for(table)?)
    }

    /// Loss trace as `epoch,loss` CSV, epochs counted from 1.
    pub fn loss_trace_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (e, l) in self.loss_trace.iter().enumerate() {
            out.push_str(&format!("{},{}\n", e + 1, l));
        }
        out
    }
}

fn inlier_population(labels: &[bool]) -> ObjectMask {
    ObjectMask::from_indices(
        labels.len(),
        labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| !l)
            .map(|(i, _)| i),
    )
}

fn labels_of(table: &DataTable) -> Result<&[bool]> {
    table
        .labels()
        .ok_or_else(|| Error::InvalidConfig("supervised training needs labels".into()))
}

/// Trains on `train` with a given scaler, agenda space and gamma.
pub fn fit_sup_with(
    scaler: Scaler,
    train_table: &DataTable,
    space: AgendaSpace,
    gamma: f64,
    config: &TrainConfig,
) -> Result<SupModel> {
    config.validate()?;
    let labels = labels_of(train_table)?;
    compute_bal(labels)?;
    if labels.iter().all(|&l| l) {
        return Err(Error::DegenerateLabels);
    }
    let unsup = UnsupModel::new(
        scaler,
        train_table,
        space,
        gamma,
        Some(inlier_population(labels)),
    )?;
    let degrees = unsup.training_degrees()?;
    let outcome = train(&degrees, labels, config)?;
    Ok(SupModel {
        unsup,
        weights: FuzzyAgenda::new(outcome.weights)?,
        config: config.clone(),
        loss_trace: outcome.loss_trace,
    })
}

/// Fits the scaler on `train_table` and trains over the small-agenda space
/// described by `params`.
pub fn fit_sup(
    train_table: &DataTable,
    params: &UnsupParams,
    config: &TrainConfig,
) -> Result<SupModel> {
    let scaler = Scaler::fit(train_table, params.bins)?;
    fit_sup_with_scaler(scaler, train_table, params, config)
}

pub fn fit_sup_with_scaler(
    scaler: Scaler,
    train_table: &DataTable,
    params: &UnsupParams,
    config: &TrainConfig,
) -> Result<SupModel> {
    let gamma = params.resolved_gamma()?;
    let space = small_agendas(train_table.num_columns(), params.alpha, params.include_full)?
        .with_attribute_names(train_table.column_names())?;
    fit_sup_with(scaler, train_table, space, gamma, config)
}

/// Grows the agenda space adaptively, training a model on each candidate
/// space, and returns the model retrained on the surviving agendas.
pub fn fit_sup_adaptive(
    scaler: Scaler,
    train_table: &DataTable,
    gamma: f64,
    config: &TrainConfig,
    alpha_schedule: &[usize],
    drop_threshold: Option<f64>,
) -> Result<(Option<SupModel>, AdaptiveOutcome)> {
    let names = train_table.column_names().to_vec();
    let outcome = adaptive_search(
        |space| {
            let space = space.with_attribute_names(&names)?;
            let model = fit_sup_with(scaler.clone(), train_table, space, gamma, config)?;
            Ok(model.weights.clone())
        },
        train_table.num_columns(),
        alpha_schedule,
        drop_threshold,
    )?;
    if outcome.space.is_empty() {
        return Ok((None, outcome));
    }
    let space = outcome.space.with_attribute_names(&names)?;
    let model = fit_sup_with(scaler, train_table, space, gamma, config)?;
    Ok((Some(model), outcome))
}
