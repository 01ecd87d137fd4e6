//! Split, fit, score and measure in one call.

use crate::agendas::{small_agendas, AgendaSpace};
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::eval::{roc_auc, stratified_split, tpr_fpr, Metrics, Split};
use crate::model::Model;
use crate::scaling::Scaler;
use crate::sup::{fit_sup_adaptive, fit_sup_with, TrainConfig};
use crate::unsup::{UnsupModel, UnsupParams};

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Unsupervised,
    Supervised(TrainConfig),
    /// Supervised training over an adaptively grown agenda space.
    Adaptive {
        config: TrainConfig,
        alpha_schedule: Vec<usize>,
        drop_threshold: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub params: UnsupParams,
    pub mode: Mode,
    /// Replaces the small-agenda space built from `params.alpha`.
    pub space: Option<AgendaSpace>,
    pub train_fraction: f64,
    /// Fit scaler bounds on every row rather than the training rows only.
    pub scale_on_all: bool,
    pub threshold: f64,
}

impl PipelineConfig {
    pub fn new(params: UnsupParams) -> Self {
        Self {
            params,
            mode: Mode::Unsupervised,
            space: None,
            train_fraction: 0.8,
            scale_on_all: false,
            threshold: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalReport {
    pub metrics: Metrics,
    pub split: Split,
    pub model: Model,
    pub test_ids: Vec<String>,
    pub test_labels: Vec<bool>,
    pub scores: Vec<f64>,
}

fn labels_of(table: &DataTable) -> Result<&[bool]> {
    table
        .labels()
        .ok_or_else(|| Error::InvalidConfig("a label column is required".into()))
}

/// Stratified split of a labelled table, seeded by `config.params.seed`.
pub fn split_table(
    table: &DataTable,
    config: &PipelineConfig,
) -> Result<(Split, DataTable, DataTable)> {
    let split = stratified_split(labels_of(table)?, config.train_fraction, config.params.seed)?;
    let train = table.subset(&split.train_indices);
    let test = table.subset(&split.test_indices);
    Ok((split, train, test))
}

/// Fits the configured detector on `train`. `all` is the table the scaler
/// is fitted on when `scale_on_all` is set.
pub fn fit_model(train: &DataTable, all: &DataTable, config: &PipelineConfig) -> Result<Model> {
    let scale_source = if config.scale_on_all { all } else { train };
    let scaler = Scaler::fit(scale_source, config.params.bins)?;
    let gamma = config.params.resolved_gamma()?;
    let space = || -> Result<AgendaSpace> {
        match &config.space {
            Some(s) => s.with_attribute_names(train.column_names()),
            None => small_agendas(
                train.num_columns(),
                config.params.alpha,
                config.params.include_full,
            )?
            .with_attribute_names(train.column_names()),
        }
    };
    Ok(match &config.mode {
        Mode::Unsupervised => UnsupModel::new(scaler, train, space()?, gamma, None)?.into(),
        Mode::Supervised(tc) => fit_sup_with(scaler, train, space()?, gamma, tc)?.into(),
        Mode::Adaptive {
            config: tc,
            alpha_schedule,
            drop_threshold,
        } => {
            let (model, outcome) =
                fit_sup_adaptive(scaler, train, gamma, tc, alpha_schedule, *drop_threshold)?;
            match model {
                Some(m) => m.into(),
                None => {
                    return Err(Error::InvalidConfig(
                        outcome
                            .diagnostic
                            .unwrap_or_else(|| "adaptive search kept no agenda".into()),
                    ))
                }
            }
        }
    })
}

/// Splits, fits on the training side and scores the test side.
pub fn evaluate(table: &DataTable, config: &PipelineConfig) -> Result<EvalReport> {
    let (split, train, test) = split_table(table, config)?;
    let model = fit_model(&train, table, config)?;
    let scores = model.score_table(&test)?;
    let test_labels = labels_of(&test)?.to_vec();
    let auc = roc_auc(&scores, &test_labels)?;
    let (tpr, fpr) = tpr_fpr(&scores, &test_labels, config.threshold)?;
    let metrics = Metrics {
        auc,
        tpr,
        fpr,
        threshold: config.threshold,
        n_train: split.train_indices.len(),
        n_test: split.test_indices.len(),
        seed: config.params.seed,
        bins: config.params.bins,
        gamma: model.inner().gamma(),
    };
    Ok(EvalReport {
        metrics,
        split,
        model,
        test_ids: test.record_ids().to_vec(),
        test_labels,
        scores,
    })
}
