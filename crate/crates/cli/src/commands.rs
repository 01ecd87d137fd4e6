use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use fca_outlier::explain::histogram_csv;
use fca_outlier::{
    evaluate, explain_global, explain_local, explain_query, export_heatmap, export_histogram,
    fit_model, parse_agenda_file, split_table, DataTable, Error, Metrics, Mode, Model,
    PipelineConfig, TrainConfig, UnsupParams,
};
use log::info;
use serde::Serialize;

use crate::cli::*;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::ZeroBins
            | Error::InvalidGamma(_)
            | Error::AlphaTooLarge { .. }
            | Error::InvalidAttributePair(..)
            | Error::UnknownAgenda(_)
            | Error::UnknownAttribute(_)
            | Error::UnknownObject(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::FitUnsup(a) => fit_unsup(a),
        Command::FitSup(a) => fit_sup(a),
        Command::Score(a) => score(a),
        Command::Eval(a) => eval(a),
        Command::Explain(a) => explain(a),
        Command::ExportHist(a) => export_hist(a),
        Command::ExportHeatmap(a) => export_heatmap_cmd(a),
        Command::Info(a) => model_info(a),
    }
}

fn read_table(data: &DataArgs) -> CliResult<DataTable> {
    let t = DataTable::read_csv(
        &data.input,
        data.label_column.as_deref(),
        data.id_column.as_deref(),
    )?;
    info!(
        "read {} rows x {} attributes from {}",
        t.num_rows(),
        t.num_columns(),
        data.input.display()
    );
    Ok(t)
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| {
            CliError::Data(Error::Input {
                path: p.display().to_string(),
                message: e.to_string(),
            })
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn load_model(path: &Path) -> CliResult<Model> {
    Model::load(path).map_err(|e| match e {
        Error::Io(io) => CliError::Data(Error::Input {
            path: path.display().to_string(),
            message: io.to_string(),
        }),
        other => other.into(),
    })
}

fn pipeline_config(
    detector: &DetectorArgs,
    split: &SplitArgs,
    table: &DataTable,
) -> CliResult<PipelineConfig> {
    let params = UnsupParams {
        bins: detector.bins,
        alpha: detector.alpha,
        include_full: !detector.no_full,
        gamma: detector.gamma,
        seed: detector.seed,
    };
    let space = match &detector.agendas {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Data(Error::Input {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })
            })?;
            Some(parse_agenda_file(&text, table.column_names())?)
        }
        None => None,
    };
    Ok(PipelineConfig {
        space,
        train_fraction: split.train_fraction,
        scale_on_all: split.scale_on_all,
        ..PipelineConfig::new(params)
    })
}

fn train_mode(t: &TrainArgs, seed: u64) -> Mode {
    let config = TrainConfig {
        epochs: t.epochs,
        learning_rate: t.lr,
        seed,
        init_scale: t.init_scale,
        denominator_epsilon: t.eps,
        orientation: t.loss_orientation,
    };
    match &t.adaptive {
        Some(schedule) => Mode::Adaptive {
            config,
            alpha_schedule: schedule.clone(),
            drop_threshold: t.drop_threshold,
        },
        None => Mode::Supervised(config),
    }
}

fn log_model(model: &Model) {
    let inner = model.inner();
    info!(
        "bins={} gamma={} agendas={} objects={} population={}",
        inner.scaler().bins(),
        inner.gamma(),
        inner.space().len(),
        inner.context().num_objects(),
        inner.population().count_ones()
    );
}

/// Fits on the training split when labels are present (the same split
/// `eval` uses), otherwise on every row.
fn fit_from_args(table: &DataTable, config: &PipelineConfig, all_rows: bool) -> CliResult<Model> {
    info!(
        "alpha={} include_full={} seed={}",
        config.params.alpha, config.params.include_full, config.params.seed
    );
    let model = if table.labels().is_some() && !all_rows {
        let (split, train, _) = split_table(table, config)?;
        info!(
            "training on {} of {} rows",
            split.train_indices.len(),
            table.num_rows()
        );
        fit_model(&train, table, config)?
    } else {
        fit_model(table, table, config)?
    };
    log_model(&model);
    Ok(model)
}

fn save_model(model: &Model, path: &Path) -> CliResult {
    model.save(path).map_err(|e| match e {
        Error::Io(io) => CliError::Data(Error::Input {
            path: path.display().to_string(),
            message: io.to_string(),
        }),
        other => other.into(),
    })?;
    info!("model written to {}", path.display());
    Ok(())
}

fn fit_unsup(a: FitUnsupArgs) -> CliResult {
    let table = read_table(&a.data)?;
    let config = pipeline_config(&a.detector, &a.split, &table)?;
    let model = fit_from_args(&table, &config, a.all_rows)?;
    save_model(&model, &a.output)
}

fn fit_sup(a: FitSupArgs) -> CliResult {
    if a.data.label_column.is_none() {
        return Err(CliError::Usage("fit-sup needs --label-column".into()));
    }
    let table = read_table(&a.data)?;
    let mut config = pipeline_config(&a.detector, &a.split, &table)?;
    config.mode = train_mode(&a.train, a.detector.seed);
    info!(
        "epochs={} lr={} loss_orientation={}",
        a.train.epochs, a.train.lr, a.train.loss_orientation
    );
    let model = fit_from_args(&table, &config, a.all_rows)?;
    if let (Some(path), Model::Supervised(m)) = (&a.loss_trace, &model) {
        write_output(Some(path), &m.loss_trace_csv())?;
    }
    save_model(&model, &a.output)
}

#[derive(Serialize)]
struct ScoredRecord<'a> {
    id: &'a str,
    score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<bool>,
}

fn scores_text(
    format: Format,
    ids: &[String],
    scores: &[f64],
    labels: Option<&[bool]>,
) -> CliResult<String> {
    Ok(match format {
        Format::Json => {
            let records: Vec<ScoredRecord> = ids
                .iter()
                .zip(scores)
                .enumerate()
                .map(|(i, (id, &score))| ScoredRecord {
                    id,
                    score,
                    label: labels.map(|l| l[i]),
                })
                .collect();
            to_json(&records)?
        }
        Format::Csv => {
            let mut out = String::from(if labels.is_some() {
                "id,score,label\n"
            } else {
                "id,score\n"
            });
            for (i, (id, s)) in ids.iter().zip(scores).enumerate() {
                match labels {
                    Some(l) => out.push_str(&format!("{id},{s},{}\n", l[i] as u8)),
                    None => out.push_str(&format!("{id},{s}\n")),
                }
            }
            out
        }
    })
}

fn check_columns(model: &Model, table: &DataTable, source: &Path) -> CliResult {
    let expected = model.inner().scaler().column_names();
    if table.column_names() != expected {
        return Err(CliError::Data(Error::Input {
            path: source.display().to_string(),
            message: format!(
                "attribute columns {:?} do not match the model's {:?}",
                table.column_names(),
                expected
            ),
        }));
    }
    Ok(())
}

fn score(a: ScoreArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let table = read_table(&a.data)?;
    check_columns(&model, &table, &a.data.input)?;
    log_model(&model);
    let scores = model.score_table(&table)?;
    let text = scores_text(a.format, table.record_ids(), &scores, table.labels())?;
    write_output(a.output.as_deref(), &text)
}

fn eval(a: EvalArgs) -> CliResult {
    if a.data.label_column.is_none() {
        return Err(CliError::Usage("eval needs --label-column".into()));
    }
    let table = read_table(&a.data)?;
    let mut config = pipeline_config(&a.detector, &a.split, &table)?;
    config.threshold = a.threshold;
    info!(
        "alpha={} include_full={} seed={}",
        config.params.alpha, config.params.include_full, config.params.seed
    );
    if a.supervised || a.train.adaptive.is_some() {
        config.mode = train_mode(&a.train, a.detector.seed);
        info!(
            "epochs={} lr={} loss_orientation={}",
            a.train.epochs, a.train.lr, a.train.loss_orientation
        );
    }
    let report = evaluate(&table, &config)?;
    log_model(&report.model);
    if let Some(path) = &a.scores_output {
        let text = scores_text(
            Format::Csv,
            &report.test_ids,
            &report.scores,
            Some(&report.test_labels),
        )?;
        write_output(Some(path), &text)?;
    }
    let metrics: &Metrics = &report.metrics;
    write_output(a.output.as_deref(), &to_json(metrics)?)
}

fn explain(a: ExplainArgs) -> CliResult {
    let model = load_model(&a.model)?;
    if a.global {
        let g = explain_global(&model, a.degree_threshold)?;
        return write_output(a.output.as_deref(), &to_json(&g)?);
    }
    let object = a.object.as_deref().unwrap_or_default();
    let e = match &a.input {
        Some(input) => {
            let data = DataArgs {
                input: input.clone(),
                label_column: a.label_column.clone(),
                id_column: a.id_column.clone(),
            };
            let table = read_table(&data)?;
            check_columns(&model, &table, input)?;
            let row = table.row_index(object).ok_or_else(|| {
                CliError::Usage(format!("no record {object:?} in {}", input.display()))
            })?;
            let intent = model.inner().scaler().intent(&table.rows()[row])?;
            explain_query(&model, object, &intent, a.top_k, a.degree_floor)?
        }
        None => explain_local(&model, object, a.top_k, a.degree_floor)?,
    };
    let text = if a.text {
        format!("{}\n", e.render())
    } else {
        to_json(&e)?
    };
    write_output(a.output.as_deref(), &text)
}

fn export_hist(a: ExportHistArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let hist = export_histogram(&model, &a.agenda)?;
    let text = match a.format {
        Format::Json => to_json(&hist)?,
        Format::Csv => histogram_csv(&hist),
    };
    write_output(a.output.as_deref(), &text)
}

fn resolve_attribute(model: &Model, key: &str) -> CliResult<usize> {
    let scaler = model.inner().scaler();
    scaler
        .attribute_index(key)
        .or_else(|| {
            key.parse::<usize>()
                .ok()
                .filter(|&i| i < scaler.num_attributes())
        })
        .ok_or_else(|| CliError::Usage(format!("unknown attribute {key:?}")))
}

fn export_heatmap_cmd(a: ExportHeatmapArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let i = resolve_attribute(&model, &a.x)?;
    let j = resolve_attribute(&model, &a.y)?;
    let map = export_heatmap(&model, i, j)?;
    let text = match a.format {
        Format::Json => to_json(&map)?,
        Format::Csv => map.to_csv(),
    };
    write_output(a.output.as_deref(), &text)
}

#[derive(Serialize)]
struct AgendaInfo<'a> {
    name: &'a str,
    attributes: Vec<&'a str>,
    weight: f64,
}

#[derive(Serialize)]
struct ModelInfo<'a> {
    kind: &'static str,
    attributes: &'a [String],
    bins: usize,
    gamma: f64,
    objects: usize,
    population: usize,
    agendas: Vec<AgendaInfo<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    training: Option<&'a TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_loss: Option<f64>,
}

fn model_info(a: InfoArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let inner = model.inner();
    let weights = model.weights();
    let names = inner.space().attribute_names();
    let (training, final_loss) = match &model {
        Model::Supervised(m) => (Some(m.config()), m.loss_trace().last().copied()),
        Model::Unsupervised(_) => (None, None),
    };
    let info = ModelInfo {
        kind: if model.is_supervised() {
            "supervised"
        } else {
            "unsupervised"
        },
        attributes: inner.scaler().column_names(),
        bins: inner.scaler().bins(),
        gamma: inner.gamma(),
        objects: inner.context().num_objects(),
        population: inner.population().count_ones(),
        agendas: inner
            .space()
            .iter()
            .zip(&weights)
            .map(|(agenda, &weight)| AgendaInfo {
                name: agenda.name(),
                attributes: agenda
                    .attributes()
                    .iter()
                    .map(|&i| names[i].as_str())
                    .collect(),
                weight,
            })
            .collect(),
        training,
        final_loss,
    };
    write_output(a.output.as_deref(), &to_json(&info)?)
}
