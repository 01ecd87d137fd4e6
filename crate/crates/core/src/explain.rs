//! Local (per object) and global (per agenda) explanations, and the plot data
//! behind closure-size histograms and pairwise heat maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::context::{FeatureMask, FormalContext, ObjectMask};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::sup::guarded_denominator;

/// Degrees at or below this are shown as zero (four significant digits).
pub const DEFAULT_DEGREE_FLOOR: f64 = 5e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationEntry {
    pub agenda: String,
    pub degree: f64,
    pub weight: f64,
    /// `weight * degree / Σ weights`; these sum to the score.
    pub contribution: f64,
    /// `weight * degree`, before normalization.
    pub raw_contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalExplanation {
    pub object_id: String,
    pub score: f64,
    pub entries: Vec<ExplanationEntry>,
    /// Agendas left out, either below the degree floor or past `top_k`.
    pub omitted_count: usize,
}

impl LocalExplanation {
    /// Plain-text rendering of the explanation.
    pub fn render(&self) -> String {
        if self.entries.is_empty() {
            return format!(
                "Object {} has outlier degree {:.4}; no agenda gives it a non-negligible degree.",
                self.object_id, self.score
            );
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| {
                format!(
                    "{} (degree {:.4}, weight {:.4})",
                    e.agenda, e.degree, e.weight
                )
            })
            .collect();
        format!(
            "Object {} has outlier degree {:.4}, driven mostly by its degrees under {}.",
            self.object_id,
            self.score,
            parts.join(", ")
        )
    }
}

/// Explains one row of per-agenda degrees under `model`'s weights.
pub fn explain_row(
    model: &Model,
    object_id: &str,
    degrees: &[f64],
    top_k: usize,
    degree_floor: f64,
) -> Result<LocalExplanation> {
    if top_k == 0 {
        return Err(Error::InvalidConfig("top_k must be at least 1".into()));
    }
    let space = model.space();
    if degrees.len() != space.len() {
        return Err(Error::LengthMismatch {
            what: "degree row",
            expected: space.len(),
            found: degrees.len(),
        });
    }
    let weights = model.weights();
    let denom = match model {
        Model::Unsupervised(_) => weights.iter().sum(),
        Model::Supervised(m) => guarded_denominator(weights.iter().sum(), m.eps()),
    };
    let all: Vec<ExplanationEntry> = space
        .iter()
        .zip(degrees.iter().zip(&weights))
        .map(|(a, (&d, &w))| ExplanationEntry {
            agenda: a.name().to_string(),
            degree: d,
            weight: w,
            contribution: w * d / denom,
            raw_contribution: w * d,
        })
        .collect();
    let score = all.iter().map(|e| e.contribution).sum();
    let mut kept: Vec<(usize, ExplanationEntry)> = all
        .into_iter()
        .enumerate()
        .filter(|(_, e)| e.degree > degree_floor)
        .collect();
    // Stable sort keeps agenda order among equal contributions.
    kept.sort_by(|a, b| b.1.contribution.total_cmp(&a.1.contribution));
    kept.truncate(top_k);
    Ok(LocalExplanation {
        object_id: object_id.to_string(),
        score,
        omitted_count: space.len() - kept.len(),
        entries: kept.into_iter().map(|(_, e)| e).collect(),
    })
}

/// Explains a training object of the model, looked up by record id.
pub fn explain_local(
    model: &Model,
    object_id: &str,
    top_k: usize,
    degree_floor: f64,
) -> Result<LocalExplanation> {
    let ctx = model.inner().context();
    let a = ctx
        .object_index(object_id)
        .ok_or_else(|| Error::UnknownObject(object_id.to_string()))?;
    let d = model.degree_matrix(&[ctx.query_intent(a)?], vec![object_id.to_string()])?;
    explain_row(model, object_id, d.row(0), top_k, degree_floor)
}

/// Explains an arbitrary query object given its intent.
pub fn explain_query(
    model: &Model,
    object_id: &str,
    intent: &FeatureMask,
    top_k: usize,
    degree_floor: f64,
) -> Result<LocalExplanation> {
    let d = model.degree_matrix(std::slice::from_ref(intent), vec![object_id.to_string()])?;
    explain_row(model, object_id, d.row(0), top_k, degree_floor)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalEntry {
    pub agenda: String,
    pub weight: f64,
    /// Share of training objects with degree at least the threshold.
    pub high_degree_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalExplanation {
    pub degree_threshold: f64,
    pub entries: Vec<GlobalEntry>,
}

/// Agendas ranked by absolute weight, then by how many training objects they
/// give a high degree.
pub fn explain_global(model: &Model, degree_threshold: f64) -> Result<GlobalExplanation> {
    let degrees = model.inner().training_degrees()?;
    let n = degrees.num_rows();
    let weights = model.weights();
    let mut entries: Vec<GlobalEntry> = model
        .space()
        .iter()
        .enumerate()
        .map(|(t, a)| {
            let high = degrees.rows().filter(|r| r[t] >= degree_threshold).count();
            GlobalEntry {
                agenda: a.name().to_string(),
                weight: weights[t],
                high_degree_fraction: if n == 0 { 0.0 } else { high as f64 / n as f64 },
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.weight
            .abs()
            .total_cmp(&a.weight.abs())
            .then(b.high_degree_fraction.total_cmp(&a.high_degree_fraction))
    });
    Ok(GlobalExplanation {
        degree_threshold,
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub closure_size: usize,
    pub count: usize,
}

/// How many population objects have each closure size under one agenda.
pub fn export_histogram(model: &Model, agenda: &str) -> Result<Vec<HistogramBucket>> {
    let inner = model.inner();
    let t = inner
        .space()
        .position(agenda)
        .ok_or_else(|| Error::UnknownAgenda(agenda.to_string()))?;
    let sizes = inner
        .context()
        .closure_sizes_all(&inner.masks()[t], inner.population())?;
    let mut hist = BTreeMap::new();
    for a in inner.population().iter_ones() {
        *hist.entry(sizes[a]).or_insert(0) += 1;
    }
    Ok(hist
        .into_iter()
        .map(|(closure_size, count)| HistogramBucket {
            closure_size,
            count,
        })
        .collect())
}

pub fn histogram_csv(buckets: &[HistogramBucket]) -> String {
    let mut out = String::from("closure_size,count\n");
    for b in buckets {
        out.push_str(&format!("{},{}\n", b.closure_size, b.count));
    }
    out
}

/// `log2` closure sizes over the bin grid of two attributes. `None` marks
/// cells without population objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub attribute_i: String,
    pub attribute_j: String,
    pub bins: usize,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Heatmap {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.cells {
            let line: Vec<String> = row
                .iter()
                .map(|c| c.map_or_else(String::new, |v| v.to_string()))
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

fn bin_of(ctx: &FormalContext, a: usize, block: &FeatureMask, base: usize) -> Option<usize> {
    ctx.intent(a).iter_ones_and(block).next().map(|x| x - base)
}

/// Heat map of closure sizes under the agenda `{i, j}`. Every object binned
/// into the same cell must share one closure size; a violation is reported
/// as an error rather than silently averaged.
pub fn export_heatmap(model: &Model, attribute_i: usize, attribute_j: usize) -> Result<Heatmap> {
    let inner = model.inner();
    let scaler = inner.scaler();
    let m = scaler.num_attributes();
    if attribute_i == attribute_j || attribute_i >= m || attribute_j >= m {
        return Err(Error::InvalidAttributePair(attribute_i, attribute_j));
    }
    let bins = scaler.bins();
    let nf = scaler.num_features();
    let block = |j: usize| FeatureMask::from_indices(nf, scaler.base(j)..scaler.base(j) + bins);
    let (block_i, block_j) = (block(attribute_i), block(attribute_j));
    let mut pair = block_i.clone().into_bits();
    pair.or_assign(&block_j);
    let pair = FeatureMask::from_bits(pair);

    let ctx = inner.context();
    let population: &ObjectMask = inner.population();
    let sizes = ctx.closure_sizes_all(&pair, population)?;
    let mut shared: Vec<Vec<Option<usize>>> = vec![vec![None; bins]; bins];
    for a in population.iter_ones() {
        let (Some(p), Some(q)) = (
            bin_of(ctx, a, &block_i, scaler.base(attribute_i)),
            bin_of(ctx, a, &block_j, scaler.base(attribute_j)),
        ) else {
            continue;
        };
        match shared[p][q] {
            None => shared[p][q] = Some(sizes[a]),
            Some(s) if s != sizes[a] => return Err(Error::InconsistentCell { row: p, col: q }),
            Some(_) => {}
        }
    }
    Ok(Heatmap {
        attribute_i: scaler.column_names()[attribute_i].clone(),
        attribute_j: scaler.column_names()[attribute_j].clone(),
        bins,
        cells: shared
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|c| c.map(|s| (s as f64).log2()))
                    .collect()
            })
            .collect(),
    })
}
