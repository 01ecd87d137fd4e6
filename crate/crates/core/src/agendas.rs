//! Crisp agendas (attribute subsets), designated agenda spaces and fuzzy
//! agendas (real weight vectors over a space).
//!
//! Agendas are stored at attribute level. Through a [`Scaler`]'s block layout
//! an agenda expands to the feature mask covering every bin of its
//! attributes.
//!
//! [`Scaler`]: crate::scaling::Scaler

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::context::FeatureMask;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgendaKind {
    Singleton,
    Pair,
    KSet,
    Full,
    Expert,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agenda {
    attributes: Vec<usize>,
    kind: AgendaKind,
    name: String,
}

impl Agenda {
    pub fn attributes(&self) -> &[usize] {
        &self.attributes
    }

    pub fn kind(&self) -> AgendaKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

impl fmt::Display for Agenda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn default_names(num_attributes: usize) -> Vec<String> {
    (0..num_attributes).map(|i| format!("x{i}")).collect()
}

fn kind_for(len: usize) -> AgendaKind {
    match len {
        1 => AgendaKind::Singleton,
        2 => AgendaKind::Pair,
        _ => AgendaKind::KSet,
    }
}

/// An ordered collection of distinct crisp agendas over a fixed attribute
/// set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgendaSpace {
    attribute_names: Vec<String>,
    agendas: Vec<Agenda>,
}

impl AgendaSpace {
    fn from_sets(attribute_names: Vec<String>, sets: Vec<(Vec<usize>, AgendaKind)>) -> Self {
        let mut space = Self {
            attribute_names,
            agendas: Vec::with_capacity(sets.len()),
        };
        for (attributes, kind) in sets {
            let name = space.name_for(&attributes, kind);
            space.agendas.push(Agenda {
                attributes,
                kind,
                name,
            });
        }
        space
    }

    fn name_for(&self, attributes: &[usize], kind: AgendaKind) -> String {
        if kind == AgendaKind::Full {
            return "full".into();
        }
        attributes
            .iter()
            .map(|&a| self.attribute_names[a].as_str())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Same agendas, renamed after the given attribute names.
    pub fn with_attribute_names(&self, names: &[String]) -> Result<Self> {
        if names.len() != self.attribute_names.len() {
            return Err(Error::LengthMismatch {
                what: "attribute names",
                expected: self.attribute_names.len(),
                found: names.len(),
            });
        }
        let sets = self
            .agendas
            .iter()
            .map(|a| (a.attributes.clone(), a.kind))
            .collect();
        Ok(Self::from_sets(names.to_vec(), sets))
    }

    pub fn num_attributes(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn len(&self) -> usize {
        self.agendas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agendas.is_empty()
    }

    pub fn agendas(&self) -> &[Agenda] {
        &self.agendas
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Agenda> {
        self.agendas.iter()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.agendas.iter().position(|a| a.name == name)
    }

    pub fn position_of_set(&self, attributes: &[usize]) -> Option<usize> {
        let mut sorted = attributes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.agendas.iter().position(|a| a.attributes == sorted)
    }

    /// Union of the bin blocks of the agenda's attributes, for a layout with
    /// `bins` features per attribute.
    pub fn feature_mask(&self, index: usize, bins: usize) -> FeatureMask {
        let agenda = &self.agendas[index];
        FeatureMask::from_indices(
            self.num_attributes() * bins,
            agenda
                .attributes
                .iter()
                .flat_map(|&j| j * bins..(j + 1) * bins),
        )
    }

    pub fn feature_masks(&self, bins: usize) -> Vec<FeatureMask> {
        (0..self.len())
            .map(|t| self.feature_mask(t, bins))
            .collect()
    }

    /// Keeps the agendas at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            attribute_names: self.attribute_names.clone(),
            agendas: indices.iter().map(|&i| self.agendas[i].clone()).collect(),
        }
    }
}

/// Subsets of `0..num_attributes` with sizes in `1..=max_size`, ordered by
/// size and then lexicographically.
fn subsets_up_to(universe: &[usize], max_size: usize) -> Vec<Vec<usize>> {
    fn rec(
        universe: &[usize],
        start: usize,
        size: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..universe.len() {
            cur.push(universe[i]);
            rec(universe, i + 1, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=max_size.min(universe.len()) {
        rec(universe, 0, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

/// All agendas of at most `alpha` attributes, optionally followed by the
/// full agenda. A full agenda that coincides with an already listed subset
/// is not repeated.
pub fn small_agendas(
    num_attributes: usize,
    alpha: usize,
    include_full: bool,
) -> Result<AgendaSpace> {
    if alpha == 0 || alpha > num_attributes {
        return Err(Error::AlphaTooLarge {
            alpha,
            num_attributes,
        });
    }
    let universe: Vec<usize> = (0..num_attributes).collect();
    let mut sets: Vec<(Vec<usize>, AgendaKind)> = subsets_up_to(&universe, alpha)
        .into_iter()
        .map(|s| {
            let k = kind_for(s.len());
            (s, k)
        })
        .collect();
    if include_full && alpha < num_attributes {
        sets.push((universe, AgendaKind::Full));
    }
    Ok(AgendaSpace::from_sets(default_names(num_attributes), sets))
}

/// Agendas supplied by hand, kept in the given order.
pub fn expert_agendas(num_attributes: usize, attribute_sets: &[Vec<usize>]) -> Result<AgendaSpace> {
    let mut seen = BTreeSet::new();
    let mut sets = Vec::with_capacity(attribute_sets.len());
    for set in attribute_sets {
        if set.is_empty() {
            return Err(Error::EmptyAgenda);
        }
        let mut sorted = set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&a| a >= num_attributes) {
            return Err(Error::IndexOutOfRange {
                what: "attribute",
                index: bad,
                bound: num_attributes,
            });
        }
        if !seen.insert(sorted.clone()) {
            let names = default_names(num_attributes);
            let shown = sorted
                .iter()
                .map(|&a| names[a].as_str())
                .collect::<Vec<_>>();
            return Err(Error::DuplicateAgenda(shown.join("-")));
        }
        let kind = if sorted.len() == num_attributes && num_attributes > 1 {
            AgendaKind::Full
        } else {
            AgendaKind::Expert
        };
        sets.push((sorted, kind));
    }
    Ok(AgendaSpace::from_sets(default_names(num_attributes), sets))
}

/// Parses an agenda file: one agenda per line, attribute names separated by
/// commas, `full` for all attributes. Blank lines and `#` comments are
/// ignored.
pub fn parse_agenda_file(text: &str, attribute_names: &[String]) -> Result<AgendaSpace> {
    let mut sets = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "full" {
            sets.push((0..attribute_names.len()).collect());
            continue;
        }
        let set = line
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| {
                attribute_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        sets.push(set);
    }
    expert_agendas(attribute_names.len(), &sets)?.with_attribute_names(attribute_names)
}

/// Real-valued weights over an agenda space. Negative entries are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyAgenda {
    weights: Vec<f64>,
}

impl FuzzyAgenda {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig(format!("weight {i} is not finite")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            weights: vec![1.0 / len as f64; len],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The induced mass function. Fails when any weight is negative.
    pub fn normalize(&self) -> Result<Vec<f64>> {
        if let Some((index, &value)) = self.weights.iter().enumerate().find(|(_, w)| **w < 0.0) {
            return Err(Error::NegativeWeight { index, value });
        }
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(self.weights.iter().map(|w| w / total).collect())
    }

    /// `|w_t| / Σ|w|`, the share used to rank and prune agendas.
    pub fn absolute_shares(&self) -> Result<Vec<f64>> {
        let total: f64 = self.weights.iter().map(|w| w.abs()).sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(self.weights.iter().map(|w| w.abs() / total).collect())
    }
}

/// One scoring round of [`adaptive_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveRound {
    pub space: AgendaSpace,
    pub weights: FuzzyAgenda,
    pub threshold: f64,
    pub survivors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveOutcome {
    /// Agendas that survived the last round.
    pub space: AgendaSpace,
    /// Weights of the surviving agendas from the last round.
    pub weights: FuzzyAgenda,
    pub rounds: Vec<AdaptiveRound>,
    pub diagnostic: Option<String>,
}

/// Grows a designated agenda space from small agendas.
///
/// Round `k` scores the current space with `score_fn`, drops agendas whose
/// share of the absolute weight mass is below the threshold, and forms the
/// next space from all subsets of the union of the survivors with fewer
/// than `alpha_schedule[k + 1]` attributes. The first space holds all
/// subsets with fewer than `alpha_schedule[0]` attributes. Stops when no
/// newly added agenda survives, the full agenda has been scored, or the
/// schedule runs out. `drop_threshold = None` uses `1 / (4 |space|)`.
pub fn adaptive_search<F>(
    mut score_fn: F,
    num_attributes: usize,
    alpha_schedule: &[usize],
    drop_threshold: Option<f64>,
) -> Result<AdaptiveOutcome>
where
    F: FnMut(&AgendaSpace) -> Result<FuzzyAgenda>,
{
    if num_attributes == 0 {
        return Err(Error::EmptyAgendaSpace);
    }
    if alpha_schedule.is_empty() || alpha_schedule[0] < 2 {
        return Err(Error::InvalidConfig(
            "alpha schedule must start at 2 or more (agendas have fewer than alpha attributes)"
                .into(),
        ));
    }
    if alpha_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "alpha schedule must be strictly increasing".into(),
        ));
    }
    if let Some(t) = drop_threshold {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "drop threshold {t} outside (0, 1)"
            )));
        }
    }

    let names = default_names(num_attributes);
    let build = |sets: Vec<Vec<usize>>| {
        let tagged = sets
            .into_iter()
            .map(|s| {
                let k = if s.len() == num_attributes && num_attributes > 1 {
                    AgendaKind::Full
                } else {
                    kind_for(s.len())
                };
                (s, k)
            })
            .collect();
        AgendaSpace::from_sets(names.clone(), tagged)
    };

    let universe: Vec<usize> = (0..num_attributes).collect();
    let mut space = build(subsets_up_to(&universe, alpha_schedule[0] - 1));
    let mut newly_added: BTreeSet<Vec<usize>> =
        space.iter().map(|a| a.attributes.clone()).collect();
    let mut rounds = Vec::new();

    for k in 0.. {
        let weights = score_fn(&space)?;
        if weights.len() != space.len() {
            return Err(Error::LengthMismatch {
                what: "agenda weights",
                expected: space.len(),
                found: weights.len(),
            });
        }
        let threshold = drop_threshold.unwrap_or(1.0 / (4.0 * space.len() as f64));
        let shares = weights
            .absolute_shares()
            .unwrap_or_else(|_| vec![0.0; space.len()]);
        let survivors: Vec<usize> = (0..space.len())
            .filter(|&t| shares[t] >= threshold)
            .collect();
        rounds.push(AdaptiveRound {
            space: space.clone(),
            weights: weights.clone(),
            threshold,
            survivors: survivors.clone(),
        });

        let kept = space.select(&survivors);
        let kept_weights = FuzzyAgenda {
            weights: survivors.iter().map(|&t| weights.weights[t]).collect(),
        };
        let finish = |diagnostic: Option<String>| AdaptiveOutcome {
            space: kept.clone(),
            weights: kept_weights.clone(),
            rounds: rounds.clone(),
            diagnostic,
        };

        if survivors.is_empty() {
            return Ok(finish(Some(format!(
                "round {}: every agenda fell below the drop threshold {threshold}",
                k + 1
            ))));
        }
        if k > 0
            && !survivors
                .iter()
                .any(|&t| newly_added.contains(&space.agendas[t].attributes))
        {
            return Ok(finish(None));
        }
        if space.iter().any(|a| a.len() == num_attributes) {
            return Ok(finish(None));
        }
        let Some(&next_alpha) = alpha_schedule.get(k + 1) else {
            return Ok(finish(Some("alpha schedule exhausted".into())));
        };

        let union: BTreeSet<usize> = kept
            .iter()
            .flat_map(|a| a.attributes.iter().copied())
            .collect();
        let union: Vec<usize> = union.into_iter().collect();
        let candidates = subsets_up_to(&union, next_alpha - 1);
        let old: BTreeSet<Vec<usize>> = kept.iter().map(|a| a.attributes.clone()).collect();
        newly_added = candidates
            .iter()
            .filter(|s| !old.contains(*s))
            .cloned()
            .collect();
        if newly_added.is_empty() {
            return Ok(finish(None));
        }
        space = build(candidates);
    }
    unreachable!()
}
