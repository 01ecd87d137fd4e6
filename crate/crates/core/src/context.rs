//! Formal contexts stored twice (object intents and feature extents) and the
//! singleton-closure counting kernel.
//!
//! The closure of an object `a` relative to an agenda `Y` is the set of
//! objects whose intent contains every feature of `intent(a) ∩ Y`. Only its
//! cardinality is ever needed, which is the popcount of the intersection of
//! the extents of those features.

use std::collections::HashMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};

/// Bit vector over the features of a context: an intent, or the feature
/// block of an agenda.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask(BitVec);

/// Bit vector over the objects of a context, selecting the population that
/// closures are counted in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectMask(BitVec);

macro_rules! mask_impl {
    ($ty:ident) => {
        impl $ty {
            pub fn all(len: usize) -> Self {
                Self(BitVec::ones(len))
            }

            pub fn none(len: usize) -> Self {
                Self(BitVec::zeros(len))
            }

            pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
                Self(BitVec::from_indices(len, indices))
            }

            pub fn from_bits(bits: BitVec) -> Self {
                Self(bits)
            }

            pub fn bits(&self) -> &BitVec {
                &self.0
            }

            pub fn into_bits(self) -> BitVec {
                self.0
            }

            pub fn set(&mut self, i: usize, value: bool) {
                self.0.set(i, value);
            }
        }

        impl Deref for $ty {
            type Target = BitVec;

            fn deref(&self) -> &BitVec {
                &self.0
            }
        }
    };
}

mask_impl!(FeatureMask);
mask_impl!(ObjectMask);

/// A binary relation between objects and features with both directions
/// materialized as bit vectors. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormalContext {
    num_objects: usize,
    num_features: usize,
    object_intents: Vec<BitVec>,
    feature_extents: Vec<BitVec>,
    object_ids: Vec<String>,
    feature_names: Vec<String>,
}

impl FormalContext {
    /// Builds a context from per-object feature index sets.
    pub fn build<R, I>(
        rows: R,
        num_features: usize,
        object_ids: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = usize>,
    {
        if feature_names.len() != num_features {
            return Err(Error::LengthMismatch {
                what: "feature names",
                expected: num_features,
                found: feature_names.len(),
            });
        }
        let mut object_intents = Vec::with_capacity(object_ids.len());
        for row in rows {
            let mut intent = BitVec::zeros(num_features);
            for x in row {
                if x >= num_features {
                    return Err(Error::IndexOutOfRange {
                        what: "feature",
                        index: x,
                        bound: num_features,
                    });
                }
                intent.set(x, true);
            }
            object_intents.push(intent);
        }
        if object_ids.len() != object_intents.len() {
            return Err(Error::LengthMismatch {
                what: "object ids",
                expected: object_intents.len(),
                found: object_ids.len(),
            });
        }
        Ok(Self::from_intents(
            object_intents,
            num_features,
            object_ids,
            feature_names,
        ))
    }

    fn from_intents(
        object_intents: Vec<BitVec>,
        num_features: usize,
        object_ids: Vec<String>,
        feature_names: Vec<String>,
    ) -> Self {
        let num_objects = object_intents.len();
        let mut feature_extents = vec![BitVec::zeros(num_objects); num_features];
        for (a, intent) in object_intents.iter().enumerate() {
            for x in intent.iter_ones() {
                feature_extents[x].set(a, true);
            }
        }
        Self {
            num_objects,
            num_features,
            object_intents,
            feature_extents,
            object_ids,
            feature_names,
        }
    }

    /// Re-derives the extents from stored intents and checks that both
    /// encodings agree; used when loading serialized contexts.
    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ModelFormat(format!("context: {m}")));
        if self.object_intents.len() != self.num_objects
            || self.object_ids.len() != self.num_objects
        {
            return bad("object count mismatch");
        }
        if self.feature_extents.len() != self.num_features
            || self.feature_names.len() != self.num_features
        {
            return bad("feature count mismatch");
        }
        if self
            .object_intents
            .iter()
            .any(|i| i.len() != self.num_features)
            || self
                .feature_extents
                .iter()
                .any(|e| e.len() != self.num_objects)
        {
            return bad("bit vector length mismatch");
        }
        let rebuilt = Self::from_intents(
            self.object_intents.clone(),
            self.num_features,
            Vec::new(),
            Vec::new(),
        );
        if rebuilt.feature_extents != self.feature_extents {
            return bad("intents and extents disagree");
        }
        Ok(())
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn object_ids(&self) -> &[String] {
        &self.object_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.object_ids.iter().position(|o| o == id)
    }

    /// Whether object `a` has feature `x`, read from the intent encoding.
    pub fn incidence(&self, a: usize, x: usize) -> bool {
        self.object_intents[a].get(x)
    }

    /// Column `x` of the relation as stored.
    pub fn extent(&self, x: usize) -> &BitVec {
        &self.feature_extents[x]
    }

    /// Row `a` of the relation as stored.
    pub fn intent(&self, a: usize) -> &BitVec {
        &self.object_intents[a]
    }

    /// The intent of a single object as a feature mask.
    pub fn query_intent(&self, a: usize) -> Result<FeatureMask> {
        if a >= self.num_objects {
            return Err(Error::IndexOutOfRange {
                what: "object",
                index: a,
                bound: self.num_objects,
            });
        }
        Ok(FeatureMask(self.object_intents[a].clone()))
    }

    fn check_features(&self, what: &'static str, mask: &BitVec) -> Result<()> {
        if mask.len() != self.num_features {
            return Err(Error::LengthMismatch {
                what,
                expected: self.num_features,
                found: mask.len(),
            });
        }
        Ok(())
    }

    fn check_population(&self, population: &ObjectMask) -> Result<()> {
        if population.len() != self.num_objects {
            return Err(Error::LengthMismatch {
                what: "population mask",
                expected: self.num_objects,
                found: population.len(),
            });
        }
        Ok(())
    }

    /// Number of objects in `population` whose intent contains
    /// `intent ∩ agenda`. An empty `intent ∩ agenda` is contained in every
    /// intent, so the whole population is counted.
    pub fn closure_size(
        &self,
        intent: &FeatureMask,
        agenda: &FeatureMask,
        population: &ObjectMask,
    ) -> Result<usize> {
        self.check_features("intent", intent)?;
        self.check_features("agenda mask", agenda)?;
        self.check_population(population)?;
        Ok(self.intersect_extents(intent.iter_ones_and(agenda), population))
    }

    fn intersect_extents<I: Iterator<Item = usize>>(
        &self,
        features: I,
        population: &ObjectMask,
    ) -> usize {
        let mut acc = population.bits().clone();
        for x in features {
            acc.and_assign(&self.feature_extents[x]);
            if acc.none() {
                return 0;
            }
        }
        acc.count_ones()
    }

    /// Closure sizes of every object of the context under one agenda.
    pub fn closure_sizes_all(
        &self,
        agenda: &FeatureMask,
        population: &ObjectMask,
    ) -> Result<Vec<usize>> {
        let counter = ClosureCounter::new(self, agenda, population)?;
        let mut memo: HashMap<Vec<u32>, usize> = HashMap::new();
        Ok(self
            .object_intents
            .iter()
            .map(|intent| {
                let key = projected_key(intent, agenda);
                *memo.entry(key).or_insert_with_key(|k| counter.count_key(k))
            })
            .collect())
    }
}

fn projected_key(intent: &BitVec, agenda: &BitVec) -> Vec<u32> {
    intent.iter_ones_and(agenda).map(|x| x as u32).collect()
}

/// Closure-size oracle for one (context, agenda, population) triple.
///
/// Construction groups the population by its intents projected onto the
/// agenda, in one pass. When every projected intent in the population has
/// the same cardinality `m` (always the case for one-hot scaled data), a
/// query whose projection also has `m` features can only be contained in
/// identical projections, so its closure size is a table lookup; a larger
/// projection has closure size zero. Everything else falls back to the
/// extent-intersection kernel, which is exact for arbitrary contexts.
pub struct ClosureCounter<'a> {
    ctx: &'a FormalContext,
    agenda: &'a FeatureMask,
    population: &'a ObjectMask,
    population_size: usize,
    uniform_len: Option<usize>,
    groups: HashMap<Vec<u32>, usize>,
}

impl<'a> ClosureCounter<'a> {
    pub fn new(
        ctx: &'a FormalContext,
        agenda: &'a FeatureMask,
        population: &'a ObjectMask,
    ) -> Result<Self> {
        ctx.check_features("agenda mask", agenda)?;
        ctx.check_population(population)?;
        let mut groups: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut lens = None;
        let mut uniform = true;
        let mut population_size = 0;
        for b in population.iter_ones() {
            population_size += 1;
            let key = projected_key(&ctx.object_intents[b], agenda);
            match lens {
                None => lens = Some(key.len()),
                Some(m) if m != key.len() => uniform = false,
                _ => {}
            }
            *groups.entry(key).or_insert(0) += 1;
        }
        let uniform_len = if uniform {
            Some(lens.unwrap_or(0))
        } else {
            None
        };
        Ok(Self {
            ctx,
            agenda,
            population,
            population_size,
            uniform_len,
            groups,
        })
    }

    /// Closure size of a query intent.
    pub fn count(&self, intent: &FeatureMask) -> Result<usize> {
        self.ctx.check_features("intent", intent)?;
        Ok(self.count_key(&projected_key(intent, self.agenda)))
    }

    fn count_key(&self, key: &[u32]) -> usize {
        if key.is_empty() {
            return self.population_size;
        }
        match self.uniform_len {
            Some(m) if key.len() == m => self.groups.get(key).copied().unwrap_or(0),
            Some(m) if key.len() > m => 0,
            _ => self
                .ctx
                .intersect_extents(key.iter().map(|&x| x as usize), self.population),
        }
    }
}
