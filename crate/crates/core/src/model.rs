//! Fitted detectors behind one type, and their on-disk format.
//!
//! A model file is a single header line `fca-outlier-model <version>`
//! followed by a JSON document holding the scaler, agenda space, gamma,
//! population mask and the packed context bits (plus weights, training
//! config and loss trace for supervised models). Floats are written in
//! shortest round-trip form, so reloaded models score bit-identically.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agendas::AgendaSpace;
use crate::context::FeatureMask;
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::sup::SupModel;
use crate::unsup::{DegreeMatrix, UnsupModel};

pub const FORMAT_MAGIC: &str = "fca-outlier-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    Unsupervised(UnsupModel),
    Supervised(SupModel),
}

impl Model {
    pub fn inner(&self) -> &UnsupModel {
        match self {
            Model::Unsupervised(m) => m,
            Model::Supervised(m) => m.unsup(),
        }
    }

    pub fn space(&self) -> &AgendaSpace {
        self.inner().space()
    }

    pub fn is_supervised(&self) -> bool {
        matches!(self, Model::Supervised(_))
    }

    /// Per-agenda weights: the learned ones, or `1/|T|` each.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Model::Unsupervised(m) => vec![1.0 / m.space().len() as f64; m.space().len()],
            Model::Supervised(m) => m.weights().weights().to_vec(),
        }
    }

    pub fn scores(&self, degrees: &DegreeMatrix) -> Result<Vec<f64>> {
        match self {
            Model::Unsupervised(m) => m.scores(degrees),
            Model::Supervised(m) => m.scores(degrees),
        }
    }

    pub fn degree_matrix(&self, queries: &[FeatureMask], ids: Vec<String>) -> Result<DegreeMatrix> {
        self.inner().degree_matrix(queries, ids)
    }

    pub fn score_table(&self, table: &DataTable) -> Result<Vec<f64>> {
        self.scores(&self.inner().degree_matrix_for(table)?)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{FORMAT_MAGIC} {FORMAT_VERSION}")?;
        serde_json::to_writer(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(FORMAT_MAGIC) {
            return Err(Error::ModelFormat("missing header".into()));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ModelFormat("unreadable version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let mut model: Model = serde_json::from_reader(reader)?;
        match &mut model {
            Model::Unsupervised(m) => m.rehydrate()?,
            Model::Supervised(m) => m.rehydrate()?,
        }
        Ok(model)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

impl From<UnsupModel> for Model {
    fn from(m: UnsupModel) -> Self {
        Model::Unsupervised(m)
    }
}

impl From<SupModel> for Model {
    fn from(m: SupModel) -> Self {
        Model::Supervised(m)
    }
}
