//! Final-state shot records, from simulation or from an annealer.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::ChainSpec;
use crate::{Error, Result};

/// Couplings as recorded in archive metadata: one value for a uniform
/// chain, or one per bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Couplings {
    Uniform(f64),
    PerBond(Vec<f64>),
}

impl Couplings {
    pub fn expand(&self, length: usize) -> Vec<f64> {
        match self {
            Couplings::Uniform(j) => vec![*j; length.saturating_sub(1)],
            Couplings::PerBond(js) => js.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveMeta {
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(rename = "J")]
    pub couplings: Couplings,
    pub tau_us: f64,
    pub machine: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ArchiveMeta {
    /// The chain these shots were taken on (zero longitudinal fields).
    /// Classical analysis has no dense-simulation size limit.
    pub fn chain(&self) -> Result<ChainSpec> {
        ChainSpec::with_capacity(self.couplings.expand(self.length), vec![0.0; self.length], usize::MAX)
    }
}

/// One distinct final spin configuration and how often it was observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinSample {
    pub spins: Vec<i8>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotArchive {
    pub meta: ArchiveMeta,
    pub samples: Vec<SpinSample>,
}

impl ShotArchive {
    /// Validated archive. Errors name the offending sample (0-based).
    pub fn new(meta: ArchiveMeta, samples: Vec<SpinSample>) -> Result<Self> {
        let archive = ShotArchive { meta, samples };
        archive.validate()?;
        Ok(archive)
    }

    pub fn validate(&self) -> Result<()> {
        let length = self.meta.length;
        if length < 2 {
            return Err(Error::invalid("archive", format!("L = {length} is below 2")));
        }
        if let Couplings::PerBond(js) = &self.meta.couplings {
            if js.len() != length - 1 {
                return Err(Error::invalid(
                    "archive",
                    format!("{} couplings given for L = {length}", js.len()),
                ));
            }
        }
        if !(self.meta.tau_us.is_finite() && self.meta.tau_us > 0.0) {
            return Err(Error::invalid("archive", format!("tau_us = {} is not positive", self.meta.tau_us)));
        }
        for (row, sample) in self.samples.iter().enumerate() {
            check_sample(sample, length).map_err(|detail| Error::invalid("archive", format!("sample {row}: {detail}")))?;
        }
        Ok(())
    }

    /// Total number of shots `N`.
    pub fn total(&self) -> u64 {
        self.samples.iter().map(|s| s.count).sum()
    }
}

/// Checks one sample against the chain length; the error is a bare
/// description for the caller to locate.
pub fn check_sample(sample: &SpinSample, length: usize) -> core::result::Result<(), String> {
    if sample.spins.len() != length {
        return Err(format!("{} spins, expected {length}", sample.spins.len()));
    }
    if let Some(bad) = sample.spins.iter().find(|&&s| s != 1 && s != -1) {
        return Err(format!("spin value {bad} is not ±1"));
    }
    if sample.count == 0 {
        return Err(String::from("count must be positive"));
    }
    Ok(())
}

/// Spins of computational basis state `index` (site 0 first).
pub fn spins_of_index(index: usize, length: usize) -> Vec<i8> {
    (0..length)
        .map(|site| crate::model::spin_of(index, site, length) as i8)
        .collect()
}
