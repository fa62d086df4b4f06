use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{DecoderKind, FamilyKind};

/// Parameters for every subcommand; each command reads the fields it
/// needs and ignores the rest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    /// Explicit split `C`, `D` for `simulate-code`; derived from the state
    /// when absent.
    #[serde(default)]
    pub c: Option<Vec<f64>>,
    #[serde(default)]
    pub d: Option<Vec<f64>>,
    /// Per-sender randomizing-block sizes `L_z`.
    #[serde(default)]
    pub l_sizes: Option<Vec<usize>>,
    /// Per-sender message counts `M_z`.
    #[serde(default)]
    pub m_sizes: Option<Vec<usize>>,
    /// Per-sender family sizes `K_z` for encoding runs.
    #[serde(default)]
    pub k_sizes: Option<Vec<usize>>,
    /// Uniform per-sender sizes to sweep (L for randomization, K for encoding).
    #[serde(default)]
    pub sweep: Option<Vec<usize>>,
    /// Randomization rates `D_z`; switches randomization to the chained run.
    #[serde(default)]
    pub d_rates: Option<Vec<f64>>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub family: Option<FamilyKind>,
    #[serde(default)]
    pub decoder: Option<DecoderKind>,
    /// Membership slack for `check`.
    #[serde(default)]
    pub slack: Option<f64>,
    /// `verify-lemmas`: random instances per suite.
    #[serde(default)]
    pub states: Option<usize>,
    /// `verify-lemmas`: add a non-submodular table to the polymatroid suite.
    #[serde(default)]
    pub inject_counterexample: Option<bool>,
}

impl ExperimentConfig {
    pub fn n(&self) -> usize {
        self.n.unwrap_or(1)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(1)
    }

    pub fn family(&self) -> FamilyKind {
        self.family.unwrap_or(FamilyKind::Haar)
    }

    pub fn decoder(&self) -> DecoderKind {
        self.decoder.unwrap_or_default()
    }

    /// `--seed` wins over the config; stochastic commands need one of them.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.master_seed).ok_or_else(|| {
            Error::validation("master_seed", "stochastic commands need --seed or master_seed")
        })
    }

    pub fn rates(&self) -> Result<&[f64]> {
        self.rates
            .as_deref()
            .ok_or_else(|| Error::validation("rates", "required for this command"))
    }

    pub fn check_lengths(&self, z: usize) -> Result<()> {
        let lists: [(&str, Option<usize>); 7] = [
            ("rates", self.rates.as_ref().map(Vec::len)),
            ("c", self.c.as_ref().map(Vec::len)),
            ("d", self.d.as_ref().map(Vec::len)),
            ("l_sizes", self.l_sizes.as_ref().map(Vec::len)),
            ("m_sizes", self.m_sizes.as_ref().map(Vec::len)),
            ("k_sizes", self.k_sizes.as_ref().map(Vec::len)),
            ("d_rates", self.d_rates.as_ref().map(Vec::len)),
        ];
        for (name, len) in lists {
            if let Some(len) = len {
                if len != z {
                    return Err(Error::validation(name, format!("expected {z} entries (one per sender), found {len}")));
                }
            }
        }
        if self.trials == Some(0) {
            return Err(Error::validation("trials", "must be at least 1"));
        }
        if self.n == Some(0) {
            return Err(Error::validation("n", "must be at least 1"));
        }
        Ok(())
    }
}
