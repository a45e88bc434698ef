//! Experiment runner for the accbound verification suites.

// `!(a <= b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;
pub mod defaults;
pub mod report;
pub mod runner;

use std::path::PathBuf;

use config::{ExperimentConfig, OutputFormat};

/// Command-line values that override a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub proof_tight_lemma: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        if let Some(format) = self.format {
            cfg.format = format;
        }
        for suite in &mut cfg.suites {
            if let Some(reps) = self.reps {
                suite.set_reps(reps);
            }
            if self.proof_tight_lemma {
                suite.set_proof_tight(true);
            }
        }
    }
}
