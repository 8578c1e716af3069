//! The experiment layer: parameter classification, equivalence sweeps, divergence witnesses,
//! membership scans and their reports.

pub mod config;
pub mod divergence;
pub mod equivalence;
pub mod fit;
pub mod membership;
pub mod params;
pub mod report;

use crate::error::Result;
use config::LabConfig;
use report::{ClassifyReport, Outcome};

/// Classifies every listed tuple.
pub fn run_classify(tuples: &[params::SpaceParams]) -> Result<ClassifyReport> {
    let rows = tuples
        .iter()
        .map(|x| Ok((*x, params::classify(x)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassifyReport { rows })
}

/// Runs every section of a configuration in document order: classify, equivalence, divergence,
/// membership.
pub fn run_all(config: &LabConfig) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    if !config.classify.is_empty() {
        out.push(Outcome::Classify(run_classify(&config.classify)?));
    }
    for e in &config.equivalence {
        out.push(Outcome::Equivalence(equivalence::run_equivalence_experiment(
            e,
            config.seed,
        )?));
    }
    for d in &config.divergence {
        out.push(Outcome::Divergence(divergence::run_divergence_experiment(d)?));
    }
    for m in &config.membership {
        out.push(Outcome::Membership(membership::run_membership_scan(m)?));
    }
    Ok(out)
}
