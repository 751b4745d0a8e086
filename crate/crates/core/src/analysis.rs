//! Runs one or both decision procedures over an axiom set and reconciles
//! their answers.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{self, Search, SearchBound};
use crate::owl::{AxiomSet, NameKind};
use crate::reasoner::{self, internalize, KnowledgeBase, Outcome, ReasonError, ReasonerConfig, SatReport, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Tableau,
    Bounded,
    Both,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnalysisError {
    /// No verdict could be reached within the configured limits.
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    /// The two procedures contradict each other.
    #[error("backends disagree: {0}")]
    Disagreement(String),
}

impl From<ReasonError> for AnalysisError {
    fn from(e: ReasonError) -> Self {
        AnalysisError::Indeterminate(e.to_string())
    }
}

/// Consistency and per-concept satisfiability of `ax` with the chosen backend.
pub fn analyze(ax: &AxiomSet, backend: Backend, bound: &SearchBound, cfg: &ReasonerConfig) -> Result<SatReport, AnalysisError> {
    let start = Instant::now();
    let mut report = match backend {
        Backend::Tableau => reasoner::check(ax, cfg)?,
        Backend::Bounded => bounded(ax, bound)?,
        Backend::Both => both(ax, bound, cfg)?,
    };
    report.timings.reason_ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok(report)
}

fn classes(ax: &AxiomSet) -> Vec<String> {
    let mut names = ax.declared(NameKind::Class);
    names.extend(ax.signature().remove(&NameKind::Class).unwrap_or_default());
    names.into_iter().collect()
}

fn oracle_failure(e: oracle::OracleError) -> AnalysisError {
    AnalysisError::Disagreement(format!("bounded search failed its own check: {e}"))
}

fn bounded(ax: &AxiomSet, bound: &SearchBound) -> Result<SatReport, AnalysisError> {
    let mut report = SatReport::default();
    match oracle::find_model(ax, bound).map_err(oracle_failure)? {
        Search::Model(_) => report.consistent = true,
        Search::NoModelUpTo(n) => return Err(AnalysisError::Indeterminate(format!("no model with at most {n} elements"))),
        Search::TimedOut => return Err(AnalysisError::Indeterminate("bounded search timed out".into())),
    }
    let tbox = ax.terminology();
    let mut missing = Vec::new();
    for c in classes(ax) {
        match oracle::concept_satisfiable_bounded(&tbox, &c, bound).map_err(oracle_failure)? {
            Search::Model(_) => {}
            Search::NoModelUpTo(_) | Search::TimedOut => missing.push(c),
        }
    }
    if !missing.is_empty() {
        return Err(AnalysisError::Indeterminate(format!(
            "no bounded model with at most {} elements for {}",
            bound.max_domain_size,
            missing.join(", ")
        )));
    }
    Ok(report)
}

/// Checks a tableau witness against the oracle semantics and, when it is
/// small enough, that the oracle finds some model as well.
fn confirm_witness(
    what: &str,
    w: &Witness,
    ax: &AxiomSet,
    concept: Option<&str>,
    bound: &SearchBound,
) -> Result<(), AnalysisError> {
    if w.blocked {
        return Ok(());
    }
    let i = w.interpretation();
    if let Err(axiom) = oracle::is_model(&i, ax) {
        return Err(AnalysisError::Disagreement(format!("tableau witness for {what} violates {axiom}")));
    }
    if let Some(c) = concept {
        if !i.concept_ext.get(c).is_some_and(|s| !s.is_empty()) {
            return Err(AnalysisError::Disagreement(format!("tableau witness for {what} has no instance of {c}")));
        }
    }
    let named = ax.signature().get(&NameKind::Individual).map_or(0, |s| s.len());
    let (lo, hi) = (named.max(1), bound.max_domain_size.max(named.max(1)));
    if (lo..=hi).contains(&w.nodes.len()) {
        let found = match concept {
            Some(c) => oracle::concept_satisfiable_bounded(ax, c, bound),
            None => oracle::find_model(ax, bound),
        }
        .map_err(oracle_failure)?;
        if let Search::NoModelUpTo(n) = found {
            return Err(AnalysisError::Disagreement(format!(
                "tableau found a {}-element model for {what} but bounded search found none up to {n}",
                w.nodes.len()
            )));
        }
    }
    Ok(())
}

fn refuted(what: &str, found: Search) -> Result<(), AnalysisError> {
    match found {
        Search::Model(i) => {
            Err(AnalysisError::Disagreement(format!("tableau refutes {what} but bounded search found a {}-element model", i.domain_size)))
        }
        _ => Ok(()),
    }
}

fn both(ax: &AxiomSet, bound: &SearchBound, cfg: &ReasonerConfig) -> Result<SatReport, AnalysisError> {
    let kb: KnowledgeBase = internalize(ax);
    let mut report = SatReport::default();
    match reasoner::check_consistency(&kb, cfg)? {
        Outcome::Unsatisfiable(clash) => {
            refuted("consistency", oracle::find_model(ax, bound).map_err(oracle_failure)?)?;
            report.clashes.push(clash);
            return Ok(report);
        }
        Outcome::Satisfiable(w) => {
            confirm_witness("consistency", &w, ax, None, bound)?;
            report.consistent = true;
        }
    }
    let tbox = ax.terminology();
    for c in classes(ax) {
        match reasoner::concept_satisfiable(&kb, &c, cfg)? {
            Outcome::Satisfiable(w) => confirm_witness(&c, &w, &tbox, Some(&c), bound)?,
            Outcome::Unsatisfiable(_) => {
                refuted(&c, oracle::concept_satisfiable_bounded(&tbox, &c, bound).map_err(oracle_failure)?)?;
                if ax.generated.contains(&c) {
                    report.unsatisfiable_generated.push(c);
                } else {
                    report.unsatisfiable.push(c);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_model;
    use crate::owl::{emit, EmitOptions};

    fn run(src: &str, backend: Backend) -> Result<SatReport, AnalysisError> {
        let m = parse_model(src).unwrap().model;
        analyze(&emit(&m, EmitOptions::default()).unwrap(), backend, &SearchBound::default(), &ReasonerConfig::default())
    }

    #[test]
    fn backends_agree_on_small_models() {
        let ok = "class A\nclass B extends A\nassoc r A -> B [1..1]\nobject a : A\n";
        for b in [Backend::Tableau, Backend::Bounded, Backend::Both] {
            let r = run(ok, b).unwrap();
            assert!(r.consistent, "{b:?}");
        }
        let bad = "class P\nassoc h P -> P\nobject x : P\nlink h x -> x\ninv n context P : self.h->excludes(self.h)\n";
        assert!(!run(bad, Backend::Both).unwrap().consistent);
        assert!(matches!(run(bad, Backend::Bounded), Err(AnalysisError::Indeterminate(_))));
    }
}
