//! Tableau reasoning over emitted axiom sets.

mod kb;
mod report;
mod tableau;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

pub use kb::{internalize, KnowledgeBase};
pub use report::{ClashKind, ClashReport, SatReport, Timings};
pub use tableau::{Outcome, ResourceLimit, Witness, WitnessNode};

use crate::owl::AxiomSet;

pub const NODE_CAP_VAR: &str = "UMLSAT_NODE_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReasonerConfig {
    /// Tableau nodes a single run may create before giving up.
    pub node_cap: usize,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        ReasonerConfig { node_cap: 100_000 }
    }
}

impl ReasonerConfig {
    /// Default configuration with the node cap taken from the environment when set.
    pub fn from_env() -> Self {
        let mut cfg = ReasonerConfig::default();
        if let Some(cap) = std::env::var(NODE_CAP_VAR).ok().and_then(|v| v.trim().parse().ok()) {
            cfg.node_cap = cap;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonError {
    #[error("resource limit reached after {nodes} tableau nodes")]
    ResourceLimit { nodes: usize },
    #[error("unknown concept {0}")]
    UnknownConcept(String),
}

impl From<ResourceLimit> for ReasonError {
    fn from(r: ResourceLimit) -> Self {
        ReasonError::ResourceLimit { nodes: r.nodes }
    }
}

/// Decides whether the assertions and terminology have a common model.
pub fn check_consistency(kb: &KnowledgeBase, cfg: &ReasonerConfig) -> Result<Outcome, ReasonError> {
    Ok(tableau::abox_consistency(kb, cfg.node_cap)?)
}

/// Decides whether a named class can have instances.
pub fn concept_satisfiable(kb: &KnowledgeBase, concept: &str, cfg: &ReasonerConfig) -> Result<Outcome, ReasonError> {
    let c = kb.atomic(concept).filter(|_| kb.classes.contains(concept));
    let c = c.ok_or_else(|| ReasonError::UnknownConcept(concept.to_string()))?;
    Ok(tableau::satisfiable(kb, &[c], cfg.node_cap)?)
}

/// Whether every instance of `sub` is an instance of `sup`.
pub fn subsumes(kb: &KnowledgeBase, sup: &str, sub: &str, cfg: &ReasonerConfig) -> Result<bool, ReasonError> {
    let lookup = |n: &str| kb.atomic(n).ok_or_else(|| ReasonError::UnknownConcept(n.to_string()));
    let (a, b) = (lookup(sub)?, lookup(sup)?);
    let not_b = kb.complement_of(b).expect("atoms are interned with their complement");
    Ok(!tableau::satisfiable(kb, &[a, not_b], cfg.node_cap)?.is_sat())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Unsatisfiable {
    pub user: Vec<String>,
    pub generated: Vec<String>,
}

/// Runs a satisfiability test for every declared class.
pub fn unsatisfiable_concepts(kb: &KnowledgeBase, cfg: &ReasonerConfig) -> Result<Unsatisfiable, ReasonError> {
    let names: Vec<&String> = kb.classes.iter().collect();
    let verdicts: Vec<(&String, bool)> = names
        .par_iter()
        .map(|n| concept_satisfiable(kb, n, cfg).map(|o| (*n, o.is_sat())))
        .collect::<Result<_, _>>()?;
    let mut out = Unsatisfiable::default();
    for (n, sat) in verdicts {
        if sat {
            continue;
        }
        if kb.generated.contains(n) {
            out.generated.push(n.clone());
        } else {
            out.user.push(n.clone());
        }
    }
    Ok(out)
}

/// Consistency plus, for a consistent set, the unsatisfiable concepts.
pub fn check(ax: &AxiomSet, cfg: &ReasonerConfig) -> Result<SatReport, ReasonError> {
    let start = Instant::now();
    let kb = internalize(ax);
    let mut report = SatReport::default();
    match check_consistency(&kb, cfg)? {
        Outcome::Unsatisfiable(clash) => report.clashes.push(clash),
        Outcome::Satisfiable(_) => {
            report.consistent = true;
            let unsat = unsatisfiable_concepts(&kb, cfg)?;
            report.unsatisfiable = unsat.user;
            report.unsatisfiable_generated = unsat.generated;
        }
    }
    report.timings.reason_ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok(report)
}

/// Named classes arranged by subsumption. Equivalent classes share a node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hierarchy {
    pub groups: Vec<Vec<String>>,
    /// Child group indices of each group; `None` is the top concept.
    pub children: BTreeMap<Option<usize>, Vec<usize>>,
    pub unsatisfiable: Vec<String>,
}

impl Hierarchy {
    /// Indented tree under `owl:Thing`; a group with several parents is
    /// printed under each of them.
    pub fn render(&self) -> String {
        let mut out = String::from("owl:Thing\n");
        self.render_below(None, 1, &mut out);
        if !self.unsatisfiable.is_empty() {
            out.push_str("owl:Nothing\n");
            for n in &self.unsatisfiable {
                out.push_str(&format!("  {n}\n"));
            }
        }
        out
    }

    fn render_below(&self, at: Option<usize>, depth: usize, out: &mut String) {
        for &k in self.children.get(&at).into_iter().flatten() {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&self.groups[k].join(" = "));
            out.push('\n');
            self.render_below(Some(k), depth + 1, out);
        }
    }
}

/// Computes the subsumption hierarchy of the classes that came from the model.
pub fn classify(kb: &KnowledgeBase, cfg: &ReasonerConfig) -> Result<Hierarchy, ReasonError> {
    let names: Vec<&String> = kb.classes.iter().filter(|n| !kb.generated.contains(*n)).collect();
    let sat: Vec<bool> = names
        .par_iter()
        .map(|n| concept_satisfiable(kb, n, cfg).map(|o| o.is_sat()))
        .collect::<Result<_, _>>()?;
    let mut h = Hierarchy::default();
    let live: Vec<&String> = names.iter().zip(&sat).filter(|(_, s)| **s).map(|(n, _)| *n).collect();
    h.unsatisfiable = names.iter().zip(&sat).filter(|(_, s)| !**s).map(|(n, _)| (*n).clone()).collect();

    let pairs: Vec<(usize, usize)> =
        (0..live.len()).flat_map(|a| (0..live.len()).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let below: BTreeSet<(usize, usize)> = pairs
        .par_iter()
        .map(|&(sub, sup)| subsumes(kb, live[sup], live[sub], cfg).map(|s| s.then_some((sub, sup))))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();

    // Equivalence groups, in name order.
    let mut group_of = vec![usize::MAX; live.len()];
    for a in 0..live.len() {
        if group_of[a] != usize::MAX {
            continue;
        }
        group_of[a] = h.groups.len();
        let mut members = vec![live[a].clone()];
        for b in a + 1..live.len() {
            if below.contains(&(a, b)) && below.contains(&(b, a)) {
                group_of[b] = h.groups.len();
                members.push(live[b].clone());
            }
        }
        h.groups.push(members);
    }
    let rep: Vec<usize> = (0..h.groups.len()).map(|g| group_of.iter().position(|&x| x == g).expect("nonempty group")).collect();
    let strictly_below = |a: usize, b: usize| below.contains(&(rep[a], rep[b])) && !below.contains(&(rep[b], rep[a]));
    for g in 0..h.groups.len() {
        let supers: Vec<usize> = (0..h.groups.len()).filter(|&s| strictly_below(g, s)).collect();
        let direct: Vec<usize> =
            supers.iter().copied().filter(|&s| !supers.iter().any(|&t| t != s && strictly_below(t, s))).collect();
        if direct.is_empty() {
            h.children.entry(None).or_default().push(g);
        }
        for s in direct {
            h.children.entry(Some(s)).or_default().push(g);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_model;
    use crate::model::ElementRef;
    use crate::owl::{emit, Axiom, ConceptExpr, EmitOptions};

    fn report(src: &str) -> SatReport {
        let m = parse_model(src).unwrap().model;
        check(&emit(&m, EmitOptions::default()).unwrap(), &ReasonerConfig::default()).unwrap()
    }

    fn set(axioms: Vec<Axiom>) -> AxiomSet {
        let mut s = AxiomSet::new("t");
        for a in axioms {
            s.push(a, ElementRef::Model);
        }
        s
    }

    #[test]
    fn empty_set_is_consistent() {
        let r = check(&AxiomSet::default(), &ReasonerConfig::default()).unwrap();
        assert!(r.is_clean());
    }

    #[test]
    fn cardinality_conflict() {
        let kb = internalize(&set(vec![
            Axiom::DeclClass("C".into()),
            Axiom::DeclClass("F".into()),
            Axiom::SubClassOf(ConceptExpr::atom("C"), ConceptExpr::ExactCard(1, "R".into())),
            Axiom::SubClassOf(ConceptExpr::atom("C"), ConceptExpr::ExactCard(0, "R".into())),
        ]));
        let cfg = ReasonerConfig::default();
        assert!(!concept_satisfiable(&kb, "C", &cfg).unwrap().is_sat());
        assert!(concept_satisfiable(&kb, "F", &cfg).unwrap().is_sat());
        assert_eq!(unsatisfiable_concepts(&kb, &cfg).unwrap().user, vec!["C".to_string()]);
        assert_eq!(concept_satisfiable(&kb, "Z", &cfg).unwrap_err(), ReasonError::UnknownConcept("Z".into()));
    }

    #[test]
    fn self_link_violates_irreflexivity() {
        let base = "class Person\nassoc hasParent Person -> Person\nobject X : Person\ninv noSelf context Person : self.hasParent->excludes(self.hasParent)\n";
        let bad = report(&format!("{base}link hasParent X -> X\n"));
        assert!(!bad.consistent);
        assert_eq!(bad.clashes[0].kind, ClashKind::IrreflexiveEdge);
        assert_eq!(bad.clashes[0].message, "Irreflexive property hasParent");
        assert!(bad.clashes[0].participants.contains(&"X".to_string()));
        assert!(report(base).is_clean());
    }

    #[test]
    fn shared_part_violates_exclusive_ownership() {
        let r = report(
            "class W\nclass P\nassoc owner W -> P [0..*] composite\nobject a1 : W\nobject a2 : W\nobject b : P\nlink owner a1 -> b\nlink owner a2 -> b\n",
        );
        assert!(!r.consistent);
        let c = &r.clashes[0];
        assert_eq!(c.kind, ClashKind::InverseFunctional);
        assert_eq!(c.participants[0], "b");
        assert_eq!(c.message, "Individual b has more than one value for the functional property inv(owns)");
    }

    #[test]
    fn ownership_cycles() {
        let base = "class N\nassoc part N -> N [0..*] composite\nobject a : N\nobject b : N\nobject c : N\n";
        let cyc = report(&format!("{base}link part a -> b\nlink part b -> a\n"));
        assert!(!cyc.consistent);
        assert_eq!(cyc.clashes[0].kind, ClashKind::IrreflexiveEdge);
        assert!(report(&format!("{base}link part a -> b\nlink part b -> c\n")).consistent);
    }

    #[test]
    fn parallel_links() {
        let unique = report("class A\nclass B\nassoc P A -> B [1..1]\nobject a : A\nobject b : B\nlink P a -> b\nlink P a -> b\n");
        assert!(!unique.consistent);
        let multi = report("class A\nclass B\nassoc P A -> B [1..2] nonunique\nobject a : A\nobject b : B\nlink P a -> b\nlink P a -> b\n");
        assert!(multi.consistent, "{multi:?}");
    }

    #[test]
    fn ordered_indices() {
        let base = "class A\nclass B\nassoc P A -> B [0..*] ordered\nobject a : A\nobject b : B\nobject c : B\n";
        assert!(report(&format!("{base}link P a -> b @1\nlink P a -> c @2\n")).consistent);
        assert!(!report(&format!("{base}link P a -> b @1\nlink P a -> c @1\n")).consistent);
    }

    #[test]
    fn hierarchy_of_merged_models() {
        let m = parse_model("class A\nclass B extends A\nclass C\nclass D extends C\nassoc r A -> C\n").unwrap().model;
        let kb = internalize(&emit(&m, EmitOptions::default()).unwrap());
        let h = classify(&kb, &ReasonerConfig::default()).unwrap();
        assert_eq!(h.render(), "owl:Thing\n  A\n    B\n  C\n    D\n");
    }

    #[test]
    fn diamond_repeats_child() {
        let m = parse_model("class A\nclass B extends A\nclass C extends A\nclass D extends B, C\n").unwrap().model;
        let kb = internalize(&emit(&m, EmitOptions::default()).unwrap());
        let h = classify(&kb, &ReasonerConfig::default()).unwrap();
        assert_eq!(h.render(), "owl:Thing\n  A\n    B\n      D\n    C\n      D\n");
    }

    #[test]
    fn node_cap_is_a_resource_limit() {
        let kb = internalize(&set(vec![
            Axiom::DeclClass("C".into()),
            Axiom::SubClassOf(ConceptExpr::atom("C"), ConceptExpr::MinCard(3, "R".into())),
        ]));
        let err = concept_satisfiable(&kb, "C", &ReasonerConfig { node_cap: 2 }).unwrap_err();
        assert!(matches!(err, ReasonError::ResourceLimit { .. }));
    }
}
