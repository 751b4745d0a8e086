//! Text in, verdicts out: loader, emitter and reasoner run together.

use umlsat_core::analysis::{analyze, Backend};
use umlsat_core::loader::{parse_model, parse_unvalidated};
use umlsat_core::model::validate;
use umlsat_core::model::{merge, UmlModel};
use umlsat_core::oracle::SearchBound;
use umlsat_core::owl::{emit, Axiom, AxiomSet, EmitOptions};
use umlsat_core::reasoner::{self, internalize, ClashKind, ReasonerConfig, SatReport};

fn model(text: &str) -> UmlModel {
    parse_model(text).unwrap_or_else(|e| panic!("{}", e.message())).model
}

fn axioms(m: &UmlModel) -> AxiomSet {
    emit(m, EmitOptions::default()).unwrap_or_else(|e| panic!("{e}"))
}

fn check(text: &str, backend: Backend) -> SatReport {
    analyze(&axioms(&model(text)), backend, &SearchBound::default(), &ReasonerConfig::default()).expect("decided")
}

/// State invariants define their states: an order with items must be
/// Cancelled, hence Closed, hence without items. So no order has items, every
/// order is Closed and Open is empty as well.
#[test]
fn state_invariants_are_definitions() {
    let text = "\
class Order
assoc items Order -> Order [0..*]
statechart Order {
  state Open
  state Closed
  state Cancelled in Closed
}
inv Empty context Order.Closed : self.items->isEmpty()
inv Busy context Order.Cancelled : self.items->size() >= 1
";
    for backend in [Backend::Tableau, Backend::Both] {
        let r = check(text, backend);
        assert!(r.consistent, "{backend:?}");
        assert_eq!(r.unsatisfiable, ["Cancelled", "Open"], "{backend:?}");
    }
}

#[test]
fn class_multiplicity_conflict_propagates_to_subclasses() {
    let text = "\
class A
class B extends A
class T
assoc r A -> T [0..1]
assoc s B -> T [2..2] subsets r
";
    let r = check(text, Backend::Tableau);
    assert!(r.consistent);
    assert_eq!(r.unsatisfiable, ["B"]);
}

#[test]
fn merged_object_models_expose_shared_ownership() {
    let part = |text: &str| parse_unvalidated(text, "part.uml").unwrap().model;
    let classes = part("class A\nclass B\nassoc holds A -> B composite\n");
    let first = part("object a1 : A\nobject b : B\nlink holds a1 -> b\n");
    let second = part("object a2 : A\nobject b : B\nlink holds a2 -> b\n");
    let merged = merge(&[classes, first, second]);
    assert!(merged.conflicts.is_empty());
    assert!(validate(&merged.model).is_empty());
    let r = reasoner::check(&axioms(&merged.model), &ReasonerConfig::default()).unwrap();
    assert!(!r.consistent);
    assert_eq!(r.clashes[0].kind, ClashKind::InverseFunctional);
}

#[test]
fn every_clash_points_back_to_axioms_that_exist() {
    let text = "class P\nassoc parent P -> P\nobject x : P\nlink parent x -> x\ninv NoSelf context P : self.parent->excludes(self.parent)\n";
    let ax = axioms(&model(text));
    let r = reasoner::check(&ax, &ReasonerConfig::default()).unwrap();
    let clash = &r.clashes[0];
    assert_eq!(clash.kind, ClashKind::IrreflexiveEdge);
    assert!(!clash.provenance.is_empty());
    for &i in &clash.provenance {
        assert!(i < ax.axioms.len());
    }
    assert!(clash.provenance.iter().any(|&i| matches!(ax.axioms[i], Axiom::IrreflexiveObjProp(_))));
}

#[test]
fn hierarchy_follows_generalization() {
    let text = "class Top\nclass Left extends Top\nclass Right extends Top\nclass Bottom extends Left, Right\n";
    let kb = internalize(&axioms(&model(text)));
    let h = reasoner::classify(&kb, &ReasonerConfig::default()).unwrap();
    assert_eq!(h.render(), "owl:Thing\n  Top\n    Left\n      Bottom\n    Right\n      Bottom\n");
}

#[test]
fn infinite_models_are_recognized_as_consistent() {
    // Every node needs two fresh successors, so only blocking ends the search.
    let text = "\
class Node
class Leaf extends Node
assoc next Node -> Leaf [2..*] nonunique
object n : Leaf
inv Any context Node : self.next->notEmpty() or self.next->isEmpty()
";
    let r = check(text, Backend::Tableau);
    assert!(r.consistent);
    assert!(r.unsatisfiable.is_empty());
}

#[test]
fn link_completion_is_optional() {
    let text = "class A\nclass B\nassoc r A -> B [1..1]\nobject a : A\nobject b1 : B\nobject b2 : B\nlink r a -> b1\n";
    let closed = axioms(&model(text));
    let open = emit(&model(text), EmitOptions { no_link_completion: true, ..EmitOptions::default() }).unwrap();
    let negated = |ax: &AxiomSet| ax.axioms.iter().filter(|a| matches!(a, Axiom::NegObjPropAssertion(..))).count();
    assert_eq!(negated(&closed), 1);
    assert_eq!(negated(&open), 0);
}
