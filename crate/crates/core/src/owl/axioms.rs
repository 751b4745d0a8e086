use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::ElementRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Datatype {
    Boolean,
    String,
    Integer,
}

impl Datatype {
    pub fn iri(self) -> &'static str {
        match self {
            Datatype::Boolean => "xsd:boolean",
            Datatype::String => "xsd:string",
            Datatype::Integer => "xsd:integer",
        }
    }
}

/// A typed literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataValue {
    pub lexical: String,
    pub datatype: Datatype,
}

impl DataValue {
    pub fn string(s: impl Into<String>) -> Self {
        DataValue { lexical: s.into(), datatype: Datatype::String }
    }

    pub fn integer(i: i64) -> Self {
        DataValue { lexical: i.to_string(), datatype: Datatype::Integer }
    }

    pub fn boolean(b: bool) -> Self {
        DataValue { lexical: b.to_string(), datatype: Datatype::Boolean }
    }
}

impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for c in self.lexical.chars() {
            if c == '"' || c == '\\' {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "\"^^{}", self.datatype.iri())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DataRange {
    Datatype(Datatype),
    OneOf(Vec<DataValue>),
}

impl DataRange {
    /// The finite value set of the range, if it has one.
    pub fn finite_values(&self) -> Option<Vec<DataValue>> {
        match self {
            DataRange::Datatype(Datatype::Boolean) => Some(vec![DataValue::boolean(false), DataValue::boolean(true)]),
            DataRange::Datatype(_) => None,
            DataRange::OneOf(vs) => Some(vs.clone()),
        }
    }

    pub fn contains(&self, v: &DataValue) -> bool {
        match self {
            DataRange::Datatype(dt) => v.datatype == *dt && (v.datatype != Datatype::Boolean || v.lexical == "true" || v.lexical == "false"),
            DataRange::OneOf(vs) => vs.contains(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConceptExpr {
    Atomic(String),
    Top,
    Bottom,
    Not(Box<ConceptExpr>),
    And(Vec<ConceptExpr>),
    Or(Vec<ConceptExpr>),
    MinCard(u64, String),
    MaxCard(u64, String),
    ExactCard(u64, String),
    /// Existential restriction; used only for one-step navigation in OCL.
    SomeValuesFrom(String, Box<ConceptExpr>),
    DataHasValue(String, DataValue),
    DataExactCard(u64, String),
}

impl ConceptExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        ConceptExpr::Atomic(name.into())
    }

    /// Conjunction that collapses to its single member when given one.
    pub fn and_of(mut items: Vec<ConceptExpr>) -> Self {
        match items.len() {
            0 => ConceptExpr::Top,
            1 => items.pop().unwrap_or(ConceptExpr::Top),
            _ => ConceptExpr::And(items),
        }
    }

    pub fn or_of(mut items: Vec<ConceptExpr>) -> Self {
        match items.len() {
            0 => ConceptExpr::Bottom,
            1 => items.pop().unwrap_or(ConceptExpr::Bottom),
            _ => ConceptExpr::Or(items),
        }
    }

    pub fn not(c: ConceptExpr) -> Self {
        ConceptExpr::Not(Box::new(c))
    }

    pub fn visit_names<'a>(&'a self, f: &mut impl FnMut(NameKind, &'a str)) {
        match self {
            ConceptExpr::Atomic(a) => f(NameKind::Class, a),
            ConceptExpr::Top | ConceptExpr::Bottom => {}
            ConceptExpr::Not(c) => c.visit_names(f),
            ConceptExpr::And(cs) | ConceptExpr::Or(cs) => cs.iter().for_each(|c| c.visit_names(f)),
            ConceptExpr::MinCard(_, r) | ConceptExpr::MaxCard(_, r) | ConceptExpr::ExactCard(_, r) => {
                f(NameKind::ObjectProperty, r)
            }
            ConceptExpr::SomeValuesFrom(r, c) => {
                f(NameKind::ObjectProperty, r);
                c.visit_names(f);
            }
            ConceptExpr::DataHasValue(p, _) | ConceptExpr::DataExactCard(_, p) => f(NameKind::DataProperty, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NameKind {
    Class,
    ObjectProperty,
    DataProperty,
    Individual,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    DeclClass(String),
    DeclObjProp(String),
    DeclDataProp(String),
    DeclIndividual(String),
    SubClassOf(ConceptExpr, ConceptExpr),
    EquivalentClasses(Vec<ConceptExpr>),
    DisjointClasses(Vec<ConceptExpr>),
    ObjPropDomain(String, ConceptExpr),
    ObjPropRange(String, ConceptExpr),
    SubObjPropOf(String, String),
    InverseObjProps(String, String),
    FunctionalObjProp(String),
    InverseFunctionalObjProp(String),
    IrreflexiveObjProp(String),
    DataPropDomain(String, ConceptExpr),
    DataPropRange(String, DataRange),
    ClassAssertion(ConceptExpr, String),
    ObjPropAssertion(String, String, String),
    NegObjPropAssertion(String, String, String),
    DataPropAssertion(String, String, DataValue),
    SameIndividual(Vec<String>),
    DifferentIndividuals(Vec<String>),
}

impl Axiom {
    /// Serialization rank: declarations first, then property characteristics
    /// and class axioms, then assertions.
    pub fn kind_rank(&self) -> u8 {
        match self {
            Axiom::DeclClass(_) => 0,
            Axiom::DeclObjProp(_) => 1,
            Axiom::DeclDataProp(_) => 2,
            Axiom::DeclIndividual(_) => 3,
            Axiom::ObjPropDomain(..) => 10,
            Axiom::ObjPropRange(..) => 11,
            Axiom::SubClassOf(..) => 12,
            Axiom::EquivalentClasses(_) => 13,
            Axiom::DisjointClasses(_) => 14,
            Axiom::SubObjPropOf(..) => 15,
            Axiom::InverseObjProps(..) => 16,
            Axiom::FunctionalObjProp(_) => 17,
            Axiom::InverseFunctionalObjProp(_) => 18,
            Axiom::IrreflexiveObjProp(_) => 19,
            Axiom::DataPropDomain(..) => 20,
            Axiom::DataPropRange(..) => 21,
            Axiom::ClassAssertion(..) => 30,
            Axiom::ObjPropAssertion(..) => 31,
            Axiom::NegObjPropAssertion(..) => 32,
            Axiom::DataPropAssertion(..) => 33,
            Axiom::SameIndividual(_) => 34,
            Axiom::DifferentIndividuals(_) => 35,
        }
    }

    pub fn is_declaration(&self) -> bool {
        self.kind_rank() < 10
    }

    /// Axioms about named individuals.
    pub fn is_assertion(&self) -> bool {
        self.kind_rank() >= 30
    }

    pub fn visit_names<'a>(&'a self, f: &mut impl FnMut(NameKind, &'a str)) {
        use NameKind::*;
        match self {
            Axiom::DeclClass(n) => f(Class, n),
            Axiom::DeclObjProp(n) => f(ObjectProperty, n),
            Axiom::DeclDataProp(n) => f(DataProperty, n),
            Axiom::DeclIndividual(n) => f(Individual, n),
            Axiom::SubClassOf(a, b) => {
                a.visit_names(f);
                b.visit_names(f);
            }
            Axiom::EquivalentClasses(cs) | Axiom::DisjointClasses(cs) => cs.iter().for_each(|c| c.visit_names(f)),
            Axiom::ObjPropDomain(r, c) | Axiom::ObjPropRange(r, c) => {
                f(ObjectProperty, r);
                c.visit_names(f);
            }
            Axiom::SubObjPropOf(a, b) | Axiom::InverseObjProps(a, b) => {
                f(ObjectProperty, a);
                f(ObjectProperty, b);
            }
            Axiom::FunctionalObjProp(r) | Axiom::InverseFunctionalObjProp(r) | Axiom::IrreflexiveObjProp(r) => {
                f(ObjectProperty, r)
            }
            Axiom::DataPropDomain(p, c) => {
                f(DataProperty, p);
                c.visit_names(f);
            }
            Axiom::DataPropRange(p, _) => f(DataProperty, p),
            Axiom::ClassAssertion(c, i) => {
                c.visit_names(f);
                f(Individual, i);
            }
            Axiom::ObjPropAssertion(r, a, b) | Axiom::NegObjPropAssertion(r, a, b) => {
                f(ObjectProperty, r);
                f(Individual, a);
                f(Individual, b);
            }
            Axiom::DataPropAssertion(p, i, _) => {
                f(DataProperty, p);
                f(Individual, i);
            }
            Axiom::SameIndividual(is) | Axiom::DifferentIndividuals(is) => is.iter().for_each(|i| f(Individual, i)),
        }
    }
}

/// One atom `role(x, y)` of a rule over variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RoleAtom {
    pub role: String,
    pub subject: String,
    pub object: String,
}

impl RoleAtom {
    pub fn new(role: &str, subject: &str, object: &str) -> Self {
        RoleAtom { role: role.into(), subject: subject.into(), object: object.into() }
    }
}

/// A rule applied to named individuals only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DlSafeRule {
    pub body: Vec<RoleAtom>,
    pub head: RoleAtom,
}

impl DlSafeRule {
    pub fn transitivity(role: &str) -> Self {
        DlSafeRule {
            body: vec![RoleAtom::new(role, "x", "y"), RoleAtom::new(role, "y", "z")],
            head: RoleAtom::new(role, "x", "z"),
        }
    }
}

/// Tags an axiom produced by a translation that goes beyond the core rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProvenanceNote {
    Extension,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomSet {
    pub ontology: String,
    pub axioms: Vec<Axiom>,
    pub rules: Vec<DlSafeRule>,
    /// Source elements of each axiom, parallel to `axioms`.
    pub provenance: Vec<Vec<ElementRef>>,
    pub notes: BTreeMap<usize, ProvenanceNote>,
    /// Elements deliberately left out of the translation.
    pub untranslated: Vec<ElementRef>,
    /// Names introduced by the compiler rather than taken from the model.
    pub generated: BTreeSet<String>,
}

impl AxiomSet {
    pub fn new(ontology: impl Into<String>) -> Self {
        AxiomSet { ontology: ontology.into(), ..Default::default() }
    }

    pub fn push(&mut self, axiom: Axiom, source: ElementRef) {
        self.axioms.push(axiom);
        self.provenance.push(vec![source]);
    }

    pub fn push_noted(&mut self, axiom: Axiom, source: ElementRef, note: ProvenanceNote) {
        self.notes.insert(self.axioms.len(), note);
        self.push(axiom, source);
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty() && self.rules.is_empty()
    }

    /// Sorts axioms into serialization order and removes duplicates, merging
    /// their provenance.
    pub fn canonicalize(&mut self) {
        let mut keyed: Vec<(u8, String, Axiom, Vec<ElementRef>, Option<ProvenanceNote>)> = std::mem::take(&mut self.axioms)
            .into_iter()
            .zip(std::mem::take(&mut self.provenance))
            .enumerate()
            .map(|(i, (ax, prov))| {
                let text = crate::owl::functional::render_axiom(&ax);
                (ax.kind_rank(), text, ax, prov, self.notes.get(&i).copied())
            })
            .collect();
        keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        self.notes.clear();
        for (rank, text, ax, mut prov, note) in keyed {
            let dup = self.axioms.last().is_some_and(|last| {
                last.kind_rank() == rank && crate::owl::functional::render_axiom(last) == text
            });
            if dup {
                let last = self.provenance.last_mut().expect("parallel provenance");
                last.append(&mut prov);
                last.sort();
                last.dedup();
                if let Some(n) = note {
                    self.notes.insert(self.axioms.len() - 1, n);
                }
            } else {
                prov.sort();
                prov.dedup();
                if let Some(n) = note {
                    self.notes.insert(self.axioms.len(), n);
                }
                self.axioms.push(ax);
                self.provenance.push(prov);
            }
        }
        self.rules.sort();
        self.rules.dedup();
    }

    /// Names used anywhere in the set, by kind.
    pub fn signature(&self) -> BTreeMap<NameKind, BTreeSet<String>> {
        let mut out: BTreeMap<NameKind, BTreeSet<String>> = BTreeMap::new();
        for ax in &self.axioms {
            ax.visit_names(&mut |k, n| {
                out.entry(k).or_default().insert(n.to_string());
            });
        }
        for r in &self.rules {
            for atom in r.body.iter().chain(std::iter::once(&r.head)) {
                out.entry(NameKind::ObjectProperty).or_default().insert(atom.role.clone());
            }
        }
        out
    }

    pub fn declared(&self, kind: NameKind) -> BTreeSet<String> {
        self.axioms
            .iter()
            .filter_map(|a| match (kind, a) {
                (NameKind::Class, Axiom::DeclClass(n))
                | (NameKind::ObjectProperty, Axiom::DeclObjProp(n))
                | (NameKind::DataProperty, Axiom::DeclDataProp(n))
                | (NameKind::Individual, Axiom::DeclIndividual(n)) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    /// Same set without assertions about individuals.
    pub fn terminology(&self) -> AxiomSet {
        let mut out = AxiomSet::new(self.ontology.clone());
        out.generated = self.generated.clone();
        for (ax, prov) in self.axioms.iter().zip(&self.provenance) {
            if !ax.is_assertion() && !matches!(ax, Axiom::DeclIndividual(_)) {
                out.axioms.push(ax.clone());
                out.provenance.push(prov.clone());
            }
        }
        out.rules = self.rules.clone();
        out
    }
}
