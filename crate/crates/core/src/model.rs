//! UML abstract syntax: classes, associations, object diagrams, statecharts
//! and OCL constraints, together with well-formedness validation, model
//! merge and the element census used by classification reports.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ocl::{OclExpr, OclRef};

/// Datatype of a class attribute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttrType {
    Boolean,
    String,
    Integer,
    Enumeration(String),
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrType::Boolean => f.write_str("boolean"),
            AttrType::String => f.write_str("string"),
            AttrType::Integer => f.write_str("integer"),
            AttrType::Enumeration(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub datatype: AttrType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassDef {
    pub name: String,
    pub superclasses: BTreeSet<String>,
    pub attributes: Vec<AttributeDef>,
}

impl ClassDef {
    pub fn new(name: impl Into<String>) -> Self {
        ClassDef { name: name.into(), superclasses: BTreeSet::new(), attributes: Vec::new() }
    }

    pub fn extends(mut self, sup: impl Into<String>) -> Self {
        self.superclasses.insert(sup.into());
        self
    }

    pub fn attribute(mut self, name: impl Into<String>, datatype: AttrType) -> Self {
        self.attributes.push(AttributeDef { name: name.into(), datatype });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnumerationDef {
    pub name: String,
    pub literals: Vec<String>,
}

/// Association multiplicity; `max == None` is the unbounded `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Multiplicity {
    pub min: u64,
    pub max: Option<u64>,
}

impl Multiplicity {
    pub const ANY: Multiplicity = Multiplicity { min: 0, max: None };

    pub fn new(min: u64, max: Option<u64>) -> Self {
        Multiplicity { min, max }
    }

    pub fn exactly(n: u64) -> Self {
        Multiplicity { min: n, max: Some(n) }
    }

    pub fn admits(&self, count: u64) -> bool {
        count >= self.min && self.max.is_none_or(|m| count <= m)
    }
}

impl Default for Multiplicity {
    fn default() -> Self {
        Multiplicity::ANY
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "[{}..{}]", self.min, max),
            None => write!(f, "[{}..*]", self.min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssociationDef {
    pub name: String,
    pub domain: String,
    pub range: String,
    pub multiplicity: Multiplicity,
    pub unique: bool,
    pub ordered: bool,
    pub composite: bool,
    pub subsets: Option<String>,
    pub inverse_of: Option<String>,
}

impl AssociationDef {
    pub fn new(name: impl Into<String>, domain: impl Into<String>, range: impl Into<String>) -> Self {
        AssociationDef {
            name: name.into(),
            domain: domain.into(),
            range: range.into(),
            multiplicity: Multiplicity::ANY,
            unique: true,
            ordered: false,
            composite: false,
            subsets: None,
            inverse_of: None,
        }
    }

    pub fn with_multiplicity(mut self, m: Multiplicity) -> Self {
        self.multiplicity = m;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectDef {
    pub name: String,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkDef {
    pub association: String,
    pub source: String,
    pub target: String,
    pub index: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NegLinkDef {
    pub association: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateKind {
    Simple,
    Composite,
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateDef {
    pub name: String,
    pub parent: Option<String>,
    /// Region of the parent this state lives in; only under orthogonal parents.
    pub region: Option<String>,
    pub orthogonal: bool,
}

impl StateDef {
    pub fn new(name: impl Into<String>) -> Self {
        StateDef { name: name.into(), parent: None, region: None, orthogonal: false }
    }

    pub fn within(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }
}

/// Behavioral view of one class. Transitions are kept verbatim and never
/// translated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StatechartDef {
    pub class: String,
    pub states: Vec<StateDef>,
    pub transitions: Vec<String>,
}

impl StatechartDef {
    pub fn state(&self, name: &str) -> Option<&StateDef> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn children<'a>(&'a self, parent: &'a str) -> impl Iterator<Item = &'a StateDef> + 'a {
        self.states.iter().filter(move |s| s.parent.as_deref() == Some(parent))
    }

    pub fn top_level(&self) -> impl Iterator<Item = &StateDef> {
        self.states.iter().filter(|s| s.parent.is_none())
    }

    pub fn kind_of(&self, name: &str) -> StateKind {
        match self.state(name) {
            Some(s) if s.orthogonal => StateKind::Orthogonal,
            Some(_) if self.children(name).next().is_some() => StateKind::Composite,
            _ => StateKind::Simple,
        }
    }

    /// Distinct region identifiers used by the children of `name`, sorted.
    pub fn regions_of(&self, name: &str) -> Vec<String> {
        let set: BTreeSet<String> = self.children(name).filter_map(|s| s.region.clone()).collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintContext {
    Class(String),
    State { class: String, state: String },
}

impl ConstraintContext {
    /// The class whose instances `self` ranges over.
    pub fn class(&self) -> &str {
        match self {
            ConstraintContext::Class(c) => c,
            ConstraintContext::State { class, .. } => class,
        }
    }
}

impl fmt::Display for ConstraintContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintContext::Class(c) => f.write_str(c),
            ConstraintContext::State { class, state } => write!(f, "{class}.{state}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OclConstraint {
    pub name: String,
    pub context: ConstraintContext,
    pub expr: OclExpr,
}

/// A UML model: the union of every diagram kind. Element lists are kept in
/// canonical order by [`UmlModel::canonicalize`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UmlModel {
    pub name: String,
    pub classes: Vec<ClassDef>,
    pub associations: Vec<AssociationDef>,
    pub enumerations: Vec<EnumerationDef>,
    pub objects: Vec<ObjectDef>,
    pub links: Vec<LinkDef>,
    pub negative_links: Vec<NegLinkDef>,
    pub statecharts: Vec<StatechartDef>,
    pub constraints: Vec<OclConstraint>,
}

/// Location of a model element, used by diagnostics and axiom provenance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementRef {
    Model,
    Class(String),
    Generalization { sub: String, sup: String },
    Attribute { class: String, name: String },
    Enumeration(String),
    Association(String),
    Object(String),
    Link(usize),
    NegLink(usize),
    Statechart(String),
    State { class: String, state: String },
    Transition { class: String, index: usize },
    Constraint(String),
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Model => f.write_str("model"),
            ElementRef::Class(c) => write!(f, "class {c}"),
            ElementRef::Generalization { sub, sup } => write!(f, "generalization {sub} -> {sup}"),
            ElementRef::Attribute { class, name } => write!(f, "attribute {class}.{name}"),
            ElementRef::Enumeration(e) => write!(f, "enumeration {e}"),
            ElementRef::Association(a) => write!(f, "association {a}"),
            ElementRef::Object(o) => write!(f, "object {o}"),
            ElementRef::Link(i) => write!(f, "link #{}", i + 1),
            ElementRef::NegLink(i) => write!(f, "nolink #{}", i + 1),
            ElementRef::Statechart(c) => write!(f, "statechart {c}"),
            ElementRef::State { class, state } => write!(f, "state {class}.{state}"),
            ElementRef::Transition { class, index } => write!(f, "transition #{} of {class}", index + 1),
            ElementRef::Constraint(n) => write!(f, "constraint {n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticKind {
    DuplicateName,
    UnresolvedReference,
    GeneralizationCycle,
    InvalidMultiplicity,
    InvalidEnumeration,
    InvalidSubsets,
    InvalidInverse,
    UnsupportedCombination,
    LinkIndex,
    InvalidStateHierarchy,
    OclReference,
    MergeConflict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub element: ElementRef,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, element: ElementRef, message: impl Into<String>) -> Self {
        Diagnostic { kind, element, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

impl UmlModel {
    pub fn new(name: impl Into<String>) -> Self {
        UmlModel { name: name.into(), ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
            && self.associations.is_empty()
            && self.enumerations.is_empty()
            && self.objects.is_empty()
            && self.links.is_empty()
            && self.negative_links.is_empty()
            && self.statecharts.is_empty()
            && self.constraints.is_empty()
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&AssociationDef> {
        self.associations.iter().find(|a| a.name == name)
    }

    pub fn enumeration(&self, name: &str) -> Option<&EnumerationDef> {
        self.enumerations.iter().find(|e| e.name == name)
    }

    pub fn object(&self, name: &str) -> Option<&ObjectDef> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn statechart(&self, class: &str) -> Option<&StatechartDef> {
        self.statecharts.iter().find(|s| s.class == class)
    }

    /// Sorts every element list into canonical order. Duplicate entries that
    /// are structurally identical are collapsed; links keep their multiplicity
    /// since parallel links are meaningful for non-unique associations.
    pub fn canonicalize(&mut self) {
        for class in &mut self.classes {
            class.attributes.sort();
            class.attributes.dedup();
        }
        sort_dedup(&mut self.classes);
        sort_dedup(&mut self.associations);
        sort_dedup(&mut self.enumerations);
        sort_dedup(&mut self.objects);
        self.links.sort();
        sort_dedup(&mut self.negative_links);
        for sc in &mut self.statecharts {
            sc.states.sort();
            sc.states.dedup();
            sc.transitions.sort();
            sc.transitions.dedup();
        }
        sort_dedup(&mut self.statecharts);
        sort_dedup(&mut self.constraints);
    }

    /// Every class reachable through generalization from `class`, including
    /// `class` itself. Terminates on cyclic hierarchies.
    pub fn ancestors(&self, class: &str) -> BTreeSet<String> {
        ancestors_in(&self.superclass_index(), class)
    }

    /// Object names by every class they are an instance of, directly or
    /// through generalization.
    pub fn instances_by_class(&self) -> HashMap<String, Vec<&str>> {
        let supers = self.superclass_index();
        let mut out: HashMap<String, Vec<&str>> = HashMap::new();
        for o in &self.objects {
            for c in ancestors_in(&supers, &o.class) {
                out.entry(c).or_default().push(&o.name);
            }
        }
        out
    }


    pub fn is_subclass_of(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.ancestors(sub).contains(sup)
    }

    fn superclass_index(&self) -> HashMap<&str, Vec<&str>> {
        let mut map: HashMap<&str, Vec<&str>> = HashMap::new();
        for c in &self.classes {
            map.entry(c.name.as_str()).or_default().extend(c.superclasses.iter().map(String::as_str));
        }
        map
    }

    /// Looks up an attribute visible in `class` (own or inherited).
    pub fn find_attribute(&self, class: &str, attr: &str) -> Option<&AttributeDef> {
        let ancestors = self.ancestors(class);
        self.classes
            .iter()
            .filter(|c| ancestors.contains(&c.name))
            .flat_map(|c| c.attributes.iter())
            .find(|a| a.name == attr)
    }

    /// Looks up an association navigable from instances of `class`.
    pub fn find_association_from(&self, class: &str, assoc: &str) -> Option<&AssociationDef> {
        let ancestors = self.ancestors(class);
        self.associations.iter().find(|a| a.name == assoc && ancestors.contains(&a.domain))
    }
}

fn ancestors_in(supers: &HashMap<&str, Vec<&str>>, class: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![class.to_string()];
    while let Some(c) = stack.pop() {
        if seen.insert(c.clone()) {
            if let Some(ss) = supers.get(c.as_str()) {
                stack.extend(ss.iter().map(|s| s.to_string()));
            }
        }
    }
    seen
}

fn sort_dedup<T: Ord>(v: &mut Vec<T>) {
    v.sort();
    v.dedup();
}

/// Checks every well-formedness rule of the abstract syntax. An empty result
/// means the model is valid.
pub fn validate(model: &UmlModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    use DiagnosticKind::*;

    let class_names: HashSet<&str> = model.classes.iter().map(|c| c.name.as_str()).collect();
    let enum_names: HashSet<&str> = model.enumerations.iter().map(|e| e.name.as_str()).collect();
    let object_names: HashSet<&str> = model.objects.iter().map(|o| o.name.as_str()).collect();

    duplicates(model.classes.iter().map(|c| c.name.as_str()), "class", ElementRef::Class, &mut out);
    duplicates(model.associations.iter().map(|a| a.name.as_str()), "association", ElementRef::Association, &mut out);
    duplicates(model.enumerations.iter().map(|e| e.name.as_str()), "enumeration", ElementRef::Enumeration, &mut out);
    duplicates(model.objects.iter().map(|o| o.name.as_str()), "object", ElementRef::Object, &mut out);
    duplicates(model.statecharts.iter().map(|s| s.class.as_str()), "statechart", ElementRef::Statechart, &mut out);
    duplicates(model.constraints.iter().map(|c| c.name.as_str()), "constraint", ElementRef::Constraint, &mut out);

    for class in &model.classes {
        let at = || ElementRef::Class(class.name.clone());
        for sup in &class.superclasses {
            if !class_names.contains(sup.as_str()) {
                out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved superclass {sup}")));
            }
        }
        let mut seen = HashSet::new();
        for attr in &class.attributes {
            let at = ElementRef::Attribute { class: class.name.clone(), name: attr.name.clone() };
            if !seen.insert(attr.name.as_str()) {
                out.push(Diagnostic::new(DuplicateName, at.clone(), format!("duplicate attribute {}", attr.name)));
            }
            if let AttrType::Enumeration(e) = &attr.datatype {
                if !enum_names.contains(e.as_str()) {
                    out.push(Diagnostic::new(UnresolvedReference, at, format!("unresolved enumeration {e}")));
                }
            }
        }
    }
    for cycle_member in generalization_cycles(model) {
        out.push(Diagnostic::new(
            GeneralizationCycle,
            ElementRef::Class(cycle_member.clone()),
            format!("generalization cycle through {cycle_member}"),
        ));
    }

    for e in &model.enumerations {
        let at = || ElementRef::Enumeration(e.name.clone());
        if e.literals.is_empty() {
            out.push(Diagnostic::new(InvalidEnumeration, at(), "enumeration has no literals"));
        }
        let mut seen = HashSet::new();
        for lit in &e.literals {
            if !seen.insert(lit) {
                out.push(Diagnostic::new(InvalidEnumeration, at(), format!("duplicate literal {lit}")));
            }
        }
    }

    for a in &model.associations {
        let at = || ElementRef::Association(a.name.clone());
        for end in [&a.domain, &a.range] {
            if !class_names.contains(end.as_str()) {
                out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved class {end}")));
            }
        }
        if let Some(max) = a.multiplicity.max {
            if max == 0 {
                out.push(Diagnostic::new(InvalidMultiplicity, at(), "max multiplicity must be positive"));
            } else if a.multiplicity.min > max {
                out.push(Diagnostic::new(InvalidMultiplicity, at(), "min exceeds max"));
            }
        }
        if a.ordered && !a.unique {
            out.push(Diagnostic::new(UnsupportedCombination, at(), "association cannot be both ordered and non-unique"));
        }
        if !a.unique && (a.composite || a.subsets.is_some() || a.inverse_of.is_some()) {
            out.push(Diagnostic::new(
                UnsupportedCombination,
                at(),
                "non-unique association cannot be composite, subset or inverse",
            ));
        }
        if let Some(target) = &a.subsets {
            match model.association(target) {
                None => out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved subsetted association {target}"))),
                Some(t) => {
                    if !model.is_subclass_of(&a.domain, &t.domain) || !model.is_subclass_of(&a.range, &t.range) {
                        out.push(Diagnostic::new(
                            InvalidSubsets,
                            at(),
                            format!("domain and range must specialize those of {target}"),
                        ));
                    }
                    if !t.unique {
                        out.push(Diagnostic::new(UnsupportedCombination, at(), format!("cannot subset non-unique {target}")));
                    }
                }
            }
        }
        if let Some(inv) = &a.inverse_of {
            match model.association(inv) {
                None => out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved inverse association {inv}"))),
                Some(t) => {
                    if t.domain != a.range || t.range != a.domain {
                        out.push(Diagnostic::new(
                            InvalidInverse,
                            at(),
                            format!("inverse {inv} must have opposite domain and range"),
                        ));
                    }
                    if !t.unique {
                        out.push(Diagnostic::new(UnsupportedCombination, at(), format!("cannot be inverse of non-unique {inv}")));
                    }
                }
            }
        }
    }

    for o in &model.objects {
        if !class_names.contains(o.class.as_str()) {
            out.push(Diagnostic::new(
                UnresolvedReference,
                ElementRef::Object(o.name.clone()),
                format!("unresolved class {}", o.class),
            ));
        }
    }

    let mut indices: BTreeMap<(&str, &str), Vec<u64>> = BTreeMap::new();
    for (i, l) in model.links.iter().enumerate() {
        let at = || ElementRef::Link(i);
        let assoc = model.association(&l.association);
        if assoc.is_none() {
            out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved association {}", l.association)));
        }
        for end in [&l.source, &l.target] {
            if !object_names.contains(end.as_str()) {
                out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved object {end}")));
            }
        }
        if let Some(a) = assoc {
            match (a.ordered, l.index) {
                (true, None) => out.push(Diagnostic::new(LinkIndex, at(), "link of ordered association needs an index")),
                (false, Some(_)) => out.push(Diagnostic::new(LinkIndex, at(), "index on link of unordered association")),
                (true, Some(0)) => out.push(Diagnostic::new(LinkIndex, at(), "link index must be positive")),
                (true, Some(ix)) => indices.entry((&l.association, &l.source)).or_default().push(ix),
                (false, None) => {}
            }
        }
    }
    for ((assoc, source), ixs) in indices {
        // Indices must form 1..k as a set. Repeated indices towards different
        // targets are a semantic conflict left to the reasoner.
        let set: BTreeSet<u64> = ixs.into_iter().collect();
        let k = set.len() as u64;
        if set.iter().copied().ne(1..=k) {
            let first = model
                .links
                .iter()
                .position(|l| l.association == assoc && l.source == source)
                .unwrap_or(0);
            out.push(Diagnostic::new(
                LinkIndex,
                ElementRef::Link(first),
                format!("index gap in ordered links of {assoc} from {source}"),
            ));
        }
    }

    for (i, l) in model.negative_links.iter().enumerate() {
        let at = || ElementRef::NegLink(i);
        if model.association(&l.association).is_none() {
            out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved association {}", l.association)));
        }
        for end in [&l.source, &l.target] {
            if !object_names.contains(end.as_str()) {
                out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved object {end}")));
            }
        }
    }

    validate_statecharts(model, &class_names, &mut out);

    for c in &model.constraints {
        validate_constraint(model, c, &mut out);
    }

    out
}

fn duplicates<'a>(
    names: impl Iterator<Item = &'a str>,
    what: &str,
    at: impl Fn(String) -> ElementRef,
    out: &mut Vec<Diagnostic>,
) {
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for n in names {
        if !seen.insert(n) && reported.insert(n) {
            out.push(Diagnostic::new(DiagnosticKind::DuplicateName, at(n.to_string()), format!("duplicate {what} name {n}")));
        }
    }
}

fn generalization_cycles(model: &UmlModel) -> Vec<String> {
    // Iterative three-colour DFS; reports the class closing each back edge.
    let index = model.superclass_index();
    let mut color: HashMap<&str, u8> = HashMap::new();
    let mut found = BTreeSet::new();
    let mut names: Vec<&str> = index.keys().copied().collect();
    names.sort_unstable();
    for &start in &names {
        if color.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        color.insert(start, 1);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let supers = index.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if *next < supers.len() {
                let s = supers[*next];
                *next += 1;
                match color.get(s).copied().unwrap_or(0) {
                    0 if index.contains_key(s) => {
                        color.insert(s, 1);
                        stack.push((s, 0));
                    }
                    1 => {
                        found.insert(s.to_string());
                    }
                    _ => {}
                }
            } else {
                color.insert(node, 2);
                stack.pop();
            }
        }
    }
    found.into_iter().collect()
}

fn validate_statecharts(model: &UmlModel, class_names: &HashSet<&str>, out: &mut Vec<Diagnostic>) {
    use DiagnosticKind::*;
    let mut all_states: HashMap<&str, &str> = HashMap::new();
    for sc in &model.statecharts {
        if !class_names.contains(sc.class.as_str()) {
            out.push(Diagnostic::new(
                UnresolvedReference,
                ElementRef::Statechart(sc.class.clone()),
                format!("unresolved class {}", sc.class),
            ));
        }
        let mut seen = HashSet::new();
        for s in &sc.states {
            let at = || ElementRef::State { class: sc.class.clone(), state: s.name.clone() };
            if !seen.insert(s.name.as_str()) {
                out.push(Diagnostic::new(DuplicateName, at(), format!("duplicate state name {}", s.name)));
                continue;
            }
            if class_names.contains(s.name.as_str()) {
                out.push(Diagnostic::new(DuplicateName, at(), format!("state {} collides with a class name", s.name)));
            }
            if let Some(other) = all_states.insert(&s.name, &sc.class) {
                if other != sc.class {
                    out.push(Diagnostic::new(
                        DuplicateName,
                        at(),
                        format!("state {} also declared in statechart of {other}", s.name),
                    ));
                }
            }
            match &s.parent {
                Some(p) => match sc.state(p) {
                    None => out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved parent state {p}"))),
                    Some(parent) => {
                        if parent.orthogonal && s.region.is_none() {
                            out.push(Diagnostic::new(
                                InvalidStateHierarchy,
                                at(),
                                format!("substate of orthogonal state {p} needs a region"),
                            ));
                        }
                        if !parent.orthogonal && s.region.is_some() {
                            out.push(Diagnostic::new(
                                InvalidStateHierarchy,
                                at(),
                                format!("region given but parent {p} is not orthogonal"),
                            ));
                        }
                    }
                },
                None => {
                    if s.region.is_some() {
                        out.push(Diagnostic::new(InvalidStateHierarchy, at(), "region given on a top-level state"));
                    }
                }
            }
            if s.orthogonal && sc.regions_of(&s.name).len() < 2 {
                out.push(Diagnostic::new(
                    InvalidStateHierarchy,
                    at(),
                    "orthogonal state needs at least two regions",
                ));
            }
        }
        // containment must be a forest
        for s in &sc.states {
            let mut cur = s.parent.as_deref();
            let mut steps = 0;
            while let Some(p) = cur {
                if p == s.name || steps > sc.states.len() {
                    out.push(Diagnostic::new(
                        InvalidStateHierarchy,
                        ElementRef::State { class: sc.class.clone(), state: s.name.clone() },
                        "state containment cycle",
                    ));
                    break;
                }
                cur = sc.state(p).and_then(|ps| ps.parent.as_deref());
                steps += 1;
            }
        }
    }
}

fn validate_constraint(model: &UmlModel, c: &OclConstraint, out: &mut Vec<Diagnostic>) {
    use DiagnosticKind::*;
    let at = || ElementRef::Constraint(c.name.clone());
    let class = c.context.class();
    if model.class(class).is_none() {
        out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved context class {class}")));
        return;
    }
    if let ConstraintContext::State { state, .. } = &c.context {
        if model.statechart(class).and_then(|sc| sc.state(state)).is_none() {
            out.push(Diagnostic::new(UnresolvedReference, at(), format!("unresolved context state {class}.{state}")));
        }
    }
    let mut refs = Vec::new();
    c.expr.collect_refs(&mut refs);
    for r in refs {
        let problem = match r {
            OclRef::Association(a) => model
                .find_association_from(class, a)
                .is_none()
                .then(|| format!("{a} is not an association of {class}")),
            OclRef::Attribute(a) => model
                .find_attribute(class, a)
                .is_none()
                .then(|| format!("{a} is not an attribute of {class}")),
            OclRef::Navigation { association, attribute } => match model.find_association_from(class, association) {
                None => Some(format!("{association} is not an association of {class}")),
                Some(assoc) => model
                    .find_attribute(&assoc.range, attribute)
                    .is_none()
                    .then(|| format!("{attribute} is not an attribute of {}", assoc.range)),
            },
        };
        if let Some(msg) = problem {
            out.push(Diagnostic::new(OclReference, at(), msg));
        }
    }
}

/// Result of [`merge`]: the union model plus conflicts between same-named
/// elements that differ structurally. Conflicting elements are all retained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merged {
    pub model: UmlModel,
    pub conflicts: Vec<Diagnostic>,
}

/// Name-keyed union of all elements of all models.
pub fn merge(models: &[UmlModel]) -> Merged {
    let mut conflicts = Vec::new();
    let names: BTreeSet<&str> = models.iter().map(|m| m.name.as_str()).collect();
    let name = match names.len() {
        0 => String::new(),
        1 => names.into_iter().next().unwrap_or_default().to_string(),
        _ => "merged".to_string(),
    };

    // Classes: generalizations and attributes are elements in their own right,
    // so same-named classes are fused and their features unioned.
    let mut classes: BTreeMap<String, ClassDef> = BTreeMap::new();
    for c in models.iter().flat_map(|m| &m.classes) {
        let entry = classes.entry(c.name.clone()).or_insert_with(|| ClassDef::new(c.name.clone()));
        entry.superclasses.extend(c.superclasses.iter().cloned());
        for a in &c.attributes {
            if !entry.attributes.contains(a) {
                entry.attributes.push(a.clone());
            }
        }
    }
    for c in classes.values_mut() {
        c.attributes.sort();
        let mut by_name: BTreeMap<&str, usize> = BTreeMap::new();
        for a in &c.attributes {
            *by_name.entry(a.name.as_str()).or_default() += 1;
        }
        for (attr, n) in by_name {
            if n > 1 {
                conflicts.push(Diagnostic::new(
                    DiagnosticKind::MergeConflict,
                    ElementRef::Attribute { class: c.name.clone(), name: attr.to_string() },
                    format!("attribute {attr} has conflicting datatypes"),
                ));
            }
        }
    }

    let associations = union_by_name(models.iter().flat_map(|m| &m.associations), |a| &a.name, ElementRef::Association, "association", &mut conflicts);
    let enumerations = union_by_name(models.iter().flat_map(|m| &m.enumerations), |e| &e.name, ElementRef::Enumeration, "enumeration", &mut conflicts);
    let objects = union_by_name(models.iter().flat_map(|m| &m.objects), |o| &o.name, ElementRef::Object, "object", &mut conflicts);
    let constraints = union_by_name(models.iter().flat_map(|m| &m.constraints), |c| &c.name, ElementRef::Constraint, "constraint", &mut conflicts);

    // Links form a multiset; the union keeps the largest multiplicity seen
    // in any one input so that merge stays idempotent.
    let mut link_counts: BTreeMap<&LinkDef, usize> = BTreeMap::new();
    for m in models {
        let mut local: BTreeMap<&LinkDef, usize> = BTreeMap::new();
        for l in &m.links {
            *local.entry(l).or_default() += 1;
        }
        for (l, n) in local {
            let e = link_counts.entry(l).or_default();
            *e = (*e).max(n);
        }
    }
    let links = link_counts.into_iter().flat_map(|(l, n)| std::iter::repeat_n(l.clone(), n)).collect();

    let negative_links: BTreeSet<NegLinkDef> = models.iter().flat_map(|m| m.negative_links.iter().cloned()).collect();

    let mut statecharts: BTreeMap<String, StatechartDef> = BTreeMap::new();
    for sc in models.iter().flat_map(|m| &m.statecharts) {
        let entry = statecharts.entry(sc.class.clone()).or_insert_with(|| StatechartDef {
            class: sc.class.clone(),
            states: Vec::new(),
            transitions: Vec::new(),
        });
        for s in &sc.states {
            if !entry.states.contains(s) {
                entry.states.push(s.clone());
            }
        }
        for t in &sc.transitions {
            if !entry.transitions.contains(t) {
                entry.transitions.push(t.clone());
            }
        }
    }
    for sc in statecharts.values_mut() {
        sc.states.sort();
        sc.transitions.sort();
        for w in sc.states.windows(2) {
            if w[0].name == w[1].name {
                conflicts.push(Diagnostic::new(
                    DiagnosticKind::MergeConflict,
                    ElementRef::State { class: sc.class.clone(), state: w[0].name.clone() },
                    format!("state {} is declared differently", w[0].name),
                ));
            }
        }
    }

    let mut model = UmlModel {
        name,
        classes: classes.into_values().collect(),
        associations,
        enumerations,
        objects,
        links,
        negative_links: negative_links.into_iter().collect(),
        statecharts: statecharts.into_values().collect(),
        constraints,
    };
    model.canonicalize();
    conflicts.sort_by(|a, b| a.element.cmp(&b.element).then_with(|| a.message.cmp(&b.message)));
    conflicts.dedup();
    Merged { model, conflicts }
}

fn union_by_name<'a, T: Clone + Ord + 'a>(
    items: impl Iterator<Item = &'a T>,
    name: impl Fn(&T) -> &String,
    at: impl Fn(String) -> ElementRef,
    what: &str,
    conflicts: &mut Vec<Diagnostic>,
) -> Vec<T> {
    let set: BTreeSet<&T> = items.collect();
    let mut by_name: BTreeMap<&String, Vec<&T>> = BTreeMap::new();
    for item in &set {
        by_name.entry(name(item)).or_default().push(item);
    }
    let mut out = Vec::new();
    for (n, group) in by_name {
        if group.len() > 1 {
            conflicts.push(Diagnostic::new(
                DiagnosticKind::MergeConflict,
                at(n.clone()),
                format!("{what} {n} is declared differently in the merged models"),
            ));
        }
        out.extend(group.into_iter().cloned());
    }
    out
}

/// Element counts of a model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub classes: usize,
    pub generalizations: usize,
    pub associations: usize,
    pub attributes: usize,
    pub objects: usize,
    pub links: usize,
    pub states: usize,
    pub constraints: usize,
    pub total: usize,
}

pub fn count_elements(model: &UmlModel) -> Census {
    let mut c = Census {
        classes: model.classes.len(),
        generalizations: model.classes.iter().map(|c| c.superclasses.len()).sum(),
        associations: model.associations.len(),
        attributes: model.classes.iter().map(|c| c.attributes.len()).sum(),
        objects: model.objects.len(),
        links: model.links.len(),
        states: model.statecharts.iter().map(|s| s.states.len()).sum(),
        constraints: model.constraints.len(),
        total: 0,
    };
    c.total = c.classes
        + c.generalizations
        + c.associations
        + c.attributes
        + c.objects
        + c.links
        + c.states
        + c.constraints;
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig16() -> (UmlModel, UmlModel) {
        let mut m1 = UmlModel::new("versions");
        m1.classes = vec![ClassDef::new("A"), ClassDef::new("B").extends("A"), ClassDef::new("C")];
        m1.associations = vec![AssociationDef::new("P", "A", "C")];
        let mut m2 = UmlModel::new("versions");
        m2.classes = vec![ClassDef::new("A"), ClassDef::new("C"), ClassDef::new("D").extends("C")];
        m2.associations = vec![AssociationDef::new("P", "A", "C")];
        m1.canonicalize();
        m2.canonicalize();
        (m1, m2)
    }

    #[test]
    fn empty_model_is_valid() {
        assert!(validate(&UmlModel::default()).is_empty());
    }

    #[test]
    fn unresolved_superclass() {
        let mut m = UmlModel::new("m");
        m.classes.push(ClassDef::new("Student").extends("Person"));
        let d = validate(&m);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("unresolved superclass"));
        assert_eq!(d[0].element, ElementRef::Class("Student".into()));
    }

    #[test]
    fn generalization_cycle_rejected() {
        let mut m = UmlModel::new("m");
        m.classes = vec![ClassDef::new("A").extends("B"), ClassDef::new("B").extends("A")];
        assert!(validate(&m).iter().any(|d| d.kind == DiagnosticKind::GeneralizationCycle));
    }

    fn ordered_model(indices: &[u64]) -> UmlModel {
        let mut m = UmlModel::new("m");
        m.classes = vec![ClassDef::new("C1"), ClassDef::new("C2")];
        let mut p = AssociationDef::new("P", "C1", "C2");
        p.ordered = true;
        m.associations.push(p);
        m.objects.push(ObjectDef { name: "x".into(), class: "C1".into() });
        for (k, &ix) in indices.iter().enumerate() {
            let y = format!("y{k}");
            m.objects.push(ObjectDef { name: y.clone(), class: "C2".into() });
            m.links.push(LinkDef { association: "P".into(), source: "x".into(), target: y, index: Some(ix) });
        }
        m
    }

    #[test]
    fn index_sets_must_be_contiguous() {
        // Enumerate every index multiset over {1..4} of size <= 3 and compare
        // against the direct definition: the set equals 1..=|set|.
        let mut checked = 0;
        for n in 0..=3usize {
            let mut stack = vec![Vec::<u64>::new()];
            while let Some(v) = stack.pop() {
                if v.len() == n {
                    let set: BTreeSet<u64> = v.iter().copied().collect();
                    let contiguous = (1..=set.len() as u64).all(|i| set.contains(&i));
                    let gap = validate(&ordered_model(&v)).iter().any(|d| d.message.contains("index gap"));
                    assert_eq!(gap, !contiguous, "indices {v:?}");
                    checked += 1;
                    continue;
                }
                for i in 1..=4 {
                    let mut w = v.clone();
                    w.push(i);
                    stack.push(w);
                }
            }
        }
        assert!(checked > 80);
        assert!(validate(&ordered_model(&[1, 3])).iter().any(|d| d.message.contains("index gap")));
    }

    #[test]
    fn ordered_nonunique_rejected() {
        let mut m = UmlModel::new("m");
        m.classes = vec![ClassDef::new("C")];
        let mut p = AssociationDef::new("P", "C", "C");
        p.ordered = true;
        p.unique = false;
        m.associations.push(p);
        assert!(validate(&m).iter().any(|d| d.kind == DiagnosticKind::UnsupportedCombination));
    }

    #[test]
    fn subsets_requires_specialized_ends() {
        let mut m = UmlModel::new("m");
        m.classes = vec![ClassDef::new("A"), ClassDef::new("B"), ClassDef::new("A1").extends("A")];
        m.associations.push(AssociationDef::new("parent", "A", "B"));
        let mut ok = AssociationDef::new("child", "A1", "B");
        ok.subsets = Some("parent".into());
        m.associations.push(ok);
        assert!(validate(&m).is_empty());
        let mut bad = AssociationDef::new("bad", "B", "B");
        bad.subsets = Some("parent".into());
        m.associations.push(bad);
        assert!(validate(&m).iter().any(|d| d.kind == DiagnosticKind::InvalidSubsets));
    }

    #[test]
    fn orthogonal_state_needs_two_regions() {
        let mut m = UmlModel::new("m");
        m.classes.push(ClassDef::new("C"));
        let mut s = StateDef::new("S");
        s.orthogonal = true;
        let mut s1 = StateDef::new("S1").within("S");
        s1.region = Some("r1".into());
        m.statecharts.push(StatechartDef { class: "C".into(), states: vec![s, s1.clone()], transitions: vec![] });
        assert!(validate(&m).iter().any(|d| d.message.contains("two regions")));
        let mut s2 = StateDef::new("S2").within("S");
        s2.region = Some("r2".into());
        m.statecharts[0].states.push(s2);
        assert!(validate(&m).is_empty());
        assert_eq!(m.statecharts[0].kind_of("S"), StateKind::Orthogonal);
        assert_eq!(m.statecharts[0].kind_of("S1"), StateKind::Simple);
    }

    #[test]
    fn merge_of_fig16_versions() {
        let (m1, m2) = fig16();
        let merged = merge(&[m1.clone(), m2.clone()]);
        assert!(merged.conflicts.is_empty());
        let names: Vec<_> = merged.model.classes.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["A", "B", "C", "D"]);
        let census = count_elements(&merged.model);
        assert_eq!((census.classes, census.generalizations, census.associations), (4, 2, 1));
        assert_eq!(census.total, 7);
        assert_eq!(merge(&[m2, m1]).model, merged.model);
    }

    #[test]
    fn merge_is_idempotent() {
        let (m1, _) = fig16();
        assert_eq!(merge(&[m1.clone(), m1.clone()]).model, m1);
    }

    #[test]
    fn conflicting_associations_are_kept_and_flagged() {
        let (m1, mut m2) = fig16();
        m2.associations[0].domain = "C".into();
        let merged = merge(&[m1, m2]);
        assert_eq!(merged.model.associations.len(), 2);
        assert_eq!(merged.conflicts.len(), 1);
        assert_eq!(merged.conflicts[0].element, ElementRef::Association("P".into()));
    }

    #[test]
    fn census_counts() {
        assert_eq!(count_elements(&UmlModel::default()), Census::default());
        let mut m = UmlModel::new("m");
        m.classes.push(ClassDef::new("C").attribute("age", AttrType::Integer));
        let c = count_elements(&m);
        assert_eq!((c.classes, c.attributes, c.total), (1, 1, 2));
    }
}
