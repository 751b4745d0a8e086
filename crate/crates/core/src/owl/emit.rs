//! UML to DL compiler. The output is the concatenation of four passes:
//! structure, closed-world class membership, instances and statecharts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::axioms::*;
use crate::model::*;
use crate::ocl::{Literal, OclExpr, RelOp};

/// Shared super-role of every composite association.
pub const OWNS: &str = "owns";
/// Transitive super-role of [`OWNS`], maintained by the DL-safe rule.
pub const OWNS_CLOSURE: &str = "owns_closure";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitOptions {
    /// Map `size() > n` to `≥ n` and `size() < n` to `≤ n`.
    pub strict_paper_cardinality: bool,
    /// Skip negative assertions for unlinked object pairs.
    pub no_link_completion: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("{element}: unsupported {construct}")]
    Unsupported { element: ElementRef, construct: String },
    #[error("{element}: generated name {name} collides with a model element")]
    NameCollision { name: String, element: ElementRef },
}

fn direct(class: &str) -> String {
    format!("{class}_Direct")
}

fn intermediate_class(assoc: &str) -> String {
    format!("C_I_{assoc}")
}

fn to_intermediate(assoc: &str) -> String {
    format!("{assoc}_I")
}

fn from_intermediate(assoc: &str) -> String {
    format!("I_{assoc}")
}

fn index_role(assoc: &str, i: u64) -> String {
    format!("index_{assoc}_{i}")
}

fn region_concept(state: &str, region: &str) -> String {
    format!("{state}_{region}")
}

struct Emitter<'m> {
    model: &'m UmlModel,
    opts: EmitOptions,
    out: AxiomSet,
    user_names: BTreeSet<&'m str>,
}

impl<'m> Emitter<'m> {
    fn generate(&mut self, name: String, element: &ElementRef) -> Result<String, EmitError> {
        if self.user_names.contains(name.as_str()) {
            return Err(EmitError::NameCollision { name, element: element.clone() });
        }
        self.out.generated.insert(name.clone());
        Ok(name)
    }

    fn push(&mut self, ax: Axiom, at: &ElementRef) {
        self.out.push(ax, at.clone());
    }

    fn structure(&mut self) -> Result<(), EmitError> {
        let model = self.model;
        for c in &model.classes {
            let at = ElementRef::Class(c.name.clone());
            self.push(Axiom::DeclClass(c.name.clone()), &at);
            for sup in &c.superclasses {
                let at = ElementRef::Generalization { sub: c.name.clone(), sup: sup.clone() };
                self.push(Axiom::SubClassOf(ConceptExpr::atom(&c.name), ConceptExpr::atom(sup)), &at);
            }
        }

        // Data properties are global, so an attribute name shared by several
        // classes becomes one property whose domain is their union.
        let mut attrs: BTreeMap<&str, Vec<(&str, &AttributeDef)>> = BTreeMap::new();
        for c in &model.classes {
            for a in &c.attributes {
                attrs.entry(&a.name).or_default().push((&c.name, a));
            }
        }
        let mut used_enums = BTreeSet::new();
        for (name, mut owners) in attrs {
            owners.sort_by_key(|(class, _)| *class);
            let first = owners[0];
            let at0 = ElementRef::Attribute { class: first.0.to_string(), name: name.to_string() };
            if let Some((c, _)) = owners.iter().find(|(_, a)| a.datatype != first.1.datatype) {
                return Err(EmitError::Unsupported {
                    element: ElementRef::Attribute { class: c.to_string(), name: name.to_string() },
                    construct: format!("attribute {name} declared with different datatypes"),
                });
            }
            self.push(Axiom::DeclDataProp(name.to_string()), &at0);
            for (class, _) in &owners {
                let at = ElementRef::Attribute { class: class.to_string(), name: name.to_string() };
                self.push(
                    Axiom::SubClassOf(ConceptExpr::atom(*class), ConceptExpr::DataExactCard(1, name.to_string())),
                    &at,
                );
            }
            let domain = ConceptExpr::or_of(owners.iter().map(|(c, _)| ConceptExpr::atom(*c)).collect());
            self.push(Axiom::DataPropDomain(name.to_string(), domain), &at0);
            let range = match &first.1.datatype {
                AttrType::Boolean => DataRange::Datatype(Datatype::Boolean),
                AttrType::String => DataRange::Datatype(Datatype::String),
                AttrType::Integer => DataRange::Datatype(Datatype::Integer),
                AttrType::Enumeration(e) => {
                    used_enums.insert(e.clone());
                    let lits = model.enumeration(e).map(|e| e.literals.clone()).unwrap_or_default();
                    DataRange::OneOf(lits.into_iter().map(DataValue::string).collect())
                }
            };
            self.out.axioms.push(Axiom::DataPropRange(name.to_string(), range));
            let mut prov = vec![at0];
            if let AttrType::Enumeration(e) = &first.1.datatype {
                prov.push(ElementRef::Enumeration(e.clone()));
            }
            self.out.provenance.push(prov);
        }
        for e in &model.enumerations {
            if !used_enums.contains(&e.name) {
                self.out.untranslated.push(ElementRef::Enumeration(e.name.clone()));
            }
        }

        let mut composite = false;
        for a in &model.associations {
            let at = ElementRef::Association(a.name.clone());
            let domain = ConceptExpr::atom(&a.domain);
            let range = ConceptExpr::atom(&a.range);
            let Multiplicity { min, max } = a.multiplicity;
            if a.unique {
                let p = a.name.clone();
                self.push(Axiom::DeclObjProp(p.clone()), &at);
                self.push(Axiom::ObjPropDomain(p.clone(), domain.clone()), &at);
                self.push(Axiom::ObjPropRange(p.clone(), range), &at);
                if min > 0 {
                    self.push(Axiom::SubClassOf(domain.clone(), ConceptExpr::MinCard(min, p.clone())), &at);
                }
                if let Some(max) = max {
                    self.push(Axiom::SubClassOf(domain, ConceptExpr::MaxCard(max, p.clone())), &at);
                }
                if let Some(sup) = &a.subsets {
                    self.push(Axiom::SubObjPropOf(p.clone(), sup.clone()), &at);
                }
                if let Some(inv) = &a.inverse_of {
                    self.push(Axiom::InverseObjProps(p.clone(), inv.clone()), &at);
                }
                if a.composite {
                    composite = true;
                    self.push(Axiom::SubObjPropOf(p, OWNS.to_string()), &at);
                }
            } else {
                let ci = self.generate(intermediate_class(&a.name), &at)?;
                let pi = self.generate(to_intermediate(&a.name), &at)?;
                let ip = self.generate(from_intermediate(&a.name), &at)?;
                let ci_c = ConceptExpr::atom(&ci);
                self.push(Axiom::DeclClass(ci.clone()), &at);
                self.push(Axiom::DeclObjProp(pi.clone()), &at);
                self.push(Axiom::DeclObjProp(ip.clone()), &at);
                self.push(Axiom::ObjPropDomain(pi.clone(), domain.clone()), &at);
                self.push(Axiom::ObjPropRange(pi.clone(), ci_c.clone()), &at);
                self.push(Axiom::ObjPropDomain(ip.clone(), ci_c.clone()), &at);
                self.push(Axiom::ObjPropRange(ip.clone(), range), &at);
                self.push(Axiom::InverseFunctionalObjProp(pi.clone()), &at);
                self.push(Axiom::SubClassOf(ci_c, ConceptExpr::ExactCard(1, ip)), &at);
                if min > 0 {
                    self.push(Axiom::SubClassOf(domain.clone(), ConceptExpr::MinCard(min, pi.clone())), &at);
                }
                if let Some(max) = max {
                    self.push(Axiom::SubClassOf(domain, ConceptExpr::MaxCard(max, pi)), &at);
                }
            }
        }
        if composite {
            let at = ElementRef::Model;
            let owns = self.generate(OWNS.to_string(), &at)?;
            let closure = self.generate(OWNS_CLOSURE.to_string(), &at)?;
            self.push(Axiom::DeclObjProp(owns.clone()), &at);
            self.push(Axiom::DeclObjProp(closure.clone()), &at);
            self.push(Axiom::InverseFunctionalObjProp(owns.clone()), &at);
            self.push(Axiom::IrreflexiveObjProp(owns.clone()), &at);
            self.push(Axiom::SubObjPropOf(owns, closure.clone()), &at);
            self.push(Axiom::IrreflexiveObjProp(closure.clone()), &at);
            self.out.rules.push(DlSafeRule::transitivity(&closure));
        }
        Ok(())
    }

    fn disjointness(&mut self) -> Result<(), EmitError> {
        let model = self.model;
        let mut children: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for c in &model.classes {
            for sup in &c.superclasses {
                children.entry(sup.as_str()).or_default().insert(&c.name);
            }
        }
        let mut directs = Vec::new();
        let mut names: Vec<&str> = model.classes.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        for class in names {
            let at = ElementRef::Class(class.to_string());
            let d = self.generate(direct(class), &at)?;
            self.push(Axiom::DeclClass(d.clone()), &at);
            let d_c = ConceptExpr::atom(&d);
            match children.get(class) {
                Some(subs) if !subs.is_empty() => {
                    let subs: Vec<ConceptExpr> = subs.iter().map(|s| ConceptExpr::atom(*s)).collect();
                    let mut union = vec![d_c.clone()];
                    union.extend(subs.iter().cloned());
                    self.push(Axiom::EquivalentClasses(vec![ConceptExpr::atom(class), ConceptExpr::Or(union)]), &at);
                    self.push(Axiom::DisjointClasses(vec![d_c.clone(), ConceptExpr::or_of(subs)]), &at);
                }
                _ => self.push(Axiom::EquivalentClasses(vec![ConceptExpr::atom(class), d_c.clone()]), &at),
            }
            directs.push(d_c);
        }
        if directs.len() >= 2 {
            self.push(Axiom::DisjointClasses(directs), &ElementRef::Model);
        }
        Ok(())
    }

    fn role_family_links(&self) -> BTreeMap<&'m str, BTreeSet<(&'m str, &'m str)>> {
        // Pairs each association holds for, including those implied by
        // subsetting and inverses.
        let model = self.model;
        let mut pairs: BTreeMap<&str, BTreeSet<(&str, &str)>> = BTreeMap::new();
        for a in &model.associations {
            pairs.entry(&a.name).or_default();
        }
        for l in &model.links {
            pairs.entry(&l.association).or_default().insert((&l.source, &l.target));
        }
        loop {
            let mut changed = false;
            for a in &model.associations {
                if let Some(sup) = &a.subsets {
                    let from: Vec<_> = pairs.get(a.name.as_str()).into_iter().flatten().copied().collect();
                    let to = pairs.entry(sup.as_str()).or_default();
                    for p in from {
                        changed |= to.insert(p);
                    }
                }
                if let Some(inv) = &a.inverse_of {
                    for (x, y) in [(a.name.as_str(), inv.as_str()), (inv.as_str(), a.name.as_str())] {
                        let from: Vec<_> = pairs.get(x).into_iter().flatten().map(|&(s, t)| (t, s)).collect();
                        let to = pairs.entry(y).or_default();
                        for p in from {
                            changed |= to.insert(p);
                        }
                    }
                }
            }
            if !changed {
                return pairs;
            }
        }
    }

    fn instances(&mut self) -> Result<(), EmitError> {
        let model = self.model;
        let mut individuals: Vec<String> = Vec::new();
        for o in &model.objects {
            let at = ElementRef::Object(o.name.clone());
            self.push(Axiom::DeclIndividual(o.name.clone()), &at);
            self.push(Axiom::ClassAssertion(ConceptExpr::atom(direct(&o.class)), o.name.clone()), &at);
            individuals.push(o.name.clone());
        }
        let by_class = model.instances_by_class();
        let instances_of = |class: &str| -> Vec<&'m str> { by_class.get(class).cloned().unwrap_or_default() };

        let mut links_by_assoc: BTreeMap<&str, Vec<(usize, &LinkDef)>> = BTreeMap::new();
        for (i, l) in model.links.iter().enumerate() {
            links_by_assoc.entry(&l.association).or_default().push((i, l));
        }
        let implied = self.role_family_links();

        for a in &model.associations {
            let links = links_by_assoc.get(a.name.as_str()).cloned().unwrap_or_default();
            if a.unique {
                let mut by_pair: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
                for &(i, l) in &links {
                    by_pair.entry((&l.source, &l.target)).or_default().push(i);
                }
                if a.ordered {
                    let mut seen = BTreeSet::new();
                    for &(i, l) in &links {
                        let Some(ix) = l.index else { continue };
                        let at = ElementRef::Link(i);
                        let role = self.generate(index_role(&a.name, ix), &at)?;
                        if seen.insert(ix) {
                            self.push(Axiom::DeclObjProp(role.clone()), &at);
                            self.push(Axiom::SubObjPropOf(role.clone(), a.name.clone()), &at);
                            self.push(Axiom::FunctionalObjProp(role.clone()), &at);
                            self.push(Axiom::InverseFunctionalObjProp(role.clone()), &at);
                        }
                        self.push(Axiom::ObjPropAssertion(role, l.source.clone(), l.target.clone()), &at);
                    }
                } else {
                    for ((s, t), idx) in &by_pair {
                        let ax = Axiom::ObjPropAssertion(a.name.clone(), s.to_string(), t.to_string());
                        self.out.axioms.push(ax);
                        self.out.provenance.push(idx.iter().map(|&i| ElementRef::Link(i)).collect());
                    }
                }
                // A unique association holds each pair at most once. Each
                // repeated link gets its own individual, and the individuals
                // are asserted equal, which contradicts their distinctness.
                for ((s, t), idx) in &by_pair {
                    if idx.len() < 2 {
                        continue;
                    }
                    let mut group = Vec::new();
                    for (k, &i) in idx.iter().enumerate() {
                        let at = ElementRef::Link(i);
                        let name = self.generate(format!("link_{}_{s}_{t}_{}", a.name, k + 1), &at)?;
                        self.push_extension(Axiom::DeclIndividual(name.clone()), &at);
                        group.push(name.clone());
                        individuals.push(name);
                    }
                    let ax = Axiom::SameIndividual(group);
                    self.out.notes.insert(self.out.axioms.len(), ProvenanceNote::Extension);
                    self.out.axioms.push(ax);
                    self.out.provenance.push(idx.iter().map(|&i| ElementRef::Link(i)).collect());
                }
                if !self.opts.no_link_completion {
                    let linked = &implied[a.name.as_str()];
                    let explicit: BTreeSet<(&str, &str)> = model
                        .negative_links
                        .iter()
                        .filter(|n| n.association == a.name)
                        .map(|n| (n.source.as_str(), n.target.as_str()))
                        .collect();
                    let at = ElementRef::Association(a.name.clone());
                    for s in instances_of(&a.domain) {
                        for t in instances_of(&a.range) {
                            if !linked.contains(&(s, t)) && !explicit.contains(&(s, t)) {
                                self.push(Axiom::NegObjPropAssertion(a.name.clone(), s.into(), t.into()), &at);
                            }
                        }
                    }
                }
            } else {
                let ci = intermediate_class(&a.name);
                let pi = to_intermediate(&a.name);
                let ip = from_intermediate(&a.name);
                let mut made = Vec::new();
                for (k, &(i, l)) in links.iter().enumerate() {
                    let at = ElementRef::Link(i);
                    let ind = self.generate(format!("{ci}_{}", k + 1), &at)?;
                    self.push(Axiom::DeclIndividual(ind.clone()), &at);
                    self.push(Axiom::ClassAssertion(ConceptExpr::atom(&ci), ind.clone()), &at);
                    self.push(Axiom::ObjPropAssertion(pi.clone(), l.source.clone(), ind.clone()), &at);
                    self.push(Axiom::ObjPropAssertion(ip.clone(), ind.clone(), l.target.clone()), &at);
                    individuals.push(ind.clone());
                    made.push((ind, l));
                }
                if !self.opts.no_link_completion {
                    let at = ElementRef::Association(a.name.clone());
                    let sources = instances_of(&a.domain);
                    let targets = instances_of(&a.range);
                    for (ind, l) in &made {
                        for s in &sources {
                            if *s != l.source {
                                self.push(Axiom::NegObjPropAssertion(pi.clone(), s.to_string(), ind.clone()), &at);
                            }
                        }
                        for t in &targets {
                            if *t != l.target {
                                self.push(Axiom::NegObjPropAssertion(ip.clone(), ind.clone(), t.to_string()), &at);
                            }
                        }
                    }
                }
            }
        }

        for (i, n) in model.negative_links.iter().enumerate() {
            let at = ElementRef::NegLink(i);
            match model.association(&n.association) {
                Some(a) if !a.unique => {
                    return Err(EmitError::Unsupported {
                        element: at,
                        construct: format!("nolink on non-unique association {}", a.name),
                    })
                }
                _ => self.push(
                    Axiom::NegObjPropAssertion(n.association.clone(), n.source.clone(), n.target.clone()),
                    &at,
                ),
            }
        }

        if individuals.len() >= 2 {
            individuals.sort();
            self.push(Axiom::DifferentIndividuals(individuals), &ElementRef::Model);
        }
        Ok(())
    }

    fn push_extension(&mut self, ax: Axiom, at: &ElementRef) {
        self.out.push_noted(ax, at.clone(), ProvenanceNote::Extension);
    }

    fn statecharts(&mut self) -> Result<(), EmitError> {
        let model = self.model;
        for sc in &model.statecharts {
            let class = ConceptExpr::atom(&sc.class);
            let sc_at = ElementRef::Statechart(sc.class.clone());
            for s in &sc.states {
                let at = ElementRef::State { class: sc.class.clone(), state: s.name.clone() };
                let me = ConceptExpr::atom(&s.name);
                self.push(Axiom::DeclClass(s.name.clone()), &at);
                self.push(Axiom::SubClassOf(me.clone(), class.clone()), &at);
                if let Some(p) = &s.parent {
                    self.push(Axiom::SubClassOf(me.clone(), ConceptExpr::atom(p)), &at);
                    if let Some(r) = &s.region {
                        self.push(Axiom::SubClassOf(me, ConceptExpr::atom(region_concept(p, r))), &at);
                    }
                }
            }
            for s in &sc.states {
                let at = ElementRef::State { class: sc.class.clone(), state: s.name.clone() };
                let kids: Vec<&StateDef> = sc.children(&s.name).collect();
                if kids.is_empty() {
                    continue;
                }
                if s.orthogonal {
                    let mut regions = Vec::new();
                    for r in sc.regions_of(&s.name) {
                        let rc = self.generate(region_concept(&s.name, &r), &at)?;
                        self.push(Axiom::DeclClass(rc.clone()), &at);
                        self.push(Axiom::SubClassOf(ConceptExpr::atom(&rc), ConceptExpr::atom(&s.name)), &at);
                        let members: Vec<ConceptExpr> = kids
                            .iter()
                            .filter(|k| k.region.as_deref() == Some(r.as_str()))
                            .map(|k| ConceptExpr::atom(&k.name))
                            .collect();
                        if members.len() >= 2 {
                            self.push(Axiom::DisjointClasses(members), &at);
                        }
                        regions.push(ConceptExpr::atom(rc));
                    }
                    self.push(
                        Axiom::EquivalentClasses(vec![ConceptExpr::atom(&s.name), ConceptExpr::or_of(regions)]),
                        &at,
                    );
                } else if kids.len() >= 2 {
                    self.push(Axiom::DisjointClasses(kids.iter().map(|k| ConceptExpr::atom(&k.name)).collect()), &at);
                }
            }
            let top: Vec<ConceptExpr> = sc.top_level().map(|s| ConceptExpr::atom(&s.name)).collect();
            if top.len() >= 2 {
                self.push(Axiom::DisjointClasses(top), &sc_at);
            }
            for (i, _) in sc.transitions.iter().enumerate() {
                self.out.untranslated.push(ElementRef::Transition { class: sc.class.clone(), index: i });
            }
        }
        Ok(())
    }

    fn constraints(&mut self) -> Result<(), EmitError> {
        let model = self.model;
        let mut groups: BTreeMap<&ConstraintContext, Vec<&OclConstraint>> = BTreeMap::new();
        for c in &model.constraints {
            groups.entry(&c.context).or_default().push(c);
        }
        for (ctx, cs) in groups {
            let mut parts = Vec::new();
            let mut extension = false;
            let prov: Vec<ElementRef> = cs.iter().map(|c| ElementRef::Constraint(c.name.clone())).collect();
            for c in &cs {
                let at = ElementRef::Constraint(c.name.clone());
                let t = translate_ocl(&c.expr, ctx.class(), model, self.opts).map_err(|construct| {
                    EmitError::Unsupported { element: at.clone(), construct }
                })?;
                extension |= t.extension;
                if !t.role_axioms.is_empty() {
                    if let ConstraintContext::State { state, .. } = ctx {
                        return Err(EmitError::Unsupported {
                            element: at,
                            construct: format!("excludes() in the invariant of state {state}"),
                        });
                    }
                }
                for ax in t.role_axioms {
                    self.push(ax, &at);
                }
                parts.extend(t.concept);
            }
            if parts.is_empty() {
                continue;
            }
            let (subject, body) = match ctx {
                ConstraintContext::Class(c) => (ConceptExpr::atom(c), ConceptExpr::and_of(parts)),
                // Invariants constrain instances of the owning class only.
                ConstraintContext::State { class, state } => {
                    let mut all = vec![ConceptExpr::atom(class)];
                    all.extend(parts);
                    (ConceptExpr::atom(state), ConceptExpr::and_of(all))
                }
            };
            if extension {
                self.out.notes.insert(self.out.axioms.len(), ProvenanceNote::Extension);
            }
            self.out.axioms.push(Axiom::EquivalentClasses(vec![subject, body]));
            self.out.provenance.push(prov);
        }
        Ok(())
    }
}

/// Result of translating one OCL invariant: a concept (absent when the
/// invariant only yields role characteristics) and global role axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OclTranslation {
    pub concept: Option<ConceptExpr>,
    pub role_axioms: Vec<Axiom>,
    /// Set when one-step navigation was used.
    pub extension: bool,
}

/// Translates an invariant whose `self` ranges over `class`. Errors name the
/// unsupported construct.
pub fn translate_ocl(expr: &OclExpr, class: &str, model: &UmlModel, opts: EmitOptions) -> Result<OclTranslation, String> {
    let mut t = OclTranslation { concept: None, role_axioms: Vec::new(), extension: false };
    let mut conjuncts = Vec::new();
    top_level(expr, class, model, opts, &mut conjuncts, &mut t)?;
    if !conjuncts.is_empty() {
        t.concept = Some(ConceptExpr::and_of(conjuncts));
    }
    Ok(t)
}

fn top_level(
    e: &OclExpr,
    class: &str,
    model: &UmlModel,
    opts: EmitOptions,
    conjuncts: &mut Vec<ConceptExpr>,
    t: &mut OclTranslation,
) -> Result<(), String> {
    match e {
        OclExpr::And(l, r) => {
            top_level(l, class, model, opts, conjuncts, t)?;
            top_level(r, class, model, opts, conjuncts, t)
        }
        OclExpr::Excludes(l, r) if l == r => {
            t.role_axioms.push(Axiom::IrreflexiveObjProp(association_role(model, class, l)?));
            Ok(())
        }
        _ => {
            conjuncts.push(concept_of(e, class, model, opts, &mut t.extension)?);
            Ok(())
        }
    }
}

fn association_role(model: &UmlModel, class: &str, name: &str) -> Result<String, String> {
    match model.find_association_from(class, name) {
        Some(a) if a.unique => Ok(a.name.clone()),
        Some(a) => Ok(to_intermediate(&a.name)),
        None => Err(format!("reference to {name}, which is not an association of {class}")),
    }
}

fn literal_value(lit: &Literal, datatype: &AttrType) -> Result<DataValue, String> {
    Ok(match (lit, datatype) {
        (Literal::Null, _) => return Err("null literal".into()),
        (Literal::String(s), AttrType::Enumeration(_)) => DataValue::string(s.clone()),
        (Literal::Integer(i), AttrType::Enumeration(_)) => DataValue::string(i.to_string()),
        (Literal::Bool(b), AttrType::Enumeration(_)) => DataValue::string(b.to_string()),
        (Literal::String(s), _) => DataValue::string(s.clone()),
        (Literal::Integer(i), _) => DataValue::integer(*i),
        (Literal::Bool(b), _) => DataValue::boolean(*b),
    })
}

fn concept_of(e: &OclExpr, class: &str, model: &UmlModel, opts: EmitOptions, ext: &mut bool) -> Result<ConceptExpr, String> {
    Ok(match e {
        OclExpr::And(l, r) => ConceptExpr::And(vec![
            concept_of(l, class, model, opts, ext)?,
            concept_of(r, class, model, opts, ext)?,
        ]),
        OclExpr::Or(l, r) => ConceptExpr::Or(vec![
            concept_of(l, class, model, opts, ext)?,
            concept_of(r, class, model, opts, ext)?,
        ]),
        OclExpr::SizeCmp { assoc, op, value } => {
            let role = association_role(model, class, assoc)?;
            let n = *value;
            match (op, opts.strict_paper_cardinality) {
                (RelOp::Eq, _) => ConceptExpr::ExactCard(n, role),
                (RelOp::Ge, _) | (RelOp::Gt, true) => ConceptExpr::MinCard(n, role),
                (RelOp::Gt, false) => ConceptExpr::MinCard(n + 1, role),
                (RelOp::Le, _) | (RelOp::Lt, true) => ConceptExpr::MaxCard(n, role),
                (RelOp::Lt, false) => {
                    if n == 0 {
                        return Err("size() < 0".into());
                    }
                    ConceptExpr::MaxCard(n - 1, role)
                }
                (RelOp::Ne, _) if n == 0 => ConceptExpr::MinCard(1, role),
                (RelOp::Ne, _) => ConceptExpr::Or(vec![
                    ConceptExpr::MaxCard(n - 1, role.clone()),
                    ConceptExpr::MinCard(n + 1, role),
                ]),
            }
        }
        OclExpr::IsEmpty(r) => ConceptExpr::ExactCard(0, association_role(model, class, r)?),
        OclExpr::NotEmpty(r) => ConceptExpr::MinCard(1, association_role(model, class, r)?),
        OclExpr::Excludes(l, r) if l == r => {
            return Err(format!("excludes() on {l} inside a disjunction"));
        }
        OclExpr::Excludes(l, r) => return Err(format!("excludes() between distinct references {l} and {r}")),
        OclExpr::AttrCmp { via, attr, op, value } => {
            if !matches!(op, RelOp::Eq | RelOp::Ne) {
                return Err(format!("ordering comparison '{op}' on attribute {attr}"));
            }
            match via {
                None => {
                    let def = model
                        .find_attribute(class, attr)
                        .ok_or_else(|| format!("reference to {attr}, which is not an attribute of {class}"))?;
                    let has = ConceptExpr::DataHasValue(attr.clone(), literal_value(value, &def.datatype)?);
                    if *op == RelOp::Eq {
                        has
                    } else {
                        ConceptExpr::not(has)
                    }
                }
                Some(nav) => {
                    if *op != RelOp::Eq {
                        return Err(format!("'{op}' comparison through navigation {nav}.{attr}"));
                    }
                    let a = model
                        .find_association_from(class, nav)
                        .ok_or_else(|| format!("reference to {nav}, which is not an association of {class}"))?;
                    let def = model
                        .find_attribute(&a.range, attr)
                        .ok_or_else(|| format!("reference to {attr}, which is not an attribute of {}", a.range))?;
                    *ext = true;
                    let filler = ConceptExpr::And(vec![
                        ConceptExpr::atom(&a.range),
                        ConceptExpr::DataHasValue(attr.clone(), literal_value(value, &def.datatype)?),
                    ]);
                    if a.unique {
                        ConceptExpr::SomeValuesFrom(a.name.clone(), Box::new(filler))
                    } else {
                        ConceptExpr::SomeValuesFrom(
                            to_intermediate(&a.name),
                            Box::new(ConceptExpr::SomeValuesFrom(from_intermediate(&a.name), Box::new(filler))),
                        )
                    }
                }
            }
        }
    })
}

/// Compiles a validated model.
pub fn emit(model: &UmlModel, options: EmitOptions) -> Result<AxiomSet, EmitError> {
    let mut user_names: BTreeSet<&str> = BTreeSet::new();
    for c in &model.classes {
        user_names.insert(&c.name);
        for a in &c.attributes {
            user_names.insert(&a.name);
        }
    }
    for a in &model.associations {
        user_names.insert(&a.name);
    }
    for o in &model.objects {
        user_names.insert(&o.name);
    }
    for sc in &model.statecharts {
        for s in &sc.states {
            user_names.insert(&s.name);
        }
    }
    let ontology = if model.name.is_empty() { "untitled".to_string() } else { model.name.clone() };
    let mut e = Emitter { model, opts: options, out: AxiomSet::new(ontology), user_names };
    e.structure()?;
    e.disjointness()?;
    e.instances()?;
    e.statecharts()?;
    e.constraints()?;
    let mut out = e.out;
    out.canonicalize();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_model;
    use crate::owl::serialize_functional;

    fn emit_text(src: &str) -> AxiomSet {
        emit(&parse_model(src).unwrap().model, EmitOptions::default()).unwrap()
    }

    fn has(ax: &AxiomSet, text: &str) -> bool {
        ax.axioms.iter().any(|a| super::super::functional::render_axiom(a) == text)
    }

    #[test]
    fn empty_model() {
        let ax = emit(&UmlModel::default(), EmitOptions::default()).unwrap();
        assert!(ax.is_empty());
    }

    #[test]
    fn association_with_multiplicity() {
        let ax = emit_text("class C1\nclass C2\nassoc A C1 -> C2 [1..3]");
        for line in [
            "Declaration(Class(m:C1))",
            "Declaration(Class(m:C2))",
            "Declaration(ObjectProperty(m:A))",
            "ObjectPropertyDomain(m:A m:C1)",
            "ObjectPropertyRange(m:A m:C2)",
            "SubClassOf(m:C1 ObjectMinCardinality(1 m:A))",
            "SubClassOf(m:C1 ObjectMaxCardinality(3 m:A))",
        ] {
            assert!(has(&ax, line), "missing {line}");
        }
    }

    #[test]
    fn unbounded_multiplicity_has_no_cardinality_axioms() {
        let ax = emit_text("class C1\nclass C2\nassoc A C1 -> C2");
        assert!(!serialize_functional(&ax).contains("Cardinality"));
    }

    #[test]
    fn closed_world_membership() {
        let ax = emit_text("class A\nclass B extends A");
        for line in [
            "EquivalentClasses(m:A ObjectUnionOf(m:A_Direct m:B))",
            "DisjointClasses(m:A_Direct m:B)",
            "EquivalentClasses(m:B m:B_Direct)",
            "DisjointClasses(m:A_Direct m:B_Direct)",
            "SubClassOf(m:B m:A)",
        ] {
            assert!(has(&ax, line), "missing {line}");
        }
        assert!(ax.generated.contains("A_Direct"));
    }

    #[test]
    fn direct_name_collision() {
        let m = parse_model("class A\nclass A_Direct").unwrap().model;
        assert!(matches!(emit(&m, EmitOptions::default()), Err(EmitError::NameCollision { .. })));
    }

    #[test]
    fn attributes_and_enumerations() {
        let ax = emit_text("enum Color { red, green }\nclass P\nattr P.age : integer\nattr P.color : Color");
        assert!(has(&ax, "SubClassOf(m:P DataExactCardinality(1 m:age))"));
        assert!(has(&ax, "DataPropertyRange(m:age xsd:integer)"));
        assert!(has(&ax, "DataPropertyRange(m:color DataOneOf(\"red\"^^xsd:string \"green\"^^xsd:string))"));
        assert!(has(&ax, "DataPropertyDomain(m:color m:P)"));
    }

    #[test]
    fn composition_globals_emitted_once() {
        let ax = emit_text("class A\nclass B\nassoc p A -> B composite\nassoc q A -> B composite");
        let text = serialize_functional(&ax);
        assert_eq!(text.matches("InverseFunctionalObjectProperty(m:owns)").count(), 1);
        assert_eq!(text.matches("DLSafeRule").count(), 1);
        assert!(has(&ax, "SubObjectPropertyOf(m:p m:owns)"));
        assert!(has(&ax, "SubObjectPropertyOf(m:q m:owns)"));
        let plain = emit_text("class A\nclass B\nassoc p A -> B");
        assert!(!serialize_functional(&plain).contains("owns"));
    }

    #[test]
    fn non_unique_links() {
        let ax = emit_text("class A\nclass B\nassoc P A -> B [1..2] nonunique\nobject a : A\nobject b : B\nlink P a -> b\nlink P a -> b");
        let asserts = ax.axioms.iter().filter(|a| matches!(a, Axiom::ObjPropAssertion(..))).count();
        assert_eq!(asserts, 4);
        assert!(has(&ax, "ObjectPropertyAssertion(m:P_I m:a m:C_I_P_1)"));
        assert!(has(&ax, "ObjectPropertyAssertion(m:I_P m:C_I_P_2 m:b)"));
        assert!(has(&ax, "DifferentIndividuals(m:C_I_P_1 m:C_I_P_2 m:a m:b)"));
        assert!(has(&ax, "SubClassOf(m:A ObjectMaxCardinality(2 m:P_I))"));
        assert!(has(&ax, "SubClassOf(m:C_I_P ObjectExactCardinality(1 m:I_P))"));
    }

    #[test]
    fn ordered_links() {
        let ax = emit_text(
            "class X\nclass Y\nassoc P X -> Y ordered\nobject x1 : X\nobject y1 : Y\nobject y2 : Y\nlink P x1 -> y1 @1\nlink P x1 -> y2 @2",
        );
        assert!(has(&ax, "ObjectPropertyAssertion(m:index_P_1 m:x1 m:y1)"));
        assert!(has(&ax, "ObjectPropertyAssertion(m:index_P_2 m:x1 m:y2)"));
        assert!(has(&ax, "SubObjectPropertyOf(m:index_P_1 m:P)"));
        assert!(has(&ax, "FunctionalObjectProperty(m:index_P_2)"));
    }

    #[test]
    fn link_completion() {
        let src = "class A\nclass B\nassoc P A -> B\nobject a : A\nobject b1 : B\nobject b2 : B\nlink P a -> b1";
        let ax = emit_text(src);
        assert!(has(&ax, "NegativeObjectPropertyAssertion(m:P m:a m:b2)"));
        assert!(!has(&ax, "NegativeObjectPropertyAssertion(m:P m:a m:b1)"));
        let off = emit(&parse_model(src).unwrap().model, EmitOptions { no_link_completion: true, ..Default::default() }).unwrap();
        assert!(!serialize_functional(&off).contains("Negative"));
    }

    #[test]
    fn statechart_axioms() {
        let ax = emit_text(
            "class C\nstatechart C {\n state S orthogonal\n state S1 in S/r1\n state S2 in S/r2\n state T\n state T1 in T\n state T2 in T\n}",
        );
        assert!(has(&ax, "SubClassOf(m:S m:C)"));
        assert!(has(&ax, "SubClassOf(m:T1 m:T)"));
        assert!(has(&ax, "DisjointClasses(m:T1 m:T2)"));
        assert!(has(&ax, "DisjointClasses(m:S m:T)"));
        assert!(has(&ax, "EquivalentClasses(m:S ObjectUnionOf(m:S_r1 m:S_r2))"));
        assert!(!serialize_functional(&ax).contains("DisjointClasses(m:S1 m:S2)"));
    }

    #[test]
    fn ocl_size_mapping() {
        let m = parse_model("class A\nclass B\nassoc r A -> B").unwrap().model;
        let t = |op, n, strict| {
            let e = OclExpr::size("r", op, n);
            translate_ocl(&e, "A", &m, EmitOptions { strict_paper_cardinality: strict, ..Default::default() })
                .map(|t| t.concept.unwrap())
        };
        assert_eq!(t(RelOp::Gt, 2, false).unwrap(), ConceptExpr::MinCard(3, "r".into()));
        assert_eq!(t(RelOp::Gt, 2, true).unwrap(), ConceptExpr::MinCard(2, "r".into()));
        assert_eq!(t(RelOp::Lt, 2, false).unwrap(), ConceptExpr::MaxCard(1, "r".into()));
        assert_eq!(t(RelOp::Lt, 2, true).unwrap(), ConceptExpr::MaxCard(2, "r".into()));
        assert_eq!(t(RelOp::Le, 2, false).unwrap(), ConceptExpr::MaxCard(2, "r".into()));
        assert_eq!(t(RelOp::Eq, 2, false).unwrap(), ConceptExpr::ExactCard(2, "r".into()));
        assert!(t(RelOp::Lt, 0, false).is_err());
    }

    #[test]
    fn ocl_unsupported() {
        let m = parse_model("class A\nattr A.x : integer\nassoc r A -> A\nassoc s A -> A").unwrap().model;
        let t = |src: &str| translate_ocl(&crate::ocl::parse_ocl(src).unwrap(), "A", &m, EmitOptions::default());
        assert!(t("self.x < 3").unwrap_err().contains("ordering"));
        assert!(t("self.x = null").unwrap_err().contains("null"));
        assert!(t("self.r->excludes(self.s)").unwrap_err().contains("distinct"));
        let irr = t("self.r->excludes(self.r)").unwrap();
        assert_eq!(irr.concept, None);
        assert_eq!(irr.role_axioms, vec![Axiom::IrreflexiveObjProp("r".into())]);
        assert_eq!(
            t("self.x <> 3").unwrap().concept.unwrap(),
            ConceptExpr::not(ConceptExpr::DataHasValue("x".into(), DataValue::integer(3)))
        );
    }

    #[test]
    fn transitions_are_untranslated() {
        let ax = emit_text("class C\nstatechart C {\n state A\n state B\n transition A -> B\n}");
        assert_eq!(ax.untranslated, vec![ElementRef::Transition { class: "C".into(), index: 0 }]);
    }

    #[test]
    fn every_name_is_declared() {
        let ax = emit_text(
            "enum D { a, b }\nclass A\nclass B extends A\nattr A.d : D\nassoc P A -> B [0..2] nonunique\nassoc Q A -> B composite ordered\nobject a : A\nobject b : B\nlink P a -> b\nlink Q a -> b @1\nstatechart A { state S; state T }\ninv i context A.S : self.P->size()>=1",
        );
        let sig = ax.signature();
        for kind in [NameKind::Class, NameKind::ObjectProperty, NameKind::DataProperty, NameKind::Individual] {
            let declared = ax.declared(kind);
            for n in sig.get(&kind).into_iter().flatten() {
                assert!(declared.contains(n), "{kind:?} {n} undeclared");
            }
        }
    }
}
