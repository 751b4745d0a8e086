//! Internal form of an axiom set: interned NNF concepts, a role hierarchy
//! closed under inverses, absorbed terminology and the ABox over individual
//! indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::owl::{Axiom, AxiomSet, ConceptExpr, DataRange, DataValue, DlSafeRule, NameKind};

pub type ConceptId = u32;
/// `2 * base + 1` is the inverse of `2 * base`.
pub type RoleId = u32;

pub fn inverse(r: RoleId) -> RoleId {
    r ^ 1
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nnf {
    Top,
    Bottom,
    Atom(u32),
    NotAtom(u32),
    And(Vec<ConceptId>),
    Or(Vec<ConceptId>),
    Min(u64, RoleId),
    Max(u64, RoleId),
    Some(RoleId, ConceptId),
    All(RoleId, ConceptId),
    /// Data property `.0` has value number `.1`.
    Value(u32, u32),
    NotValue(u32, u32),
    HasValue(u32),
    NoValue(u32),
}

/// How a violated at-most restriction is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxOrigin {
    Functional,
    InverseFunctional,
}

#[derive(Debug, Clone)]
pub struct DataProp {
    pub name: String,
    pub values: Vec<DataValue>,
    pub ranges: Vec<DataRange>,
    /// Values allowed by every finite range, when at least one range is finite.
    pub allowed: Option<Vec<DataValue>>,
    pub domain: Vec<ConceptId>,
}

#[derive(Debug, Clone, Default)]
pub struct Abox {
    pub individuals: Vec<String>,
    /// (individual, concept, axiom index)
    pub concepts: Vec<(usize, ConceptId, usize)>,
    pub roles: Vec<(usize, RoleId, usize, usize)>,
    pub negated_roles: Vec<(usize, RoleId, usize, usize)>,
    pub same: Vec<(usize, usize, usize)>,
    pub different: Vec<(Vec<usize>, usize)>,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub body: Vec<(RoleId, usize, usize)>,
    pub head: (RoleId, usize, usize),
    pub vars: usize,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    concepts: Vec<Nnf>,
    concept_index: HashMap<Nnf, ConceptId>,
    complement: HashMap<ConceptId, ConceptId>,
    atoms: Vec<String>,
    atom_index: HashMap<String, u32>,
    role_bases: Vec<String>,
    role_index: HashMap<String, RoleId>,
    /// Reflexive-transitive super roles of each role id.
    pub supers: Vec<Vec<RoleId>>,
    /// Axiom index of the irreflexivity declaration covering each role id.
    pub irreflexive: Vec<Option<usize>>,
    pub unfold: HashMap<u32, Vec<ConceptId>>,
    pub gcis: Vec<ConceptId>,
    /// Concepts implied for a node with any neighbour through the role.
    pub domains: Vec<Vec<ConceptId>>,
    pub data: Vec<DataProp>,
    data_index: HashMap<String, u32>,
    pub max_origin: HashMap<ConceptId, (MaxOrigin, usize)>,
    pub abox: Abox,
    pub rules: Vec<Rule>,
    /// Declared class names.
    pub classes: BTreeSet<String>,
    pub generated: BTreeSet<String>,
    pub axioms: Vec<Axiom>,
}

impl KnowledgeBase {
    pub fn concept(&self, id: ConceptId) -> &Nnf {
        &self.concepts[id as usize]
    }

    pub fn complement_of(&self, id: ConceptId) -> Option<ConceptId> {
        self.complement.get(&id).copied()
    }

    pub fn atom_name(&self, a: u32) -> &str {
        &self.atoms[a as usize]
    }

    pub fn atom_id(&self, name: &str) -> Option<u32> {
        self.atom_index.get(name).copied()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn role_id(&self, name: &str) -> Option<RoleId> {
        self.role_index.get(name).copied()
    }

    pub fn role_count(&self) -> usize {
        self.role_bases.len() * 2
    }

    /// The name a role id was declared under, or `inv(name)`.
    pub fn role_name(&self, r: RoleId) -> String {
        let base = &self.role_bases[(r / 2) as usize];
        let base_id = self.role_index[base];
        if base_id == r {
            return base.clone();
        }
        if let Some((n, _)) = self.role_index.iter().filter(|(_, &id)| id == r).min() {
            return n.clone();
        }
        format!("inv({base})")
    }

    /// Every role name with its id.
    pub fn role_names(&self) -> Vec<(String, RoleId)> {
        let mut out: Vec<(String, RoleId)> = self.role_index.iter().map(|(n, &r)| (n.clone(), r)).collect();
        out.sort();
        out
    }

    pub fn atomic_has_value(&self, p: u32) -> Option<ConceptId> {
        self.concept_index.get(&Nnf::HasValue(p)).copied()
    }

    pub fn negated_value(&self, p: u32, v: u32) -> Option<ConceptId> {
        self.concept_index.get(&Nnf::NotValue(p, v)).copied()
    }

    pub fn data_prop(&self, name: &str) -> Option<u32> {
        self.data_index.get(name).copied()
    }

    pub fn value_id(&self, p: u32, v: &DataValue) -> Option<u32> {
        self.data[p as usize].values.iter().position(|w| w == v).map(|i| i as u32)
    }

    /// Whether `sub` is below `sup` in the role hierarchy.
    pub fn sub_role(&self, sub: RoleId, sup: RoleId) -> bool {
        self.supers[sub as usize].contains(&sup)
    }

    pub fn atomic(&self, name: &str) -> Option<ConceptId> {
        let a = self.atom_id(name)?;
        self.concept_index.get(&Nnf::Atom(a)).copied()
    }

    pub fn concept_text(&self, id: ConceptId) -> String {
        match self.concept(id) {
            Nnf::Top => "Thing".into(),
            Nnf::Bottom => "Nothing".into(),
            Nnf::Atom(a) => self.atom_name(*a).into(),
            Nnf::NotAtom(a) => format!("not {}", self.atom_name(*a)),
            Nnf::And(cs) | Nnf::Or(cs) => {
                let sep = if matches!(self.concept(id), Nnf::And(_)) { " and " } else { " or " };
                let parts: Vec<String> = cs.iter().map(|c| self.concept_text(*c)).collect();
                format!("({})", parts.join(sep))
            }
            Nnf::Min(n, r) => format!("min {n} {}", self.role_name(*r)),
            Nnf::Max(n, r) => format!("max {n} {}", self.role_name(*r)),
            Nnf::Some(r, c) => format!("some {} {}", self.role_name(*r), self.concept_text(*c)),
            Nnf::All(r, c) => format!("only {} {}", self.role_name(*r), self.concept_text(*c)),
            Nnf::Value(p, v) => {
                let prop = &self.data[*p as usize];
                format!("{} = {}", prop.name, prop.values[*v as usize].lexical)
            }
            Nnf::NotValue(p, v) => {
                let prop = &self.data[*p as usize];
                format!("{} <> {}", prop.name, prop.values[*v as usize].lexical)
            }
            Nnf::HasValue(p) => format!("has {}", self.data[*p as usize].name),
            Nnf::NoValue(p) => format!("no {}", self.data[*p as usize].name),
        }
    }

    fn intern(&mut self, c: Nnf) -> ConceptId {
        if let Some(&id) = self.concept_index.get(&c) {
            return id;
        }
        let id = self.concepts.len() as ConceptId;
        self.concepts.push(c.clone());
        self.concept_index.insert(c.clone(), id);
        let neg = match c {
            Nnf::Top => Some(Nnf::Bottom),
            Nnf::Bottom => Some(Nnf::Top),
            Nnf::Atom(a) => Some(Nnf::NotAtom(a)),
            Nnf::NotAtom(a) => Some(Nnf::Atom(a)),
            Nnf::Value(p, v) => Some(Nnf::NotValue(p, v)),
            Nnf::NotValue(p, v) => Some(Nnf::Value(p, v)),
            Nnf::HasValue(p) => Some(Nnf::NoValue(p)),
            Nnf::NoValue(p) => Some(Nnf::HasValue(p)),
            _ => None,
        };
        if let Some(n) = neg {
            let nid = self.intern(n);
            self.complement.insert(id, nid);
            self.complement.insert(nid, id);
        }
        id
    }

    fn atom(&mut self, name: &str) -> u32 {
        if let Some(&a) = self.atom_index.get(name) {
            return a;
        }
        let a = self.atoms.len() as u32;
        self.atoms.push(name.to_string());
        self.atom_index.insert(name.to_string(), a);
        a
    }

    fn role(&mut self, name: &str) -> RoleId {
        if let Some(&r) = self.role_index.get(name) {
            return r;
        }
        let r = (self.role_bases.len() * 2) as RoleId;
        self.role_bases.push(name.to_string());
        self.role_index.insert(name.to_string(), r);
        r
    }

    fn data_prop_mut(&mut self, name: &str) -> u32 {
        if let Some(&p) = self.data_index.get(name) {
            return p;
        }
        let p = self.data.len() as u32;
        self.data.push(DataProp { name: name.to_string(), values: vec![], ranges: vec![], allowed: None, domain: vec![] });
        self.data_index.insert(name.to_string(), p);
        p
    }

    fn value(&mut self, p: u32, v: &DataValue) -> u32 {
        let prop = &mut self.data[p as usize];
        match prop.values.iter().position(|w| w == v) {
            Some(i) => i as u32,
            None => {
                prop.values.push(v.clone());
                (prop.values.len() - 1) as u32
            }
        }
    }

    fn and(&mut self, parts: Vec<ConceptId>) -> ConceptId {
        let mut flat = BTreeSet::new();
        for p in parts {
            match self.concept(p).clone() {
                Nnf::Top => {}
                Nnf::Bottom => return self.intern(Nnf::Bottom),
                Nnf::And(inner) => flat.extend(inner),
                _ => {
                    flat.insert(p);
                }
            }
        }
        match flat.len() {
            0 => self.intern(Nnf::Top),
            1 => *flat.iter().next().expect("one member"),
            _ => self.intern(Nnf::And(flat.into_iter().collect())),
        }
    }

    fn or(&mut self, parts: Vec<ConceptId>) -> ConceptId {
        let mut flat = BTreeSet::new();
        for p in parts {
            match self.concept(p).clone() {
                Nnf::Bottom => {}
                Nnf::Top => return self.intern(Nnf::Top),
                Nnf::Or(inner) => flat.extend(inner),
                _ => {
                    flat.insert(p);
                }
            }
        }
        match flat.len() {
            0 => self.intern(Nnf::Bottom),
            1 => *flat.iter().next().expect("one member"),
            _ => self.intern(Nnf::Or(flat.into_iter().collect())),
        }
    }

    fn min(&mut self, n: u64, r: RoleId) -> ConceptId {
        self.intern(if n == 0 { Nnf::Top } else { Nnf::Min(n, r) })
    }

    /// Negation normal form of `c` (of its complement when `positive` is false).
    pub(crate) fn nnf(&mut self, c: &ConceptExpr, positive: bool) -> ConceptId {
        match c {
            ConceptExpr::Atomic(a) => {
                let a = self.atom(a);
                self.intern(if positive { Nnf::Atom(a) } else { Nnf::NotAtom(a) })
            }
            ConceptExpr::Top => self.intern(if positive { Nnf::Top } else { Nnf::Bottom }),
            ConceptExpr::Bottom => self.intern(if positive { Nnf::Bottom } else { Nnf::Top }),
            ConceptExpr::Not(inner) => self.nnf(inner, !positive),
            ConceptExpr::And(cs) | ConceptExpr::Or(cs) => {
                let parts: Vec<ConceptId> = cs.iter().map(|c| self.nnf(c, positive)).collect();
                if matches!(c, ConceptExpr::And(_)) == positive {
                    self.and(parts)
                } else {
                    self.or(parts)
                }
            }
            ConceptExpr::MinCard(n, r) => {
                let r = self.role(r);
                match (positive, *n) {
                    (true, n) => self.min(n, r),
                    (false, 0) => self.intern(Nnf::Bottom),
                    (false, n) => self.intern(Nnf::Max(n - 1, r)),
                }
            }
            ConceptExpr::MaxCard(n, r) => {
                let r = self.role(r);
                if positive {
                    self.intern(Nnf::Max(*n, r))
                } else {
                    self.min(n + 1, r)
                }
            }
            ConceptExpr::ExactCard(n, r) => {
                let r = self.role(r);
                if positive {
                    let lo = self.min(*n, r);
                    let hi = self.intern(Nnf::Max(*n, r));
                    self.and(vec![lo, hi])
                } else if *n == 0 {
                    self.min(1, r)
                } else {
                    let lo = self.intern(Nnf::Max(n - 1, r));
                    let hi = self.min(n + 1, r);
                    self.or(vec![lo, hi])
                }
            }
            ConceptExpr::SomeValuesFrom(r, inner) => {
                let r = self.role(r);
                let f = self.nnf(inner, positive);
                self.intern(if positive { Nnf::Some(r, f) } else { Nnf::All(r, f) })
            }
            ConceptExpr::DataHasValue(p, v) => {
                let p = self.data_prop_mut(p);
                let v = self.value(p, v);
                self.intern(if positive { Nnf::Value(p, v) } else { Nnf::NotValue(p, v) })
            }
            ConceptExpr::DataExactCard(n, p) => {
                let p = self.data_prop_mut(p);
                let c = match (*n, positive) {
                    (0, true) | (1, false) => Nnf::NoValue(p),
                    (1, true) | (0, false) => Nnf::HasValue(p),
                    (_, true) => Nnf::Bottom,
                    (_, false) => Nnf::Top,
                };
                self.intern(c)
            }
        }
    }

    /// Adds `lhs ⊑ rhs`, absorbing it into an atom where possible.
    fn absorb(&mut self, lhs: &ConceptExpr, rhs: &ConceptExpr) {
        match lhs {
            ConceptExpr::Atomic(a) => {
                let a = self.atom(a);
                let r = self.nnf(rhs, true);
                self.unfold.entry(a).or_default().push(r);
            }
            ConceptExpr::Bottom => {}
            ConceptExpr::Top => {
                let r = self.nnf(rhs, true);
                self.gcis.push(r);
            }
            ConceptExpr::Or(cs) => cs.iter().for_each(|c| self.absorb(c, rhs)),
            ConceptExpr::And(cs) => {
                let flat = flatten_and(cs);
                match flat.iter().position(|c| matches!(c, ConceptExpr::Atomic(_))) {
                    Some(k) => {
                        let mut alts: Vec<ConceptExpr> =
                            flat.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, c)| ConceptExpr::not(c.clone())).collect();
                        alts.push(rhs.clone());
                        self.absorb(&flat[k], &ConceptExpr::or_of(alts));
                    }
                    None => self.general(lhs, rhs),
                }
            }
            _ => self.general(lhs, rhs),
        }
    }

    fn general(&mut self, lhs: &ConceptExpr, rhs: &ConceptExpr) {
        let c = self.nnf(&ConceptExpr::Or(vec![ConceptExpr::not(lhs.clone()), rhs.clone()]), true);
        self.gcis.push(c);
    }

    fn disjoint(&mut self, a: &ConceptExpr, b: &ConceptExpr) {
        if matches!(a, ConceptExpr::Atomic(_)) || !matches!(b, ConceptExpr::Atomic(_)) {
            self.absorb(a, &ConceptExpr::not(b.clone()));
        } else {
            self.absorb(b, &ConceptExpr::not(a.clone()));
        }
    }
}

fn flatten_and(cs: &[ConceptExpr]) -> Vec<ConceptExpr> {
    let mut out = Vec::new();
    for c in cs {
        match c {
            ConceptExpr::And(inner) => out.extend(flatten_and(inner)),
            other => out.push(other.clone()),
        }
    }
    out
}

/// Role names grouped into inverse classes; returns (base name, inverted) per name.
fn inverse_classes(ax: &AxiomSet, names: &BTreeSet<String>) -> BTreeMap<String, (String, bool)> {
    let mut parent: BTreeMap<String, (String, bool)> = names.iter().map(|n| (n.clone(), (n.clone(), false))).collect();
    fn find(parent: &mut BTreeMap<String, (String, bool)>, n: &str) -> (String, bool) {
        let (p, flip) = parent[n].clone();
        if p == n {
            return (p, false);
        }
        let (root, up) = find(parent, &p);
        let total = flip ^ up;
        parent.insert(n.to_string(), (root.clone(), total));
        (root, total)
    }
    for a in &ax.axioms {
        if let Axiom::InverseObjProps(x, y) = a {
            let (rx, fx) = find(&mut parent, x);
            let (ry, fy) = find(&mut parent, y);
            if rx != ry {
                let (keep, drop) = if rx < ry { (rx, ry) } else { (ry, rx) };
                parent.insert(drop, (keep, !(fx ^ fy)));
            }
        }
    }
    names.iter().map(|n| (n.clone(), find(&mut parent, n))).collect()
}

/// Builds the knowledge base of an axiom set.
pub fn internalize(ax: &AxiomSet) -> KnowledgeBase {
    let mut kb = KnowledgeBase { generated: ax.generated.clone(), axioms: ax.axioms.clone(), ..Default::default() };
    kb.intern(Nnf::Top);
    let sig = ax.signature();
    let empty = BTreeSet::new();
    let role_names = sig.get(&NameKind::ObjectProperty).unwrap_or(&empty);

    // Roles: one base per inverse class; the class root is the positive direction.
    let classes = inverse_classes(ax, role_names);
    for (name, (base, flip)) in &classes {
        let b = kb.role(base);
        let id = if *flip { inverse(b) } else { b };
        kb.role_index.insert(name.clone(), id);
    }
    let n_roles = kb.role_count();
    let mut direct: Vec<BTreeSet<RoleId>> = vec![BTreeSet::new(); n_roles];
    for a in &ax.axioms {
        if let Axiom::SubObjPropOf(s, t) = a {
            let (s, t) = (kb.role_index[s], kb.role_index[t]);
            direct[s as usize].insert(t);
            direct[inverse(s) as usize].insert(inverse(t));
        }
    }
    kb.supers = (0..n_roles as RoleId)
        .map(|r| {
            let mut seen = BTreeSet::from([r]);
            let mut stack = vec![r];
            while let Some(x) = stack.pop() {
                for &y in &direct[x as usize] {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen.into_iter().collect()
        })
        .collect();
    kb.irreflexive = vec![None; n_roles];
    kb.domains = vec![Vec::new(); n_roles];

    for name in sig.get(&NameKind::Class).unwrap_or(&empty) {
        let a = kb.atom(name);
        kb.intern(Nnf::Atom(a));
    }
    kb.classes = ax.declared(NameKind::Class);
    kb.classes.extend(sig.get(&NameKind::Class).into_iter().flatten().cloned());
    for name in sig.get(&NameKind::DataProperty).unwrap_or(&empty) {
        kb.data_prop_mut(name);
    }
    let mut individuals: BTreeSet<String> = ax.declared(NameKind::Individual);
    individuals.extend(sig.get(&NameKind::Individual).into_iter().flatten().cloned());
    kb.abox.individuals = individuals.into_iter().collect();
    let ind = |kb: &KnowledgeBase, n: &str| kb.abox.individuals.binary_search_by(|x| x.as_str().cmp(n)).expect("individual in signature");

    for (i, a) in ax.axioms.iter().enumerate() {
        match a {
            Axiom::DeclClass(_) | Axiom::DeclObjProp(_) | Axiom::DeclDataProp(_) | Axiom::DeclIndividual(_) => {}
            Axiom::SubClassOf(l, r) => kb.absorb(l, r),
            Axiom::EquivalentClasses(cs) => {
                for x in cs {
                    for y in cs {
                        if x != y {
                            kb.absorb(x, y);
                        }
                    }
                }
            }
            Axiom::DisjointClasses(cs) => {
                for x in 0..cs.len() {
                    for y in x + 1..cs.len() {
                        kb.disjoint(&cs[x], &cs[y]);
                    }
                }
            }
            Axiom::ObjPropDomain(r, c) => {
                let (r, c) = (kb.role_index[r], kb.nnf(c, true));
                kb.domains[r as usize].push(c);
            }
            Axiom::ObjPropRange(r, c) => {
                let (r, c) = (kb.role_index[r], kb.nnf(c, true));
                kb.domains[inverse(r) as usize].push(c);
            }
            Axiom::SubObjPropOf(..) | Axiom::InverseObjProps(..) => {}
            Axiom::FunctionalObjProp(r) | Axiom::InverseFunctionalObjProp(r) => {
                let functional = matches!(a, Axiom::FunctionalObjProp(_));
                let r = kb.role_index[r];
                let c = kb.intern(Nnf::Max(1, if functional { r } else { inverse(r) }));
                let origin = if functional { MaxOrigin::Functional } else { MaxOrigin::InverseFunctional };
                kb.max_origin.entry(c).or_insert((origin, i));
                kb.gcis.push(c);
            }
            Axiom::IrreflexiveObjProp(r) => {
                let r = kb.role_index[r];
                for s in 0..n_roles as RoleId {
                    if kb.sub_role(s, r) || kb.sub_role(s, inverse(r)) {
                        kb.irreflexive[s as usize].get_or_insert(i);
                    }
                }
            }
            Axiom::DataPropDomain(p, c) => {
                let (p, c) = (kb.data_prop_mut(p), kb.nnf(c, true));
                kb.data[p as usize].domain.push(c);
            }
            Axiom::DataPropRange(p, range) => {
                let p = kb.data_prop_mut(p) as usize;
                if let Some(vs) = range.finite_values() {
                    let allowed = match kb.data[p].allowed.take() {
                        None => vs,
                        Some(old) => old.into_iter().filter(|v| vs.contains(v)).collect(),
                    };
                    kb.data[p].allowed = Some(allowed);
                }
                kb.data[p].ranges.push(range.clone());
            }
            Axiom::ClassAssertion(c, x) => {
                let (x, c) = (ind(&kb, x), kb.nnf(c, true));
                kb.abox.concepts.push((x, c, i));
            }
            Axiom::ObjPropAssertion(r, x, y) | Axiom::NegObjPropAssertion(r, x, y) => {
                let entry = (ind(&kb, x), kb.role_index[r], ind(&kb, y), i);
                if matches!(a, Axiom::ObjPropAssertion(..)) {
                    kb.abox.roles.push(entry);
                } else {
                    kb.abox.negated_roles.push(entry);
                }
            }
            Axiom::DataPropAssertion(p, x, v) => {
                let c = kb.nnf(&ConceptExpr::DataHasValue(p.clone(), v.clone()), true);
                kb.abox.concepts.push((ind(&kb, x), c, i));
            }
            Axiom::SameIndividual(xs) => {
                for w in xs.windows(2) {
                    kb.abox.same.push((ind(&kb, &w[0]), ind(&kb, &w[1]), i));
                }
            }
            Axiom::DifferentIndividuals(xs) => {
                let members = xs.iter().map(|x| ind(&kb, x)).collect();
                kb.abox.different.push((members, i));
            }
        }
    }
    for p in 0..kb.data.len() as u32 {
        kb.intern(Nnf::HasValue(p));
    }
    kb.rules = ax.rules.iter().map(|r| compile_rule(&kb, r)).collect();
    kb.gcis.sort();
    kb.gcis.dedup();
    for v in kb.unfold.values_mut() {
        v.sort();
        v.dedup();
    }
    kb
}

fn compile_rule(kb: &KnowledgeBase, r: &DlSafeRule) -> Rule {
    let mut vars: Vec<String> = Vec::new();
    let mut compile = |a: &crate::owl::RoleAtom| {
        let mut var = |v: &str| match vars.iter().position(|x| x == v) {
            Some(i) => i,
            None => {
                vars.push(v.to_string());
                vars.len() - 1
            }
        };
        let (s, o) = (var(&a.subject), var(&a.object));
        (kb.role_index[&a.role], s, o)
    };
    let body: Vec<_> = r.body.iter().map(&mut compile).collect();
    let head = compile(&r.head);
    Rule { body, head, vars: vars.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ElementRef;

    fn kb_of(axioms: Vec<Axiom>) -> KnowledgeBase {
        let mut s = AxiomSet::new("t");
        for a in axioms {
            s.push(a, ElementRef::Model);
        }
        internalize(&s)
    }

    fn a(n: &str) -> ConceptExpr {
        ConceptExpr::atom(n)
    }

    #[test]
    fn disjointness_is_pairwise() {
        let kb = kb_of(vec![Axiom::DisjointClasses(vec![a("A"), a("B"), a("C")])]);
        let total: usize = kb.unfold.values().map(Vec::len).sum();
        assert_eq!(total, 3);
        assert!(kb.gcis.is_empty());
    }

    #[test]
    fn equivalence_splits_both_ways() {
        let kb = kb_of(vec![Axiom::EquivalentClasses(vec![a("S"), ConceptExpr::MinCard(1, "r".into())])]);
        assert_eq!(kb.unfold[&kb.atom_id("S").unwrap()].len(), 1);
        assert_eq!(kb.gcis.len(), 1);
        assert_eq!(kb.concept_text(kb.gcis[0]), "(S or max 0 r)");
    }

    #[test]
    fn conjunction_with_atom_is_absorbed() {
        let kb = kb_of(vec![Axiom::EquivalentClasses(vec![
            a("S"),
            ConceptExpr::And(vec![a("C"), ConceptExpr::ExactCard(1, "r".into())]),
        ])]);
        assert!(kb.gcis.is_empty());
        let c = kb.atom_id("C").unwrap();
        assert_eq!(kb.concept_text(kb.unfold[&c][0]), "(S or max 0 r or min 2 r)");
    }

    #[test]
    fn inverse_roles_share_a_base() {
        let kb = kb_of(vec![
            Axiom::InverseObjProps("p".into(), "q".into()),
            Axiom::SubObjPropOf("p".into(), "s".into()),
            Axiom::IrreflexiveObjProp("s".into()),
        ]);
        let (p, q, s) = (kb.role_id("p").unwrap(), kb.role_id("q").unwrap(), kb.role_id("s").unwrap());
        assert_eq!(q, inverse(p));
        assert!(kb.sub_role(q, inverse(s)));
        assert!(kb.irreflexive[q as usize].is_some());
        assert_eq!(kb.role_name(q), "q");
    }

    #[test]
    fn irreflexive_flag_and_self_assertion() {
        let kb = kb_of(vec![
            Axiom::IrreflexiveObjProp("hasParent".into()),
            Axiom::ObjPropAssertion("hasParent".into(), "X".into(), "X".into()),
        ]);
        let r = kb.role_id("hasParent").unwrap();
        assert_eq!(kb.irreflexive[r as usize], Some(0));
        assert_eq!(kb.abox.roles, vec![(0, r, 0, 1)]);
    }

    #[test]
    fn negation_normal_form() {
        let mut kb = KnowledgeBase::default();
        let c = ConceptExpr::not(ConceptExpr::And(vec![ConceptExpr::ExactCard(0, "r".into()), a("A")]));
        let id = kb.nnf(&c, true);
        assert_eq!(kb.concept_text(id), "(min 1 r or not A)");
        let d = kb.nnf(&ConceptExpr::not(ConceptExpr::DataExactCard(1, "p".into())), true);
        assert_eq!(kb.concept(d), &Nnf::NoValue(0));
    }
}
