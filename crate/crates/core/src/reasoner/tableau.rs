//! Completion-graph tableau with pairwise blocking and dependency-directed
//! backjumping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::kb::{inverse, ConceptId, KnowledgeBase, MaxOrigin, Nnf, RoleId};
use super::report::{ClashKind, ClashReport};
use crate::oracle::Interpretation;
use crate::owl::{DataRange, DataValue, Datatype};

/// Branch points a fact depends on, one bit per nesting level. Level 127
/// stands for every deeper level as well.
type Dep = u128;

fn bit(level: usize) -> Dep {
    1 << level.min(127)
}

fn without(d: Dep, level: usize) -> Dep {
    if level < 127 {
        d & !bit(level)
    } else {
        d
    }
}

#[derive(Debug, Clone)]
struct Node {
    label: BTreeMap<ConceptId, Dep>,
    /// Order-independent hash of the label's concepts.
    label_key: u64,
    parent: Option<usize>,
    /// ABox individuals collapsed into this node.
    individuals: Vec<usize>,
    alive: bool,
    edges: BTreeMap<usize, BTreeMap<RoleId, Dep>>,
    merged_into: Option<(usize, Dep)>,
}

impl Node {
    fn new(parent: Option<usize>) -> Self {
        Node { label: BTreeMap::new(), label_key: 0, parent, individuals: Vec::new(), alive: true, edges: BTreeMap::new(), merged_into: None }
    }

    fn named(&self) -> bool {
        !self.individuals.is_empty()
    }

    fn insert(&mut self, c: ConceptId, dep: Dep) {
        if self.label.insert(c, dep).is_none() {
            // splitmix64 finalizer
            let mut z = u64::from(c).wrapping_add(0x9e37_79b9_7f4a_7c15);
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            self.label_key ^= z ^ (z >> 31);
        }
    }
}

/// Nodes are shared between the graphs of a branch and its alternatives and
/// copied on first write.
#[derive(Debug, Clone, Default)]
struct Graph {
    nodes: Vec<Arc<Node>>,
    neq: BTreeMap<(usize, usize), Dep>,
    /// Nodes changed since the expansion rules last ran on them.
    dirty: Vec<bool>,
    /// Nodes changed since they were last found to need no branching or
    /// successors.
    unsettled: Vec<bool>,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Graph {
    fn neq(&self, a: usize, b: usize) -> Option<Dep> {
        self.neq.get(&pair(a, b)).copied()
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(Arc::new(node));
        self.dirty.push(true);
        self.unsettled.push(true);
        self.nodes.len() - 1
    }

    fn node_mut(&mut self, x: usize) -> &mut Node {
        self.dirty[x] = true;
        self.unsettled[x] = true;
        Arc::make_mut(&mut self.nodes[x])
    }

    fn add_edge(&mut self, x: usize, y: usize, r: RoleId, dep: Dep) -> bool {
        if self.nodes[x].edges.get(&y).is_some_and(|rs| rs.contains_key(&r)) {
            return false;
        }
        self.node_mut(x).edges.entry(y).or_default().entry(r).or_insert(dep);
        self.node_mut(y).edges.entry(x).or_default().entry(inverse(r)).or_insert(dep);
        true
    }

    fn ancestors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.nodes[x].parent, move |&p| self.nodes[p].parent)
    }

    fn resolve(&self, mut x: usize) -> (usize, Dep) {
        let mut dep = 0;
        while let Some((y, d)) = self.nodes[x].merged_into {
            dep |= d;
            x = y;
        }
        (x, dep)
    }

    fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&x| self.nodes[x].alive)
    }
}

#[derive(Debug, Clone)]
struct Clash {
    dep: Dep,
    report: ClashReport,
}

/// The search gave up after creating too many nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceLimit {
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessNode {
    pub individuals: Vec<String>,
    pub concepts: Vec<String>,
    pub data: Vec<(String, DataValue)>,
}

/// A completed clash-free graph. When `blocked` is false it is a finite model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub nodes: Vec<WitnessNode>,
    /// Role memberships for every role name, closed under the hierarchy.
    pub edges: Vec<(usize, String, usize)>,
    pub blocked: bool,
}

impl Witness {
    pub fn interpretation(&self) -> Interpretation {
        let mut i = Interpretation { domain_size: self.nodes.len(), ..Default::default() };
        for (e, n) in self.nodes.iter().enumerate() {
            for c in &n.concepts {
                i.concept_ext.entry(c.clone()).or_default().insert(e);
            }
            for a in &n.individuals {
                i.individual_map.insert(a.clone(), e);
            }
            for (p, v) in &n.data {
                i.data_atoms.insert((e, p.clone()), v.clone());
            }
        }
        for (x, r, y) in &self.edges {
            i.role_ext.entry(r.clone()).or_default().insert((*x, *y));
        }
        i
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Satisfiable(Witness),
    Unsatisfiable(ClashReport),
}

impl Outcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, Outcome::Satisfiable(_))
    }
}

enum Choice {
    Or { node: usize, members: Vec<ConceptId>, dep: Dep },
    Merge { pairs: Vec<(usize, usize)>, dep: Dep },
}

/// Stack reserved for one search; only touched pages are committed.
const SEARCH_STACK_BYTES: usize = 1 << 30;

/// Branching may copy at most this many nodes per unit of node cap.
const COPY_ALLOWANCE: usize = 64;

struct Engine<'k> {
    kb: &'k KnowledgeBase,
    cap: usize,
    created: usize,
    /// Nodes copied when branching, charged against `cap * COPY_ALLOWANCE`.
    copied: usize,
    /// Whether graph nodes `0..n` stand for the ABox individuals.
    abox: bool,
}

/// Whether the ABox of `kb` has a model.
pub fn abox_consistency(kb: &KnowledgeBase, cap: usize) -> Result<Outcome, ResourceLimit> {
    let mut e = Engine { kb, cap, created: 0, copied: 0, abox: true };
    let mut g = Graph::default();
    for i in 0..kb.abox.individuals.len() {
        let mut n = Node::new(None);
        n.individuals.push(i);
        g.push(n);
    }
    e.created = g.nodes.len();
    let init = (|| -> Result<(), Clash> {
        for (group, _) in &kb.abox.different {
            for a in 0..group.len() {
                for b in a + 1..group.len() {
                    if group[a] != group[b] {
                        g.neq.insert(pair(group[a], group[b]), 0);
                    }
                }
            }
        }
        for &(x, r, y, _) in &kb.abox.roles {
            g.add_edge(x, y, r, 0);
        }
        for &(x, c, _) in &kb.abox.concepts {
            e.add(&mut g, x, c, 0)?;
        }
        for &(a, b, _) in &kb.abox.same {
            let ((x, dx), (y, dy)) = (g.resolve(a), g.resolve(b));
            if x != y {
                e.merge(&mut g, x, y, dx | dy)?;
            }
        }
        Ok(())
    })();
    if let Err(c) = init {
        return Ok(Outcome::Unsatisfiable(c.report));
    }
    e.run(g)
}

/// Whether the conjunction of `concepts` can have an instance, ignoring the ABox.
pub fn satisfiable(kb: &KnowledgeBase, concepts: &[ConceptId], cap: usize) -> Result<Outcome, ResourceLimit> {
    let mut e = Engine { kb, cap, created: 1, copied: 0, abox: false };
    let mut g = Graph::default();
    g.push(Node::new(None));
    for &c in concepts {
        if let Err(clash) = e.add(&mut g, 0, c, 0) {
            return Ok(Outcome::Unsatisfiable(clash.report));
        }
    }
    e.run(g)
}

impl<'k> Engine<'k> {
    fn run(&mut self, g: Graph) -> Result<Outcome, ResourceLimit> {
        // Every branching level is a stack frame, so search on a thread
        // whose stack is sized for the node cap rather than the default.
        std::thread::scope(|scope| {
            std::thread::Builder::new()
                .stack_size(SEARCH_STACK_BYTES)
                .spawn_scoped(scope, || {
                    Ok(match self.solve(g, 0)? {
                        Ok(g) => Outcome::Satisfiable(self.witness(&g)),
                        Err(c) => Outcome::Unsatisfiable(c.report),
                    })
                })
                .expect("spawn search thread")
                .join()
                .unwrap_or_else(|panic| std::panic::resume_unwind(panic))
        })
    }

    fn solve(&mut self, mut g: Graph, level: usize) -> Result<Result<Graph, Clash>, ResourceLimit> {
        loop {
            if let Err(c) = self.expand(&mut g) {
                return Ok(Err(c));
            }
            let blocked = self.blocking(&g);
            match self.choice(&g, &blocked) {
                Ok(Some(Choice::Or { node, members, dep })) if members.len() == 1 => {
                    if let Err(c) = self.add(&mut g, node, members[0], dep) {
                        return Ok(Err(c));
                    }
                }
                Ok(Some(choice)) => return self.branch(g, choice, level),
                Ok(None) => {
                    if !self.generate(&mut g, &blocked)? {
                        return Ok(Ok(g));
                    }
                }
                Err(c) => return Ok(Err(c)),
            }
        }
    }

    fn branch(&mut self, g: Graph, choice: Choice, level: usize) -> Result<Result<Graph, Clash>, ResourceLimit> {
        let here = bit(level);
        let (count, base) = match &choice {
            Choice::Or { members, dep, .. } => (members.len(), *dep),
            Choice::Merge { pairs, dep } => (pairs.len(), *dep),
        };
        let mut first: Option<Clash> = None;
        let mut acc: Dep = base;
        for k in 0..count {
            self.copied += g.nodes.len();
            if self.copied > self.cap.saturating_mul(COPY_ALLOWANCE) {
                return Err(ResourceLimit { nodes: self.created });
            }
            let mut h = g.clone();
            let applied = match &choice {
                Choice::Or { node, members, .. } => self.add(&mut h, *node, members[k], base | here).map(|_| ()),
                Choice::Merge { pairs, .. } => {
                    let (y, z) = pairs[k];
                    self.merge(&mut h, y, z, base | here)
                }
            };
            let result = match applied {
                Ok(()) => self.solve(h, level + 1)?,
                Err(c) => Err(c),
            };
            match result {
                Ok(done) => return Ok(Ok(done)),
                Err(c) => {
                    if c.dep & here == 0 {
                        return Ok(Err(c));
                    }
                    acc |= without(c.dep, level);
                    first.get_or_insert(c);
                }
            }
        }
        let mut c = first.expect("a choice has at least one alternative");
        c.dep = acc;
        Ok(Err(c))
    }

    // ---- naming and reports ----

    fn node_name(&self, g: &Graph, x: usize) -> String {
        match g.nodes[x].individuals.first() {
            Some(&i) => self.kb.abox.individuals[i].clone(),
            None => format!("_:{x}"),
        }
    }

    fn clash(&self, g: &Graph, kind: ClashKind, dep: Dep, nodes: &[usize], extra: Vec<String>, message: String) -> Clash {
        let mut participants: Vec<String> = nodes.iter().map(|&n| self.node_name(g, n)).collect();
        participants.extend(extra);
        let mut provenance = BTreeSet::new();
        let touched: BTreeSet<usize> = nodes.iter().flat_map(|&n| g.nodes[n].individuals.iter().copied()).collect();
        let abox = &self.kb.abox;
        match kind {
            ClashKind::AtomicContradiction | ClashKind::DataValueConflict => {
                provenance.extend(abox.concepts.iter().filter(|a| touched.contains(&a.0)).map(|a| a.2));
                provenance.extend(abox.negated_roles.iter().filter(|a| touched.contains(&a.0)).map(|a| a.3));
            }
            ClashKind::DifferentIndividualsMerge => {
                provenance.extend(abox.same.iter().filter(|a| touched.contains(&a.0) || touched.contains(&a.1)).map(|a| a.2));
                provenance.extend(
                    abox.different.iter().filter(|(m, _)| m.iter().filter(|i| touched.contains(i)).count() >= 2).map(|a| a.1),
                );
            }
            _ => {
                provenance.extend(abox.roles.iter().filter(|a| touched.contains(&a.0) || touched.contains(&a.2)).map(|a| a.3));
            }
        }
        Clash { dep, report: ClashReport { kind, message, participants, provenance: provenance.into_iter().collect() } }
    }

    // ---- label updates ----

    /// Adds `c` to the label of `x`; true when the label grew.
    fn add(&mut self, g: &mut Graph, x: usize, c: ConceptId, dep: Dep) -> Result<bool, Clash> {
        if g.nodes[x].label.contains_key(&c) {
            return Ok(false);
        }
        let kb = self.kb;
        let name = || self.node_name(g, x);
        match kb.concept(c) {
            Nnf::Bottom => {
                let n = name();
                return Err(self.clash(g, ClashKind::AtomicContradiction, dep, &[x], vec![], format!("Individual {n} is an instance of Nothing")));
            }
            Nnf::Value(p, v) => {
                let prop = &kb.data[*p as usize];
                let value = &prop.values[*v as usize];
                if let Some(range) = prop.ranges.iter().find(|r| !r.contains(value)) {
                    let n = name();
                    return Err(self.clash(
                        g,
                        ClashKind::DataValueConflict,
                        dep,
                        &[x],
                        vec![prop.name.clone()],
                        format!("Individual {n} has value {} for {} outside its range {}", value.lexical, prop.name, range_text(range)),
                    ));
                }
                for (&other, &d) in &g.nodes[x].label {
                    if let Nnf::Value(q, w) = kb.concept(other) {
                        if q == p && w != v {
                            let n = name();
                            return Err(self.clash(
                                g,
                                ClashKind::DataValueConflict,
                                dep | d,
                                &[x],
                                vec![prop.name.clone()],
                                format!("Individual {n} has more than one value for the data property {}", prop.name),
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
        if let Some(neg) = kb.complement_of(c) {
            if let Some(&d) = g.nodes[x].label.get(&neg) {
                let n = name();
                let data = matches!(kb.concept(c), Nnf::Value(..) | Nnf::NotValue(..) | Nnf::HasValue(_) | Nnf::NoValue(_));
                let kind = if data { ClashKind::DataValueConflict } else { ClashKind::AtomicContradiction };
                let (pos, negtext) = (kb.concept_text(c), kb.concept_text(neg));
                return Err(self.clash(
                    g,
                    kind,
                    dep | d,
                    &[x],
                    vec![pos.clone(), negtext.clone()],
                    format!("Individual {n} is forced into both {pos} and {negtext}"),
                ));
            }
        }
        if let Some((max, n, r, d)) = self.cardinality_conflict(&g.nodes[x].label, c) {
            return Err(self.max_clash(g, x, max, n, r, &[], dep | d));
        }
        g.node_mut(x).insert(c, dep);
        Ok(true)
    }

    /// An at-most restriction that `c` contradicts together with some label
    /// member, found before any successor is generated.
    fn cardinality_conflict(&self, label: &BTreeMap<ConceptId, Dep>, c: ConceptId) -> Option<(ConceptId, u64, RoleId, Dep)> {
        let kb = self.kb;
        let exceeds = |need: ConceptId, allow: ConceptId| match (demand(kb.concept(need)), kb.concept(allow)) {
            (Some((n, s)), Nnf::Max(m, r)) => n > *m && kb.sub_role(s, *r),
            _ => false,
        };
        label.iter().find_map(|(&o, &d)| match kb.concept(c) {
            Nnf::Max(m, r) if exceeds(o, c) => Some((c, *m, *r, d)),
            _ => match kb.concept(o) {
                Nnf::Max(m, r) if exceeds(c, o) => Some((o, *m, *r, d)),
                _ => None,
            },
        })
    }

    /// Nodes adjacent to `x` through `r` or one of its sub-roles.
    fn neighbours(&self, g: &Graph, x: usize, r: RoleId) -> Vec<(usize, Dep)> {
        g.nodes[x]
            .edges
            .iter()
            .filter_map(|(&y, roles)| {
                roles.iter().find(|(&s, _)| self.kb.sub_role(s, r)).map(|(_, &d)| (y, d))
            })
            .collect()
    }

    fn role_between(&self, g: &Graph, x: usize, y: usize, r: RoleId) -> Option<Dep> {
        g.nodes[x].edges.get(&y)?.iter().find(|(&s, _)| self.kb.sub_role(s, r)).map(|(_, &d)| d)
    }

    // ---- deterministic expansion ----

    fn expand(&mut self, g: &mut Graph) -> Result<(), Clash> {
        loop {
            let mut changed = false;
            let blocked = self.blocking(g);
            let nodes: Vec<usize> = g.alive().filter(|&x| g.dirty[x] && !blocked[x].indirect).collect();
            for &x in &nodes {
                if !g.nodes[x].alive {
                    continue;
                }
                g.dirty[x] = false;
                changed |= self.expand_node(g, x)?;
            }
            changed |= self.apply_rules(g)?;
            self.check_negated_roles(g)?;
            self.check_max_clashes(g, &nodes)?;
            if !changed {
                return Ok(());
            }
        }
    }

    fn expand_node(&mut self, g: &mut Graph, x: usize) -> Result<bool, Clash> {
        let kb = self.kb;
        let mut changed = false;
        for &c in &kb.gcis {
            changed |= self.add(g, x, c, 0)?;
        }
        let label: Vec<(ConceptId, Dep)> = g.nodes[x].label.iter().map(|(&c, &d)| (c, d)).collect();
        for (c, d) in label {
            match kb.concept(c) {
                Nnf::Atom(a) => {
                    if let Some(parts) = kb.unfold.get(a) {
                        for &p in parts {
                            changed |= self.add(g, x, p, d)?;
                        }
                    }
                }
                Nnf::And(parts) => {
                    for &p in parts {
                        changed |= self.add(g, x, p, d)?;
                    }
                }
                Nnf::All(r, f) => {
                    for (y, ed) in self.neighbours(g, x, *r) {
                        changed |= self.add(g, y, *f, d | ed)?;
                    }
                }
                Nnf::Value(p, _) => {
                    if let Some(has) = kb.atomic_has_value(*p) {
                        changed |= self.add(g, x, has, d)?;
                    }
                }
                Nnf::HasValue(p) => {
                    for &dc in &kb.data[*p as usize].domain {
                        changed |= self.add(g, x, dc, d)?;
                    }
                    self.check_value_available(g, x, *p, d)?;
                }
                _ => {}
            }
        }
        let edges: Vec<(usize, RoleId, Dep)> =
            g.nodes[x].edges.iter().flat_map(|(&y, rs)| rs.iter().map(move |(&s, &d)| (y, s, d))).collect();
        for (y, s, d) in edges {
            if y == x {
                if let Some(ax) = kb.supers[s as usize].iter().find_map(|&t| kb.irreflexive[t as usize]) {
                    let role = match &kb.axioms[ax] {
                        crate::owl::Axiom::IrreflexiveObjProp(r) => r.clone(),
                        _ => kb.role_name(s),
                    };
                    let mut c = self.clash(g, ClashKind::IrreflexiveEdge, d, &[x], vec![role.clone()], format!("Irreflexive property {role}"));
                    c.report.provenance.push(ax);
                    c.report.provenance.sort();
                    c.report.provenance.dedup();
                    return Err(c);
                }
            }
            for &t in &kb.supers[s as usize] {
                for &dc in &kb.domains[t as usize] {
                    changed |= self.add(g, x, dc, d)?;
                }
            }
        }
        Ok(changed)
    }

    /// A node required to carry a value of a finitely-ranged property must
    /// have one of the allowed values left.
    fn check_value_available(&self, g: &Graph, x: usize, p: u32, dep: Dep) -> Result<(), Clash> {
        let kb = self.kb;
        let prop = &kb.data[p as usize];
        let Some(allowed) = &prop.allowed else { return Ok(()) };
        let label = &g.nodes[x].label;
        if label.keys().any(|&c| matches!(kb.concept(c), Nnf::Value(q, _) if *q == p)) {
            return Ok(());
        }
        let mut acc = dep;
        for v in allowed {
            if !prop.ranges.iter().all(|r| r.contains(v)) {
                continue;
            }
            let excluded = kb.value_id(p, v).and_then(|id| kb.negated_value(p, id)).and_then(|c| label.get(&c));
            match excluded {
                Some(&d) => acc |= d,
                None => return Ok(()),
            }
        }
        let n = self.node_name(g, x);
        Err(self.clash(g, ClashKind::DataValueConflict, acc, &[x], vec![prop.name.clone()], format!("Individual {n} has no admissible value left for the data property {}", prop.name)))
    }

    fn check_negated_roles(&self, g: &Graph) -> Result<(), Clash> {
        if !self.abox {
            return Ok(());
        }
        for &(a, r, b, _) in &self.kb.abox.negated_roles {
            let ((x, dx), (y, dy)) = (g.resolve(a), g.resolve(b));
            if let Some(d) = self.role_between(g, x, y, r) {
                let (an, bn, rn) = (self.kb.abox.individuals[a].clone(), self.kb.abox.individuals[b].clone(), self.kb.role_name(r));
                return Err(self.clash(
                    g,
                    ClashKind::AtomicContradiction,
                    d | dx | dy,
                    &[x, y],
                    vec![rn.clone()],
                    format!("Individual {an} is linked to {bn} by {rn} despite a negative assertion"),
                ));
            }
        }
        Ok(())
    }

    /// At-most restrictions whose neighbours are all pairwise distinct.
    fn check_max_clashes(&self, g: &Graph, nodes: &[usize]) -> Result<(), Clash> {
        for &x in nodes.iter().filter(|&&x| g.nodes[x].alive) {
            for (&c, &d) in &g.nodes[x].label {
                let Nnf::Max(n, r) = self.kb.concept(c) else { continue };
                let ns = self.neighbours(g, x, *r);
                if ns.len() as u64 <= *n {
                    continue;
                }
                let mut dep = d;
                let mut all_distinct = true;
                'pairs: for a in 0..ns.len() {
                    for b in a + 1..ns.len() {
                        match g.neq(ns[a].0, ns[b].0) {
                            Some(nd) => dep |= nd,
                            None => {
                                all_distinct = false;
                                break 'pairs;
                            }
                        }
                    }
                }
                if all_distinct {
                    dep |= ns.iter().fold(0, |acc, (_, ed)| acc | ed);
                    return Err(self.max_clash(g, x, c, *n, *r, &ns, dep));
                }
            }
        }
        Ok(())
    }

    fn max_clash(&self, g: &Graph, x: usize, c: ConceptId, n: u64, r: RoleId, ns: &[(usize, Dep)], dep: Dep) -> Clash {
        let who = self.node_name(g, x);
        let role = self.kb.role_name(r);
        let origin = self.kb.max_origin.get(&c).copied();
        let (kind, message) = match origin {
            Some((MaxOrigin::InverseFunctional, _)) => (
                ClashKind::InverseFunctional,
                format!("Individual {who} has more than one value for the functional property {role}"),
            ),
            Some((MaxOrigin::Functional, _)) => (
                ClashKind::MaxCardinality,
                format!("Individual {who} has more than one value for the functional property {role}"),
            ),
            None => (ClashKind::MaxCardinality, format!("Individual {who} has more than {n} value(s) for the property {role}")),
        };
        let mut nodes = vec![x];
        nodes.extend(ns.iter().map(|(y, _)| *y));
        let mut clash = self.clash(g, kind, dep, &nodes, vec![role], message);
        if let Some((_, ax)) = origin {
            clash.report.provenance.push(ax);
            clash.report.provenance.sort();
            clash.report.provenance.dedup();
        }
        clash
    }

    /// Forward-chains the DL-safe rules over nodes that carry individuals.
    fn apply_rules(&mut self, g: &mut Graph) -> Result<bool, Clash> {
        let mut changed = false;
        for rule in &self.kb.rules {
            loop {
                let mut found = Vec::new();
                let mut assign = vec![None; rule.vars];
                self.join(g, rule, 0, &mut assign, 0, &mut found);
                let mut grew = false;
                for (x, r, y, d) in found {
                    if self.role_between(g, x, y, r).is_none() {
                        g.add_edge(x, y, r, d);
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
                changed = true;
            }
        }
        Ok(changed)
    }

    fn join(
        &self,
        g: &Graph,
        rule: &super::kb::Rule,
        k: usize,
        assign: &mut Vec<Option<usize>>,
        dep: Dep,
        out: &mut Vec<(usize, RoleId, usize, Dep)>,
    ) {
        if k == rule.body.len() {
            let (r, s, o) = rule.head;
            if let (Some(x), Some(y)) = (assign[s], assign[o]) {
                out.push((x, r, y, dep));
            }
            return;
        }
        let (r, s, o) = rule.body[k];
        let subjects: Vec<usize> = match assign[s] {
            Some(x) => vec![x],
            None => g.alive().filter(|&x| g.nodes[x].named()).collect(),
        };
        for x in subjects {
            for (y, d) in self.neighbours(g, x, r) {
                if !g.nodes[y].named() || assign[o].is_some_and(|v| v != y) {
                    continue;
                }
                let (old_s, old_o) = (assign[s], assign[o]);
                assign[s] = Some(x);
                assign[o] = Some(y);
                if s != o || x == y {
                    self.join(g, rule, k + 1, assign, dep | d, out);
                }
                assign[s] = old_s;
                assign[o] = old_o;
            }
        }
    }

    // ---- nondeterminism ----

    fn choice(&self, g: &Graph, blocked: &[Blocking]) -> Result<Option<Choice>, Clash> {
        let kb = self.kb;
        let active: Vec<usize> = g.alive().filter(|&x| g.unsettled[x] && !blocked[x].indirect).collect();
        for &x in &active {
            let label = &g.nodes[x].label;
            for (&c, &d) in label {
                if let Nnf::Or(members) = kb.concept(c) {
                    if members.iter().any(|m| label.contains_key(m)) {
                        continue;
                    }
                    let mut dep = d;
                    let mut open = Vec::with_capacity(members.len());
                    for &m in members {
                        let refuted = kb.complement_of(m).and_then(|n| label.get(&n).copied());
                        match refuted.or_else(|| self.cardinality_conflict(label, m).map(|(.., d)| d)) {
                            Some(refuted) => dep |= refuted,
                            None => open.push(m),
                        }
                    }
                    if open.is_empty() {
                        (open, dep) = (members.clone(), d);
                    }
                    open.sort_by_key(|&m| generation_cost(kb.concept(m)));
                    return Ok(Some(Choice::Or { node: x, members: open, dep }));
                }
            }
        }
        for &x in &active {
            for (&c, &d) in &g.nodes[x].label {
                let Nnf::Max(n, r) = kb.concept(c) else { continue };
                let ns = self.neighbours(g, x, *r);
                if ns.len() as u64 <= *n {
                    continue;
                }
                let mut pairs = Vec::new();
                for a in 0..ns.len() {
                    for b in a + 1..ns.len() {
                        if g.neq(ns[a].0, ns[b].0).is_none() {
                            pairs.push(self.merge_direction(g, ns[a].0, ns[b].0));
                        }
                    }
                }
                let dep = ns.iter().fold(d, |acc, (_, ed)| acc | ed);
                if pairs.is_empty() {
                    return Err(self.max_clash(g, x, c, *n, *r, &ns, dep));
                }
                return Ok(Some(Choice::Merge { pairs, dep }));
            }
        }
        Ok(None)
    }

    /// Orders a pair as (merged away, kept): individuals and ancestors are kept.
    fn merge_direction(&self, g: &Graph, a: usize, b: usize) -> (usize, usize) {
        let (na, nb) = (g.nodes[a].named(), g.nodes[b].named());
        if na && !nb {
            return (b, a);
        }
        if nb && !na {
            return (a, b);
        }
        if !na && g.ancestors(b).any(|p| p == a) {
            return (b, a);
        }
        if !na && g.ancestors(a).any(|p| p == b) {
            return (a, b);
        }
        (a.max(b), a.min(b))
    }

    /// Merges node `y` into node `z`.
    fn merge(&mut self, g: &mut Graph, y: usize, z: usize, dep: Dep) -> Result<(), Clash> {
        if let Some(d) = g.neq(y, z) {
            let (a, b) = (self.node_name(g, y), self.node_name(g, z));
            return Err(self.clash(
                g,
                ClashKind::DifferentIndividualsMerge,
                dep | d,
                &[y, z],
                vec![],
                format!("Individuals {a} and {b} are declared different but must be the same"),
            ));
        }
        let edges: Vec<(usize, RoleId, Dep)> =
            g.nodes[y].edges.iter().flat_map(|(&w, rs)| rs.iter().map(move |(&s, &d)| (w, s, d))).collect();
        for (w, s, d) in edges {
            if w == y {
                g.add_edge(z, z, s, d | dep);
            } else if g.nodes[w].parent == Some(y) && !g.nodes[w].named() {
                continue;
            } else {
                g.add_edge(z, w, s, d | dep);
            }
        }
        let neqs: Vec<((usize, usize), Dep)> = g.neq.iter().filter(|((a, b), _)| *a == y || *b == y).map(|(&k, &d)| (k, d)).collect();
        for ((a, b), d) in neqs {
            let other = if a == y { b } else { a };
            g.neq.entry(pair(z, other)).or_insert(d | dep);
        }
        let moved = std::mem::take(&mut g.node_mut(y).individuals);
        g.node_mut(z).individuals.extend(moved);
        g.node_mut(z).individuals.sort();
        let label: Vec<(ConceptId, Dep)> = g.nodes[y].label.iter().map(|(&c, &d)| (c, d)).collect();
        self.prune(g, y);
        g.node_mut(y).merged_into = Some((z, dep));
        for (c, d) in label {
            self.add(g, z, c, d | dep)?;
        }
        Ok(())
    }

    fn prune(&mut self, g: &mut Graph, x: usize) {
        let children: Vec<usize> =
            g.nodes[x].edges.keys().copied().filter(|&w| g.nodes[w].parent == Some(x) && !g.nodes[w].named() && w != x).collect();
        for c in children {
            self.prune(g, c);
        }
        let neighbours: Vec<usize> = g.nodes[x].edges.keys().copied().collect();
        for w in neighbours {
            g.node_mut(w).edges.remove(&x);
        }
        g.node_mut(x).edges.clear();
        g.node_mut(x).alive = false;
        g.neq.retain(|(a, b), _| *a != x && *b != x);
    }

    // ---- generating rules ----

    fn generate(&mut self, g: &mut Graph, blocked: &[Blocking]) -> Result<bool, ResourceLimit> {
        let kb = self.kb;
        let mut grew = false;
        let nodes: Vec<usize> = g.alive().filter(|&x| g.unsettled[x] && !blocked[x].any()).collect();
        for x in nodes {
            let mut here = false;
            let label: Vec<(ConceptId, Dep)> = g.nodes[x].label.iter().map(|(&c, &d)| (c, d)).collect();
            for (c, d) in label {
                match kb.concept(c) {
                    Nnf::Min(n, r) => {
                        let ns: Vec<usize> = self.neighbours(g, x, *r).into_iter().map(|(y, _)| y).collect();
                        if distinct_at_least(g, &ns, *n as usize) {
                            continue;
                        }
                        let fresh: Vec<usize> = (0..*n).map(|_| self.fresh(g, x, *r, d)).collect::<Result<_, _>>()?;
                        for a in 0..fresh.len() {
                            for b in a + 1..fresh.len() {
                                g.neq.insert(pair(fresh[a], fresh[b]), d);
                            }
                        }
                        here = true;
                    }
                    Nnf::Some(r, f) => {
                        if self.neighbours(g, x, *r).iter().any(|(y, _)| g.nodes[*y].label.contains_key(f)) {
                            continue;
                        }
                        let y = self.fresh(g, x, *r, d)?;
                        g.node_mut(y).insert(*f, d);
                        here = true;
                    }
                    _ => {}
                }
            }
            if !here {
                g.unsettled[x] = false;
            }
            grew |= here;
        }
        Ok(grew)
    }

    fn fresh(&mut self, g: &mut Graph, parent: usize, r: RoleId, dep: Dep) -> Result<usize, ResourceLimit> {
        self.created += 1;
        if self.created > self.cap {
            return Err(ResourceLimit { nodes: self.created });
        }
        let y = g.push(Node::new(Some(parent)));
        g.add_edge(parent, y, r, dep);
        Ok(y)
    }

    // ---- blocking ----

    /// Anywhere pairwise blocking: an unnamed node with an unnamed parent is
    /// blocked by any earlier unblocked such node whose label, parent label
    /// and incoming edge roles are the same.
    fn blocking(&self, g: &Graph) -> Vec<Blocking> {
        let mut out = vec![Blocking::default(); g.nodes.len()];
        let mut blockers: HashMap<(u64, u64, Vec<RoleId>), Vec<usize>> = HashMap::new();
        for x in g.alive() {
            let Some(p) = g.nodes[x].parent else { continue };
            if out[p].any() {
                out[x].indirect = true;
                continue;
            }
            if g.nodes[x].named() || g.nodes[p].named() {
                continue;
            }
            let roles = g.nodes[p].edges.get(&x).map(|rs| rs.keys().copied().collect()).unwrap_or_default();
            let candidates = blockers.entry((g.nodes[x].label_key, g.nodes[p].label_key, roles)).or_default();
            let same = |a: usize, b: usize| g.nodes[a].label.keys().eq(g.nodes[b].label.keys());
            let blocked_by = candidates.iter().any(|&y| g.nodes[y].parent.is_some_and(|q| same(x, y) && same(p, q)));
            if blocked_by {
                out[x].direct = true;
            } else {
                candidates.push(x);
            }
        }
        out
    }

    // ---- witness ----

    fn witness(&self, g: &Graph) -> Witness {
        let kb = self.kb;
        let blocked = self.blocking(g);
        let ids: Vec<usize> = g.alive().collect();
        let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut nodes = Vec::new();
        for &x in &ids {
            let n = &g.nodes[x];
            let individuals: Vec<String> = n.individuals.iter().map(|&i| kb.abox.individuals[i].clone()).collect();
            let mut concepts = Vec::new();
            let mut data = Vec::new();
            for &c in n.label.keys() {
                match kb.concept(c) {
                    Nnf::Atom(a) => concepts.push(kb.atom_name(*a).to_string()),
                    Nnf::Value(p, v) => {
                        let prop = &kb.data[*p as usize];
                        data.push((prop.name.clone(), prop.values[*v as usize].clone()));
                    }
                    _ => {}
                }
            }
            for &c in n.label.keys() {
                if let Nnf::HasValue(p) = kb.concept(c) {
                    let prop = &kb.data[*p as usize];
                    if data.iter().all(|(q, _)| q != &prop.name) {
                        data.push((prop.name.clone(), self.pick_value(g, x, *p)));
                    }
                }
            }
            data.sort();
            nodes.push(WitnessNode { individuals, concepts, data });
        }
        let mut edges = BTreeSet::new();
        let names = kb.role_names();
        for &x in &ids {
            for (&y, rs) in &g.nodes[x].edges {
                for &s in rs.keys() {
                    for &t in &kb.supers[s as usize] {
                        for (name, id) in &names {
                            if *id == t {
                                edges.insert((index[&x], name.clone(), index[&y]));
                            }
                        }
                    }
                }
            }
        }
        Witness { nodes, edges: edges.into_iter().collect(), blocked: blocked.iter().any(Blocking::any) }
    }

    fn pick_value(&self, g: &Graph, x: usize, p: u32) -> DataValue {
        let kb = self.kb;
        let prop = &kb.data[p as usize];
        let label = &g.nodes[x].label;
        if let Some(allowed) = &prop.allowed {
            for v in allowed {
                let excluded = kb.value_id(p, v).and_then(|id| kb.negated_value(p, id)).is_some_and(|c| label.contains_key(&c));
                if !excluded && prop.ranges.iter().all(|r| r.contains(v)) {
                    return v.clone();
                }
            }
        }
        let datatype = prop
            .ranges
            .iter()
            .find_map(|r| match r {
                DataRange::Datatype(dt) => Some(*dt),
                DataRange::OneOf(_) => None,
            })
            .unwrap_or(Datatype::String);
        DataValue { lexical: "\u{0}fresh0".into(), datatype }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Blocking {
    direct: bool,
    indirect: bool,
}

impl Blocking {
    fn any(&self) -> bool {
        self.direct || self.indirect
    }
}

/// Successors through a role that a concept requires.
fn demand(c: &Nnf) -> Option<(u64, RoleId)> {
    match c {
        Nnf::Min(n, r) if *n > 0 => Some((*n, *r)),
        Nnf::Some(r, _) => Some((1, *r)),
        _ => None,
    }
}

/// Disjuncts that cannot create successors are tried first; they keep the
/// completion graph small when a general axiom applies at every node.
fn generation_cost(c: &Nnf) -> u8 {
    match c {
        Nnf::Bottom | Nnf::NotAtom(_) | Nnf::All(..) | Nnf::Max(..) | Nnf::NotValue(..) | Nnf::NoValue(_) => 0,
        Nnf::Top | Nnf::Value(..) | Nnf::HasValue(_) => 1,
        Nnf::Atom(_) | Nnf::And(_) | Nnf::Or(_) => 2,
        Nnf::Some(..) | Nnf::Min(..) => 3,
    }
}

fn range_text(r: &DataRange) -> String {
    match r {
        DataRange::Datatype(dt) => dt.iri().to_string(),
        DataRange::OneOf(vs) => {
            let items: Vec<&str> = vs.iter().map(|v| v.lexical.as_str()).collect();
            format!("{{{}}}", items.join(", "))
        }
    }
}

/// Whether `n` of the nodes are pairwise distinct.
fn distinct_at_least(g: &Graph, nodes: &[usize], n: usize) -> bool {
    if nodes.len() < n {
        return false;
    }
    if n <= 1 {
        return nodes.len() >= n;
    }
    fn extend(g: &Graph, nodes: &[usize], chosen: &mut Vec<usize>, from: usize, n: usize) -> bool {
        if chosen.len() == n {
            return true;
        }
        for k in from..nodes.len() {
            if nodes.len() - k < n - chosen.len() {
                return false;
            }
            if chosen.iter().all(|&c| g.neq(c, nodes[k]).is_some()) {
                chosen.push(nodes[k]);
                if extend(g, nodes, chosen, k + 1, n) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    extend(g, nodes, &mut Vec::new(), 0, n)
}
