//! Bounded model finder. Interpretations are searched by grounding the axiom
//! set over a finite domain into propositional clauses; every model the SAT
//! solver returns is decoded and re-checked against the set-theoretic
//! semantics in [`satisfies`] before it is reported.
//!
//! Failing to find a model is never a proof of unsatisfiability.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use thiserror::Error;
use varisat::{ExtendFormula, Lit, Solver};

use crate::owl::*;

pub type Element = usize;

/// A finite structure over the domain `0..domain_size`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub domain_size: usize,
    pub concept_ext: BTreeMap<String, BTreeSet<Element>>,
    pub role_ext: BTreeMap<String, BTreeSet<(Element, Element)>>,
    pub individual_map: BTreeMap<String, Element>,
    /// At most one value per element and data property.
    pub data_atoms: BTreeMap<(Element, String), DataValue>,
}

impl Interpretation {
    pub fn domain(&self) -> BTreeSet<Element> {
        (0..self.domain_size).collect()
    }

    fn role(&self, r: &str) -> impl Iterator<Item = (Element, Element)> + '_ {
        self.role_ext.get(r).into_iter().flatten().copied()
    }

    fn successors(&self, r: &str, e: Element) -> usize {
        self.role(r).filter(|&(x, _)| x == e).count()
    }

    fn has_pair(&self, r: &str, x: Element, y: Element) -> bool {
        self.role_ext.get(r).is_some_and(|s| s.contains(&(x, y)))
    }

    fn value(&self, e: Element, p: &str) -> Option<&DataValue> {
        self.data_atoms.get(&(e, p.to_string()))
    }
}

/// Extension of a concept, computed directly from the constructor semantics.
pub fn eval_concept(i: &Interpretation, c: &ConceptExpr) -> BTreeSet<Element> {
    let all = i.domain();
    match c {
        ConceptExpr::Atomic(a) => i.concept_ext.get(a).cloned().unwrap_or_default(),
        ConceptExpr::Top => all,
        ConceptExpr::Bottom => BTreeSet::new(),
        ConceptExpr::Not(inner) => all.difference(&eval_concept(i, inner)).copied().collect(),
        ConceptExpr::And(cs) => cs.iter().fold(all, |acc, c| acc.intersection(&eval_concept(i, c)).copied().collect()),
        ConceptExpr::Or(cs) => cs.iter().fold(BTreeSet::new(), |acc, c| acc.union(&eval_concept(i, c)).copied().collect()),
        ConceptExpr::MinCard(n, r) => all.into_iter().filter(|&e| i.successors(r, e) as u64 >= *n).collect(),
        ConceptExpr::MaxCard(n, r) => all.into_iter().filter(|&e| i.successors(r, e) as u64 <= *n).collect(),
        ConceptExpr::ExactCard(n, r) => all.into_iter().filter(|&e| i.successors(r, e) as u64 == *n).collect(),
        ConceptExpr::SomeValuesFrom(r, inner) => {
            let fill = eval_concept(i, inner);
            i.role(r).filter(|(_, y)| fill.contains(y)).map(|(x, _)| x).collect()
        }
        ConceptExpr::DataHasValue(p, v) => all.into_iter().filter(|&e| i.value(e, p) == Some(v)).collect(),
        ConceptExpr::DataExactCard(n, p) => {
            all.into_iter().filter(|&e| i.value(e, p).is_some() as u64 == *n).collect()
        }
    }
}

/// Truth of one axiom in `i`. Individuals missing from the map make
/// assertions about them false.
pub fn satisfies(i: &Interpretation, ax: &Axiom) -> bool {
    let ind = |a: &String| i.individual_map.get(a).copied();
    match ax {
        Axiom::DeclClass(_) | Axiom::DeclObjProp(_) | Axiom::DeclDataProp(_) => true,
        Axiom::DeclIndividual(a) => ind(a).is_some(),
        Axiom::SubClassOf(a, b) => eval_concept(i, a).is_subset(&eval_concept(i, b)),
        Axiom::EquivalentClasses(cs) => {
            let exts: Vec<_> = cs.iter().map(|c| eval_concept(i, c)).collect();
            exts.windows(2).all(|w| w[0] == w[1])
        }
        Axiom::DisjointClasses(cs) => {
            let exts: Vec<_> = cs.iter().map(|c| eval_concept(i, c)).collect();
            (0..exts.len()).all(|a| (a + 1..exts.len()).all(|b| exts[a].is_disjoint(&exts[b])))
        }
        Axiom::ObjPropDomain(r, c) => {
            let ext = eval_concept(i, c);
            i.role(r).all(|(x, _)| ext.contains(&x))
        }
        Axiom::ObjPropRange(r, c) => {
            let ext = eval_concept(i, c);
            i.role(r).all(|(_, y)| ext.contains(&y))
        }
        Axiom::SubObjPropOf(a, b) => i.role(a).all(|(x, y)| i.has_pair(b, x, y)),
        Axiom::InverseObjProps(a, b) => {
            i.role(a).all(|(x, y)| i.has_pair(b, y, x)) && i.role(b).all(|(x, y)| i.has_pair(a, y, x))
        }
        Axiom::FunctionalObjProp(r) => (0..i.domain_size).all(|e| i.successors(r, e) <= 1),
        Axiom::InverseFunctionalObjProp(r) => {
            (0..i.domain_size).all(|e| i.role(r).filter(|&(_, y)| y == e).count() <= 1)
        }
        Axiom::IrreflexiveObjProp(r) => i.role(r).all(|(x, y)| x != y),
        Axiom::DataPropDomain(p, c) => {
            let ext = eval_concept(i, c);
            i.data_atoms.keys().filter(|(_, q)| q == p).all(|(e, _)| ext.contains(e))
        }
        Axiom::DataPropRange(p, range) => i.data_atoms.iter().filter(|((_, q), _)| q == p).all(|(_, v)| range.contains(v)),
        Axiom::ClassAssertion(c, a) => ind(a).is_some_and(|e| eval_concept(i, c).contains(&e)),
        Axiom::ObjPropAssertion(r, a, b) => match (ind(a), ind(b)) {
            (Some(x), Some(y)) => i.has_pair(r, x, y),
            _ => false,
        },
        Axiom::NegObjPropAssertion(r, a, b) => match (ind(a), ind(b)) {
            (Some(x), Some(y)) => !i.has_pair(r, x, y),
            _ => false,
        },
        Axiom::DataPropAssertion(p, a, v) => ind(a).is_some_and(|e| i.value(e, p) == Some(v)),
        Axiom::SameIndividual(is) => {
            let es: Option<BTreeSet<_>> = is.iter().map(ind).collect();
            es.is_some_and(|s| s.len() <= 1)
        }
        Axiom::DifferentIndividuals(is) => {
            let es: Option<Vec<_>> = is.iter().map(ind).collect();
            es.is_some_and(|v| v.iter().collect::<BTreeSet<_>>().len() == v.len())
        }
    }
}

/// Truth of a rule, with variables ranging over named elements only.
pub fn satisfies_rule(i: &Interpretation, rule: &DlSafeRule) -> bool {
    let named: BTreeSet<Element> = i.individual_map.values().copied().collect();
    let mut vars: Vec<&str> = Vec::new();
    for a in rule.body.iter().chain(std::iter::once(&rule.head)) {
        for v in [a.subject.as_str(), a.object.as_str()] {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    let named: Vec<Element> = named.into_iter().collect();
    let mut assign = vec![0usize; vars.len()];
    let holds = |assign: &[usize], atom: &RoleAtom| {
        let pos = |v: &str| vars.iter().position(|x| *x == v).map(|k| named[assign[k]]);
        match (pos(&atom.subject), pos(&atom.object)) {
            (Some(x), Some(y)) => i.has_pair(&atom.role, x, y),
            _ => false,
        }
    };
    if named.is_empty() {
        return true;
    }
    loop {
        if rule.body.iter().all(|a| holds(&assign, a)) && !holds(&assign, &rule.head) {
            return false;
        }
        // next assignment
        let mut k = 0;
        loop {
            if k == assign.len() {
                return true;
            }
            assign[k] += 1;
            if assign[k] < named.len() {
                break;
            }
            assign[k] = 0;
            k += 1;
        }
    }
}

/// All axioms and rules hold.
pub fn is_model(i: &Interpretation, ax: &AxiomSet) -> Result<(), String> {
    for a in &ax.axioms {
        if !satisfies(i, a) {
            return Err(format!("{a:?}"));
        }
    }
    for r in &ax.rules {
        if !satisfies_rule(i, r) {
            return Err(format!("{r:?}"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBound {
    pub max_domain_size: usize,
    /// Unmentioned values made available to each data property.
    pub max_data_values_per_prop: usize,
    pub timeout: Option<Duration>,
}

impl Default for SearchBound {
    fn default() -> Self {
        SearchBound { max_domain_size: 4, max_data_values_per_prop: 3, timeout: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Search {
    Model(Interpretation),
    NoModelUpTo(usize),
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("decoded structure violates {0}")]
    Verification(String),
    #[error("SAT solver failure: {0}")]
    Solver(String),
    #[error("unknown concept {0}")]
    UnknownConcept(String),
}

/// Searches for a model with at most `bound.max_domain_size` elements, or
/// as many as there are named individuals if that is larger.
pub fn find_model(ax: &AxiomSet, bound: &SearchBound) -> Result<Search, OracleError> {
    search(ax, None, bound)
}

/// Like [`find_model`] with the extra requirement that `concept` is nonempty.
pub fn concept_satisfiable_bounded(ax: &AxiomSet, concept: &str, bound: &SearchBound) -> Result<Search, OracleError> {
    if !ax.signature().get(&NameKind::Class).is_some_and(|s| s.contains(concept)) {
        return Err(OracleError::UnknownConcept(concept.to_string()));
    }
    search(ax, Some(&ConceptExpr::atom(concept)), bound)
}

fn individuals(ax: &AxiomSet) -> Vec<String> {
    ax.signature().get(&NameKind::Individual).map(|s| s.iter().cloned().collect()).unwrap_or_default()
}

fn search(ax: &AxiomSet, nonempty: Option<&ConceptExpr>, bound: &SearchBound) -> Result<Search, OracleError> {
    let start = Instant::now();
    let inds = individuals(ax);
    let lo = inds.len().max(1);
    let hi = bound.max_domain_size.max(lo);
    for size in lo..=hi {
        if let Some(t) = bound.timeout {
            if start.elapsed() > t {
                return Ok(Search::TimedOut);
            }
        }
        if let Some(i) = Grounding::solve(ax, nonempty, size, &inds, bound)? {
            is_model(&i, ax).map_err(OracleError::Verification)?;
            if let Some(c) = nonempty {
                if eval_concept(&i, c).is_empty() {
                    return Err(OracleError::Verification(format!("{c:?} is empty")));
                }
            }
            return Ok(Search::Model(i));
        }
    }
    Ok(Search::NoModelUpTo(hi))
}

struct Grounding<'s> {
    solver: Solver<'s>,
    n: usize,
    truth: Lit,
    atoms: HashMap<(String, Element), Lit>,
    roles: HashMap<(String, Element, Element), Lit>,
    cache: HashMap<(ConceptExpr, Element), Lit>,
    /// Value tokens of each data property.
    tokens: BTreeMap<String, Vec<DataValue>>,
    data: HashMap<(String, Element, usize), Lit>,
    ind: HashMap<(String, Element), Lit>,
}

impl<'s> Grounding<'s> {
    fn fresh(&mut self) -> Lit {
        self.solver.new_var().positive()
    }

    fn clause(&mut self, c: &[Lit]) {
        self.solver.add_clause(c);
    }

    fn atom(&mut self, a: &str, e: Element) -> Lit {
        if let Some(&l) = self.atoms.get(&(a.to_string(), e)) {
            return l;
        }
        let l = self.fresh();
        self.atoms.insert((a.to_string(), e), l);
        l
    }

    fn role(&mut self, r: &str, x: Element, y: Element) -> Lit {
        if let Some(&l) = self.roles.get(&(r.to_string(), x, y)) {
            return l;
        }
        let l = self.fresh();
        self.roles.insert((r.to_string(), x, y), l);
        l
    }

    fn token_index(&self, p: &str, v: &DataValue) -> Option<usize> {
        self.tokens.get(p).and_then(|ts| ts.iter().position(|t| t == v))
    }

    fn data(&mut self, p: &str, e: Element, t: usize) -> Lit {
        if let Some(&l) = self.data.get(&(p.to_string(), e, t)) {
            return l;
        }
        let l = self.fresh();
        self.data.insert((p.to_string(), e, t), l);
        l
    }

    fn data_lits(&mut self, p: &str, e: Element) -> Vec<Lit> {
        let k = self.tokens.get(p).map_or(0, Vec::len);
        (0..k).map(|t| self.data(p, e, t)).collect()
    }

    /// Literal equivalent to "at least `k` of `lits` hold".
    fn at_least(&mut self, k: u64, lits: &[Lit]) -> Lit {
        if k == 0 {
            return self.truth;
        }
        if k as usize > lits.len() {
            return !self.truth;
        }
        // Sequential counter with full equivalence: s[i][j] <-> at least j of
        // the first i literals.
        let k = k as usize;
        let mut prev: Vec<Lit> = vec![self.truth];
        prev.extend((0..k).map(|_| !self.truth));
        for &x in lits {
            let mut cur = vec![self.truth];
            for j in 1..=k {
                let s = self.fresh();
                let (keep, add) = (prev[j], prev[j - 1]);
                // s <-> keep | (add & x)
                self.clause(&[!keep, s]);
                self.clause(&[!add, !x, s]);
                self.clause(&[!s, keep, add]);
                self.clause(&[!s, keep, x]);
                cur.push(s);
            }
            prev = cur;
        }
        prev[k]
    }

    fn and_of(&mut self, parts: &[Lit]) -> Lit {
        let v = self.fresh();
        let mut back = vec![v];
        for &p in parts {
            self.clause(&[!v, p]);
            back.push(!p);
        }
        self.clause(&back);
        v
    }

    fn or_of(&mut self, parts: &[Lit]) -> Lit {
        let v = self.fresh();
        let mut fwd = vec![!v];
        for &p in parts {
            self.clause(&[!p, v]);
            fwd.push(p);
        }
        self.clause(&fwd);
        v
    }

    fn concept(&mut self, c: &ConceptExpr, e: Element) -> Lit {
        if let Some(&l) = self.cache.get(&(c.clone(), e)) {
            return l;
        }
        let n = self.n;
        let l = match c {
            ConceptExpr::Atomic(a) => self.atom(a, e),
            ConceptExpr::Top => self.truth,
            ConceptExpr::Bottom => !self.truth,
            ConceptExpr::Not(inner) => !self.concept(inner, e),
            ConceptExpr::And(cs) => {
                let parts: Vec<Lit> = cs.iter().map(|c| self.concept(c, e)).collect();
                self.and_of(&parts)
            }
            ConceptExpr::Or(cs) => {
                let parts: Vec<Lit> = cs.iter().map(|c| self.concept(c, e)).collect();
                self.or_of(&parts)
            }
            ConceptExpr::MinCard(k, r) => {
                let succ: Vec<Lit> = (0..n).map(|f| self.role(r, e, f)).collect();
                self.at_least(*k, &succ)
            }
            ConceptExpr::MaxCard(k, r) => {
                let succ: Vec<Lit> = (0..n).map(|f| self.role(r, e, f)).collect();
                !self.at_least(k + 1, &succ)
            }
            ConceptExpr::ExactCard(k, r) => {
                let succ: Vec<Lit> = (0..n).map(|f| self.role(r, e, f)).collect();
                let lo = self.at_least(*k, &succ);
                let hi = self.at_least(k + 1, &succ);
                self.and_of(&[lo, !hi])
            }
            ConceptExpr::SomeValuesFrom(r, inner) => {
                let mut parts = Vec::new();
                for f in 0..n {
                    let edge = self.role(r, e, f);
                    let fill = self.concept(inner, f);
                    parts.push(self.and_of(&[edge, fill]));
                }
                self.or_of(&parts)
            }
            ConceptExpr::DataHasValue(p, v) => match self.token_index(p, v) {
                Some(t) => self.data(p, e, t),
                None => !self.truth,
            },
            ConceptExpr::DataExactCard(k, p) => {
                let lits = self.data_lits(p, e);
                match k {
                    0 => {
                        let any = self.or_of(&lits);
                        !any
                    }
                    1 => self.or_of(&lits),
                    _ => !self.truth,
                }
            }
        };
        self.cache.insert((c.clone(), e), l);
        l
    }

    fn individual(&mut self, a: &str, e: Element) -> Lit {
        *self.ind.get(&(a.to_string(), e)).unwrap_or(&!self.truth)
    }

    fn solve(
        ax: &AxiomSet,
        nonempty: Option<&ConceptExpr>,
        n: usize,
        inds: &[String],
        bound: &SearchBound,
    ) -> Result<Option<Interpretation>, OracleError> {
        let mut solver = Solver::new();
        let truth = solver.new_var().positive();
        solver.add_clause(&[truth]);
        let mut g = Grounding {
            solver,
            n,
            truth,
            atoms: HashMap::new(),
            roles: HashMap::new(),
            cache: HashMap::new(),
            tokens: data_tokens(ax, bound.max_data_values_per_prop),
            data: HashMap::new(),
            ind: HashMap::new(),
        };

        // Individuals: each maps to exactly one element; the k-th may only
        // use elements 0..=k, which loses no models up to renaming.
        for (k, a) in inds.iter().enumerate() {
            let mut options = Vec::new();
            for e in 0..n.min(k + 1) {
                let l = g.fresh();
                g.ind.insert((a.clone(), e), l);
                options.push(l);
            }
            g.clause(&options);
            for x in 0..options.len() {
                for y in x + 1..options.len() {
                    g.clause(&[!options[x], !options[y]]);
                }
            }
        }
        // One value per element and data property.
        let props: Vec<String> = g.tokens.keys().cloned().collect();
        for p in &props {
            for e in 0..n {
                let lits = g.data_lits(p, e);
                for x in 0..lits.len() {
                    for y in x + 1..lits.len() {
                        g.clause(&[!lits[x], !lits[y]]);
                    }
                }
            }
        }

        for a in &ax.axioms {
            g.axiom(a);
        }
        for r in &ax.rules {
            g.rule(r, inds);
        }
        if let Some(c) = nonempty {
            let somewhere: Vec<Lit> = (0..n).map(|e| g.concept(c, e)).collect();
            g.clause(&somewhere);
        }

        let sat = g.solver.solve().map_err(|e| OracleError::Solver(e.to_string()))?;
        if !sat {
            return Ok(None);
        }
        let model: BTreeSet<Lit> = g.solver.model().unwrap_or_default().into_iter().collect();
        let holds = |l: &Lit| model.contains(l);
        let mut i = Interpretation { domain_size: n, ..Default::default() };
        for ((a, e), l) in &g.atoms {
            if holds(l) {
                i.concept_ext.entry(a.clone()).or_default().insert(*e);
            }
        }
        for ((r, x, y), l) in &g.roles {
            if holds(l) {
                i.role_ext.entry(r.clone()).or_default().insert((*x, *y));
            }
        }
        for ((a, e), l) in &g.ind {
            if holds(l) {
                i.individual_map.insert(a.clone(), *e);
            }
        }
        for ((p, e, t), l) in &g.data {
            if holds(l) {
                i.data_atoms.insert((*e, p.clone()), g.tokens[p][*t].clone());
            }
        }
        Ok(Some(i))
    }

    fn axiom(&mut self, ax: &Axiom) {
        let n = self.n;
        match ax {
            Axiom::DeclClass(_) | Axiom::DeclObjProp(_) | Axiom::DeclDataProp(_) | Axiom::DeclIndividual(_) => {}
            Axiom::SubClassOf(a, b) => {
                for e in 0..n {
                    let (x, y) = (self.concept(a, e), self.concept(b, e));
                    self.clause(&[!x, y]);
                }
            }
            Axiom::EquivalentClasses(cs) => {
                for e in 0..n {
                    let lits: Vec<Lit> = cs.iter().map(|c| self.concept(c, e)).collect();
                    for w in lits.windows(2) {
                        self.clause(&[!w[0], w[1]]);
                        self.clause(&[w[0], !w[1]]);
                    }
                }
            }
            Axiom::DisjointClasses(cs) => {
                for e in 0..n {
                    let lits: Vec<Lit> = cs.iter().map(|c| self.concept(c, e)).collect();
                    for x in 0..lits.len() {
                        for y in x + 1..lits.len() {
                            self.clause(&[!lits[x], !lits[y]]);
                        }
                    }
                }
            }
            Axiom::ObjPropDomain(r, c) | Axiom::ObjPropRange(r, c) => {
                let domain = matches!(ax, Axiom::ObjPropDomain(..));
                for x in 0..n {
                    for y in 0..n {
                        let edge = self.role(r, x, y);
                        let m = self.concept(c, if domain { x } else { y });
                        self.clause(&[!edge, m]);
                    }
                }
            }
            Axiom::SubObjPropOf(a, b) => {
                for x in 0..n {
                    for y in 0..n {
                        let (p, q) = (self.role(a, x, y), self.role(b, x, y));
                        self.clause(&[!p, q]);
                    }
                }
            }
            Axiom::InverseObjProps(a, b) => {
                for x in 0..n {
                    for y in 0..n {
                        let (p, q) = (self.role(a, x, y), self.role(b, y, x));
                        self.clause(&[!p, q]);
                        self.clause(&[p, !q]);
                    }
                }
            }
            Axiom::FunctionalObjProp(r) | Axiom::InverseFunctionalObjProp(r) => {
                let forward = matches!(ax, Axiom::FunctionalObjProp(_));
                for x in 0..n {
                    let lits: Vec<Lit> =
                        (0..n).map(|y| if forward { self.role(r, x, y) } else { self.role(r, y, x) }).collect();
                    for a in 0..n {
                        for b in a + 1..n {
                            self.clause(&[!lits[a], !lits[b]]);
                        }
                    }
                }
            }
            Axiom::IrreflexiveObjProp(r) => {
                for x in 0..n {
                    let l = self.role(r, x, x);
                    self.clause(&[!l]);
                }
            }
            Axiom::DataPropDomain(p, c) => {
                for e in 0..n {
                    let m = self.concept(c, e);
                    for l in self.data_lits(p, e) {
                        self.clause(&[!l, m]);
                    }
                }
            }
            Axiom::DataPropRange(p, range) => {
                let outside: Vec<usize> = self
                    .tokens
                    .get(p)
                    .map(|ts| ts.iter().enumerate().filter(|(_, v)| !range.contains(v)).map(|(k, _)| k).collect())
                    .unwrap_or_default();
                for e in 0..n {
                    for &t in &outside {
                        let l = self.data(p, e, t);
                        self.clause(&[!l]);
                    }
                }
            }
            Axiom::ClassAssertion(c, a) => {
                for e in 0..n {
                    let (m, x) = (self.individual(a, e), self.concept(c, e));
                    self.clause(&[!m, x]);
                }
            }
            Axiom::ObjPropAssertion(r, a, b) | Axiom::NegObjPropAssertion(r, a, b) => {
                let positive = matches!(ax, Axiom::ObjPropAssertion(..));
                for x in 0..n {
                    for y in 0..n {
                        let (ma, mb, edge) = (self.individual(a, x), self.individual(b, y), self.role(r, x, y));
                        self.clause(&[!ma, !mb, if positive { edge } else { !edge }]);
                    }
                }
            }
            Axiom::DataPropAssertion(p, a, v) => {
                for e in 0..n {
                    let m = self.individual(a, e);
                    let has = self.concept(&ConceptExpr::DataHasValue(p.clone(), v.clone()), e);
                    self.clause(&[!m, has]);
                }
            }
            Axiom::SameIndividual(is) => {
                for w in is.windows(2) {
                    for e in 0..n {
                        let (x, y) = (self.individual(&w[0], e), self.individual(&w[1], e));
                        self.clause(&[!x, y]);
                        self.clause(&[x, !y]);
                    }
                }
            }
            Axiom::DifferentIndividuals(is) => {
                for a in 0..is.len() {
                    for b in a + 1..is.len() {
                        for e in 0..n {
                            let (x, y) = (self.individual(&is[a], e), self.individual(&is[b], e));
                            self.clause(&[!x, !y]);
                        }
                    }
                }
            }
        }
    }

    fn rule(&mut self, rule: &DlSafeRule, inds: &[String]) {
        let n = self.n;
        let named: Vec<Lit> = (0..n)
            .map(|e| {
                let ms: Vec<Lit> = inds.iter().map(|a| self.individual(a, e)).collect();
                self.or_of(&ms)
            })
            .collect();
        let mut vars: Vec<&str> = Vec::new();
        for a in rule.body.iter().chain(std::iter::once(&rule.head)) {
            for v in [a.subject.as_str(), a.object.as_str()] {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        let mut assign = vec![0usize; vars.len()];
        loop {
            let at = |v: &str| assign[vars.iter().position(|x| *x == v).unwrap_or(0)];
            let mut clause: Vec<Lit> = assign.iter().map(|&e| !named[e]).collect();
            for atom in &rule.body {
                clause.push(!self.role(&atom.role, at(&atom.subject), at(&atom.object)));
            }
            clause.push(self.role(&rule.head.role, at(&rule.head.subject), at(&rule.head.object)));
            self.clause(&clause);
            let mut k = 0;
            loop {
                if k == assign.len() {
                    return;
                }
                assign[k] += 1;
                if assign[k] < n {
                    break;
                }
                assign[k] = 0;
                k += 1;
            }
        }
    }
}

/// Candidate values per data property: mentioned literals, finite range
/// members and `fresh` values distinct from every literal in the set.
fn data_tokens(ax: &AxiomSet, fresh: usize) -> BTreeMap<String, Vec<DataValue>> {
    let mut mentioned: BTreeMap<String, BTreeSet<DataValue>> = BTreeMap::new();
    let mut infinite: BTreeMap<String, Option<Datatype>> = BTreeMap::new();
    fn walk(c: &ConceptExpr, out: &mut BTreeMap<String, BTreeSet<DataValue>>) {
        match c {
            ConceptExpr::DataHasValue(p, v) => {
                out.entry(p.clone()).or_default().insert(v.clone());
            }
            ConceptExpr::DataExactCard(_, p) => {
                out.entry(p.clone()).or_default();
            }
            ConceptExpr::Not(c) | ConceptExpr::SomeValuesFrom(_, c) => walk(c, out),
            ConceptExpr::And(cs) | ConceptExpr::Or(cs) => cs.iter().for_each(|c| walk(c, out)),
            _ => {}
        }
    }
    for a in &ax.axioms {
        match a {
            Axiom::DeclDataProp(p) => {
                mentioned.entry(p.clone()).or_default();
            }
            Axiom::DataPropRange(p, DataRange::Datatype(dt)) if dt.is_infinite() => {
                infinite.entry(p.clone()).or_insert(Some(*dt));
            }
            Axiom::DataPropRange(p, range) => {
                if let Some(vs) = range.finite_values() {
                    mentioned.entry(p.clone()).or_default().extend(vs);
                }
            }
            Axiom::DataPropAssertion(p, _, v) => {
                mentioned.entry(p.clone()).or_default().insert(v.clone());
            }
            _ => {}
        }
        let mut cs = Vec::new();
        match a {
            Axiom::SubClassOf(x, y) => cs.extend([x, y]),
            Axiom::EquivalentClasses(v) | Axiom::DisjointClasses(v) => cs.extend(v.iter()),
            Axiom::ObjPropDomain(_, c) | Axiom::ObjPropRange(_, c) | Axiom::DataPropDomain(_, c) => cs.push(c),
            Axiom::ClassAssertion(c, _) => cs.push(c),
            _ => {}
        }
        for c in cs {
            walk(c, &mut mentioned);
        }
    }
    let has_finite_range: BTreeSet<&String> = ax
        .axioms
        .iter()
        .filter_map(|a| match a {
            Axiom::DataPropRange(p, r) if r.finite_values().is_some() => Some(p),
            _ => None,
        })
        .collect();
    mentioned
        .into_iter()
        .map(|(p, vs)| {
            let mut tokens: Vec<DataValue> = vs.into_iter().collect();
            if !has_finite_range.contains(&p) {
                let dt = infinite.get(&p).copied().flatten().unwrap_or(Datatype::String);
                for k in 0..fresh.max(1) {
                    tokens.push(DataValue { lexical: format!("\u{0}fresh{k}"), datatype: dt });
                }
            }
            (p, tokens)
        })
        .collect()
}

impl Datatype {
    fn is_infinite(self) -> bool {
        !matches!(self, Datatype::Boolean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_model;
    use crate::model::ElementRef;
    use crate::owl::{emit, EmitOptions};

    fn set(axioms: Vec<Axiom>) -> AxiomSet {
        let mut s = AxiomSet::new("t");
        for a in axioms {
            s.push(a, ElementRef::Model);
        }
        s
    }

    fn a(n: &str) -> ConceptExpr {
        ConceptExpr::atom(n)
    }

    fn structure() -> Interpretation {
        let mut i = Interpretation { domain_size: 3, ..Default::default() };
        i.concept_ext.insert("C".into(), [0, 1].into());
        i.role_ext.insert("R".into(), [(0, 1), (0, 2), (1, 2)].into());
        i
    }

    #[test]
    fn constructor_semantics() {
        let i = structure();
        assert_eq!(eval_concept(&i, &ConceptExpr::Top), [0, 1, 2].into());
        assert!(eval_concept(&i, &ConceptExpr::And(vec![a("C"), ConceptExpr::not(a("C"))])).is_empty());
        assert_eq!(eval_concept(&i, &ConceptExpr::MinCard(2, "R".into())), [0].into());
        assert_eq!(eval_concept(&i, &ConceptExpr::MaxCard(1, "R".into())), [1, 2].into());
        assert_eq!(eval_concept(&i, &ConceptExpr::ExactCard(0, "R".into())), [2].into());
        assert_eq!(eval_concept(&i, &ConceptExpr::SomeValuesFrom("R".into(), Box::new(a("C")))), [0].into());
    }

    #[test]
    fn axiom_truth() {
        let mut i = structure();
        assert!(satisfies(&i, &Axiom::SubClassOf(ConceptExpr::MinCard(2, "R".into()), a("C"))));
        assert!(!satisfies(&i, &Axiom::InverseFunctionalObjProp("R".into())));
        assert!(!satisfies(&i, &Axiom::FunctionalObjProp("R".into())));
        assert!(satisfies(&i, &Axiom::IrreflexiveObjProp("R".into())));
        i.role_ext.get_mut("R").unwrap().insert((2, 2));
        assert!(!satisfies(&i, &Axiom::IrreflexiveObjProp("R".into())));
    }

    #[test]
    fn empty_theory_has_singleton_model() {
        match find_model(&AxiomSet::default(), &SearchBound::default()).unwrap() {
            Search::Model(i) => assert_eq!(i.domain_size, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counting_needs_enough_elements() {
        let s = set(vec![Axiom::SubClassOf(ConceptExpr::Top, ConceptExpr::MinCard(3, "R".into()))]);
        match find_model(&s, &SearchBound::default()).unwrap() {
            Search::Model(i) => assert_eq!(i.domain_size, 3),
            other => panic!("{other:?}"),
        }
        let s = set(vec![
            Axiom::SubClassOf(a("C"), ConceptExpr::ExactCard(1, "R".into())),
            Axiom::SubClassOf(a("C"), ConceptExpr::ExactCard(0, "R".into())),
        ]);
        assert!(matches!(concept_satisfiable_bounded(&s, "C", &SearchBound::default()).unwrap(), Search::NoModelUpTo(4)));
    }

    #[test]
    fn self_link_on_irreflexive_role() {
        let m = parse_model(
            "class Person\nassoc hasParent Person -> Person\nobject X : Person\nlink hasParent X -> X\ninv noSelf context Person : self.hasParent->excludes(self.hasParent)",
        )
        .unwrap()
        .model;
        let ax = emit(&m, EmitOptions::default()).unwrap();
        assert_eq!(find_model(&ax, &SearchBound::default()).unwrap(), Search::NoModelUpTo(4));
    }

    #[test]
    fn data_values() {
        let m = parse_model("enum D { a, b }\nclass C\nattr C.d : D\nstatechart C { state S; state T }\ninv s context C.S : self.d = a\ninv t context C.T : self.d = c")
            .unwrap()
            .model;
        let ax = emit(&m, EmitOptions::default()).unwrap();
        assert!(matches!(concept_satisfiable_bounded(&ax, "S", &SearchBound::default()).unwrap(), Search::Model(_)));
        assert!(matches!(concept_satisfiable_bounded(&ax, "T", &SearchBound::default()).unwrap(), Search::NoModelUpTo(_)));
    }

    #[test]
    fn rule_over_named_elements_only() {
        let mut i = Interpretation { domain_size: 3, ..Default::default() };
        i.role_ext.insert("o".into(), [(0, 1), (1, 2)].into());
        i.individual_map.insert("a".into(), 0);
        i.individual_map.insert("b".into(), 1);
        let rule = DlSafeRule::transitivity("o");
        assert!(satisfies_rule(&i, &rule));
        i.individual_map.insert("c".into(), 2);
        assert!(!satisfies_rule(&i, &rule));
    }
}
