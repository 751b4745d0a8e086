//! Seeded generators of small random models and large synthetic ones, used
//! for cross-checking the reasoners and for timing the translator.

use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::loader::parse_model;
use crate::model::UmlModel;
use crate::owl::{emit, EmitOptions};

/// Size limits of a random model.
#[derive(Debug, Clone, Copy)]
pub struct CorpusBounds {
    pub classes: usize,
    pub associations: usize,
    pub objects: usize,
    pub constraints: usize,
}

impl Default for CorpusBounds {
    fn default() -> Self {
        CorpusBounds { classes: 4, associations: 2, objects: 3, constraints: 1 }
    }
}

struct Assoc {
    name: String,
    domain: usize,
    range: usize,
    nonunique: bool,
    ordered: bool,
}

/// DSL text of a random model; not necessarily valid.
pub fn random_model_text(rng: &mut StdRng, bounds: &CorpusBounds) -> String {
    let mut out = String::new();
    let nc = rng.gen_range(1..=bounds.classes.max(1));
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); nc];
    let with_enum = rng.gen_bool(0.3);
    if with_enum {
        out.push_str("enum Kind { red, green }\n");
    }
    for i in 0..nc {
        if i > 0 && rng.gen_bool(0.35) {
            parents[i].push(rng.gen_range(0..i));
            if i > 1 && rng.gen_bool(0.15) {
                let other = rng.gen_range(0..i);
                if !parents[i].contains(&other) {
                    parents[i].push(other);
                }
            }
        }
        let sups: Vec<String> = parents[i].iter().map(|p| format!("C{p}")).collect();
        if sups.is_empty() {
            let _ = writeln!(out, "class C{i}");
        } else {
            let _ = writeln!(out, "class C{i} extends {}", sups.join(", "));
        }
    }
    let ancestors = |c: usize| -> Vec<usize> {
        let mut seen = vec![c];
        let mut k = 0;
        while k < seen.len() {
            for &p in &parents[seen[k]] {
                if !seen.contains(&p) {
                    seen.push(p);
                }
            }
            k += 1;
        }
        seen
    };
    let mut attrs: Vec<(usize, &str, &str)> = Vec::new();
    for i in 0..nc {
        if rng.gen_bool(0.25) {
            attrs.push((i, "flag", "Boolean"));
        } else if with_enum && rng.gen_bool(0.3) {
            attrs.push((i, "kind", "Kind"));
        }
    }
    for (c, n, t) in &attrs {
        let _ = writeln!(out, "attr C{c}.{n} : {t}");
    }

    let na = rng.gen_range(0..=bounds.associations);
    let mut assocs: Vec<Assoc> = Vec::new();
    for k in 0..na {
        let (domain, range) = (rng.gen_range(0..nc), rng.gen_range(0..nc));
        let min = rng.gen_range(0..=2u64);
        let max = if rng.gen_bool(0.4) { None } else { Some(min.max(1) + rng.gen_range(0..=1)) };
        let mult = match max {
            Some(m) => format!("[{min}..{m}]"),
            None => format!("[{min}..*]"),
        };
        let nonunique = rng.gen_bool(0.2);
        let ordered = !nonunique && rng.gen_bool(0.15);
        let composite = !nonunique && rng.gen_bool(0.2);
        let mut line = format!("assoc p{k} C{domain} -> C{range} {mult}");
        if nonunique {
            line.push_str(" nonunique");
        }
        if ordered {
            line.push_str(" ordered");
        }
        if composite {
            line.push_str(" composite");
        }
        if k == 1 && !nonunique {
            let first = &assocs[0];
            if !first.nonunique && rng.gen_bool(0.3) {
                if ancestors(domain).contains(&first.domain) && ancestors(range).contains(&first.range) {
                    line.push_str(" subsets p0");
                } else if domain == first.range && range == first.domain {
                    line.push_str(" inverse p0");
                }
            }
        }
        let _ = writeln!(out, "{line}");
        assocs.push(Assoc { name: format!("p{k}"), domain, range, nonunique, ordered });
    }

    let no = rng.gen_range(0..=bounds.objects);
    let classes_of: Vec<usize> = (0..no).map(|_| rng.gen_range(0..nc)).collect();
    for (i, c) in classes_of.iter().enumerate() {
        let _ = writeln!(out, "object o{i} : C{c}");
    }
    for a in &assocs {
        let sources: Vec<usize> = (0..no).filter(|&o| ancestors(classes_of[o]).contains(&a.domain)).collect();
        let targets: Vec<usize> = (0..no).filter(|&o| ancestors(classes_of[o]).contains(&a.range)).collect();
        if sources.is_empty() || targets.is_empty() {
            continue;
        }
        let mut next_index = vec![1u64; no];
        for _ in 0..rng.gen_range(0..=3) {
            let s = *sources.choose(rng).expect("nonempty");
            let t = *targets.choose(rng).expect("nonempty");
            if a.ordered {
                let _ = writeln!(out, "link {} o{s} -> o{t} @{}", a.name, next_index[s]);
                next_index[s] += 1;
            } else {
                let _ = writeln!(out, "link {} o{s} -> o{t}", a.name);
            }
        }
        if !a.nonunique && rng.gen_bool(0.15) {
            let s = *sources.choose(rng).expect("nonempty");
            let t = *targets.choose(rng).expect("nonempty");
            let _ = writeln!(out, "nolink {} o{s} -> o{t}", a.name);
        }
    }

    let mut states: Vec<(usize, String)> = Vec::new();
    for c in 0..nc {
        if !rng.gen_bool(0.2) {
            continue;
        }
        let _ = writeln!(out, "statechart C{c} {{");
        let _ = writeln!(out, "  state S{c}a");
        states.push((c, format!("S{c}a")));
        if rng.gen_bool(0.4) {
            let _ = writeln!(out, "  state S{c}b orthogonal");
            let _ = writeln!(out, "  state S{c}x in S{c}b/r1");
            let _ = writeln!(out, "  state S{c}y in S{c}b/r2");
            states.push((c, format!("S{c}x")));
        } else {
            let _ = writeln!(out, "  state S{c}b");
            let _ = writeln!(out, "  state S{c}c in S{c}b");
            states.push((c, format!("S{c}c")));
        }
        out.push_str("}\n");
    }

    for n in 0..bounds.constraints {
        if !rng.gen_bool(0.6) {
            continue;
        }
        let (class, context) = if !states.is_empty() && rng.gen_bool(0.4) {
            let (c, s) = states.choose(rng).expect("nonempty").clone();
            (c, format!("C{c}.{s}"))
        } else {
            let c = rng.gen_range(0..nc);
            (c, format!("C{c}"))
        };
        let visible: Vec<&Assoc> = assocs.iter().filter(|a| ancestors(class).contains(&a.domain)).collect();
        let own_attrs: Vec<&(usize, &str, &str)> = attrs.iter().filter(|a| ancestors(class).contains(&a.0)).collect();
        let cond = |rng: &mut StdRng| -> Option<String> {
            let pick = rng.gen_range(0..4);
            if pick < 2 && !visible.is_empty() {
                let a = visible.choose(rng).expect("nonempty");
                let op = ["=", "<>", "<", "<=", ">", ">="].choose(rng).expect("nonempty");
                let v = rng.gen_range(0..=2);
                let v = if *op == "<" { v.max(1) } else { v };
                return Some(match rng.gen_range(0..4) {
                    0 => format!("self.{}->isEmpty()", a.name),
                    1 => format!("self.{}->notEmpty()", a.name),
                    _ => format!("self.{}->size() {op} {v}", a.name),
                });
            }
            if pick == 2 && !own_attrs.is_empty() {
                let (_, n, t) = own_attrs.choose(rng).expect("nonempty");
                let lit = if *t == "Boolean" { ["true", "false"].choose(rng).expect("nonempty") } else { ["red", "green"].choose(rng).expect("nonempty") };
                let op = if rng.gen_bool(0.7) { "=" } else { "<>" };
                return Some(format!("self.{n} {op} {lit}"));
            }
            if pick == 3 && !visible.is_empty() {
                let a = visible.choose(rng).expect("nonempty");
                if let Some((_, n, t)) = attrs.iter().find(|x| ancestors(a.range).contains(&x.0)) {
                    let lit = if *t == "Boolean" { "true" } else { "red" };
                    return Some(format!("self.{}.{n} = {lit}", a.name));
                }
                if a.domain == a.range && !a.nonunique && !context.contains('.') {
                    return Some(format!("self.{0}->excludes(self.{0})", a.name));
                }
            }
            None
        };
        let Some(first) = cond(rng) else { continue };
        let body = match (rng.gen_range(0..3), cond(rng)) {
            (0, Some(second)) if !second.contains("excludes") && !first.contains("excludes") => format!("{first} and {second}"),
            (1, Some(second)) if !second.contains("excludes") && !first.contains("excludes") => format!("{first} or {second}"),
            _ => first,
        };
        let _ = writeln!(out, "inv i{n} context {context} : {body}");
    }
    out
}

/// A random model that loads and translates, retrying until one does.
pub fn random_model(rng: &mut StdRng, bounds: &CorpusBounds) -> (String, UmlModel) {
    loop {
        let text = random_model_text(rng, bounds);
        if let Ok(loaded) = parse_model(&text) {
            if emit(&loaded.model, EmitOptions::default()).is_ok() {
                return (text, loaded.model);
            }
        }
    }
}

/// `count` random models from a fixed seed.
pub fn random_corpus(seed: u64, count: usize, bounds: &CorpusBounds) -> Vec<(String, UmlModel)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_model(&mut rng, bounds)).collect()
}

/// A model of roughly `elements` census elements: class chains with
/// generalizations, one association per class pair and a few objects.
pub fn synthetic_model_text(elements: usize) -> String {
    let mut out = String::new();
    let mut count = 0;
    let mut i = 0;
    while count < elements {
        let _ = writeln!(out, "class K{i}");
        count += 1;
        if i % 4 == 3 && count + 2 <= elements {
            let _ = writeln!(out, "class K{i}s extends K{i}");
            count += 2;
        }
        if i > 0 && count < elements {
            let _ = writeln!(out, "assoc r{i} K{i} -> K{} [0..{}]", i - 1, 1 + i % 3);
            count += 1;
        }
        if count < elements {
            let _ = writeln!(out, "object k{i} : K{i}");
            count += 1;
        }
        if i > 0 && count < elements {
            let _ = writeln!(out, "link r{i} k{i} -> k{}", i - 1);
            count += 1;
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::count_elements;

    #[test]
    fn corpus_respects_bounds() {
        for (_, m) in random_corpus(7, 60, &CorpusBounds::default()) {
            assert!(m.classes.len() <= 4);
            assert!(m.associations.len() <= 2);
            assert!(m.objects.len() <= 3);
            assert!(m.constraints.len() <= 1);
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = random_corpus(3, 5, &CorpusBounds::default());
        let b = random_corpus(3, 5, &CorpusBounds::default());
        assert_eq!(a.iter().map(|x| &x.0).collect::<Vec<_>>(), b.iter().map(|x| &x.0).collect::<Vec<_>>());
    }

    #[test]
    fn synthetic_sizes() {
        for n in [10, 100, 1000] {
            let m = parse_model(&synthetic_model_text(n)).unwrap().model;
            let total = count_elements(&m).total;
            assert!(total >= n && total <= n + 2, "{n} -> {total}");
        }
    }
}
