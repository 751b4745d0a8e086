//! OWL 2 functional-syntax writer.

use std::fmt::Write as _;

use super::axioms::*;

const PREFIXES: &[(&str, &str)] = &[
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("xml", "http://www.w3.org/XML/1998/namespace"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
    ("var", "urn:swrl:var#"),
];

fn name(n: &str) -> String {
    format!("m:{n}")
}

pub(crate) fn render_concept(c: &ConceptExpr) -> String {
    let mut s = String::new();
    write_concept(c, &mut s);
    s
}

fn write_concept(c: &ConceptExpr, out: &mut String) {
    match c {
        ConceptExpr::Atomic(a) => out.push_str(&name(a)),
        ConceptExpr::Top => out.push_str("owl:Thing"),
        ConceptExpr::Bottom => out.push_str("owl:Nothing"),
        ConceptExpr::Not(inner) => {
            out.push_str("ObjectComplementOf(");
            write_concept(inner, out);
            out.push(')');
        }
        ConceptExpr::And(cs) | ConceptExpr::Or(cs) => {
            out.push_str(if matches!(c, ConceptExpr::And(_)) { "ObjectIntersectionOf(" } else { "ObjectUnionOf(" });
            for (i, m) in cs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_concept(m, out);
            }
            out.push(')');
        }
        ConceptExpr::MinCard(n, r) => {
            let _ = write!(out, "ObjectMinCardinality({n} {})", name(r));
        }
        ConceptExpr::MaxCard(n, r) => {
            let _ = write!(out, "ObjectMaxCardinality({n} {})", name(r));
        }
        ConceptExpr::ExactCard(n, r) => {
            let _ = write!(out, "ObjectExactCardinality({n} {})", name(r));
        }
        ConceptExpr::SomeValuesFrom(r, inner) => {
            let _ = write!(out, "ObjectSomeValuesFrom({} ", name(r));
            write_concept(inner, out);
            out.push(')');
        }
        ConceptExpr::DataHasValue(p, v) => {
            let _ = write!(out, "DataHasValue({} {v})", name(p));
        }
        ConceptExpr::DataExactCard(n, p) => {
            let _ = write!(out, "DataExactCardinality({n} {})", name(p));
        }
    }
}

fn render_range(r: &DataRange) -> String {
    match r {
        DataRange::Datatype(dt) => dt.iri().to_string(),
        DataRange::OneOf(vs) => {
            let items: Vec<String> = vs.iter().map(ToString::to_string).collect();
            format!("DataOneOf({})", items.join(" "))
        }
    }
}

fn concepts(cs: &[ConceptExpr]) -> String {
    cs.iter().map(render_concept).collect::<Vec<_>>().join(" ")
}

fn individuals(is: &[String]) -> String {
    is.iter().map(|i| name(i)).collect::<Vec<_>>().join(" ")
}

pub(crate) fn render_axiom(ax: &Axiom) -> String {
    match ax {
        Axiom::DeclClass(n) => format!("Declaration(Class({}))", name(n)),
        Axiom::DeclObjProp(n) => format!("Declaration(ObjectProperty({}))", name(n)),
        Axiom::DeclDataProp(n) => format!("Declaration(DataProperty({}))", name(n)),
        Axiom::DeclIndividual(n) => format!("Declaration(NamedIndividual({}))", name(n)),
        Axiom::SubClassOf(a, b) => format!("SubClassOf({} {})", render_concept(a), render_concept(b)),
        Axiom::EquivalentClasses(cs) => format!("EquivalentClasses({})", concepts(cs)),
        Axiom::DisjointClasses(cs) => format!("DisjointClasses({})", concepts(cs)),
        Axiom::ObjPropDomain(r, c) => format!("ObjectPropertyDomain({} {})", name(r), render_concept(c)),
        Axiom::ObjPropRange(r, c) => format!("ObjectPropertyRange({} {})", name(r), render_concept(c)),
        Axiom::SubObjPropOf(a, b) => format!("SubObjectPropertyOf({} {})", name(a), name(b)),
        Axiom::InverseObjProps(a, b) => format!("InverseObjectProperties({} {})", name(a), name(b)),
        Axiom::FunctionalObjProp(r) => format!("FunctionalObjectProperty({})", name(r)),
        Axiom::InverseFunctionalObjProp(r) => format!("InverseFunctionalObjectProperty({})", name(r)),
        Axiom::IrreflexiveObjProp(r) => format!("IrreflexiveObjectProperty({})", name(r)),
        Axiom::DataPropDomain(p, c) => format!("DataPropertyDomain({} {})", name(p), render_concept(c)),
        Axiom::DataPropRange(p, r) => format!("DataPropertyRange({} {})", name(p), render_range(r)),
        Axiom::ClassAssertion(c, i) => format!("ClassAssertion({} {})", render_concept(c), name(i)),
        Axiom::ObjPropAssertion(r, a, b) => {
            format!("ObjectPropertyAssertion({} {} {})", name(r), name(a), name(b))
        }
        Axiom::NegObjPropAssertion(r, a, b) => {
            format!("NegativeObjectPropertyAssertion({} {} {})", name(r), name(a), name(b))
        }
        Axiom::DataPropAssertion(p, i, v) => format!("DataPropertyAssertion({} {} {v})", name(p), name(i)),
        Axiom::SameIndividual(is) => format!("SameIndividual({})", individuals(is)),
        Axiom::DifferentIndividuals(is) => format!("DifferentIndividuals({})", individuals(is)),
    }
}

fn render_atom(a: &RoleAtom) -> String {
    format!("ObjectPropertyAtom({} Variable(var:{}) Variable(var:{}))", name(&a.role), a.subject, a.object)
}

fn render_rule(r: &DlSafeRule) -> String {
    let body: Vec<String> = r.body.iter().map(render_atom).collect();
    format!("DLSafeRule(Body({}) Head({}))", body.join(" "), render_atom(&r.head))
}

/// Writes the set as an OWL 2 functional-syntax document. The output does not
/// depend on the order of `ax.axioms`.
pub fn serialize_functional(ax: &AxiomSet) -> String {
    let mut lines: Vec<(u8, String)> = ax.axioms.iter().map(|a| (a.kind_rank(), render_axiom(a))).collect();
    lines.sort();
    lines.dedup();
    let mut rules: Vec<String> = ax.rules.iter().map(render_rule).collect();
    rules.sort();
    rules.dedup();

    let ontology = if ax.ontology.is_empty() { "untitled" } else { ax.ontology.as_str() };
    let mut out = String::new();
    let _ = writeln!(out, "Prefix(m:=<urn:umlsat:{ontology}#>)");
    for (p, iri) in PREFIXES {
        let _ = writeln!(out, "Prefix({p}:=<{iri}>)");
    }
    out.push('\n');
    let _ = writeln!(out, "Ontology(<urn:umlsat:{ontology}>");
    for (_, l) in lines {
        let _ = writeln!(out, "  {l}");
    }
    for r in rules {
        let _ = writeln!(out, "  {r}");
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_is_bare_wrapper() {
        let text = serialize_functional(&AxiomSet::default());
        assert!(text.ends_with("Ontology(<urn:umlsat:untitled>\n)\n"));
        assert!(text.starts_with("Prefix(m:=<urn:umlsat:untitled#>)\n"));
    }

    #[test]
    fn renders_constructors() {
        let c = ConceptExpr::And(vec![
            ConceptExpr::ExactCard(1, "review".into()),
            ConceptExpr::DataHasValue("Decision".into(), DataValue::string("accept")),
            ConceptExpr::not(ConceptExpr::atom("A")),
        ]);
        assert_eq!(
            render_concept(&c),
            "ObjectIntersectionOf(ObjectExactCardinality(1 m:review) DataHasValue(m:Decision \"accept\"^^xsd:string) ObjectComplementOf(m:A))"
        );
        assert_eq!(
            render_rule(&DlSafeRule::transitivity("owns")),
            "DLSafeRule(Body(ObjectPropertyAtom(m:owns Variable(var:x) Variable(var:y)) ObjectPropertyAtom(m:owns Variable(var:y) Variable(var:z))) Head(ObjectPropertyAtom(m:owns Variable(var:x) Variable(var:z))))"
        );
        assert_eq!(DataValue::string("a\"b").to_string(), "\"a\\\"b\"^^xsd:string");
    }

    #[test]
    fn order_independent() {
        let mut a = AxiomSet::new("t");
        a.push(Axiom::SubClassOf(ConceptExpr::atom("B"), ConceptExpr::atom("A")), crate::model::ElementRef::Model);
        a.push(Axiom::DeclClass("B".into()), crate::model::ElementRef::Model);
        a.push(Axiom::DeclClass("A".into()), crate::model::ElementRef::Model);
        let mut b = a.clone();
        b.axioms.reverse();
        assert_eq!(serialize_functional(&a), serialize_functional(&b));
        let text = serialize_functional(&a);
        let body: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("Ontology")).collect();
        assert_eq!(body[1], "  Declaration(Class(m:A))");
        assert_eq!(body[3], "  SubClassOf(m:B m:A)");
    }
}
