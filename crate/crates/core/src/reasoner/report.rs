use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClashKind {
    AtomicContradiction,
    MaxCardinality,
    IrreflexiveEdge,
    InverseFunctional,
    DifferentIndividualsMerge,
    DataValueConflict,
}

impl ClashKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClashKind::AtomicContradiction => "atomic-contradiction",
            ClashKind::MaxCardinality => "max-cardinality",
            ClashKind::IrreflexiveEdge => "irreflexive-edge",
            ClashKind::InverseFunctional => "inverse-functional",
            ClashKind::DifferentIndividualsMerge => "different-individuals-merge",
            ClashKind::DataValueConflict => "data-value-conflict",
        }
    }
}

impl fmt::Display for ClashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClashReport {
    pub kind: ClashKind,
    pub message: String,
    /// Individuals first, then roles or concepts.
    pub participants: Vec<String>,
    /// Indices into the axiom list of the checked set.
    pub provenance: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    #[serde(rename = "translate-ms")]
    pub translate_ms: f64,
    #[serde(rename = "reason-ms")]
    pub reason_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SatReport {
    pub consistent: bool,
    /// User classes and states, sorted.
    pub unsatisfiable: Vec<String>,
    /// Compiler-introduced concepts, sorted.
    #[serde(rename = "unsatisfiable-generated")]
    pub unsatisfiable_generated: Vec<String>,
    pub clashes: Vec<ClashReport>,
    pub timings: Timings,
}

impl SatReport {
    /// Consistent with every named concept satisfiable.
    pub fn is_clean(&self) -> bool {
        self.consistent && self.unsatisfiable.is_empty() && self.unsatisfiable_generated.is_empty()
    }

    /// Plain-text rendering in the style of common reasoner front ends.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if !self.consistent {
            out.push_str("Consistent: No\n");
            for c in &self.clashes {
                out.push_str(&format!("Reason: {}\n", c.message));
            }
            return out;
        }
        out.push_str("Consistent: Yes\n");
        let n = self.unsatisfiable.len();
        out.push_str(&format!("Found {n} unsatisfiable concept(s):\n"));
        for c in &self.unsatisfiable {
            out.push_str(c);
            out.push('\n');
        }
        if !self.unsatisfiable_generated.is_empty() {
            out.push_str(&format!("Found {} unsatisfiable generated concept(s):\n", self.unsatisfiable_generated.len()));
            for c in &self.unsatisfiable_generated {
                out.push_str(c);
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_report_lists_concepts() {
        let r = SatReport {
            consistent: true,
            unsatisfiable: vec!["Accept".into(), "ArticleRejected".into()],
            ..Default::default()
        };
        assert_eq!(r.render_text(), "Consistent: Yes\nFound 2 unsatisfiable concept(s):\nAccept\nArticleRejected\n");
        assert!(!r.is_clean());
    }

    #[test]
    fn kind_names() {
        assert_eq!(ClashKind::InverseFunctional.to_string(), "inverse-functional");
        assert_eq!(ClashKind::IrreflexiveEdge.as_str(), "irreflexive-edge");
    }
}
