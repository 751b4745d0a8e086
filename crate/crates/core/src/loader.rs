//! Line-oriented text format for models.
//!
//! ```text
//! model <name>
//! class <Name> [extends <Name>{,<Name>}]
//! attr <Class>.<name> : boolean|string|integer|<EnumName>
//! enum <Name> { <lit>{, <lit>} }
//! assoc <name> <Domain> -> <Range> [<min>..<max|*>] {unique|nonunique} {ordered} {composite} [subsets <name>] [inverse <name>]
//! object <name> : <Class>
//! link <assoc> <src> -> <tgt> [@<index>]
//! nolink <assoc> <src> -> <tgt>
//! statechart <Class> { state <Name> [in <Parent>[/<region>]] [orthogonal] }
//! inv <name> context <Class>|<Class>.<State> : <ocl-text>
//! ```
//!
//! A statechart body may span several lines and may also hold
//! `transition <Src> -> <Tgt> [: <label>]` entries; entries on one line are
//! separated by `;`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::*;
use crate::ocl::{parse_ocl, print_ocl};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

pub type SpanTable = BTreeMap<ElementRef, SourceSpan>;

#[derive(Debug, Clone)]
pub struct Loaded {
    pub model: UmlModel,
    pub spans: SpanTable,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{}", render_invalid(.0))]
    Invalid(Vec<(Diagnostic, Option<SourceSpan>)>),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn render_invalid(ds: &[(Diagnostic, Option<SourceSpan>)]) -> String {
    ds.iter()
        .map(|(d, span)| match span {
            Some(s) => format!("{s}: {d}"),
            None => d.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

impl LoadError {
    pub fn message(&self) -> String {
        match self {
            LoadError::Syntax { message, .. } => message.clone(),
            other => other.to_string(),
        }
    }
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<Loaded, LoadError> {
    parse_model_named(text, "<input>")
}

pub fn parse_model_named(text: &str, file: &str) -> Result<Loaded, LoadError> {
    let loaded = parse_unvalidated(text, file)?;
    let diagnostics = validate(&loaded.model);
    if diagnostics.is_empty() {
        Ok(loaded)
    } else {
        Err(LoadError::Invalid(
            diagnostics
                .into_iter()
                .map(|d| {
                    let span = loaded.spans.get(&d.element).cloned();
                    (d, span)
                })
                .collect(),
        ))
    }
}

pub fn load_model_file(path: &Path) -> Result<Loaded, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_model_named(&text, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Int(u64),
    Punct(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "'{w}'"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Punct(p) => write!(f, "'{p}'"),
        }
    }
}

const PUNCT: &[&str] = &["->", "..", "{", "}", "[", "]", ",", ":", ".", "/", "@", "*", ";"];

/// Tokens of one physical line, each with its byte column (0-based). For
/// `inv` statements tokenizing stops at the colon that opens the OCL text.
fn tokenize(line: &str) -> Result<Vec<(usize, Tok)>, (usize, String)> {
    let is_inv = line.trim_start().strip_prefix("inv").is_some_and(|r| r.starts_with(char::is_whitespace));
    let b = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < b.len() {
        let c = b[i];
        if c == b'#' {
            break;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Word(line[s..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let n = line[s..i].parse().map_err(|_| (s, "integer out of range".to_string()))?;
            out.push((s, Tok::Int(n)));
            continue;
        }
        for p in PUNCT {
            if line[i..].starts_with(p) {
                out.push((i, Tok::Punct(p)));
                i += p.len();
                if is_inv && *p == ":" {
                    break 'outer;
                }
                continue 'outer;
            }
        }
        let ch = line[i..].chars().next().unwrap_or('?');
        return Err((i, format!("unexpected character '{ch}'")));
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    line: usize,
    line_len: usize,
    file: &'a str,
}

impl<'a> Cursor<'a> {
    fn span_at(&self, col: usize) -> SourceSpan {
        SourceSpan { file: self.file.to_string(), line: self.line, column: col + 1 }
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.line_len)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, LoadError> {
        Err(LoadError::Syntax { span: self.span_at(self.here()), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, LoadError> {
        match self.peek() {
            Some(t) => self.err(format!("expected {expected}, found {t}")),
            None => self.err(format!("expected {expected}, found end of line")),
        }
    }

    fn word(&mut self, what: &str) -> Result<String, LoadError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.unexpected(what),
        }
    }

    /// Identifier or bare integer, as allowed for enumeration literals.
    fn word_or_int(&mut self, what: &str) -> Result<String, LoadError> {
        match self.peek() {
            Some(Tok::Int(i)) => {
                let s = i.to_string();
                self.pos += 1;
                Ok(s)
            }
            _ => self.word(what),
        }
    }

    fn int(&mut self, what: &str) -> Result<u64, LoadError> {
        match self.peek() {
            Some(Tok::Int(i)) => {
                let i = *i;
                self.pos += 1;
                Ok(i)
            }
            _ => self.unexpected(what),
        }
    }

    fn punct(&mut self, p: &'static str) -> Result<(), LoadError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.unexpected(&format!("'{p}'"))
        }
    }

    fn eat(&mut self, p: &'static str) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(x)) if x == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end(&self) -> Result<(), LoadError> {
        if self.at_end() {
            Ok(())
        } else {
            self.unexpected("end of line")
        }
    }
}

#[derive(Default)]
struct Builder {
    model: UmlModel,
    spans: SpanTable,
    pending_attrs: Vec<(String, AttributeDef, SourceSpan)>,
    model_seen: bool,
}

/// Parses without running model validation. Element order follows the source.
pub fn parse_unvalidated(text: &str, file: &str) -> Result<Loaded, LoadError> {
    let mut b = Builder::default();
    let lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let mut i = 0;
    while i < lines.len() {
        let lineno = i + 1;
        let line = lines[i];
        i += 1;
        let toks = tokenize(line).map_err(|(col, message)| LoadError::Syntax {
            span: SourceSpan { file: file.to_string(), line: lineno, column: col + 1 },
            message,
        })?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor { toks: &toks, pos: 0, line: lineno, line_len: line.len(), file };
        let keyword_col = toks[0].0;
        let keyword = cur.word("statement keyword")?;
        let span = cur.span_at(keyword_col);
        match keyword.as_str() {
            "model" => {
                if b.model_seen {
                    return cur.err("duplicate model statement");
                }
                b.model_seen = true;
                b.model.name = cur.word("model name")?;
                cur.end()?;
            }
            "class" => {
                let mut class = ClassDef::new(cur.word("class name")?);
                if cur.eat_word("extends") {
                    loop {
                        let sup_col = cur.here();
                        let sup = cur.word("superclass name")?;
                        b.spans.insert(
                            ElementRef::Generalization { sub: class.name.clone(), sup: sup.clone() },
                            cur.span_at(sup_col),
                        );
                        class.superclasses.insert(sup);
                        if !cur.eat(",") {
                            break;
                        }
                    }
                }
                cur.end()?;
                b.spans.entry(ElementRef::Class(class.name.clone())).or_insert(span);
                b.model.classes.push(class);
            }
            "attr" => {
                let class = cur.word("class name")?;
                cur.punct(".")?;
                let name = cur.word("attribute name")?;
                cur.punct(":")?;
                let datatype = match cur.word("datatype")?.as_str() {
                    "boolean" => AttrType::Boolean,
                    "string" => AttrType::String,
                    "integer" => AttrType::Integer,
                    other => AttrType::Enumeration(other.to_string()),
                };
                cur.end()?;
                b.pending_attrs.push((class, AttributeDef { name, datatype }, span));
            }
            "enum" => {
                let name = cur.word("enumeration name")?;
                cur.punct("{")?;
                let mut literals = Vec::new();
                if !cur.eat("}") {
                    loop {
                        literals.push(cur.word_or_int("enumeration literal")?);
                        if cur.eat("}") {
                            break;
                        }
                        cur.punct(",")?;
                    }
                }
                cur.end()?;
                b.spans.entry(ElementRef::Enumeration(name.clone())).or_insert(span);
                b.model.enumerations.push(EnumerationDef { name, literals });
            }
            "assoc" => {
                let a = parse_assoc(&mut cur)?;
                b.spans.entry(ElementRef::Association(a.name.clone())).or_insert(span);
                b.model.associations.push(a);
            }
            "object" => {
                let name = cur.word("object name")?;
                cur.punct(":")?;
                let class = cur.word("class name")?;
                cur.end()?;
                b.spans.entry(ElementRef::Object(name.clone())).or_insert(span);
                b.model.objects.push(ObjectDef { name, class });
            }
            "link" | "nolink" => {
                let association = cur.word("association name")?;
                let source = cur.word("source object")?;
                cur.punct("->")?;
                let target = cur.word("target object")?;
                if keyword == "link" {
                    let index = if cur.eat("@") { Some(cur.int("link index")?) } else { None };
                    cur.end()?;
                    b.spans.insert(ElementRef::Link(b.model.links.len()), span);
                    b.model.links.push(LinkDef { association, source, target, index });
                } else {
                    cur.end()?;
                    b.spans.insert(ElementRef::NegLink(b.model.negative_links.len()), span);
                    b.model.negative_links.push(NegLinkDef { association, source, target });
                }
            }
            "statechart" => {
                let class = cur.word("class name")?;
                cur.punct("{")?;
                b.spans.entry(ElementRef::Statechart(class.clone())).or_insert(span);
                let mut sc = StatechartDef { class: class.clone(), states: Vec::new(), transitions: Vec::new() };
                // Body: the rest of this line, then following lines until '}'.
                let mut body: Vec<(usize, usize, Vec<(usize, Tok)>)> = Vec::new();
                let rest = toks[cur.pos..].to_vec();
                let mut closed = split_body(rest, lineno, line.len(), &mut body);
                while !closed {
                    if i >= lines.len() {
                        return Err(LoadError::Syntax {
                            span: SourceSpan { file: file.to_string(), line: lineno, column: keyword_col + 1 },
                            message: format!("unterminated statechart block for {class}"),
                        });
                    }
                    let l = lines[i];
                    let ln = i + 1;
                    i += 1;
                    let t = tokenize(l).map_err(|(col, message)| LoadError::Syntax {
                        span: SourceSpan { file: file.to_string(), line: ln, column: col + 1 },
                        message,
                    })?;
                    closed = split_body(t, ln, l.len(), &mut body);
                }
                for (ln, len, entry) in &body {
                    let mut c = Cursor { toks: entry, pos: 0, line: *ln, line_len: *len, file };
                    let entry_span = c.span_at(c.here());
                    if c.eat_word("state") {
                        let mut state = StateDef::new(c.word("state name")?);
                        if c.eat_word("in") {
                            state.parent = Some(c.word("parent state")?);
                            if c.eat("/") {
                                state.region = Some(c.word("region name")?);
                            }
                        }
                        if c.eat_word("orthogonal") {
                            state.orthogonal = true;
                        }
                        c.end()?;
                        b.spans
                            .entry(ElementRef::State { class: class.clone(), state: state.name.clone() })
                            .or_insert(entry_span);
                        sc.states.push(state);
                    } else if c.eat_word("transition") {
                        let src = c.word("source state")?;
                        c.punct("->")?;
                        let tgt = c.word("target state")?;
                        let mut text = format!("{src} -> {tgt}");
                        if c.eat(":") {
                            let label: Vec<String> = c.toks[c.pos..].iter().map(|(_, t)| tok_text(t)).collect();
                            if label.is_empty() {
                                return c.unexpected("transition label");
                            }
                            text.push_str(" : ");
                            text.push_str(&label.join(" "));
                            c.pos = c.toks.len();
                        }
                        c.end()?;
                        b.spans.insert(
                            ElementRef::Transition { class: class.clone(), index: sc.transitions.len() },
                            entry_span,
                        );
                        sc.transitions.push(text);
                    } else {
                        return c.unexpected("'state' or 'transition'");
                    }
                }
                b.model.statecharts.push(sc);
            }
            "inv" => {
                let name = cur.word("constraint name")?;
                if !cur.eat_word("context") {
                    return cur.unexpected("'context'");
                }
                let class = cur.word("context class")?;
                let context = if cur.eat(".") {
                    ConstraintContext::State { class, state: cur.word("context state")? }
                } else {
                    ConstraintContext::Class(class)
                };
                if cur.peek() != Some(&Tok::Punct(":")) {
                    return cur.unexpected("':'");
                }
                let colon = cur.here();
                let raw = strip_comment(&line[colon + 1..]);
                let expr = parse_ocl(raw).map_err(|e| LoadError::Syntax {
                    span: cur.span_at(colon + 1 + e.offset()),
                    message: e.to_string(),
                })?;
                b.spans.entry(ElementRef::Constraint(name.clone())).or_insert(span);
                b.model.constraints.push(OclConstraint { name, context, expr });
            }
            other => {
                return Err(LoadError::Syntax { span, message: format!("unknown statement '{other}'") });
            }
        }
    }
    for (class, attr, span) in std::mem::take(&mut b.pending_attrs) {
        let Some(c) = b.model.classes.iter_mut().find(|c| c.name == class) else {
            return Err(LoadError::Syntax { span, message: format!("attribute on undeclared class {class}") });
        };
        b.spans
            .entry(ElementRef::Attribute { class: class.clone(), name: attr.name.clone() })
            .or_insert(span);
        c.attributes.push(attr);
    }
    Ok(Loaded { model: b.model, spans: b.spans })
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Word(w) => w.clone(),
        Tok::Int(i) => i.to_string(),
        Tok::Punct(p) => p.to_string(),
    }
}

/// OCL text may contain '#' inside string literals, so comments are only
/// recognised outside quotes.
fn strip_comment(s: &str) -> &str {
    let mut quote = None;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        match quote {
            Some(q) => {
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
            }
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c == '#' => return &s[..i],
            None => {}
        }
    }
    s
}

/// Splits statechart body tokens into `;`-separated entries. Returns true once
/// the closing brace has been consumed.
fn split_body(
    toks: Vec<(usize, Tok)>,
    line: usize,
    len: usize,
    out: &mut Vec<(usize, usize, Vec<(usize, Tok)>)>,
) -> bool {
    let mut current = Vec::new();
    let mut closed = false;
    for t in toks {
        if closed {
            // trailing tokens after '}' become an entry so the caller reports them
            current.push(t);
            continue;
        }
        match t.1 {
            Tok::Punct(";") => {
                if !current.is_empty() {
                    out.push((line, len, std::mem::take(&mut current)));
                }
            }
            Tok::Punct("}") => {
                if !current.is_empty() {
                    out.push((line, len, std::mem::take(&mut current)));
                }
                closed = true;
            }
            _ => current.push(t),
        }
    }
    if !current.is_empty() {
        out.push((line, len, current));
    }
    closed
}

fn parse_assoc(cur: &mut Cursor<'_>) -> Result<AssociationDef, LoadError> {
    let name = cur.word("association name")?;
    let domain = cur.word("domain class")?;
    cur.punct("->")?;
    let range = cur.word("range class")?;
    let mut a = AssociationDef::new(name, domain, range);
    if cur.eat("[") {
        let min = cur.int("minimum multiplicity")?;
        cur.punct("..")?;
        let max_col = cur.here();
        let max = if cur.eat("*") { None } else { Some(cur.int("maximum multiplicity or '*'")?) };
        cur.punct("]")?;
        if let Some(max) = max {
            if min > max {
                return Err(LoadError::Syntax { span: cur.span_at(max_col), message: "min exceeds max".into() });
            }
            if max == 0 {
                return Err(LoadError::Syntax {
                    span: cur.span_at(max_col),
                    message: "max multiplicity must be positive".into(),
                });
            }
        }
        a.multiplicity = Multiplicity { min, max };
    }
    while let Some(Tok::Word(w)) = cur.peek() {
        match w.as_str() {
            "unique" => a.unique = true,
            "nonunique" => a.unique = false,
            "ordered" => a.ordered = true,
            "composite" => a.composite = true,
            "subsets" => {
                cur.pos += 1;
                a.subsets = Some(cur.word("subsetted association")?);
                continue;
            }
            "inverse" => {
                cur.pos += 1;
                a.inverse_of = Some(cur.word("inverse association")?);
                continue;
            }
            _ => return cur.unexpected("association modifier"),
        }
        cur.pos += 1;
    }
    cur.end()?;
    Ok(a)
}

/// Canonical text: statements grouped by kind, each group sorted by name.
pub fn serialize_model(model: &UmlModel) -> String {
    let mut m = model.clone();
    m.canonicalize();
    let mut out = String::new();
    if !m.name.is_empty() {
        let _ = writeln!(out, "model {}", m.name);
    }
    for e in &m.enumerations {
        let _ = writeln!(out, "enum {} {{ {} }}", e.name, e.literals.join(", "));
    }
    for c in &m.classes {
        if c.superclasses.is_empty() {
            let _ = writeln!(out, "class {}", c.name);
        } else {
            let sups: Vec<&str> = c.superclasses.iter().map(String::as_str).collect();
            let _ = writeln!(out, "class {} extends {}", c.name, sups.join(", "));
        }
    }
    for c in &m.classes {
        for a in &c.attributes {
            let _ = writeln!(out, "attr {}.{} : {}", c.name, a.name, a.datatype);
        }
    }
    for a in &m.associations {
        let _ = write!(out, "assoc {} {} -> {} {}", a.name, a.domain, a.range, a.multiplicity);
        if !a.unique {
            out.push_str(" nonunique");
        }
        if a.ordered {
            out.push_str(" ordered");
        }
        if a.composite {
            out.push_str(" composite");
        }
        if let Some(s) = &a.subsets {
            let _ = write!(out, " subsets {s}");
        }
        if let Some(s) = &a.inverse_of {
            let _ = write!(out, " inverse {s}");
        }
        out.push('\n');
    }
    for o in &m.objects {
        let _ = writeln!(out, "object {} : {}", o.name, o.class);
    }
    for l in &m.links {
        let _ = write!(out, "link {} {} -> {}", l.association, l.source, l.target);
        if let Some(i) = l.index {
            let _ = write!(out, " @{i}");
        }
        out.push('\n');
    }
    for l in &m.negative_links {
        let _ = writeln!(out, "nolink {} {} -> {}", l.association, l.source, l.target);
    }
    for sc in &m.statecharts {
        let _ = writeln!(out, "statechart {} {{", sc.class);
        for s in &sc.states {
            let _ = write!(out, "  state {}", s.name);
            if let Some(p) = &s.parent {
                let _ = write!(out, " in {p}");
                if let Some(r) = &s.region {
                    let _ = write!(out, "/{r}");
                }
            }
            if s.orthogonal {
                out.push_str(" orthogonal");
            }
            out.push('\n');
        }
        for t in &sc.transitions {
            let _ = writeln!(out, "  transition {t}");
        }
        out.push_str("}\n");
    }
    for c in &m.constraints {
        let _ = writeln!(out, "inv {} context {} : {}", c.name, c.context, print_ocl(&c.expr));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocl::{OclExpr, RelOp};

    #[test]
    fn two_classes_and_an_association() {
        let l = parse_model("class C1\nclass C2\nassoc A C1 -> C2 [1..3]").unwrap();
        assert_eq!(l.model.classes.len(), 2);
        assert_eq!(l.model.associations[0].multiplicity, Multiplicity::new(1, Some(3)));
        assert_eq!(l.spans[&ElementRef::Association("A".into())].line, 3);
    }

    #[test]
    fn empty_input() {
        let l = parse_model("").unwrap();
        assert!(l.model.is_empty());
        assert_eq!(serialize_model(&l.model), "");
    }

    #[test]
    fn min_exceeds_max() {
        let err = parse_model("assoc A X -> Y [2..1]").unwrap_err();
        match err {
            LoadError::Syntax { span, message } => {
                assert_eq!(message, "min exceeds max");
                assert_eq!((span.line, span.column), (1, 20));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn defaults_and_modifiers() {
        let l = parse_model(
            "class A\nclass B\nassoc p A -> B\nassoc q A -> B [0..*] nonunique\nassoc r A -> B [1..1] ordered composite subsets p",
        )
        .unwrap();
        let a = &l.model.associations;
        assert_eq!((a[0].multiplicity, a[0].unique, a[0].ordered, a[0].composite), (Multiplicity::ANY, true, false, false));
        assert!(!a[1].unique);
        assert!(a[2].ordered && a[2].composite);
        assert_eq!(a[2].subsets.as_deref(), Some("p"));
    }

    #[test]
    fn crlf_and_comments() {
        let l = parse_model("# header\r\nclass A # trailing\r\n\r\nclass B extends A\r\n").unwrap();
        assert_eq!(l.model.classes[1].superclasses.iter().next().map(String::as_str), Some("A"));
    }

    #[test]
    fn statechart_block_forms() {
        let one = parse_model("class C\nstatechart C { state S orthogonal; state T in S/r1; state U in S/r2 }").unwrap();
        let many = parse_model(
            "class C\nstatechart C {\n  state S orthogonal\n  state T in S/r1\n  state U in S/r2\n  transition T -> U : go now\n}",
        )
        .unwrap();
        assert_eq!(one.model.statecharts[0].states, many.model.statecharts[0].states);
        assert_eq!(many.model.statecharts[0].transitions, ["T -> U : go now"]);
        let span = &many.spans[&ElementRef::State { class: "C".into(), state: "T".into() }];
        assert_eq!((span.line, span.column), (4, 3));
    }

    #[test]
    fn invariant_contexts() {
        let l = parse_model(
            "class Article\nclass Review\nassoc review Article -> Review [0..1]\nstatechart Article { state Accept }\ninv a context Article.Accept : self.review->size()=1 # note\ninv b context Article : self.review->notEmpty()",
        )
        .unwrap();
        assert_eq!(
            l.model.constraints[0].context,
            ConstraintContext::State { class: "Article".into(), state: "Accept".into() }
        );
        assert_eq!(l.model.constraints[0].expr, OclExpr::size("review", RelOp::Eq, 1));
        assert_eq!(l.model.constraints[1].context, ConstraintContext::Class("Article".into()));
    }

    #[test]
    fn ocl_errors_point_into_the_line() {
        let err = parse_model("class A\ninv x context A : self.a->size()").unwrap_err();
        match err {
            LoadError::Syntax { span, .. } => assert_eq!((span.line, span.column), (2, 33)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn validation_diagnostics_carry_spans() {
        let err = parse_model("class A\nclass B extends Z").unwrap_err();
        match err {
            LoadError::Invalid(ds) => {
                assert!(ds[0].0.message.contains("unresolved superclass"));
                assert_eq!(ds[0].1.as_ref().map(|s| s.line), Some(2));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_statement() {
        assert!(parse_model("klass A").unwrap_err().to_string().contains("unknown statement"));
    }

    #[test]
    fn serialize_is_canonical() {
        let a = parse_model("class B\nclass A\nobject y : A\nobject x : B").unwrap().model;
        assert_eq!(serialize_model(&a), "class A\nclass B\nobject x : B\nobject y : A\n");
    }
}
