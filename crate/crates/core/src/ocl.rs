//! Restricted OCL invariants: size tests on association ends, attribute
//! comparisons, emptiness tests and `excludes`, combined with `and`/`or`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    Eq,
}

impl RelOp {
    pub const ALL: [RelOp; 6] = [RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge, RelOp::Ne, RelOp::Eq];

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Ne => "<>",
            RelOp::Eq => "=",
        }
    }
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Literal {
    Bool(bool),
    Integer(i64),
    String(String),
    Null,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Integer(i) => write!(f, "{i}"),
            Literal::String(s) => {
                f.write_str("'")?;
                for ch in s.chars() {
                    if ch == '\'' || ch == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{ch}")?;
                }
                f.write_str("'")
            }
            Literal::Null => f.write_str("null"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OclExpr {
    And(Box<OclExpr>, Box<OclExpr>),
    Or(Box<OclExpr>, Box<OclExpr>),
    SizeCmp { assoc: String, op: RelOp, value: u64 },
    /// `self.attr op lit`, or `self.via.attr op lit` when `via` names an
    /// association navigated in one step.
    AttrCmp { via: Option<String>, attr: String, op: RelOp, value: Literal },
    IsEmpty(String),
    NotEmpty(String),
    Excludes(String, String),
}

/// A model element referenced from an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OclRef<'a> {
    Association(&'a str),
    Attribute(&'a str),
    Navigation { association: &'a str, attribute: &'a str },
}

impl OclExpr {
    pub fn and(l: OclExpr, r: OclExpr) -> OclExpr {
        OclExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: OclExpr, r: OclExpr) -> OclExpr {
        OclExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn size(assoc: &str, op: RelOp, value: u64) -> OclExpr {
        OclExpr::SizeCmp { assoc: assoc.to_string(), op, value }
    }

    pub fn attr(attr: &str, op: RelOp, value: Literal) -> OclExpr {
        OclExpr::AttrCmp { via: None, attr: attr.to_string(), op, value }
    }

    pub fn collect_refs<'a>(&'a self, out: &mut Vec<OclRef<'a>>) {
        match self {
            OclExpr::And(l, r) | OclExpr::Or(l, r) => {
                l.collect_refs(out);
                r.collect_refs(out);
            }
            OclExpr::SizeCmp { assoc, .. } | OclExpr::IsEmpty(assoc) | OclExpr::NotEmpty(assoc) => {
                out.push(OclRef::Association(assoc))
            }
            OclExpr::AttrCmp { via: None, attr, .. } => out.push(OclRef::Attribute(attr)),
            OclExpr::AttrCmp { via: Some(a), attr, .. } => {
                out.push(OclRef::Navigation { association: a, attribute: attr })
            }
            OclExpr::Excludes(l, r) => {
                out.push(OclRef::Association(l));
                out.push(OclRef::Association(r));
            }
        }
    }
}

impl fmt::Display for OclExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_ocl(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OclError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String>, found: String },
    #[error("lexical error at byte {offset}: {message}")]
    Lexical { offset: usize, message: String },
    #[error("unsupported OCL at byte {offset}: {construct}")]
    Unsupported { offset: usize, construct: String },
}

impl OclError {
    pub fn offset(&self) -> usize {
        match self {
            OclError::Syntax { offset, .. } | OclError::Lexical { offset, .. } | OclError::Unsupported { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    Dot,
    Arrow,
    LParen,
    RParen,
    Op(RelOp),
    Other(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(i) => i.to_string(),
            Tok::Str(_) => "string literal".into(),
            Tok::Dot => "'.'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Op(op) => format!("'{op}'"),
            Tok::Other(c) => format!("'{c}'"),
            Tok::End => "end of input".into(),
        }
    }
}

/// Keywords of full OCL outside the supported fragment.
const UNSUPPORTED_KEYWORDS: &[&str] = &["implies", "not", "xor", "let", "if"];

/// Operation names outside the fragment; ordinary identifiers elsewhere.
const UNSUPPORTED_OPERATIONS: &[&str] = &[
    "forAll", "exists", "select", "reject", "collect", "includes", "includesAll", "excludesAll", "iterate",
    "oclIsKindOf", "oclIsTypeOf", "allInstances",
];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, OclError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'.' => {
                out.push((start, Tok::Dot));
                i += 1;
            }
            b'(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((start, Tok::Arrow));
                i += 2;
            }
            b'=' => {
                out.push((start, Tok::Op(RelOp::Eq)));
                i += 1;
            }
            b'<' => {
                let (op, n) = match bytes.get(i + 1) {
                    Some(b'=') => (RelOp::Le, 2),
                    Some(b'>') => (RelOp::Ne, 2),
                    _ => (RelOp::Lt, 1),
                };
                out.push((start, Tok::Op(op)));
                i += n;
            }
            b'>' => {
                let (op, n) = if bytes.get(i + 1) == Some(&b'=') { (RelOp::Ge, 2) } else { (RelOp::Gt, 1) };
                out.push((start, Tok::Op(op)));
                i += n;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(OclError::Lexical { offset: start, message: "malformed integer literal".into() });
                }
                let digits = &text[start..i];
                let value = digits
                    .parse::<u64>()
                    .ok()
                    .filter(|v| *v <= i64::MAX as u64)
                    .ok_or_else(|| OclError::Lexical {
                        offset: start,
                        message: format!("integer literal {digits} exceeds 63 bits"),
                    })?;
                out.push((start, Tok::Int(value)));
            }
            b'\'' | b'"' => {
                let quote = c;
                i += 1;
                let mut s = String::new();
                loop {
                    let Some(ch) = text[i..].chars().next() else {
                        return Err(OclError::Lexical { offset: start, message: "unterminated string literal".into() });
                    };
                    i += ch.len_utf8();
                    if ch as u32 == quote as u32 {
                        break;
                    }
                    if ch == '\\' {
                        let Some(esc) = text[i..].chars().next() else {
                            return Err(OclError::Lexical { offset: start, message: "unterminated string literal".into() });
                        };
                        i += esc.len_utf8();
                        s.push(esc);
                    } else {
                        s.push(ch);
                    }
                }
                out.push((start, Tok::Str(s)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                // Reported by the parser, which knows what it expected here.
                let ch = text[i..].chars().next().unwrap_or('?');
                out.push((start, Tok::Other(ch)));
                i += ch.len_utf8();
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, OclError> {
        if let Tok::Ident(id) = self.peek() {
            if UNSUPPORTED_KEYWORDS.contains(&id.as_str()) || UNSUPPORTED_OPERATIONS.contains(&id.as_str()) {
                return Err(OclError::Unsupported { offset: self.offset(), construct: id.clone() });
            }
        }
        Err(OclError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<(), OclError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&[label])
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), OclError> {
        match self.peek() {
            Tok::Ident(id) if id == kw => {
                self.bump();
                Ok(())
            }
            _ => self.fail(&[&format!("'{kw}'")]),
        }
    }

    fn ident(&mut self) -> Result<String, OclError> {
        match self.peek() {
            Tok::Ident(id) if !is_reserved(id) => {
                let id = id.clone();
                self.bump();
                Ok(id)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn relop(&mut self) -> Result<RelOp, OclError> {
        match self.peek() {
            Tok::Op(op) => {
                let op = *op;
                self.bump();
                Ok(op)
            }
            _ => self.fail(&["relational operator"]),
        }
    }

    fn expr(&mut self) -> Result<OclExpr, OclError> {
        let mut left = self.cond()?;
        loop {
            match self.peek() {
                Tok::Ident(id) if id == "and" => {
                    self.bump();
                    left = OclExpr::and(left, self.cond()?);
                }
                Tok::Ident(id) if id == "or" => {
                    self.bump();
                    left = OclExpr::or(left, self.cond()?);
                }
                _ => return Ok(left),
            }
        }
    }

    fn cond(&mut self) -> Result<OclExpr, OclError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let e = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(e);
        }
        let name = self.self_ref()?;
        match self.peek() {
            Tok::Arrow => {
                self.bump();
                let op_at = self.offset();
                let op = match self.peek() {
                    Tok::Ident(id) => id.clone(),
                    _ => return self.fail(&["'size'", "'isEmpty'", "'notEmpty'", "'excludes'"]),
                };
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                match op.as_str() {
                    "size" => {
                        self.expect(Tok::RParen, "')'")?;
                        let op = self.relop()?;
                        match self.bump() {
                            Tok::Int(value) => Ok(OclExpr::SizeCmp { assoc: name, op, value }),
                            _ => {
                                self.pos -= 1;
                                self.fail(&["integer"])
                            }
                        }
                    }
                    "isEmpty" => {
                        self.expect(Tok::RParen, "')'")?;
                        Ok(OclExpr::IsEmpty(name))
                    }
                    "notEmpty" => {
                        self.expect(Tok::RParen, "')'")?;
                        Ok(OclExpr::NotEmpty(name))
                    }
                    "excludes" => {
                        let other = self.self_ref()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(OclExpr::Excludes(name, other))
                    }
                    _ if UNSUPPORTED_OPERATIONS.contains(&op.as_str()) => {
                        Err(OclError::Unsupported { offset: op_at, construct: op })
                    }
                    _ => Err(OclError::Syntax {
                        offset: op_at,
                        expected: ["'size'", "'isEmpty'", "'notEmpty'", "'excludes'"].map(String::from).to_vec(),
                        found: format!("'{op}'"),
                    }),
                }
            }
            Tok::Dot => {
                self.bump();
                let attr = self.ident()?;
                let op = self.relop()?;
                let value = self.literal()?;
                Ok(OclExpr::AttrCmp { via: Some(name), attr, op, value })
            }
            Tok::Op(_) => {
                let op = self.relop()?;
                let value = self.literal()?;
                Ok(OclExpr::AttrCmp { via: None, attr: name, op, value })
            }
            _ => self.fail(&["'->'", "'.'", "relational operator"]),
        }
    }

    fn self_ref(&mut self) -> Result<String, OclError> {
        self.keyword("self")?;
        self.expect(Tok::Dot, "'.'")?;
        self.ident()
    }

    fn literal(&mut self) -> Result<Literal, OclError> {
        let lit = match self.peek() {
            Tok::Int(i) => Literal::Integer(*i as i64),
            Tok::Str(s) => Literal::String(s.clone()),
            Tok::Ident(id) => match id.as_str() {
                "true" => Literal::Bool(true),
                "false" => Literal::Bool(false),
                "null" => Literal::Null,
                // Enumeration literals are written bare.
                _ if !is_reserved(id) => Literal::String(id.clone()),
                _ => return self.fail(&["literal"]),
            },
            _ => return self.fail(&["literal"]),
        };
        self.bump();
        Ok(lit)
    }
}

fn is_reserved(id: &str) -> bool {
    matches!(id, "self" | "and" | "or" | "true" | "false" | "null") || UNSUPPORTED_KEYWORDS.contains(&id)
}

pub fn parse_ocl(text: &str) -> Result<OclExpr, OclError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["'and'", "'or'", "end of input"]);
    }
    Ok(e)
}

/// Canonical spelling. Left-nested chains print without parentheses; a
/// compound right operand is parenthesized.
pub fn print_ocl(expr: &OclExpr) -> String {
    let mut s = String::new();
    write_expr(expr, &mut s);
    s
}

fn write_expr(e: &OclExpr, out: &mut String) {
    use std::fmt::Write;
    match e {
        OclExpr::And(l, r) | OclExpr::Or(l, r) => {
            write_expr(l, out);
            out.push_str(if matches!(e, OclExpr::And(..)) { " and " } else { " or " });
            if matches!(**r, OclExpr::And(..) | OclExpr::Or(..)) {
                out.push('(');
                write_expr(r, out);
                out.push(')');
            } else {
                write_expr(r, out);
            }
        }
        OclExpr::SizeCmp { assoc, op, value } => {
            let _ = write!(out, "self.{assoc}->size(){op}{value}");
        }
        OclExpr::AttrCmp { via, attr, op, value } => {
            out.push_str("self.");
            if let Some(v) = via {
                out.push_str(v);
                out.push('.');
            }
            let _ = write!(out, "{attr}{op}{value}");
        }
        OclExpr::IsEmpty(r) => {
            let _ = write!(out, "self.{r}->isEmpty()");
        }
        OclExpr::NotEmpty(r) => {
            let _ = write!(out, "self.{r}->notEmpty()");
        }
        OclExpr::Excludes(l, r) => {
            let _ = write!(out, "self.{l}->excludes(self.{r})");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_comparison() {
        assert_eq!(parse_ocl("self.review->size()=1").unwrap(), OclExpr::size("review", RelOp::Eq, 1));
        assert_eq!(parse_ocl("self . review -> size ( ) >= 2").unwrap(), OclExpr::size("review", RelOp::Ge, 2));
    }

    #[test]
    fn bare_identifier_is_string_literal() {
        let e = parse_ocl("self.Decision=accept and self.review->size()=1").unwrap();
        assert_eq!(
            e,
            OclExpr::and(
                OclExpr::attr("Decision", RelOp::Eq, Literal::String("accept".into())),
                OclExpr::size("review", RelOp::Eq, 1)
            )
        );
    }

    #[test]
    fn collection_operations() {
        assert_eq!(
            parse_ocl("self.hasParent->excludes(self.hasParent)").unwrap(),
            OclExpr::Excludes("hasParent".into(), "hasParent".into())
        );
        assert_eq!(parse_ocl("self.x->isEmpty()").unwrap(), OclExpr::IsEmpty("x".into()));
        assert_eq!(parse_ocl("self.x->notEmpty()").unwrap(), OclExpr::NotEmpty("x".into()));
    }

    #[test]
    fn navigation() {
        assert_eq!(
            parse_ocl("self.review.Decision=accept").unwrap(),
            OclExpr::AttrCmp {
                via: Some("review".into()),
                attr: "Decision".into(),
                op: RelOp::Eq,
                value: Literal::String("accept".into())
            }
        );
    }

    #[test]
    fn and_or_left_associative() {
        let e = parse_ocl("self.a->isEmpty() or self.b->isEmpty() and self.c->isEmpty()").unwrap();
        let a = OclExpr::IsEmpty("a".into());
        let b = OclExpr::IsEmpty("b".into());
        let c = OclExpr::IsEmpty("c".into());
        assert_eq!(e, OclExpr::and(OclExpr::or(a, b), c));
    }

    #[test]
    fn literals() {
        let p = |s: &str| match parse_ocl(s).unwrap() {
            OclExpr::AttrCmp { value, .. } => value,
            other => panic!("{other:?}"),
        };
        assert_eq!(p("self.x=true"), Literal::Bool(true));
        assert_eq!(p("self.x<>42"), Literal::Integer(42));
        assert_eq!(p("self.x='it\\'s'"), Literal::String("it's".into()));
        assert_eq!(p("self.x=null"), Literal::Null);
    }

    #[test]
    fn integer_overflow_is_lexical() {
        let err = parse_ocl("self.a->size()=9223372036854775808").unwrap_err();
        assert!(matches!(err, OclError::Lexical { offset: 15, .. }), "{err}");
        assert!(parse_ocl("self.a->size()=9223372036854775807").is_ok());
    }

    #[test]
    fn errors_carry_offset_and_expectations() {
        match parse_ocl("self.a->size()").unwrap_err() {
            OclError::Syntax { offset, expected, found } => {
                assert_eq!(offset, 14);
                assert_eq!(expected, ["relational operator"]);
                assert_eq!(found, "end of input");
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse_ocl("").unwrap_err(), OclError::Syntax { offset: 0, .. }));
    }

    #[test]
    fn unsupported_constructs_rejected() {
        for s in [
            "self.a->forAll(x | x.b = 1)",
            "self.a->size()=1 implies self.b->size()=1",
            "not self.a->isEmpty()",
            "self.a->select(x | x.b = 1)->isEmpty()",
        ] {
            assert!(matches!(parse_ocl(s), Err(OclError::Unsupported { .. })), "{s}");
        }
    }

    #[test]
    fn operation_names_are_plain_identifiers() {
        assert!(parse_ocl("self.review.Decision = reject").is_ok());
        assert!(parse_ocl("self.select->isEmpty()").is_ok());
    }

    #[test]
    fn print_spelling() {
        assert_eq!(print_ocl(&OclExpr::size("A", RelOp::Ge, 2)), "self.A->size()>=2");
        let e = OclExpr::and(
            OclExpr::and(OclExpr::IsEmpty("a".into()), OclExpr::IsEmpty("b".into())),
            OclExpr::IsEmpty("c".into()),
        );
        assert_eq!(print_ocl(&e), "self.a->isEmpty() and self.b->isEmpty() and self.c->isEmpty()");
    }
}
