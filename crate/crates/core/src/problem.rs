//! Problem files: attributes, domains, named constraints and queries.
//!
//! ```text
//! attrs A1 A2 A3 A4
//! domain A1 3                       # optional, default 2
//! gajd C1 = {A1 A2} {A2 A3 A4}
//! query {A1 A2} {A2 A3} {A3 A4} given C1 C2
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::hypergraph::{Attribute, AttributeSet, Hypergraph};
use crate::prelation::{DomainSpec, Gajd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub target: Gajd,
    /// Names of the constraints assumed.
    pub given: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemFile {
    /// Attributes in declaration order.
    pub attrs: Vec<Attribute>,
    /// Explicit domain sizes; other attributes have size 2.
    pub domains: BTreeMap<Attribute, usize>,
    pub constraints: Vec<(String, Gajd)>,
    pub queries: Vec<Query>,
}

impl ProblemFile {
    pub fn scheme(&self) -> AttributeSet {
        self.attrs.iter().cloned().collect()
    }

    pub fn domain_spec(&self) -> DomainSpec {
        let mut d = DomainSpec::binary(&self.scheme());
        for (a, &n) in &self.domains {
            d.set_size(a.clone(), n);
        }
        d
    }

    pub fn constraint(&self, name: &str) -> Option<&Gajd> {
        self.constraints
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| g)
    }

    /// The named constraints of `q`, in the order given.
    pub fn given(&self, q: &Query) -> Vec<(String, Gajd)> {
        q.given
            .iter()
            .map(|n| {
                (
                    n.clone(),
                    self.constraint(n).expect("resolved at parse time").clone(),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let col = |byte: usize| code[..byte].chars().count() + 1;
    for (i, c) in code.char_indices() {
        let single = matches!(c, '{' | '}' | '=');
        if c.is_whitespace() || single {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &code[s..i],
                    column: col(s),
                });
            }
            if single {
                out.push(Token {
                    text: &code[i..i + 1],
                    column: col(i),
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &code[s..],
            column: col(s),
        });
    }
    out
}

struct Parser {
    file: ProblemFile,
    declared: bool,
}

impl Parser {
    fn attr(&self, line: usize, tok: &Token<'_>) -> Result<Attribute, ParseError> {
        let a = Attribute::new(tok.text).map_err(|e| err(line, tok.column, e.to_string()))?;
        if !self.file.attrs.contains(&a) {
            return Err(err(
                line,
                tok.column,
                format!("unknown attribute {}", tok.text),
            ));
        }
        Ok(a)
    }

    fn require_attrs(&self, line: usize, tok: &Token<'_>) -> Result<(), ParseError> {
        if !self.declared {
            return Err(err(
                line,
                tok.column,
                format!("{} before the attrs declaration", tok.text),
            ));
        }
        Ok(())
    }

    /// Parses `{..} {..} ...` from `toks`, returning the edges and the rest.
    fn edges<'t, 'a>(
        &self,
        line: usize,
        toks: &'t [Token<'a>],
    ) -> Result<(Vec<AttributeSet>, &'t [Token<'a>]), ParseError> {
        let mut edges = Vec::new();
        let mut i = 0;
        while i < toks.len() && toks[i].text == "{" {
            let open = &toks[i];
            i += 1;
            let mut e = AttributeSet::new();
            loop {
                let Some(t) = toks.get(i) else {
                    return Err(err(line, open.column, "unclosed {".into()));
                };
                i += 1;
                match t.text {
                    "}" => break,
                    "{" | "=" => return Err(err(line, t.column, format!("unexpected {}", t.text))),
                    _ => {
                        let a = self.attr(line, t)?;
                        if !e.insert(a) {
                            return Err(err(
                                line,
                                t.column,
                                format!("attribute {} repeated in edge", t.text),
                            ));
                        }
                    }
                }
            }
            if e.is_empty() {
                return Err(err(line, open.column, "empty edge".into()));
            }
            edges.push(e);
        }
        Ok((edges, &toks[i..]))
    }

    fn gajd(
        &self,
        line: usize,
        column: usize,
        edges: Vec<AttributeSet>,
    ) -> Result<Gajd, ParseError> {
        let scheme = self.file.scheme();
        let h = Hypergraph::new(edges).map_err(|e| err(line, column, e.to_string()))?;
        if h.nodes() != &scheme {
            return Err(err(
                line,
                column,
                format!("edges cover {} but the scheme is {}", h.nodes(), scheme),
            ));
        }
        Gajd::new(h).map_err(|e| err(line, column, e.to_string()))
    }

    fn line(&mut self, n: usize, toks: &[Token<'_>]) -> Result<(), ParseError> {
        let Some(head) = toks.first() else {
            return Ok(());
        };
        let rest = &toks[1..];
        match head.text {
            "attrs" => {
                if self.declared {
                    return Err(err(n, head.column, "attrs declared twice".into()));
                }
                if rest.is_empty() {
                    return Err(err(
                        n,
                        head.column,
                        "attrs needs at least one attribute".into(),
                    ));
                }
                for t in rest {
                    let a = Attribute::new(t.text).map_err(|e| err(n, t.column, e.to_string()))?;
                    if self.file.attrs.contains(&a) {
                        return Err(err(
                            n,
                            t.column,
                            format!("attribute {} declared twice", t.text),
                        ));
                    }
                    self.file.attrs.push(a);
                }
                self.declared = true;
            }
            "domain" => {
                self.require_attrs(n, head)?;
                let [a, size] = rest else {
                    return Err(err(
                        n,
                        head.column,
                        "expected: domain <attribute> <size>".into(),
                    ));
                };
                let attr = self.attr(n, a)?;
                let k: usize =
                    size.text.parse().ok().filter(|&k| k >= 1).ok_or_else(|| {
                        err(n, size.column, format!("bad domain size {}", size.text))
                    })?;
                if self.file.domains.insert(attr, k).is_some() {
                    return Err(err(
                        n,
                        a.column,
                        format!("domain of {} given twice", a.text),
                    ));
                }
            }
            "gajd" => {
                self.require_attrs(n, head)?;
                let (Some(name), Some(eq)) = (rest.first(), rest.get(1)) else {
                    return Err(err(
                        n,
                        head.column,
                        "expected: gajd <name> = {..} ..".into(),
                    ));
                };
                if eq.text != "=" || matches!(name.text, "{" | "}" | "=") {
                    return Err(err(n, eq.column, "expected: gajd <name> = {..} ..".into()));
                }
                if self.file.constraint(name.text).is_some() {
                    return Err(err(
                        n,
                        name.column,
                        format!("duplicate constraint name {}", name.text),
                    ));
                }
                let (edges, tail) = self.edges(n, &rest[2..])?;
                if let Some(t) = tail.first() {
                    return Err(err(n, t.column, format!("unexpected {}", t.text)));
                }
                if edges.is_empty() {
                    return Err(err(
                        n,
                        name.column,
                        format!("constraint {} has no edges", name.text),
                    ));
                }
                let g = self.gajd(n, name.column, edges)?;
                self.file.constraints.push((name.text.to_string(), g));
            }
            "query" => {
                self.require_attrs(n, head)?;
                let (edges, tail) = self.edges(n, rest)?;
                if edges.is_empty() {
                    return Err(err(n, head.column, "empty query".into()));
                }
                let target = self.gajd(n, head.column, edges)?;
                let mut given = Vec::new();
                if let Some((kw, names)) = tail.split_first() {
                    if kw.text != "given" {
                        return Err(err(
                            n,
                            kw.column,
                            format!("expected given, found {}", kw.text),
                        ));
                    }
                    for t in names {
                        if self.file.constraint(t.text).is_none() {
                            return Err(err(n, t.column, format!("unknown constraint {}", t.text)));
                        }
                        given.push(t.text.to_string());
                    }
                }
                self.file.queries.push(Query { target, given });
            }
            other => return Err(err(n, head.column, format!("unknown directive {other}"))),
        }
        Ok(())
    }
}

fn err(line: usize, column: usize, message: String) -> ParseError {
    ParseError {
        line,
        column,
        message,
    }
}

pub fn parse(text: &str) -> Result<ProblemFile, ParseError> {
    let mut p = Parser {
        file: ProblemFile {
            attrs: Vec::new(),
            domains: BTreeMap::new(),
            constraints: Vec::new(),
            queries: Vec::new(),
        },
        declared: false,
    };
    let mut last = 0;
    for (i, line) in text.lines().enumerate() {
        last = i + 1;
        p.line(i + 1, &tokenize(line))?;
    }
    if !p.declared {
        return Err(err(last.max(1), 1, "no attrs declaration".into()));
    }
    Ok(p.file)
}

fn edges_string(g: &Gajd) -> String {
    g.hypergraph().to_string()
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::from("attrs");
        for a in &self.attrs {
            let _ = write!(s, " {a}");
        }
        writeln!(f, "{s}")?;
        for (a, n) in &self.domains {
            writeln!(f, "domain {a} {n}")?;
        }
        for (name, g) in &self.constraints {
            writeln!(f, "gajd {name} = {}", edges_string(g))?;
        }
        for q in &self.queries {
            write!(f, "query {}", edges_string(&q.target))?;
            if !q.given.is_empty() {
                write!(f, " given {}", q.given.join(" "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = "\
# two constraints that together give the chain
attrs A1 A2 A3 A4
gajd C1 = {A1 A2} {A2 A3 A4}
gajd C2 = {A1 A2 A3} {A3 A4}   # second
query {A1 A2} {A2 A3} {A3 A4} given C1 C2
";

    fn parse_err(text: &str) -> ParseError {
        parse(text).unwrap_err()
    }

    #[test]
    fn parses_two_constraints_and_a_query() {
        let p = parse(CHAIN).unwrap();
        assert_eq!(p.attrs.len(), 4);
        assert_eq!(p.constraints.len(), 2);
        assert_eq!(p.queries.len(), 1);
        assert_eq!(p.queries[0].given, ["C1", "C2"]);
        assert_eq!(p.given(&p.queries[0]).len(), 2);
    }

    #[test]
    fn round_trip() {
        let p = parse(CHAIN).unwrap();
        let text = p.to_string();
        assert_eq!(parse(&text).unwrap(), p);
        assert_eq!(
            text,
            "attrs A1 A2 A3 A4\ngajd C1 = {A1 A2} {A2 A3 A4}\ngajd C2 = {A1 A2 A3} {A3 A4}\nquery {A1 A2} {A2 A3} {A3 A4} given C1 C2\n"
        );
        let q = parse("attrs A B\ndomain B 3\nquery {A} {B}\n").unwrap();
        assert_eq!(parse(&q.to_string()).unwrap(), q);
        assert_eq!(q.domain_spec().size(&Attribute::new("B").unwrap()), Some(3));
        assert_eq!(q.domain_spec().size(&Attribute::new("A").unwrap()), Some(2));
    }

    #[test]
    fn cyclic_constraint_names_the_witness() {
        let e = parse_err("attrs A B C\ngajd C = {A B} {B C} {C A}\n");
        assert_eq!(e.line, 2);
        assert_eq!(e.column, 6);
        assert!(e.message.contains("not a hypertree"), "{e}");
        assert!(e.message.contains("{A B} {B C} {A C}"), "{e}");
    }

    #[test]
    fn error_positions() {
        assert_eq!(parse_err("").message, "no attrs declaration");
        assert_eq!(parse_err("# nothing\n").message, "no attrs declaration");
        let e = parse_err("attrs A B\nquery {A Z} {B}\n");
        assert_eq!((e.line, e.column), (2, 10));
        assert_eq!(e.message, "unknown attribute Z");
        let e = parse_err("attrs A B\ngajd C = {A B}\ngajd C = {A B}\n");
        assert_eq!((e.line, e.column), (3, 6));
        assert!(e.message.contains("duplicate constraint name"));
        assert_eq!(parse_err("attrs A B\nquery given\n").message, "empty query");
        assert_eq!(
            parse_err("attrs A B\nquery {A B} given X\n").message,
            "unknown constraint X"
        );
        assert!(parse_err("gajd C = {A}\n")
            .message
            .contains("before the attrs"));
        assert!(parse_err("attrs A B\nquery {A}\n")
            .message
            .contains("edges cover"));
        assert!(parse_err("attrs A B\nquery {A} {}\n")
            .message
            .contains("empty edge"));
        assert!(parse_err("attrs A B\nquery {A B\n")
            .message
            .contains("unclosed"));
        assert!(parse_err("attrs A B\ndomain A 0\n")
            .message
            .contains("bad domain size"));
        assert!(parse_err("attrs A A\n").message.contains("declared twice"));
        assert!(parse_err("attrs A\nfrobnicate\n")
            .message
            .contains("unknown directive"));
        assert!(parse_err("attrs A B\nquery {A B} {A B}\n")
            .message
            .contains("identical"));
    }
}
