//! A small CSS selector subset: type, `*`, `.class`, `#id`,
//! `:nth-child(n|odd|even)`, descendant and child combinators, and
//! comma-separated selector lists.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dom::{DocumentTree, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid selector `{selector}`: {reason}")]
pub struct SelectorError {
    pub selector: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NthChild {
    Index(usize),
    Odd,
    Even,
}

impl NthChild {
    fn matches(self, one_based: usize) -> bool {
        match self {
            NthChild::Index(n) => one_based == n,
            NthChild::Odd => one_based % 2 == 1,
            NthChild::Even => one_based % 2 == 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Compound {
    tag: Option<String>,
    id: Option<String>,
    classes: Vec<String>,
    nth: Vec<NthChild>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Combinator {
    Descendant,
    Child,
}

/// One complex selector, stored right-to-left: `parts[0]` is the subject.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Complex {
    parts: Vec<(Compound, Option<Combinator>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    source: String,
    alternatives: Vec<Complex>,
}

impl Selector {
    pub fn parse(source: &str) -> Result<Selector, SelectorError> {
        let err = |reason| SelectorError { selector: source.to_string(), reason };
        let mut alternatives = Vec::new();
        for alt in source.split(',') {
            alternatives.push(parse_complex(alt).map_err(err)?);
        }
        Ok(Selector { source: source.to_string(), alternatives })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn matches(&self, doc: &DocumentTree, node: NodeId) -> bool {
        doc.element(node).is_some() && self.alternatives.iter().any(|c| matches_complex(doc, node, &c.parts))
    }

    /// All matching elements below `scope` (inclusive), in document order.
    pub fn select(&self, doc: &DocumentTree, scope: NodeId) -> Vec<NodeId> {
        doc.descendants(scope).filter(|&n| self.matches(doc, n)).collect()
    }
}

impl FromStr for Selector {
    type Err = SelectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Selector::parse(s)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_' || !c.is_ascii()
}

fn take_ident(s: &str) -> (&str, &str) {
    let end = s.find(|c: char| !is_ident_char(c)).unwrap_or(s.len());
    s.split_at(end)
}

fn parse_complex(src: &str) -> Result<Complex, &'static str> {
    let mut compounds = Vec::new();
    let mut combinators = Vec::new();
    let mut rest = src.trim();
    if rest.is_empty() {
        return Err("empty selector");
    }
    loop {
        let (compound, after) = parse_compound(rest)?;
        compounds.push(compound);
        let trimmed = after.trim_start();
        if trimmed.is_empty() {
            break;
        }
        if let Some(t) = trimmed.strip_prefix('>') {
            combinators.push(Combinator::Child);
            rest = t.trim_start();
            if rest.is_empty() {
                return Err("dangling combinator");
            }
        } else if trimmed.len() < after.len() {
            combinators.push(Combinator::Descendant);
            rest = trimmed;
        } else {
            return Err("unexpected character");
        }
    }
    // Right-to-left: each entry carries the combinator towards its ancestor side.
    let mut parts = Vec::with_capacity(compounds.len());
    while let Some(c) = compounds.pop() {
        parts.push((c, combinators.pop()));
    }
    Ok(Complex { parts })
}

fn parse_compound(mut s: &str) -> Result<(Compound, &str), &'static str> {
    let mut c = Compound::default();
    let mut any = false;
    if let Some(r) = s.strip_prefix('*') {
        s = r;
        any = true;
    } else {
        let (tag, r) = take_ident(s);
        if !tag.is_empty() {
            c.tag = Some(tag.to_ascii_lowercase());
            s = r;
            any = true;
        }
    }
    loop {
        if let Some(r) = s.strip_prefix('.') {
            let (name, r) = take_ident(r);
            if name.is_empty() {
                return Err("empty class name");
            }
            c.classes.push(name.to_string());
            s = r;
        } else if let Some(r) = s.strip_prefix('#') {
            let (name, r) = take_ident(r);
            if name.is_empty() {
                return Err("empty id");
            }
            c.id = Some(name.to_string());
            s = r;
        } else if let Some(r) = s.strip_prefix(':') {
            let (name, r) = take_ident(r);
            if !name.eq_ignore_ascii_case("nth-child") {
                return Err("unsupported pseudo-class");
            }
            let r = r.strip_prefix('(').ok_or("expected `(`")?;
            let close = r.find(')').ok_or("unclosed `(`")?;
            let arg = r[..close].trim();
            let nth = match arg {
                "odd" => NthChild::Odd,
                "even" => NthChild::Even,
                _ => match arg.parse::<usize>() {
                    Ok(n) if n > 0 => NthChild::Index(n),
                    _ => return Err("unsupported :nth-child argument"),
                },
            };
            c.nth.push(nth);
            s = &r[close + 1..];
        } else {
            break;
        }
        any = true;
    }
    if !any {
        return Err("expected a simple selector");
    }
    Ok((c, s))
}

fn matches_compound(doc: &DocumentTree, node: NodeId, c: &Compound) -> bool {
    let Some(el) = doc.element(node) else { return false };
    if let Some(tag) = &c.tag {
        if el.tag != *tag {
            return false;
        }
    }
    if let Some(id) = &c.id {
        if el.attr("id") != Some(id.as_str()) {
            return false;
        }
    }
    if !c.classes.iter().all(|cls| el.has_class(cls)) {
        return false;
    }
    if !c.nth.is_empty() {
        let position = doc.element_index(node) + 1;
        if doc.parent(node).is_none() || !c.nth.iter().all(|n| n.matches(position)) {
            return false;
        }
    }
    true
}

fn matches_complex(doc: &DocumentTree, node: NodeId, parts: &[(Compound, Option<Combinator>)]) -> bool {
    let Some(((subject, comb), rest)) = parts.split_first() else { return true };
    if !matches_compound(doc, node, subject) {
        return false;
    }
    let Some(comb) = comb else { return true };
    match comb {
        Combinator::Child => doc.parent(node).is_some_and(|p| matches_complex(doc, p, rest)),
        Combinator::Descendant => {
            let mut cur = doc.parent(node);
            while let Some(p) = cur {
                if matches_complex(doc, p, rest) {
                    return true;
                }
                cur = doc.parent(p);
            }
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"<div id="side"><ul class="menu a"><li class="item">1</li><li class="item x">2</li></ul>
<nav><ul class="menu"><li class="item">3</li></ul></nav></div><p class="item">4</p>"#;

    fn texts(doc: &DocumentTree, sel: &str) -> Vec<String> {
        let s = Selector::parse(sel).unwrap();
        s.select(doc, doc.root()).into_iter().map(|n| doc.text_content(n)).collect()
    }

    #[test]
    fn simple_and_compound() {
        let doc = DocumentTree::parse(DOC);
        assert_eq!(texts(&doc, ".item"), ["1", "2", "3", "4"]);
        assert_eq!(texts(&doc, "li.item.x"), ["2"]);
        assert_eq!(texts(&doc, "p"), ["4"]);
        assert_eq!(texts(&doc, "*.x"), ["2"]);
    }

    #[test]
    fn combinators() {
        let doc = DocumentTree::parse(DOC);
        assert_eq!(texts(&doc, ".menu .item"), ["1", "2", "3"]);
        assert_eq!(texts(&doc, "#side > ul > li"), ["1", "2"]);
        assert_eq!(texts(&doc, "#side>ul>li"), ["1", "2"]);
        assert_eq!(texts(&doc, "div nav li"), ["3"]);
        assert_eq!(texts(&doc, "nav > li"), Vec::<String>::new());
    }

    #[test]
    fn nth_child_and_lists() {
        let doc = DocumentTree::parse(DOC);
        assert_eq!(texts(&doc, "li:nth-child(2)"), ["2"]);
        assert_eq!(texts(&doc, "li:nth-child(odd)"), ["1", "3"]);
        assert_eq!(texts(&doc, "nav li, p"), ["3", "4"]);
    }

    #[test]
    fn invalid_selectors() {
        for bad in ["", " ", ".", "#", "ul >", "a:hover", "li:nth-child(0)", "li:nth-child(2", "a[href]", "a,", "> a"] {
            assert!(Selector::parse(bad).is_err(), "{bad:?} should be rejected");
        }
    }
}
