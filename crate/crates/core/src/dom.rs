//! Lossless, error-tolerant HTML document tree.
//!
//! Every token of the source is kept verbatim, so serializing an unmodified
//! tree reproduces the input byte for byte. Elements whose attributes are
//! edited are re-rendered from their attribute list; everything else keeps
//! its original bytes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Index of a node inside its [`DocumentTree`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

/// Tag given to the synthetic root node that holds top-level content.
pub const ROOT_TAG: &str = "document";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    /// Entity-decoded value. Valueless attributes have an empty value.
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub tag: String,
    pub attrs: Vec<Attribute>,
    raw_start: Option<String>,
    raw_end: Option<String>,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|a| a.name == name).map(|a| a.value.as_str())
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.attr("class").unwrap_or("").split_ascii_whitespace()
    }

    pub fn has_class(&self, token: &str) -> bool {
        self.classes().any(|c| c == token)
    }

    /// Whether the start tag still carries its source bytes.
    pub fn is_pristine(&self) -> bool {
        self.raw_start.is_some()
    }

    fn set_attr(&mut self, name: &str, value: String) {
        match self.attrs.iter_mut().find(|a| a.name == name) {
            Some(a) => a.value = value,
            None => self.attrs.push(Attribute { name: name.to_string(), value }),
        }
        self.raw_start = None;
    }

    fn write_start(&self, out: &mut String) {
        if let Some(raw) = &self.raw_start {
            out.push_str(raw);
            return;
        }
        out.push('<');
        out.push_str(&self.tag);
        for a in &self.attrs {
            out.push(' ');
            out.push_str(&a.name);
            out.push_str("=\"");
            escape_attr(&a.value, out);
            out.push('"');
        }
        out.push('>');
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Root,
    Element(Element),
    /// Character data, kept undecoded.
    Text(String),
    Comment(String),
    /// Doctype, processing instructions and stray end tags, kept verbatim.
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

impl Node {
    pub fn as_element(&self) -> Option<&Element> {
        match &self.kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    /// Tag name for elements, [`ROOT_TAG`] for the root.
    pub fn tag(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Root => Some(ROOT_TAG),
            NodeKind::Element(e) => Some(&e.tag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTree {
    nodes: Vec<Node>,
    adapted: bool,
}

impl Default for DocumentTree {
    fn default() -> Self {
        DocumentTree {
            nodes: alloc::vec![Node { kind: NodeKind::Root, parent: None, children: Vec::new() }],
            adapted: false,
        }
    }
}

impl DocumentTree {
    /// Parses HTML text. Never fails: malformed markup is recovered.
    pub fn parse(html: &str) -> DocumentTree {
        TreeBuilder::new().build(html)
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes[0].children.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn get(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }

    pub fn element(&self, id: NodeId) -> Option<&Element> {
        self.get(id).and_then(Node::as_element)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    /// Element children (the root counts as an element for this purpose).
    pub fn element_children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[id.0].children.iter().copied().filter(move |c| self.nodes[c.0].as_element().is_some())
    }

    /// Position of `id` among the element children of its parent.
    pub fn element_index(&self, id: NodeId) -> usize {
        match self.parent(id) {
            Some(p) => self.element_children(p).position(|c| c == id).unwrap_or(0),
            None => 0,
        }
    }

    /// Pre-order traversal of `id` and everything below it.
    pub fn descendants(&self, id: NodeId) -> Descendants<'_> {
        Descendants { doc: self, stack: alloc::vec![id] }
    }

    /// Whether `id` is still reachable from the root.
    pub fn is_attached(&self, id: NodeId) -> bool {
        let mut cur = id;
        loop {
            if cur == self.root() {
                return true;
            }
            match self.nodes.get(cur.0).and_then(|n| n.parent) {
                Some(p) if self.nodes[p.0].children.contains(&cur) => cur = p,
                _ => return false,
            }
        }
    }

    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        let mut cur = self.parent(node);
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.parent(p);
        }
        false
    }

    /// Decoded text below `id`, whitespace-collapsed and trimmed. Script and
    /// style contents are skipped.
    pub fn text_content(&self, id: NodeId) -> String {
        let mut raw = String::new();
        self.collect_text(id, &mut raw);
        let mut out = String::with_capacity(raw.len());
        for word in raw.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(word);
        }
        out
    }

    fn collect_text(&self, id: NodeId, out: &mut String) {
        let node = &self.nodes[id.0];
        match &node.kind {
            NodeKind::Text(t) => {
                out.push_str(&decode_entities(t));
                return;
            }
            NodeKind::Element(e) if is_raw_text(&e.tag) => return,
            NodeKind::Element(_) | NodeKind::Root => {}
            _ => return,
        }
        for &c in &node.children {
            self.collect_text(c, out);
        }
    }

    /// Serializes the tree. Unmodified regions are emitted verbatim.
    pub fn to_html(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root(), &mut out);
        out
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        let node = &self.nodes[id.0];
        match &node.kind {
            NodeKind::Root => {}
            NodeKind::Element(e) => e.write_start(out),
            NodeKind::Text(s) | NodeKind::Comment(s) | NodeKind::Other(s) => out.push_str(s),
        }
        for &c in &node.children {
            self.write_node(c, out);
        }
        if let NodeKind::Element(e) = &node.kind {
            if let Some(end) = &e.raw_end {
                out.push_str(end);
            }
        }
    }

    pub(crate) fn is_adapted(&self) -> bool {
        self.adapted
    }

    pub(crate) fn set_adapted(&mut self, adapted: bool) {
        self.adapted = adapted;
    }

    pub(crate) fn element_mut(&mut self, id: NodeId) -> Option<&mut Element> {
        match &mut self.nodes.get_mut(id.0)?.kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    /// Adds a class token. Returns false when the token was already present.
    pub(crate) fn add_class(&mut self, id: NodeId, token: &str) -> bool {
        let Some(el) = self.element_mut(id) else { return false };
        if el.has_class(token) {
            return false;
        }
        let mut class = el.attr("class").unwrap_or("").trim().to_string();
        if !class.is_empty() {
            class.push(' ');
        }
        class.push_str(token);
        el.set_attr("class", class);
        true
    }

    pub(crate) fn replace_element(&mut self, id: NodeId, el: Element) {
        if let Some(slot) = self.element_mut(id) {
            *slot = el;
        }
    }

    /// Removes `id` from its parent, returning the parent and former index.
    pub(crate) fn detach(&mut self, id: NodeId) -> Option<(NodeId, usize)> {
        let parent = self.nodes[id.0].parent?;
        let siblings = &mut self.nodes[parent.0].children;
        let index = siblings.iter().position(|&c| c == id)?;
        siblings.remove(index);
        self.nodes[id.0].parent = None;
        Some((parent, index))
    }

    pub(crate) fn insert_child(&mut self, parent: NodeId, index: usize, id: NodeId) {
        let siblings = &mut self.nodes[parent.0].children;
        let index = index.min(siblings.len());
        siblings.insert(index, id);
        self.nodes[id.0].parent = Some(parent);
    }

    fn push(&mut self, parent: NodeId, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { kind, parent: Some(parent), children: Vec::new() });
        self.nodes[parent.0].children.push(id);
        id
    }
}

impl fmt::Display for DocumentTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_html())
    }
}

pub struct Descendants<'a> {
    doc: &'a DocumentTree,
    stack: Vec<NodeId>,
}

impl Iterator for Descendants<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let id = self.stack.pop()?;
        self.stack.extend(self.doc.nodes[id.0].children.iter().rev().copied());
        Some(id)
    }
}

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr",
];

// Elements whose start tag implicitly closes an open <p>.
const CLOSES_P: &[&str] = &[
    "address", "article", "aside", "blockquote", "details", "div", "dl", "fieldset", "figcaption", "figure", "footer",
    "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "menu", "nav", "ol", "p", "pre", "section",
    "table", "ul",
];

fn is_void(tag: &str) -> bool {
    VOID_ELEMENTS.contains(&tag)
}

fn is_raw_text(tag: &str) -> bool {
    matches!(tag, "script" | "style" | "textarea" | "title" | "xmp" | "noscript")
}

struct TreeBuilder {
    doc: DocumentTree,
    open: Vec<NodeId>,
}

impl TreeBuilder {
    fn new() -> Self {
        TreeBuilder { doc: DocumentTree::default(), open: alloc::vec![NodeId(0)] }
    }

    fn current(&self) -> NodeId {
        *self.open.last().expect("root is never popped")
    }

    fn open_tag(&self, i: usize) -> &str {
        self.doc.nodes[self.open[i].0].tag().unwrap_or("")
    }

    /// Closes open elements up to and including the nearest `targets` element,
    /// unless a `boundary` element is hit first.
    fn close_in_scope(&mut self, targets: &[&str], boundary: &[&str]) {
        for i in (1..self.open.len()).rev() {
            let tag = self.open_tag(i);
            if targets.contains(&tag) {
                self.open.truncate(i);
                return;
            }
            if boundary.contains(&tag) {
                return;
            }
        }
    }

    fn in_foreign_content(&self) -> bool {
        (1..self.open.len()).any(|i| matches!(self.open_tag(i), "svg" | "math"))
    }

    fn start_tag(&mut self, tag: String, attrs: Vec<Attribute>, raw: &str, self_closing: bool) {
        const LIST_BOUNDARY: &[&str] = &["ul", "ol", "menu", "table", "div", "nav"];
        const CELL_BOUNDARY: &[&str] = &["table"];
        match tag.as_str() {
            "li" => self.close_in_scope(&["li"], LIST_BOUNDARY),
            "dt" | "dd" => self.close_in_scope(&["dt", "dd"], &["dl", "table"]),
            "option" => self.close_in_scope(&["option"], &["select", "datalist", "optgroup"]),
            "optgroup" => self.close_in_scope(&["option", "optgroup"], &["select"]),
            "tr" => self.close_in_scope(&["tr"], &["table", "tbody", "thead", "tfoot"]),
            "td" | "th" => self.close_in_scope(&["td", "th"], &["tr", "table"]),
            "tbody" | "thead" | "tfoot" => self.close_in_scope(&["tbody", "thead", "tfoot"], CELL_BOUNDARY),
            _ => {}
        }
        if CLOSES_P.contains(&tag.as_str()) {
            self.close_in_scope(&["p"], &["button", "table", "td", "th"]);
        }
        let closes_now = is_void(&tag) || (self_closing && self.in_foreign_content()) || (self_closing && tag == "svg");
        let parent = self.current();
        let id = self.doc.push(
            parent,
            NodeKind::Element(Element { tag, attrs, raw_start: Some(raw.to_string()), raw_end: None }),
        );
        if !closes_now {
            self.open.push(id);
        }
    }

    fn end_tag(&mut self, tag: &str, raw: &str) {
        let found = (1..self.open.len()).rev().find(|&i| self.open_tag(i) == tag);
        match found {
            Some(i) => {
                let id = self.open[i];
                if let NodeKind::Element(e) = &mut self.doc.nodes[id.0].kind {
                    e.raw_end = Some(raw.to_string());
                }
                self.open.truncate(i);
            }
            None => {
                let parent = self.current();
                self.doc.push(parent, NodeKind::Other(raw.to_string()));
            }
        }
    }

    fn text(&mut self, raw: &str) {
        if raw.is_empty() {
            return;
        }
        let parent = self.current();
        // Adjacent text (e.g. a stray '<') merges into one node.
        if let Some(&last) = self.doc.nodes[parent.0].children.last() {
            if let NodeKind::Text(t) = &mut self.doc.nodes[last.0].kind {
                t.push_str(raw);
                return;
            }
        }
        self.doc.push(parent, NodeKind::Text(raw.to_string()));
    }

    fn build(mut self, html: &str) -> DocumentTree {
        let bytes = html.as_bytes();
        let mut pos = 0;
        let mut text_start = 0;
        while pos < bytes.len() {
            if bytes[pos] != b'<' {
                pos += 1;
                continue;
            }
            let rest = &html[pos..];
            let token = if rest.starts_with("<!--") {
                let end = rest[4..].find("-->").map(|i| i + 7).unwrap_or(rest.len());
                Some((Token::Comment, end))
            } else if rest.starts_with("<!") || rest.starts_with("<?") {
                let end = rest.find('>').map(|i| i + 1).unwrap_or(rest.len());
                Some((Token::Other, end))
            } else if rest.starts_with("</") && rest[2..].starts_with(|c: char| c.is_ascii_alphabetic()) {
                let end = rest.find('>').map(|i| i + 1);
                end.map(|e| (Token::End, e))
            } else if rest[1..].starts_with(|c: char| c.is_ascii_alphabetic()) {
                scan_start_tag(rest).map(|e| (Token::Start, e))
            } else {
                None
            };
            let Some((kind, len)) = token else {
                pos += 1;
                continue;
            };
            self.text(&html[text_start..pos]);
            let raw = &html[pos..pos + len];
            pos += len;
            match kind {
                Token::Comment => {
                    let parent = self.current();
                    self.doc.push(parent, NodeKind::Comment(raw.to_string()));
                }
                Token::Other => {
                    let parent = self.current();
                    self.doc.push(parent, NodeKind::Other(raw.to_string()));
                }
                Token::End => {
                    let name = tag_name(&raw[2..]);
                    self.end_tag(&name, raw);
                }
                Token::Start => {
                    let (name, attrs, self_closing) = parse_start_tag(raw);
                    let raw_text = is_raw_text(&name) && !self_closing;
                    let close = alloc::format!("</{}", name);
                    self.start_tag(name, attrs, raw, self_closing);
                    if raw_text {
                        // Everything up to the matching end tag is character data.
                        let body_end = find_ascii_ci(&html[pos..], &close).map(|i| pos + i).unwrap_or(html.len());
                        self.text(&html[pos..body_end]);
                        pos = body_end;
                    }
                }
            }
            text_start = pos;
        }
        self.text(&html[text_start..]);
        self.doc
    }
}

enum Token {
    Comment,
    Other,
    End,
    Start,
}

fn tag_name(s: &str) -> String {
    s.chars()
        .take_while(|c| !c.is_ascii_whitespace() && *c != '/' && *c != '>')
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Length of the start tag at the beginning of `s`, honoring quoted values.
fn scan_start_tag(s: &str) -> Option<usize> {
    let mut quote: Option<u8> = None;
    for (i, b) in s.bytes().enumerate().skip(1) {
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => {
                // Quotes only open a value right after '='.
                let prev = s.as_bytes()[..i].iter().rev().find(|c| !c.is_ascii_whitespace());
                if prev == Some(&b'=') {
                    quote = Some(b);
                }
            }
            None if b == b'>' => return Some(i + 1),
            None => {}
        }
    }
    None
}

fn parse_start_tag(raw: &str) -> (String, Vec<Attribute>, bool) {
    let inner = &raw[1..raw.len() - 1];
    let name = tag_name(inner);
    let mut rest = &inner[name.len()..];
    let self_closing = inner.trim_end().ends_with('/');
    let mut attrs: Vec<Attribute> = Vec::new();
    loop {
        rest = rest.trim_start_matches(|c: char| c.is_ascii_whitespace() || c == '/');
        if rest.is_empty() {
            break;
        }
        let name_len = rest.find(|c: char| c.is_ascii_whitespace() || c == '=' || c == '>' || c == '/').unwrap_or(rest.len());
        let name_len = if name_len == 0 { rest.chars().next().map_or(1, char::len_utf8) } else { name_len };
        let attr_name = rest[..name_len].to_ascii_lowercase();
        rest = rest[name_len..].trim_start();
        let mut value = String::new();
        if let Some(after_eq) = rest.strip_prefix('=') {
            let after_eq = after_eq.trim_start();
            match after_eq.chars().next() {
                Some(q @ ('"' | '\'')) => {
                    let body = &after_eq[1..];
                    let end = body.find(q).unwrap_or(body.len());
                    value = decode_entities(&body[..end]);
                    rest = body.get(end + 1..).unwrap_or("");
                }
                _ => {
                    let end = after_eq.find(|c: char| c.is_ascii_whitespace() || c == '>').unwrap_or(after_eq.len());
                    value = decode_entities(&after_eq[..end]);
                    rest = &after_eq[end..];
                }
            }
        }
        // First occurrence wins for duplicate attributes.
        if !attrs.iter().any(|a| a.name == attr_name) {
            attrs.push(Attribute { name: attr_name, value });
        }
    }
    (name, attrs, self_closing)
}

fn find_ascii_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

fn escape_attr(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

const NAMED_ENTITIES: &[(&str, char)] = &[
    ("amp", '&'),
    ("lt", '<'),
    ("gt", '>'),
    ("quot", '"'),
    ("apos", '\''),
    ("nbsp", '\u{a0}'),
    ("ndash", '\u{2013}'),
    ("mdash", '\u{2014}'),
    ("hellip", '\u{2026}'),
    ("copy", '\u{a9}'),
    ("reg", '\u{ae}'),
    ("laquo", '\u{ab}'),
    ("raquo", '\u{bb}'),
    ("middot", '\u{b7}'),
];

/// Decodes character references. Unknown references are left untouched.
pub fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let Some(semi) = rest[1..].find(';').map(|j| j + 1).filter(|&j| j <= 12) else {
            out.push('&');
            rest = &rest[1..];
            continue;
        };
        let name = &rest[1..semi];
        let decoded = if let Some(num) = name.strip_prefix('#') {
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok(),
                None => num.parse::<u32>().ok(),
            };
            code.and_then(char::from_u32)
        } else {
            NAMED_ENTITIES.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
        };
        match decoded {
            Some(c) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}
