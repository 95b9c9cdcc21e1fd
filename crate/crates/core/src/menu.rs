//! Menu abstraction: menus, groups and items extracted from a document via
//! selectors, each keyed by a structural [`ElementId`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dom::{DocumentTree, NodeId};
use crate::selector::{Selector, SelectorError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MenuError {
    #[error(transparent)]
    InvalidSelector(#[from] SelectorError),
    #[error("menu selector `{0}` matched nothing")]
    NoMenuMatched(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed element id `{0}`")]
pub struct ParseElementIdError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub tag: String,
    pub id_attr: Option<String>,
    pub sibling_index: usize,
}

/// Structural identifier of an element: a path of steps from the nearest
/// ancestor-or-self carrying a document-unique `id` (or from the root).
///
/// The canonical string form joins steps with `>`, each rendered as
/// `tag#id:index` (`#id` omitted when absent), e.g. `ul#nav:0>li:2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId {
    pub path: Vec<Step>,
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            f.write_str(&step.tag)?;
            if let Some(id) = &step.id_attr {
                f.write_str("#")?;
                for c in id.chars() {
                    match c {
                        '%' => f.write_str("%25")?,
                        '>' => f.write_str("%3E")?,
                        _ => fmt::Write::write_char(f, c)?,
                    }
                }
            }
            write!(f, ":{}", step.sibling_index)?;
        }
        Ok(())
    }
}

fn unescape_id(s: &str) -> String {
    s.replace("%3E", ">").replace("%3e", ">").replace("%25", "%")
}

impl FromStr for ElementId {
    type Err = ParseElementIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseElementIdError(s.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        let mut path = Vec::new();
        for raw in s.split('>') {
            let (head, index) = raw.rsplit_once(':').ok_or_else(bad)?;
            let sibling_index = index.parse::<usize>().map_err(|_| bad())?;
            let (tag, id_attr) = match head.split_once('#') {
                Some((t, id)) => (t, Some(unescape_id(id))),
                None => (head, None),
            };
            if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == ':') {
                return Err(bad());
            }
            path.push(Step { tag: tag.to_string(), id_attr, sibling_index });
        }
        Ok(ElementId { path })
    }
}

impl Serialize for ElementId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ElementId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A page, identified by its normalized URL path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct PageId(String);

impl<'de> Deserialize<'de> for PageId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(PageId::new(&s))
    }
}

impl PageId {
    /// Normalizes a path-like string: query and fragment stripped, dot
    /// segments resolved, trailing slash removed, leading slash ensured.
    pub fn new(path: &str) -> PageId {
        let path = strip_query_fragment(path);
        normalize_absolute(path)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Resolves a link target against this page. Returns `None` for links
    /// that do not name a web page (`mailto:`, `javascript:`, ...).
    pub fn resolve(&self, href: &str) -> Option<PageId> {
        let href = href.trim();
        let mut rest = href;
        if let Some(colon) = href.find(':') {
            let scheme = &href[..colon];
            if !scheme.is_empty() && scheme.chars().all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c)) {
                if !(scheme.eq_ignore_ascii_case("http") || scheme.eq_ignore_ascii_case("https")) {
                    return None;
                }
                rest = &href[colon + 1..];
            }
        }
        if let Some(after) = rest.strip_prefix("//") {
            let end = after.find(['/', '?', '#']).unwrap_or(after.len());
            let path = &after[end..];
            let path = strip_query_fragment(path);
            return Some(normalize_absolute(path));
        }
        let path = strip_query_fragment(rest);
        if path.is_empty() {
            return Some(self.clone());
        }
        if path.starts_with('/') {
            return Some(normalize_absolute(path));
        }
        let base = match self.0.rfind('/') {
            Some(i) => &self.0[..=i],
            None => "/",
        };
        let mut joined = String::from(base);
        joined.push_str(path);
        Some(normalize_absolute(&joined))
    }
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PageId {
    fn from(s: &str) -> Self {
        PageId::new(s)
    }
}

fn strip_query_fragment(s: &str) -> &str {
    let end = s.find(['?', '#']).unwrap_or(s.len());
    &s[..end]
}

fn normalize_absolute(path: &str) -> PageId {
    let mut segments: Vec<&str> = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                segments.pop();
            }
            s => segments.push(s),
        }
    }
    let mut out = String::with_capacity(path.len() + 1);
    for seg in &segments {
        out.push('/');
        out.push_str(seg);
    }
    if out.is_empty() {
        out.push('/');
    }
    PageId(out)
}

/// Selectors locating one family of menus in a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorSet {
    pub menu: Selector,
    pub group: Option<Selector>,
    pub item: Selector,
}

impl SelectorSet {
    pub fn new(menu: &str, group: Option<&str>, item: &str) -> Result<SelectorSet, SelectorError> {
        Ok(SelectorSet { menu: menu.parse()?, group: group.map(str::parse).transpose()?, item: item.parse()? })
    }
}

#[derive(Serialize, Deserialize)]
struct SelectorSetRepr {
    menu: String,
    group: Option<String>,
    item: String,
}

impl Serialize for SelectorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SelectorSetRepr {
            menu: self.menu.as_str().to_string(),
            group: self.group.as_ref().map(|g| g.as_str().to_string()),
            item: self.item.as_str().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SelectorSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = SelectorSetRepr::deserialize(deserializer)?;
        SelectorSet::new(&r.menu, r.group.as_deref(), &r.item).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Item {
    pub id: ElementId,
    pub label: String,
    pub page_target: Option<PageId>,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub id: ElementId,
    pub node: NodeId,
    /// True for the synthetic group of a menu without explicit groups; its
    /// id and node are the menu's own.
    pub implicit: bool,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Menu {
    pub id: ElementId,
    pub node: NodeId,
    pub groups: Vec<Group>,
}

impl Menu {
    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.groups.iter().flat_map(|g| g.items.iter())
    }

    pub fn item_count(&self) -> usize {
        self.groups.iter().map(|g| g.items.len()).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MenuModel {
    pub menus: Vec<Menu>,
}

impl MenuModel {
    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.menus.iter().flat_map(Menu::items)
    }

    pub fn item(&self, id: &ElementId) -> Option<&Item> {
        self.items().find(|i| i.id == *id)
    }

    pub fn item_count(&self) -> usize {
        self.menus.iter().map(Menu::item_count).sum()
    }

    /// Document node bound to a menu, group or item id at extraction time.
    pub fn node_of(&self, id: &ElementId) -> Option<NodeId> {
        for menu in &self.menus {
            if menu.id == *id {
                return Some(menu.node);
            }
            for group in &menu.groups {
                if group.id == *id {
                    return Some(group.node);
                }
                if let Some(item) = group.items.iter().find(|i| i.id == *id) {
                    return Some(item.node);
                }
            }
        }
        None
    }

    /// The item whose node is `node` or contains it.
    pub fn item_containing(&self, doc: &DocumentTree, node: NodeId) -> Option<&Item> {
        let mut cur = Some(node);
        while let Some(n) = cur {
            if let Some(item) = self.items().find(|i| i.node == n) {
                return Some(item);
            }
            cur = doc.parent(n);
        }
        None
    }

    /// Canonical JSON form, used to compare extractions.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("menu model serializes")
    }

    fn merge(&mut self, other: MenuModel) {
        let known: BTreeSet<NodeId> = self.menus.iter().map(|m| m.node).collect();
        self.menus.extend(other.menus.into_iter().filter(|m| !known.contains(&m.node)));
    }
}

/// Ids that occur exactly once in the document, usable as path anchors.
pub(crate) fn unique_ids(doc: &DocumentTree) -> BTreeSet<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for n in doc.descendants(doc.root()) {
        if let Some(id) = doc.element(n).and_then(|e| e.attr("id")) {
            if !id.is_empty() {
                *counts.entry(id).or_default() += 1;
            }
        }
    }
    counts.into_iter().filter(|&(_, c)| c == 1).map(|(id, _)| id.to_string()).collect()
}

/// Computes the [`ElementId`] of `node`.
pub fn compute_element_id(doc: &DocumentTree, node: NodeId) -> ElementId {
    element_id_with(doc, node, &unique_ids(doc))
}

fn element_id_with(doc: &DocumentTree, node: NodeId, anchors: &BTreeSet<String>) -> ElementId {
    let mut path = Vec::new();
    let mut cur = Some(node);
    while let Some(n) = cur {
        let Some(tag) = doc.node(n).tag() else { break };
        let id_attr = doc.element(n).and_then(|e| e.attr("id")).filter(|s| !s.is_empty()).map(str::to_string);
        let anchored = id_attr.as_ref().is_some_and(|id| anchors.contains(id));
        let sibling_index = if anchored { 0 } else { doc.element_index(n) };
        path.push(Step { tag: tag.to_string(), id_attr, sibling_index });
        if anchored {
            break;
        }
        cur = doc.parent(n);
    }
    path.reverse();
    ElementId { path }
}

fn nearest_marked(doc: &DocumentTree, node: NodeId, marked: &BTreeSet<NodeId>) -> Option<NodeId> {
    let mut cur = doc.parent(node);
    while let Some(p) = cur {
        if marked.contains(&p) {
            return Some(p);
        }
        cur = doc.parent(p);
    }
    None
}

/// Extracts the menus matched by one selector set. `page` is the page the
/// document was loaded from; relative links resolve against it.
pub fn extract_menus(doc: &DocumentTree, selectors: &SelectorSet, page: &PageId) -> Result<MenuModel, MenuError> {
    let root = doc.root();
    let menu_nodes = selectors.menu.select(doc, root);
    if menu_nodes.is_empty() {
        return Err(MenuError::NoMenuMatched(selectors.menu.as_str().to_string()));
    }
    let menu_set: BTreeSet<NodeId> = menu_nodes.iter().copied().collect();
    let item_nodes: Vec<NodeId> = selectors.item.select(doc, root);
    let item_set: BTreeSet<NodeId> = item_nodes.iter().copied().collect();
    let group_nodes: Vec<NodeId> = match &selectors.group {
        // Item selector wins when a node matches both.
        Some(g) => g.select(doc, root).into_iter().filter(|n| !item_set.contains(n)).collect(),
        None => Vec::new(),
    };
    let group_set: BTreeSet<NodeId> = group_nodes.iter().copied().collect();
    let anchors = unique_ids(doc);

    // menu node -> ordered explicit groups, plus items per group node.
    let mut groups_of: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &g in &group_nodes {
        if let Some(m) = nearest_marked(doc, g, &menu_set) {
            groups_of.entry(m).or_default().push(g);
        }
    }
    let mut items_of: BTreeMap<(NodeId, NodeId), Vec<NodeId>> = BTreeMap::new();
    for &i in &item_nodes {
        let Some(m) = nearest_marked(doc, i, &menu_set) else { continue };
        // Nearest group between the item and its menu.
        let mut group = m;
        let mut cur = doc.parent(i);
        while let Some(p) = cur {
            if p == m {
                break;
            }
            if group_set.contains(&p) && nearest_marked(doc, p, &menu_set) == Some(m) {
                group = p;
                break;
            }
            cur = doc.parent(p);
        }
        items_of.entry((m, group)).or_default().push(i);
    }

    let make_item = |n: NodeId| {
        let link = doc
            .descendants(n)
            .find_map(|d| doc.element(d).filter(|e| e.tag == "a").and_then(|e| e.attr("href")));
        Item {
            id: element_id_with(doc, n, &anchors),
            label: doc.text_content(n),
            page_target: link.and_then(|href| page.resolve(href)),
            node: n,
        }
    };

    let mut menus = Vec::with_capacity(menu_nodes.len());
    for &m in &menu_nodes {
        let menu_id = element_id_with(doc, m, &anchors);
        let mut groups: Vec<Group> = groups_of
            .get(&m)
            .into_iter()
            .flatten()
            .map(|&g| Group {
                id: element_id_with(doc, g, &anchors),
                node: g,
                implicit: false,
                items: items_of.get(&(m, g)).into_iter().flatten().copied().map(make_item).collect(),
            })
            .collect();
        let loose = items_of.get(&(m, m));
        if groups.is_empty() || loose.is_some() {
            groups.push(Group {
                id: menu_id.clone(),
                node: m,
                implicit: true,
                items: loose.into_iter().flatten().copied().map(make_item).collect(),
            });
        }
        menus.push(Menu { id: menu_id, node: m, groups });
    }
    Ok(MenuModel { menus })
}

/// Extracts menus for several selector sets, merging the results. Fails with
/// [`MenuError::NoMenuMatched`] only when no set matches anything.
pub fn extract_all(doc: &DocumentTree, sets: &[SelectorSet], page: &PageId) -> Result<MenuModel, MenuError> {
    let mut model = MenuModel::default();
    let mut last_miss = None;
    for set in sets {
        match extract_menus(doc, set, page) {
            Ok(m) => model.merge(m),
            Err(e @ MenuError::NoMenuMatched(_)) => last_miss = Some(e),
            Err(e) => return Err(e),
        }
    }
    if model.menus.is_empty() {
        return Err(last_miss.unwrap_or_else(|| MenuError::NoMenuMatched(String::new())));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn id(s: &str) -> ElementId {
        s.parse().unwrap()
    }

    #[test]
    fn element_id_of_root() {
        let doc = DocumentTree::parse("<p>x</p>");
        let eid = compute_element_id(&doc, doc.root());
        assert_eq!(eid.path.len(), 1);
        assert_eq!(eid.path[0].sibling_index, 0);
    }

    #[test]
    fn element_id_anchors_at_unique_id() {
        let doc = DocumentTree::parse(r#"<div><p>x</p><ul id="nav"><li>a</li><li>b</li><li>c</li></ul></div>"#);
        let ul = Selector::parse("#nav").unwrap().select(&doc, doc.root())[0];
        let third = doc.element_children(ul).nth(2).unwrap();
        let eid = compute_element_id(&doc, third);
        assert_eq!(
            eid.path,
            vec![
                Step { tag: "ul".into(), id_attr: Some("nav".into()), sibling_index: 0 },
                Step { tag: "li".into(), id_attr: None, sibling_index: 2 },
            ]
        );
        assert_eq!(eid.to_string(), "ul#nav:0>li:2");
    }

    #[test]
    fn duplicate_ids_do_not_anchor() {
        let doc = DocumentTree::parse(r#"<ul id="d"><li>a</li></ul><ul id="d"><li>b</li></ul>"#);
        let lis = Selector::parse("li").unwrap().select(&doc, doc.root());
        let a = compute_element_id(&doc, lis[0]);
        let b = compute_element_id(&doc, lis[1]);
        assert_ne!(a, b);
        assert_eq!(b.to_string(), "document:0>ul#d:1>li:0");
    }

    #[test]
    fn element_id_string_round_trip() {
        for s in ["document:0", "ul#nav:0>li:2", "div#a%3Eb%25c:0>span:10", "div#x:y:0>a:1"] {
            assert_eq!(id(s).to_string(), s);
        }
        let weird = ElementId { path: vec![Step { tag: "div".into(), id_attr: Some("a>b:%c#".into()), sibling_index: 3 }] };
        assert_eq!(weird.to_string().parse::<ElementId>().unwrap(), weird);
        for bad in ["", "ul", "ul:x", ":0", "u l:0"] {
            assert!(bad.parse::<ElementId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn page_id_normalization() {
        assert_eq!(PageId::new("/wiki/Main_Page/").as_str(), "/wiki/Main_Page");
        assert_eq!(PageId::new("/a/./b/../c?q=1#f").as_str(), "/a/c");
        assert_eq!(PageId::new("").as_str(), "/");
        assert_eq!(PageId::new("/").as_str(), "/");
        let p = PageId::new("/wiki/Main_Page");
        assert_eq!(PageId::new(p.as_str()), p);
        assert_eq!(p.resolve("./Portal:Contents").unwrap().as_str(), "/wiki/Portal:Contents");
        assert_eq!(p.resolve("../w/index.php?title=x").unwrap().as_str(), "/w/index.php");
        assert_eq!(p.resolve("#top").unwrap(), p);
        assert_eq!(p.resolve("https://en.wikipedia.org/wiki/Special:Random?x=1").unwrap().as_str(), "/wiki/Special:Random");
        assert_eq!(p.resolve("//donate.example.org/").unwrap().as_str(), "/");
        assert_eq!(p.resolve("mailto:x@example.org"), None);
        assert_eq!(p.resolve("javascript:void(0)"), None);
    }

    #[test]
    fn no_menu_matched() {
        let doc = DocumentTree::parse("<p>nothing</p>");
        let set = SelectorSet::new(".menu", None, ".item").unwrap();
        assert!(matches!(extract_menus(&doc, &set, &PageId::new("/")), Err(MenuError::NoMenuMatched(_))));
    }

    #[test]
    fn implicit_group_and_labels() {
        let doc = DocumentTree::parse(
            r#"<ul class="menu"><li class="item"><a href="/a"> Alpha
            one </a></li><li class="item">Beta</li></ul>"#,
        );
        let set = SelectorSet::new(".menu", None, ".item").unwrap();
        let model = extract_menus(&doc, &set, &PageId::new("/")).unwrap();
        assert_eq!(model.menus.len(), 1);
        let groups = &model.menus[0].groups;
        assert_eq!(groups.len(), 1);
        assert!(groups[0].implicit);
        assert_eq!(groups[0].id, model.menus[0].id);
        let labels: Vec<_> = groups[0].items.iter().map(|i| i.label.as_str()).collect();
        assert_eq!(labels, ["Alpha one", "Beta"]);
        assert_eq!(groups[0].items[0].page_target, Some(PageId::new("/a")));
        assert_eq!(groups[0].items[1].page_target, None);
    }

    #[test]
    fn explicit_groups() {
        let doc = DocumentTree::parse(
            r#"<nav class="menu"><ul class="group"><li class="item">a</li><li class="item">b</li></ul>
            <ul class="group"><li class="item">c</li></ul></nav>"#,
        );
        let set = SelectorSet::new(".menu", Some(".group"), ".item").unwrap();
        let model = extract_menus(&doc, &set, &PageId::new("/")).unwrap();
        let g: Vec<usize> = model.menus[0].groups.iter().map(|g| g.items.len()).collect();
        assert_eq!(g, [2, 1]);
        assert!(model.menus[0].groups.iter().all(|g| !g.implicit));
    }

    #[test]
    fn item_selector_wins_over_group_selector() {
        let doc = DocumentTree::parse(r#"<ul class="menu"><li class="item group">a</li><li class="item">b</li></ul>"#);
        let set = SelectorSet::new(".menu", Some(".group"), ".item").unwrap();
        let model = extract_menus(&doc, &set, &PageId::new("/")).unwrap();
        assert_eq!(model.menus[0].groups.len(), 1);
        assert_eq!(model.menus[0].item_count(), 2);
    }

    #[test]
    fn nested_menus_are_disjoint() {
        // 10 elements: outer menu with two items, one containing an inner menu of three.
        let doc = DocumentTree::parse(
            r#"<div class="menu"><a class="item" href="/o1">o1</a><div class="item">o2
            <ul class="menu"><li class="item">i1</li><li class="item">i2</li><li class="item">i3</li></ul></div></div>"#,
        );
        let set = SelectorSet::new(".menu", None, ".item").unwrap();
        let model = extract_menus(&doc, &set, &PageId::new("/")).unwrap();
        assert_eq!(model.menus.len(), 2);
        let outer: Vec<_> = model.menus[0].items().map(|i| i.label.as_str()).collect();
        let inner: Vec<_> = model.menus[1].items().map(|i| i.label.as_str()).collect();
        assert_eq!(outer, ["o1", "o2 i1i2i3"]);
        assert_eq!(inner, ["i1", "i2", "i3"]);
    }

    #[test]
    fn extract_all_merges_and_dedups() {
        let doc = DocumentTree::parse(r#"<ul class="menu"><li class="item">a</li></ul>"#);
        let sets = [
            SelectorSet::new(".menu", None, ".item").unwrap(),
            SelectorSet::new("ul", None, "li").unwrap(),
            SelectorSet::new(".absent", None, "li").unwrap(),
        ];
        let model = extract_all(&doc, &sets, &PageId::new("/")).unwrap();
        assert_eq!(model.menus.len(), 1);
        assert!(extract_all(&doc, &sets[2..], &PageId::new("/")).is_err());
    }
}
