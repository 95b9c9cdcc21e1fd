//! Adaptation styles.
//!
//! A style never touches the document directly. It reads ranked scores and
//! the menu layout and emits an [`AdaptationPlan`]; [`apply`] executes the
//! plan and records what it changed, and [`cancel`] puts everything back.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dom::{DocumentTree, Element, NodeId};
use crate::menu::{ElementId, MenuModel};
use crate::policy::{MenuScores, Scores};

pub const HIGHLIGHT_TOKEN: &str = "sam-highlighted";
pub const FOLDED_TOKEN: &str = "sam-folded";
pub const FOLD_TOGGLE_TOKEN: &str = "sam-fold-toggle";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StyleError {
    #[error("unknown style `{0}`")]
    UnknownStyle(String),
    #[error("a composite style needs at least one member")]
    EmptyComposite,
    #[error("style `{0}` appears twice in a composite")]
    DuplicateStyle(StyleName),
    #[error("top_n must be a positive integer or \"size\"")]
    InvalidTopN,
    #[error("min_visible_on_fold must be positive")]
    InvalidMinVisible,
    #[error("plan target `{0}` no longer resolves in the document")]
    StaleTarget(ElementId),
    #[error("an adaptation is already applied to this document")]
    AlreadyApplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StyleName {
    Highlight,
    ReorderItems,
    ReorderGroups,
    Fold,
}

impl StyleName {
    pub const ALL: [StyleName; 4] = [StyleName::Highlight, StyleName::ReorderItems, StyleName::ReorderGroups, StyleName::Fold];

    pub fn as_str(self) -> &'static str {
        match self {
            StyleName::Highlight => "highlight",
            StyleName::ReorderItems => "reorder-items",
            StyleName::ReorderGroups => "reorder-groups",
            StyleName::Fold => "fold",
        }
    }
}

impl fmt::Display for StyleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StyleName {
    type Err = StyleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StyleName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| StyleError::UnknownStyle(s.into()))
    }
}

/// Number of elements a style adapts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopN {
    Fixed(u32),
    /// `clamp(ceil(0.2 * size), 2, 5)`
    SizeFunction,
}

impl TopN {
    pub fn resolve(self, size: usize) -> usize {
        match self {
            TopN::Fixed(n) => n as usize,
            TopN::SizeFunction => size.div_ceil(5).clamp(2, 5),
        }
    }
}

impl Serialize for TopN {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            TopN::Fixed(n) => serializer.serialize_u32(*n),
            TopN::SizeFunction => serializer.serialize_str("size"),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TopNRepr {
    Fixed(u32),
    Named(String),
}

impl<'de> Deserialize<'de> for TopN {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match TopNRepr::deserialize(deserializer)? {
            TopNRepr::Fixed(n) if n > 0 => Ok(TopN::Fixed(n)),
            TopNRepr::Named(s) if s == "size" => Ok(TopN::SizeFunction),
            _ => Err(serde::de::Error::custom(StyleError::InvalidTopN)),
        }
    }
}

impl FromStr for TopN {
    type Err = StyleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "size" => Ok(TopN::SizeFunction),
            _ => match s.parse::<u32>() {
                Ok(n) if n > 0 => Ok(TopN::Fixed(n)),
                _ => Err(StyleError::InvalidTopN),
            },
        }
    }
}

/// `top_n`, as a free function over the menu size.
pub fn top_n(menu_item_count: usize, config: &StyleConfig) -> usize {
    config.top_n.resolve(menu_item_count)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleConfig {
    /// Members applied in order; a single entry is a plain style.
    pub styles: Vec<StyleName>,
    pub top_n: TopN,
    pub min_visible_on_fold: u32,
}

pub const DEFAULT_MIN_VISIBLE_ON_FOLD: u32 = 3;

impl StyleConfig {
    pub fn single(style: StyleName) -> StyleConfig {
        StyleConfig { styles: alloc::vec![style], top_n: TopN::SizeFunction, min_visible_on_fold: DEFAULT_MIN_VISIBLE_ON_FOLD }
    }

    pub fn with_top_n(mut self, top_n: TopN) -> Self {
        self.top_n = top_n;
        self
    }

    pub fn validate(&self) -> Result<(), StyleError> {
        if self.styles.is_empty() {
            return Err(StyleError::EmptyComposite);
        }
        for (i, s) in self.styles.iter().enumerate() {
            if self.styles[..i].contains(s) {
                return Err(StyleError::DuplicateStyle(*s));
            }
        }
        if self.top_n == TopN::Fixed(0) {
            return Err(StyleError::InvalidTopN);
        }
        if self.min_visible_on_fold == 0 {
            return Err(StyleError::InvalidMinVisible);
        }
        Ok(())
    }

    /// Display name: members joined by `+`.
    pub fn name(&self) -> String {
        let names: Vec<&str> = self.styles.iter().map(|s| s.as_str()).collect();
        names.join("+")
    }
}

impl Default for StyleConfig {
    fn default() -> Self {
        StyleConfig::single(StyleName::Highlight)
    }
}

/// Builds a composite style applying `styles` in order.
pub fn compose(styles: &[StyleName]) -> Result<StyleConfig, StyleError> {
    let config = StyleConfig { styles: styles.to_vec(), ..StyleConfig::default() };
    config.validate()?;
    Ok(config)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StyleNames {
    One(StyleName),
    Many(Vec<StyleName>),
}

fn default_top_n() -> TopN {
    TopN::SizeFunction
}

fn default_min_visible() -> u32 {
    DEFAULT_MIN_VISIBLE_ON_FOLD
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StyleConfigRepr {
    style_name: StyleNames,
    #[serde(default = "default_top_n")]
    top_n: TopN,
    #[serde(default = "default_min_visible")]
    min_visible_on_fold: u32,
}

impl Serialize for StyleConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let style_name = match self.styles.as_slice() {
            [one] => StyleNames::One(*one),
            many => StyleNames::Many(many.to_vec()),
        };
        StyleConfigRepr { style_name, top_n: self.top_n, min_visible_on_fold: self.min_visible_on_fold }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StyleConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = StyleConfigRepr::deserialize(deserializer)?;
        let styles = match r.style_name {
            StyleNames::One(s) => alloc::vec![s],
            StyleNames::Many(v) => v,
        };
        let config = StyleConfig { styles, top_n: r.top_n, min_visible_on_fold: r.min_visible_on_fold };
        config.validate().map_err(serde::de::Error::custom)?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Mutation {
    AddMarker { target: ElementId, token: String },
    /// Moves `target` before `anchor`; `None` means the front of its parent.
    MoveBefore { target: ElementId, anchor: Option<ElementId> },
    Collapse { target: ElementId },
}

impl Mutation {
    pub fn target(&self) -> &ElementId {
        match self {
            Mutation::AddMarker { target, .. } | Mutation::MoveBefore { target, .. } | Mutation::Collapse { target } => {
                target
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AdaptationPlan {
    pub mutations: Vec<Mutation>,
}

impl AdaptationPlan {
    pub fn is_empty(&self) -> bool {
        self.mutations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.mutations.len()
    }
}

/// Current menu arrangement as seen by plan builders. Each builder updates
/// it so that later members of a composite see earlier moves.
#[derive(Debug, Clone)]
pub struct Layout {
    menus: Vec<MenuLayout>,
}

#[derive(Debug, Clone)]
struct MenuLayout {
    id: ElementId,
    item_count: usize,
    groups: Vec<GroupLayout>,
}

#[derive(Debug, Clone)]
struct GroupLayout {
    id: ElementId,
    implicit: bool,
    items: Vec<ElementId>,
}

impl Layout {
    pub fn from_model(model: &MenuModel) -> Layout {
        Layout {
            menus: model
                .menus
                .iter()
                .map(|m| MenuLayout {
                    id: m.id.clone(),
                    item_count: m.item_count(),
                    groups: m
                        .groups
                        .iter()
                        .map(|g| GroupLayout {
                            id: g.id.clone(),
                            implicit: g.implicit,
                            items: g.items.iter().map(|i| i.id.clone()).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

fn move_to_front(order: &mut Vec<ElementId>, target: &ElementId) {
    if let Some(pos) = order.iter().position(|x| x == target) {
        let t = order.remove(pos);
        order.insert(0, t);
    }
}

/// Emits moves that bring `selected` (best first) to the front of `order`.
fn front_moves(order: &mut Vec<ElementId>, selected: &[ElementId], out: &mut Vec<Mutation>) {
    if order.starts_with(selected) {
        return;
    }
    for target in selected.iter().rev() {
        let first = order[0].clone();
        if first != *target {
            out.push(Mutation::MoveBefore { target: target.clone(), anchor: Some(first) });
            move_to_front(order, target);
        }
    }
}

fn nonzero_top(scores: &MenuScores, n: usize) -> Vec<ElementId> {
    scores.items.iter().filter(|s| s.score > 0.0).take(n).map(|s| s.item.clone()).collect()
}

fn highlight_into(scores: &Scores, config: &StyleConfig, layout: &mut Layout, out: &mut Vec<Mutation>) {
    for menu in &layout.menus {
        let Some(ms) = scores.menu(&menu.id) else { continue };
        for target in nonzero_top(ms, config.top_n.resolve(menu.item_count)) {
            out.push(Mutation::AddMarker { target, token: HIGHLIGHT_TOKEN.to_string() });
        }
    }
}

fn reorder_items_into(scores: &Scores, config: &StyleConfig, layout: &mut Layout, out: &mut Vec<Mutation>) {
    for menu in &mut layout.menus {
        let Some(ms) = scores.menu(&menu.id) else { continue };
        let selected = nonzero_top(ms, config.top_n.resolve(menu.item_count));
        for group in &mut menu.groups {
            let mine: Vec<ElementId> = selected.iter().filter(|s| group.items.contains(s)).cloned().collect();
            if !mine.is_empty() {
                front_moves(&mut group.items, &mine, out);
            }
        }
    }
}

fn reorder_groups_into(scores: &Scores, config: &StyleConfig, layout: &mut Layout, out: &mut Vec<Mutation>) {
    for menu in &mut layout.menus {
        let Some(ms) = scores.menu(&menu.id) else { continue };
        // Implicit groups are the menu node itself and cannot move.
        let mut order: Vec<ElementId> = menu.groups.iter().filter(|g| !g.implicit).map(|g| g.id.clone()).collect();
        if order.len() < 2 {
            continue;
        }
        let n = config.top_n.resolve(order.len());
        let selected: Vec<ElementId> = ms
            .groups
            .iter()
            .filter(|g| g.score > 0.0 && order.contains(&g.group))
            .take(n)
            .map(|g| g.group.clone())
            .collect();
        if selected.is_empty() {
            continue;
        }
        front_moves(&mut order, &selected, out);
        menu.groups.sort_by_key(|g| order.iter().position(|id| *id == g.id).unwrap_or(usize::MAX));
    }
}

fn fold_into(scores: &Scores, config: &StyleConfig, layout: &mut Layout, out: &mut Vec<Mutation>) {
    for menu in &layout.menus {
        let Some(ms) = scores.menu(&menu.id) else { continue };
        // No signal, no fold.
        if ms.items.iter().all(|s| s.score == 0.0) {
            continue;
        }
        let rank: BTreeMap<&ElementId, usize> = ms.items.iter().enumerate().map(|(i, s)| (&s.item, i)).collect();
        let score: BTreeMap<&ElementId, f64> = ms.items.iter().map(|s| (&s.item, s.score)).collect();
        let keep = config.top_n.resolve(menu.item_count).max(config.min_visible_on_fold as usize);
        for group in &menu.groups {
            if group.items.len() <= keep {
                continue;
            }
            // Group-local ranking: the menu ranking restricted to this group.
            let mut local: Vec<&ElementId> = group.items.iter().collect();
            local.sort_by_key(|id| rank.get(id).copied().unwrap_or(usize::MAX));
            let visible = &local[..keep];
            let folded: Vec<&ElementId> = group
                .items
                .iter()
                .filter(|id| !visible.contains(id) && score.get(id).copied().unwrap_or(0.0) == 0.0)
                .collect();
            if folded.is_empty() {
                continue;
            }
            for id in folded {
                out.push(Mutation::Collapse { target: id.clone() });
            }
            out.push(Mutation::AddMarker { target: group.id.clone(), token: FOLD_TOGGLE_TOKEN.to_string() });
        }
    }
}

fn plan_one(style: StyleName, scores: &Scores, config: &StyleConfig, layout: &mut Layout, out: &mut Vec<Mutation>) {
    match style {
        StyleName::Highlight => highlight_into(scores, config, layout, out),
        StyleName::ReorderItems => reorder_items_into(scores, config, layout, out),
        StyleName::ReorderGroups => reorder_groups_into(scores, config, layout, out),
        StyleName::Fold => fold_into(scores, config, layout, out),
    }
}

/// Plans every member of `config` in order against one evolving layout.
pub fn plan(scores: &Scores, model: &MenuModel, config: &StyleConfig) -> AdaptationPlan {
    let mut layout = Layout::from_model(model);
    let mut mutations = Vec::new();
    for &style in &config.styles {
        plan_one(style, scores, config, &mut layout, &mut mutations);
    }
    AdaptationPlan { mutations }
}

fn plan_single(style: StyleName, scores: &Scores, model: &MenuModel, config: &StyleConfig) -> AdaptationPlan {
    let mut mutations = Vec::new();
    plan_one(style, scores, config, &mut Layout::from_model(model), &mut mutations);
    AdaptationPlan { mutations }
}

pub fn plan_highlight(scores: &Scores, model: &MenuModel, config: &StyleConfig) -> AdaptationPlan {
    plan_single(StyleName::Highlight, scores, model, config)
}

pub fn plan_reorder_items(scores: &Scores, model: &MenuModel, config: &StyleConfig) -> AdaptationPlan {
    plan_single(StyleName::ReorderItems, scores, model, config)
}

pub fn plan_reorder_groups(scores: &Scores, model: &MenuModel, config: &StyleConfig) -> AdaptationPlan {
    plan_single(StyleName::ReorderGroups, scores, model, config)
}

pub fn plan_fold(scores: &Scores, model: &MenuModel, config: &StyleConfig) -> AdaptationPlan {
    plan_single(StyleName::Fold, scores, model, config)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Undo {
    Element { node: NodeId, previous: Element },
    Move { node: NodeId, parent: NodeId, index: usize },
}

/// A plan that has been applied, with everything needed to revert it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedState {
    pub plan: AdaptationPlan,
    undo: Vec<Undo>,
}

type NodeIndex<'a> = BTreeMap<&'a ElementId, NodeId>;

fn node_index(model: &MenuModel) -> NodeIndex<'_> {
    let mut index = BTreeMap::new();
    for menu in &model.menus {
        index.entry(&menu.id).or_insert(menu.node);
        for group in &menu.groups {
            index.entry(&group.id).or_insert(group.node);
            for item in &group.items {
                index.entry(&item.id).or_insert(item.node);
            }
        }
    }
    index
}

fn resolve(doc: &DocumentTree, index: &NodeIndex<'_>, id: &ElementId) -> Result<NodeId, StyleError> {
    let stale = || StyleError::StaleTarget(id.clone());
    let node = index.get(id).copied().ok_or_else(stale)?;
    let el = doc.element(node).ok_or_else(stale)?;
    let tag_matches = id.path.last().is_some_and(|s| s.tag == el.tag);
    if !tag_matches || !doc.is_attached(node) {
        return Err(stale());
    }
    Ok(node)
}

fn add_marker(doc: &mut DocumentTree, node: NodeId, token: &str, undo: &mut Vec<Undo>) {
    let previous = doc.element(node).cloned().expect("resolved nodes are elements");
    if doc.add_class(node, token) {
        undo.push(Undo::Element { node, previous });
    }
}

fn execute(doc: &mut DocumentTree, index: &NodeIndex<'_>, m: &Mutation, undo: &mut Vec<Undo>) -> Result<(), StyleError> {
    let node = resolve(doc, index, m.target())?;
    match m {
        Mutation::AddMarker { token, .. } => add_marker(doc, node, token, undo),
        Mutation::Collapse { .. } => add_marker(doc, node, FOLDED_TOKEN, undo),
        Mutation::MoveBefore { anchor, .. } => {
            let (dest, dest_index) = match anchor {
                Some(a) => {
                    let anchor_node = resolve(doc, index, a)?;
                    if anchor_node == node {
                        return Ok(());
                    }
                    if doc.is_ancestor(node, anchor_node) {
                        return Err(StyleError::StaleTarget(a.clone()));
                    }
                    (doc.parent(anchor_node).expect("attached"), Some(anchor_node))
                }
                None => (doc.parent(node).expect("attached"), None),
            };
            let (parent, index) = doc.detach(node).expect("attached");
            let at = match dest_index {
                Some(a) => doc.children(dest).iter().position(|&c| c == a).expect("anchor is a child of its parent"),
                None => 0,
            };
            doc.insert_child(dest, at, node);
            undo.push(Undo::Move { node, parent, index });
        }
    }
    Ok(())
}

fn revert(doc: &mut DocumentTree, undo: Vec<Undo>) {
    for u in undo.into_iter().rev() {
        match u {
            Undo::Element { node, previous } => doc.replace_element(node, previous),
            Undo::Move { node, parent, index } => {
                doc.detach(node);
                doc.insert_child(parent, index, node);
            }
        }
    }
}

/// Executes `plan` on `doc`. On failure nothing is left modified.
pub fn apply(plan: &AdaptationPlan, doc: &mut DocumentTree, model: &MenuModel) -> Result<AppliedState, StyleError> {
    if doc.is_adapted() {
        return Err(StyleError::AlreadyApplied);
    }
    let index = node_index(model);
    let mut undo = Vec::new();
    for m in &plan.mutations {
        if let Err(e) = execute(doc, &index, m, &mut undo) {
            revert(doc, undo);
            return Err(e);
        }
    }
    doc.set_adapted(true);
    Ok(AppliedState { plan: plan.clone(), undo })
}

/// Reverts an applied plan, restoring the pre-apply document.
pub fn cancel(applied: AppliedState, doc: &mut DocumentTree) {
    revert(doc, applied.undo);
    doc.set_adapted(false);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::menu::{extract_menus, PageId, SelectorSet};
    use crate::policy::{score_groups, ScoredItem};
    use alloc::format;
    use alloc::vec;

    fn fixture(groups: &[usize]) -> (DocumentTree, MenuModel) {
        let mut html = String::from("<nav class=\"m\">\n");
        for (g, &n) in groups.iter().enumerate() {
            html.push_str("  <ul class=\"g\">\n");
            for i in 0..n {
                html.push_str(&format!("    <li class=\"i\"><a href=\"/g{g}/{i}\">G{g}I{i}</a></li>\n"));
            }
            html.push_str("  </ul>\n");
        }
        html.push_str("</nav>\n");
        let doc = DocumentTree::parse(&html);
        let model = extract_menus(&doc, &SelectorSet::new(".m", Some(".g"), ".i").unwrap(), &PageId::new("/")).unwrap();
        (doc, model)
    }

    /// Scores from explicit per-item values (document order), ranked by value.
    fn scores_from(model: &MenuModel, values: &[f64]) -> Scores {
        let menu = &model.menus[0];
        let ids: Vec<ElementId> = menu.items().map(|i| i.id.clone()).collect();
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let items: Vec<ScoredItem> = order.iter().map(|&i| ScoredItem { item: ids[i].clone(), score: values[i] }).collect();
        let groups = score_groups(menu, &items);
        Scores { policy: crate::policy::PolicyName::ClickFrequency, menus: vec![MenuScores { menu: menu.id.clone(), items, groups }] }
    }

    fn visible_labels(doc: &DocumentTree, model: &MenuModel) -> Vec<String> {
        let menu = model.menus[0].node;
        doc.descendants(menu)
            .filter(|&n| doc.element(n).is_some_and(|e| e.has_class("i")))
            .map(|n| doc.text_content(n))
            .collect()
    }

    #[test]
    fn top_n_values() {
        let fixed = StyleConfig::default().with_top_n(TopN::Fixed(3));
        assert_eq!(top_n(1000, &fixed), 3);
        let size = StyleConfig::default();
        assert_eq!(top_n(7, &size), 2);
        assert_eq!(top_n(40, &size), 5);
        assert_eq!(top_n(0, &size), 2);
        assert_eq!(top_n(11, &size), 3);
    }

    #[test]
    fn compose_rules() {
        assert_eq!(compose(&[]), Err(StyleError::EmptyComposite));
        assert_eq!(compose(&[StyleName::Fold, StyleName::Fold]), Err(StyleError::DuplicateStyle(StyleName::Fold)));
        assert_eq!(compose(&[StyleName::Fold]).unwrap(), StyleConfig::single(StyleName::Fold));
    }

    #[test]
    fn style_config_json() {
        let c: StyleConfig = serde_json::from_str(r#"{"style_name":"fold"}"#).unwrap();
        assert_eq!(c, StyleConfig::single(StyleName::Fold));
        let c: StyleConfig =
            serde_json::from_str(r#"{"style_name":["highlight","reorder-items"],"top_n":3,"min_visible_on_fold":4}"#).unwrap();
        assert_eq!(c.styles, [StyleName::Highlight, StyleName::ReorderItems]);
        assert_eq!(c.top_n, TopN::Fixed(3));
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"style_name":["highlight","reorder-items"],"top_n":3,"min_visible_on_fold":4}"#);
        assert!(serde_json::from_str::<StyleConfig>(r#"{"style_name":[]}"#).is_err());
        assert!(serde_json::from_str::<StyleConfig>(r#"{"style_name":"fold","top_n":0}"#).is_err());
        assert!(serde_json::from_str::<StyleConfig>(r#"{"style_name":"fold","top_n":"half"}"#).is_err());
    }

    #[test]
    fn highlight_marks_nonzero_top_n_only() {
        let (_, model) = fixture(&[5]);
        let cfg = StyleConfig::default().with_top_n(TopN::Fixed(4));
        let plan = plan_highlight(&scores_from(&model, &[0.0, 0.5, 0.0, 0.25, 0.25]), &model, &cfg);
        let targets: Vec<_> = plan.mutations.iter().map(|m| model.item(m.target()).unwrap().label.clone()).collect();
        assert_eq!(targets, ["G0I1", "G0I3", "G0I4"]);
        assert!(plan_highlight(&scores_from(&model, &[0.0; 5]), &model, &cfg).is_empty());
    }

    #[test]
    fn reorder_items_moves_top_n_to_front() {
        let (mut doc, model) = fixture(&[5]);
        let cfg = StyleConfig::single(StyleName::ReorderItems).with_top_n(TopN::Fixed(2));
        let scores = scores_from(&model, &[0.1, 0.0, 0.2, 0.0, 0.7]);
        let plan = plan_reorder_items(&scores, &model, &cfg);
        let before = doc.to_html();
        let applied = apply(&plan, &mut doc, &model).unwrap();
        assert_eq!(visible_labels(&doc, &model), ["G0I4", "G0I2", "G0I0", "G0I1", "G0I3"]);
        cancel(applied, &mut doc);
        assert_eq!(doc.to_html(), before);

        let one = StyleConfig::single(StyleName::ReorderItems).with_top_n(TopN::Fixed(1));
        let plan = plan_reorder_items(&scores, &model, &one);
        apply(&plan, &mut doc, &model).unwrap();
        assert_eq!(visible_labels(&doc, &model), ["G0I4", "G0I0", "G0I1", "G0I2", "G0I3"]);
    }

    #[test]
    fn reorder_already_in_place_is_empty() {
        let (_, model) = fixture(&[3]);
        let cfg = StyleConfig::single(StyleName::ReorderItems).with_top_n(TopN::Fixed(2));
        let plan = plan_reorder_items(&scores_from(&model, &[0.6, 0.4, 0.0]), &model, &cfg);
        assert!(plan.is_empty());
    }

    #[test]
    fn reorder_groups_hand_application() {
        let (mut doc, model) = fixture(&[2, 2, 2]);
        // Group sums: g0 = 0.2, g1 = 0.3, g2 = 0.5.
        let scores = scores_from(&model, &[0.1, 0.1, 0.3, 0.0, 0.25, 0.25]);
        let cfg = StyleConfig::single(StyleName::ReorderGroups).with_top_n(TopN::Fixed(2));
        let plan = plan_reorder_groups(&scores, &model, &cfg);
        apply(&plan, &mut doc, &model).unwrap();
        assert_eq!(visible_labels(&doc, &model), ["G2I0", "G2I1", "G1I0", "G1I1", "G0I0", "G0I1"]);

        let (_, single) = fixture(&[4]);
        assert!(plan_reorder_groups(&scores_from(&single, &[0.5, 0.5, 0.0, 0.0]), &single, &cfg).is_empty());
        assert!(plan_reorder_groups(&scores_from(&model, &[0.0; 6]), &model, &cfg).is_empty());
    }

    #[test]
    fn fold_rules() {
        let (mut doc, model) = fixture(&[7]);
        let cfg = StyleConfig::single(StyleName::Fold);
        let scores = scores_from(&model, &[2.0 / 18.0, 0.0, 6.0 / 18.0, 0.0, 10.0 / 18.0, 0.0, 0.0]);
        let plan = plan_fold(&scores, &model, &cfg);
        let collapsed: Vec<_> = plan
            .mutations
            .iter()
            .filter(|m| matches!(m, Mutation::Collapse { .. }))
            .map(|m| model.item(m.target()).unwrap().label.clone())
            .collect();
        assert_eq!(collapsed, ["G0I1", "G0I3", "G0I5", "G0I6"]);
        assert_eq!(plan.mutations.last(), Some(&Mutation::AddMarker { target: model.menus[0].groups[0].id.clone(), token: FOLD_TOGGLE_TOKEN.into() }));
        let applied = apply(&plan, &mut doc, &model).unwrap();
        assert!(doc.to_html().contains("sam-folded"));
        cancel(applied, &mut doc);

        assert!(plan_fold(&scores_from(&model, &[1.0; 7]), &model, &cfg).is_empty());
        let (_, small) = fixture(&[3]);
        assert!(plan_fold(&scores_from(&small, &[0.0, 0.0, 0.0]), &small, &cfg).is_empty());
    }

    #[test]
    fn apply_twice_is_rejected() {
        let (mut doc, model) = fixture(&[3]);
        let plan = plan_highlight(&scores_from(&model, &[1.0, 0.0, 0.0]), &model, &StyleConfig::default());
        let applied = apply(&plan, &mut doc, &model).unwrap();
        let after = doc.to_html();
        assert_eq!(apply(&plan, &mut doc, &model), Err(StyleError::AlreadyApplied));
        assert_eq!(doc.to_html(), after);
        cancel(applied, &mut doc);
        assert!(apply(&plan, &mut doc, &model).is_ok());
    }

    #[test]
    fn empty_plan_round_trip() {
        let (mut doc, model) = fixture(&[3]);
        let before = doc.to_html();
        let applied = apply(&AdaptationPlan::default(), &mut doc, &model).unwrap();
        assert_eq!(doc.to_html(), before);
        cancel(applied, &mut doc);
        assert_eq!(doc.to_html(), before);
    }

    #[test]
    fn stale_target_rolls_back() {
        let (mut doc, model) = fixture(&[3]);
        let before = doc.to_html();
        let good = model.menus[0].groups[0].items[0].id.clone();
        let plan = AdaptationPlan {
            mutations: vec![
                Mutation::AddMarker { target: good.clone(), token: HIGHLIGHT_TOKEN.into() },
                Mutation::MoveBefore { target: model.menus[0].groups[0].items[2].id.clone(), anchor: Some(good) },
                Mutation::Collapse { target: "div#nowhere:0".parse().unwrap() },
            ],
        };
        assert!(matches!(apply(&plan, &mut doc, &model), Err(StyleError::StaleTarget(_))));
        assert_eq!(doc.to_html(), before);
        // Not marked as adapted after a failed apply.
        assert!(apply(&AdaptationPlan::default(), &mut doc, &model).is_ok());
    }

    #[test]
    fn composite_highlight_then_reorder() {
        let (mut doc, model) = fixture(&[4]);
        let before = doc.to_html();
        let cfg = compose(&[StyleName::Highlight, StyleName::ReorderItems]).unwrap();
        let scores = scores_from(&model, &[0.0, 0.0, 0.25, 0.75]);
        let p = plan(&scores, &model, &cfg);
        let applied = apply(&p, &mut doc, &model).unwrap();
        assert_eq!(visible_labels(&doc, &model), ["G0I3", "G0I2", "G0I0", "G0I1"]);
        assert_eq!(doc.to_html().matches(HIGHLIGHT_TOKEN).count(), 2);
        cancel(applied, &mut doc);
        assert_eq!(doc.to_html(), before);
    }
}
