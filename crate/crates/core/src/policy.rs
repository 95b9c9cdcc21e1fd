//! Target policies: turn usage metrics into normalized item and group
//! scores, one menu at a time.
//!
//! Every policy produces, per menu, a list of [`ScoredItem`]s whose scores
//! sum to 1 when any raw signal exists and are all 0 otherwise. Lists are
//! ranked best-first with ties broken by document order. AccessRank is the
//! one exception to score-descending order: its list follows the
//! stability-filtered ranking, which may keep an item above a slightly
//! heavier one.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::MetricsSnapshot;
use crate::menu::{ElementId, Menu, MenuModel};

const HOUR_MS: u64 = 3_600_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("invalid policy configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    ClickFrequency,
    VisitDuration,
    VisitFrequency,
    VisitRecency,
    SerialPosition,
    AccessRank,
}

impl PolicyName {
    pub const ALL: [PolicyName; 6] = [
        PolicyName::ClickFrequency,
        PolicyName::VisitDuration,
        PolicyName::VisitFrequency,
        PolicyName::VisitRecency,
        PolicyName::SerialPosition,
        PolicyName::AccessRank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::ClickFrequency => "click-frequency",
            PolicyName::VisitDuration => "visit-duration",
            PolicyName::VisitFrequency => "visit-frequency",
            PolicyName::VisitRecency => "visit-recency",
            PolicyName::SerialPosition => "serial-position",
            PolicyName::AccessRank => "access-rank",
        }
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyName {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyName::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| PolicyError::UnknownPolicy(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessRankParams {
    pub alpha: f64,
    pub crf_half_life_ms: u64,
    pub delta_stability: f64,
    pub time_of_day_clamp: (f64, f64),
}

impl Default for AccessRankParams {
    fn default() -> Self {
        AccessRankParams {
            alpha: 1.0,
            crf_half_life_ms: 24 * HOUR_MS,
            delta_stability: 1.2,
            time_of_day_clamp: (0.8, 1.25),
        }
    }
}

pub const DEFAULT_SERIAL_POSITION_WEIGHTS: (f64, f64, f64) = (0.4, 0.4, 0.2);

fn default_weights() -> (f64, f64, f64) {
    DEFAULT_SERIAL_POSITION_WEIGHTS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub policy_name: PolicyName,
    /// (frequency, recency, primacy)
    #[serde(default = "default_weights")]
    pub serial_position_weights: (f64, f64, f64),
    #[serde(default)]
    pub access_rank_params: AccessRankParams,
}

impl PolicyConfig {
    pub fn new(policy_name: PolicyName) -> Self {
        PolicyConfig {
            policy_name,
            serial_position_weights: DEFAULT_SERIAL_POSITION_WEIGHTS,
            access_rank_params: AccessRankParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let (f, r, p) = self.serial_position_weights;
        if [f, r, p].iter().any(|w| !w.is_finite() || *w < 0.0) || libm::fabs(f + r + p - 1.0) > 1e-9 {
            return Err(PolicyError::InvalidConfig("serial-position weights must be non-negative and sum to 1"));
        }
        let ar = &self.access_rank_params;
        if !(ar.alpha.is_finite() && ar.alpha > 0.0) {
            return Err(PolicyError::InvalidConfig("alpha must be positive"));
        }
        if ar.crf_half_life_ms == 0 {
            return Err(PolicyError::InvalidConfig("crf_half_life_ms must be positive"));
        }
        if !(ar.delta_stability.is_finite() && ar.delta_stability >= 1.0) {
            return Err(PolicyError::InvalidConfig("delta_stability must be at least 1"));
        }
        let (lo, hi) = ar.time_of_day_clamp;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(PolicyError::InvalidConfig("time_of_day_clamp must satisfy 0 < lo <= hi"));
        }
        Ok(())
    }
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig::new(PolicyName::ClickFrequency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredItem {
    pub item: ElementId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredGroup {
    pub group: ElementId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MenuScores {
    pub menu: ElementId,
    pub items: Vec<ScoredItem>,
    pub groups: Vec<ScoredGroup>,
}

impl MenuScores {
    pub fn score_of(&self, item: &ElementId) -> f64 {
        self.items.iter().find(|s| s.item == *item).map_or(0.0, |s| s.score)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scores {
    pub policy: PolicyName,
    pub menus: Vec<MenuScores>,
}

impl Scores {
    pub fn menu(&self, id: &ElementId) -> Option<&MenuScores> {
        self.menus.iter().find(|m| m.menu == *id)
    }
}

/// Carried between AccessRank invocations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccessRankState {
    pub previous_ranking: Vec<ElementId>,
    pub crf: BTreeMap<ElementId, f64>,
    pub hour_histograms: BTreeMap<ElementId, [u32; 24]>,
}

/// Scores every menu of `model` under `config`. Only AccessRank reads or
/// updates `state`.
pub fn score(
    config: &PolicyConfig,
    model: &MenuModel,
    metrics: &MetricsSnapshot,
    now_ms: u64,
    state: &mut AccessRankState,
) -> Scores {
    let menus = match config.policy_name {
        PolicyName::ClickFrequency => per_menu(model, |m| score_click_frequency(m, metrics)),
        PolicyName::VisitDuration => per_menu(model, |m| score_visit_duration(m, metrics)),
        PolicyName::VisitFrequency => per_menu(model, |m| score_visit_frequency(m, metrics)),
        PolicyName::VisitRecency => per_menu(model, |m| score_visit_recency(m, metrics)),
        PolicyName::SerialPosition => {
            per_menu(model, |m| score_serial_position(m, metrics, config.serial_position_weights))
        }
        PolicyName::AccessRank => {
            let (menus, next) = score_access_rank(model, metrics, &config.access_rank_params, now_ms, state);
            *state = next;
            menus
        }
    };
    Scores { policy: config.policy_name, menus }
}

fn per_menu(model: &MenuModel, mut f: impl FnMut(&Menu) -> Vec<ScoredItem>) -> Vec<MenuScores> {
    model
        .menus
        .iter()
        .map(|menu| {
            let items = f(menu);
            let groups = score_groups(menu, &items);
            MenuScores { menu: menu.id.clone(), items, groups }
        })
        .collect()
}

fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|r| r / total).collect()
    } else {
        alloc::vec![0.0; raw.len()]
    }
}

/// Ranks items by `key` descending (ties by document order) and attaches
/// the normalized `raw` values as scores.
fn ranked(menu: &Menu, key: &[f64], raw: &[f64]) -> Vec<ScoredItem> {
    let scores = normalize(raw);
    let ids: Vec<&ElementId> = menu.items().map(|i| &i.id).collect();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then(a.cmp(&b)));
    order.into_iter().map(|i| ScoredItem { item: ids[i].clone(), score: scores[i] }).collect()
}

fn page_metric(menu: &Menu, metrics: &MetricsSnapshot, f: impl Fn(&crate::analytics::PageMetrics) -> f64) -> Vec<f64> {
    menu.items()
        .map(|item| item.page_target.as_ref().and_then(|p| metrics.page(p)).map_or(0.0, &f))
        .collect()
}

pub fn score_click_frequency(menu: &Menu, metrics: &MetricsSnapshot) -> Vec<ScoredItem> {
    let raw: Vec<f64> = menu.items().map(|i| metrics.item(&i.id).map_or(0.0, |m| m.click_count as f64)).collect();
    ranked(menu, &raw, &raw)
}

pub fn score_visit_duration(menu: &Menu, metrics: &MetricsSnapshot) -> Vec<ScoredItem> {
    let raw = page_metric(menu, metrics, |p| p.total_duration_ms as f64);
    ranked(menu, &raw, &raw)
}

pub fn score_visit_frequency(menu: &Menu, metrics: &MetricsSnapshot) -> Vec<ScoredItem> {
    let raw = page_metric(menu, metrics, |p| p.visit_count as f64);
    ranked(menu, &raw, &raw)
}

/// Reciprocal competition ranks: the best key gets 1, ties share a rank,
/// absent keys get 0.
fn reciprocal_ranks(keys: &[Option<u64>], better: impl Fn(u64, u64) -> bool) -> Vec<f64> {
    keys.iter()
        .map(|k| match k {
            Some(k) => {
                let ahead = keys.iter().flatten().filter(|&&o| better(o, *k)).count();
                1.0 / (ahead + 1) as f64
            }
            None => 0.0,
        })
        .collect()
}

fn last_visits(menu: &Menu, metrics: &MetricsSnapshot) -> Vec<Option<u64>> {
    menu.items().map(|i| i.page_target.as_ref().and_then(|p| metrics.page(p)).and_then(|m| m.last_visit_ms)).collect()
}

fn first_visits(menu: &Menu, metrics: &MetricsSnapshot) -> Vec<Option<u64>> {
    menu.items().map(|i| i.page_target.as_ref().and_then(|p| metrics.page(p)).and_then(|m| m.first_visit_ms)).collect()
}

pub fn score_visit_recency(menu: &Menu, metrics: &MetricsSnapshot) -> Vec<ScoredItem> {
    let raw = reciprocal_ranks(&last_visits(menu, metrics), |other, mine| other > mine);
    ranked(menu, &raw, &raw)
}

pub fn score_serial_position(menu: &Menu, metrics: &MetricsSnapshot, weights: (f64, f64, f64)) -> Vec<ScoredItem> {
    let (w_freq, w_rec, w_prim) = weights;
    let freq = normalize(&page_metric(menu, metrics, |p| p.visit_count as f64));
    let rec = normalize(&reciprocal_ranks(&last_visits(menu, metrics), |other, mine| other > mine));
    let prim = normalize(&reciprocal_ranks(&first_visits(menu, metrics), |other, mine| other < mine));
    let combined: Vec<f64> = (0..freq.len()).map(|i| w_freq * freq[i] + w_rec * rec[i] + w_prim * prim[i]).collect();
    ranked(menu, &combined, &combined)
}

fn hour_of_day(t_ms: u64) -> usize {
    ((t_ms / HOUR_MS) % 24) as usize
}

/// Raw AccessRank weights for the items of `menu`, in document order.
pub fn access_rank_weights(menu: &Menu, metrics: &MetricsSnapshot, params: &AccessRankParams, now_ms: u64) -> Vec<f64> {
    access_rank_components(menu, metrics, params, now_ms).into_iter().map(|c| c.weight).collect()
}

struct Components {
    weight: f64,
    crf: f64,
    histogram: [u32; 24],
}

fn access_rank_components(menu: &Menu, metrics: &MetricsSnapshot, params: &AccessRankParams, now_ms: u64) -> Vec<Components> {
    let ids: Vec<&ElementId> = menu.items().map(|i| &i.id).collect();
    let n = ids.len() as f64;
    let prev = metrics.last_clicked.as_ref();
    let outgoing: f64 = prev.map_or(0.0, |p| ids.iter().map(|j| metrics.transition_count(p, j) as f64).sum());
    let hour_now = hour_of_day(now_ms);
    let (lo, hi) = params.time_of_day_clamp;
    ids.iter()
        .map(|id| {
            let markov = match prev {
                Some(p) => (metrics.transition_count(p, id) as f64 + 1.0) / (outgoing + n),
                None => 1.0 / n,
            };
            let times: &[u64] = metrics.item(id).map_or(&[], |m| &m.click_timestamps);
            let half_life = params.crf_half_life_ms as f64;
            let crf: f64 = times.iter().map(|&t| libm::exp2(-(now_ms.saturating_sub(t) as f64) / half_life)).sum();
            let mut histogram = [0u32; 24];
            for &t in times {
                histogram[hour_of_day(t)] += 1;
            }
            let time_of_day = if times.is_empty() {
                1.0
            } else {
                let ratio = 24.0 * histogram[hour_now] as f64 / times.len() as f64;
                ratio.clamp(lo, hi)
            };
            let weight = libm::pow(markov, params.alpha) * libm::pow(crf, 1.0 / params.alpha) * time_of_day;
            Components { weight, crf, histogram }
        })
        .collect()
}

/// Stability filter: starting from `base`, an item moves above its upper
/// neighbour only while its weight exceeds `delta` times that neighbour's.
pub fn stable_rank(base: &[usize], weights: &[f64], delta: f64) -> Vec<usize> {
    let mut order: Vec<usize> = Vec::with_capacity(base.len());
    for &idx in base {
        order.push(idx);
        let mut pos = order.len() - 1;
        while pos > 0 && weights[order[pos]] > delta * weights[order[pos - 1]] {
            order.swap(pos, pos - 1);
            pos -= 1;
        }
    }
    order
}

pub fn score_access_rank(
    model: &MenuModel,
    metrics: &MetricsSnapshot,
    params: &AccessRankParams,
    now_ms: u64,
    state: &AccessRankState,
) -> (Vec<MenuScores>, AccessRankState) {
    let mut next = AccessRankState::default();
    let mut menus = Vec::with_capacity(model.menus.len());
    for menu in &model.menus {
        let ids: Vec<&ElementId> = menu.items().map(|i| &i.id).collect();
        let comps = access_rank_components(menu, metrics, params, now_ms);
        let weights: Vec<f64> = comps.iter().map(|c| c.weight).collect();

        let mut base: Vec<usize> =
            state.previous_ranking.iter().filter_map(|prev| ids.iter().position(|id| *id == prev)).collect();
        for i in 0..ids.len() {
            if !base.contains(&i) {
                base.push(i);
            }
        }
        let order = stable_rank(&base, &weights, params.delta_stability);
        let scores = normalize(&weights);
        let items: Vec<ScoredItem> =
            order.iter().map(|&i| ScoredItem { item: ids[i].clone(), score: scores[i] }).collect();

        for (i, c) in comps.iter().enumerate() {
            next.crf.insert(ids[i].clone(), c.crf);
            next.hour_histograms.insert(ids[i].clone(), c.histogram);
        }
        next.previous_ranking.extend(items.iter().map(|s| s.item.clone()));
        let groups = score_groups(menu, &items);
        menus.push(MenuScores { menu: menu.id.clone(), items, groups });
    }
    (menus, next)
}

/// Group score = sum of member item scores, renormalized across the menu's
/// groups.
pub fn score_groups(menu: &Menu, items: &[ScoredItem]) -> Vec<ScoredGroup> {
    let by_id: BTreeMap<&ElementId, f64> = items.iter().map(|s| (&s.item, s.score)).collect();
    let raw: Vec<f64> =
        menu.groups.iter().map(|g| g.items.iter().map(|it| by_id.get(&it.id).copied().unwrap_or(0.0)).sum()).collect();
    let scores = normalize(&raw);
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]).then(a.cmp(&b)));
    order.into_iter().map(|i| ScoredGroup { group: menu.groups[i].id.clone(), score: scores[i] }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::aggregate;
    use crate::dom::DocumentTree;
    use crate::log::EventDatabase;
    use crate::menu::{extract_menus, PageId, SelectorSet};
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn model(n: usize) -> MenuModel {
        let mut html = String::from(r#"<ul class="m">"#);
        for i in 0..n {
            html.push_str(&format!(r#"<li class="i"><a href="/p{i}">P{i}</a></li>"#));
        }
        html.push_str("</ul><p>");
        let doc = DocumentTree::parse(&html);
        extract_menus(&doc, &SelectorSet::new(".m", None, ".i").unwrap(), &PageId::new("/")).unwrap()
    }

    fn labels(model: &MenuModel, items: &[ScoredItem]) -> Vec<String> {
        items.iter().map(|s| model.item(&s.item).unwrap().label.clone()).collect()
    }

    fn scores(items: &[ScoredItem]) -> Vec<f64> {
        items.iter().map(|s| s.score).collect()
    }

    #[test]
    fn policy_names_round_trip() {
        for p in PolicyName::ALL {
            assert_eq!(p.as_str().parse::<PolicyName>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.as_str()));
        }
        assert!("lru".parse::<PolicyName>().is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg: PolicyConfig = serde_json::from_str(r#"{"policy_name":"serial-position"}"#).unwrap();
        assert_eq!(cfg.serial_position_weights, (0.4, 0.4, 0.2));
        assert_eq!(cfg.access_rank_params, AccessRankParams::default());
        assert!(cfg.validate().is_ok());
        let mut bad = cfg;
        bad.serial_position_weights = (0.5, 0.5, 0.5);
        assert!(bad.validate().is_err());
        let mut bad = cfg;
        bad.access_rank_params.delta_stability = 0.9;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn click_frequency_degenerate_cases() {
        let model = model(3);
        let menu = &model.menus[0];
        let snap = aggregate(&EventDatabase::new(), &model);
        let s = score_click_frequency(menu, &snap);
        assert_eq!(scores(&s), [0.0, 0.0, 0.0]);
        assert_eq!(labels(&model, &s), ["P0", "P1", "P2"]);

        let mut db = EventDatabase::new();
        db.log_click(menu.groups[0].items[2].id.clone(), PageId::new("/"), 1);
        let s = score_click_frequency(menu, &aggregate(&db, &model));
        assert_eq!(labels(&model, &s)[0], "P2");
        assert_eq!(s[0].score, 1.0);
    }

    #[test]
    fn visit_frequency_hand_count() {
        let model = model(3);
        let mut db = EventDatabase::new();
        for _ in 0..3 {
            db.log_visit(PageId::new("/p0"), 0, 1).unwrap();
        }
        db.log_visit(PageId::new("/p1"), 0, 1).unwrap();
        let s = score_visit_frequency(&model.menus[0], &aggregate(&db, &model));
        assert_eq!(scores(&s), [0.75, 0.25, 0.0]);
    }

    #[test]
    fn visit_frequency_tie_uses_document_order() {
        let model = model(3);
        let mut db = EventDatabase::new();
        db.log_visit(PageId::new("/p2"), 0, 1).unwrap();
        db.log_visit(PageId::new("/p1"), 0, 1).unwrap();
        let s = score_visit_frequency(&model.menus[0], &aggregate(&db, &model));
        assert_eq!(labels(&model, &s), ["P1", "P2", "P0"]);
        assert_eq!(s[0].score, s[1].score);
    }

    #[test]
    fn visit_recency_reciprocal_ranks() {
        let model = model(3);
        let mut db = EventDatabase::new();
        for (page, t) in [("/p0", 100), ("/p1", 200), ("/p2", 300)] {
            db.log_visit(PageId::new(page), t, t).unwrap();
        }
        let s = score_visit_recency(&model.menus[0], &aggregate(&db, &model));
        assert_eq!(labels(&model, &s), ["P2", "P1", "P0"]);
        let total = 1.0 + 0.5 + 1.0 / 3.0;
        for (got, want) in scores(&s).iter().zip([1.0 / total, 0.5 / total, (1.0 / 3.0) / total]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((s[0].score - 0.545).abs() < 5e-4);

        db.log_visit(PageId::new("/p0"), 400, 400).unwrap();
        let s = score_visit_recency(&model.menus[0], &aggregate(&db, &model));
        assert_eq!(labels(&model, &s)[0], "P0");
    }

    #[test]
    fn serial_position_reductions_and_weighted_sum() {
        let model = model(3);
        let menu = &model.menus[0];
        let mut db = EventDatabase::new();
        // p0: visits at 10, 50; p1: visit at 20; p2: visits at 30, 40, 60
        for (page, t) in [("/p0", 10), ("/p1", 20), ("/p2", 30), ("/p2", 40), ("/p0", 50), ("/p2", 60)] {
            db.log_visit(PageId::new(page), t, t + 1).unwrap();
        }
        let snap = aggregate(&db, &model);
        let freq = score_visit_frequency(menu, &snap);
        let rec = score_visit_recency(menu, &snap);
        let ranking = |v: &[ScoredItem]| v.iter().map(|s| s.item.to_string()).collect::<Vec<_>>();
        assert_eq!(ranking(&score_serial_position(menu, &snap, (1.0, 0.0, 0.0))), ranking(&freq));
        assert_eq!(ranking(&score_serial_position(menu, &snap, (0.0, 1.0, 0.0))), ranking(&rec));

        // By hand: freq 2/6, 1/6, 3/6; last visits 50, 20, 60 -> ranks 2, 3, 1;
        // first visits 10, 20, 30 -> ranks 1, 2, 3.
        let h = 1.0 + 0.5 + 1.0 / 3.0;
        let freq_n = [2.0 / 6.0, 1.0 / 6.0, 3.0 / 6.0];
        let rec_n = [0.5 / h, (1.0 / 3.0) / h, 1.0 / h];
        let prim_n = [1.0 / h, 0.5 / h, (1.0 / 3.0) / h];
        let want: Vec<f64> = (0..3).map(|i| 0.4 * freq_n[i] + 0.4 * rec_n[i] + 0.2 * prim_n[i]).collect();
        let got = score_serial_position(menu, &snap, (0.4, 0.4, 0.2));
        for s in &got {
            let idx = menu.items().position(|i| i.id == s.item).unwrap();
            assert!((s.score - want[idx]).abs() < 1e-12, "{} vs {}", s.score, want[idx]);
        }
        assert_eq!(labels(&model, &got), ["P2", "P0", "P1"]);
    }

    #[test]
    fn access_rank_cold_start_is_document_order() {
        let model = model(4);
        let snap = aggregate(&EventDatabase::new(), &model);
        let (menus, state) = score_access_rank(&model, &snap, &AccessRankParams::default(), 0, &AccessRankState::default());
        assert_eq!(labels(&model, &menus[0].items), ["P0", "P1", "P2", "P3"]);
        assert!(menus[0].items.iter().all(|s| s.score == 0.0));
        assert_eq!(state.previous_ranking.len(), 4);
    }

    #[test]
    fn stability_threshold() {
        // A above B previously; B heavier by 1.1x then 1.3x, delta 1.2.
        assert_eq!(stable_rank(&[0, 1], &[1.0, 1.1], 1.2), [0, 1]);
        assert_eq!(stable_rank(&[0, 1], &[1.0, 1.3], 1.2), [1, 0]);
        // Exactly at the threshold does not overtake.
        assert_eq!(stable_rank(&[0, 1], &[1.0, 1.5], 1.5), [0, 1]);
        // Zero weights are always overtaken by positive ones.
        assert_eq!(stable_rank(&[0, 1, 2], &[0.0, 0.0, 1e-9], 1.2), [2, 0, 1]);
    }

    #[test]
    fn access_rank_uses_previous_ranking() {
        let model = model(2);
        let menu = &model.menus[0];
        let ids: Vec<_> = menu.items().map(|i| i.id.clone()).collect();
        let mut db = EventDatabase::new();
        // Clicks at the same instant as "now" so CRF = click count.
        for id in [&ids[0], &ids[1], &ids[1], &ids[0], &ids[1]] {
            db.log_click(id.clone(), PageId::new("/"), 0);
        }
        let snap = aggregate(&db, &model);
        let params = AccessRankParams::default();
        let w = access_rank_weights(menu, &snap, &params, 0);
        assert!(w[1] > w[0]);
        let state = AccessRankState { previous_ranking: vec![ids[0].clone(), ids[1].clone()], ..Default::default() };
        let (menus, _) = score_access_rank(&model, &snap, &params, 0, &state);
        let expect_swap = w[1] > params.delta_stability * w[0];
        assert_eq!(menus[0].items[0].item == ids[1], expect_swap);
    }

    #[test]
    fn access_rank_weight_components() {
        let model = model(3);
        let menu = &model.menus[0];
        let ids: Vec<_> = menu.items().map(|i| i.id.clone()).collect();
        let day = 24 * HOUR_MS;
        let mut db = EventDatabase::new();
        // sequence 0 -> 1 -> 0, last access item 0 at t = day.
        db.log_click(ids[0].clone(), PageId::new("/"), 0);
        db.log_click(ids[1].clone(), PageId::new("/"), day / 2);
        db.log_click(ids[0].clone(), PageId::new("/"), day);
        let snap = aggregate(&db, &model);
        let params = AccessRankParams::default();
        let now = day;
        let w = access_rank_weights(menu, &snap, &params, now);
        // prev = item 0; transitions from 0: {1: 1}; n = 3 -> denominators 1 + 3.
        let m = [1.0 / 4.0, 2.0 / 4.0, 1.0 / 4.0];
        let crf = [0.5 + 1.0, libm::exp2(-0.5), 0.0];
        // hour(now) = 0; item 0 clicked at hours 0 and 0 -> ratio 24 clamps to 1.25;
        // item 1 clicked at hour 12 only -> ratio 0 clamps to 0.8.
        let h = [1.25, 0.8, 1.0];
        for i in 0..3 {
            assert!((w[i] - m[i] * crf[i] * h[i]).abs() < 1e-12, "item {i}: {} vs {}", w[i], m[i] * crf[i] * h[i]);
        }
    }

    #[test]
    fn group_scores() {
        let doc = DocumentTree::parse(
            r#"<div class="m"><ul class="g"><li class="i">a</li><li class="i">b</li></ul><ul class="g"><li class="i">c</li></ul></div>"#,
        );
        let model = extract_menus(&doc, &SelectorSet::new(".m", Some(".g"), ".i").unwrap(), &PageId::new("/")).unwrap();
        let menu = &model.menus[0];
        let ids: Vec<_> = menu.items().map(|i| i.id.clone()).collect();
        let items = vec![
            ScoredItem { item: ids[2].clone(), score: 0.4 },
            ScoredItem { item: ids[0].clone(), score: 0.35 },
            ScoredItem { item: ids[1].clone(), score: 0.25 },
        ];
        let g = score_groups(menu, &items);
        assert_eq!(g[0].group, menu.groups[0].id);
        assert!((g[0].score - 0.6).abs() < 1e-12 && (g[1].score - 0.4).abs() < 1e-12);
        let zeros: Vec<_> = ids.iter().map(|id| ScoredItem { item: id.clone(), score: 0.0 }).collect();
        assert!(score_groups(menu, &zeros).iter().all(|g| g.score == 0.0));
    }
}
