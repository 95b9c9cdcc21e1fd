//! Usage metrics derived from the interaction log, cached by revision.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::Serialize;

use crate::log::{EventDatabase, InteractionEvent};
use crate::menu::{ElementId, MenuModel, PageId};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ItemMetrics {
    pub click_count: u64,
    pub click_timestamps: Vec<u64>,
    pub last_click_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PageMetrics {
    pub visit_count: u64,
    pub total_duration_ms: u64,
    pub visit_enter_timestamps: Vec<u64>,
    pub first_visit_ms: Option<u64>,
    pub last_visit_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MetricsSnapshot {
    pub at_revision: u64,
    pub items: BTreeMap<ElementId, ItemMetrics>,
    pub pages: BTreeMap<PageId, PageMetrics>,
    /// Click-to-click transition counts between model items, in
    /// chronological click order.
    pub transitions: BTreeMap<ElementId, BTreeMap<ElementId, u64>>,
    /// Item of the most recent click on a model item.
    pub last_clicked: Option<ElementId>,
}

impl MetricsSnapshot {
    pub fn item(&self, id: &ElementId) -> Option<&ItemMetrics> {
        self.items.get(id)
    }

    pub fn page(&self, id: &PageId) -> Option<&PageMetrics> {
        self.pages.get(id)
    }

    pub fn transition_count(&self, from: &ElementId, to: &ElementId) -> u64 {
        self.transitions.get(from).and_then(|m| m.get(to)).copied().unwrap_or(0)
    }
}

/// Aggregates every event of `db` into a fresh snapshot.
pub fn aggregate(db: &EventDatabase, model: &MenuModel) -> MetricsSnapshot {
    let mut snap = MetricsSnapshot {
        at_revision: db.revision(),
        items: model.items().map(|i| (i.id.clone(), ItemMetrics::default())).collect(),
        ..MetricsSnapshot::default()
    };
    let mut clicks: Vec<(u64, &ElementId)> = Vec::new();
    for event in db.events() {
        match event {
            InteractionEvent::Click { item, t, .. } => {
                if let Some(m) = snap.items.get_mut(item) {
                    m.click_count += 1;
                    m.click_timestamps.push(*t);
                    clicks.push((*t, item));
                }
            }
            InteractionEvent::Visit { page, enter, leave } => {
                let m = snap.pages.entry(page.clone()).or_default();
                m.visit_count += 1;
                m.total_duration_ms += leave - enter;
                m.visit_enter_timestamps.push(*enter);
            }
        }
    }
    for m in snap.items.values_mut() {
        m.click_timestamps.sort_unstable();
        m.last_click_ms = m.click_timestamps.last().copied();
    }
    for m in snap.pages.values_mut() {
        m.visit_enter_timestamps.sort_unstable();
        m.first_visit_ms = m.visit_enter_timestamps.first().copied();
        m.last_visit_ms = m.visit_enter_timestamps.last().copied();
    }
    // Stable: equal timestamps keep log order.
    clicks.sort_by_key(|&(t, _)| t);
    for pair in clicks.windows(2) {
        let (from, to) = (pair[0].1, pair[1].1);
        let row = match snap.transitions.get_mut(from) {
            Some(row) => row,
            None => snap.transitions.entry(from.clone()).or_default(),
        };
        match row.get_mut(to) {
            Some(n) => *n += 1,
            None => {
                row.insert(to.clone(), 1);
            }
        }
    }
    snap.last_clicked = clicks.last().map(|(_, id)| (*id).clone());
    snap
}

/// Returns `cache` untouched when it is current, otherwise recomputes.
pub fn compute_metrics<'a>(
    db: &EventDatabase,
    model: &MenuModel,
    cache: Option<&'a MetricsSnapshot>,
) -> alloc::borrow::Cow<'a, MetricsSnapshot> {
    match cache {
        Some(c) if c.at_revision == db.revision() => alloc::borrow::Cow::Borrowed(c),
        _ => alloc::borrow::Cow::Owned(aggregate(db, model)),
    }
}

/// Revision-keyed metrics cache with a recomputation counter.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    cache: Option<MetricsSnapshot>,
    recomputations: u64,
}

impl Analyzer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn metrics(&mut self, db: &EventDatabase, model: &MenuModel) -> &MetricsSnapshot {
        let stale = self.cache.as_ref().is_none_or(|c| c.at_revision != db.revision());
        if stale {
            self.cache = Some(aggregate(db, model));
            self.recomputations += 1;
        }
        self.cache.as_ref().expect("cache filled above")
    }

    /// Number of full recomputations performed so far.
    pub fn recomputations(&self) -> u64 {
        self.recomputations
    }

    pub fn invalidate(&mut self) {
        self.cache = None;
    }
}
