//! Page-load lifecycle: load the store, extract menus, adapt once, then log
//! clicks and the visit until the page is left.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::analytics::{Analyzer, MetricsSnapshot};
use crate::dom::{DocumentTree, NodeId};
use crate::log::EventDatabase;
use crate::menu::{extract_all, ElementId, MenuError, MenuModel, PageId, SelectorSet};
use crate::policy::{self, AccessRankState, PolicyConfig, PolicyError, Scores};
use crate::style::{self, AdaptationPlan, AppliedState, StyleConfig, StyleError};

/// Time source. `monotonic_ns` only feeds stage timings; a clock that
/// returns a constant there reports zero durations.
pub trait Clock {
    fn now_ms(&self) -> u64;

    fn monotonic_ns(&self) -> u64 {
        0
    }
}

/// A frozen clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedClock(pub u64);

impl Clock for FixedClock {
    fn now_ms(&self) -> u64 {
        self.0
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now_ms(&self) -> u64 {
        (**self).now_ms()
    }

    fn monotonic_ns(&self) -> u64 {
        (**self).monotonic_ns()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("store error: {0}")]
pub struct StoreError(pub String);

/// Persistent home of the serialized event database. Saves replace the
/// whole document.
pub trait Store {
    fn load(&mut self) -> Result<Option<String>, StoreError>;
    fn save(&mut self, text: &str) -> Result<(), StoreError>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryStore {
    pub text: Option<String>,
    pub writes: usize,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_text(text: impl Into<String>) -> Self {
        MemoryStore { text: Some(text.into()), writes: 0 }
    }
}

impl Store for MemoryStore {
    fn load(&mut self) -> Result<Option<String>, StoreError> {
        Ok(self.text.clone())
    }

    fn save(&mut self, text: &str) -> Result<(), StoreError> {
        self.text = Some(text.into());
        self.writes += 1;
        Ok(())
    }
}

impl<S: Store + ?Sized> Store for &mut S {
    fn load(&mut self) -> Result<Option<String>, StoreError> {
        (**self).load()
    }

    fn save(&mut self, text: &str) -> Result<(), StoreError> {
        (**self).save(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub menus: Vec<SelectorSet>,
    pub policy: PolicyConfig,
    pub style: StyleConfig,
    #[serde(default = "root_page")]
    pub current_page: PageId,
}

fn root_page() -> PageId {
    PageId::new("/")
}

impl EngineConfig {
    pub fn new(menus: Vec<SelectorSet>, policy: PolicyConfig, style: StyleConfig) -> Self {
        EngineConfig { menus, policy, style, current_page: root_page() }
    }

    pub fn on_page(mut self, page: PageId) -> Self {
        self.current_page = page;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// The stored log could not be read; a fresh database replaced it.
    CorruptStore { reason: String },
    /// No selector set matched; the engine only logs visits.
    NoMenuMatched { reason: String },
    /// Page exit reported before the visit started; clamped.
    ExitBeforeEnter { enter: u64, leave: u64 },
}

/// Wall time per pipeline stage, in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageTimings {
    pub load_ns: u64,
    pub extract_ns: u64,
    pub metrics_ns: u64,
    pub policy_ns: u64,
    pub plan_ns: u64,
    pub apply_ns: u64,
}

impl StageTimings {
    pub fn total_ns(&self) -> u64 {
        self.load_ns + self.extract_ns + self.metrics_ns + self.policy_ns + self.plan_ns + self.apply_ns
    }
}

/// Outcome of the most recent adaptation pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Adaptation {
    pub scores: Scores,
    /// Resolved N per menu.
    pub top_n: Vec<(ElementId, usize)>,
    pub plan: AdaptationPlan,
    pub timings: StageTimings,
}

pub struct Engine<S: Store, C: Clock> {
    doc: DocumentTree,
    config: EngineConfig,
    model: Option<MenuModel>,
    db: EventDatabase,
    analyzer: Analyzer,
    applied: Option<AppliedState>,
    access_rank_state: AccessRankState,
    store: S,
    clock: C,
    enter_ms: u64,
    warnings: Vec<Warning>,
    last: Option<Adaptation>,
    load_ns: u64,
    extract_ns: u64,
}

impl<S: Store, C: Clock> Engine<S, C> {
    /// Loads the store, extracts menus, records the visit start and applies
    /// the configured adaptation. The document must be fully parsed.
    pub fn init(doc: DocumentTree, config: EngineConfig, mut store: S, clock: C) -> Result<Self, EngineError> {
        config.policy.validate()?;
        config.style.validate()?;
        let mut warnings = Vec::new();

        let t0 = clock.monotonic_ns();
        let db = match store.load() {
            Ok(None) => EventDatabase::new(),
            Ok(Some(text)) => EventDatabase::deserialize(&text).unwrap_or_else(|e| {
                warnings.push(Warning::CorruptStore { reason: alloc::format!("{e}") });
                EventDatabase::new()
            }),
            Err(e) => {
                warnings.push(Warning::CorruptStore { reason: e.0 });
                EventDatabase::new()
            }
        };
        let t1 = clock.monotonic_ns();
        let model = match extract_all(&doc, &config.menus, &config.current_page) {
            Ok(m) => Some(m),
            Err(MenuError::NoMenuMatched(sel)) => {
                warnings.push(Warning::NoMenuMatched { reason: alloc::format!("menu selector `{sel}` matched nothing") });
                None
            }
            // Selectors are parsed before they reach the engine.
            Err(MenuError::InvalidSelector(e)) => unreachable!("selector sets hold parsed selectors: {e}"),
        };
        let t2 = clock.monotonic_ns();

        let mut engine = Engine {
            enter_ms: clock.now_ms(),
            doc,
            config,
            model,
            db,
            analyzer: Analyzer::new(),
            applied: None,
            access_rank_state: AccessRankState::default(),
            store,
            clock,
            warnings,
            last: None,
            load_ns: t1.saturating_sub(t0),
            extract_ns: t2.saturating_sub(t1),
        };
        engine.adapt()?;
        Ok(engine)
    }

    fn adapt(&mut self) -> Result<(), EngineError> {
        let Some(model) = &self.model else { return Ok(()) };
        let clock = &self.clock;
        let t0 = clock.monotonic_ns();
        let metrics = self.analyzer.metrics(&self.db, model);
        let t1 = clock.monotonic_ns();
        let scores = policy::score(&self.config.policy, model, metrics, clock.now_ms(), &mut self.access_rank_state);
        let t2 = clock.monotonic_ns();
        let plan = style::plan(&scores, model, &self.config.style);
        let t3 = clock.monotonic_ns();
        if !plan.is_empty() {
            self.applied = Some(style::apply(&plan, &mut self.doc, model)?);
        }
        let t4 = clock.monotonic_ns();
        let top_n = model.menus.iter().map(|m| (m.id.clone(), style::top_n(m.item_count(), &self.config.style))).collect();
        self.last = Some(Adaptation {
            scores,
            top_n,
            plan,
            timings: StageTimings {
                load_ns: self.load_ns,
                extract_ns: self.extract_ns,
                metrics_ns: t1.saturating_sub(t0),
                policy_ns: t2.saturating_sub(t1),
                plan_ns: t3.saturating_sub(t2),
                apply_ns: t4.saturating_sub(t3),
            },
        });
        Ok(())
    }

    fn persist(&mut self) -> Result<(), EngineError> {
        self.store.save(&self.db.serialize())?;
        Ok(())
    }

    /// Logs a click on a menu item. Ids unknown to the current model are
    /// logged as well. Returns false when the engine is inert.
    pub fn notify_click(&mut self, item: ElementId, t: u64) -> Result<bool, EngineError> {
        if self.model.is_none() {
            return Ok(false);
        }
        self.db.log_click(item, self.config.current_page.clone(), t);
        self.persist()?;
        Ok(true)
    }

    /// Logs a click on a document node, attributed to the menu item that
    /// contains it. Clicks outside every item are ignored.
    pub fn notify_click_node(&mut self, node: NodeId, t: u64) -> Result<bool, EngineError> {
        let item = self.model.as_ref().and_then(|m| m.item_containing(&self.doc, node)).map(|i| i.id.clone());
        match item {
            Some(id) => self.notify_click(id, t),
            None => Ok(false),
        }
    }

    /// Closes the current visit at `t` and persists it.
    pub fn notify_page_exit(&mut self, t: u64) -> Result<(), EngineError> {
        let enter = self.enter_ms;
        let leave = if t < enter {
            self.warnings.push(Warning::ExitBeforeEnter { enter, leave: t });
            enter
        } else {
            t
        };
        self.db.log_visit(self.config.current_page.clone(), enter, leave).expect("leave clamped to enter");
        self.enter_ms = leave;
        self.persist()
    }

    pub fn set_policy(&mut self, policy: PolicyConfig) -> Result<(), EngineError> {
        policy.validate()?;
        self.cancel_adaptation();
        self.config.policy = policy;
        self.adapt()
    }

    pub fn set_style(&mut self, style: StyleConfig) -> Result<(), EngineError> {
        style.validate()?;
        self.cancel_adaptation();
        self.config.style = style;
        self.adapt()
    }

    /// Re-runs the adaptation with the current configuration and log.
    pub fn refresh(&mut self) -> Result<(), EngineError> {
        self.cancel_adaptation();
        self.adapt()
    }

    /// Restores the original document.
    pub fn cancel_adaptation(&mut self) {
        if let Some(applied) = self.applied.take() {
            style::cancel(applied, &mut self.doc);
        }
    }

    /// Empties the store and cancels the adaptation.
    pub fn clear_history(&mut self) -> Result<(), EngineError> {
        self.cancel_adaptation();
        self.db.clear();
        self.analyzer.invalidate();
        self.access_rank_state = AccessRankState::default();
        self.last = None;
        self.persist()
    }

    /// Current scores without touching the document.
    pub fn scores(&mut self) -> Option<Scores> {
        let model = self.model.as_ref()?;
        let metrics = self.analyzer.metrics(&self.db, model);
        let mut state = self.access_rank_state.clone();
        Some(policy::score(&self.config.policy, model, metrics, self.clock.now_ms(), &mut state))
    }

    pub fn metrics(&mut self) -> Option<&MetricsSnapshot> {
        let model = self.model.as_ref()?;
        Some(self.analyzer.metrics(&self.db, model))
    }

    pub fn document(&self) -> &DocumentTree {
        &self.doc
    }

    pub fn model(&self) -> Option<&MenuModel> {
        self.model.as_ref()
    }

    pub fn database(&self) -> &EventDatabase {
        &self.db
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn applied(&self) -> Option<&AppliedState> {
        self.applied.as_ref()
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn access_rank_state(&self) -> &AccessRankState {
        &self.access_rank_state
    }

    pub fn last_adaptation(&self) -> Option<&Adaptation> {
        self.last.as_ref()
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn is_inert(&self) -> bool {
        self.model.is_none()
    }

    pub fn store(&self) -> &S {
        &self.store
    }

    pub fn into_document(self) -> DocumentTree {
        self.doc
    }
}
