//! The four subcommands as library functions. Each returns its output in
//! memory; the binary decides where it goes.

use std::path::Path;
use std::time::Instant;

use menuadapt_core::analytics::Analyzer;
use menuadapt_core::engine::{StageTimings, Warning};
use menuadapt_core::menu::extract_all;
use menuadapt_core::policy::{self, AccessRankState, MenuScores};
use menuadapt_core::{
    AdaptationPlan, Clock, DocumentTree, ElementId, Engine, EngineConfig, EventDatabase, MemoryStore, MenuError,
    MenuModel, PageId, PolicyConfig, PolicyName, Scores, SelectorSet, StyleConfig, StyleName,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::logfile::read_log;
use crate::store::{RunClock, SystemClock};
use crate::synth;

/// Everything a run reads from disk.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub html: String,
    pub menus: Vec<SelectorSet>,
    pub log: EventDatabase,
    pub page: PageId,
}

impl Inputs {
    /// Reads the document, config and log. Without `log`, the config's
    /// store is used when it exists; otherwise the log is empty.
    pub fn load(html: &Path, config: &ConfigFile, log: Option<&Path>, page: Option<&str>) -> Result<Inputs, CliError> {
        let html_text = std::fs::read_to_string(html)
            .map_err(|e| CliError::Config(format!("cannot read document {}: {e}", html.display())))?;
        let db = match (log, &config.store) {
            (Some(path), _) => read_log(path)?,
            (None, Some(store)) if store.exists() => read_log(store)?,
            _ => EventDatabase::new(),
        };
        let page = match page {
            Some(p) => PageId::new(p),
            None => config.current_page.clone().unwrap_or_else(|| PageId::new("/")),
        };
        Ok(Inputs { html: html_text, menus: config.menus.clone(), log: db, page })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemScore {
    pub rank: usize,
    pub item: ElementId,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupScore {
    pub group: ElementId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MenuReport {
    pub menu: ElementId,
    /// Resolved top-N for this menu.
    pub n: usize,
    pub items: Vec<ItemScore>,
    pub groups: Vec<GroupScore>,
}

fn menu_reports(scores: &Scores, model: &MenuModel, style: &StyleConfig) -> Vec<MenuReport> {
    scores
        .menus
        .iter()
        .map(|ms: &MenuScores| {
            let count = model.menus.iter().find(|m| m.id == ms.menu).map_or(0, |m| m.item_count());
            MenuReport {
                menu: ms.menu.clone(),
                n: style.top_n.resolve(count),
                items: ms
                    .items
                    .iter()
                    .enumerate()
                    .map(|(i, s)| ItemScore {
                        rank: i + 1,
                        item: s.item.clone(),
                        label: model.item(&s.item).map(|it| it.label.clone()).unwrap_or_default(),
                        score: s.score,
                    })
                    .collect(),
                groups: ms.groups.iter().map(|g| GroupScore { group: g.group.clone(), score: g.score }).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptReport {
    pub policy: PolicyName,
    pub style: String,
    pub page: PageId,
    pub now_ms: u64,
    pub events: usize,
    pub menus: Vec<MenuReport>,
    pub plan: AdaptationPlan,
    pub timings_ns: StageTimings,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone)]
pub struct AdaptOutput {
    pub html: String,
    pub report: AdaptReport,
}

fn run_engine<C: Clock>(
    inputs: &Inputs,
    policy: &PolicyConfig,
    style: &StyleConfig,
    clock: C,
) -> Result<Engine<MemoryStore, C>, CliError> {
    let doc = DocumentTree::parse(&inputs.html);
    let config = EngineConfig::new(inputs.menus.clone(), *policy, style.clone()).on_page(inputs.page.clone());
    let store = MemoryStore::with_text(inputs.log.serialize());
    let engine = Engine::init(doc, config, store, clock).map_err(|e| match e {
        menuadapt_core::EngineError::Style(menuadapt_core::StyleError::StaleTarget(_)) => CliError::Data(e.to_string()),
        _ => CliError::Config(e.to_string()),
    })?;
    if engine.is_inert() {
        let reason = engine
            .warnings()
            .iter()
            .find_map(|w| match w {
                Warning::NoMenuMatched { reason } => Some(reason.clone()),
                _ => None,
            })
            .unwrap_or_else(|| "no menu matched".into());
        return Err(CliError::Config(reason));
    }
    Ok(engine)
}

/// Adapts the document under one policy and style.
pub fn adapt(inputs: &Inputs, policy: &PolicyConfig, style: &StyleConfig, clock: RunClock) -> Result<AdaptOutput, CliError> {
    let engine = run_engine(inputs, policy, style, clock)?;
    let model = engine.model().expect("not inert");
    let last = engine.last_adaptation().expect("adapted on init");
    let report = AdaptReport {
        policy: policy.policy_name,
        style: style.name(),
        page: inputs.page.clone(),
        now_ms: clock.now_ms(),
        events: inputs.log.len(),
        menus: menu_reports(&last.scores, model, style),
        plan: last.plan.clone(),
        timings_ns: last.timings,
        warnings: engine.warnings().to_vec(),
    };
    Ok(AdaptOutput { html: engine.document().to_html(), report })
}

fn extract(inputs: &Inputs) -> Result<(DocumentTree, MenuModel), CliError> {
    let doc = DocumentTree::parse(&inputs.html);
    let model = extract_all(&doc, &inputs.menus, &inputs.page).map_err(|e| match e {
        MenuError::InvalidSelector(_) | MenuError::NoMenuMatched(_) => CliError::Config(e.to_string()),
    })?;
    Ok((doc, model))
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub after_events: usize,
    pub now_ms: u64,
    pub menus: Vec<MenuReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub policy: PolicyName,
    pub snapshot_every: usize,
    pub events: usize,
    pub snapshots: Vec<Snapshot>,
}

/// Streams the log into a fresh database and records the full ranking
/// every `snapshot_every` events, plus once at the end of the log. Without
/// `now`, each snapshot is scored at its latest event time.
pub fn replay(inputs: &Inputs, policy: &PolicyConfig, snapshot_every: usize, now: Option<u64>) -> Result<ReplayReport, CliError> {
    if snapshot_every == 0 {
        return Err(CliError::Config("snapshot interval must be positive".into()));
    }
    policy.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let (_, model) = extract(inputs)?;
    let style = StyleConfig::default();
    let mut db = EventDatabase::new();
    let mut analyzer = Analyzer::new();
    let mut state = AccessRankState::default();
    let mut latest = 0u64;
    let mut snapshots = Vec::new();
    let total = inputs.log.len();
    for (i, event) in inputs.log.events().iter().enumerate() {
        db.append(event.clone()).map_err(|e| CliError::Data(e.to_string()))?;
        latest = latest.max(event.timestamp());
        let seen = i + 1;
        if seen % snapshot_every == 0 || seen == total {
            let t = now.unwrap_or(latest);
            let metrics = analyzer.metrics(&db, &model);
            let scores = policy::score(policy, &model, metrics, t, &mut state);
            snapshots.push(Snapshot { after_events: seen, now_ms: t, menus: menu_reports(&scores, &model, &style) });
        }
    }
    Ok(ReplayReport { policy: policy.policy_name, snapshot_every, events: total, snapshots })
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixCell {
    pub policy: PolicyName,
    pub style: StyleName,
    pub ok: bool,
    pub error: Option<String>,
    pub output_sha256: Option<String>,
    pub mutations: usize,
    /// Output differs from the input document.
    pub changed: bool,
    pub elapsed_ns: u64,
    pub menus: Vec<MenuReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixReport {
    pub successes: usize,
    pub total: usize,
    /// Every policy scored identically under all four styles.
    pub decoupled: bool,
    pub cells: Vec<MatrixCell>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Runs every policy against every single style. `style` supplies top-N and
/// the fold minimum; its style list is ignored.
pub fn matrix(inputs: &Inputs, style: &StyleConfig, now: Option<u64>) -> Result<MatrixReport, CliError> {
    extract(inputs)?;
    let mut cells = Vec::with_capacity(24);
    for policy in PolicyName::ALL {
        for s in StyleName::ALL {
            let cell_style = StyleConfig { styles: vec![s], ..style.clone() };
            let started = Instant::now();
            let result = adapt(inputs, &PolicyConfig::new(policy), &cell_style, RunClock::new(now));
            let elapsed_ns = started.elapsed().as_nanos() as u64;
            cells.push(match result {
                Ok(out) => MatrixCell {
                    policy,
                    style: s,
                    ok: true,
                    error: None,
                    output_sha256: Some(sha256_hex(out.html.as_bytes())),
                    mutations: out.report.plan.len(),
                    changed: out.html != inputs.html,
                    elapsed_ns,
                    menus: out.report.menus,
                },
                Err(e) => MatrixCell {
                    policy,
                    style: s,
                    ok: false,
                    error: Some(e.to_string()),
                    output_sha256: None,
                    mutations: 0,
                    changed: false,
                    elapsed_ns,
                    menus: Vec::new(),
                },
            });
        }
    }
    let scores = |c: &MatrixCell| -> Vec<(ElementId, f64)> {
        c.menus.iter().flat_map(|m| m.items.iter().map(|i| (i.item.clone(), i.score))).collect()
    };
    let decoupled = cells.chunks(StyleName::ALL.len()).all(|row| row.iter().all(|c| scores(c) == scores(&row[0])));
    let successes = cells.iter().filter(|c| c.ok).count();
    Ok(MatrixReport { successes, total: cells.len(), decoupled, cells })
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub groups: usize,
    pub items: usize,
    pub events: usize,
    pub reps: usize,
    pub seed: u64,
    pub style: StyleConfig,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { groups: 50, items: 10, events: 5000, reps: 10, seed: 1, style: StyleConfig::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub policy: PolicyName,
    pub mean_ms: f64,
    pub max_ms: f64,
    pub min_ms: f64,
    /// Per-stage means over the repetitions.
    pub stages_mean_ns: StageTimings,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub groups: usize,
    pub items_per_group: usize,
    pub item_count: usize,
    pub events: usize,
    pub reps: usize,
    pub seed: u64,
    pub style: String,
    pub store_bytes: usize,
    pub rows: Vec<BenchRow>,
}

/// Fixed "now" with real stage timings.
#[derive(Debug, Clone, Copy)]
struct BenchClock {
    now: u64,
    inner: SystemClock,
}

impl Clock for BenchClock {
    fn now_ms(&self) -> u64 {
        self.now
    }

    fn monotonic_ns(&self) -> u64 {
        self.inner.monotonic_ns()
    }
}

/// Times the full pipeline (parse, load store, extract, metrics, policy,
/// plan, apply) on a synthetic menu, once per policy and repetition.
pub fn bench(opts: &BenchOptions) -> Result<BenchReport, CliError> {
    if opts.groups == 0 || opts.items == 0 || opts.reps == 0 {
        return Err(CliError::Config("groups, items and reps must be positive".into()));
    }
    opts.style.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let html = synth::menu_html(opts.groups, opts.items);
    let selectors = vec![synth::menu_selectors()];
    let root = PageId::new("/");
    let model = extract_all(&DocumentTree::parse(&html), &selectors, &root).map_err(|e| CliError::Config(e.to_string()))?;
    let db = synth::random_log(&model, opts.events, opts.seed);
    let store_text = db.serialize();
    let clock = BenchClock { now: synth::EPOCH_MS + 30 * 24 * 3_600_000, inner: SystemClock::new() };

    let mut rows = Vec::new();
    for policy in PolicyName::ALL {
        let mut times = Vec::with_capacity(opts.reps);
        let mut stages = Vec::with_capacity(opts.reps);
        for _ in 0..opts.reps {
            let text = store_text.clone();
            let config = EngineConfig::new(selectors.clone(), PolicyConfig::new(policy), opts.style.clone());
            let started = Instant::now();
            let doc = DocumentTree::parse(&html);
            let engine = Engine::init(doc, config, MemoryStore::with_text(text), clock)
                .map_err(|e| CliError::Data(e.to_string()))?;
            times.push(started.elapsed().as_secs_f64() * 1e3);
            stages.push(engine.last_adaptation().map(|a| a.timings).unwrap_or_default());
        }
        let n = opts.reps as u64;
        let mean = |f: fn(&StageTimings) -> u64| stages.iter().map(f).sum::<u64>() / n;
        rows.push(BenchRow {
            policy,
            mean_ms: times.iter().sum::<f64>() / times.len() as f64,
            max_ms: times.iter().copied().fold(f64::MIN, f64::max),
            min_ms: times.iter().copied().fold(f64::MAX, f64::min),
            stages_mean_ns: StageTimings {
                load_ns: mean(|s| s.load_ns),
                extract_ns: mean(|s| s.extract_ns),
                metrics_ns: mean(|s| s.metrics_ns),
                policy_ns: mean(|s| s.policy_ns),
                plan_ns: mean(|s| s.plan_ns),
                apply_ns: mean(|s| s.apply_ns),
            },
        });
    }
    Ok(BenchReport {
        groups: opts.groups,
        items_per_group: opts.items,
        item_count: model.item_count(),
        events: opts.events,
        reps: opts.reps,
        seed: opts.seed,
        style: opts.style.name(),
        store_bytes: store_text.len(),
        rows,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
