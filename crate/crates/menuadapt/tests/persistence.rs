use menuadapt::core::engine::{FixedClock, Warning};
use menuadapt::core::{DocumentTree, Engine, EngineConfig, EventDatabase, PageId, PolicyConfig, StyleConfig};
use menuadapt::synth::{menu_html, menu_selectors};
use menuadapt::FileStore;

const T0: u64 = 1_704_067_200_000;

fn config() -> EngineConfig {
    EngineConfig::new(vec![menu_selectors()], PolicyConfig::default(), StyleConfig::default())
        .on_page(PageId::new("/s0/page0"))
}

fn load(store: FileStore, now: u64) -> Engine<FileStore, FixedClock> {
    Engine::init(DocumentTree::parse(&menu_html(3, 4)), config(), store, FixedClock(now)).unwrap()
}

#[test]
fn events_survive_a_reload() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.json");

    let mut first = load(FileStore::new(&path), T0);
    assert!(first.warnings().is_empty());
    assert!(first.applied().is_none());
    let target = first.model().unwrap().menus[0].groups[2].items[3].id.clone();
    for k in 0..3 {
        assert!(first.notify_click(target.clone(), T0 + 1_000 * k).unwrap());
    }
    first.notify_page_exit(T0 + 60_000).unwrap();

    let saved = EventDatabase::deserialize(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved.len(), 4);
    assert_eq!(&saved, first.database());

    let mut second = load(FileStore::new(&path), T0 + 120_000);
    assert!(second.warnings().is_empty());
    assert_eq!(second.database(), &saved);
    let scores = second.scores().unwrap();
    let menu = &scores.menus[0];
    assert_eq!(menu.score_of(&target), 1.0);
    let applied = second.applied().expect("the clicked item is highlighted");
    assert!(applied.plan.mutations.iter().all(|m| m.target() == &target));
}

#[test]
fn corrupt_store_starts_fresh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.json");
    std::fs::write(&path, "{\"version\": 1, \"events\": [").unwrap();

    let mut engine = load(FileStore::new(&path), T0);
    assert!(matches!(engine.warnings(), [Warning::CorruptStore { .. }]));
    assert!(engine.database().is_empty());
    assert!(engine.applied().is_none());

    // The next write replaces the broken file with a readable one.
    let item = engine.model().unwrap().menus[0].groups[0].items[0].id.clone();
    engine.notify_click(item, T0 + 10).unwrap();
    let saved = EventDatabase::deserialize(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved.len(), 1);
}

#[test]
fn missing_store_directory_is_reported_on_write() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent").join("store.json");

    let mut engine = load(FileStore::new(&path), T0);
    assert!(engine.warnings().is_empty());
    let item = engine.model().unwrap().menus[0].groups[0].items[0].id.clone();
    assert!(engine.notify_click(item, T0 + 10).is_err());
}
