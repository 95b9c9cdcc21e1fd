//! Interaction log: an append-only, revisioned list of click and visit
//! events with a single-document JSON encoding.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::menu::{ElementId, PageId};

/// Current store format version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogError {
    #[error("visit leaves at {leave} ms before entering at {enter} ms")]
    InvalidInterval { enter: u64, leave: u64 },
    #[error("corrupt store: {0}")]
    CorruptStore(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InteractionEvent {
    Click { item: ElementId, page: PageId, t: u64 },
    Visit { page: PageId, enter: u64, leave: u64 },
}

impl InteractionEvent {
    pub fn timestamp(&self) -> u64 {
        match self {
            InteractionEvent::Click { t, .. } => *t,
            InteractionEvent::Visit { enter, .. } => *enter,
        }
    }

    fn validate(&self) -> Result<(), LogError> {
        match *self {
            InteractionEvent::Visit { enter, leave, .. } if leave < enter => Err(LogError::InvalidInterval { enter, leave }),
            _ => Ok(()),
        }
    }

    /// One-line JSON form used by replay logs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDatabase {
    version: u32,
    revision: u64,
    events: Vec<InteractionEvent>,
}

impl Default for EventDatabase {
    fn default() -> Self {
        EventDatabase { version: FORMAT_VERSION, revision: 0, events: Vec::new() }
    }
}

impl EventDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn events(&self) -> &[InteractionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn log_click(&mut self, item: ElementId, page: PageId, t: u64) {
        self.push_unchecked(InteractionEvent::Click { item, page, t });
    }

    pub fn log_visit(&mut self, page: PageId, enter: u64, leave: u64) -> Result<(), LogError> {
        self.append(InteractionEvent::Visit { page, enter, leave })
    }

    /// Appends any event after validating it.
    pub fn append(&mut self, event: InteractionEvent) -> Result<(), LogError> {
        event.validate()?;
        self.push_unchecked(event);
        Ok(())
    }

    fn push_unchecked(&mut self, event: InteractionEvent) {
        self.events.push(event);
        self.revision += 1;
    }

    /// Drops every event and resets the revision.
    pub fn clear(&mut self) {
        *self = EventDatabase::default();
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string(self).expect("database serializes")
    }

    pub fn deserialize(text: &str) -> Result<EventDatabase, LogError> {
        let db: EventDatabase = serde_json::from_str(text).map_err(|e| LogError::CorruptStore(alloc::format!("{e}")))?;
        if db.version == 0 || db.version > FORMAT_VERSION {
            return Err(LogError::CorruptStore(alloc::format!("unsupported version {}", db.version)));
        }
        if db.revision != db.events.len() as u64 {
            return Err(LogError::CorruptStore(alloc::format!(
                "revision {} does not match {} events",
                db.revision,
                db.events.len()
            )));
        }
        for e in &db.events {
            e.validate().map_err(|err| LogError::CorruptStore(alloc::format!("{err}")))?;
        }
        Ok(db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(s: &str) -> ElementId {
        s.parse().unwrap()
    }

    #[test]
    fn empty_envelope() {
        assert_eq!(EventDatabase::new().serialize(), r#"{"version":1,"revision":0,"events":[]}"#);
    }

    #[test]
    fn exact_event_shapes() {
        let mut db = EventDatabase::new();
        db.log_click(item("ul#nav:0>li:2"), PageId::new("/wiki/Main_Page"), 1000);
        db.log_visit(PageId::new("/wiki/Main_Page"), 1000, 75000).unwrap();
        assert_eq!(db.revision(), 2);
        assert_eq!(
            db.serialize(),
            r#"{"version":1,"revision":2,"events":[{"type":"click","item":"ul#nav:0>li:2","page":"/wiki/Main_Page","t":1000},{"type":"visit","page":"/wiki/Main_Page","enter":1000,"leave":75000}]}"#
        );
        assert_eq!(EventDatabase::deserialize(&db.serialize()).unwrap(), db);
    }

    #[test]
    fn invalid_interval() {
        let mut db = EventDatabase::new();
        assert_eq!(db.log_visit(PageId::new("/"), 10, 9), Err(LogError::InvalidInterval { enter: 10, leave: 9 }));
        assert_eq!(db.revision(), 0);
        db.log_visit(PageId::new("/"), 10, 10).unwrap();
        assert_eq!(db.revision(), 1);
    }

    #[test]
    fn corrupt_stores() {
        for text in [
            "",
            "not json",
            r#"{"version":1,"revision":1,"events":[]}"#,
            r#"{"version":2,"revision":0,"events":[]}"#,
            r#"{"version":1,"revision":1,"events":[{"type":"visit","page":"/","enter":5,"leave":4}]}"#,
            r#"{"version":1,"revision":1,"events":[{"type":"hover","page":"/"}]}"#,
            r#"{"version":1,"revision":1,"events":[{"type":"click","item":"","page":"/","t":1}]}"#,
        ] {
            assert!(matches!(EventDatabase::deserialize(text), Err(LogError::CorruptStore(_))), "{text}");
        }
    }

    #[test]
    fn clear_resets_revision() {
        let mut db = EventDatabase::new();
        db.log_click(item("a:0"), PageId::new("/"), 1);
        db.clear();
        assert_eq!(db, EventDatabase::new());
        db.log_click(item("a:0"), PageId::new("/"), 2);
        assert_eq!(db.revision(), 1);
    }
}
