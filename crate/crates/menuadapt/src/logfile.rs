//! Interaction log files: either the store envelope or JSON Lines with one
//! event per line.

use std::path::Path;

use menuadapt_core::{EventDatabase, InteractionEvent};

use crate::error::CliError;

pub fn parse_log(text: &str) -> Result<EventDatabase, CliError> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(EventDatabase::new());
    }
    let envelope_err = match EventDatabase::deserialize(text) {
        Ok(db) => return Ok(db),
        Err(e) => e,
    };
    // A single-line log that is not an event is reported as a bad envelope.
    let looks_like_envelope = trimmed.lines().count() == 1
        && serde_json::from_str::<serde_json::Value>(trimmed).is_ok_and(|v| v.get("events").is_some());
    if looks_like_envelope {
        return Err(CliError::Data(envelope_err.to_string()));
    }
    let mut db = EventDatabase::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let event: InteractionEvent = serde_json::from_str(line)
            .map_err(|e| CliError::Data(format!("corrupt log line {}: {e}", n + 1)))?;
        db.append(event).map_err(|e| CliError::Data(format!("corrupt log line {}: {e}", n + 1)))?;
    }
    Ok(db)
}

pub fn read_log(path: &Path) -> Result<EventDatabase, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read log {}: {e}", path.display())))?;
    parse_log(&text)
}

/// JSON Lines form of `db`, one event per line.
pub fn to_jsonl(db: &EventDatabase) -> String {
    let mut out = String::new();
    for e in db.events() {
        out.push_str(&e.to_json());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use menuadapt_core::PageId;

    fn sample() -> EventDatabase {
        let mut db = EventDatabase::new();
        db.log_click("li#a:0".parse().unwrap(), PageId::new("/"), 5);
        db.log_visit(PageId::new("/a"), 5, 9).unwrap();
        db
    }

    #[test]
    fn both_formats_read_the_same() {
        let db = sample();
        assert_eq!(parse_log(&db.serialize()).unwrap(), db);
        assert_eq!(parse_log(&to_jsonl(&db)).unwrap(), db);
        assert_eq!(parse_log("\n  \n").unwrap(), EventDatabase::new());
    }

    #[test]
    fn corrupt_logs_are_data_errors() {
        for text in [
            r#"{"version":1,"revision":3,"events":[]}"#,
            r#"{"type":"click","item":"li:0","page":"/","t":1}
{"type":"visit","page":"/","enter":9,"leave":2}"#,
            "garbage",
            r#"{"type":"hover","page":"/"}"#,
        ] {
            assert!(matches!(parse_log(text), Err(CliError::Data(_))), "{text}");
        }
    }
}
