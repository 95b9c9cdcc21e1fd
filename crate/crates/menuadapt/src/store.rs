//! File-backed store and wall clocks.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use menuadapt_core::engine::StoreError;
use menuadapt_core::{Clock, Store};

/// Replaces `path` with `contents` by writing a sibling temp file and
/// renaming it over the target.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// The serialized event database kept in one file.
#[derive(Debug, Clone)]
pub struct FileStore {
    path: PathBuf,
}

impl FileStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FileStore { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Store for FileStore {
    fn load(&mut self) -> Result<Option<String>, StoreError> {
        match fs::read_to_string(&self.path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(StoreError(format!("{}: {e}", self.path.display()))),
        }
    }

    fn save(&mut self, text: &str) -> Result<(), StoreError> {
        write_atomic(&self.path, text.as_bytes()).map_err(|e| StoreError(format!("{}: {e}", self.path.display())))
    }
}

/// Wall-clock time plus a monotonic counter for stage timings.
#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }

    fn monotonic_ns(&self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }
}

/// Clock selected by `--now`: frozen when given, otherwise the system clock.
/// A frozen clock also freezes stage timings so that outputs are
/// reproducible.
#[derive(Debug, Clone, Copy)]
pub enum RunClock {
    Frozen(u64),
    System(SystemClock),
}

impl RunClock {
    pub fn new(now: Option<u64>) -> Self {
        match now {
            Some(t) => RunClock::Frozen(t),
            None => RunClock::System(SystemClock::new()),
        }
    }
}

impl Clock for RunClock {
    fn now_ms(&self) -> u64 {
        match self {
            RunClock::Frozen(t) => *t,
            RunClock::System(c) => c.now_ms(),
        }
    }

    fn monotonic_ns(&self) -> u64 {
        match self {
            RunClock::Frozen(_) => 0,
            RunClock::System(c) => c.monotonic_ns(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_loads_as_none() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = FileStore::new(dir.path().join("absent.json"));
        assert_eq!(store.load().unwrap(), None);
    }

    #[test]
    fn save_replaces_whole_file_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.json");
        let mut store = FileStore::new(&path);
        store.save("a much longer first document").unwrap();
        store.save("short").unwrap();
        assert_eq!(store.load().unwrap().as_deref(), Some("short"));
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, [std::ffi::OsString::from("store.json")]);
    }

    #[test]
    fn frozen_clock_has_no_timings() {
        let c = RunClock::new(Some(42));
        assert_eq!(c.now_ms(), 42);
        assert_eq!(c.monotonic_ns(), 0);
        let s = RunClock::new(None);
        assert!(s.now_ms() > 1_600_000_000_000);
    }
}
