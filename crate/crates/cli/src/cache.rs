//! On-disk cache of band tables.
//!
//! Entries are keyed by the config hash, the Floquet vertex, the grid and the
//! number of bands. Tables are stored as JSON with round-trip floats, so a
//! cached table renders to exactly the same output as a fresh one.

use std::fs;
use std::path::PathBuf;

use qgband_core::BandTable;

const VERSION: &str = "v1";

pub fn dir() -> PathBuf {
    if let Some(d) = std::env::var_os("QGBAND_CACHE_DIR") {
        return PathBuf::from(d);
    }
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
        .unwrap_or_else(std::env::temp_dir);
    base.join("qgband")
}

fn entry(hash: &str, vertex: &str, grid: [usize; 3], bands: usize) -> PathBuf {
    let [a, b, c] = grid;
    dir().join(format!("sweep-{VERSION}-{hash}-{vertex}-{a}x{b}x{c}-J{bands}.json"))
}

pub fn load(hash: &str, vertex: &str, grid: [usize; 3], bands: usize) -> Option<BandTable> {
    let text = fs::read_to_string(entry(hash, vertex, grid, bands)).ok()?;
    let table: BandTable = serde_json::from_str(&text).ok()?;
    (table.config_hash == hash && table.grid == grid && table.bands == bands).then_some(table)
}

/// Failures to write are reported but not fatal.
pub fn store(vertex: &str, table: &BandTable) {
    let path = entry(&table.config_hash, vertex, table.grid, table.bands);
    let write = || -> std::io::Result<()> {
        fs::create_dir_all(dir())?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_string(table).expect("table serializes"))?;
        fs::rename(&tmp, &path)
    };
    if let Err(e) = write() {
        eprintln!("warning: could not write cache entry {}: {e}", path.display());
    }
}
