//! Output plumbing shared by the scenario runners.
//!
//! Every study writes a `summary.json` plus zero or more CSV tables into its
//! output directory. Numbers are written with the shortest round-trip
//! decimal form, and collections keep their construction order, so two runs
//! with the same inputs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

/// Serializes `value` to `<out>/summary.json` (pretty-printed, trailing
/// newline) and returns the path written.
pub fn write_summary<T: Serialize>(out: &Path, value: &T) -> Result<PathBuf> {
    ensure_dir(out)?;
    let path = out.join("summary.json");
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Opens `<out>/<name>` for buffered writing.
pub fn create_file(out: &Path, name: &str) -> Result<BufWriter<File>> {
    ensure_dir(out)?;
    Ok(BufWriter::new(File::create(out.join(name))?))
}

/// Writes one CSV row: fields joined by commas, one trailing newline.
pub fn write_row<W: Write>(w: &mut W, fields: &[String]) -> Result<()> {
    writeln!(w, "{}", fields.join(","))?;
    Ok(())
}

/// Shortest round-trip decimal form; `Display` for f64 is deterministic.
pub fn fmt_f(x: f64) -> String {
    format!("{x}")
}

/// Reads and parses a JSON scenario description. Failures here are the
/// caller's configuration problem, not an internal one.
pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
}
