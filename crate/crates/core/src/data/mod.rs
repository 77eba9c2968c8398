//! File formats, loaders and the synthetic task generator.
//!
//! Everything here works on `f64`.

mod attributes;
mod checkpoint;
mod codes;
mod embeddings;
mod features;
mod split;
mod synthetic;
mod taxonomy;

use std::path::{Path, PathBuf};

pub use attributes::{load_attribute_matrix, save_attribute_matrix, AttributeMatrix, Rescaling};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use codes::{load_codes, save_codes, spec_sidecar_path};
pub use embeddings::load_embeddings;
pub use features::{class_list_path, load_class_list, load_features, save_class_list, save_features, FeatureSet};
pub use split::{load_split, save_split, SplitSpec};
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticTask};
pub use taxonomy::{load_taxonomy, save_taxonomy, taxonomy_to_text};

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    write_bytes(path, contents.as_bytes())
}

pub fn write_bytes(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `path` with `suffix` appended to its file name.
pub(crate) fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn parse_f64(field: &str, path: &Path, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("{what}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("{what}: value '{field}' is not finite")));
    }
    Ok(v)
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

/// Non-empty CSV records with their 1-based line numbers.
fn csv_records(text: &str, path: &Path) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in csv_reader(text).records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok(out)
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let fields: Vec<String> = fields.into_iter().collect();
    w.write_record(&fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
