use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{csv_line, csv_records, parse_f64, read_text, with_suffix, write_text};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::semantics::{CodeMatrix, SemanticSpec};

#[derive(Serialize, Deserialize)]
struct Sidecar {
    spec: SemanticSpec<f64>,
    class_names: Vec<String>,
    state_table: Vec<Vec<Option<usize>>>,
}

/// JSON file holding the vocabulary and state table of a code CSV.
pub fn spec_sidecar_path(codes: &Path) -> PathBuf {
    with_suffix(codes, ".spec.json")
}

fn row_labels(spec: &SemanticSpec<f64>) -> Vec<String> {
    spec.semantics
        .iter()
        .flat_map(|s| (0..s.state_dim).map(move |i| format!("{}[{i}]", s.name)))
        .collect()
}

/// Writes the code matrix as CSV (one row per code dimension, one column per
/// class) and its sidecar.
pub fn save_codes(path: &Path, spec: &SemanticSpec<f64>, codes: &CodeMatrix<f64>) -> Result<()> {
    codes.validate(spec)?;
    let mut text = csv_line(std::iter::once("row".to_string()).chain(codes.class_names.iter().cloned()));
    for (r, label) in row_labels(spec).into_iter().enumerate() {
        text.push_str(&csv_line(
            std::iter::once(label).chain(codes.phi.row(r).iter().map(|v| v.to_string())),
        ));
    }
    write_text(path, &text)?;
    let sidecar = Sidecar {
        spec: spec.clone(),
        class_names: codes.class_names.clone(),
        state_table: codes.state_table.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_text(&spec_sidecar_path(path), &(json + "\n"))
}

pub fn load_codes(path: &Path) -> Result<(SemanticSpec<f64>, CodeMatrix<f64>)> {
    let side_path = spec_sidecar_path(path);
    let side_text = read_text(&side_path)?;
    let sidecar: Sidecar = serde_json::from_str(&side_text)
        .map_err(|e| Error::parse(&side_path, e.line(), e.to_string()))?;
    let spec = SemanticSpec::new(sidecar.spec.semantics)?;

    let text = read_text(path)?;
    let records = csv_records(&text, path)?;
    let (header_line, header) = records
        .first()
        .ok_or_else(|| Error::parse(path, 1, "empty code file"))?;
    let classes: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if header.get(0) != Some("row") || classes != sidecar.class_names {
        return Err(Error::parse(
            path,
            *header_line,
            format!("header must be 'row' followed by the {} classes of the sidecar", sidecar.class_names.len()),
        ));
    }
    let labels = row_labels(&spec);
    if records.len() - 1 != labels.len() {
        return Err(Error::parse(
            path,
            records.last().map_or(1, |r| r.0),
            format!("{} code rows, vocabulary has {}", records.len() - 1, labels.len()),
        ));
    }
    let c = classes.len();
    let mut phi = Matrix::zeros(labels.len(), c);
    for (r, ((line, rec), label)) in records[1..].iter().zip(&labels).enumerate() {
        if &rec[0] != label {
            return Err(Error::parse(path, *line, format!("row '{}' where '{label}' was expected", &rec[0])));
        }
        if rec.len() != c + 1 {
            return Err(Error::parse(path, *line, format!("row has {} fields, header has {}", rec.len(), c + 1)));
        }
        for j in 0..c {
            phi[(r, j)] = parse_f64(&rec[j + 1], path, *line, &format!("class '{}'", classes[j]))?;
        }
    }
    let codes = CodeMatrix {
        phi,
        state_table: sidecar.state_table,
        class_names: classes,
    };
    codes
        .validate(&spec)
        .map_err(|e| Error::parse(path, *header_line, format!("codes disagree with sidecar: {e}")))?;
    Ok((spec, codes))
}
