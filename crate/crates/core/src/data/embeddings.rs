use std::collections::{HashMap, HashSet};
use std::path::Path;

use log::warn;

use super::{parse_f64, read_text};
use crate::error::{Error, Result};
use crate::semantics::EmbeddingTable;

fn tokens(class: &str) -> Vec<&str> {
    class.split(|c: char| c.is_whitespace() || c == '_').filter(|t| !t.is_empty()).collect()
}

fn joined(class: &str) -> String {
    tokens(class).join("_")
}

/// Reads `word v1 .. vk` lines (an optional `count dim` header line is
/// skipped) and keeps vectors for `classes`. A class is looked up by its
/// exact name, then with its words joined by underscores, then as the mean of
/// its word vectors; the last case is listed in the table's `fallbacks`.
pub fn load_embeddings(path: &Path, classes: &[String], name: &str) -> Result<EmbeddingTable<f64>> {
    let text = read_text(path)?;
    let mut wanted: HashSet<String> = HashSet::new();
    for c in classes {
        wanted.insert(c.clone());
        wanted.insert(joined(c));
        wanted.extend(tokens(c).into_iter().map(str::to_string));
    }

    let mut dim: Option<(usize, usize)> = None;
    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let number = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if std::mem::take(&mut first) && values.len() == 1 && word.parse::<u64>().is_ok() && values[0].parse::<u64>().is_ok() {
            continue;
        }
        match dim {
            None => dim = Some((values.len(), number)),
            Some((d, at)) if d != values.len() => {
                return Err(Error::parse(
                    path,
                    number,
                    format!("vector has {} values, line {at} has {d}", values.len()),
                ))
            }
            _ => {}
        }
        if values.is_empty() {
            return Err(Error::parse(path, number, format!("word '{word}' has no vector")));
        }
        if wanted.contains(word) && !vectors.contains_key(word) {
            let v = values
                .iter()
                .map(|f| parse_f64(f, path, number, &format!("vector of '{word}'")))
                .collect::<Result<Vec<_>>>()?;
            vectors.insert(word.to_string(), v);
        }
    }

    let mut entries = Vec::with_capacity(classes.len());
    let mut fallbacks = Vec::new();
    for c in classes {
        let v = if let Some(v) = vectors.get(c).or_else(|| vectors.get(&joined(c))) {
            v.clone()
        } else {
            let toks = tokens(c);
            let missing: Vec<&str> = toks.iter().copied().filter(|t| !vectors.contains_key(*t)).collect();
            if toks.is_empty() || !missing.is_empty() {
                return Err(Error::data(format!(
                    "{}: no vector for class '{c}' (missing words: {})",
                    path.display(),
                    missing.join(" ")
                )));
            }
            let d = vectors[toks[0]].len();
            let mut mean = vec![0.0; d];
            for t in &toks {
                for (m, x) in mean.iter_mut().zip(&vectors[*t]) {
                    *m += x;
                }
            }
            let n = toks.len() as f64;
            mean.iter_mut().for_each(|m| *m /= n);
            warn!("{}: class '{c}' uses the mean of its {} word vectors", path.display(), toks.len());
            fallbacks.push(c.clone());
            mean
        };
        entries.push((c.clone(), v));
    }
    let mut table = EmbeddingTable::new(name, entries)?;
    table.fallbacks = fallbacks;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(body: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vec.txt");
        std::fs::write(&p, body).unwrap();
        (dir, p)
    }

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn exact_hits() {
        let (_d, p) = write("4 2\ncat 1 2\ndog 3 4\nfox 5 6\nemu 0 1\n");
        let t = load_embeddings(&p, &s(&["dog", "cat"]), "w2v").unwrap();
        assert_eq!(t.get("dog").unwrap(), &[3.0, 4.0]);
        assert_eq!(t.get("cat").unwrap(), &[1.0, 2.0]);
        assert_eq!(t.dim, 2);
        assert!(t.fallbacks.is_empty());
    }

    #[test]
    fn underscore_then_token_average() {
        let (_d, p) = write("killer 1 0 4\nwhale 0 2 -2\npolar_bear 9 9 9\n");
        let t = load_embeddings(&p, &s(&["killer whale", "polar bear"]), "w2v").unwrap();
        assert_eq!(t.get("polar bear").unwrap(), &[9.0, 9.0, 9.0]);
        assert_eq!(t.get("killer whale").unwrap(), &[0.5, 1.0, 1.0]);
        assert_eq!(t.fallbacks, s(&["killer whale"]));
    }

    #[test]
    fn unresolvable_class() {
        let (_d, p) = write("killer 1 0\n");
        assert!(matches!(
            load_embeddings(&p, &s(&["killer whale"]), "w2v"),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn inconsistent_dimensions() {
        let (_d, p) = write("a 1 2\nb 1 2 3\n");
        assert!(matches!(
            load_embeddings(&p, &s(&["a"]), "w2v"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
