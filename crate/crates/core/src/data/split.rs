use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_text};
use crate::error::{Error, Result};

/// Partition of the known classes into training, zero-shot and validation
/// sets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_classes: Vec<String>,
    pub zs_classes: Vec<String>,
    pub validation_classes: Vec<String>,
}

impl SplitSpec {
    fn sections(&self) -> [(&'static str, &Vec<String>); 3] {
        [
            ("train", &self.train_classes),
            ("zs", &self.zs_classes),
            ("validation", &self.validation_classes),
        ]
    }

    /// Checks the three lists are pairwise disjoint and, when `known` is
    /// given, contained in it.
    pub fn validate(&self, known: Option<&[String]>) -> Result<()> {
        let mut all: Vec<&String> = Vec::new();
        for (section, list) in self.sections() {
            for c in list {
                if all.contains(&c) {
                    return Err(Error::data(format!("class '{c}' listed twice in the split ({section})")));
                }
                if known.is_some_and(|k| !k.contains(c)) {
                    return Err(Error::data(format!("split class '{c}' ({section}) is not a known class")));
                }
                all.push(c);
            }
        }
        Ok(())
    }
}

/// Reads a file with `[train]`, `[zs]` and `[validation]` headers, each
/// followed by one class name per line. Missing sections are empty.
pub fn load_split(path: &Path) -> Result<SplitSpec> {
    let text = read_text(path)?;
    let mut split = SplitSpec::default();
    let mut current: Option<&mut Vec<String>> = None;
    let mut seen: Vec<(String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if seen.iter().any(|(s, _)| s == section) {
                return Err(Error::parse(path, number, format!("section [{section}] repeated")));
            }
            current = Some(match section {
                "train" => &mut split.train_classes,
                "zs" => &mut split.zs_classes,
                "validation" => &mut split.validation_classes,
                other => return Err(Error::parse(path, number, format!("unknown section [{other}]"))),
            });
            seen.push((section.to_string(), number));
            continue;
        }
        let Some(list) = current.as_mut() else {
            return Err(Error::parse(path, number, "class name before any section header"));
        };
        if list.iter().any(|c| c == line) {
            return Err(Error::parse(path, number, format!("class '{line}' repeated")));
        }
        list.push(line.to_string());
    }
    split
        .validate(None)
        .map_err(|e| Error::parse(path, text.lines().count().max(1), e.to_string()))?;
    Ok(split)
}

pub fn save_split(path: &Path, split: &SplitSpec) -> Result<()> {
    let mut text = String::new();
    for (section, list) in split.sections() {
        text.push_str(&format!("[{section}]\n"));
        for c in list {
            text.push_str(c);
            text.push('\n');
        }
    }
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("split.txt");
        let split = SplitSpec {
            train_classes: vec!["a".into(), "b c".into()],
            zs_classes: vec!["d".into()],
            validation_classes: vec![],
        };
        save_split(&p, &split).unwrap();
        assert_eq!(load_split(&p).unwrap(), split);
        split.validate(Some(&["a".into(), "b c".into(), "d".into()])).unwrap();
        assert!(split.validate(Some(&["a".into()])).is_err());

        for (body, line) in [
            ("a\n[train]\n", 1),
            ("[train]\na\n[test]\n", 3),
            ("[train]\na\na\n", 3),
            ("[train]\na\n[zs]\nb\n[train]\n", 5),
        ] {
            std::fs::write(&p, body).unwrap();
            assert!(matches!(load_split(&p), Err(Error::Parse { line: l, .. }) if l == line), "{body:?}");
        }
        std::fs::write(&p, "[train]\na\n[zs]\na\n").unwrap();
        assert!(load_split(&p).is_err());
    }
}
