use std::path::Path;

use super::{read_text, write_text};
use crate::error::{Error, Result};
use crate::semantics::{RawNode, Taxonomy};

/// Parses the indented tree format: one node per line, depth given by the
/// number of leading tabs, leaves written `name = class` or
/// `name = class1, class2`. Blank lines and lines starting with `#` are
/// ignored. Several top-level nodes are placed under an implicit `root`.
pub fn load_taxonomy(path: &Path) -> Result<Taxonomy> {
    let text = read_text(path)?;
    parse_taxonomy(&text, path)
}

struct Line {
    number: usize,
    depth: usize,
    name: String,
    classes: Vec<String>,
}

fn parse_line(raw: &str, number: usize, path: &Path) -> Result<Option<Line>> {
    let body = raw.trim_end();
    let content = body.trim_start_matches('\t');
    if content.is_empty() || content.starts_with('#') {
        return Ok(None);
    }
    if content.starts_with(' ') {
        return Err(Error::parse(path, number, "indentation must use tabs only"));
    }
    let depth = body.len() - content.len();
    let (name, classes) = match content.split_once('=') {
        None => (content.trim().to_string(), Vec::new()),
        Some((name, list)) => {
            let classes: Vec<String> = list.split(',').map(|c| c.trim().to_string()).collect();
            if classes.iter().any(String::is_empty) {
                return Err(Error::parse(path, number, "empty class name after '='"));
            }
            (name.trim().to_string(), classes)
        }
    };
    if name.is_empty() {
        return Err(Error::parse(path, number, "node has no name"));
    }
    Ok(Some(Line {
        number,
        depth,
        name,
        classes,
    }))
}

fn parse_taxonomy(text: &str, path: &Path) -> Result<Taxonomy> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(l) = parse_line(raw, i + 1, path)? {
            lines.push(l);
        }
    }
    let first = lines.first().ok_or_else(|| Error::parse(path, 1, "taxonomy file has no nodes"))?;
    if first.depth != 0 {
        return Err(Error::parse(path, first.number, "first node must not be indented"));
    }

    let mut seen: Vec<(&str, usize)> = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        if i > 0 && l.depth > lines[i - 1].depth + 1 {
            return Err(Error::parse(
                path,
                l.number,
                format!("indentation jumps from depth {} to {}", lines[i - 1].depth, l.depth),
            ));
        }
        let has_children = lines.get(i + 1).is_some_and(|n| n.depth > l.depth);
        if has_children && !l.classes.is_empty() {
            return Err(Error::parse(path, l.number, format!("internal node '{}' carries classes", l.name)));
        }
        if !has_children && l.classes.is_empty() {
            return Err(Error::parse(path, l.number, format!("leaf '{}' has no class", l.name)));
        }
        for c in &l.classes {
            if let Some((_, prev)) = seen.iter().find(|(s, _)| s == c) {
                return Err(Error::parse(
                    path,
                    l.number,
                    format!("class '{c}' already bound on line {prev}"),
                ));
            }
            seen.push((c, l.number));
        }
    }

    let mut pos = 0;
    let mut roots = Vec::new();
    while pos < lines.len() {
        roots.push(build(&lines, &mut pos));
    }
    let root = if roots.len() == 1 {
        roots.pop().expect("one root")
    } else {
        RawNode {
            name: "root".into(),
            classes: Vec::new(),
            children: roots,
        }
    };
    Taxonomy::from_raw(root).map_err(|e| Error::parse(path, first.number, e.to_string()))
}

fn build(lines: &[Line], pos: &mut usize) -> RawNode {
    let l = &lines[*pos];
    *pos += 1;
    let mut node = RawNode {
        name: l.name.clone(),
        classes: l.classes.clone(),
        children: Vec::new(),
    };
    while *pos < lines.len() && lines[*pos].depth == l.depth + 1 {
        node.children.push(build(lines, pos));
    }
    node
}

/// Text form read back by [`load_taxonomy`] into an equal tree.
pub fn taxonomy_to_text(tree: &Taxonomy) -> String {
    fn write(tree: &Taxonomy, i: usize, depth: usize, out: &mut String) {
        let n = &tree.nodes()[i];
        out.push_str(&"\t".repeat(depth));
        out.push_str(&n.name);
        if let Some(c) = &n.class {
            out.push_str(" = ");
            out.push_str(c);
        }
        out.push('\n');
        for &ch in &n.children {
            write(tree, ch, depth + 1, out);
        }
    }
    let mut out = String::new();
    write(tree, 0, 0, &mut out);
    out
}

pub fn save_taxonomy(path: &Path, tree: &Taxonomy) -> Result<()> {
    write_text(path, &taxonomy_to_text(tree))
}
