use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{max_separated_codewords, CodeMatrix, SemanticDef, SemanticKind, SemanticSpec};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// Tree as written in a file, before dummy-node elimination.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawNode {
    pub name: String,
    /// Classes annotated on this node; only meaningful on leaves.
    pub classes: Vec<String>,
    pub children: Vec<RawNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyNode {
    pub name: String,
    pub children: Vec<usize>,
    pub class: Option<String>,
}

/// Class taxonomy in which every internal node has at least two children and
/// every class owns exactly one leaf. Nodes are stored in pre-order, root
/// first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    nodes: Vec<TaxonomyNode>,
}

/// State name used for the reject option of every node.
pub const REJECT_STATE: &str = "other";

impl Taxonomy {
    /// Normalizes a raw tree: leaves carrying several classes are split into
    /// one leaf per class, then single-child chains are collapsed.
    pub fn from_raw(root: RawNode) -> Result<Taxonomy> {
        let root = expand(root)?;
        let root = collapse(root);
        if root.children.is_empty() {
            return Err(Error::data(format!(
                "taxonomy rooted at '{}' has no internal decisions after removing single-child nodes",
                root.name
            )));
        }
        let mut nodes = Vec::new();
        flatten(root, &mut nodes);
        let mut seen = HashMap::new();
        for n in &nodes {
            if let Some(c) = &n.class {
                if seen.insert(c.clone(), ()).is_some() {
                    return Err(Error::data(format!("class '{c}' appears twice in the taxonomy")));
                }
            }
        }
        Ok(Taxonomy { nodes })
    }

    pub fn nodes(&self) -> &[TaxonomyNode] {
        &self.nodes
    }

    /// Internal nodes in pre-order.
    pub fn internal_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].children.is_empty()).collect()
    }

    /// Classes in leaf pre-order.
    pub fn classes(&self) -> Vec<String> {
        self.nodes.iter().filter_map(|n| n.class.clone()).collect()
    }

    fn leaf_of(&self, class: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.class.as_deref() == Some(class))
    }

    /// `(node, child position)` for every internal node on the path from the
    /// root to the leaf of `class`.
    pub fn path_to(&self, class: &str) -> Result<Vec<(usize, usize)>> {
        let leaf = self
            .leaf_of(class)
            .ok_or_else(|| Error::data(format!("class '{class}' is not a leaf of the taxonomy")))?;
        let mut path = Vec::new();
        let mut cur = 0;
        while cur != leaf {
            let (pos, &next) = self.nodes[cur]
                .children
                .iter()
                .enumerate()
                .filter(|(_, &ch)| ch <= leaf)
                .last()
                .expect("pre-order layout puts the leaf under some child");
            path.push((cur, pos));
            cur = next;
        }
        Ok(path)
    }
}

fn expand(mut node: RawNode) -> Result<RawNode> {
    if node.children.is_empty() {
        match node.classes.len() {
            0 => return Err(Error::data(format!("leaf '{}' has no class", node.name))),
            1 => {}
            _ => {
                node.children = node
                    .classes
                    .drain(..)
                    .map(|c| RawNode {
                        name: c.clone(),
                        classes: vec![c],
                        children: Vec::new(),
                    })
                    .collect();
            }
        }
        return Ok(node);
    }
    if !node.classes.is_empty() {
        return Err(Error::data(format!(
            "internal node '{}' carries class annotations",
            node.name
        )));
    }
    node.children = node.children.into_iter().map(expand).collect::<Result<_>>()?;
    Ok(node)
}

fn collapse(mut node: RawNode) -> RawNode {
    while node.children.len() == 1 {
        node = node.children.pop().expect("one child");
    }
    node.children = node.children.into_iter().map(collapse).collect();
    node
}

fn flatten(node: RawNode, out: &mut Vec<TaxonomyNode>) -> usize {
    let idx = out.len();
    out.push(TaxonomyNode {
        name: node.name,
        children: Vec::new(),
        class: node.classes.into_iter().next(),
    });
    let mut children = Vec::new();
    for ch in node.children {
        children.push(flatten(ch, out));
    }
    out[idx].children = children;
    idx
}

pub(crate) fn taxonomy_spec<T: Real>(tree: &Taxonomy) -> Result<SemanticSpec<T>> {
    let mut used: HashMap<String, usize> = HashMap::new();
    let defs = tree
        .internal_nodes()
        .into_iter()
        .map(|i| {
            let node = &tree.nodes[i];
            let n = used.entry(node.name.clone()).or_insert(0);
            *n += 1;
            let name = if *n == 1 {
                format!("node:{}", node.name)
            } else {
                format!("node:{}#{}", node.name, n)
            };
            let children = node.children.len();
            let mut state_names: Vec<String> = node.children.iter().map(|&c| tree.nodes[c].name.clone()).collect();
            state_names.push(REJECT_STATE.to_string());
            Ok(SemanticDef {
                name,
                kind: SemanticKind::TaxonomyNode,
                state_count: children + 1,
                state_dim: children,
                state_codewords: max_separated_codewords(children + 1)?,
                state_names,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SemanticSpec::new(defs)
}

/// Codes for `classes` given the node vocabulary of `tree`.
pub(crate) fn encode_taxonomy<T: Real>(
    tree: &Taxonomy,
    spec: &SemanticSpec<T>,
    classes: &[String],
) -> Result<CodeMatrix<T>> {
    let internal = tree.internal_nodes();
    if internal.len() != spec.len() {
        return Err(Error::contract("taxonomy vocabulary does not match the tree"));
    }
    let semantic_of: HashMap<usize, usize> = internal.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let offsets = spec.offsets();
    let mut phi = Matrix::zeros(spec.total_dim, classes.len());
    let mut state_table = Vec::with_capacity(spec.len());
    for sem in &spec.semantics {
        state_table.push(vec![Some(sem.state_count - 1); classes.len()]);
    }
    for (c, class) in classes.iter().enumerate() {
        for (node, pos) in tree.path_to(class)? {
            state_table[semantic_of[&node]][c] = Some(pos);
        }
        for (k, sem) in spec.semantics.iter().enumerate() {
            let s = state_table[k][c].expect("set above");
            for (i, &v) in sem.state_codewords[s].iter().enumerate() {
                phi[(offsets[k] + i, c)] = v;
            }
        }
    }
    Ok(CodeMatrix {
        phi,
        state_table,
        class_names: classes.to_vec(),
    })
}

/// One semantic per internal node; each node's states are its children (in
/// order) followed by the reject option, mapped onto simplex codewords.
pub fn taxonomy_codes<T: Real>(
    tree: &Taxonomy,
    classes: &[String],
) -> Result<(SemanticSpec<T>, CodeMatrix<T>)> {
    let spec = taxonomy_spec(tree)?;
    let codes = encode_taxonomy(tree, &spec, classes)?;
    Ok((spec, codes))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::RawNode;

    pub fn leaf(name: &str) -> RawNode {
        RawNode {
            name: name.into(),
            classes: vec![name.into()],
            children: vec![],
        }
    }

    pub fn node(name: &str, children: Vec<RawNode>) -> RawNode {
        RawNode {
            name: name.into(),
            classes: vec![],
            children,
        }
    }

    /// Six animals: aquatic / terrestrial / aerial, two classes each.
    pub fn animals() -> RawNode {
        node(
            "animal",
            vec![
                node("aquatic", vec![leaf("dolphin"), leaf("whale")]),
                node("terrestrial", vec![leaf("bear"), leaf("horse")]),
                node("aerial", vec![leaf("eagle"), leaf("bat")]),
            ],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn animal_tree_bear_code() {
        let tree = Taxonomy::from_raw(animals()).unwrap();
        assert_eq!(tree.internal_nodes().len(), 4);
        let classes = tree.classes();
        assert_eq!(classes.len(), 6);
        let (spec, codes) = taxonomy_codes::<f64>(&tree, &classes).unwrap();
        assert_eq!(spec.total_dim, 3 + 2 + 2 + 2);
        codes.validate(&spec).unwrap();

        let bear = codes.class_index("bear").unwrap();
        let col = codes.column(bear);
        let root = &spec.semantics[0];
        let ter = root.state_index("terrestrial").unwrap();
        let mut expected = root.state_codewords[ter].clone();
        expected.extend(&spec.semantics[1].state_codewords[2]); // aquatic: other
        expected.extend(&spec.semantics[2].state_codewords[0]); // terrestrial: bear
        expected.extend(&spec.semantics[3].state_codewords[2]); // aerial: other
        assert_eq!(col, expected);
    }

    #[test]
    fn two_leaf_root() {
        let tree = Taxonomy::from_raw(node("r", vec![leaf("a"), leaf("b")])).unwrap();
        let (spec, codes) = taxonomy_codes::<f64>(&tree, &s(&["a", "b"])).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec.semantics[0].state_count, 3);
        let first = max_separated_codewords::<f64>(3).unwrap()[0].clone();
        assert_eq!(codes.column(0), first);
    }

    #[test]
    fn single_child_chain_collapses() {
        let raw = node(
            "root",
            vec![node("mid", vec![node("low", vec![leaf("a"), leaf("b")])])],
        );
        let tree = Taxonomy::from_raw(raw).unwrap();
        assert_eq!(tree.internal_nodes().len(), 1);

        let raw = node("root", vec![node("a", vec![leaf("only")])]);
        assert!(Taxonomy::from_raw(raw).is_err());
    }

    #[test]
    fn shared_leaf_expands() {
        let mut shared = leaf("cats");
        shared.classes = s(&["lion", "tiger"]);
        let tree = Taxonomy::from_raw(node("r", vec![shared, leaf("dog")])).unwrap();
        assert_eq!(tree.internal_nodes().len(), 2);
        assert_eq!(tree.classes(), s(&["lion", "tiger", "dog"]));
    }

    #[test]
    fn duplicate_and_missing_classes() {
        let raw = node("r", vec![leaf("a"), node("x", vec![leaf("a"), leaf("b")])]);
        assert!(Taxonomy::from_raw(raw).is_err());
        let tree = Taxonomy::from_raw(animals()).unwrap();
        assert!(taxonomy_codes::<f64>(&tree, &s(&["unicorn"])).is_err());
    }

    #[test]
    fn dimension_is_sum_of_children() {
        let tree = Taxonomy::from_raw(animals()).unwrap();
        let spec = taxonomy_spec::<f64>(&tree).unwrap();
        let children: usize = tree.internal_nodes().iter().map(|&i| tree.nodes()[i].children.len()).sum();
        assert_eq!(spec.total_dim, children);
        assert_eq!(spec.len(), tree.internal_nodes().len());
    }
}
