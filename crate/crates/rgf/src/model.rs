//! Decision forest model: trees, prediction, and text serialization.
//!
//! Trees are kept in *leaf-only* canonical form: every node carries a weight
//! but only leaf weights may be nonzero, so a tree's prediction is the weight
//! of the leaf an instance falls into. The regularizers in [`crate::reg`]
//! are defined over equivalent "all-node" representations of the same
//! function; [`WeightedTreeView`] expresses such a representation and
//! [`WeightedTreeView::collapse_to_leaf_only`] folds it back into canonical
//! form without changing the prediction function.
//!
//! Node ids are indices into the tree's node vector and double as creation
//! stamps: nodes are only ever appended, so smaller id ⇒ created earlier.
//! The same holds for tree order inside a [`Forest`]. Split semantics are
//! `x[feature] <= threshold` → left child, otherwise right.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A single node. Internal nodes carry the split; leaves carry the weight.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Leaf {
        weight: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub parent: Option<u32>,
    pub depth: u32,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    /// Leaf weight, or 0 for internal nodes (leaf-only invariant).
    pub fn weight(&self) -> f64 {
        match self.kind {
            NodeKind::Leaf { weight } => weight,
            NodeKind::Split { .. } => 0.0,
        }
    }
}

/// A regression tree in leaf-only form. `nodes[0]` is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Single-leaf tree.
    pub fn leaf(weight: f64) -> Tree {
        Tree {
            nodes: vec![Node {
                parent: None,
                depth: 0,
                kind: NodeKind::Leaf { weight },
            }],
        }
    }

    /// Depth-one tree: one split with two leaf children.
    pub fn stump(feature: usize, threshold: f64, w_left: f64, w_right: f64) -> Tree {
        let mut t = Tree::leaf(0.0);
        t.split_leaf(0, feature, threshold, w_left, w_right);
        t
    }

    /// Replace leaf `leaf` by a split node with two fresh leaf children.
    /// Returns the (left, right) child ids. The split node's own weight
    /// becomes the implicit 0 of internal nodes.
    pub fn split_leaf(
        &mut self,
        leaf: u32,
        feature: usize,
        threshold: f64,
        w_left: f64,
        w_right: f64,
    ) -> (u32, u32) {
        assert!(self.nodes[leaf as usize].is_leaf(), "split of non-leaf {leaf}");
        let depth = self.nodes[leaf as usize].depth + 1;
        let left = self.nodes.len() as u32;
        let right = left + 1;
        self.nodes.push(Node {
            parent: Some(leaf),
            depth,
            kind: NodeKind::Leaf { weight: w_left },
        });
        self.nodes.push(Node {
            parent: Some(leaf),
            depth,
            kind: NodeKind::Leaf { weight: w_right },
        });
        self.nodes[leaf as usize].kind = NodeKind::Split {
            feature,
            threshold,
            left,
            right,
        };
        (left, right)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: u32) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Set the weight of a leaf.
    pub fn set_leaf_weight(&mut self, leaf: u32, weight: f64) {
        match &mut self.nodes[leaf as usize].kind {
            NodeKind::Leaf { weight: w } => *w = weight,
            NodeKind::Split { .. } => panic!("set_leaf_weight on internal node {leaf}"),
        }
    }

    /// Ids of all leaves, in creation order.
    pub fn leaves(&self) -> impl Iterator<Item = u32> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_leaf())
            .map(|(i, _)| i as u32)
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// The leaf instance `x` falls into.
    pub fn leaf_for(&self, x: &[f64]) -> u32 {
        let mut v = 0u32;
        loop {
            match self.nodes[v as usize].kind {
                NodeKind::Leaf { .. } => return v,
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => v = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.nodes[self.leaf_for(x) as usize].weight()
    }

    /// Does the conjunction of split conditions on the path from the root
    /// to `v` hold for `x`? True for the root.
    pub fn rule_fires(&self, v: u32, x: &[f64]) -> bool {
        let mut cur = v;
        while let Some(p) = self.nodes[cur as usize].parent {
            match self.nodes[p as usize].kind {
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    ..
                } => {
                    let goes_left = x[feature] <= threshold;
                    if goes_left != (cur == left) {
                        return false;
                    }
                }
                NodeKind::Leaf { .. } => unreachable!("parent {p} of {cur} is a leaf"),
            }
            cur = p;
        }
        true
    }
}

/// A tree topology with an explicit value `beta[v]` on *every* node: an
/// equivalent representation of the additive model where an instance
/// receives the sum of `beta` along its root-to-leaf path.
#[derive(Clone, Debug)]
pub struct WeightedTreeView<'a> {
    pub tree: &'a Tree,
    pub beta: Vec<f64>,
}

impl<'a> WeightedTreeView<'a> {
    pub fn new(tree: &'a Tree, beta: Vec<f64>) -> Self {
        assert_eq!(tree.len(), beta.len());
        WeightedTreeView { tree, beta }
    }

    /// Sum of `beta` along the path `x` follows.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut v = self.tree.leaf_for(x);
        let mut sum = self.beta[v as usize];
        while let Some(p) = self.tree.node(v).parent {
            sum += self.beta[p as usize];
            v = p;
        }
        sum
    }

    /// Fold the per-node values down into leaf weights, producing the
    /// canonical leaf-only tree with the identical prediction function.
    pub fn collapse_to_leaf_only(&self) -> Tree {
        let mut tree = self.tree.clone();
        // Path sums computed top-down. Ids of loaded trees need not be
        // topologically ordered, so process by ascending depth.
        let mut ids: Vec<u32> = (0..tree.len() as u32).collect();
        ids.sort_by_key(|&v| tree.nodes[v as usize].depth);
        let mut path = vec![0.0; tree.len()];
        for v in ids {
            let v = v as usize;
            path[v] = self.beta[v]
                + tree.nodes[v]
                    .parent
                    .map_or(0.0, |p| path[p as usize]);
            if tree.nodes[v].is_leaf() {
                tree.set_leaf_weight(v as u32, path[v]);
            }
        }
        tree
    }
}

/// An additive ensemble of trees. Prediction is the sum of tree outputs;
/// the empty forest predicts 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn new() -> Forest {
        Forest { trees: Vec::new() }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum()
    }

    pub fn num_leaves(&self) -> usize {
        self.trees.iter().map(|t| t.num_leaves()).sum()
    }

    /// Largest feature index referenced by any split, if any split exists.
    pub fn max_feature(&self) -> Option<usize> {
        self.trees
            .iter()
            .flat_map(|t| t.nodes())
            .filter_map(|node| match node.kind {
                NodeKind::Split { feature, .. } => Some(feature),
                NodeKind::Leaf { .. } => None,
            })
            .max()
    }

    /// Serialize to the versioned text format (see module docs of the
    /// format below). Floats use the shortest representation that parses
    /// back to the identical bits, so save → load round-trips exactly.
    ///
    /// ```text
    /// RGF-MODEL v1
    /// trees <count>
    /// tree <node_count>
    /// N <id> <parent|-> <feature|LEAF> <threshold|weight>
    /// ```
    ///
    /// Nodes are listed in preorder, left child before right; the two
    /// children of a split therefore appear in file order left, right.
    pub fn to_model_text(&self) -> String {
        let mut out = String::new();
        out.push_str("RGF-MODEL v1\n");
        let _ = writeln!(out, "trees {}", self.trees.len());
        for tree in &self.trees {
            let _ = writeln!(out, "tree {}", tree.len());
            let mut stack = vec![0u32];
            while let Some(v) = stack.pop() {
                let node = tree.node(v);
                let parent = match node.parent {
                    Some(p) => p.to_string(),
                    None => "-".to_string(),
                };
                match node.kind {
                    NodeKind::Leaf { weight } => {
                        let _ = writeln!(out, "N {v} {parent} LEAF {weight}");
                    }
                    NodeKind::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        let _ = writeln!(out, "N {v} {parent} {feature} {threshold}");
                        stack.push(right);
                        stack.push(left);
                    }
                }
            }
        }
        out
    }

    pub fn from_model_text(text: &str, origin: &Path) -> Result<Forest> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
                .ok_or_else(|| Error::ModelFormat(format!("unexpected end of file, expected {what}")))
        };

        let (_, header) = next("header")?;
        if header != "RGF-MODEL v1" {
            return Err(Error::ModelFormat(format!(
                "unsupported header {header:?}, expected \"RGF-MODEL v1\""
            )));
        }
        let (line_no, counts) = next("tree count")?;
        let num_trees: usize = counts
            .strip_prefix("trees ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(origin, line_no, "expected \"trees <count>\""))?;

        let mut forest = Forest::new();
        for _ in 0..num_trees {
            let (line_no, tl) = next("tree size")?;
            let node_count: usize = tl
                .strip_prefix("tree ")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(origin, line_no, "expected \"tree <node_count>\""))?;
            if node_count == 0 {
                return Err(Error::parse(origin, line_no, "tree must have at least one node"));
            }

            // Raw records: (parent, Leaf(weight) | Split(feature, threshold)).
            let mut raw: Vec<Option<(Option<u32>, NodeKind)>> = vec![None; node_count];
            let mut file_order = Vec::with_capacity(node_count);
            for _ in 0..node_count {
                let (line_no, nl) = next("node line")?;
                let mut tok = nl.split_whitespace();
                let bad = |msg: &str| Error::parse(origin, line_no, msg);
                if tok.next() != Some("N") {
                    return Err(bad("node line must start with \"N\""));
                }
                let id: usize = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("missing node id"))?;
                if id >= node_count {
                    return Err(bad("node id out of range"));
                }
                if raw[id].is_some() {
                    return Err(bad("duplicate node id"));
                }
                let parent = match tok.next().ok_or_else(|| bad("missing parent"))? {
                    "-" => None,
                    p => Some(
                        p.parse::<u32>()
                            .ok()
                            .filter(|&p| (p as usize) < node_count)
                            .ok_or_else(|| bad("invalid parent id"))?,
                    ),
                };
                let third = tok.next().ok_or_else(|| bad("missing feature/LEAF"))?;
                let value: f64 = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| bad("missing or non-finite value"))?;
                if tok.next().is_some() {
                    return Err(bad("trailing tokens on node line"));
                }
                let kind = if third == "LEAF" {
                    NodeKind::Leaf { weight: value }
                } else {
                    let feature: usize =
                        third.parse().map_err(|_| bad("invalid feature index"))?;
                    // Children get patched in below.
                    NodeKind::Split {
                        feature,
                        threshold: value,
                        left: u32::MAX,
                        right: u32::MAX,
                    }
                };
                raw[id] = Some((parent, kind));
                file_order.push(id as u32);
            }

            forest.trees.push(assemble_tree(raw, &file_order, origin)?);
        }
        if lines.next().is_some() {
            return Err(Error::ModelFormat("trailing content after last tree".into()));
        }
        Ok(forest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_model_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Forest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Forest::from_model_text(&text, path)
    }
}

/// Wire parent/child links, compute depths, and validate the invariants:
/// exactly one root, internal nodes have exactly two children (left =
/// first child in file order), leaves none, and the parent relation is
/// acyclic with parents listed before children.
fn assemble_tree(
    raw: Vec<Option<(Option<u32>, NodeKind)>>,
    file_order: &[u32],
    origin: &Path,
) -> Result<Tree> {
    let n = raw.len();
    let mut nodes: Vec<Node> = raw
        .into_iter()
        .map(|r| {
            let (parent, kind) = r.expect("all ids present");
            Node {
                parent,
                depth: 0,
                kind,
            }
        })
        .collect();

    let mut root = None;
    for (id, node) in nodes.iter().enumerate() {
        if node.parent.is_none() {
            if root.is_some() {
                return Err(Error::ModelFormat(format!(
                    "{}: multiple roots in one tree",
                    origin.display()
                )));
            }
            root = Some(id);
        }
    }
    if root != Some(0) {
        return Err(Error::ModelFormat(format!(
            "{}: tree root must be node 0 with parent \"-\"",
            origin.display()
        )));
    }

    // Attach children in file order: first mention = left.
    for &id in file_order {
        if let Some(p) = nodes[id as usize].parent {
            match &mut nodes[p as usize].kind {
                NodeKind::Split { left, right, .. } => {
                    if *left == u32::MAX {
                        *left = id;
                    } else if *right == u32::MAX {
                        *right = id;
                    } else {
                        return Err(Error::ModelFormat(format!(
                            "{}: node {p} has more than two children",
                            origin.display()
                        )));
                    }
                }
                NodeKind::Leaf { .. } => {
                    return Err(Error::ModelFormat(format!(
                        "{}: leaf {p} referenced as a parent",
                        origin.display()
                    )));
                }
            }
        }
    }
    for (id, node) in nodes.iter().enumerate() {
        if let NodeKind::Split { left, right, .. } = node.kind {
            if left == u32::MAX || right == u32::MAX {
                return Err(Error::ModelFormat(format!(
                    "{}: internal node {id} has fewer than two children",
                    origin.display()
                )));
            }
        }
    }

    // Depths; parents must appear earlier on every path (preorder emit
    // guarantees it, and the cycle check below rejects anything else).
    let mut depth_known = vec![false; n];
    depth_known[0] = true;
    let mut progressed = true;
    while progressed {
        progressed = false;
        for id in 0..n {
            if depth_known[id] {
                continue;
            }
            let p = nodes[id].parent.expect("non-root") as usize;
            if depth_known[p] {
                nodes[id].depth = nodes[p].depth + 1;
                depth_known[id] = true;
                progressed = true;
            }
        }
    }
    if depth_known.iter().any(|k| !k) {
        return Err(Error::ModelFormat(format!(
            "{}: disconnected or cyclic parent links",
            origin.display()
        )));
    }

    Ok(Tree { nodes })
}
