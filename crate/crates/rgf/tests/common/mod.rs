//! Shared helpers for the acceptance suite: random tree generation and
//! small structural utilities used by several criteria.

use rgf::model::{NodeKind, Tree};
use rgf::rng::Rng;

/// Uniform draw on `[-2, 2]`.
pub fn uniform_weight(rng: &mut Rng) -> f64 {
    4.0 * rng.uniform() - 2.0
}

/// Random binary tree with `1..=max_splits` splits (so at most
/// `2 * max_splits + 1` nodes), random features below `dim`, thresholds
/// uniform on `[0, 1]`, and leaf weights uniform on `[-2, 2]`.
pub fn random_tree(rng: &mut Rng, max_splits: usize, dim: usize) -> Tree {
    let mut tree = Tree::leaf(uniform_weight(rng));
    let splits = 1 + rng.below(max_splits);
    for _ in 0..splits {
        let leaves: Vec<u32> = tree.leaves().collect();
        let leaf = leaves[rng.below(leaves.len())];
        tree.split_leaf(
            leaf,
            rng.below(dim),
            rng.uniform(),
            uniform_weight(rng),
            uniform_weight(rng),
        );
    }
    tree
}

/// Ids of the internal (split) nodes in id order.
pub fn internal_nodes(tree: &Tree) -> Vec<u32> {
    (0..tree.len() as u32)
        .filter(|&v| !tree.node(v).is_leaf())
        .collect()
}

/// Children of an internal node.
pub fn children(tree: &Tree, v: u32) -> (u32, u32) {
    match tree.node(v).kind {
        NodeKind::Split { left, right, .. } => (left, right),
        NodeKind::Leaf { .. } => panic!("node {v} is a leaf"),
    }
}

/// Sum of `values` over the path from the root down to `node` inclusive.
pub fn path_sum(tree: &Tree, values: &[f64], node: u32) -> f64 {
    let mut sum = 0.0;
    let mut v = node;
    loop {
        sum += values[v as usize];
        match tree.node(v).parent {
            Some(p) => v = p,
            None => return sum,
        }
    }
}

/// Random feature vector with entries uniform on `[0, 1]`.
pub fn random_input(rng: &mut Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.uniform()).collect()
}

/// One pass line per criterion, printed on success (visible with
/// `--nocapture`; a failing criterion shows up as the test's FAILED line).
pub fn report(criterion: u32, detail: &str) {
    println!("[PASS] criterion {criterion:02}: {detail}");
}
