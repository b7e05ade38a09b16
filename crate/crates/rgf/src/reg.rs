//! Tree-structured regularizers.
//!
//! All three penalties are functions of a leaf-only tree `T` with leaf
//! weights `w`:
//!
//! * **`LeafL2`** — `lambda/2 * sum over leaves of w^2`.
//! * **`MinPenalty`** — the prediction function of `T` has many equivalent
//!   "all-node" representations `beta` (an instance receives the sum of
//!   `beta` along its path). This penalty charges the *cheapest* one:
//!   `lambda * min over equivalent beta of 1/2 * sum_v gamma^{d_v} beta_v^2`,
//!   where `d_v` is the node depth and `gamma >= 1` prices depth. The
//!   minimizer satisfies, per internal node `v`, the fixed point
//!   `betabar_v = (betabar_parent + gamma * sum of child betabar) / (1 + 2 gamma)`
//!   (no parent term at the root), with `betabar` pinned to `w` at leaves;
//!   here `betabar_v` is the *path sum* down to `v` of the optimal
//!   representation, and the penalized coordinates are the increments
//!   `rho_v = betabar_v - betabar_parent` (`rho_root = betabar_root`).
//!   [`solve_min_penalty_fixed_point`] computes `betabar` by in-place
//!   sweeps over internal nodes, deepest first.
//! * **`MinPenaltySib`** — the same minimum restricted to representations
//!   whose sibling increments sum to zero. Under that constraint the
//!   optimal path sums have the closed form `betabar_leaf = w`,
//!   `betabar_internal = (betabar_left + betabar_right) / 2`, computed
//!   bottom-up with no iteration; increments become
//!   `rho_child = (betabar_child - betabar_sibling) / 2` (exactly
//!   antisymmetric) and `rho_root = betabar_root`.
//!
//! Besides the penalty values, this module supplies what the training loop
//! needs at speed:
//!
//! * [`derivatives_at_leaf`] — first/second derivative of the penalty in
//!   one leaf weight (coordinate descent on fixed structure);
//! * [`split_context`] — per-candidate-node invariants that make the exact
//!   penalty change of a proposed split an O(1) formula per threshold
//!   ([`SplitContext::penalty_delta`]), plus the derivative terms entering
//!   the closed-form child weights;
//! * [`apply_leaf_delta`] — O(depth) (sibling) / O(nodes) (min-penalty)
//!   incremental state maintenance after a leaf weight changes.
//!
//! For `MinPenalty`, derivatives need the sensitivities
//! `c[u][v] = d betabar_v / d w_u`, obtained from the same fixed point
//! with unit input at leaf `u`. They depend only on topology, so they are
//! cached per tree and rebuilt lazily after structure changes.
//!
//! `lambda` multiplies everything linearly and is passed per call — the
//! trainer uses one value during growth and another during correction.

use crate::error::{Error, Result};
use crate::model::{NodeKind, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegKind {
    LeafL2,
    MinPenalty,
    MinPenaltySib,
}

impl RegKind {
    pub fn name(self) -> &'static str {
        match self {
            RegKind::LeafL2 => "L2",
            RegKind::MinPenalty => "MinPen",
            RegKind::MinPenaltySib => "MinPenSib",
        }
    }
}

/// Regularizer settings other than `lambda` (which is passed per call).
#[derive(Clone, Copy, Debug)]
pub struct RegConfig {
    pub kind: RegKind,
    /// Depth-decay base of the min-penalty kinds; must be `>= 1`.
    pub gamma: f64,
    /// Fixed-point stopping tolerance: max-norm change of one sweep.
    pub tol: f64,
    /// Fixed-point sweep cap; exhaustion is flagged, not fatal.
    pub max_iter: u32,
}

impl Default for RegConfig {
    fn default() -> Self {
        RegConfig {
            kind: RegKind::LeafL2,
            gamma: 1.0,
            tol: 1e-8,
            max_iter: 1000,
        }
    }
}

impl RegConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be >= 1 (got {})",
                self.gamma
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("reg tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Convergence bookkeeping of the iterative solves involved in a call.
#[derive(Clone, Copy, Debug, Default)]
pub struct SolveStats {
    pub sweeps: u32,
    pub failures: u32,
}

impl SolveStats {
    pub(crate) fn absorb(&mut self, other: SolveStats) {
        self.sweeps += other.sweeps;
        self.failures += other.failures;
    }
}

// ---------------------------------------------------------------------------
// Topology scratch shared by real trees and hypothetical split trees.
// ---------------------------------------------------------------------------

const NONE: u32 = u32::MAX;

/// Flat topology arrays. For hypothetical splits the two candidate
/// children occupy ids `n` and `n + 1` where `n` is the real node count.
struct Topo {
    parent: Vec<u32>,
    children: Vec<[u32; 2]>,
    depth: Vec<u32>,
    /// Internal node ids, deepest first (ties by id): the sweep order.
    order: Vec<u32>,
}

impl Topo {
    fn of_tree(tree: &Tree) -> Topo {
        let n = tree.len();
        let mut t = Topo {
            parent: vec![NONE; n],
            children: vec![[NONE; 2]; n],
            depth: vec![0; n],
            order: Vec::new(),
        };
        for v in 0..n {
            let node = tree.node(v as u32);
            t.parent[v] = node.parent.unwrap_or(NONE);
            t.depth[v] = node.depth;
            if let NodeKind::Split { left, right, .. } = node.kind {
                t.children[v] = [left, right];
            }
        }
        t.finish_order();
        t
    }

    /// Topology of `T~`: `tree` with `leaf` split into two fresh children.
    fn with_split(tree: &Tree, leaf: u32) -> Topo {
        debug_assert!(tree.node(leaf).is_leaf());
        let n = tree.len();
        let mut t = Topo {
            parent: vec![NONE; n + 2],
            children: vec![[NONE; 2]; n + 2],
            depth: vec![0; n + 2],
            order: Vec::new(),
        };
        for v in 0..n {
            let node = tree.node(v as u32);
            t.parent[v] = node.parent.unwrap_or(NONE);
            t.depth[v] = node.depth;
            if let NodeKind::Split { left, right, .. } = node.kind {
                t.children[v] = [left, right];
            }
        }
        let (u1, u2) = (n as u32, n as u32 + 1);
        t.children[leaf as usize] = [u1, u2];
        let d = t.depth[leaf as usize] + 1;
        for u in [u1, u2] {
            t.parent[u as usize] = leaf;
            t.depth[u as usize] = d;
        }
        t.finish_order();
        t
    }

    fn finish_order(&mut self) {
        self.order = (0..self.parent.len() as u32)
            .filter(|&v| self.children[v as usize][0] != NONE)
            .collect();
        self.order
            .sort_by(|&a, &b| self.depth[b as usize].cmp(&self.depth[a as usize]).then(a.cmp(&b)));
    }

    fn is_leaf(&self, v: u32) -> bool {
        self.children[v as usize][0] == NONE
    }

    fn len(&self) -> usize {
        self.parent.len()
    }
}

/// In-place fixed-point sweeps for the min-penalty `betabar`.
///
/// `beta` must arrive with leaf entries pinned to their inputs; internal
/// entries serve as the warm start and are overwritten. Each sweep visits
/// internal nodes deepest-first and replaces `beta[v]` with
/// `(beta[parent] + gamma * (beta[left] + beta[right])) / (1 + 2 gamma)`
/// (parent term absent at the root), using the newest neighbor values.
/// Stops when the largest single-node change of a sweep drops below
/// `tol`, or after `max_iter` sweeps (counted as a failure).
fn sweep_fixed_point(topo: &Topo, beta: &mut [f64], cfg: &RegConfig) -> SolveStats {
    let denom = 1.0 + 2.0 * cfg.gamma;
    let mut stats = SolveStats::default();
    if topo.order.is_empty() {
        return stats; // single leaf: nothing to solve
    }
    loop {
        let mut max_change = 0.0f64;
        for &v in &topo.order {
            let vi = v as usize;
            let p = topo.parent[vi];
            let parent_part = if p == NONE { 0.0 } else { beta[p as usize] };
            let [l, r] = topo.children[vi];
            let next = (parent_part + cfg.gamma * (beta[l as usize] + beta[r as usize])) / denom;
            max_change = max_change.max((next - beta[vi]).abs());
            beta[vi] = next;
        }
        stats.sweeps += 1;
        if max_change < cfg.tol {
            return stats;
        }
        if stats.sweeps >= cfg.max_iter {
            stats.failures = 1;
            return stats;
        }
    }
}

/// Sibling-constrained `betabar`: leaves pinned, internal = mean of its
/// two children, computed bottom-up in one pass. No iteration involved.
fn sibling_beta(topo: &Topo, beta: &mut [f64]) {
    for &v in &topo.order {
        let [l, r] = topo.children[v as usize];
        beta[v as usize] = 0.5 * (beta[l as usize] + beta[r as usize]);
    }
}

/// Increments `rho` from path sums `betabar` for the min-penalty kind.
fn rho_min_penalty(topo: &Topo, beta: &[f64], rho: &mut [f64]) {
    for v in 0..topo.len() {
        let p = topo.parent[v];
        rho[v] = if p == NONE {
            beta[v]
        } else {
            beta[v] - beta[p as usize]
        };
    }
}

/// Increments for the sibling-constrained kind, written in the exactly
/// antisymmetric form `rho_left = (betabar_left - betabar_right) / 2` so
/// that sibling sums are zero to the last bit.
fn rho_sibling(topo: &Topo, beta: &[f64], rho: &mut [f64]) {
    for v in 0..topo.len() {
        if topo.parent[v] == NONE {
            rho[v] = beta[v];
            continue;
        }
        let p = topo.parent[v] as usize;
        let [l, r] = topo.children[p];
        let sib = if l as usize == v { r } else { l };
        rho[v] = 0.5 * (beta[v] - beta[sib as usize]);
    }
}

fn penalty_of_rho(topo: &Topo, rho: &[f64], gamma: f64) -> f64 {
    let mut sum = 0.0;
    for v in 0..topo.len() {
        sum += gamma.powi(topo.depth[v] as i32) * rho[v] * rho[v];
    }
    0.5 * sum
}

// ---------------------------------------------------------------------------
// Public state kept per tree during training.
// ---------------------------------------------------------------------------

/// Cached regularizer quantities for one tree. `beta`/`rho` are fully
/// maintained; the min-penalty sensitivity rows `c` are built on demand
/// (only coordinate descent needs them) and dropped on structure changes.
#[derive(Clone, Debug, Default)]
pub struct RegTreeState {
    pub beta: Vec<f64>,
    pub rho: Vec<f64>,
    c: Option<Vec<Vec<f64>>>,
}

/// Exposed fixed-point solve for leaf inputs `values` (one per node id;
/// only leaf entries are read). Returns per-node path sums `betabar`.
/// This is the reference entry point used by the linear-algebra oracle
/// tests as well as by the internal state builders.
pub fn solve_min_penalty_fixed_point(
    tree: &Tree,
    values: &[f64],
    cfg: &RegConfig,
) -> (Vec<f64>, SolveStats) {
    let topo = Topo::of_tree(tree);
    let mut beta = vec![0.0; topo.len()];
    for v in 0..topo.len() {
        if topo.is_leaf(v as u32) {
            beta[v] = values[v];
        }
    }
    let stats = sweep_fixed_point(&topo, &mut beta, cfg);
    (beta, stats)
}

/// Build fresh `beta`/`rho` state for a tree (no `c` rows yet).
pub fn build_state(tree: &Tree, cfg: &RegConfig) -> (RegTreeState, SolveStats) {
    let mut state = RegTreeState::default();
    let stats = refresh_state(tree, cfg, &mut state);
    (state, stats)
}

/// Recompute `beta`/`rho` from the tree's current weights, reusing the
/// old `beta` as warm start where sizes allow. Any cached `c` rows are
/// dropped if the node count changed (topology change ⇒ stale rows).
pub fn refresh_state(tree: &Tree, cfg: &RegConfig, state: &mut RegTreeState) -> SolveStats {
    let mut stats = SolveStats::default();
    if cfg.kind == RegKind::LeafL2 {
        state.beta.clear();
        state.rho.clear();
        state.c = None;
        return stats;
    }
    let topo = Topo::of_tree(tree);
    let n = topo.len();
    if state.beta.len() != n {
        state.c = None;
    }
    state.beta.resize(n, 0.0);
    state.rho.resize(n, 0.0);
    for v in 0..n {
        if topo.is_leaf(v as u32) {
            state.beta[v] = tree.node(v as u32).weight();
        }
    }
    match cfg.kind {
        RegKind::MinPenalty => {
            stats.absorb(sweep_fixed_point(&topo, &mut state.beta, cfg));
            rho_min_penalty(&topo, &state.beta, &mut state.rho);
        }
        RegKind::MinPenaltySib => {
            sibling_beta(&topo, &mut state.beta);
            rho_sibling(&topo, &state.beta, &mut state.rho);
        }
        RegKind::LeafL2 => unreachable!(),
    }
    stats
}

/// Ensure the min-penalty sensitivity rows `c[u][v] = d betabar_v / d w_u`
/// exist (one unit-input solve per leaf; topology-only, so valid until the
/// next structure change). No-op for the other kinds.
pub fn ensure_sensitivities(tree: &Tree, cfg: &RegConfig, state: &mut RegTreeState) -> SolveStats {
    let mut stats = SolveStats::default();
    if cfg.kind != RegKind::MinPenalty || state.c.is_some() {
        return stats;
    }
    let topo = Topo::of_tree(tree);
    let n = topo.len();
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n];
    for u in 0..n as u32 {
        if !topo.is_leaf(u) {
            continue;
        }
        let mut row = vec![0.0; n];
        row[u as usize] = 1.0;
        stats.absorb(sweep_fixed_point(&topo, &mut row, cfg));
        rows[u as usize] = row;
    }
    state.c = Some(rows);
    stats
}

/// Penalty value from maintained state.
pub fn penalty_from_state(tree: &Tree, cfg: &RegConfig, state: &RegTreeState, lambda: f64) -> f64 {
    match cfg.kind {
        RegKind::LeafL2 => {
            let sum: f64 = tree
                .leaves()
                .map(|v| {
                    let w = tree.node(v).weight();
                    w * w
                })
                .sum();
            0.5 * lambda * sum
        }
        _ => {
            debug_assert_eq!(state.rho.len(), tree.len(), "stale regularizer state");
            let mut sum = 0.0;
            for v in 0..tree.len() {
                let d = tree.node(v as u32).depth as i32;
                sum += cfg.gamma.powi(d) * state.rho[v] * state.rho[v];
            }
            0.5 * lambda * sum
        }
    }
}

/// Penalty of a tree computed from scratch (cold solve for `MinPenalty`).
pub fn penalty(tree: &Tree, cfg: &RegConfig, lambda: f64) -> (f64, SolveStats) {
    let (state, stats) = build_state(tree, cfg);
    (penalty_from_state(tree, cfg, &state, lambda), stats)
}

/// First and second derivative of the penalty with respect to the weight
/// of `leaf`, on fixed structure. For `MinPenalty` the sensitivity rows
/// must be present (see [`ensure_sensitivities`]).
pub fn derivatives_at_leaf(
    tree: &Tree,
    cfg: &RegConfig,
    state: &RegTreeState,
    leaf: u32,
    lambda: f64,
) -> (f64, f64) {
    match cfg.kind {
        RegKind::LeafL2 => (lambda * tree.node(leaf).weight(), lambda),
        RegKind::MinPenalty => {
            let c = state
                .c
                .as_ref()
                .expect("sensitivities required for MinPenalty derivatives")[leaf as usize]
                .as_slice();
            let mut first = 0.0;
            let mut second = 0.0;
            for v in 0..tree.len() {
                let node = tree.node(v as u32);
                // d rho_v / d w_leaf from the sensitivity row.
                let rho_dot = match node.parent {
                    None => c[v],
                    Some(p) => c[v] - c[p as usize],
                };
                if rho_dot == 0.0 {
                    continue;
                }
                let g = cfg.gamma.powi(node.depth as i32);
                first += g * state.rho[v] * rho_dot;
                second += g * rho_dot * rho_dot;
            }
            (lambda * first, lambda * second)
        }
        RegKind::MinPenaltySib => {
            let (mut first, mut second) = (0.0, 0.0);
            let mut add = |v: u32, rho_dot: f64| {
                let node = tree.node(v);
                let g = cfg.gamma.powi(node.depth as i32);
                first += g * state.rho[v as usize] * rho_dot;
                second += g * rho_dot * rho_dot;
            };
            // Closed-form d rho / d w_leaf: the leaf and each ancestor a
            // (except the root) contribute 2^(depth(a) - depth(leaf) - 1),
            // their siblings the negation, and the root 2^(-depth(leaf)).
            let du = tree.node(leaf).depth as i32;
            let mut v = leaf;
            loop {
                let node = tree.node(v);
                match node.parent {
                    None => {
                        add(v, (2.0f64).powi(-du));
                        break;
                    }
                    Some(p) => {
                        let coeff = (2.0f64).powi(node.depth as i32 - du - 1);
                        add(v, coeff);
                        let (l, r) = match tree.node(p).kind {
                            NodeKind::Split { left, right, .. } => (left, right),
                            NodeKind::Leaf { .. } => unreachable!(),
                        };
                        add(if l == v { r } else { l }, -coeff);
                        v = p;
                    }
                }
            }
            (lambda * first, lambda * second)
        }
    }
}

/// Update maintained state after the weight of `leaf` changed by `delta`
/// (the tree already carries the new weight). Exact (linear) updates:
/// `MinPenalty` uses the sensitivity row, `MinPenaltySib` the explicit
/// halving up the path.
pub fn apply_leaf_delta(
    tree: &Tree,
    cfg: &RegConfig,
    state: &mut RegTreeState,
    leaf: u32,
    delta: f64,
) {
    match cfg.kind {
        RegKind::LeafL2 => {}
        RegKind::MinPenalty => {
            let RegTreeState { beta, rho, c } = state;
            let row = c
                .as_ref()
                .expect("sensitivities required for MinPenalty updates")[leaf as usize]
                .as_slice();
            for (b, &cv) in beta.iter_mut().zip(row) {
                *b += delta * cv;
            }
            for v in 0..beta.len() {
                rho[v] = match tree.node(v as u32).parent {
                    None => beta[v],
                    Some(p) => beta[v] - beta[p as usize],
                };
            }
        }
        RegKind::MinPenaltySib => {
            // betabar changes by delta * 2^(-k) at height k above the leaf.
            let mut v = leaf;
            let mut change = delta;
            state.beta[v as usize] += change;
            while let Some(p) = tree.node(v).parent {
                change *= 0.5;
                state.beta[p as usize] += change;
                v = p;
            }
            // rho is affected at the path nodes and their siblings.
            let mut v = leaf;
            loop {
                match tree.node(v).parent {
                    None => {
                        state.rho[v as usize] = state.beta[v as usize];
                        break;
                    }
                    Some(p) => {
                        let (l, r) = match tree.node(p).kind {
                            NodeKind::Split { left, right, .. } => (left, right),
                            NodeKind::Leaf { .. } => unreachable!(),
                        };
                        let (bl, br) = (state.beta[l as usize], state.beta[r as usize]);
                        state.rho[l as usize] = 0.5 * (bl - br);
                        state.rho[r as usize] = 0.5 * (br - bl);
                        v = p;
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Split evaluation support.
// ---------------------------------------------------------------------------

/// Per-candidate-node invariants for scoring a split of one leaf into two
/// children with weight increments `(delta1, delta2)` on top of the parent
/// weight `alpha`. Building the context costs at most two fixed-point
/// solves (`MinPenalty`) or one path walk (`MinPenaltySib`); evaluating
/// any `(delta1, delta2)` afterwards is O(1).
#[derive(Clone, Debug)]
pub struct SplitContext {
    lambda: f64,
    kind: SplitContextKind,
}

#[derive(Clone, Debug)]
enum SplitContextKind {
    LeafL2 {
        alpha: f64,
    },
    /// Shared by both min-penalty kinds; see `penalty_delta`.
    MinPen {
        /// gamma^(child depth)
        gamma_d: f64,
        /// rho of either candidate child on the zero-increment tree
        rho_u: f64,
        /// d rho_child_k / d delta_k (own) and / d delta_other (cross)
        rd_self: f64,
        rd_cross: f64,
        /// sums over all other nodes of gamma^d * rho * rho_dot and
        /// gamma^d * rho_dot^2 (rho_dot identical for both deltas there)
        s1: f64,
        s2: f64,
        /// penalty(T~(0,0)) - penalty(T), unscaled by lambda (zero for
        /// the sibling kind)
        baseline: f64,
    },
}

impl SplitContext {
    /// Derivative of the penalty in either child increment at
    /// `(delta1, delta2) = (0, 0)`; identical for both children by sibling
    /// symmetry. These are the `dTheta/d delta` and `d^2 Theta/d delta^2`
    /// terms of the closed-form child weights.
    pub fn first_second(&self) -> (f64, f64) {
        match &self.kind {
            SplitContextKind::LeafL2 { alpha } => (self.lambda * alpha, self.lambda),
            SplitContextKind::MinPen {
                gamma_d,
                rho_u,
                rd_self,
                rd_cross,
                s1,
                s2,
                ..
            } => {
                let first = s1 + gamma_d * rho_u * (rd_self + rd_cross);
                let second = s2 + gamma_d * (rd_self * rd_self + rd_cross * rd_cross);
                (self.lambda * first, self.lambda * second)
            }
        }
    }

    /// Exact penalty change `R(T~(delta1, delta2)) - R(T)` of performing
    /// the split with the given child increments.
    pub fn penalty_delta(&self, delta1: f64, delta2: f64) -> f64 {
        match &self.kind {
            SplitContextKind::LeafL2 { alpha } => {
                let (w1, w2) = (alpha + delta1, alpha + delta2);
                0.5 * self.lambda * (w1 * w1 + w2 * w2 - alpha * alpha)
            }
            SplitContextKind::MinPen {
                gamma_d,
                rho_u,
                rd_self,
                rd_cross,
                s1,
                s2,
                baseline,
            } => {
                let sum = delta1 + delta2;
                let a1 = delta1 * rd_self + delta2 * rd_cross;
                let a2 = delta1 * rd_cross + delta2 * rd_self;
                let quad = sum * s1
                    + 0.5 * sum * sum * s2
                    + gamma_d * (rho_u * a1 + 0.5 * a1 * a1)
                    + gamma_d * (rho_u * a2 + 0.5 * a2 * a2);
                self.lambda * (quad + baseline)
            }
        }
    }
}

/// Build the split context for splitting `leaf` of `tree`. `state` must be
/// fresh for the tree's current weights (`MinPen*` kinds read `rho`, and
/// `MinPenalty` additionally warm-starts its hypothetical solve from
/// `beta`).
pub fn split_context(
    tree: &Tree,
    cfg: &RegConfig,
    state: &RegTreeState,
    leaf: u32,
    lambda: f64,
) -> (SplitContext, SolveStats) {
    let mut stats = SolveStats::default();
    let kind = match cfg.kind {
        RegKind::LeafL2 => SplitContextKind::LeafL2 {
            alpha: tree.node(leaf).weight(),
        },
        RegKind::MinPenalty => {
            debug_assert_eq!(state.beta.len(), tree.len(), "stale regularizer state");
            let alpha = tree.node(leaf).weight();
            let topo = Topo::with_split(tree, leaf);
            let n = tree.len();
            let (u1, u2) = (n, n + 1);
            let child_depth = topo.depth[u1] as i32;
            let gamma_d = cfg.gamma.powi(child_depth);

            // betabar on T~(0,0): children pinned at alpha, warm-started
            // from the current solution (the split node keeps its old
            // internal value as the initial guess).
            let mut beta = vec![0.0; n + 2];
            beta[..n].copy_from_slice(&state.beta);
            beta[u1] = alpha;
            beta[u2] = alpha;
            stats.absorb(sweep_fixed_point(&topo, &mut beta, cfg));
            let mut rho = vec![0.0; n + 2];
            rho_min_penalty(&topo, &beta, &mut rho);

            // Unit-input solve on T~: sensitivities of betabar to delta1.
            let mut c = vec![0.0; n + 2];
            c[u1] = 1.0;
            stats.absorb(sweep_fixed_point(&topo, &mut c, cfg));

            let c_split = c[leaf as usize];
            let (mut s1, mut s2) = (0.0, 0.0);
            for v in 0..n {
                let rho_dot = if topo.parent[v] == NONE {
                    c[v]
                } else if topo.is_leaf(v as u32) {
                    -c[topo.parent[v] as usize]
                } else {
                    c[v] - c[topo.parent[v] as usize]
                };
                if rho_dot == 0.0 {
                    continue;
                }
                let g = cfg.gamma.powi(topo.depth[v] as i32);
                s1 += g * rho[v] * rho_dot;
                s2 += g * rho_dot * rho_dot;
            }

            let pen_tilde = penalty_of_rho(&topo, &rho, cfg.gamma);
            let pen_current = {
                let mut sum = 0.0;
                for v in 0..n {
                    let d = tree.node(v as u32).depth as i32;
                    sum += cfg.gamma.powi(d) * state.rho[v] * state.rho[v];
                }
                0.5 * sum
            };

            SplitContextKind::MinPen {
                gamma_d,
                rho_u: rho[u1],
                rd_self: 1.0 - c_split,
                rd_cross: -c_split,
                s1,
                s2,
                baseline: pen_tilde - pen_current,
            }
        }
        RegKind::MinPenaltySib => {
            debug_assert_eq!(state.rho.len(), tree.len(), "stale regularizer state");
            // On T~(0,0) both children carry alpha, so betabar and rho of
            // every existing node are unchanged and the baseline vanishes.
            // Closed-form rho_dot coefficients mirror derivatives_at_leaf
            // with the candidate child (depth d+1) in the leaf role.
            let child_depth = tree.node(leaf).depth as i32 + 1;
            let gamma_d = cfg.gamma.powi(child_depth);
            let (mut s1, mut s2) = (0.0, 0.0);
            let mut add = |node: u32, rho_dot: f64| {
                let g = cfg.gamma.powi(tree.node(node).depth as i32);
                s1 += g * state.rho[node as usize] * rho_dot;
                s2 += g * rho_dot * rho_dot;
            };
            let mut v = leaf;
            loop {
                let node = tree.node(v);
                match node.parent {
                    None => {
                        add(v, (2.0f64).powi(-child_depth));
                        break;
                    }
                    Some(p) => {
                        let coeff = (2.0f64).powi(node.depth as i32 - child_depth - 1);
                        add(v, coeff);
                        let (l, r) = match tree.node(p).kind {
                            NodeKind::Split { left, right, .. } => (left, right),
                            NodeKind::Leaf { .. } => unreachable!(),
                        };
                        add(if l == v { r } else { l }, -coeff);
                        v = p;
                    }
                }
            }
            SplitContextKind::MinPen {
                gamma_d,
                rho_u: 0.0,
                rd_self: 0.5,
                rd_cross: -0.5,
                s1,
                s2,
                baseline: 0.0,
            }
        }
    };
    (SplitContext { lambda, kind }, stats)
}

/// Split context for the "start a new tree" operation: splitting the root
/// leaf (weight 0) of a brand-new single-leaf tree. Depends only on the
/// configuration, so the search builds it once per pass.
pub fn new_tree_context(cfg: &RegConfig, lambda: f64) -> SplitContext {
    let kind = match cfg.kind {
        RegKind::LeafL2 => SplitContextKind::LeafL2 { alpha: 0.0 },
        RegKind::MinPenalty => {
            // Stump with internal root: the unit solve has the closed form
            // c_root = gamma / (1 + 2 gamma); every rho on T~(0,0) is zero.
            let c0 = cfg.gamma / (1.0 + 2.0 * cfg.gamma);
            SplitContextKind::MinPen {
                gamma_d: cfg.gamma,
                rho_u: 0.0,
                rd_self: 1.0 - c0,
                rd_cross: -c0,
                s1: 0.0,
                s2: c0 * c0,
                baseline: 0.0,
            }
        }
        RegKind::MinPenaltySib => SplitContextKind::MinPen {
            gamma_d: cfg.gamma,
            rho_u: 0.0,
            rd_self: 0.5,
            rd_cross: -0.5,
            s1: 0.0,
            s2: 0.25,
            baseline: 0.0,
        },
    };
    SplitContext { lambda, kind }
}
