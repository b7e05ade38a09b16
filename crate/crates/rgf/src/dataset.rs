//! Tabular datasets: loading, feature indexing, and synthetic generation.
//!
//! # File formats
//!
//! * **dense features** — one row per line, whitespace-separated numeric
//!   values, every row the same width;
//! * **sparse features** — one row per line of 0-based `index:value`
//!   entries (an empty line is an all-zero row); the dimension is the
//!   largest index seen plus one;
//! * **targets** — one numeric value per line, one per feature row;
//! * **preference pairs** — one `i j` pair of 0-based row indices per
//!   line, meaning row `i` should score higher than row `j`.
//!
//! Files are UTF-8 with either LF or CRLF endings. Malformed content is
//! reported with its 1-based line number. All values must be finite.
//!
//! # Synthetic benchmark data
//!
//! [`synthesize`] reproduces the classic synthetic regression setup: the
//! target function is the sum of `trees` random `q`-leaf regression trees
//! over `[0,1]^dim`, features are uniform, and targets are noise-free
//! evaluations of that function. The generated target function is returned
//! as an ordinary [`Forest`] for inspection.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Forest, Tree};
use crate::rng::Rng;

/// On-disk layout of the feature file (and, for `Pairs`, of the target file).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFormat {
    /// Dense features, value targets.
    Dense,
    /// Sparse `index:value` features, value targets.
    Sparse,
    /// Dense features, preference-pair targets.
    Pairs,
}

/// Training targets: per-row values, or preference pairs over rows.
#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    Values(Vec<f64>),
    Pairs(Vec<(u32, u32)>),
}

/// An in-memory dataset. Features are stored densely row-major; sparse
/// input files are densified on load (the training algorithms scan
/// feature columns, so a dense layout is what they want anyway).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    dim: usize,
    x: Vec<f64>,
    targets: Targets,
}

impl Dataset {
    pub fn from_parts(x: Vec<f64>, dim: usize, targets: Targets) -> Dataset {
        assert!(dim > 0, "dataset must have at least one feature");
        assert_eq!(x.len() % dim, 0);
        let n = x.len() / dim;
        if let Targets::Values(v) = &targets {
            assert_eq!(v.len(), n);
        }
        Dataset { n, dim, x, targets }
    }

    /// Convenience constructor for row-per-`Vec` feature matrices.
    pub fn from_rows(rows: Vec<Vec<f64>>, targets: Targets) -> Dataset {
        let dim = rows.first().map_or(1, |r| r.len());
        let mut x = Vec::with_capacity(rows.len() * dim);
        for r in &rows {
            assert_eq!(r.len(), dim);
            x.extend_from_slice(r);
        }
        Dataset::from_parts(x, dim, targets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.x[row * self.dim + feature]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.x[row * self.dim..(row + 1) * self.dim]
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    /// Per-row target values; `None` for pairwise datasets.
    pub fn values(&self) -> Option<&[f64]> {
        match &self.targets {
            Targets::Values(v) => Some(v),
            Targets::Pairs(_) => None,
        }
    }

    pub fn pairs(&self) -> Option<&[(u32, u32)]> {
        match &self.targets {
            Targets::Pairs(p) => Some(p),
            Targets::Values(_) => None,
        }
    }

    /// New dataset containing `rows` (in the given order). Only defined
    /// for value targets; preference pairs do not survive row subsetting.
    pub fn subset(&self, rows: &[u32]) -> Result<Dataset> {
        let values = self.values().ok_or_else(|| {
            Error::InvalidConfig("cannot subset a pairwise dataset by rows".into())
        })?;
        let mut x = Vec::with_capacity(rows.len() * self.dim);
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            x.extend_from_slice(self.row(r as usize));
            y.push(values[r as usize]);
        }
        Ok(Dataset::from_parts(x, self.dim, Targets::Values(y)))
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .collect())
}

fn parse_finite(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_dense_features(path: &Path) -> Result<(Vec<f64>, usize)> {
    let lines = read_lines(path)?;
    let mut x = Vec::new();
    let mut dim = None;
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            return Err(Error::parse(path, i + 1, "empty row in dense feature file"));
        }
        let start = x.len();
        for tok in line.split_whitespace() {
            let v = parse_finite(tok).ok_or_else(|| {
                Error::parse(path, i + 1, format!("invalid feature value {tok:?}"))
            })?;
            x.push(v);
        }
        let width = x.len() - start;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("row has {width} values, expected {d}"),
                ))
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| Error::parse(path, 1, "feature file is empty"))?;
    Ok((x, dim))
}

pub fn load_sparse_features(path: &Path) -> Result<(Vec<f64>, usize)> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(Error::parse(path, 1, "feature file is empty"));
    }
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(lines.len());
    let mut dim = 0usize;
    for (i, line) in lines.iter().enumerate() {
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            let (idx, val) = tok
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, parse_finite(b)?)))
                .ok_or_else(|| {
                    Error::parse(path, i + 1, format!("invalid sparse entry {tok:?}"))
                })?;
            if row.iter().any(|&(j, _)| j == idx) {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("duplicate feature index {idx}"),
                ));
            }
            dim = dim.max(idx + 1);
            row.push((idx, val));
        }
        rows.push(row);
    }
    if dim == 0 {
        return Err(Error::parse(path, 1, "sparse file declares no features"));
    }
    let mut x = vec![0.0; rows.len() * dim];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            x[i * dim + j] = v;
        }
    }
    Ok((x, dim))
}

pub fn load_values(path: &Path) -> Result<Vec<f64>> {
    let lines = read_lines(path)?;
    let mut y = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let tok = line.trim();
        let v = parse_finite(tok)
            .ok_or_else(|| Error::parse(path, i + 1, format!("invalid target value {tok:?}")))?;
        y.push(v);
    }
    Ok(y)
}

fn load_pairs(path: &Path, n: usize) -> Result<Vec<(u32, u32)>> {
    let lines = read_lines(path)?;
    let mut pairs = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let bad = |msg: String| Error::parse(path, i + 1, msg);
        let mut tok = line.split_whitespace();
        let (a, b) = match (tok.next(), tok.next(), tok.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(bad("expected exactly two row indices".into())),
        };
        let parse = |t: &str| -> Result<u32> {
            t.parse::<u32>()
                .ok()
                .filter(|&v| (v as usize) < n)
                .ok_or_else(|| bad(format!("row index {t:?} out of range (n = {n})")))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == b {
            return Err(bad(format!("pair compares row {a} with itself")));
        }
        pairs.push((a, b));
    }
    Ok(pairs)
}

/// Load features and targets according to `format`. See the module docs
/// for the file grammars.
pub fn load_dataset(features: &Path, targets: &Path, format: DataFormat) -> Result<Dataset> {
    let (x, dim) = match format {
        DataFormat::Dense | DataFormat::Pairs => load_dense_features(features)?,
        DataFormat::Sparse => load_sparse_features(features)?,
    };
    let n = x.len() / dim;
    let t = match format {
        DataFormat::Dense | DataFormat::Sparse => {
            let y = load_values(targets)?;
            if y.len() != n {
                return Err(Error::TargetCountMismatch {
                    targets: y.len(),
                    rows: n,
                });
            }
            Targets::Values(y)
        }
        DataFormat::Pairs => Targets::Pairs(load_pairs(targets, n)?),
    };
    Ok(Dataset::from_parts(x, dim, t))
}

/// Write a dense feature matrix (used by the `synth` subcommand).
pub fn save_dense_features(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..data.n() {
        let row = data.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write per-row target values, one per line.
pub fn save_values(values: &[f64], path: &Path) -> Result<()> {
    let mut out = String::new();
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Per-feature orderings of instance ids, ascending by feature value with
/// ties broken by instance id. Equal values therefore form contiguous runs
/// with ascending ids — the split scan relies on this to enumerate only
/// thresholds between *distinct* values.
#[derive(Clone, Debug)]
pub struct SortedFeatureIndex {
    columns: Vec<Vec<u32>>,
}

impl SortedFeatureIndex {
    pub fn column(&self, feature: usize) -> &[u32] {
        &self.columns[feature]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }
}

/// Precompute the per-feature sort of all instances.
pub fn build_sorted_index(data: &Dataset) -> SortedFeatureIndex {
    let mut columns = Vec::with_capacity(data.dim());
    for j in 0..data.dim() {
        let mut ids: Vec<u32> = (0..data.n() as u32).collect();
        ids.sort_unstable_by(|&a, &b| {
            data.value(a as usize, j)
                .total_cmp(&data.value(b as usize, j))
                .then(a.cmp(&b))
        });
        columns.push(ids);
    }
    SortedFeatureIndex { columns }
}

/// Configuration of the synthetic regression generator.
#[derive(Clone, Debug)]
pub struct SynthConfig {
    /// Leaves per random target tree.
    pub q: usize,
    /// Number of random trees summed into the target function.
    pub trees: usize,
    /// Feature-space dimension; features are i.i.d. uniform on `[0,1]`.
    pub dim: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            q: 10,
            trees: 100,
            dim: 10,
            n_train: 2000,
            n_test: 20_000,
            seed: 1,
        }
    }
}

/// Draw a random `q`-leaf tree: starting from a single leaf, repeatedly
/// split a uniformly random current leaf on a uniformly random feature at
/// a uniform threshold; finally assign each leaf an independent standard
/// normal value (in node-id order).
fn random_target_tree(rng: &mut Rng, q: usize, dim: usize) -> Tree {
    let mut tree = Tree::leaf(0.0);
    let mut leaves: Vec<u32> = vec![0];
    while leaves.len() < q {
        let pick = rng.below(leaves.len());
        let leaf = leaves.swap_remove(pick);
        let feature = rng.below(dim);
        let threshold = rng.uniform();
        let (l, r) = tree.split_leaf(leaf, feature, threshold, 0.0, 0.0);
        leaves.push(l);
        leaves.push(r);
    }
    let ids: Vec<u32> = tree.leaves().collect();
    for leaf in ids {
        let w = rng.normal();
        tree.set_leaf_weight(leaf, w);
    }
    tree
}

fn draw_rows(rng: &mut Rng, n: usize, dim: usize, target: &Forest) -> Dataset {
    let mut x = Vec::with_capacity(n * dim);
    let mut y = Vec::with_capacity(n);
    let mut row = vec![0.0; dim];
    for _ in 0..n {
        for v in row.iter_mut() {
            *v = rng.uniform();
        }
        x.extend_from_slice(&row);
        y.push(target.predict(&row));
    }
    Dataset::from_parts(x, dim, Targets::Values(y))
}

/// Generate `(train, test, target_function)`. Deterministic in
/// `config.seed`; the draw order is: all target trees, then the training
/// rows, then the test rows.
pub fn synthesize(config: &SynthConfig) -> (Dataset, Dataset, Forest) {
    assert!(config.q >= 1 && config.dim >= 1);
    let mut rng = Rng::new(config.seed);
    let mut target = Forest::new();
    for _ in 0..config.trees {
        target.trees.push(random_target_tree(&mut rng, config.q, config.dim));
    }
    let train = draw_rows(&mut rng, config.n_train, config.dim, &target);
    let test = draw_rows(&mut rng, config.n_test, config.dim, &target);
    (train, test, target)
}
