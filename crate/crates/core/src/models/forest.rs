//! CART trees with Gini impurity and a bagged random forest.
//!
//! Large nodes search splits over per-feature histograms of at most 256
//! quantile bins; nodes below [`EXACT_CUTOFF`] weighted rows sort the raw
//! values and try every midpoint, so deep nodes still split exactly and a
//! tree can fit any consistent training set.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ModelParams;

const MAX_BINS: usize = 256;
/// Nodes with fewer rows than this use exact split search.
pub const EXACT_CUTOFF: usize = 128;
const NO_CHILD: u32 = 0;

/// A fitted tree in struct-of-arrays form. Node 0 is the root; `left == 0`
/// marks a leaf because the root is never a child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    feature: Vec<u32>,
    threshold: Vec<f64>,
    left: Vec<u32>,
    right: Vec<u32>,
    /// Weighted (non-confused, confused) training counts per node.
    counts: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_features: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

/// Column-major training data with histogram bins.
struct TrainData<'a> {
    cols: Vec<Vec<f64>>,
    codes: Vec<Vec<u8>>,
    /// Per feature, the threshold separating bin b from bin b + 1.
    bin_thresholds: Vec<Vec<f64>>,
    y: &'a [bool],
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

impl<'a> TrainData<'a> {
    fn new(xs: &[Vec<f64>], y: &'a [bool]) -> Self {
        let d = xs.first().map_or(0, Vec::len);
        let cols: Vec<Vec<f64>> = (0..d).map(|f| xs.iter().map(|r| r[f]).collect()).collect();
        let (codes, bin_thresholds) = cols
            .par_iter()
            .map(|col| {
                let mut sorted = col.clone();
                sorted.sort_by(f64::total_cmp);
                let mut distinct = sorted.clone();
                distinct.dedup();
                let mut cuts: Vec<f64> = if distinct.len() <= MAX_BINS {
                    distinct[1.min(distinct.len())..].to_vec()
                } else {
                    let n = sorted.len();
                    let mut c: Vec<f64> = (1..MAX_BINS).map(|b| sorted[b * n / MAX_BINS]).collect();
                    c.dedup();
                    c.retain(|v| *v > sorted[0]);
                    c
                };
                cuts.dedup();
                let thresholds = cuts
                    .iter()
                    .map(|&cut| {
                        let pos = distinct.partition_point(|v| *v < cut);
                        midpoint(distinct[pos - 1], cut)
                    })
                    .collect();
                let code = col.iter().map(|v| cuts.partition_point(|c| c <= v) as u8).collect();
                (code, thresholds)
            })
            .unzip();
        TrainData {
            cols,
            codes,
            bin_thresholds,
            y,
        }
    }

    fn n_features(&self) -> usize {
        self.cols.len()
    }
}

/// n − (c0² + c1²)/n: the size-weighted Gini impurity.
fn weighted_gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n == 0.0 {
        0.0
    } else {
        n - (c0 * c0 + c1 * c1) / n
    }
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Grower<'d, 'a> {
    data: &'d TrainData<'a>,
    weights: Vec<u32>,
    params: TreeParams,
    rng: ChaCha8Rng,
    hist: Vec<[u64; 2]>,
    exact_buf: Vec<(f64, bool, u32)>,
    tree: DecisionTree,
}

const GAIN_EPS: f64 = 1e-12;

impl Grower<'_, '_> {
    fn counts(&self, idx: &[u32]) -> [u32; 2] {
        let mut c = [0u32; 2];
        for &i in idx {
            c[self.data.y[i as usize] as usize] += self.weights[i as usize];
        }
        c
    }

    /// Best split of `idx` on feature `f`: (gain, threshold), or None when
    /// no threshold leaves `min_leaf` weight on both sides.
    fn best_on_feature(&mut self, idx: &[u32], f: usize, parent: [u32; 2]) -> Option<(f64, f64)> {
        let min_leaf = self.params.min_leaf as u64;
        let (p0, p1) = (parent[0] as u64, parent[1] as u64);
        let parent_imp = weighted_gini(p0 as f64, p1 as f64);
        let mut best: Option<(f64, f64)> = None;
        let mut consider = |l0: u64, l1: u64, thr: &dyn Fn() -> f64| {
            let (r0, r1) = (p0 - l0, p1 - l1);
            if l0 + l1 < min_leaf || r0 + r1 < min_leaf {
                return;
            }
            let gain = parent_imp - weighted_gini(l0 as f64, l1 as f64) - weighted_gini(r0 as f64, r1 as f64);
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, thr()));
            }
        };
        let n_weight = p0 + p1;
        let thresholds = &self.data.bin_thresholds[f];
        if n_weight as usize >= EXACT_CUTOFF && !thresholds.is_empty() {
            let n_bins = thresholds.len() + 1;
            self.hist[..n_bins].fill([0, 0]);
            let codes = &self.data.codes[f];
            for &i in idx {
                let i = i as usize;
                self.hist[codes[i] as usize][self.data.y[i] as usize] += self.weights[i] as u64;
            }
            let (mut l0, mut l1) = (0u64, 0u64);
            for b in 0..n_bins - 1 {
                l0 += self.hist[b][0];
                l1 += self.hist[b][1];
                if self.hist[b] == [0, 0] || l0 + l1 == n_weight {
                    continue;
                }
                consider(l0, l1, &|| thresholds[b]);
            }
        } else {
            let col = &self.data.cols[f];
            self.exact_buf.clear();
            self.exact_buf
                .extend(idx.iter().map(|&i| (col[i as usize], self.data.y[i as usize], self.weights[i as usize])));
            self.exact_buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let buf = &self.exact_buf;
            let (mut l0, mut l1) = (0u64, 0u64);
            for k in 0..buf.len() - 1 {
                if buf[k].1 {
                    l1 += buf[k].2 as u64;
                } else {
                    l0 += buf[k].2 as u64;
                }
                let (a, b) = (buf[k].0, buf[k + 1].0);
                if a < b {
                    consider(l0, l1, &|| midpoint(a, b));
                }
            }
        }
        best
    }

    fn find_split(&mut self, idx: &[u32], parent: [u32; 2]) -> Option<Candidate> {
        let d = self.data.n_features();
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(&mut self.rng);
        let mut best: Option<Candidate> = None;
        let mut fallback: Option<Candidate> = None;
        for (tried, &f) in order.iter().enumerate() {
            if tried >= self.params.max_features && best.is_some() {
                break;
            }
            let Some((gain, threshold)) = self.best_on_feature(idx, f, parent) else { continue };
            let cand = Candidate { gain, feature: f, threshold };
            if gain > GAIN_EPS {
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(cand);
                }
            } else if fallback.is_none() {
                fallback = Some(cand);
            }
        }
        best.or(fallback)
    }

    fn push_node(&mut self, counts: [u32; 2]) -> u32 {
        let t = &mut self.tree;
        t.feature.push(0);
        t.threshold.push(0.0);
        t.left.push(NO_CHILD);
        t.right.push(NO_CHILD);
        t.counts.push(counts);
        (t.counts.len() - 1) as u32
    }

    fn grow(mut self, mut idx: Vec<u32>) -> DecisionTree {
        let root_counts = self.counts(&idx);
        self.push_node(root_counts);
        let mut stack = vec![(0u32, 0usize, idx.len(), 0usize)];
        while let Some((node, start, end, depth)) = stack.pop() {
            let c = self.tree.counts[node as usize];
            if c[0] == 0 || c[1] == 0 || self.params.max_depth.is_some_and(|m| depth >= m) {
                continue;
            }
            if ((c[0] + c[1]) as usize) < 2 * self.params.min_leaf {
                continue;
            }
            let Some(split) = self.find_split(&idx[start..end], c) else { continue };
            let col = &self.data.cols[split.feature];
            let seg = &mut idx[start..end];
            let mut mid = 0;
            for k in 0..seg.len() {
                if col[seg[k] as usize] <= split.threshold {
                    seg.swap(k, mid);
                    mid += 1;
                }
            }
            let mid = start + mid;
            let lc = self.counts(&idx[start..mid]);
            let rc = [c[0] - lc[0], c[1] - lc[1]];
            let l = self.push_node(lc);
            let r = self.push_node(rc);
            let t = &mut self.tree;
            t.feature[node as usize] = split.feature as u32;
            t.threshold[node as usize] = split.threshold;
            t.left[node as usize] = l;
            t.right[node as usize] = r;
            stack.push((r, mid, end, depth + 1));
            stack.push((l, start, mid, depth + 1));
        }
        self.tree
    }
}

fn grow_tree(data: &TrainData, weights: Vec<u32>, params: TreeParams, seed: u64) -> DecisionTree {
    let idx: Vec<u32> = (0..weights.len() as u32).filter(|&i| weights[i as usize] > 0).collect();
    Grower {
        data,
        weights,
        params,
        rng: ChaCha8Rng::seed_from_u64(seed),
        hist: vec![[0, 0]; MAX_BINS],
        exact_buf: Vec::new(),
        tree: DecisionTree {
            feature: Vec::new(),
            threshold: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            counts: Vec::new(),
        },
    }
    .grow(idx)
}

impl DecisionTree {
    /// A single tree on every row with unit weight (no bootstrap).
    pub fn fit(xs: &[Vec<f64>], ys: &[bool], params: TreeParams, seed: u64) -> Self {
        let data = TrainData::new(xs, ys);
        grow_tree(&data, vec![1; ys.len()], params, seed)
    }

    fn leaf(&self, x: &[f64]) -> usize {
        let mut n = 0;
        while self.left[n] != NO_CHILD {
            n = if x[self.feature[n] as usize] <= self.threshold[n] {
                self.left[n] as usize
            } else {
                self.right[n] as usize
            };
        }
        n
    }

    /// Confused fraction of the training weight in the leaf reached by `x`.
    pub fn p_confused(&self, x: &[f64]) -> f64 {
        let [c0, c1] = self.counts[self.leaf(x)];
        c1 as f64 / (c0 + c1) as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.counts.len()
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((n, d)) = stack.pop() {
            best = best.max(d);
            if self.left[n] != NO_CHILD {
                stack.push((self.left[n] as usize, d + 1));
                stack.push((self.right[n] as usize, d + 1));
            }
        }
        best
    }

    /// Structural sanity check for deserialized trees.
    pub(crate) fn validate(&self, n_features: usize) -> Result<(), String> {
        let n = self.counts.len();
        if n == 0
            || [self.feature.len(), self.threshold.len(), self.left.len(), self.right.len()]
                .iter()
                .any(|&l| l != n)
        {
            return Err("tree arrays have inconsistent lengths".into());
        }
        for i in 0..n {
            let (l, r) = (self.left[i] as usize, self.right[i] as usize);
            if l == 0 && r == 0 {
                if self.counts[i] == [0, 0] {
                    return Err(format!("leaf {i} has no training weight"));
                }
                continue;
            }
            if l <= i || r <= i || l >= n || r >= n || self.feature[i] as usize >= n_features {
                return Err(format!("node {i} has invalid children or feature"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(xs: &[Vec<f64>], ys: &[bool], params: &ModelParams) -> Self {
        let d = xs[0].len();
        let data = TrainData::new(xs, ys);
        let tree_params = TreeParams {
            max_features: params.features_per_split(d),
            max_depth: params.max_depth,
            min_leaf: params.min_leaf,
        };
        let n = ys.len();
        let trees = (0..params.n_trees as u64)
            .into_par_iter()
            .map(|t| {
                let seed = crate::derive_seed(params.seed, t);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut weights = vec![0u32; n];
                for _ in 0..n {
                    weights[rng.random_range(0..n)] += 1;
                }
                grow_tree(&data, weights, tree_params, rng.random())
            })
            .collect();
        RandomForest { n_features: d, trees }
    }

    /// Mean over trees of the leaf confused-fraction.
    pub fn p_confused(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.p_confused(x)).sum();
        sum / self.trees.len() as f64
    }
}
