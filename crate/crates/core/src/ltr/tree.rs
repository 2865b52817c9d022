//! Leaf-wise regression trees with exact splits over presorted columns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A regression tree node. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        value: f64,
    },
}

impl Node {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    /// Largest feature index used by any split, if any.
    pub fn max_feature(&self) -> Option<usize> {
        match self {
            Node::Leaf { .. } => None,
            Node::Split { feature, left, right, .. } => {
                [Some(*feature), left.max_feature(), right.max_feature()].into_iter().flatten().max()
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            Node::Leaf { value } => value.is_finite(),
            Node::Split { threshold, left, right, .. } => {
                threshold.is_finite() && left.all_finite() && right.all_finite()
            }
        }
    }
}

/// Column-major training matrix with per-feature row orderings.
pub(crate) struct Columns {
    pub n_rows: usize,
    pub cols: Vec<Vec<f64>>,
    /// Row indices sorted by value (then row), for non-constant features.
    sorted: Vec<(usize, Vec<u32>)>,
}

impl Columns {
    pub fn new(cols: Vec<Vec<f64>>, n_rows: usize) -> Self {
        let sorted = cols
            .par_iter()
            .enumerate()
            .filter_map(|(f, col)| {
                let first = *col.first()?;
                if col.iter().all(|v| *v == first) {
                    return None;
                }
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                Some((f, idx))
            })
            .collect();
        Columns { n_rows, cols, sorted }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
}

/// Ridge added to the hessian sum in leaf Newton steps.
pub const LEAF_RIDGE: f64 = 1e-6;
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct SplitCandidate {
    gain: f64,
    /// Position in `Columns::sorted`.
    slot: usize,
    threshold: f64,
    n_left: usize,
}

enum Arena {
    Leaf { start: usize, end: usize, best: Option<SplitCandidate> },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Fits one tree to gradients `grad`; returns the tree and the value it
/// assigns to every training row.
pub(crate) fn fit_tree(data: &Columns, grad: &[f64], hess: &[f64], params: TreeParams) -> (Node, Vec<f64>) {
    let n = data.n_rows;
    let min_leaf = params.min_samples_leaf.max(1);
    let mut orders: Vec<Vec<u32>> = data.sorted.iter().map(|(_, idx)| idx.clone()).collect();
    let mut rows: Vec<u32> = (0..n as u32).collect();
    let mut goes_left = vec![false; n];
    let mut scratch: Vec<Vec<u32>> = vec![Vec::new(); orders.len()];

    let mut arena = vec![Arena::Leaf { start: 0, end: n, best: None }];
    let first = best_split(data, &orders, grad, 0, n, min_leaf);
    arena[0] = Arena::Leaf { start: 0, end: n, best: first };
    let mut n_leaves = 1;

    while n_leaves < params.max_leaves.max(1) {
        let mut pick: Option<(usize, f64)> = None;
        for (i, node) in arena.iter().enumerate() {
            if let Arena::Leaf { best: Some(c), .. } = node {
                if pick.is_none_or(|(_, g)| c.gain > g) {
                    pick = Some((i, c.gain));
                }
            }
        }
        let Some((leaf, _)) = pick else { break };
        let Arena::Leaf { start, end, best: Some(c) } = arena[leaf] else { unreachable!() };
        let mid = start + c.n_left;
        for &r in &orders[c.slot][start..mid] {
            goes_left[r as usize] = true;
        }
        orders
            .par_iter_mut()
            .zip(scratch.par_iter_mut())
            .for_each(|(order, buf)| stable_partition(&mut order[start..end], &goes_left, buf));
        let mut buf = Vec::new();
        stable_partition(&mut rows[start..end], &goes_left, &mut buf);
        for &r in &rows[start..mid] {
            goes_left[r as usize] = false;
        }
        let left_best = best_split(data, &orders, grad, start, mid, min_leaf);
        let right_best = best_split(data, &orders, grad, mid, end, min_leaf);
        let l = arena.len();
        arena.push(Arena::Leaf { start, end: mid, best: left_best });
        arena.push(Arena::Leaf { start: mid, end, best: right_best });
        arena[leaf] = Arena::Split {
            feature: data.sorted[c.slot].0,
            threshold: c.threshold,
            left: l,
            right: l + 1,
        };
        n_leaves += 1;
    }

    let mut row_values = vec![0.0; n];
    let tree = build(&arena, 0, &rows, grad, hess, &mut row_values);
    (tree, row_values)
}

fn build(arena: &[Arena], i: usize, rows: &[u32], grad: &[f64], hess: &[f64], out: &mut [f64]) -> Node {
    match arena[i] {
        Arena::Leaf { start, end, .. } => {
            let seg = &rows[start..end];
            let g: f64 = seg.iter().map(|&r| grad[r as usize]).sum();
            let h: f64 = seg.iter().map(|&r| hess[r as usize]).sum();
            let value = -g / (h + LEAF_RIDGE);
            for &r in seg {
                out[r as usize] = value;
            }
            Node::Leaf { value }
        }
        Arena::Split { feature, threshold, left, right } => Node::Split {
            feature,
            threshold,
            left: Box::new(build(arena, left, rows, grad, hess, out)),
            right: Box::new(build(arena, right, rows, grad, hess, out)),
        },
    }
}

fn stable_partition(seg: &mut [u32], goes_left: &[bool], buf: &mut Vec<u32>) {
    buf.clear();
    let mut w = 0;
    for i in 0..seg.len() {
        let r = seg[i];
        if goes_left[r as usize] {
            seg[w] = r;
            w += 1;
        } else {
            buf.push(r);
        }
    }
    seg[w..].copy_from_slice(buf);
}

/// Best variance-reducing split of rows `start..end`. Gains are compared in
/// feature order and ascending threshold, keeping the first maximum.
fn best_split(
    data: &Columns,
    orders: &[Vec<u32>],
    grad: &[f64],
    start: usize,
    end: usize,
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let n = end - start;
    if n < 2 * min_leaf || orders.is_empty() {
        return None;
    }
    let total: f64 = orders[0][start..end].iter().map(|&r| grad[r as usize]).sum();
    let parent = total * total / n as f64;
    let per_feature: Vec<Option<SplitCandidate>> = orders
        .par_iter()
        .enumerate()
        .map(|(slot, order)| {
            let col = &data.cols[data.sorted[slot].0];
            let seg = &order[start..end];
            let mut best: Option<SplitCandidate> = None;
            let mut gl = 0.0;
            for i in 0..n - 1 {
                gl += grad[seg[i] as usize];
                let nl = i + 1;
                if nl < min_leaf {
                    continue;
                }
                let nr = n - nl;
                if nr < min_leaf {
                    break;
                }
                let v = col[seg[i] as usize];
                let vn = col[seg[i + 1] as usize];
                if v == vn {
                    continue;
                }
                let gr = total - gl;
                let gain = gl * gl / nl as f64 + gr * gr / nr as f64 - parent;
                if gain > MIN_GAIN && best.is_none_or(|b| gain > b.gain) {
                    let mut threshold = v + (vn - v) / 2.0;
                    if !(threshold >= v && threshold < vn) {
                        threshold = v;
                    }
                    best = Some(SplitCandidate { gain, slot, threshold, n_left: nl });
                }
            }
            best
        })
        .collect();
    per_feature
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<SplitCandidate>, c| match acc {
            Some(a) if a.gain >= c.gain => Some(a),
            _ => Some(c),
        })
}
