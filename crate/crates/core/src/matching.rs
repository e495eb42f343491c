//! Min-cost maximum-cardinality correspondence between predicted and
//! ground-truth boundary pixels under an offset tolerance.
//!
//! The candidate graph joins every pred/gt pair closer than `d_max` (found
//! through a uniform grid with cell size `d_max`). It is split into connected
//! components and each component is solved by successive shortest
//! augmenting paths with Dijkstra on reduced costs. Each augmentation adds
//! one pair at the least possible extra cost, so the final matching has
//! maximum cardinality and, among those, minimum total Euclidean distance.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::raster::{BinaryMap, Pixel};

/// Maximum matching distance, optionally derived from the image diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    d_max: f64,
    diagonal_fraction: Option<f64>,
}

impl Tolerance {
    /// Twice the customary 0.75%-of-diagonal boundary tolerance.
    pub const DEFAULT_DIAGONAL_FRACTION: f64 = 0.015;

    pub fn absolute(d_max: f64) -> Result<Self> {
        if !(d_max.is_finite() && d_max > 0.0) {
            return Err(Error::InvalidArgument(format!("d_max must be positive, got {d_max}")));
        }
        Ok(Self {
            d_max,
            diagonal_fraction: None,
        })
    }

    pub fn from_diagonal(width: u32, height: u32, fraction: f64) -> Result<Self> {
        let diag = f64::from(width).hypot(f64::from(height));
        let mut t = Self::absolute(fraction * diag)?;
        t.diagonal_fraction = Some(fraction);
        Ok(t)
    }

    pub fn default_for(width: u32, height: u32) -> Self {
        Self::from_diagonal(width.max(1), height.max(1), Self::DEFAULT_DIAGONAL_FRACTION)
            .expect("default fraction is positive")
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn diagonal_fraction(&self) -> Option<f64> {
        self.diagonal_fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub pred: Pixel,
    pub gt: Pixel,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Sorted by pred pixel.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_pred: Vec<Pixel>,
    pub unmatched_gt: Vec<Pixel>,
    pub total_cost: f64,
}

impl MatchResult {
    pub fn n_matched(&self) -> usize {
        self.pairs.len()
    }
}

pub fn match_pixels(pred: &BinaryMap, gt: &BinaryMap, tol: &Tolerance) -> Result<MatchResult> {
    check_dims(gt.dims(), pred.dims())?;
    let p: Vec<Pixel> = pred.on_pixels().collect();
    let g: Vec<Pixel> = gt.on_pixels().collect();
    Ok(match_pixel_sets(&p, &g, tol.d_max()))
}

/// Matches two pixel sets directly. Duplicate pixels are treated as
/// distinct vertices.
pub fn match_pixel_sets(pred: &[Pixel], gt: &[Pixel], d_max: f64) -> MatchResult {
    let edges = candidate_edges(pred, gt, d_max);
    let mut match_pred: Vec<Option<(usize, f64)>> = vec![None; pred.len()];

    for comp in components(pred.len(), gt.len(), &edges) {
        solve_component(&comp, &mut match_pred);
    }

    let mut gt_used = vec![false; gt.len()];
    let mut pairs = Vec::new();
    let mut unmatched_pred = Vec::new();
    let mut total_cost = 0.0;
    for (i, m) in match_pred.iter().enumerate() {
        match m {
            Some((j, c)) => {
                gt_used[*j] = true;
                total_cost += c;
                pairs.push(MatchedPair {
                    pred: pred[i],
                    gt: gt[*j],
                    distance: *c,
                });
            }
            None => unmatched_pred.push(pred[i]),
        }
    }
    let unmatched_gt = gt
        .iter()
        .zip(&gt_used)
        .filter(|(_, &u)| !u)
        .map(|(p, _)| *p)
        .collect();
    pairs.sort_by(|a, b| a.pred.cmp(&b.pred).then(a.gt.cmp(&b.gt)));
    unmatched_pred.sort();
    let mut result = MatchResult {
        pairs,
        unmatched_pred,
        unmatched_gt,
        total_cost,
    };
    result.unmatched_gt.sort();
    result
}

/// (pred index, gt index, distance) for every pair within `d_max`.
fn candidate_edges(pred: &[Pixel], gt: &[Pixel], d_max: f64) -> Vec<(usize, usize, f64)> {
    let cell = d_max.ceil().max(1.0) as i64;
    let limit = d_max * d_max;
    let key = |p: &Pixel| (i64::from(p.x) / cell, i64::from(p.y) / cell);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (j, g) in gt.iter().enumerate() {
        buckets.entry(key(g)).or_default().push(j);
    }
    let mut edges = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        let (cx, cy) = key(p);
        for bx in cx - 1..=cx + 1 {
            for by in cy - 1..=cy + 1 {
                let Some(list) = buckets.get(&(bx, by)) else { continue };
                for &j in list {
                    let sq = p.sq_distance(&gt[j]);
                    if (sq as f64) <= limit {
                        edges.push((i, j, (sq as f64).sqrt()));
                    }
                }
            }
        }
    }
    edges
}

struct Component {
    /// Global pred indices of local left vertices.
    left: Vec<usize>,
    /// Global gt indices of local right vertices.
    right: Vec<usize>,
    adj: Vec<Vec<(usize, f64)>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn components(n_pred: usize, n_gt: usize, edges: &[(usize, usize, f64)]) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..n_pred + n_gt).collect();
    for &(i, j, _) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, n_pred + j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut comp_of_root: HashMap<usize, usize> = HashMap::new();
    let mut comps: Vec<Component> = Vec::new();
    let mut local_left = vec![usize::MAX; n_pred];
    let mut local_right = vec![usize::MAX; n_gt];
    for &(i, j, c) in edges {
        let root = find(&mut parent, i);
        let k = *comp_of_root.entry(root).or_insert_with(|| {
            comps.push(Component {
                left: Vec::new(),
                right: Vec::new(),
                adj: Vec::new(),
            });
            comps.len() - 1
        });
        let comp = &mut comps[k];
        if local_left[i] == usize::MAX {
            local_left[i] = comp.left.len();
            comp.left.push(i);
            comp.adj.push(Vec::new());
        }
        if local_right[j] == usize::MAX {
            local_right[j] = comp.right.len();
            comp.right.push(j);
        }
        comp.adj[local_left[i]].push((local_right[j], c));
    }
    comps
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Left(usize),
    Right(usize),
    Sink,
}

struct HeapItem {
    dist: f64,
    node: Node,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    // min-heap on distance, ties broken by node for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

fn solve_component(comp: &Component, match_pred: &mut [Option<(usize, f64)>]) {
    let (nl, nr) = (comp.left.len(), comp.right.len());
    let mut match_l: Vec<Option<(usize, f64)>> = vec![None; nl];
    let mut match_r: Vec<Option<usize>> = vec![None; nr];
    // potentials; the source keeps potential 0 throughout
    let mut pot_l = vec![0.0f64; nl];
    let mut pot_r = vec![0.0f64; nr];
    let mut pot_t = 0.0f64;

    let mut dist_l = vec![f64::INFINITY; nl];
    let mut dist_r = vec![f64::INFINITY; nr];
    let mut prev_r = vec![usize::MAX; nr];
    let mut heap = BinaryHeap::new();

    loop {
        dist_l.fill(f64::INFINITY);
        dist_r.fill(f64::INFINITY);
        heap.clear();
        for u in 0..nl {
            if match_l[u].is_none() {
                dist_l[u] = (-pot_l[u]).max(0.0);
                heap.push(HeapItem {
                    dist: dist_l[u],
                    node: Node::Left(u),
                });
            }
        }
        let mut dist_t = f64::INFINITY;
        let mut last_right = usize::MAX;
        while let Some(HeapItem { dist, node }) = heap.pop() {
            match node {
                Node::Sink => break,
                Node::Left(u) => {
                    if dist > dist_l[u] {
                        continue;
                    }
                    let matched = match_l[u].map(|(v, _)| v);
                    for &(v, c) in &comp.adj[u] {
                        if matched == Some(v) {
                            continue;
                        }
                        let nd = dist + (c + pot_l[u] - pot_r[v]).max(0.0);
                        if nd < dist_r[v] {
                            dist_r[v] = nd;
                            prev_r[v] = u;
                            heap.push(HeapItem {
                                dist: nd,
                                node: Node::Right(v),
                            });
                        }
                    }
                }
                Node::Right(v) => {
                    if dist > dist_r[v] {
                        continue;
                    }
                    match match_r[v] {
                        None => {
                            let nd = dist + (pot_r[v] - pot_t).max(0.0);
                            if nd < dist_t {
                                dist_t = nd;
                                last_right = v;
                                heap.push(HeapItem {
                                    dist: nd,
                                    node: Node::Sink,
                                });
                            }
                        }
                        Some(u) => {
                            let c = match_l[u].expect("matched pair is symmetric").1;
                            let nd = dist + (-c + pot_r[v] - pot_l[u]).max(0.0);
                            if nd < dist_l[u] {
                                dist_l[u] = nd;
                                heap.push(HeapItem {
                                    dist: nd,
                                    node: Node::Left(u),
                                });
                            }
                        }
                    }
                }
            }
        }
        if !dist_t.is_finite() {
            break;
        }
        for (p, d) in pot_l.iter_mut().zip(&dist_l) {
            *p += d.min(dist_t);
        }
        for (p, d) in pot_r.iter_mut().zip(&dist_r) {
            *p += d.min(dist_t);
        }
        pot_t += dist_t;

        let mut v = last_right;
        loop {
            let u = prev_r[v];
            let cost = comp.adj[u]
                .iter()
                .find(|(w, _)| *w == v)
                .map(|&(_, c)| c)
                .expect("path edge exists");
            let previous = match_l[u].replace((v, cost));
            match_r[v] = Some(u);
            match previous {
                None => break,
                Some((old_v, _)) => v = old_v,
            }
        }
    }

    for (u, m) in match_l.iter().enumerate() {
        if let Some((v, c)) = m {
            match_pred[comp.left[u]] = Some((comp.right[*v], *c));
        }
    }
}

/// Precision and recall of a matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
}

impl PrecisionRecall {
    /// Counts-based metrics with the zero-denominator guards
    /// P := 1 when `n_pred == 0` and R := 1 when `n_gt == 0`.
    pub fn from_counts(n_matched: usize, n_pred: usize, n_gt: usize) -> Result<Self> {
        if n_matched > n_pred || n_matched > n_gt {
            return Err(Error::InvalidArgument(format!(
                "{n_matched} matches with {n_pred} predicted and {n_gt} ground-truth pixels"
            )));
        }
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        Ok(Self {
            precision: ratio(n_matched, n_pred),
            recall: ratio(n_matched, n_gt),
        })
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision, self.recall)
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn pr_from_match(r: &MatchResult, n_pred: usize, n_gt: usize) -> Result<PrecisionRecall> {
    if r.pairs.len() + r.unmatched_pred.len() != n_pred || r.pairs.len() + r.unmatched_gt.len() != n_gt {
        return Err(Error::InvalidArgument(format!(
            "counts ({n_pred}, {n_gt}) disagree with the match result"
        )));
    }
    PrecisionRecall::from_counts(r.pairs.len(), n_pred, n_gt)
}
