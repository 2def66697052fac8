//! Spatial primitives: Euclidean distances, k-nearest-neighbor queries,
//! minimum-spanning-tree scale, and k-means anchor points.
//!
//! Coordinates are planar (already projected), in kilometres.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A projected (x, y) location in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// One row of a k-nearest-neighbor query: indices into the point set and the
/// matching distances, sorted ascending (ties broken by lower index).
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborRow {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

/// Euclidean distance between two points.
pub fn pairwise_distance(a: Point, b: Point) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    Ok(((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt())
}

fn dist2(a: Point, b: Point) -> f64 {
    (a.x - b.x).powi(2) + (a.y - b.y).powi(2)
}

// ---------------------------------------------------------------------------
// kd-tree

const BRUTE_FORCE_CUTOFF: usize = 64;

#[derive(Debug, Clone)]
enum KdNode {
    Leaf {
        // indices into the original point set
        items: Vec<usize>,
    },
    Split {
        axis: u8,
        value: f64,
        left: Box<KdNode>,
        right: Box<KdNode>,
    },
}

/// Static kd-tree over a fixed point set. Queries fall back to a linear scan
/// when the point set is small.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point>,
    root: Option<KdNode>,
}

const LEAF_SIZE: usize = 16;

impl KdTree {
    pub fn build(points: &[Point]) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        let root = if points.len() >= BRUTE_FORCE_CUTOFF {
            let mut idx: Vec<usize> = (0..points.len()).collect();
            Some(Self::build_node(points, &mut idx, 0))
        } else {
            None
        };
        Ok(KdTree {
            points: points.to_vec(),
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn build_node(points: &[Point], idx: &mut [usize], depth: usize) -> KdNode {
        if idx.len() <= LEAF_SIZE {
            return KdNode::Leaf {
                items: idx.to_vec(),
            };
        }
        let axis = (depth % 2) as u8;
        let key = |i: usize| -> f64 {
            let p = points[i];
            if axis == 0 {
                p.x
            } else {
                p.y
            }
        };
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            key(a).partial_cmp(&key(b)).unwrap().then(a.cmp(&b))
        });
        let value = key(idx[mid]);
        let (lo, hi) = idx.split_at_mut(mid);
        KdNode::Split {
            axis,
            value,
            left: Box::new(Self::build_node(points, lo, depth + 1)),
            right: Box::new(Self::build_node(points, hi, depth + 1)),
        }
    }

    /// k nearest neighbors of `query` among the indexed points.
    ///
    /// Ties in distance are broken by the lower point index. With
    /// `exclude_self` set, points at distance exactly zero are skipped.
    pub fn knn(&self, query: Point, k: usize, exclude_self: bool) -> Result<NeighborRow> {
        if !query.is_finite() {
            return Err(Error::InvalidInput("non-finite query".into()));
        }
        if self.points.is_empty() {
            return Err(Error::InvalidInput("empty point set".into()));
        }
        let eligible = if exclude_self {
            self.points.iter().filter(|p| dist2(**p, query) > 0.0).count()
        } else {
            self.points.len()
        };
        if k == 0 || k > eligible {
            return Err(Error::Capacity(format!(
                "k = {k} exceeds eligible point count {eligible}"
            )));
        }

        let mut heap = BestK::new(k);
        match &self.root {
            None => {
                for (i, p) in self.points.iter().enumerate() {
                    let d2 = dist2(*p, query);
                    if exclude_self && d2 == 0.0 {
                        continue;
                    }
                    heap.push(d2, i);
                }
            }
            Some(root) => self.search(root, query, exclude_self, &mut heap),
        }
        let (indices, d2s): (Vec<usize>, Vec<f64>) = heap.into_sorted().into_iter().unzip();
        Ok(NeighborRow {
            indices,
            distances: d2s.into_iter().map(f64::sqrt).collect(),
        })
    }

    fn search(&self, node: &KdNode, query: Point, exclude_self: bool, heap: &mut BestK) {
        match node {
            KdNode::Leaf { items } => {
                for &i in items {
                    let d2 = dist2(self.points[i], query);
                    if exclude_self && d2 == 0.0 {
                        continue;
                    }
                    heap.push(d2, i);
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let q = if *axis == 0 { query.x } else { query.y };
                let (near, far) = if q < *value {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, exclude_self, heap);
                let plane_d2 = (q - value).powi(2);
                if !heap.is_full() || plane_d2 <= heap.worst() {
                    self.search(far, query, exclude_self, heap);
                }
            }
        }
    }
}

/// Bounded max-heap keeping the k closest (d2, index) pairs with the
/// deterministic tie rule: smaller distance first, then smaller index.
struct BestK {
    k: usize,
    // kept sorted descending by (d2, index); last element is the best
    items: Vec<(f64, usize)>,
}

impl BestK {
    fn new(k: usize) -> Self {
        BestK {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn is_full(&self) -> bool {
        self.items.len() == self.k
    }

    fn worst(&self) -> f64 {
        self.items.first().map(|&(d, _)| d).unwrap_or(f64::INFINITY)
    }

    fn push(&mut self, d2: f64, index: usize) {
        let entry = (d2, index);
        if self.is_full() {
            let worst = self.items[0];
            if (d2, index) >= (worst.0, worst.1) {
                return;
            }
            self.items.remove(0);
        }
        let pos = self
            .items
            .partition_point(|&(d, i)| (d, i) > (entry.0, entry.1));
        self.items.insert(pos, entry);
    }

    fn into_sorted(mut self) -> Vec<(usize, f64)> {
        self.items.reverse();
        self.items.into_iter().map(|(d, i)| (i, d)).collect()
    }
}

/// Convenience wrapper: one kNN query without keeping the tree around.
pub fn knn(points: &[Point], query: Point, k: usize, exclude_self: bool) -> Result<NeighborRow> {
    KdTree::build(points)?.knn(query, k, exclude_self)
}

// ---------------------------------------------------------------------------
// Minimum spanning tree

/// Maximum edge length of a Euclidean minimum spanning tree over the points
/// (the kernel scale `q` of the Moran eigenvector construction).
///
/// Dense Prim for n <= 10^4; above that, Kruskal on a k-NN candidate graph
/// with k doubled until the graph is connected.
pub fn mst_max_edge(points: &[Point]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(
            "mst_max_edge needs at least 2 points".into(),
        ));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    if points.len() <= 10_000 {
        return Ok(mst_max_edge_prim(points));
    }
    let mut k = 16usize;
    loop {
        if let Some(max) = mst_max_edge_knn(points, k.min(points.len() - 1))? {
            return Ok(max);
        }
        k *= 2;
    }
}

fn mst_max_edge_prim(points: &[Point]) -> f64 {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut max_edge2: f64 = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut ud = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < ud {
                ud = best[v];
                u = v;
            }
        }
        in_tree[u] = true;
        max_edge2 = max_edge2.max(ud);
        for v in 0..n {
            if !in_tree[v] {
                let d2 = dist2(points[u], points[v]);
                if d2 < best[v] {
                    best[v] = d2;
                }
            }
        }
    }
    max_edge2.sqrt()
}

/// Kruskal over k-NN candidate edges. Returns None when the candidate graph
/// does not connect all points.
fn mst_max_edge_knn(points: &[Point], k: usize) -> Result<Option<f64>> {
    let tree = KdTree::build(points)?;
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(points.len() * k);
    for (i, p) in points.iter().enumerate() {
        let row = tree.knn(*p, (k + 1).min(points.len()), false)?;
        for (&j, &d) in row.indices.iter().zip(&row.distances) {
            if j != i {
                edges.push((d, i.min(j), i.max(j)));
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2 && a.0 == b.0);

    let mut uf = UnionFind::new(points.len());
    let mut joined = 1usize;
    let mut max_edge: f64 = 0.0;
    for (d, a, b) in edges {
        if uf.union(a, b) {
            joined += 1;
            max_edge = max_edge.max(d);
            if joined == points.len() {
                return Ok(Some(max_edge));
            }
        }
    }
    Ok(None)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

// ---------------------------------------------------------------------------
// k-means anchors

const KMEANS_MAX_ITER: usize = 100;

/// Geometric centers of `h` clusters of the points (k-means++ seeding, Lloyd
/// iterations until the assignment fixpoint or the iteration cap).
/// Deterministic given the seed.
pub fn kmeans_anchors(points: &[Point], h: usize, seed: u64) -> Result<Vec<Point>> {
    kmeans_anchors_with_trace(points, h, seed).map(|(centers, _)| centers)
}

/// Like [`kmeans_anchors`], additionally returning the total within-cluster
/// squared distance after each Lloyd assignment step.
pub fn kmeans_anchors_with_trace(
    points: &[Point],
    h: usize,
    seed: u64,
) -> Result<(Vec<Point>, Vec<f64>)> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    if h == 0 || h > n {
        return Err(Error::Capacity(format!("h = {h} outside [1, {n}]")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = kmeans_pp_seed(points, h, &mut rng);
    let mut assign = vec![usize::MAX; n];
    let mut trace = Vec::new();

    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        let mut ss = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0usize;
            let mut bd = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = dist2(*p, *center);
                if d < bd {
                    bd = d;
                    best = c;
                }
            }
            ss += bd;
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        trace.push(ss);
        if !changed {
            break;
        }
        let mut sums = vec![(0.0f64, 0.0f64, 0usize); h];
        for (i, p) in points.iter().enumerate() {
            let s = &mut sums[assign[i]];
            s.0 += p.x;
            s.1 += p.y;
            s.2 += 1;
        }
        for (c, (sx, sy, cnt)) in sums.into_iter().enumerate() {
            if cnt > 0 {
                centers[c] = Point::new(sx / cnt as f64, sy / cnt as f64);
            }
            // empty cluster: keep the previous center
        }
    }
    Ok((centers, trace))
}

fn kmeans_pp_seed(points: &[Point], h: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let n = points.len();
    let mut centers = Vec::with_capacity(h);
    centers.push(points[rng.gen_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(*p, centers[0])).collect();
    while centers.len() < h {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // all remaining mass at existing centers; pick uniformly
            rng.gen_range(0..n)
        } else {
            let target = rng.gen_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc >= target {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        let c = points[next];
        centers.push(c);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(*p, c));
        }
    }
    centers
}

/// Total within-cluster squared distance for a given set of centers
/// (each point assigned to its nearest center).
pub fn within_cluster_ss(points: &[Point], centers: &[Point]) -> f64 {
    points
        .iter()
        .map(|p| {
            centers
                .iter()
                .map(|c| dist2(*p, *c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}
