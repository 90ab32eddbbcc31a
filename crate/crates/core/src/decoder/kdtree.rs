//! Exact k-nearest-neighbor index under squared Euclidean distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::network::sq_dist;
use crate::model::EmbeddingVector;

pub const DEFAULT_LEAF_SIZE: usize = 16;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static k-d tree over row-major points. Point `i` keeps index `i`.
#[derive(Clone, Debug)]
pub struct KdTree {
    m: usize,
    points: Vec<f64>,
    /// Point indices, permuted so each leaf owns a contiguous range.
    order: Vec<usize>,
    nodes: Vec<Node>,
    leaf_size: usize,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.index.cmp(&other.index))
    }
}

impl KdTree {
    pub fn build(embeddings: &[EmbeddingVector]) -> Result<Self> {
        let m = embeddings.first().ok_or(Error::EmptyInput)?.dim();
        let mut flat = Vec::with_capacity(embeddings.len() * m);
        for e in embeddings {
            if e.dim() != m {
                return Err(Error::DimensionMismatch { expected: m, found: e.dim() });
            }
            flat.extend_from_slice(e.as_slice());
        }
        Self::from_flat(flat, m, DEFAULT_LEAF_SIZE)
    }

    /// Builds from a row-major `rows x m` matrix.
    pub fn from_flat(points: Vec<f64>, m: usize, leaf_size: usize) -> Result<Self> {
        if m == 0 || points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !points.len().is_multiple_of(m) {
            return Err(Error::DimensionMismatch { expected: m, found: points.len() % m });
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite point coordinate".into()));
        }
        let len = points.len() / m;
        let mut tree = Self { m, points, order: (0..len).collect(), nodes: Vec::new(), leaf_size: leaf_size.max(1) };
        tree.build_node(0, len);
        Ok(tree)
    }

    fn coord(&self, i: usize, axis: usize) -> f64 {
        self.points[i * self.m + axis]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= self.leaf_size {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut best_axis = 0;
        let mut best_spread = -1.0;
        for axis in 0..self.m {
            let (lo, hi) = self.order[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let c = self.coord(i, axis);
                (lo.min(c), hi.max(c))
            });
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_axis = axis;
            }
        }
        if best_spread <= 0.0 {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let (points, m) = (&self.points, self.m);
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * m + best_axis].total_cmp(&points[b * m + best_axis])
        });
        let value = self.coord(self.order[mid], best_axis);
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split { axis: best_axis, value, left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index * self.m..(index + 1) * self.m]
    }

    /// The `k` nearest points as `(index, squared distance)`, ascending, ties
    /// broken by index.
    pub fn query_knn(&self, v: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        if v.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: v.len() });
        }
        if k == 0 || k > self.len() {
            return Err(Error::KOutOfRange { k, size: self.len() });
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        let mut off = vec![0.0; self.m];
        self.search(0, v, k, 0.0, &mut off, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort_unstable();
        Ok(out.into_iter().map(|c| (c.index, c.dist)).collect())
    }

    fn search(&self, node: usize, v: &[f64], k: usize, rd: f64, off: &mut [f64], heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate { dist: sq_dist(v, self.point(i)), index: i };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = v[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, v, k, rd, off, heap);
                // Lower bound on the distance to anything in the far cell.
                let old = off[axis];
                let far_rd = rd - old * old + diff * diff;
                let worst = if heap.len() < k { f64::INFINITY } else { heap.peek().expect("heap is full").dist };
                // Slack keeps rounding in the incremental bound from pruning ties.
                if far_rd <= worst + 1e-9 * worst.abs() {
                    off[axis] = diff;
                    self.search(far, v, k, far_rd, off, heap);
                    off[axis] = old;
                }
            }
        }
    }
}

/// Reference k-nearest search by scanning every point.
pub fn linear_knn(points: &[f64], m: usize, v: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<Candidate> = points
        .chunks_exact(m)
        .enumerate()
        .map(|(index, p)| Candidate { dist: sq_dist(v, p), index })
        .collect();
    all.sort_unstable();
    all.truncate(k);
    all.into_iter().map(|c| (c.index, c.dist)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_points(rows: usize, m: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..rows * m).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn single_point() {
        let tree = KdTree::build(&[EmbeddingVector(vec![1.0, 2.0])]).unwrap();
        assert_eq!(tree.query_knn(&[5.0, -3.0], 1).unwrap()[0].0, 0);
        assert!(matches!(tree.query_knn(&[0.0, 0.0], 2), Err(Error::KOutOfRange { .. })));
        assert!(matches!(tree.query_knn(&[0.0, 0.0], 0), Err(Error::KOutOfRange { .. })));
        assert!(KdTree::build(&[]).is_err());
    }

    #[test]
    fn matches_linear_scan() {
        for (rows, m, leaf) in [(500, 3, 4), (300, 16, 16), (40, 64, 16)] {
            let pts = random_points(rows, m, rows as u64);
            let tree = KdTree::from_flat(pts.clone(), m, leaf).unwrap();
            let queries = random_points(200, m, 7);
            for q in queries.chunks_exact(m) {
                for k in [1, 5] {
                    assert_eq!(tree.query_knn(q, k).unwrap(), linear_knn(&pts, m, q, k));
                }
            }
            let all = tree.query_knn(&queries[..m], rows).unwrap();
            assert_eq!(all.len(), rows);
            assert!(all.windows(2).all(|w| w[0].1 <= w[1].1));
        }
    }

    #[test]
    fn stored_point_and_ties() {
        // a grid with many equal distances
        let mut pts = Vec::new();
        for x in 0..6 {
            for y in 0..6 {
                pts.extend([x as f64, y as f64]);
            }
        }
        let tree = KdTree::from_flat(pts.clone(), 2, 2).unwrap();
        let hit = tree.query_knn(&[2.0, 3.0], 1).unwrap();
        assert_eq!(hit, vec![(2 * 6 + 3, 0.0)]);
        for q in [[2.5, 2.5], [0.5, 0.0], [3.0, 3.0], [-1.0, 2.5]] {
            for k in 1..=12 {
                assert_eq!(tree.query_knn(&q, k).unwrap(), linear_knn(&pts, 2, &q, k), "{q:?} k={k}");
            }
        }
        let dup = KdTree::from_flat(vec![1.0; 40], 2, 4).unwrap();
        assert_eq!(dup.query_knn(&[0.0, 0.0], 3).unwrap().iter().map(|c| c.0).collect::<Vec<_>>(), [0, 1, 2]);
    }
}
