use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{GeometryError, Point3, PointCloud};

const LEAF_SIZE: usize = 16;

/// Static kd-tree over the points of a cloud.
///
/// Queries return exactly what an exhaustive scan would: k-NN results are
/// sorted by ascending `(distance, index)` and equal distances resolve to
/// the lower original index; radius queries are inclusive (`d <= radius`).
#[derive(Debug, Clone)]
pub struct KdTree {
    /// `(point, original index)` permuted into tree order.
    slots: Vec<(Point3, usize)>,
    nodes: Vec<Node>,
    root: usize,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        len: usize,
    },
    Branch {
        left: usize,
        right: usize,
        min: [f64; 3],
        max: [f64; 3],
    },
}

/// Max-heap entry; `Ord` is lexicographic on `(d2, index)` so the heap's
/// top is always the current worst candidate under the tie-break rule.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn dist2(a: &Point3, b: &Point3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

fn bounds(slots: &[(Point3, usize)]) -> ([f64; 3], [f64; 3]) {
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for (p, _) in slots {
        for a in 0..3 {
            min[a] = min[a].min(p.coords[a]);
            max[a] = max[a].max(p.coords[a]);
        }
    }
    (min, max)
}

/// Squared distance from `q` to the axis-aligned box `[min, max]`.
#[inline]
fn box_dist2(q: &Point3, min: &[f64; 3], max: &[f64; 3]) -> f64 {
    let mut d2 = 0.0;
    for a in 0..3 {
        let v = q.coords[a];
        let excess = if v < min[a] {
            min[a] - v
        } else if v > max[a] {
            v - max[a]
        } else {
            0.0
        };
        d2 += excess * excess;
    }
    d2
}

impl KdTree {
    /// Builds the index; errors on an empty cloud.
    pub fn build(cloud: &PointCloud) -> Result<Self, GeometryError> {
        if cloud.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        let mut tree = Self {
            slots: cloud.points().iter().copied().zip(0..).collect(),
            nodes: Vec::new(),
            root: 0,
        };
        tree.root = tree.build_node(0, cloud.len());
        Ok(tree)
    }

    fn build_node(&mut self, start: usize, len: usize) -> usize {
        if len <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, len });
            return self.nodes.len() - 1;
        }
        let (min, max) = bounds(&self.slots[start..start + len]);
        // Split on the axis with the widest extent; ties take the lower axis.
        let axis = (0..3)
            .max_by(|&a, &b| (max[a] - min[a]).total_cmp(&(max[b] - min[b])))
            .unwrap();
        let mid = len / 2;
        // Deterministic order for duplicate coordinates: fall back to the
        // original index.
        self.slots[start..start + len].select_nth_unstable_by(mid, |a, b| {
            a.0.coords[axis]
                .total_cmp(&b.0.coords[axis])
                .then(a.1.cmp(&b.1))
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(start + mid, len - mid);
        self.nodes.push(Node::Branch {
            left,
            right,
            min,
            max,
        });
        self.nodes.len() - 1
    }

    /// The `k` nearest points to `query`, sorted by ascending
    /// `(distance, index)`. Returns `min(k, n)` entries of
    /// `(original_index, distance)`.
    pub fn knn(&self, query: &Point3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        self.knn_visit(self.root, query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort_unstable();
        out.into_iter().map(|c| (c.index, c.d2.sqrt())).collect()
    }

    fn knn_visit(&self, node: usize, query: &Point3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match &self.nodes[node] {
            Node::Leaf { start, len } => {
                for (p, original) in &self.slots[*start..*start + *len] {
                    let cand = Candidate {
                        d2: dist2(query, p),
                        index: *original,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Branch { left, right, .. } => {
                let d_left = self.node_box_dist2(*left, query);
                let d_right = self.node_box_dist2(*right, query);
                let (first, d_first, second, d_second) = if d_left <= d_right {
                    (*left, d_left, *right, d_right)
                } else {
                    (*right, d_right, *left, d_left)
                };
                // Prune only on strictly greater distance: a subtree at
                // exactly the current worst distance may hold a lower index.
                if heap.len() < k || d_first <= heap.peek().unwrap().d2 {
                    self.knn_visit(first, query, k, heap);
                }
                if heap.len() < k || d_second <= heap.peek().unwrap().d2 {
                    self.knn_visit(second, query, k, heap);
                }
            }
        }
    }

    fn node_box_dist2(&self, node: usize, query: &Point3) -> f64 {
        match &self.nodes[node] {
            Node::Leaf { .. } => 0.0, // always visit small leaves
            Node::Branch { min, max, .. } => box_dist2(query, min, max),
        }
    }

    /// All points with `distance <= radius`, sorted by ascending
    /// `(distance, index)`.
    pub fn within_radius(&self, query: &Point3, radius: f64) -> Vec<(usize, f64)> {
        assert!(radius.is_finite(), "radius must be finite");
        if radius < 0.0 {
            return Vec::new();
        }
        let r2 = radius * radius;
        let mut out = Vec::new();
        self.radius_visit(self.root, query, r2, &mut out);
        out.sort_unstable();
        out.into_iter().map(|c| (c.index, c.d2.sqrt())).collect()
    }

    fn radius_visit(&self, node: usize, query: &Point3, r2: f64, out: &mut Vec<Candidate>) {
        match &self.nodes[node] {
            Node::Leaf { start, len } => {
                for (p, original) in &self.slots[*start..*start + *len] {
                    let d2 = dist2(query, p);
                    if d2 <= r2 {
                        out.push(Candidate {
                            d2,
                            index: *original,
                        });
                    }
                }
            }
            Node::Branch { left, right, .. } => {
                if self.node_box_dist2(*left, query) <= r2 {
                    self.radius_visit(*left, query, r2, out);
                }
                if self.node_box_dist2(*right, query) <= r2 {
                    self.radius_visit(*right, query, r2, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: sort every point by `(distance, index)`.
    fn scan(points: &[Point3], query: &Point3) -> Vec<(usize, f64)> {
        let mut all: Vec<Candidate> = points
            .iter()
            .enumerate()
            .map(|(i, p)| Candidate {
                d2: dist2(query, p),
                index: i,
            })
            .collect();
        all.sort_unstable();
        all.into_iter().map(|c| (c.index, c.d2.sqrt())).collect()
    }

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
        let pts = (0..n)
            .map(|_| {
                Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn knn_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 5, 17, 200, 1000] {
            let cloud = random_cloud(&mut rng, n);
            let tree = KdTree::build(&cloud).unwrap();
            for _ in 0..20 {
                let q = Point3::new(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                );
                for k in [1, 3, n, n + 4] {
                    let expect: Vec<_> = scan(cloud.points(), &q).into_iter().take(k).collect();
                    assert_eq!(tree.knn(&q, k), expect, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn radius_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cloud = random_cloud(&mut rng, 500);
        let tree = KdTree::build(&cloud).unwrap();
        for _ in 0..50 {
            let q = Point3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let r = rng.random_range(0.0..1.0);
            let expect: Vec<_> = scan(cloud.points(), &q)
                .into_iter()
                .filter(|(_, d)| *d <= r)
                .collect();
            assert_eq!(tree.within_radius(&q, r), expect);
        }
    }

    #[test]
    fn duplicate_points_tie_break_to_lower_index() {
        let p = Point3::new(0.5, 0.5, 0.5);
        let pts = vec![p, Point3::new(2.0, 0.0, 0.0), p, p];
        let cloud = PointCloud::new(pts).unwrap();
        let tree = KdTree::build(&cloud).unwrap();
        let hits = tree.knn(&p, 2);
        assert_eq!(hits[0].0, 0);
        assert_eq!(hits[1].0, 2);
        assert_eq!(hits[0].1, 0.0);
    }

    #[test]
    fn radius_boundary_is_inclusive() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.5, 0.0, 0.0),
        ])
        .unwrap();
        let tree = KdTree::build(&cloud).unwrap();
        let hits = tree.within_radius(&Point3::origin(), 1.0);
        assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        let cloud = PointCloud::new(vec![]).unwrap();
        assert_eq!(
            KdTree::build(&cloud).unwrap_err(),
            GeometryError::EmptyCloud
        );
    }

    #[test]
    fn k_larger_than_cloud_returns_all() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cloud = random_cloud(&mut rng, 7);
        let tree = KdTree::build(&cloud).unwrap();
        assert_eq!(tree.knn(&Point3::origin(), 100).len(), 7);
    }
}
