//! Static k-d tree for nearest-neighbor queries.
//!
//! Ties on distance resolve to the smallest point index so that every query is
//! reproducible and matches a brute-force scan exactly.

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct KdTree<const N: usize> {
    points: Vec<[f64; N]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

impl Neighbor {
    fn better_than(&self, other: &Neighbor) -> bool {
        self.dist_sq < other.dist_sq || (self.dist_sq == other.dist_sq && self.index < other.index)
    }
}

fn dist_sq<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for k in 0..N {
        let d = a[k] - b[k];
        s += d * d;
    }
    s
}

impl<const N: usize> KdTree<N> {
    pub fn new(points: Vec<[f64; N]>) -> Self {
        let mut tree = KdTree {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
        };
        if !tree.points.is_empty() {
            let n = tree.points.len();
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64; N] {
        &self.points[index]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let mid = (start + end) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis]
                .total_cmp(&points[b][axis])
                .then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for axis in 0..N {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.points[i][axis];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best.1 {
                best = (axis, hi - lo);
            }
        }
        best.0
    }

    pub fn nearest(&self, query: &[f64; N]) -> Option<Neighbor> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: f64::INFINITY,
        };
        self.search(0, query, &mut best);
        Some(best)
    }

    fn search(&self, node: usize, query: &[f64; N], best: &mut Neighbor) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor {
                        index: i,
                        dist_sq: dist_sq(&self.points[i], query),
                    };
                    if cand.better_than(best) {
                        *best = cand;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, best);
                // `<=` keeps equal-distance candidates with smaller indices reachable.
                if diff * diff <= best.dist_sq {
                    self.search(far, query, best);
                }
            }
        }
    }

    /// The `k` nearest points, closest first.
    pub fn k_nearest(&self, query: &[f64; N], k: usize) -> Vec<Neighbor> {
        let mut out = Vec::with_capacity(k + 1);
        if !self.points.is_empty() && k > 0 {
            self.search_k(0, query, k, &mut out);
        }
        out
    }

    fn search_k(&self, node: usize, query: &[f64; N], k: usize, out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor {
                        index: i,
                        dist_sq: dist_sq(&self.points[i], query),
                    };
                    if out.len() == k && !cand.better_than(&out[k - 1]) {
                        continue;
                    }
                    let at = out.partition_point(|n| n.better_than(&cand));
                    out.insert(at, cand);
                    out.truncate(k);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search_k(near, query, k, out);
                if out.len() < k || diff * diff <= out[k - 1].dist_sq {
                    self.search_k(far, query, k, out);
                }
            }
        }
    }

    /// All points within `radius` of `query`, sorted by index.
    pub fn within(&self, query: &[f64; N], radius: f64) -> Vec<Neighbor> {
        let mut out = Vec::new();
        if !self.points.is_empty() {
            self.collect(0, query, radius * radius, &mut out);
        }
        out.sort_by_key(|n| n.index);
        out
    }

    fn collect(&self, node: usize, query: &[f64; N], r2: f64, out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = dist_sq(&self.points[i], query);
                    if d <= r2 {
                        out.push(Neighbor { index: i, dist_sq: d });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                if diff <= 0.0 || diff * diff <= r2 {
                    self.collect(left, query, r2, out);
                }
                if diff >= 0.0 || diff * diff <= r2 {
                    self.collect(right, query, r2, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute<const N: usize>(pts: &[[f64; N]], q: &[f64; N]) -> Neighbor {
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: f64::INFINITY,
        };
        for (i, p) in pts.iter().enumerate() {
            let c = Neighbor {
                index: i,
                dist_sq: dist_sq(p, q),
            };
            if c.better_than(&best) {
                best = c;
            }
        }
        best
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 3]> = (0..2000)
            .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-1.0..1.0)])
            .collect();
        let tree = KdTree::new(pts.clone());
        for _ in 0..500 {
            let q = [rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0), rng.random_range(-1.0..1.0)];
            assert_eq!(tree.nearest(&q).unwrap(), brute(&pts, &q));
            let within = tree.within(&q, 0.7);
            let expected: Vec<usize> = (0..pts.len()).filter(|&i| dist_sq(&pts[i], &q) <= 0.49).collect();
            assert_eq!(within.iter().map(|n| n.index).collect::<Vec<_>>(), expected);
            let mut all: Vec<Neighbor> = (0..pts.len())
                .map(|i| Neighbor {
                    index: i,
                    dist_sq: dist_sq(&pts[i], &q),
                })
                .collect();
            all.sort_by(|a, b| a.dist_sq.total_cmp(&b.dist_sq).then(a.index.cmp(&b.index)));
            assert_eq!(tree.k_nearest(&q, 6), all[..6].to_vec());
        }
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let pts = vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]];
        let tree = KdTree::new(pts);
        assert_eq!(tree.nearest(&[0.0, 0.0]).unwrap().index, 0);
        let grid: Vec<[f64; 2]> = (0..400).map(|i| [(i % 20) as f64, (i / 20) as f64]).collect();
        let tree = KdTree::new(grid.clone());
        for i in 0..400 {
            let q = [grid[i][0] + 0.5, grid[i][1]];
            assert_eq!(tree.nearest(&q).unwrap(), brute(&grid, &q));
        }
    }

    #[test]
    fn empty_tree() {
        let tree: KdTree<2> = KdTree::new(vec![]);
        assert!(tree.nearest(&[0.0, 0.0]).is_none());
        assert!(tree.within(&[0.0, 0.0], 1.0).is_empty());
    }
}
