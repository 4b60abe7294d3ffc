//! Static kd-tree over a borrowed-then-copied position list.
//!
//! The tree is stored implicitly: a permutation of point indices where each
//! subrange `[lo, hi)` is split at `mid = (lo + hi) / 2`, with the split axis
//! recorded at `axes[mid]`. All queries order results by `(squared distance,
//! point index)`, so equal-distance neighbors come back in ascending index
//! order and every result is identical to a brute-force scan.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
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
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct KdTree {
    points: Vec<Vec3>,
    perm: Vec<usize>,
    axes: Vec<u8>,
}

impl KdTree {
    pub(crate) fn new(points: &[Vec3]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            perm: (0..points.len()).collect(),
            axes: vec![0; points.len()],
        };
        let n = tree.perm.len();
        tree.build(0, n);
        tree
    }

    pub(crate) fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF_SIZE {
            return;
        }
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for &i in &self.perm[lo..hi] {
            min = min.inf(&self.points[i]);
            max = max.sup(&self.points[i]);
        }
        let axis = (max - min).imax();
        let mid = (lo + hi) / 2;
        let points = &self.points;
        self.perm[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            points[a][axis]
                .total_cmp(&points[b][axis])
                .then(a.cmp(&b))
        });
        self.axes[mid] = axis as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    /// The `k` nearest points to `query`, skipping `exclude`, sorted by
    /// ascending `(dist2, index)`. Caller guarantees enough points exist.
    pub(crate) fn knn(&self, query: &Vec3, k: usize, exclude: Option<usize>) -> Vec<(f64, usize)> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, self.perm.len(), query, k, exclude, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.dist2, c.index)).collect()
    }

    fn offer(
        &self,
        index: usize,
        query: &Vec3,
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if Some(index) == exclude {
            return;
        }
        let cand = Candidate {
            dist2: (self.points[index] - query).norm_squared(),
            index,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if let Some(worst) = heap.peek() {
            if cand < *worst {
                heap.pop();
                heap.push(cand);
            }
        }
    }

    fn knn_rec(
        &self,
        lo: usize,
        hi: usize,
        query: &Vec3,
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if hi - lo <= LEAF_SIZE {
            for &i in &self.perm[lo..hi] {
                self.offer(i, query, k, exclude, heap);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = self.axes[mid] as usize;
        let pivot = self.perm[mid];
        let diff = query[axis] - self.points[pivot][axis];
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.knn_rec(near.0, near.1, query, k, exclude, heap);
        self.offer(pivot, query, k, exclude, heap);
        // Equal distances must still be visited so the index tie-break holds.
        let must_visit = heap.len() < k || heap.peek().is_some_and(|w| diff * diff <= w.dist2);
        if must_visit {
            self.knn_rec(far.0, far.1, query, k, exclude, heap);
        }
    }

    /// All points strictly closer than `sqrt(radius2)`, sorted by `(dist2, index)`.
    pub(crate) fn within(&self, query: &Vec3, radius2: f64, exclude: Option<usize>) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        self.within_rec(0, self.perm.len(), query, radius2, exclude, &mut out);
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    fn within_rec(
        &self,
        lo: usize,
        hi: usize,
        query: &Vec3,
        radius2: f64,
        exclude: Option<usize>,
        out: &mut Vec<(f64, usize)>,
    ) {
        let mut test = |i: usize| {
            if Some(i) != exclude {
                let d2 = (self.points[i] - query).norm_squared();
                if d2 < radius2 {
                    out.push((d2, i));
                }
            }
        };
        if hi - lo <= LEAF_SIZE {
            for &i in &self.perm[lo..hi] {
                test(i);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = self.axes[mid] as usize;
        let pivot = self.perm[mid];
        test(pivot);
        let diff = query[axis] - self.points[pivot][axis];
        if diff <= 0.0 || diff * diff < radius2 {
            self.within_rec(lo, mid, query, radius2, exclude, out);
        }
        if diff >= 0.0 || diff * diff < radius2 {
            self.within_rec(mid + 1, hi, query, radius2, exclude, out);
        }
    }
}
