//! Point-cloud containers, nearest-neighbor queries, normal estimation and
//! sampling.

mod kdtree;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use kdtree::KdTree;

pub type Vec3 = Vector3<f64>;

/// Tolerance on `|n| - 1` for stored normals.
pub const UNIT_TOLERANCE: f64 = 1e-9;

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One point cloud: positions plus optional per-point unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    positions: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
    frame_index: usize,
}

impl Frame {
    pub fn new(positions: Vec<Vec3>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyFrame);
        }
        if let Some(i) = positions.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid(format!("position {i} is not finite")));
        }
        Ok(Frame {
            positions,
            normals: None,
            frame_index: 0,
        })
    }

    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self> {
        if normals.len() != self.positions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.positions.len(),
                actual: normals.len(),
            });
        }
        if let Some(i) = normals
            .iter()
            .position(|n| !((n.norm() - 1.0).abs() <= UNIT_TOLERANCE))
        {
            return Err(Error::invalid(format!("normal {i} is not unit length")));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_frame_index(mut self, frame_index: usize) -> Self {
        self.frame_index = frame_index;
        self
    }

    pub fn without_normals(mut self) -> Self {
        self.normals = None;
        self
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Length of the axis-aligned bounding box diagonal.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            min = min.inf(p);
            max = max.sup(p);
        }
        (max - min).norm()
    }
}

/// An ordered list of frames with strictly increasing frame indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    frames: Vec<Frame>,
    pub name: String,
    pub units: String,
}

impl Sequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        if frames
            .windows(2)
            .any(|w| w[0].frame_index() >= w[1].frame_index())
        {
            return Err(Error::invalid("frame indices must be strictly increasing"));
        }
        Ok(Sequence {
            frames,
            name: String::new(),
            units: String::new(),
        })
    }

    /// Builds a sequence, renumbering frames `0..n` in the given order.
    pub fn from_frames(frames: Vec<Frame>) -> Self {
        let frames = frames
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.with_frame_index(i))
            .collect();
        Sequence {
            frames,
            name: String::new(),
            units: String::new(),
        }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Spatial index over a set of positions answering k-NN and radius queries.
///
/// Results are ordered by ascending distance with ties broken by ascending
/// point index.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    tree: KdTree,
}

impl NeighborIndex {
    pub fn new(points: &[Vec3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyFrame);
        }
        Ok(NeighborIndex {
            tree: KdTree::new(points),
        })
    }

    pub fn len(&self) -> usize {
        self.tree.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.points().is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        self.tree.points()
    }

    /// The `k` nearest indexed points to `query`. When `exclude` names an
    /// index, that point is skipped.
    pub fn knn(&self, query: &Vec3, k: usize, exclude: Option<usize>) -> Result<Vec<usize>> {
        Ok(self
            .knn_with_distances(query, k, exclude)?
            .into_iter()
            .map(|(_, i)| i)
            .collect())
    }

    /// Like [`knn`](Self::knn) but also returns squared distances.
    pub fn knn_with_distances(
        &self,
        query: &Vec3,
        k: usize,
        exclude: Option<usize>,
    ) -> Result<Vec<(f64, usize)>> {
        let available = self.len() - usize::from(exclude.is_some_and(|e| e < self.len()));
        if k > available {
            return Err(Error::KTooLarge { k, available });
        }
        Ok(self.tree.knn(query, k, exclude))
    }

    /// The `k` nearest neighbors of indexed point `i`, excluding itself.
    pub fn knn_of(&self, i: usize, k: usize) -> Result<Vec<usize>> {
        self.knn(&self.points()[i], k, Some(i))
    }

    /// Nearest other point to indexed point `i`; `None` for a singleton index.
    pub fn nearest_other(&self, i: usize) -> Option<(f64, usize)> {
        self.tree
            .knn(&self.points()[i], 1, Some(i))
            .into_iter()
            .next()
            .map(|(d2, j)| (d2.sqrt(), j))
    }

    /// Points strictly closer than `radius` to `query`.
    pub fn within_radius(&self, query: &Vec3, radius: f64, exclude: Option<usize>) -> Vec<usize> {
        self.tree
            .within(query, radius * radius, exclude)
            .into_iter()
            .map(|(_, i)| i)
            .collect()
    }
}

pub fn build_neighbor_index(frame: &Frame) -> Result<NeighborIndex> {
    NeighborIndex::new(frame.positions())
}

/// Mean distance from each point to its nearest other point.
pub fn mean_nn_distance(index: &NeighborIndex) -> Result<f64> {
    let n = index.len();
    if n < 2 {
        return Err(Error::NeedTwoPoints);
    }
    let sum: f64 = (0..n)
        .map(|i| index.nearest_other(i).map_or(0.0, |(d, _)| d))
        .sum();
    Ok(sum / n as f64)
}

/// Output of [`estimate_normals`].
#[derive(Debug, Clone)]
pub struct NormalEstimate {
    pub frame: Frame,
    /// Points whose neighborhood was rank-deficient and fell back to +z.
    pub degenerate: usize,
}

/// Per-point normals from local plane fits over `k_plane` neighbors, oriented
/// with [`orient_normals`].
pub fn estimate_normals(frame: &Frame, k_plane: usize) -> Result<NormalEstimate> {
    let index = build_neighbor_index(frame)?;
    estimate_normals_with_index(frame, &index, k_plane)
}

pub fn estimate_normals_with_index(
    frame: &Frame,
    index: &NeighborIndex,
    k_plane: usize,
) -> Result<NormalEstimate> {
    let n = frame.len();
    if k_plane < 3 {
        return Err(Error::invalid(format!("k_plane must be at least 3, got {k_plane}")));
    }
    if n <= k_plane {
        return Err(Error::KTooLarge {
            k: k_plane,
            available: n.saturating_sub(1),
        });
    }
    let positions = frame.positions();
    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| index.knn_of(i, k_plane))
        .collect::<Result<_>>()?;

    let fitted: Vec<Option<Vec3>> = neighborhoods
        .par_iter()
        .enumerate()
        .map(|(i, nbrs)| plane_normal(positions, i, nbrs))
        .collect();
    let degenerate = fitted.iter().filter(|n| n.is_none()).count();
    if degenerate > 0 {
        log::warn!("{degenerate} degenerate neighborhoods; using +z normal");
    }
    let raw: Vec<Vec3> = fitted
        .into_iter()
        .map(|n| n.unwrap_or_else(Vec3::z))
        .collect();
    let oriented = orient_with_neighborhoods(&raw, &neighborhoods);
    let frame = frame.clone().with_normals(oriented)?;
    Ok(NormalEstimate { frame, degenerate })
}

fn plane_normal(positions: &[Vec3], center: usize, nbrs: &[usize]) -> Option<Vec3> {
    let members = std::iter::once(center).chain(nbrs.iter().copied());
    let count = (nbrs.len() + 1) as f64;
    let mean = members.clone().map(|j| positions[j]).sum::<Vec3>() / count;
    let mut cov = Matrix3::zeros();
    for j in members {
        let d = positions[j] - mean;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let largest = eig.eigenvalues[order[2]];
    let middle = eig.eigenvalues[order[1]];
    if !(largest > 0.0) || middle <= 1e-12 * largest {
        return None;
    }
    let normal = eig.eigenvectors.column(order[0]).into_owned();
    let len = normal.norm();
    (len > 0.0).then(|| normal / len)
}

/// Sign fixed by a lexicographic rule: n_z > 0, else n_y > 0, else n_x >= 0.
fn canonical_sign(n: &Vec3) -> Vec3 {
    let flip = if n.z != 0.0 {
        n.z < 0.0
    } else if n.y != 0.0 {
        n.y < 0.0
    } else {
        n.x < 0.0
    };
    if flip {
        -n
    } else {
        *n
    }
}

fn orient_with_neighborhoods(normals: &[Vec3], neighborhoods: &[Vec<usize>]) -> Vec<Vec3> {
    let canonical: Vec<Vec3> = normals.iter().map(canonical_sign).collect();
    canonical
        .iter()
        .zip(neighborhoods)
        .map(|(n, nbrs)| {
            let consensus = nbrs.iter().fold(*n, |acc, &j| acc + canonical[j]);
            if n.dot(&consensus) < 0.0 {
                -n
            } else {
                *n
            }
        })
        .collect()
}

/// Deterministic normal orientation.
///
/// Every normal is first put in lexicographic canonical sign, then flipped if
/// it disagrees with the sum of canonical normals over itself and its
/// `k_plane` nearest neighbors. The result does not depend on the input signs.
pub fn orient_normals(frame: &Frame, k_plane: usize) -> Result<Frame> {
    let normals = frame
        .normals()
        .ok_or_else(|| Error::invalid("orient_normals requires normals"))?;
    let index = build_neighbor_index(frame)?;
    let k = k_plane.min(frame.len() - 1);
    let neighborhoods: Vec<Vec<usize>> = (0..frame.len())
        .map(|i| index.knn_of(i, k))
        .collect::<Result<_>>()?;
    let oriented = orient_with_neighborhoods(normals, &neighborhoods);
    frame.clone().with_normals(oriented)
}

/// Greedy farthest point sampling.
///
/// The first index is drawn from the seeded generator; each later pick
/// maximizes the distance to the already selected set, ties going to the
/// lowest point index. Returned in selection order.
pub fn farthest_point_sampling(positions: &[Vec3], m: usize, seed: u64) -> Result<Vec<usize>> {
    let n = positions.len();
    if n == 0 {
        return Err(Error::EmptyFrame);
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!("sample count {m} must be in 1..={n}")));
    }
    let first = rng_from_seed(seed).random_range(0..n);
    Ok(farthest_point_sampling_from(positions, m, first))
}

pub(crate) fn farthest_point_sampling_from(positions: &[Vec3], m: usize, first: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(m);
    let mut min_d2 = vec![f64::INFINITY; positions.len()];
    let mut current = first;
    loop {
        chosen.push(current);
        min_d2[current] = f64::NEG_INFINITY;
        if chosen.len() == m {
            break;
        }
        let c = positions[current];
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for (i, (p, d)) in positions.iter().zip(min_d2.iter_mut()).enumerate() {
            if *d == f64::NEG_INFINITY {
                continue;
            }
            let d2 = (p - c).norm_squared();
            if d2 < *d {
                *d = d2;
            }
            if *d > best.0 {
                best = (*d, i);
            }
        }
        current = best.1;
    }
    chosen
}

/// Keeps `ceil(rate * N)` points drawn without replacement, in original order.
pub fn downsample_random(frame: &Frame, rate: f64, seed: u64) -> Result<Frame> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::invalid(format!("rate {rate} must be in (0, 1]")));
    }
    let n = frame.len();
    let keep = ((rate * n as f64).ceil() as usize).clamp(1, n);
    let mut picked = index::sample(&mut rng_from_seed(seed), n, keep).into_vec();
    picked.sort_unstable();
    let positions = picked.iter().map(|&i| frame.positions()[i]).collect();
    let mut out = Frame::new(positions)?.with_frame_index(frame.frame_index());
    if let Some(normals) = frame.normals() {
        out = out.with_normals(picked.iter().map(|&i| normals[i]).collect())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn brute_knn(points: &[Vec3], q: &Vec3, k: usize, exclude: Option<usize>) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != exclude)
            .map(|(i, p)| ((p - q).norm_squared(), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, i)| i).collect()
    }

    fn random_points(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect()
    }

    fn line(xs: &[f64]) -> Vec<Vec3> {
        xs.iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect()
    }

    #[test]
    fn empty_frame_is_rejected() {
        assert!(matches!(Frame::new(vec![]), Err(Error::EmptyFrame)));
        assert!(matches!(NeighborIndex::new(&[]), Err(Error::EmptyFrame)));
    }

    #[test]
    fn singleton_has_no_other_neighbor() {
        let idx = NeighborIndex::new(&[Vec3::zeros()]).unwrap();
        assert!(idx.nearest_other(0).is_none());
        assert!(matches!(idx.knn_of(0, 1), Err(Error::KTooLarge { .. })));
    }

    #[test]
    fn collinear_nearest() {
        let idx = NeighborIndex::new(&line(&[0.0, 1.0, 3.0])).unwrap();
        assert_eq!(idx.knn_of(2, 1).unwrap(), vec![1]);
    }

    #[test]
    fn knn_basic_cases() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ];
        let idx = NeighborIndex::new(&pts).unwrap();
        assert_eq!(idx.knn(&pts[3], 1, None).unwrap(), vec![3]);
        // corners 1 and 2 tie at distance 1; lower index wins
        assert_eq!(idx.knn(&Vec3::zeros(), 2, None).unwrap(), vec![0, 1]);
        assert_eq!(idx.knn(&Vec3::zeros(), 4, None).unwrap(), vec![0, 1, 2, 3]);
        assert!(matches!(
            idx.knn(&Vec3::zeros(), 5, None),
            Err(Error::KTooLarge { k: 5, available: 4 })
        ));
    }

    #[test]
    fn knn_matches_brute_force_on_random_cloud() {
        let pts = random_points(100, 3);
        let idx = NeighborIndex::new(&pts).unwrap();
        for i in 0..pts.len() {
            assert_eq!(idx.knn_of(i, 5).unwrap(), brute_knn(&pts, &pts[i], 5, Some(i)));
        }
    }

    #[test]
    fn knn_ties_on_grid_follow_index_order() {
        let mut pts = Vec::new();
        for x in 0..6 {
            for y in 0..6 {
                for z in 0..3 {
                    pts.push(Vec3::new(x as f64, y as f64, z as f64));
                }
            }
        }
        let idx = NeighborIndex::new(&pts).unwrap();
        for i in 0..pts.len() {
            assert_eq!(idx.knn_of(i, 9).unwrap(), brute_knn(&pts, &pts[i], 9, Some(i)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn queries_match_brute_force(n in 1usize..500, seed in any::<u64>(), k in 1usize..12, r in 0.01f64..0.5) {
            let pts = random_points(n, seed);
            let idx = NeighborIndex::new(&pts).unwrap();
            let q = Vec3::new(0.5, 0.4, 0.6);
            let k = k.min(n);
            prop_assert_eq!(idx.knn(&q, k, None).unwrap(), brute_knn(&pts, &q, k, None));
            let mut brute: Vec<(f64, usize)> = pts.iter().enumerate()
                .map(|(i, p)| ((p - q).norm_squared(), i))
                .filter(|(d2, _)| *d2 < r * r)
                .collect();
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let brute: Vec<usize> = brute.into_iter().map(|(_, i)| i).collect();
            prop_assert_eq!(idx.within_radius(&q, r, None), brute);
        }
    }

    #[test]
    fn mean_nn_distance_cases() {
        let two = NeighborIndex::new(&line(&[0.0, 2.0])).unwrap();
        assert_eq!(mean_nn_distance(&two).unwrap(), 2.0);
        let grid = NeighborIndex::new(&line(&[0.0, 0.5, 1.0, 1.5, 2.0])).unwrap();
        assert!((mean_nn_distance(&grid).unwrap() - 0.5).abs() < 1e-15);
        let one = NeighborIndex::new(&line(&[0.0])).unwrap();
        assert!(matches!(mean_nn_distance(&one), Err(Error::NeedTwoPoints)));

        let pts = random_points(200, 9);
        let idx = NeighborIndex::new(&pts).unwrap();
        let brute: f64 = (0..pts.len())
            .map(|i| {
                pts.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| (q - pts[i]).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / pts.len() as f64;
        assert!((mean_nn_distance(&idx).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn plane_normals_are_vertical() {
        let mut rng = rng_from_seed(1);
        let pts: Vec<Vec3> = (0..300)
            .map(|_| Vec3::new(rng.random(), rng.random(), 0.0))
            .collect();
        let est = estimate_normals(&Frame::new(pts).unwrap(), 10).unwrap();
        assert_eq!(est.degenerate, 0);
        for n in est.frame.normals().unwrap() {
            assert!((n.z.abs() - 1.0).abs() < 1e-9);
            assert!(n.z > 0.0);
        }
    }

    #[test]
    fn sphere_normals_are_radial() {
        let mut rng = rng_from_seed(2);
        let pts: Vec<Vec3> = (0..4000)
            .map(|_| {
                let v = Vec3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                );
                v.normalize() * 2.0
            })
            .collect();
        let est = estimate_normals(&Frame::new(pts.clone()).unwrap(), 12).unwrap();
        for (p, n) in pts.iter().zip(est.frame.normals().unwrap()) {
            let cos = n.dot(&p.normalize()).abs();
            assert!(cos > 5f64.to_radians().cos(), "angle too large at {p:?}");
        }
    }

    #[test]
    fn small_k_plane_is_rejected() {
        let f = Frame::new(random_points(10, 1)).unwrap();
        assert!(estimate_normals(&f, 2).is_err());
        assert!(estimate_normals(&f, 10).is_err());
    }

    #[test]
    fn degenerate_neighborhood_falls_back_to_up() {
        let f = Frame::new(line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
        let est = estimate_normals(&f, 3).unwrap();
        assert_eq!(est.degenerate, 6);
        assert!(est.frame.normals().unwrap().iter().all(|n| *n == Vec3::z()));
    }

    #[test]
    fn orientation_is_idempotent_and_sign_invariant() {
        let mut rng = rng_from_seed(5);
        let pts: Vec<Vec3> = (0..200)
            .map(|_| {
                let (x, y): (f64, f64) = (rng.random(), rng.random());
                Vec3::new(x, y, (3.0 * x).sin() * 0.3)
            })
            .collect();
        let est = estimate_normals(&Frame::new(pts).unwrap(), 8).unwrap();
        let once = orient_normals(&est.frame, 8).unwrap();
        let twice = orient_normals(&once, 8).unwrap();
        assert_eq!(once, twice);

        let flipped: Vec<Vec3> = once
            .normals()
            .unwrap()
            .iter()
            .map(|n| if rng.random::<bool>() { -n } else { *n })
            .collect();
        let flipped = once.clone().with_normals(flipped).unwrap();
        assert_eq!(orient_normals(&flipped, 8).unwrap(), once);
    }

    #[test]
    fn plane_orientation_is_exactly_up() {
        let pts: Vec<Vec3> = (0..25)
            .map(|i| Vec3::new((i % 5) as f64, (i / 5) as f64, 0.0))
            .collect();
        let normals = (0..25)
            .map(|i| if i % 2 == 0 { Vec3::z() } else { -Vec3::z() })
            .collect();
        let f = Frame::new(pts).unwrap().with_normals(normals).unwrap();
        let o = orient_normals(&f, 6).unwrap();
        assert!(o.normals().unwrap().iter().all(|n| *n == Vec3::z()));
    }

    fn greedy_oracle(points: &[Vec3], m: usize, first: usize) -> Vec<usize> {
        let mut chosen = vec![first];
        while chosen.len() < m {
            let mut best = (f64::NEG_INFINITY, 0);
            for i in 0..points.len() {
                if chosen.contains(&i) {
                    continue;
                }
                let d = chosen
                    .iter()
                    .map(|&c| (points[c] - points[i]).norm_squared())
                    .fold(f64::INFINITY, f64::min);
                if d > best.0 {
                    best = (d, i);
                }
            }
            chosen.push(best.1);
        }
        chosen
    }

    #[test]
    fn fps_examples() {
        let pts = line(&[0.0, 1.0, 2.0, 10.0]);
        assert_eq!(farthest_point_sampling_from(&pts, 2, 0), vec![0, 3]);
        let all = farthest_point_sampling(&pts, 4, 7).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        assert!(farthest_point_sampling(&pts, 5, 7).is_err());
        assert_eq!(
            farthest_point_sampling(&pts, 3, 11).unwrap(),
            farthest_point_sampling(&pts, 3, 11).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]
        #[test]
        fn fps_matches_greedy_oracle(n in 1usize..200, seed in any::<u64>(), frac in 0.0f64..1.0) {
            let pts = random_points(n, seed);
            let m = ((frac * n as f64) as usize).clamp(1, n);
            let got = farthest_point_sampling(&pts, m, seed).unwrap();
            prop_assert_eq!(got.clone(), greedy_oracle(&pts, m, got[0]));
        }
    }

    #[test]
    fn downsample_cases() {
        let f = Frame::new(random_points(10, 4)).unwrap();
        assert_eq!(downsample_random(&f, 1.0, 3).unwrap(), f);
        let half = downsample_random(&f, 0.5, 3).unwrap();
        assert_eq!(half.len(), 5);
        assert!(half.positions().iter().all(|p| f.positions().contains(p)));
        assert_eq!(half, downsample_random(&f, 0.5, 3).unwrap());
        assert!(downsample_random(&f, 0.0, 3).is_err());
        assert!(downsample_random(&f, 1.5, 3).is_err());
    }
}
