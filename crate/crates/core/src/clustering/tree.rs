use crate::error::{Error, Result};
use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn dist(&self, o: &Point3) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2) + (self.z - o.z).powi(2)).sqrt()
    }

    pub fn dot(&self, o: &Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoundingBox {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn of<'a>(pts: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut b = Self::new([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
        for p in pts {
            for ax in 0..3 {
                b.min[ax] = b.min[ax].min(p.coord(ax));
                b.max[ax] = b.max[ax].max(p.coord(ax));
            }
        }
        b
    }

    pub fn extent(&self, axis: usize) -> f64 {
        (self.max[axis] - self.min[axis]).max(0.0)
    }

    pub fn longest_axis(&self) -> usize {
        let mut best = 0;
        for ax in 1..3 {
            if self.extent(ax) > self.extent(best) {
                best = ax;
            }
        }
        best
    }

    /// Length of the diagonal.
    pub fn diam(&self) -> f64 {
        (0..3).map(|ax| self.extent(ax).powi(2)).sum::<f64>().sqrt()
    }

    /// Euclidean distance between the boxes; zero if they touch or overlap.
    pub fn dist(&self, o: &BoundingBox) -> f64 {
        (0..3)
            .map(|ax| {
                let gap = (o.min[ax] - self.max[ax]).max(self.min[ax] - o.max[ax]).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub id: usize,
    /// Span into the permuted index array.
    pub range: Range<usize>,
    pub bbox: BoundingBox,
    pub children: Option<[usize; 2]>,
    pub parent: Option<usize>,
    pub level: usize,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.range.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Balanced binary cluster tree. `clusters[0]` is the root; ids follow a
/// depth-first preorder so every subtree occupies a contiguous id range.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    pub clusters: Vec<Cluster>,
    /// `perm[i]` is the original index stored at permuted position `i`.
    pub perm: Vec<usize>,
    pub n_min: usize,
}

impl ClusterTree {
    pub fn root(&self) -> &Cluster {
        &self.clusters[0]
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn get(&self, id: usize) -> &Cluster {
        &self.clusters[id]
    }

    /// Number of levels (a single root leaf has depth 1).
    pub fn depth(&self) -> usize {
        self.clusters.iter().map(|c| c.level).max().map_or(0, |l| l + 1)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(|c| c.is_leaf())
    }

    /// Cluster ids grouped by level, root first.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.depth()];
        for c in &self.clusters {
            out[c.level].push(c.id);
        }
        out
    }

    /// Children of `id`, or `[id]` itself for a leaf.
    pub fn sons(&self, id: usize) -> Vec<usize> {
        match self.clusters[id].children {
            Some(ch) => ch.to_vec(),
            None => vec![id],
        }
    }

    /// Strict ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.clusters[id].parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.clusters[p].parent;
        }
        out
    }

    pub fn is_ancestor_or_self(&self, a: usize, d: usize) -> bool {
        let ra = &self.clusters[a].range;
        let rd = &self.clusters[d].range;
        ra.start <= rd.start && rd.end <= ra.end && self.clusters[a].level <= self.clusters[d].level
    }

    /// Gathers `x` (original order) into cluster order.
    pub fn to_tree_order<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    /// Scatters a vector in cluster order back to original order.
    pub fn to_original_order<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); y.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = y[i];
        }
        out
    }
}

/// Builds the tree by recursive median bisection. A cluster becomes a leaf
/// once it holds at most `n_min` points; the first child receives the
/// larger half when the size is odd.
pub fn build_cluster_tree(points: &[Point3], n_min: usize) -> Result<ClusterTree> {
    if n_min == 0 {
        return Err(Error::InvalidParameter("n_min must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("cannot cluster an empty point set".into()));
    }
    if let Some(p) = points.iter().find(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
        return Err(Error::InvalidParameter(format!("non-finite point {p:?}")));
    }
    let mut perm: Vec<usize> = (0..points.len()).collect();
    let mut clusters = Vec::new();
    split(points, &mut perm, 0..points.len(), None, 0, n_min, &mut clusters);
    Ok(ClusterTree { clusters, perm, n_min })
}

fn split(
    pts: &[Point3],
    perm: &mut [usize],
    range: Range<usize>,
    parent: Option<usize>,
    level: usize,
    n_min: usize,
    out: &mut Vec<Cluster>,
) -> usize {
    let id = out.len();
    let bbox = BoundingBox::of(perm[range.clone()].iter().map(|&i| &pts[i]));
    out.push(Cluster {
        id,
        range: range.clone(),
        bbox,
        children: None,
        parent,
        level,
    });
    if range.len() <= n_min {
        return id;
    }
    let axis = bbox.longest_axis();
    perm[range.clone()].sort_by(|&a, &b| pts[a].coord(axis).total_cmp(&pts[b].coord(axis)).then(a.cmp(&b)));
    let mid = range.start + range.len().div_ceil(2);
    let c1 = split(pts, perm, range.start..mid, Some(id), level + 1, n_min, out);
    let c2 = split(pts, perm, mid..range.end, Some(id), level + 1, n_min, out);
    out[id].children = Some([c1, c2]);
    id
}

/// Strong admissibility on bounding boxes.
pub fn is_admissible(t: &Cluster, s: &Cluster, eta: f64) -> bool {
    let d = t.bbox.dist(&s.bbox);
    d > 0.0 && t.bbox.diam().max(s.bbox.diam()) <= eta * d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<Point3> {
        (0..n).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect()
    }

    #[test]
    fn eight_collinear_points() {
        let t = build_cluster_tree(&line(8), 2).unwrap();
        assert_eq!(t.depth(), 3);
        let leaves: Vec<usize> = t.leaves().map(|c| c.size()).collect();
        assert_eq!(leaves, vec![2, 2, 2, 2]);
    }

    #[test]
    fn small_set_is_single_leaf() {
        let t = build_cluster_tree(&line(5), 8).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.root().is_leaf());
    }

    #[test]
    fn odd_split_sizes() {
        let t = build_cluster_tree(&line(7), 2).unwrap();
        let [a, b] = t.root().children.unwrap();
        assert_eq!((t.get(a).size(), t.get(b).size()), (4, 3));
    }

    #[test]
    fn n_min_zero_rejected() {
        assert!(build_cluster_tree(&line(3), 0).is_err());
        assert!(build_cluster_tree(&[], 3).is_err());
    }

    #[test]
    fn duplicates_are_legal() {
        let pts = vec![Point3::new(1.0, 1.0, 1.0); 9];
        let t = build_cluster_tree(&pts, 2).unwrap();
        assert_eq!(t.leaves().map(|c| c.size()).sum::<usize>(), 9);
    }

    #[test]
    fn separated_unit_cubes() {
        let mk = |b: BoundingBox| Cluster {
            id: 0,
            range: 0..1,
            bbox: b,
            children: None,
            parent: None,
            level: 0,
        };
        let t = mk(BoundingBox::new([0.0; 3], [1.0; 3]));
        let s = mk(BoundingBox::new([3.0, 0.0, 0.0], [4.0, 1.0, 1.0]));
        assert!((t.bbox.dist(&s.bbox) - 2.0).abs() < 1e-15);
        assert!(is_admissible(&t, &s, 1.0));
        assert!(is_admissible(&s, &t, 1.0));
        assert!(!is_admissible(&t, &t, 1.0));
        let touching = mk(BoundingBox::new([1.0, 0.0, 0.0], [2.0, 1.0, 1.0]));
        assert!(!is_admissible(&t, &touching, 1e6));
    }

    #[test]
    fn permutation_round_trip() {
        let pts: Vec<Point3> = (0..13).map(|i| Point3::new(((i * 7) % 13) as f64, 0.0, 0.0)).collect();
        let t = build_cluster_tree(&pts, 3).unwrap();
        let x: Vec<usize> = (0..13).collect();
        assert_eq!(t.to_original_order(&t.to_tree_order(&x)), x);
        // tree order is sorted along the line
        let sorted = t.to_tree_order(&pts);
        assert!(sorted.windows(2).all(|w| w[0].x <= w[1].x));
    }
}
