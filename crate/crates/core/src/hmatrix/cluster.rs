//! Binary cluster trees over point clouds.

use crate::geometry::{BBox, Point3};

#[derive(Clone, Debug)]
pub struct ClusterNode {
    /// Index range into the permuted ordering.
    pub lo: usize,
    pub hi: usize,
    pub bbox: BBox,
    pub children: Option<[usize; 2]>,
}

impl ClusterNode {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// `perm[k]` is the original index at tree position `k`; `iperm` inverts it.
#[derive(Clone, Debug)]
pub struct ClusterTree {
    pub perm: Vec<usize>,
    pub iperm: Vec<usize>,
    pub nodes: Vec<ClusterNode>,
    pub leaf_size: usize,
}

impl ClusterTree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn node(&self, i: usize) -> &ClusterNode {
        &self.nodes[i]
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &ClusterTree, i: usize) -> usize {
            match t.nodes[i].children {
                None => 1,
                Some([a, b]) => 1 + rec(t, a).max(rec(t, b)),
            }
        }
        rec(self, 0)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    /// Same partition of the same index set.
    pub fn same_as(&self, other: &ClusterTree) -> bool {
        self.perm == other.perm
            && self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| a.lo == b.lo && a.hi == b.hi && a.children == b.children)
    }
}

/// Splits at the median along the longest bounding-box axis until clusters
/// hold at most `leaf_size` points.
pub fn build_cluster_tree(points: &[Point3], leaf_size: usize) -> ClusterTree {
    let boxes: Vec<BBox> = points.iter().map(|p| BBox::from_points([p])).collect();
    build_cluster_tree_with_boxes(points, &boxes, leaf_size)
}

/// As [`build_cluster_tree`], but each point carries a support box that is
/// merged into the cluster boxes used for admissibility.
pub fn build_cluster_tree_with_boxes(points: &[Point3], boxes: &[BBox], leaf_size: usize) -> ClusterTree {
    assert_eq!(points.len(), boxes.len());
    let leaf_size = leaf_size.max(1);
    let mut perm: Vec<usize> = (0..points.len()).collect();
    let mut nodes = Vec::new();
    split(points, boxes, &mut perm, 0, points.len(), leaf_size, &mut nodes);
    let mut iperm = vec![0; perm.len()];
    for (k, &i) in perm.iter().enumerate() {
        iperm[i] = k;
    }
    ClusterTree {
        perm,
        iperm,
        nodes,
        leaf_size,
    }
}

fn split(
    points: &[Point3],
    boxes: &[BBox],
    perm: &mut [usize],
    lo: usize,
    hi: usize,
    leaf: usize,
    nodes: &mut Vec<ClusterNode>,
) -> usize {
    let mut bbox = BBox::empty();
    let mut pbox = BBox::empty();
    for &i in &perm[lo..hi] {
        bbox.merge(&boxes[i]);
        pbox.insert(points[i]);
    }
    let id = nodes.len();
    nodes.push(ClusterNode {
        lo,
        hi,
        bbox,
        children: None,
    });
    if hi - lo <= leaf {
        return id;
    }
    let axis = pbox.longest_axis();
    let mid = lo + (hi - lo) / 2;
    perm[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
        points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
    });
    let a = split(points, boxes, perm, lo, mid, leaf, nodes);
    let b = split(points, boxes, perm, mid, hi, leaf, nodes);
    nodes[id].children = Some([a, b]);
    id
}

/// `min(diam) <= eta * dist`, with a strictly positive distance.
pub fn admissible(a: &BBox, b: &BBox, eta: f64) -> bool {
    let d = a.distance(b);
    d > 0.0 && a.diameter().min(b.diameter()) <= eta * d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_partitions_points() {
        let pts: Vec<Point3> = (0..1000)
            .map(|i| {
                let t = i as f64 * 0.37;
                [t.sin(), t.cos(), (i % 7) as f64]
            })
            .collect();
        let t = build_cluster_tree(&pts, 32);
        let mut seen = t.perm.clone();
        seen.sort();
        assert_eq!(seen, (0..1000).collect::<Vec<_>>());
        for n in &t.nodes {
            if let Some([a, b]) = n.children {
                assert_eq!(t.nodes[a].lo, n.lo);
                assert_eq!(t.nodes[a].hi, t.nodes[b].lo);
                assert_eq!(t.nodes[b].hi, n.hi);
            } else {
                assert!(n.len() <= 32 && n.len() > 0);
            }
            for &i in &t.perm[n.lo..n.hi] {
                assert!(n.bbox.contains(pts[i]));
            }
        }
        for (k, &i) in t.perm.iter().enumerate() {
            assert_eq!(t.iperm[i], k);
        }
    }

    #[test]
    fn admissibility() {
        let a = BBox::from_points(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let b = BBox::from_points(&[[3.0, 0.0, 0.0], [4.0, 0.0, 0.0]]);
        assert!(admissible(&a, &b, 1.0));
        assert!(!admissible(&a, &b, 0.4));
        assert!(!admissible(&a, &a, 10.0));
    }
}
