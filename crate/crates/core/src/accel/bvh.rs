use super::{intersect_triangle, Ray};
use crate::error::{Error, Result};
use crate::scene::{Mesh, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    fn longest_axis(&self) -> usize {
        let e = self.max - self.min;
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Slab test; returns the entry distance when the ray overlaps the box
    /// within `[0, t_far]`.
    #[inline]
    fn entry(&self, origin: &Vec3, inv_dir: &Vec3, t_far: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_far;
        for i in 0..3 {
            let a = (self.min[i] - origin[i]) * inv_dir[i];
            let b = (self.max[i] - origin[i]) * inv_dir[i];
            // NaN (0 * inf) on an axis-aligned ray lying in a slab plane is
            // treated as "inside" by the min/max ordering below.
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BvhNode {
    Leaf { bounds: Aabb, start: usize, count: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl BvhNode {
    pub fn bounds(&self) -> &Aabb {
        match self {
            BvhNode::Leaf { bounds, .. } | BvhNode::Inner { bounds, .. } => bounds,
        }
    }
}

/// Binary BVH over mesh facets. Node 0 is the root; leaves reference ranges
/// of [`Bvh::order`].
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<usize>,
}

impl Bvh {
    /// Median split on the longest axis of the centroid bounds, leaves of at
    /// most four facets. Deterministic for a given mesh.
    pub fn build(mesh: &Mesh) -> Result<Bvh> {
        if mesh.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let boxes: Vec<Aabb> = (0..mesh.num_facets())
            .map(|f| {
                let mut b = Aabb::empty();
                for p in mesh.triangle(f) {
                    b.grow(&p);
                }
                b
            })
            .collect();
        let centroids: Vec<Vec3> = boxes.iter().map(|b| (b.min + b.max) * 0.5).collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * mesh.num_facets() / LEAF_SIZE + 1),
            order: (0..mesh.num_facets()).collect(),
        };
        bvh.build_node(&boxes, &centroids, 0, mesh.num_facets());
        Ok(bvh)
    }

    fn build_node(&mut self, boxes: &[Aabb], centroids: &[Vec3], start: usize, end: usize) -> usize {
        let items = &mut self.order[start..end];
        let bounds = items
            .iter()
            .fold(Aabb::empty(), |acc, &f| acc.union(&boxes[f]));
        let index = self.nodes.len();
        let count = end - start;
        if count <= LEAF_SIZE {
            self.nodes.push(BvhNode::Leaf { bounds, start, count });
            return index;
        }
        let mut cb = Aabb::empty();
        for &f in items.iter() {
            cb.grow(&centroids[f]);
        }
        let axis = cb.longest_axis();
        let mid = count / 2;
        items.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a][axis]
                .total_cmp(&centroids[b][axis])
                .then(a.cmp(&b))
        });
        // placeholder, patched once the children exist
        self.nodes.push(BvhNode::Leaf { bounds, start, count: 0 });
        let left = self.build_node(boxes, centroids, start, start + mid);
        let right = self.build_node(boxes, centroids, start + mid, end);
        self.nodes[index] = BvhNode::Inner { bounds, left, right };
        index
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    /// Facet permutation referenced by leaf ranges.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn bounds(&self) -> &Aabb {
        self.nodes[0].bounds()
    }

    /// `(facet, t, m1, m2)` of the nearest hit.
    pub fn nearest(&self, mesh: &Mesh, ray: &Ray) -> Option<(usize, f64, f64, f64)> {
        let inv_dir = ray.dir.map(|d| 1.0 / d);
        let mut best: Option<(usize, f64, f64, f64)> = None;
        let mut t_best = ray.t_max;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        if self.nodes[0].bounds().entry(&ray.origin, &inv_dir, t_best).is_some() {
            stack.push(0);
        }
        while let Some(ni) = stack.pop() {
            match self.nodes[ni] {
                BvhNode::Leaf { start, count, .. } => {
                    for &facet in &self.order[start..start + count] {
                        let [p1, p2, p3] = mesh.triangle(facet);
                        if let Some((t, m1, m2)) = intersect_triangle(ray, &p1, &p2, &p3) {
                            let better = match best {
                                None => true,
                                Some((bf, bt, ..)) => t < bt || (t == bt && facet < bf),
                            };
                            if better {
                                best = Some((facet, t, m1, m2));
                                t_best = t;
                            }
                        }
                    }
                }
                BvhNode::Inner { left, right, .. } => {
                    let tl = self.nodes[left].bounds().entry(&ray.origin, &inv_dir, t_best);
                    let tr = self.nodes[right].bounds().entry(&ray.origin, &inv_dir, t_best);
                    match (tl, tr) {
                        (Some(a), Some(b)) => {
                            // push the farther child first so the nearer pops first
                            if a <= b {
                                stack.push(right);
                                stack.push(left);
                            } else {
                                stack.push(left);
                                stack.push(right);
                            }
                        }
                        (Some(_), None) => stack.push(left),
                        (None, Some(_)) => stack.push(right),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }
}
