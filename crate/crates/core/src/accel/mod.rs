//! Ray-scene intersection: barycentric ray/triangle solve and a median-split
//! bounding volume hierarchy for nearest-hit queries.

mod bvh;

pub use bvh::{Aabb, Bvh, BvhNode};

use crate::error::{Error, Result};
use crate::scene::{Mesh, Vec3};

/// Self-intersection guard on the hit distance (m).
pub const T_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub dir: Vec3,
    pub t_max: f64,
}

impl Ray {
    /// Normalizes `dir`; fails on a zero or non-finite direction or `t_max <= 0`.
    pub fn new(origin: Vec3, dir: Vec3, t_max: f64) -> Result<Self> {
        let n = dir.norm();
        if !(n > 0.0 && n.is_finite()) || !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::domain("ray needs a finite origin and nonzero direction"));
        }
        if !(t_max > 0.0) {
            return Err(Error::domain("ray t_max must be positive"));
        }
        Ok(Ray {
            origin,
            dir: dir / n,
            t_max,
        })
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

/// Nearest ray/scene contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub facet_id: usize,
    pub t: f64,
    /// Weight of `p1`.
    pub m1: f64,
    /// Weight of `p2`; `p3` gets `1 - m1 - m2`.
    pub m2: f64,
    pub point: Vec3,
    /// `|n . d|`, cosine of the local incidence angle with the normal flipped
    /// to face the ray.
    pub cos_theta: f64,
}

impl HitRecord {
    /// Local incidence angle in radians.
    pub fn theta(&self) -> f64 {
        self.cos_theta.clamp(0.0, 1.0).acos()
    }
}

/// Solves `o + t d = (1-m1-m2) p3 + m1 p1 + m2 p2` in closed form.
///
/// With `h = o - p3`, `h1 = p1 - p3`, `h2 = p2 - p3`, `f1 = d x h2`,
/// `f2 = h x h1`: `(t, m1, m2) = (f2.h2, f1.h, f2.d) / (f1.h1)`.
/// Returns `None` for parallel rays, hits outside the triangle, and hits with
/// `t` outside `(T_EPSILON, t_max]`.
#[inline]
pub fn intersect_triangle(ray: &Ray, p1: &Vec3, p2: &Vec3, p3: &Vec3) -> Option<(f64, f64, f64)> {
    let h = ray.origin - p3;
    let h1 = p1 - p3;
    let h2 = p2 - p3;
    let f1 = ray.dir.cross(&h2);
    let det = f1.dot(&h1);
    if det.abs() <= 1e-14 * h1.norm() * h2.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let m1 = f1.dot(&h) * inv;
    if !(0.0..=1.0).contains(&m1) {
        return None;
    }
    let f2 = h.cross(&h1);
    let m2 = f2.dot(&ray.dir) * inv;
    if m2 < 0.0 || m1 + m2 > 1.0 {
        return None;
    }
    let t = f2.dot(&h2) * inv;
    if t > T_EPSILON && t <= ray.t_max {
        Some((t, m1, m2))
    } else {
        None
    }
}

#[inline]
fn make_hit(mesh: &Mesh, ray: &Ray, facet: usize, t: f64, m1: f64, m2: f64) -> HitRecord {
    HitRecord {
        facet_id: facet,
        t,
        m1,
        m2,
        point: ray.at(t),
        cos_theta: mesh.normals()[facet].dot(&ray.dir).abs().min(1.0),
    }
}

/// Nearest hit by BVH traversal.
pub fn intersect_scene(bvh: &Bvh, mesh: &Mesh, ray: &Ray) -> Option<HitRecord> {
    bvh.nearest(mesh, ray)
        .map(|(facet, t, m1, m2)| make_hit(mesh, ray, facet, t, m1, m2))
}

/// Nearest hit by testing every facet; reference for the BVH.
pub fn intersect_linear(mesh: &Mesh, ray: &Ray) -> Option<HitRecord> {
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for facet in 0..mesh.num_facets() {
        let [p1, p2, p3] = mesh.triangle(facet);
        if let Some((t, m1, m2)) = intersect_triangle(ray, &p1, &p2, &p3) {
            if best.is_none_or(|b| t < b.1) {
                best = Some((facet, t, m1, m2));
            }
        }
    }
    best.map(|(facet, t, m1, m2)| make_hit(mesh, ray, facet, t, m1, m2))
}
