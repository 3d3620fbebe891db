//! Scene ingestion: triangle meshes, per-vertex scattering parameters, and
//! barycentric interpolation of those parameters at hit points.

mod obj;
mod params;
pub mod shapes;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub use obj::{load_mesh, parse_obj, write_obj};
pub use params::{BsdfParams, Channel, ParamMap};

pub type Vec3 = Vector3<f64>;

/// Tolerance used when checking the barycentric simplex condition.
const SIMPLEX_TOL: f64 = 1e-9;

/// Indexed triangle mesh with precomputed unit facet normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    facets: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
}

impl Mesh {
    /// Builds a mesh, validating indices and rejecting zero-area facets. The
    /// normal of facet `(p1, p2, p3)` is the unit vector along `(p2-p1)x(p3-p1)`.
    pub fn new(vertices: Vec<Vec3>, facets: Vec<[usize; 3]>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinite(format!("vertex {i} has non-finite coordinates")));
            }
        }
        let mut normals = Vec::with_capacity(facets.len());
        for (fi, f) in facets.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::BadFacet {
                    facet: fi,
                    message: format!(
                        "vertex index {bad} out of range ({} vertices)",
                        vertices.len()
                    ),
                });
            }
            let e1 = vertices[f[1]] - vertices[f[0]];
            let e2 = vertices[f[2]] - vertices[f[0]];
            let cross = e1.cross(&e2);
            let norm = cross.norm();
            let scale = e1.norm() * e2.norm();
            if !(norm > 1e-12 * scale) {
                return Err(Error::BadFacet {
                    facet: fi,
                    message: "zero-area facet".into(),
                });
            }
            normals.push(cross / norm);
        }
        Ok(Mesh {
            vertices,
            facets,
            normals,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[[usize; 3]] {
        &self.facets
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    /// The three corner positions `(p1, p2, p3)` of a facet.
    #[inline]
    pub fn triangle(&self, facet: usize) -> [Vec3; 3] {
        let [a, b, c] = self.facets[facet];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Axis-aligned bounds `(min, max)` of all vertices.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (lo.inf(v), hi.sup(v))
        }))
    }

    /// Concatenates `other` after `self`; vertex ids of `other` are shifted by
    /// `self.num_vertices()`.
    pub fn merge(&self, other: &Mesh) -> Mesh {
        let offset = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut facets = self.facets.clone();
        facets.extend(other.facets.iter().map(|f| f.map(|i| i + offset)));
        let mut normals = self.normals.clone();
        normals.extend_from_slice(&other.normals);
        Mesh {
            vertices,
            facets,
            normals,
        }
    }

    pub fn translated(&self, delta: Vec3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|v| v + delta).collect(),
            facets: self.facets.clone(),
            normals: self.normals.clone(),
        }
    }
}

fn check_simplex(m1: f64, m2: f64) -> Result<()> {
    if !(m1 >= -SIMPLEX_TOL && m2 >= -SIMPLEX_TOL && m1 + m2 <= 1.0 + SIMPLEX_TOL) {
        return Err(Error::domain(format!(
            "barycentric weights ({m1}, {m2}) outside the simplex"
        )));
    }
    Ok(())
}

/// Parameters at the point `m1*p1 + m2*p2 + (1-m1-m2)*p3` of `facet`.
pub fn interpolate_params(
    mesh: &Mesh,
    params: &ParamMap,
    facet: usize,
    m1: f64,
    m2: f64,
) -> Result<BsdfParams> {
    check_simplex(m1, m2)?;
    let [a, b, c] = mesh.facets[facet];
    let m3 = 1.0 - m1 - m2;
    let (pa, pb, pc) = (params.get(a), params.get(b), params.get(c));
    Ok(BsdfParams::from_array(std::array::from_fn(|i| {
        m1 * pa.as_array()[i] + m2 * pb.as_array()[i] + m3 * pc.as_array()[i]
    })))
}

/// Transpose of [`interpolate_params`]: distributes a per-field gradient at the
/// hit point onto the facet's three vertices.
pub fn interpolation_adjoint(
    mesh: &Mesh,
    facet: usize,
    m1: f64,
    m2: f64,
    d_params: [f64; 4],
) -> Result<[(usize, [f64; 4]); 3]> {
    check_simplex(m1, m2)?;
    let [a, b, c] = mesh.facets[facet];
    let m3 = 1.0 - m1 - m2;
    Ok([
        (a, d_params.map(|d| m1 * d)),
        (b, d_params.map(|d| m2 * d)),
        (c, d_params.map(|d| m3 * d)),
    ])
}
