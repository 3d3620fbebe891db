//! Procedural meshes used by the closed-loop experiments, tests and benches.

use super::{Mesh, Vec3};

/// Axis-aligned box, 8 vertices and 12 outward-wound triangles.
pub fn box_mesh(min: Vec3, max: Vec3) -> Mesh {
    let v = |x: bool, y: bool, z: bool| {
        Vec3::new(
            if x { max.x } else { min.x },
            if y { max.y } else { min.y },
            if z { max.z } else { min.z },
        )
    };
    let vertices = vec![
        v(false, false, false),
        v(true, false, false),
        v(true, true, false),
        v(false, true, false),
        v(false, false, true),
        v(true, false, true),
        v(true, true, true),
        v(false, true, true),
    ];
    let quads = [
        [0, 3, 2, 1], // bottom
        [4, 5, 6, 7], // top
        [0, 1, 5, 4], // -y
        [2, 3, 7, 6], // +y
        [1, 2, 6, 5], // +x
        [3, 0, 4, 7], // -x
    ];
    let facets = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    Mesh::new(vertices, facets).expect("box is non-degenerate")
}

/// Horizontal square grid at height `z`, centered on `(cx, cy)`, with `n x n`
/// cells (`(n+1)^2` vertices, row-major, `2n^2` upward-facing triangles).
pub fn grid_plane(cx: f64, cy: f64, z: f64, size: f64, n: usize) -> Mesh {
    assert!(n >= 1 && size > 0.0);
    let step = size / n as f64;
    let x0 = cx - 0.5 * size;
    let y0 = cy - 0.5 * size;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Vec3::new(x0 + i as f64 * step, y0 + j as f64 * step, z));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut facets = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            facets.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            facets.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(vertices, facets).expect("grid is non-degenerate")
}

/// Box walls with a gable roof whose ridge runs along x.
pub fn gable_building(min: Vec3, max: Vec3, ridge_height: f64) -> Mesh {
    let ym = 0.5 * (min.y + max.y);
    let zr = max.z + ridge_height;
    let vertices = vec![
        Vec3::new(min.x, min.y, min.z), // 0
        Vec3::new(max.x, min.y, min.z), // 1
        Vec3::new(max.x, max.y, min.z), // 2
        Vec3::new(min.x, max.y, min.z), // 3
        Vec3::new(min.x, min.y, max.z), // 4
        Vec3::new(max.x, min.y, max.z), // 5
        Vec3::new(max.x, max.y, max.z), // 6
        Vec3::new(min.x, max.y, max.z), // 7
        Vec3::new(min.x, ym, zr),       // 8 ridge
        Vec3::new(max.x, ym, zr),       // 9 ridge
    ];
    let quads: [[usize; 4]; 6] = [
        [0, 3, 2, 1], // floor
        [0, 1, 5, 4], // -y wall
        [2, 3, 7, 6], // +y wall
        [1, 2, 6, 5], // +x wall
        [3, 0, 4, 7], // -x wall
        [4, 5, 9, 8], // -y roof slope
    ];
    let mut facets: Vec<[usize; 3]> = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    facets.extend([[6, 7, 8], [6, 8, 9], [5, 6, 9], [7, 4, 8]]);
    Mesh::new(vertices, facets).expect("building is non-degenerate")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(grid_plane(0.0, 0.0, 0.0, 10.0, 4).num_facets(), 32);
        assert_eq!(grid_plane(0.0, 0.0, 0.0, 10.0, 4).num_vertices(), 25);
        assert_eq!(gable_building(Vec3::zeros(), Vec3::new(4.0, 3.0, 2.0), 1.0).num_facets(), 16);
    }

    #[test]
    fn box_normals_point_outward() {
        let m = box_mesh(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        for (f, n) in m.facets().iter().zip(m.normals()) {
            let c = (m.vertices()[f[0]] + m.vertices()[f[1]] + m.vertices()[f[2]]) / 3.0;
            assert!(c.dot(n) > 0.0);
        }
    }
}
