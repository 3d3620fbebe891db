//! Minimal Wavefront OBJ reader/writer: `v` and `f` records only.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, Vec3};
use crate::error::{Error, Result};

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text)
}

/// Parses `v x y z` and `f i j k ...` records (1-based, negative indices
/// relative to the current vertex count). Polygons are fan-triangulated; `vn`,
/// `vt`, groups and materials are ignored.
pub fn parse_obj(text: &str) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        let Some(kind) = tok.next() else { continue };
        let err = |message: String| Error::MeshParse {
            line: lineno + 1,
            message,
        };
        match kind {
            "v" => {
                let coords: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| err(format!("bad coordinate `{t}`: {e}"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(err("vertex needs three coordinates".into()));
                }
                if !coords.iter().all(|c| c.is_finite()) {
                    return Err(err("non-finite vertex coordinate".into()));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let idx: Vec<usize> = tok
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = head
                            .parse()
                            .map_err(|e| err(format!("bad facet index `{t}`: {e}")))?;
                        let resolved = match i {
                            0 => return Err(err("facet index 0 is invalid (1-based)".into())),
                            i if i > 0 => i - 1,
                            i => vertices.len() as i64 + i,
                        };
                        if resolved < 0 {
                            return Err(err(format!("relative facet index {i} underflows")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err("facet needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    facets.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Mesh::new(vertices, facets)
}

/// Serializes with shortest round-trip float formatting.
pub fn write_obj(mesh: &Mesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.facets() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}
