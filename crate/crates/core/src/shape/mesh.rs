//! Triangle meshes and Wavefront OBJ text I/O.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("face on line {line} references vertex {index} (mesh has {count})")]
    BadIndex { line: usize, index: i64, count: usize },
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Mesh {
        Mesh { vertices, triangles }
    }

    /// Axis-aligned box with each face split into `n × n` quads.
    pub fn cuboid(lo: Vec3, hi: Vec3, n: usize) -> Mesh {
        let n = n.max(1);
        let mut mesh = Mesh::default();
        let mut index: HashMap<[i64; 3], u32> = HashMap::new();
        let mut vid = |mesh: &mut Mesh, g: [usize; 3]| -> u32 {
            let key = [g[0] as i64, g[1] as i64, g[2] as i64];
            *index.entry(key).or_insert_with(|| {
                let p = Vec3::from_fn(|k, _| {
                    if g[k] == 0 {
                        lo[k]
                    } else if g[k] == n {
                        hi[k]
                    } else {
                        lo[k] + (hi[k] - lo[k]) * g[k] as f64 / n as f64
                    }
                });
                mesh.vertices.push(p);
                (mesh.vertices.len() - 1) as u32
            })
        };
        for axis in 0..3 {
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            for side in [0, n] {
                for i in 0..n {
                    for j in 0..n {
                        let mut q = [[0usize; 3]; 4];
                        for (c, (di, dj)) in [(0, 0), (1, 0), (1, 1), (0, 1)].into_iter().enumerate() {
                            q[c][axis] = side;
                            q[c][a] = i + di;
                            q[c][b] = j + dj;
                        }
                        let ids: Vec<u32> = q.iter().map(|g| vid(&mut mesh, *g)).collect();
                        // (a, b, axis) is right-handed, so this loop faces +axis
                        if side == n {
                            mesh.triangles.push([ids[0], ids[1], ids[2]]);
                            mesh.triangles.push([ids[0], ids[2], ids[3]]);
                        } else {
                            mesh.triangles.push([ids[0], ids[2], ids[1]]);
                            mesh.triangles.push([ids[0], ids[3], ids[2]]);
                        }
                    }
                }
            }
        }
        mesh
    }

    pub fn transformed(&self, f: impl Fn(&Vec3) -> Vec3) -> Mesh {
        Mesh { vertices: self.vertices.iter().map(f).collect(), triangles: self.triangles.clone() }
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let mut it = self.vertices.iter();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    /// Number of edges shared by more than two triangles.
    pub fn non_manifold_edges(&self) -> usize {
        let mut count: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count.values().filter(|&&c| c > 2).count()
    }

    pub fn parse_obj(text: &str) -> Result<Mesh, ObjError> {
        let mut mesh = Mesh::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            let mut words = body.split_whitespace();
            match words.next() {
                Some("v") => {
                    let coords: Vec<f64> = words
                        .take(3)
                        .map(|w| w.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| ObjError::Syntax { line, message: format!("bad vertex: {e}") })?;
                    if coords.len() != 3 {
                        return Err(ObjError::Syntax { line, message: "vertex needs 3 coordinates".into() });
                    }
                    mesh.vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
                }
                Some("f") => {
                    let mut ids = Vec::new();
                    for w in words {
                        let first = w.split('/').next().unwrap_or("");
                        let i: i64 = first
                            .parse()
                            .map_err(|_| ObjError::Syntax { line, message: format!("bad face index `{w}`") })?;
                        let count = mesh.vertices.len();
                        let resolved = if i > 0 { i - 1 } else { count as i64 + i };
                        if resolved < 0 || resolved >= count as i64 {
                            return Err(ObjError::BadIndex { line, index: i, count });
                        }
                        ids.push(resolved as u32);
                    }
                    if ids.len() < 3 {
                        return Err(ObjError::Syntax { line, message: "face needs at least 3 vertices".into() });
                    }
                    for k in 1..ids.len() - 1 {
                        mesh.triangles.push([ids[0], ids[k], ids[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        Ok(mesh)
    }

    /// OBJ text with shortest round-trip float formatting.
    pub fn to_obj(&self, name: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(n) = name {
            let _ = writeln!(out, "o {n}");
        }
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}

/// Fixed nine-decimal formatting with negative zero folded into zero, so
/// outputs that agree to within float noise are byte-identical.
pub fn canonical(v: f64) -> String {
    let s = format!("{v:.9}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        "0.000000000".to_string()
    } else {
        s
    }
}

/// Several meshes in one OBJ file, one object per part, with [`canonical`]
/// coordinates.
pub fn merged_obj<'a>(parts: impl IntoIterator<Item = (&'a str, &'a Mesh)>) -> String {
    let mut out = String::new();
    let mut offset = 0u32;
    for (name, mesh) in parts {
        let _ = writeln!(out, "o {name}");
        for v in &mesh.vertices {
            let _ = writeln!(out, "v {} {} {}", canonical(v.x), canonical(v.y), canonical(v.z));
        }
        for t in &mesh.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + offset + 1, t[1] + offset + 1, t[2] + offset + 1);
        }
        offset += mesh.vertices.len() as u32;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cuboid_is_closed_and_outward() {
        let m = Mesh::cuboid(Vec3::zeros(), Vec3::new(2.0, 1.0, 1.0), 2);
        assert_eq!(m.vertices.len(), 26);
        assert_eq!(m.triangles.len(), 48);
        assert_eq!(canonical(-1e-12), "0.000000000");
        assert_eq!(canonical(-0.25), "-0.250000000");
        assert_eq!(m.non_manifold_edges(), 0);
        // signed volume via the divergence theorem
        let vol: f64 = (0..m.triangles.len())
            .map(|t| {
                let [a, b, c] = m.triangle(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum();
        assert!((vol - 2.0).abs() < 1e-12);
    }

    #[test]
    fn obj_round_trip() {
        let m = Mesh::cuboid(Vec3::new(-0.1, 0.3, 0.7), Vec3::new(0.9, 1.0 / 3.0 + 1.0, 0.8), 1);
        let back = Mesh::parse_obj(&m.to_obj(Some("part"))).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn obj_quads_and_errors() {
        let m = Mesh::parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n").unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3]]);
        assert!(matches!(Mesh::parse_obj("v 0 0\n"), Err(ObjError::Syntax { line: 1, .. })));
        assert!(matches!(Mesh::parse_obj("v 0 0 0\nf 1 2 3\n"), Err(ObjError::BadIndex { line: 2, .. })));
    }
}
