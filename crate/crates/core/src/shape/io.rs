//! Segmented-mesh input and graph files.
//!
//! A segmented mesh is a TOML manifest listing one OBJ file per part:
//!
//! ```toml
//! [[part]]
//! id = "seat"
//! label = "seat"
//! file = "seat.obj"
//! ```
//!
//! Graph files are pretty-printed JSON with a `format`/`version` header,
//! the scale reference `diag`, the tolerances, the nodes (cage corners as
//! 24 floats, frame, mesh) and the relation edges.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::{InputPart, RelationKind, ShapeError, ShapeGraph};

pub const GRAPH_FORMAT: &str = "shapeprog-graph";
pub const GRAPH_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
struct Manifest {
    #[serde(default)]
    part: Vec<ManifestPart>,
}

#[derive(Debug, Deserialize)]
struct ManifestPart {
    id: String,
    label: String,
    file: String,
}

/// Read a manifest and the part meshes it references (paths relative to the
/// manifest's directory).
pub fn load_segmented(manifest: &Path) -> Result<Vec<InputPart>, ShapeError> {
    let input_err = |message: String| ShapeError::Input { path: manifest.display().to_string(), message };
    let text = std::fs::read_to_string(manifest)?;
    let parsed: Manifest = toml::from_str(&text).map_err(|e| input_err(e.to_string()))?;
    if parsed.part.is_empty() {
        return Err(ShapeError::NoParts);
    }
    let base = manifest.parent().unwrap_or(Path::new("."));
    parsed
        .part
        .into_iter()
        .map(|p| {
            let path = base.join(&p.file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ShapeError::Input { path: path.display().to_string(), message: e.to_string() })?;
            let mesh = Mesh::parse_obj(&text)
                .map_err(|e| ShapeError::Input { path: path.display().to_string(), message: e.to_string() })?;
            Ok(InputPart { id: p.id, label: p.label, mesh })
        })
        .collect()
}

/// Write parts as OBJ files plus a manifest into `dir`.
pub fn save_segmented(parts: &[InputPart], dir: &Path) -> Result<(), ShapeError> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for p in parts {
        let file = format!("{}.obj", p.id);
        std::fs::write(dir.join(&file), p.mesh.to_obj(Some(&p.id)))?;
        manifest.push_str(&format!("[[part]]\nid = \"{}\"\nlabel = \"{}\"\nfile = \"{}\"\n\n", p.id, p.label, file));
    }
    std::fs::write(dir.join("manifest.toml"), manifest)?;
    Ok(())
}

#[derive(Serialize)]
struct GraphFileOut<'a> {
    format: &'a str,
    version: u32,
    #[serde(flatten)]
    graph: &'a ShapeGraph,
}

#[derive(Deserialize)]
struct GraphFileIn {
    format: String,
    version: u32,
    #[serde(flatten)]
    graph: ShapeGraph,
}

pub fn graph_to_string(graph: &ShapeGraph) -> String {
    let mut s = serde_json::to_string_pretty(&GraphFileOut { format: GRAPH_FORMAT, version: GRAPH_VERSION, graph })
        .expect("graph serializes");
    s.push('\n');
    s
}

pub fn graph_from_str(text: &str) -> Result<ShapeGraph, ShapeError> {
    let file: GraphFileIn = serde_json::from_str(text).map_err(|e| ShapeError::Format(e.to_string()))?;
    if file.format != GRAPH_FORMAT || file.version != GRAPH_VERSION {
        return Err(ShapeError::Format(format!("unsupported format {} v{}", file.format, file.version)));
    }
    let mut graph = file.graph;
    validate(&graph)?;
    graph.bind_all();
    Ok(graph)
}

fn validate(graph: &ShapeGraph) -> Result<(), ShapeError> {
    let mut ids = BTreeSet::new();
    for n in &graph.nodes {
        if !ids.insert(n.id.as_str()) {
            return Err(ShapeError::DuplicatePart(n.id.clone()));
        }
        if n.mesh.triangles.iter().flatten().any(|&i| i as usize >= n.mesh.vertices.len()) {
            return Err(ShapeError::Format(format!("part `{}` has out-of-range triangle indices", n.id)));
        }
    }
    let mut edge_ids = BTreeSet::new();
    for e in &graph.edges {
        if !edge_ids.insert(e.id.as_str()) {
            return Err(ShapeError::Format(format!("duplicate relation id `{}`", e.id)));
        }
        for p in e.parts() {
            if !ids.contains(p) {
                return Err(ShapeError::UnknownPart(p.to_string()));
            }
        }
        if let RelationKind::Symmetry { members, transform } = &e.kind {
            if matches!(transform, super::SymTransform::Reflection { .. }) && members.len() % 2 != 0 {
                return Err(ShapeError::Format(format!("reflection `{}` needs member pairs", e.id)));
            }
        }
    }
    Ok(())
}

pub fn load_graph(path: &Path) -> Result<ShapeGraph, ShapeError> {
    graph_from_str(&std::fs::read_to_string(path)?)
}

pub fn save_graph(graph: &ShapeGraph, path: &Path) -> Result<(), ShapeError> {
    std::fs::write(path, graph_to_string(graph))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::shape::{build_graph, ShapeConfig};

    #[test]
    fn manifest_and_graph_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let parts = vec![
            InputPart { id: "a".into(), label: "block".into(), mesh: Mesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0), 1) },
            InputPart {
                id: "b".into(),
                label: "block".into(),
                mesh: Mesh::cuboid(Vec3::new(0.2, 1.0, 0.2), Vec3::new(0.4, 1.7, 0.4), 1),
            },
        ];
        save_segmented(&parts, dir.path()).unwrap();
        let loaded = load_segmented(&dir.path().join("manifest.toml")).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[1].mesh, parts[1].mesh);
        let (g, _) = build_graph(&loaded, ShapeConfig::default()).unwrap();
        let text = graph_to_string(&g);
        let back = graph_from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(graph_to_string(&back), text);
    }

    #[test]
    fn rejects_dangling_references() {
        let (mut g, _) = build_graph(
            &[InputPart { id: "a".into(), label: "x".into(), mesh: Mesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0), 1) }],
            ShapeConfig::default(),
        )
        .unwrap();
        g.edges.push(crate::shape::RelationEdge {
            id: "att0".into(),
            kind: RelationKind::Attachment { part_a: "a".into(), part_b: "ghost".into(), points: vec![] },
            enabled: true,
        });
        assert!(matches!(graph_from_str(&graph_to_string(&g)), Err(ShapeError::UnknownPart(_))));
    }
}
