//! Structured shape abstraction: parts bound to hexahedral cages plus the
//! symmetry and attachment relations between them.

pub mod cage;
pub mod detect;
pub mod io;
pub mod labels;
pub mod mesh;
pub mod obb;
pub mod relation;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cage::{corner_sign, Feature, Hexahedron};
pub use detect::{detect_attachments, detect_symmetries};
pub use labels::assign_directional_phrases;
pub use mesh::Mesh;
pub use relation::{corner_permutation, AttachmentPoint, RelationEdge, RelationKind, SymTransform};

use crate::geometry::Vec3;

/// Points may lie this far (relative to the diagonal) outside their cage.
pub const OUTSIDE_MARGIN_REL: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("part `{0}` has no usable vertices")]
    EmptyPart(String),
    #[error("the shape has no parts")]
    NoParts,
    #[error("duplicate part id `{0}`")]
    DuplicatePart(String),
    #[error("point lies {distance:.3e} outside the cage of `{part}`")]
    OutsideCage { part: String, distance: f64 },
    #[error("unknown part `{0}`")]
    UnknownPart(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Non-fatal findings while building a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShapeWarning {
    NonManifoldIgnored { part: String, edges: usize },
}

impl std::fmt::Display for ShapeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShapeWarning::NonManifoldIgnored { part, edges } => {
                write!(f, "part `{part}` has {edges} non-manifold edge(s); ignored")
            }
        }
    }
}

/// Scale-relative tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeConfig {
    /// Relation tolerance as a fraction of the diagonal.
    pub delta_rel: f64,
    /// Contact distance as a fraction of the diagonal.
    pub contact_rel: f64,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig { delta_rel: 1e-3, contact_rel: 5e-3 }
    }
}

/// One input part before abstraction.
#[derive(Debug, Clone)]
pub struct InputPart {
    pub id: String,
    pub label: String,
    pub mesh: Mesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartNode {
    pub id: String,
    pub label: String,
    pub phrase: Option<String>,
    pub cage: Hexahedron,
    pub mesh: Mesh,
    pub planar: bool,
    /// Trilinear weights of each mesh vertex; rebuilt on load.
    #[serde(skip)]
    pub cage_coords: Vec<[f64; 8]>,
}

impl PartNode {
    pub fn new(id: String, label: String, cage: Hexahedron, mesh: Mesh, planar: bool) -> PartNode {
        let mut node = PartNode { id, label, phrase: None, cage, mesh, planar, cage_coords: Vec::new() };
        node.bind();
        node
    }

    pub fn bind(&mut self) {
        self.cage_coords = self.mesh.vertices.iter().map(|v| self.cage.weights(v)).collect();
    }

    /// Label with its directional phrase, e.g. "front left leg".
    pub fn verbal_name(&self) -> String {
        match &self.phrase {
            Some(p) => format!("{p} {}", self.label),
            None => self.label.clone(),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        self.cage.center
    }

    /// Vertex positions under deformed cage corners.
    ///
    /// Written in displacement form so that rest corners reproduce the input
    /// vertices exactly.
    pub fn deform_vertices(&self, corners: &[Vec3; 8]) -> Vec<Vec3> {
        let disp: [Vec3; 8] = std::array::from_fn(|i| corners[i] - self.cage.corners[i]);
        if disp.iter().all(|d| *d == Vec3::zeros()) {
            return self.mesh.vertices.clone();
        }
        self.mesh
            .vertices
            .iter()
            .zip(&self.cage_coords)
            .map(|(v, w)| v + Hexahedron::combine(w, &disp))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeGraph {
    pub nodes: Vec<PartNode>,
    pub edges: Vec<RelationEdge>,
    pub diag: f64,
    pub config: ShapeConfig,
}

/// Weights of `p` in `part`'s cage, rejecting points far outside it.
pub fn cage_coordinates(part: &PartNode, p: &Vec3, diag: f64) -> Result<[f64; 8], ShapeError> {
    let distance = part.cage.outside_distance(p);
    if distance > OUTSIDE_MARGIN_REL * diag {
        return Err(ShapeError::OutsideCage { part: part.id.clone(), distance });
    }
    Ok(part.cage.weights(p))
}

/// Build the abstraction for a segmented mesh.
pub fn build_graph(parts: &[InputPart], config: ShapeConfig) -> Result<(ShapeGraph, Vec<ShapeWarning>), ShapeError> {
    if parts.is_empty() {
        return Err(ShapeError::NoParts);
    }
    let mut seen = BTreeSet::new();
    let mut warnings = Vec::new();
    for p in parts {
        if !seen.insert(p.id.as_str()) {
            return Err(ShapeError::DuplicatePart(p.id.clone()));
        }
        if p.mesh.vertices.is_empty() || p.mesh.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(ShapeError::EmptyPart(p.id.clone()));
        }
        let bad = p.mesh.non_manifold_edges();
        if bad > 0 {
            warnings.push(ShapeWarning::NonManifoldIgnored { part: p.id.clone(), edges: bad });
        }
    }
    let (lo, hi) = parts
        .iter()
        .filter_map(|p| p.mesh.bounds())
        .reduce(|(a, b), (c, d)| (a.inf(&c), b.sup(&d)))
        .ok_or(ShapeError::NoParts)?;
    let diag = (hi - lo).norm();
    if diag <= 0.0 {
        return Err(ShapeError::EmptyPart(parts[0].id.clone()));
    }
    let nodes: Vec<PartNode> = parts
        .iter()
        .map(|p| {
            let fit = obb::fit_obb(&p.mesh.vertices, 1e-4 * diag, 1e-3 * diag);
            PartNode::new(p.id.clone(), p.label.clone(), fit.cage, p.mesh.clone(), fit.planar)
        })
        .collect();
    let mut graph = ShapeGraph { nodes, edges: Vec::new(), diag, config };
    let mut edges = detect_symmetries(&graph.nodes, graph.delta());
    for (i, e) in edges.iter_mut().enumerate() {
        e.id = format!("sym{i}");
    }
    let mut att = detect_attachments(&graph.nodes, graph.delta(), graph.contact_eps(), diag);
    for (i, e) in att.iter_mut().enumerate() {
        e.id = format!("att{i}");
    }
    edges.extend(att);
    graph.edges = edges;
    let delta = graph.delta();
    assign_directional_phrases(&mut graph.nodes, delta);
    Ok((graph, warnings))
}

impl ShapeGraph {
    pub fn delta(&self) -> f64 {
        self.config.delta_rel * self.diag
    }

    pub fn contact_eps(&self) -> f64 {
        self.config.contact_rel * self.diag
    }

    pub fn node(&self, id: &str) -> Option<&PartNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&RelationEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn enabled_edges(&self) -> impl Iterator<Item = &RelationEdge> {
        self.edges.iter().filter(|e| e.enabled)
    }

    /// Copy of the graph with the given relations disabled.
    pub fn with_disabled<S: AsRef<str>>(&self, ids: &[S]) -> ShapeGraph {
        let mut g = self.clone();
        for e in g.edges.iter_mut() {
            if ids.iter().any(|i| i.as_ref() == e.id) {
                e.enabled = false;
            }
        }
        g
    }

    /// Same relations over new rest cages and meshes (for example an evaluated
    /// shape). Attachment weights are recomputed from the new cages; symmetry
    /// relations are carried over unchanged.
    pub fn rebased(&self, cages: &HashMap<String, [Vec3; 8]>, meshes: &HashMap<String, Vec<Vec3>>) -> ShapeGraph {
        let mut g = self.clone();
        for n in g.nodes.iter_mut() {
            if let Some(c) = cages.get(&n.id) {
                n.cage = Hexahedron::from_corners(*c);
            }
            if let Some(v) = meshes.get(&n.id) {
                n.mesh.vertices = v.clone();
            }
            n.bind();
        }
        // trilinear weights live in parameter space, so they stay valid
        for e in g.edges.iter_mut() {
            if let RelationKind::Attachment { part_a, points, .. } = &mut e.kind {
                if let Some(ca) = cages.get(part_a.as_str()) {
                    for pt in points.iter_mut() {
                        pt.position = Hexahedron::combine(&pt.weights_a, ca);
                    }
                }
            }
        }
        g
    }

    /// Recompute derived data after deserialization.
    pub fn bind_all(&mut self) {
        for n in self.nodes.iter_mut() {
            n.bind();
        }
    }

    /// Short human-readable summary used by the CLI and service.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str(&format!("part {} \"{}\"\n", n.id, n.verbal_name()));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "relation {} {}{}\n",
                e.id,
                e.describe(),
                if e.enabled { "" } else { " [disabled]" }
            ));
        }
        out
    }
}
