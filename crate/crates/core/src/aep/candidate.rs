//! Candidate corrective edits for a part.

use crate::dsl::{EditKind, EditOp, KindFamily, Operand};
use crate::geometry::{snap_vec, Vec3};
use crate::shape::{Feature, Hexahedron, ShapeGraph};
use crate::symbolic::SymExpr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Built from the part's own cage features.
    Own,
    /// Built from the features of an already edited neighbor.
    Neighbor(String),
}

/// An edit template whose amount is still unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEdit {
    pub part: String,
    pub kind: EditKind,
    pub provenance: Provenance,
    /// Position in the enumeration, used to break ties.
    pub index: usize,
}

impl CandidateEdit {
    pub fn with_amount(&self, amount: SymExpr) -> EditOp {
        EditOp::new(Operand::Part(self.part.clone()), self.kind.clone(), amount)
    }

    pub fn admitted_by(&self, hint: Option<KindFamily>) -> bool {
        hint.is_none_or(|h| self.kind.family() == Some(h))
    }
}

/// Center, the six face centers and the twelve edge midpoints.
fn origins(cage: &Hexahedron) -> Vec<Vec3> {
    let mut out = vec![cage.center];
    out.extend((0..6).map(|i| cage.feature_center(Feature::Face(i))));
    out.extend((0..12).map(|i| cage.feature_center(Feature::Edge(i))));
    out.iter().map(snap_vec).collect()
}

const SHEAR_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];

/// Translate along `±axes`, scale about center and face centers, rotate
/// about center, face centers and edge midpoints, shear about the center.
fn kinds_from(cage: &Hexahedron) -> Vec<EditKind> {
    let axes = cage.axes;
    let pts = origins(cage);
    let mut out = Vec::with_capacity(90);
    for a in &axes {
        out.push(EditKind::Translate { dir: *a });
        out.push(EditKind::Translate { dir: -a });
    }
    for o in &pts[..7] {
        for a in &axes {
            out.push(EditKind::Scale { origin: *o, axis: *a });
        }
    }
    for o in &pts {
        for a in &axes {
            out.push(EditKind::Rotate { origin: *o, axis: *a });
        }
    }
    for (n, d) in SHEAR_PAIRS {
        out.push(EditKind::Shear { origin: cage.center, normal: axes[n], dir: axes[d] });
    }
    out
}

/// Candidates for `part` in a fixed order, filtered by the hint.
///
/// With `use_nhbd`, templates built from every edited neighbor's features
/// follow the part's own ones.
pub fn enumerate_candidates(
    graph: &ShapeGraph,
    part: &str,
    hint: Option<KindFamily>,
    edited_neighbors: &[String],
    use_nhbd: bool,
) -> Vec<CandidateEdit> {
    let Some(node) = graph.node(part) else { return Vec::new() };
    let mut sources = vec![(Provenance::Own, &node.cage)];
    if use_nhbd {
        for n in edited_neighbors {
            if let Some(nn) = graph.node(n) {
                sources.push((Provenance::Neighbor(n.clone()), &nn.cage));
            }
        }
    }
    let mut out = Vec::new();
    let mut index = 0;
    for (prov, cage) in sources {
        for kind in kinds_from(cage) {
            let c = CandidateEdit { part: part.to_string(), kind, provenance: prov.clone(), index };
            index += 1;
            if c.admitted_by(hint) {
                out.push(c);
            }
        }
    }
    out
}
