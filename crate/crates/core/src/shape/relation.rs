//! Relation edges between parts.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::cage::Hexahedron;
use crate::geometry::{rotation_matrix, Vec3};

/// Rigid map relating symmetric parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SymTransform {
    /// Mirror through the plane `normal · p = offset`.
    Reflection { normal: Vec3, offset: f64 },
    /// Shift by `offset`.
    Translation { offset: Vec3 },
    /// Turn by `angle` about the line through `origin` along `axis`.
    Rotation { origin: Vec3, axis: Vec3, angle: f64 },
}

impl SymTransform {
    pub fn linear(&self) -> Matrix3<f64> {
        match self {
            SymTransform::Reflection { normal, .. } => Matrix3::identity() - normal * normal.transpose() * 2.0,
            SymTransform::Translation { .. } => Matrix3::identity(),
            SymTransform::Rotation { axis, angle, .. } => rotation_matrix(axis, *angle),
        }
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        match self {
            SymTransform::Reflection { normal, offset } => p - normal * (2.0 * (normal.dot(p) - offset)),
            SymTransform::Translation { offset } => p + offset,
            SymTransform::Rotation { origin, axis, angle } => origin + rotation_matrix(axis, *angle) * (p - origin),
        }
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.linear() * v
    }

    /// Image of a rotation axis: axes are pseudo-vectors, so improper maps
    /// flip them once more.
    pub fn apply_axis(&self, a: &Vec3) -> Vec3 {
        let l = self.linear();
        if matches!(self, SymTransform::Reflection { .. }) {
            -(l * a)
        } else {
            l * a
        }
    }

    pub fn is_improper(&self) -> bool {
        matches!(self, SymTransform::Reflection { .. })
    }

    pub fn inverse(&self) -> SymTransform {
        match self {
            SymTransform::Reflection { .. } => self.clone(),
            SymTransform::Translation { offset } => SymTransform::Translation { offset: -offset },
            SymTransform::Rotation { origin, axis, angle } => {
                SymTransform::Rotation { origin: *origin, axis: *axis, angle: -angle }
            }
        }
    }

    /// `T` applied `k` times (arrays only; reflections alternate).
    pub fn power(&self, k: i64) -> SymTransform {
        match self {
            SymTransform::Reflection { .. } => {
                if k.rem_euclid(2) == 1 {
                    self.clone()
                } else {
                    SymTransform::Translation { offset: Vec3::zeros() }
                }
            }
            SymTransform::Translation { offset } => SymTransform::Translation { offset: offset * k as f64 },
            SymTransform::Rotation { origin, axis, angle } => {
                SymTransform::Rotation { origin: *origin, axis: *axis, angle: angle * k as f64 }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SymTransform::Reflection { .. } => "reflection",
            SymTransform::Translation { .. } => "translation",
            SymTransform::Rotation { .. } => "rotation",
        }
    }
}

/// Corner permutation `perm` with `dst.corners[c] ≈ T(src.corners[perm[c]])`.
pub fn corner_permutation(src: &Hexahedron, dst: &Hexahedron, t: &SymTransform, tol: f64) -> Option<[usize; 8]> {
    let mapped: Vec<Vec3> = src.corners.iter().map(|c| t.apply_point(c)).collect();
    let mut perm = [0usize; 8];
    let mut taken = [false; 8];
    for (c, target) in dst.corners.iter().enumerate() {
        let (best, dist) = mapped
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, m)| (i, (m - target).amax()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if dist >= tol {
            return None;
        }
        taken[best] = true;
        perm[c] = best;
    }
    Some(perm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentPoint {
    pub position: Vec3,
    pub weights_a: [f64; 8],
    pub weights_b: [f64; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RelationKind {
    /// Reflections list members as pairs `(a, b)` with `H_a = T(H_b)`;
    /// arrays list members in order with `H_{k+1} = T(H_k)`.
    Symmetry { transform: SymTransform, members: Vec<String> },
    Attachment { part_a: String, part_b: String, points: Vec<AttachmentPoint> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationEdge {
    pub id: String,
    pub kind: RelationKind,
    pub enabled: bool,
}

impl RelationEdge {
    pub fn is_symmetry(&self) -> bool {
        matches!(self.kind, RelationKind::Symmetry { .. })
    }

    pub fn is_array(&self) -> bool {
        matches!(
            self.kind,
            RelationKind::Symmetry { transform: SymTransform::Translation { .. } | SymTransform::Rotation { .. }, .. }
        )
    }

    /// Ordered `(src, dst)` member pairs with `H_dst = T(H_src)`.
    pub fn symmetry_pairs(&self) -> Vec<(String, String)> {
        match &self.kind {
            RelationKind::Symmetry { transform: SymTransform::Reflection { .. }, members } => {
                members.chunks(2).filter(|c| c.len() == 2).map(|c| (c[1].clone(), c[0].clone())).collect()
            }
            RelationKind::Symmetry { members, .. } => {
                members.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
            }
            RelationKind::Attachment { .. } => Vec::new(),
        }
    }

    pub fn parts(&self) -> Vec<&str> {
        match &self.kind {
            RelationKind::Symmetry { members, .. } => members.iter().map(String::as_str).collect(),
            RelationKind::Attachment { part_a, part_b, .. } => vec![part_a, part_b],
        }
    }

    pub fn involves(&self, part: &str) -> bool {
        self.parts().contains(&part)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            RelationKind::Symmetry { transform, members } => {
                format!("{} symmetry of {}", transform.name(), members.join(", "))
            }
            RelationKind::Attachment { part_a, part_b, points } => {
                format!("attachment {part_a}-{part_b} ({} point{})", points.len(), if points.len() == 1 { "" } else { "s" })
            }
        }
    }
}
