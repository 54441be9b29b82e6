//! Carrying edits across symmetry transforms.

use crate::dsl::{EditKind, EditOp, Operand};
use crate::geometry::{snap_vec, Vec3};
use crate::shape::{corner_permutation, Feature, Hexahedron, SymTransform};

/// Snapped unless that moves it off the unit sphere.
fn unit(v: Vec3) -> Vec3 {
    let s = snap_vec(&v);
    if (s.norm() - 1.0).abs() < 1e-15 {
        s
    } else {
        v
    }
}

/// `T ∘ E ∘ T⁻¹`: the edit acting on `T(H)` the way `edit` acts on `H`.
///
/// Points (origins) map through `T`, direction vectors through its linear
/// part and rotation axes as pseudo-vectors. The amount is unchanged.
pub fn conjugate(edit: &EditOp, t: &SymTransform) -> EditOp {
    let kind = match &edit.kind {
        EditKind::Translate { dir } => EditKind::Translate { dir: unit(t.apply_vector(dir)) },
        EditKind::Scale { origin, axis } => {
            EditKind::Scale { origin: snap_vec(&t.apply_point(origin)), axis: unit(t.apply_vector(axis)) }
        }
        EditKind::Rotate { origin, axis } => {
            EditKind::Rotate { origin: snap_vec(&t.apply_point(origin)), axis: unit(t.apply_axis(axis)) }
        }
        EditKind::Shear { origin, normal, dir } => EditKind::Shear {
            origin: snap_vec(&t.apply_point(origin)),
            normal: unit(t.apply_vector(normal)),
            dir: unit(t.apply_vector(dir)),
        },
        k @ (EditKind::SymGroupCount | EditKind::SymGroupSpacing) => k.clone(),
    };
    EditOp { operand: edit.operand.clone(), kind, amount: edit.amount.clone() }
}

/// Conjugate an edit of the part with cage `src` onto the part `dst_id`
/// whose cage is `dst ≈ T(src)`, remapping feature operands through the
/// corner correspondence.
pub fn conjugate_onto(edit: &EditOp, t: &SymTransform, src: &Hexahedron, dst: &Hexahedron, dst_id: &str) -> Option<EditOp> {
    let mut out = conjugate(edit, t);
    out.operand = match &edit.operand {
        Operand::Part(_) => Operand::Part(dst_id.to_string()),
        Operand::Feature(_, f) => {
            let perm = corner_permutation(src, dst, t, f64::INFINITY)?;
            let wanted = f.corners();
            let image: Vec<usize> = (0..8).filter(|c| wanted.contains(&perm[*c])).collect();
            Operand::Feature(dst_id.to_string(), Feature::from_corner_set(&image)?)
        }
        Operand::Relation(_) => return None,
    };
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::SymExpr;

    fn yz_mirror() -> SymTransform {
        SymTransform::Reflection { normal: Vec3::x(), offset: 0.0 }
    }

    #[test]
    fn translate_direction_is_mirrored() {
        let e = EditOp::new(Operand::Part("a".into()), EditKind::Translate { dir: Vec3::x() }, SymExpr::param("x"));
        assert_eq!(conjugate(&e, &yz_mirror()).kind, EditKind::Translate { dir: -Vec3::x() });
    }

    #[test]
    fn rotation_axis_is_a_pseudo_vector() {
        let e = EditOp::new(
            Operand::Part("a".into()),
            EditKind::Rotate { origin: Vec3::new(0.5, 0.0, 0.0), axis: Vec3::y() },
            SymExpr::param("x"),
        );
        assert_eq!(
            conjugate(&e, &yz_mirror()).kind,
            EditKind::Rotate { origin: Vec3::new(-0.5, 0.0, 0.0), axis: -Vec3::y() }
        );
    }

    #[test]
    fn face_operands_follow_the_corner_map() {
        let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
        let a = Hexahedron::from_bounds(axes, [0.5, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let b = Hexahedron::from_bounds(axes, [-1.0, 0.0, 0.0], [-0.5, 1.0, 1.0]);
        let e = EditOp::new(
            Operand::Feature("a".into(), Feature::Face(1)),
            EditKind::Translate { dir: Vec3::x() },
            SymExpr::param("x"),
        );
        let c = conjugate_onto(&e, &yz_mirror(), &a, &b, "b").unwrap();
        assert_eq!(c.operand, Operand::Feature("b".into(), Feature::Face(0)));
    }
}
