//! Relation detection: symmetry groups and contact attachments.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

use super::cage::Hexahedron;
use super::relation::{corner_permutation, AttachmentPoint, RelationEdge, RelationKind, SymTransform};
use super::{Mesh, PartNode};
use crate::geometry::{closest_point_on_triangle, ConvexPolytope, HalfSpace, Vec3};

/// Relative tolerance on cage extents for congruence.
const CONGRUENT_REL: f64 = 0.02;
/// Maximum coefficient of variation of array spacings.
const SPACING_CV: f64 = 0.02;
/// Contact patches wider than this fraction of the diagonal get extra points
/// at their ends.
const WIDE_PATCH_REL: f64 = 0.1;
/// Surface sample spacing as a fraction of the diagonal.
const SAMPLE_REL: f64 = 1.0 / 64.0;

fn congruent(a: &Hexahedron, b: &Hexahedron, delta: f64) -> bool {
    let mut ea = a.half_extents;
    let mut eb = b.half_extents;
    ea.sort_by(f64::total_cmp);
    eb.sort_by(f64::total_cmp);
    ea.iter().zip(&eb).all(|(x, y)| (x - y).abs() <= (CONGRUENT_REL * x.max(*y)).max(delta))
}

fn shape_center(nodes: &[PartNode]) -> Vec3 {
    let (lo, hi) = nodes
        .iter()
        .filter_map(|n| n.mesh.bounds())
        .reduce(|(a, b), (c, d)| (a.inf(&c), b.sup(&d)))
        .unwrap_or((Vec3::zeros(), Vec3::zeros()));
    (lo + hi) / 2.0
}

fn cv(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if mean.abs() < 1e-300 {
        f64::INFINITY
    } else {
        var.sqrt() / mean.abs()
    }
}

fn chain_holds(nodes: &[PartNode], order: &[usize], t: &SymTransform, delta: f64) -> bool {
    order.windows(2).all(|w| corner_permutation(&nodes[w[0]].cage, &nodes[w[1]].cage, t, delta).is_some())
}

fn translation_array(nodes: &[PartNode], class: &[usize], delta: f64) -> Option<(SymTransform, Vec<usize>)> {
    let centers: Vec<Vec3> = class.iter().map(|&i| nodes[i].cage.center).collect();
    let mut far = (0, 0, 0.0);
    for a in 0..centers.len() {
        for b in a + 1..centers.len() {
            let d = (centers[b] - centers[a]).norm();
            if d > far.2 {
                far = (a, b, d);
            }
        }
    }
    if far.2 <= delta {
        return None;
    }
    let mut dir = (centers[far.1] - centers[far.0]) / far.2;
    // canonical sign: largest component positive
    if dir[dir.iamax()] < 0.0 {
        dir = -dir;
    }
    let base = centers[far.0];
    let mut proj: Vec<(f64, usize)> = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        let t = (c - base).dot(&dir);
        if (c - base - dir * t).norm() >= delta {
            return None;
        }
        proj.push((t, class[k]));
    }
    proj.sort_by(|a, b| a.0.total_cmp(&b.0));
    let gaps: Vec<f64> = proj.windows(2).map(|w| w[1].0 - w[0].0).collect();
    if gaps.iter().any(|g| *g <= delta) || cv(&gaps) >= SPACING_CV {
        return None;
    }
    let order: Vec<usize> = proj.iter().map(|p| p.1).collect();
    let first = nodes[order[0]].cage.center;
    let last = nodes[*order.last().expect("non-empty")].cage.center;
    let t = SymTransform::Translation { offset: (last - first) / (order.len() - 1) as f64 };
    chain_holds(nodes, &order, &t, delta).then_some((t, order))
}

fn rotation_array(nodes: &[PartNode], class: &[usize], delta: f64) -> Option<(SymTransform, Vec<usize>)> {
    let centers: Vec<Vec3> = class.iter().map(|&i| nodes[i].cage.center).collect();
    let n = centers.len() as f64;
    let hub = centers.iter().fold(Vec3::zeros(), |a, c| a + c) / n;
    if centers.iter().any(|c| (c.y - hub.y).abs() >= delta) {
        return None;
    }
    let radii: Vec<f64> = centers.iter().map(|c| (c.x - hub.x).hypot(c.z - hub.z)).collect();
    if radii[0] <= delta || radii.iter().any(|r| (r - radii[0]).abs() >= delta) {
        return None;
    }
    let mut ang: Vec<(f64, usize)> =
        centers.iter().zip(class).map(|(c, &i)| ((c.z - hub.z).atan2(c.x - hub.x), i)).collect();
    ang.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut gaps: Vec<f64> = ang.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let open_cv = cv(&gaps);
    gaps.push(TAU - (ang.last().expect("non-empty").0 - ang[0].0));
    let step = if cv(&gaps) < SPACING_CV {
        TAU / n
    } else if open_cv < SPACING_CV {
        (ang.last().expect("non-empty").0 - ang[0].0) / (n - 1.0)
    } else {
        return None;
    };
    // a positive turn about -y increases atan2(z, x)
    let t = SymTransform::Rotation { origin: Vec3::new(hub.x, 0.0, hub.z), axis: -Vec3::y(), angle: step };
    let order: Vec<usize> = ang.iter().map(|a| a.1).collect();
    chain_holds(nodes, &order, &t, delta).then_some((t, order))
}

/// Reflection pairs about global mid-planes, then translational and
/// rotational arrays. Relation ids are left empty.
pub fn detect_symmetries(nodes: &[PartNode], delta: f64) -> Vec<RelationEdge> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        match classes.iter_mut().find(|c| congruent(&nodes[c[0]].cage, &n.cage, delta)) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    let mut arrays: Vec<(SymTransform, Vec<usize>)> = Vec::new();
    for class in classes.iter().filter(|c| c.len() >= 3) {
        if let Some(a) = translation_array(nodes, class, delta).or_else(|| rotation_array(nodes, class, delta)) {
            arrays.push(a);
        }
    }
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    for (g, (_, members)) in arrays.iter().enumerate() {
        for &m in members {
            group_of.insert(m, g);
        }
    }

    let center = shape_center(nodes);
    let mut edges = Vec::new();
    for k in 0..3 {
        let t = SymTransform::Reflection { normal: Vec3::ith(k, 1.0), offset: center[k] };
        let mut used = vec![false; nodes.len()];
        let mut members = Vec::new();
        for i in 0..nodes.len() {
            if used[i] {
                continue;
            }
            for j in i + 1..nodes.len() {
                if used[j] || (group_of.contains_key(&i) && group_of.get(&i) == group_of.get(&j)) {
                    continue;
                }
                if !congruent(&nodes[i].cage, &nodes[j].cage, delta) {
                    continue;
                }
                if corner_permutation(&nodes[j].cage, &nodes[i].cage, &t, delta).is_some() {
                    used[i] = true;
                    used[j] = true;
                    members.push(nodes[i].id.clone());
                    members.push(nodes[j].id.clone());
                    break;
                }
            }
        }
        if !members.is_empty() {
            edges.push(RelationEdge {
                id: String::new(),
                kind: RelationKind::Symmetry { transform: t, members },
                enabled: true,
            });
        }
    }
    for (t, order) in arrays {
        edges.push(RelationEdge {
            id: String::new(),
            kind: RelationKind::Symmetry {
                transform: t,
                members: order.iter().map(|&i| nodes[i].id.clone()).collect(),
            },
            enabled: true,
        });
    }
    edges
}

fn cage_bounds(h: &Hexahedron, pad: f64) -> (Vec3, Vec3) {
    let (lo, hi) = h.corners.iter().skip(1).fold((h.corners[0], h.corners[0]), |(lo, hi), c| (lo.inf(c), hi.sup(c)));
    (lo - Vec3::repeat(pad), hi + Vec3::repeat(pad))
}

fn boxes_overlap(a: &(Vec3, Vec3), b: &(Vec3, Vec3)) -> bool {
    (0..3).all(|k| a.0[k] <= b.1[k] && b.0[k] <= a.1[k])
}

fn inside(p: &Vec3, b: &(Vec3, Vec3)) -> bool {
    (0..3).all(|k| p[k] >= b.0[k] && p[k] <= b.1[k])
}

/// Barycentric-grid samples of the triangles touching `region`.
fn surface_samples(mesh: &Mesh, spacing: f64, region: &(Vec3, Vec3)) -> Vec<Vec3> {
    let mut out = Vec::new();
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        let tb = (a.inf(&b).inf(&c), a.sup(&b).sup(&c));
        if !boxes_overlap(&tb, region) {
            continue;
        }
        let longest = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        let n = ((longest / spacing).ceil() as usize).clamp(1, 64);
        for i in 0..=n {
            for j in 0..=n - i {
                let p = a + (b - a) * (i as f64 / n as f64) + (c - a) * (j as f64 / n as f64);
                if inside(&p, region) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn near_mesh(p: &Vec3, mesh: &Mesh, eps: f64) -> bool {
    let pad = Vec3::repeat(eps);
    (0..mesh.triangles.len()).any(|t| {
        let [a, b, c] = mesh.triangle(t);
        let tb = (a.inf(&b).inf(&c) - pad, a.sup(&b).sup(&c) + pad);
        inside(p, &tb) && (closest_point_on_triangle(p, &a, &b, &c) - p).norm() < eps
    })
}

/// Single-linkage clusters of `points` at distance `radius`.
fn clusters(points: &[Vec3], radius: f64) -> Vec<Vec<usize>> {
    let cell = |p: &Vec3| [(p.x / radius).floor() as i64, (p.y / radius).floor() as i64, (p.z / radius).floor() as i64];
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, p) in points.iter().enumerate() {
        let c = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else { continue };
                    for &j in bucket {
                        if j > i && (points[j] - p).norm() <= radius {
                            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                            if ri != rj {
                                parent[ri.max(rj)] = ri.min(rj);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..points.len() {
        let r = find(&mut parent, i);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

fn cage_halfspaces(h: &Hexahedron, pad: f64) -> Vec<HalfSpace> {
    let mut out = Vec::with_capacity(6);
    for k in 0..3 {
        let a = h.axes[k];
        let c = h.center.dot(&a);
        out.push(HalfSpace { normal: a, offset: c + h.half_extents[k] + pad });
        out.push(HalfSpace { normal: -a, offset: -(c - h.half_extents[k] - pad) });
    }
    out
}

/// Representative points of one contact patch.
fn patch_points(samples: &[Vec3], a: &Hexahedron, b: &Hexahedron, eps: f64, diag: f64) -> Vec<Vec3> {
    let (lo, hi) = samples
        .iter()
        .skip(1)
        .fold((samples[0], samples[0]), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    let mut poly = ConvexPolytope::aabb(lo - Vec3::repeat(eps), hi + Vec3::repeat(eps));
    for h in cage_halfspaces(a, eps).iter().chain(cage_halfspaces(b, eps).iter()) {
        poly.clip(h);
    }
    let Some((_, centroid)) = poly.volume_centroid() else {
        let mean = samples.iter().fold(Vec3::zeros(), |s, p| s + p) / samples.len() as f64;
        return vec![mean];
    };
    // extents measured in the frame of the smaller cage
    let frame = if a.volume() <= b.volume() { a.axes } else { b.axes };
    let mut spans: Vec<(Vec3, f64, f64)> = Vec::new();
    for axis in frame {
        let (mut pl, mut ph) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in poly.vertices() {
            let t = v.dot(&axis);
            pl = pl.min(t);
            ph = ph.max(t);
        }
        if ph - pl - 2.0 * eps >= WIDE_PATCH_REL * diag {
            let mid = (pl + ph) / 2.0 - centroid.dot(&axis);
            spans.push((axis, mid, (ph - pl) / 2.0 - eps));
        }
    }
    let mut points = vec![centroid];
    match spans.as_slice() {
        [] => {}
        [(axis, mid, half)] => {
            points.push(centroid + axis * (mid - half));
            points.push(centroid + axis * (mid + half));
        }
        _ => {
            let (a0, m0, h0) = spans[0];
            let (a1, m1, h1) = spans[1];
            for s0 in [-1.0, 1.0] {
                for s1 in [-1.0, 1.0] {
                    points.push(centroid + a0 * (m0 + s0 * h0) + a1 * (m1 + s1 * h1));
                }
            }
        }
    }
    points
}

fn attachment_between(a: &PartNode, b: &PartNode, eps: f64, diag: f64) -> Option<Vec<AttachmentPoint>> {
    let (ba, bb) = (cage_bounds(&a.cage, eps), cage_bounds(&b.cage, eps));
    if !boxes_overlap(&ba, &bb) {
        return None;
    }
    let spacing = SAMPLE_REL * diag;
    let mut contact: Vec<Vec3> = Vec::new();
    for (src, dst, region) in [(a, b, &bb), (b, a, &ba)] {
        for p in surface_samples(&src.mesh, spacing, region) {
            if dst.cage.contains_rest(&p, 0.0) || near_mesh(&p, &dst.mesh, eps) {
                contact.push(p);
            }
        }
    }
    if contact.is_empty() {
        return None;
    }
    let mut patches: Vec<Vec<Vec3>> =
        clusters(&contact, 2.5 * spacing).into_iter().map(|g| g.into_iter().map(|i| contact[i]).collect()).collect();
    let key = |ps: &Vec<Vec3>| ps.iter().fold(Vec3::zeros(), |s, p| s + p) / ps.len() as f64;
    patches.sort_by(|p, q| {
        let (kp, kq) = (key(p), key(q));
        kp.x.total_cmp(&kq.x).then(kp.y.total_cmp(&kq.y)).then(kp.z.total_cmp(&kq.z))
    });
    let mut points = Vec::new();
    for patch in &patches {
        for p in patch_points(patch, &a.cage, &b.cage, eps, diag) {
            points.push(AttachmentPoint { position: p, weights_a: a.cage.weights(&p), weights_b: b.cage.weights(&p) });
        }
    }
    Some(points)
}

/// One attachment per touching part pair, with a point per contact patch.
/// Relation ids are left empty.
pub fn detect_attachments(nodes: &[PartNode], delta: f64, eps: f64, diag: f64) -> Vec<RelationEdge> {
    let pairs: Vec<(usize, usize)> = (0..nodes.len()).flat_map(|i| (i + 1..nodes.len()).map(move |j| (i, j))).collect();
    let found: Vec<Option<RelationEdge>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let points = attachment_between(&nodes[i], &nodes[j], eps, diag)?;
            // keep only points that hold at rest
            let points: Vec<AttachmentPoint> = points
                .into_iter()
                .filter(|p| {
                    let pa = Hexahedron::combine(&p.weights_a, &nodes[i].cage.corners);
                    let pb = Hexahedron::combine(&p.weights_b, &nodes[j].cage.corners);
                    (pa - pb).amax() < delta
                })
                .collect();
            (!points.is_empty()).then(|| RelationEdge {
                id: String::new(),
                kind: RelationKind::Attachment { part_a: nodes[i].id.clone(), part_b: nodes[j].id.clone(), points },
                enabled: true,
            })
        })
        .collect();
    found.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{build_graph, InputPart, ShapeConfig};

    fn part(id: &str, label: &str, lo: [f64; 3], hi: [f64; 3]) -> InputPart {
        InputPart {
            id: id.into(),
            label: label.into(),
            mesh: Mesh::cuboid(Vec3::from(lo), Vec3::from(hi), 2),
        }
    }

    #[test]
    fn touching_boxes_share_one_point() {
        let parts = [part("a", "x", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), part("b", "y", [0.3, 1.0, 0.3], [0.5, 2.0, 0.5])];
        let (g, _) = build_graph(&parts, ShapeConfig::default()).unwrap();
        let att: Vec<_> = g.edges.iter().filter(|e| !e.is_symmetry()).collect();
        assert_eq!(att.len(), 1);
        let RelationKind::Attachment { points, .. } = &att[0].kind else { unreachable!() };
        assert_eq!(points.len(), 1);
        assert!((points[0].position - Vec3::new(0.4, 1.0, 0.4)).norm() < 1e-9);
    }

    #[test]
    fn overlapping_boxes_attach_at_overlap_centroid() {
        let parts = [part("a", "x", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), part("b", "y", [0.8, 0.2, 0.2], [1.6, 0.6, 0.6])];
        let (g, _) = build_graph(&parts, ShapeConfig::default()).unwrap();
        let RelationKind::Attachment { points, .. } = &g.edges.iter().find(|e| !e.is_symmetry()).unwrap().kind else {
            panic!("no attachment")
        };
        // overlap region is [0.8, 1] x [0.2, 0.6] x [0.2, 0.6], each side padded by eps
        assert!((points[0].position - Vec3::new(0.9, 0.4, 0.4)).norm() < 1e-9, "{:?}", points[0].position);
    }

    #[test]
    fn small_gap_still_attaches_and_large_gap_does_not() {
        let near = [part("a", "x", [0.0; 3], [1.0; 3]), part("b", "y", [1.001, 0.0, 0.0], [2.0, 1.0, 1.0])];
        let (g, _) = build_graph(&near, ShapeConfig::default()).unwrap();
        assert!(g.edges.iter().any(|e| !e.is_symmetry()));
        let far = [part("a", "x", [0.0; 3], [1.0; 3]), part("b", "y", [1.3, 0.0, 0.0], [2.3, 1.0, 1.0])];
        let (g, _) = build_graph(&far, ShapeConfig::default()).unwrap();
        assert!(g.edges.iter().all(|e| e.is_symmetry()));
    }

    #[test]
    fn slats_form_translation_array() {
        let mut parts = Vec::new();
        for k in 0..5 {
            let x = -1.0 + 0.5 * k as f64;
            parts.push(part(&format!("slat{k}"), "slat", [x - 0.1, 0.0, -0.5], [x + 0.1, 0.05, 0.5]));
        }
        let (g, _) = build_graph(&parts, ShapeConfig::default()).unwrap();
        let arrays: Vec<_> = g.edges.iter().filter(|e| e.is_array()).collect();
        assert_eq!(arrays.len(), 1);
        let RelationKind::Symmetry { transform: SymTransform::Translation { offset }, members } = &arrays[0].kind else {
            panic!("expected translation")
        };
        assert_eq!(members.len(), 5);
        assert!((offset - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-12);
        // array members are not paired by reflection
        assert!(g.edges.iter().all(|e| e.is_array() || !matches!(e.kind, RelationKind::Symmetry { .. })));
    }

    #[test]
    fn asymmetric_pair_has_no_symmetry() {
        let parts = [part("a", "x", [0.0; 3], [1.0, 0.5, 0.2]), part("b", "y", [3.0, 0.0, 0.0], [3.3, 0.9, 0.7])];
        let (g, _) = build_graph(&parts, ShapeConfig::default()).unwrap();
        assert!(g.edges.is_empty());
    }
}
