//! Oriented bounding boxes from part vertices.

use nalgebra::{Matrix3, SymmetricEigen};

use super::cage::Hexahedron;
use crate::geometry::{plane_basis, Vec3};

/// Axes within this angle of a global axis are snapped onto it.
const SNAP_DEGREES: f64 = 5.0;

/// Result of fitting a cage: the box and whether it was thickened.
#[derive(Debug, Clone)]
pub struct FittedCage {
    pub cage: Hexahedron,
    pub planar: bool,
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull of 2D points (monotone chain).
fn hull_2d(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(lower[lower.len() - 2], lower[lower.len() - 1], *p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(upper[upper.len() - 2], upper[upper.len() - 1], *p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn box_volume(points: &[Vec3], axes: &[Vec3; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let (lo, hi) = points
                .iter()
                .map(|p| p.dot(&axes[k]))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
            (hi - lo).max(0.0)
        })
        .product()
}

/// Direction in the plane of `(e1, e2)` whose bounding rectangle is smallest.
fn min_area_direction(points: &[Vec3], e1: &Vec3, e2: &Vec3) -> Vec3 {
    let flat: Vec<[f64; 2]> = points.iter().map(|p| [p.dot(e1), p.dot(e2)]).collect();
    let hull = hull_2d(flat);
    let mut candidates = vec![0.0];
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let theta = (b[1] - a[1]).atan2(b[0] - a[0]).rem_euclid(std::f64::consts::FRAC_PI_2);
        candidates.push(theta);
    }
    let area = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &hull {
            let u = c * p[0] + s * p[1];
            let v = -s * p[0] + c * p[1];
            u0 = u0.min(u);
            u1 = u1.max(u);
            v0 = v0.min(v);
            v1 = v1.max(v);
        }
        (u1 - u0) * (v1 - v0)
    };
    let mut best = (area(0.0), 0.0);
    for &t in &candidates[1..] {
        let a = area(t);
        if a < best.0 * (1.0 - 1e-9) {
            best = (a, t);
        }
    }
    let (s, c) = best.1.sin_cos();
    e1 * c + e2 * s
}

/// Oriented box around `points`.
///
/// The primary direction is the principal axis with the most distinct
/// variance;
/// the other two come from the minimum-area rectangle in the orthogonal
/// plane. Local axis `k` is the direction closest to global axis `k`, signed
/// to point along it, and directions within 5° of a global axis are snapped
/// onto it. The global-axis box is used whenever it is no larger. Extents
/// thinner than `planar_below` are padded to `min_thickness`.
pub fn fit_obb(points: &[Vec3], planar_below: f64, min_thickness: f64) -> FittedCage {
    let n = points.len().max(1) as f64;
    let mean = points.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let vals = eig.eigenvalues;
    let vecs: Vec<Vec3> = (0..3).map(|i| eig.eigenvectors.column(i).into_owned()).collect();
    let cos_snap = SNAP_DEGREES.to_radians().cos();

    // the principal direction with the most distinct variance is stable even
    // when the other two share an eigenvalue
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let distinct =
        |i: usize| (0..3).filter(|&j| j != i).map(|j| (vals[i] - vals[j]).abs()).fold(f64::INFINITY, f64::min);
    let i = (0..3).fold(0, |b, i| if distinct(i) > distinct(b) + 1e-9 * scale { i } else { b });
    let k = vecs[i].iamax();
    let (primary, e1, e2) = if vecs[i][k].abs() >= cos_snap {
        (Vec3::ith(k, 1.0), Vec3::ith((k + 1) % 3, 1.0), Vec3::ith((k + 2) % 3, 1.0))
    } else {
        let p = vecs[i].normalize();
        let (e1, e2) = plane_basis(&p);
        (p, e1, e2)
    };
    let u = min_area_direction(points, &e1, &e2);
    let dirs = [primary, u, primary.cross(&u)];

    // assign directions to global slots greedily by alignment
    let mut slots: [Option<Vec3>; 3] = [None; 3];
    let mut used = [false; 3];
    for _ in 0..3 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, d) in dirs.iter().enumerate() {
            if used[i] {
                continue;
            }
            for (g, slot) in slots.iter().enumerate() {
                if slot.is_none() && best.is_none_or(|(b, _, _)| d[g].abs() > b + 1e-12) {
                    best = Some((d[g].abs(), i, g));
                }
            }
        }
        let (_, i, g) = best.expect("three directions");
        used[i] = true;
        slots[g] = Some(if dirs[i][g] < 0.0 { -dirs[i] } else { dirs[i] });
    }
    let raw: [Vec3; 3] = slots.map(|d| d.expect("assigned"));
    let snapped: [bool; 3] = std::array::from_fn(|k| raw[k][k] >= cos_snap);
    let mut order: Vec<usize> = (0..3).filter(|&k| snapped[k]).collect();
    order.extend((0..3).filter(|&k| !snapped[k]));
    let mut axes = [Vec3::zeros(); 3];
    let first = order[0];
    axes[first] = if snapped[first] { Vec3::ith(first, 1.0) } else { raw[first].normalize() };
    let second = order[1];
    axes[second] = if snapped[second] {
        Vec3::ith(second, 1.0)
    } else {
        (raw[second] - axes[first] * raw[second].dot(&axes[first])).normalize()
    };
    let third = order[2];
    axes[third] = if snapped[third] {
        Vec3::ith(third, 1.0)
    } else {
        axes[(third + 1) % 3].cross(&axes[(third + 2) % 3])
    };

    let global = [Vec3::x(), Vec3::y(), Vec3::z()];
    let use_global = snapped.iter().all(|s| *s) || box_volume(points, &global) <= box_volume(points, &axes) * (1.0 + 1e-9);
    if use_global {
        axes = global;
    }

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            let t = if use_global { p[k] } else { p.dot(&axes[k]) };
            lo[k] = lo[k].min(t);
            hi[k] = hi[k].max(t);
        }
    }
    let mut planar = false;
    for k in 0..3 {
        if hi[k] - lo[k] < planar_below {
            planar = true;
            let mid = (lo[k] + hi[k]) / 2.0;
            lo[k] = mid - min_thickness / 2.0;
            hi[k] = mid + min_thickness / 2.0;
        }
    }
    FittedCage { cage: Hexahedron::from_bounds(axes, lo, hi), planar }
}
