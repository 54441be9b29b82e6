//! Small geometric helpers shared by the shape and solver modules.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;

pub fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

pub fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Round `c` to 12 significant digits when that only removes float noise.
pub fn snap(c: f64) -> f64 {
    if c.abs() < 1e-13 {
        return 0.0;
    }
    let r: f64 = format!("{c:.11e}").parse().unwrap_or(c);
    if (r - c).abs() <= 1e-14 * c.abs() {
        r
    } else {
        c
    }
}

pub fn snap_vec(v: &Vec3) -> Vec3 {
    v.map(snap)
}

/// Rotation matrix about a unit axis (Rodrigues).
pub fn rotation_matrix(axis: &Vec3, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    let k = Matrix3::new(0.0, -axis.z, axis.y, axis.z, 0.0, -axis.x, -axis.y, axis.x, 0.0);
    Matrix3::identity() * c + k * s + axis * axis.transpose() * (1.0 - c)
}

/// Two unit vectors completing `axis` to a right-handed orthonormal basis.
pub fn plane_basis(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

/// Closest point to `p` on triangle `abc`.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Half-space `normal · p <= offset`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: f64,
}

/// Convex polytope kept as a list of planar faces (vertex loops).
#[derive(Debug, Clone)]
pub struct ConvexPolytope {
    faces: Vec<Vec<Vec3>>,
}

impl ConvexPolytope {
    pub fn aabb(lo: Vec3, hi: Vec3) -> ConvexPolytope {
        let c = |i: usize| {
            Vec3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        };
        // outward-facing loops
        let quads = [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]];
        ConvexPolytope { faces: quads.iter().map(|q| q.iter().map(|&i| c(i)).collect()).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Keep the part of the polytope inside `h`.
    pub fn clip(&mut self, h: &HalfSpace) {
        let eps = 1e-12;
        let dist = |p: &Vec3| h.normal.dot(p) - h.offset;
        if self.vertices().all(|p| dist(p) <= eps) {
            return;
        }
        // a face already lying in the plane closes the cut by itself
        let has_face_on_plane = self.faces.iter().any(|f| f.iter().all(|p| dist(p).abs() <= eps));
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut cap: Vec<Vec3> = Vec::new();
        for face in &self.faces {
            let mut out: Vec<Vec3> = Vec::with_capacity(face.len() + 1);
            for i in 0..face.len() {
                let a = face[i];
                let b = face[(i + 1) % face.len()];
                let da = h.normal.dot(&a) - h.offset;
                let db = h.normal.dot(&b) - h.offset;
                if da <= eps {
                    out.push(a);
                }
                if (da < -eps && db > eps) || (da > eps && db < -eps) {
                    let t = da / (da - db);
                    let p = a + (b - a) * t;
                    out.push(p);
                    cap.push(p);
                } else if da.abs() <= eps {
                    cap.push(a);
                }
            }
            if out.len() >= 3 {
                faces.push(out);
            }
        }
        if cap.len() >= 3 && !has_face_on_plane {
            let center = cap.iter().fold(Vec3::zeros(), |acc, p| acc + p) / cap.len() as f64;
            let (e1, e2) = plane_basis(&h.normal.normalize());
            let mut pts: Vec<(f64, Vec3)> =
                cap.iter().map(|p| ((p - center).dot(&e2).atan2((p - center).dot(&e1)), *p)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| (a.1 - b.1).norm() < 1e-12);
            if pts.len() > 1 && (pts[0].1 - pts[pts.len() - 1].1).norm() < 1e-12 {
                pts.pop();
            }
            if pts.len() >= 3 {
                faces.push(pts.into_iter().map(|(_, p)| p).collect());
            }
        }
        self.faces = faces;
    }

    /// Volume and volume centroid; `None` for (near-)empty polytopes.
    pub fn volume_centroid(&self) -> Option<(f64, Vec3)> {
        let verts: Vec<&Vec3> = self.faces.iter().flatten().collect();
        if verts.is_empty() {
            return None;
        }
        let apex = verts.iter().fold(Vec3::zeros(), |acc, p| acc + *p) / verts.len() as f64;
        let mut vol = 0.0;
        let mut moment = Vec3::zeros();
        for face in &self.faces {
            for i in 1..face.len() - 1 {
                let (a, b, c) = (face[0], face[i], face[i + 1]);
                let v = ((a - apex).cross(&(b - apex))).dot(&(c - apex)).abs() / 6.0;
                vol += v;
                moment += (apex + a + b + c) / 4.0 * v;
            }
        }
        (vol > 1e-300).then(|| (vol, moment / vol))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vec3> {
        self.faces.iter().flatten()
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let mut it = self.faces.iter().flatten();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
    }
}
