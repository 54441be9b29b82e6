//! Hexahedral cages and trilinear cage coordinates.
//!
//! Corner convention: corner `i` sits at local signs `(s0, s1, s2)` with
//! `s_k = +1` when bit `k` of `i` is set and `-1` otherwise:
//!
//! | corner | u | v | w |
//! |--------|---|---|---|
//! | 0      | - | - | - |
//! | 1      | + | - | - |
//! | 2      | - | + | - |
//! | 3      | + | + | - |
//! | 4      | - | - | + |
//! | 5      | + | - | + |
//! | 6      | - | + | + |
//! | 7      | + | + | + |
//!
//! Faces: `2k` is the `-k` face, `2k + 1` the `+k` face.
//! Edges: `4k + j` runs along axis `k`; with `(a, b)` the other two axes in
//! ascending order, bit 0 of `j` selects the side of `a` and bit 1 the side
//! of `b`.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

/// Sub-element of a cage targeted by a feature edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    Face(u8),
    Edge(u8),
    Corner(u8),
}

impl Feature {
    /// Corner indices moved by an edit on this feature.
    pub fn corners(&self) -> Vec<usize> {
        match *self {
            Feature::Face(f) => {
                let (k, side) = ((f / 2) as usize, (f % 2) as usize);
                (0..8).filter(|c| (c >> k) & 1 == side).collect()
            }
            Feature::Edge(e) => {
                let (k, j) = ((e / 4) as usize, (e % 4) as usize);
                let others: Vec<usize> = (0..3).filter(|&a| a != k).collect();
                let base = ((j & 1) << others[0]) | (((j >> 1) & 1) << others[1]);
                vec![base, base | (1 << k)]
            }
            Feature::Corner(c) => vec![c as usize],
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Feature::Face(f) => f < 6,
            Feature::Edge(e) => e < 12,
            Feature::Corner(c) => c < 8,
        }
    }

    pub fn all() -> impl Iterator<Item = Feature> {
        (0..6)
            .map(Feature::Face)
            .chain((0..12).map(Feature::Edge))
            .chain((0..8).map(Feature::Corner))
    }

    /// Feature whose corner set equals `set` (order-insensitive).
    pub fn from_corner_set(set: &[usize]) -> Option<Feature> {
        let mut want = set.to_vec();
        want.sort_unstable();
        Feature::all().find(|f| {
            let mut c = f.corners();
            c.sort_unstable();
            c == want
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hexahedron {
    #[serde(with = "flat_corners")]
    pub corners: [Vec3; 8],
    pub center: Vec3,
    pub axes: [Vec3; 3],
    pub half_extents: [f64; 3],
}

/// Corners stored as 24 floats, corner-major.
mod flat_corners {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::geometry::Vec3;

    pub fn serialize<S: Serializer>(c: &[Vec3; 8], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(c.iter().flat_map(|v| [v.x, v.y, v.z]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Vec3; 8], D::Error> {
        let flat = Vec::<f64>::deserialize(d)?;
        if flat.len() != 24 {
            return Err(D::Error::invalid_length(flat.len(), &"24 corner coordinates"));
        }
        Ok(std::array::from_fn(|i| Vec3::new(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2])))
    }
}

pub fn corner_sign(corner: usize, axis: usize) -> f64 {
    if (corner >> axis) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn trilinear_weights(t: [f64; 3]) -> [f64; 8] {
    let mut w = [0.0; 8];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = (0..3).map(|k| if (i >> k) & 1 == 1 { t[k] } else { 1.0 - t[k] }).product();
    }
    w
}

impl Hexahedron {
    /// Box from per-axis projection bounds `lo[k] <= p · axes[k] <= hi[k]`.
    pub fn from_bounds(axes: [Vec3; 3], lo: [f64; 3], hi: [f64; 3]) -> Hexahedron {
        let mut corners = [Vec3::zeros(); 8];
        for (i, c) in corners.iter_mut().enumerate() {
            *c = (0..3).fold(Vec3::zeros(), |acc, k| {
                acc + axes[k] * if (i >> k) & 1 == 1 { hi[k] } else { lo[k] }
            });
        }
        let half_extents = [(hi[0] - lo[0]) / 2.0, (hi[1] - lo[1]) / 2.0, (hi[2] - lo[2]) / 2.0];
        Hexahedron { center: (corners[0] + corners[7]) / 2.0, corners, axes, half_extents }
    }

    /// Cage through arbitrary corners; the frame is estimated from them.
    pub fn from_corners(corners: [Vec3; 8]) -> Hexahedron {
        let center = corners.iter().fold(Vec3::zeros(), |a, c| a + c) / 8.0;
        let mut axes = [Vec3::zeros(); 3];
        let mut half_extents = [0.0; 3];
        for k in 0..3 {
            let d = (0..8).fold(Vec3::zeros(), |a, i| a + corners[i] * corner_sign(i, k)) / 4.0;
            half_extents[k] = d.norm() / 2.0;
            axes[k] = if d.norm() > 0.0 { d / d.norm() } else { Vec3::ith(k, 1.0) };
        }
        Hexahedron { corners, center, axes, half_extents }
    }

    pub fn feature_center(&self, f: Feature) -> Vec3 {
        match f {
            Feature::Face(i) => {
                let k = (i / 2) as usize;
                let side = (i % 2) as usize;
                // midpoint of the face diagonal keeps the face coordinate exact
                let a = side << k;
                let b = a | (0..3).filter(|&o| o != k).fold(0, |m, o| m | (1 << o));
                (self.corners[a] + self.corners[b]) / 2.0
            }
            Feature::Edge(_) | Feature::Corner(_) => {
                let cs = f.corners();
                cs.iter().fold(Vec3::zeros(), |a, &c| a + self.corners[c]) / cs.len() as f64
            }
        }
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.iter().product::<f64>()
    }

    pub fn point_at(&self, t: [f64; 3]) -> Vec3 {
        let w = trilinear_weights(t);
        (0..8).fold(Vec3::zeros(), |a, i| a + self.corners[i] * w[i])
    }

    /// Trilinear parameters of `p` (in `[0, 1]^3` inside the cage), by Newton
    /// iteration seeded from the cage frame.
    pub fn trilinear_params(&self, p: &Vec3) -> [f64; 3] {
        let mut t = [0.5; 3];
        for k in 0..3 {
            if self.half_extents[k] > 0.0 {
                t[k] = ((p - self.corners[0]).dot(&self.axes[k])) / (2.0 * self.half_extents[k]);
            }
        }
        let scale = self.half_extents.iter().cloned().fold(0.0, f64::max).max(1e-300);
        for _ in 0..50 {
            let r = self.point_at(t) - p;
            if r.norm() <= 1e-15 * scale {
                break;
            }
            let mut jac = nalgebra::Matrix3::zeros();
            for k in 0..3 {
                let mut col = Vec3::zeros();
                for i in 0..8 {
                    let dw: f64 = (0..3)
                        .map(|m| {
                            let bit = (i >> m) & 1 == 1;
                            if m == k {
                                if bit {
                                    1.0
                                } else {
                                    -1.0
                                }
                            } else if bit {
                                t[m]
                            } else {
                                1.0 - t[m]
                            }
                        })
                        .product();
                    col += self.corners[i] * dw;
                }
                jac.set_column(k, &col);
            }
            let Some(inv) = jac.try_inverse() else { break };
            let dt = inv * r;
            for k in 0..3 {
                t[k] -= dt[k];
            }
            if dt.norm() < 1e-16 {
                break;
            }
        }
        t
    }

    /// Trilinear weights of `p` (sum to one; reproduce `p` at rest).
    pub fn weights(&self, p: &Vec3) -> [f64; 8] {
        trilinear_weights(self.trilinear_params(p))
    }

    /// Reproduce a point from weights and (possibly deformed) corners.
    pub fn combine(weights: &[f64; 8], corners: &[Vec3; 8]) -> Vec3 {
        (0..8).fold(Vec3::zeros(), |a, i| a + corners[i] * weights[i])
    }

    /// Distance by which `p` lies outside the cage, measured along the frame.
    pub fn outside_distance(&self, p: &Vec3) -> f64 {
        let t = self.trilinear_params(p);
        (0..3)
            .map(|k| {
                let len = 2.0 * self.half_extents[k];
                let over = (-t[k]).max(t[k] - 1.0).max(0.0);
                over * len
            })
            .fold(0.0, f64::max)
    }

    pub fn contains_rest(&self, p: &Vec3, margin: f64) -> bool {
        (0..3).all(|k| ((p - self.center).dot(&self.axes[k])).abs() <= self.half_extents[k] + margin)
    }

    pub fn corner_array(&self) -> [[f64; 3]; 8] {
        self.corners.map(|c| [c.x, c.y, c.z])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> Hexahedron {
        Hexahedron::from_bounds([Vec3::x(), Vec3::y(), Vec3::z()], [0.0; 3], [1.0; 3])
    }

    #[test]
    fn corner_convention() {
        let h = unit_cube();
        assert_eq!(h.corners[0], Vec3::zeros());
        assert_eq!(h.corners[1], Vec3::x());
        assert_eq!(h.corners[6], Vec3::new(0.0, 1.0, 1.0));
        assert_eq!(Feature::Face(1).corners(), vec![1, 3, 5, 7]);
        assert_eq!(Feature::Edge(0).corners(), vec![0, 1]);
        assert_eq!(Feature::Edge(7).corners(), vec![5, 7]);
        assert_eq!(Feature::Edge(11).corners(), vec![3, 7]);
        assert_eq!(h.feature_center(Feature::Face(3)), Vec3::new(0.5, 1.0, 0.5));
        let all: Vec<Feature> = Feature::all().collect();
        assert_eq!(all.len(), 26);
        for f in all {
            assert_eq!(Feature::from_corner_set(&f.corners()), Some(f));
        }
    }

    #[test]
    fn weights_at_corner_and_center() {
        let h = unit_cube();
        let w = h.weights(&h.corners[5]);
        for (i, wi) in w.iter().enumerate() {
            assert_eq!(*wi, if i == 5 { 1.0 } else { 0.0 });
        }
        let w = h.weights(&Vec3::new(0.5, 0.5, 0.5));
        assert!(w.iter().all(|wi| (wi - 0.125).abs() < 1e-15));
    }

    #[test]
    fn sheared_cage_reconstruction() {
        let mut corners = unit_cube().corners;
        for c in corners.iter_mut() {
            c.x += 0.3 * c.y + 0.1 * c.z * c.y;
            c.z += 0.2 * c.x;
        }
        let h = Hexahedron::from_corners(corners);
        // oracle: points generated from known parameters
        for t in [[0.2, 0.3, 0.9], [0.5, 0.5, 0.5], [0.95, 0.05, 0.4]] {
            let p = h.point_at(t);
            let w = h.weights(&p);
            assert!((Hexahedron::combine(&w, &h.corners) - p).norm() < 1e-9);
            let back = h.trilinear_params(&p);
            for k in 0..3 {
                assert!((back[k] - t[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn outside_distance_measures_overshoot() {
        let h = unit_cube();
        assert_eq!(h.outside_distance(&Vec3::new(0.5, 0.5, 0.5)), 0.0);
        assert!((h.outside_distance(&Vec3::new(1.2, 0.5, 0.5)) - 0.2).abs() < 1e-12);
    }
}
