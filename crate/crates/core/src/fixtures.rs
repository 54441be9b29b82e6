//! Synthetic segmented shapes built from boxes.
//!
//! Coordinates: `+y` is up, `-z` is the front and `-x` the left.

use crate::geometry::{rotation_matrix, Vec3};
use crate::shape::{InputPart, Mesh};

const SUBDIV: usize = 2;

fn block(id: &str, label: &str, lo: [f64; 3], hi: [f64; 3]) -> InputPart {
    InputPart { id: id.into(), label: label.into(), mesh: Mesh::cuboid(Vec3::from(lo), Vec3::from(hi), SUBDIV) }
}

/// Seat, four legs and a back.
pub fn chair() -> Vec<InputPart> {
    let leg = |id: &str, x: f64, z: f64| block(id, "leg", [x - 0.05, 0.0, z - 0.05], [x + 0.05, 1.0, z + 0.05]);
    vec![
        block("seat", "seat", [-1.0, 1.0, -0.8], [1.0, 1.1, 0.8]),
        leg("leg_fl", -0.8, -0.6),
        leg("leg_fr", 0.8, -0.6),
        leg("leg_bl", -0.8, 0.6),
        leg("leg_br", 0.8, 0.6),
        block("back", "back", [-1.0, 1.1, 0.7], [1.0, 2.3, 0.8]),
    ]
}

/// Top, four legs and a stretcher joining the two front legs.
pub fn table() -> Vec<InputPart> {
    let leg = |id: &str, x: f64, z: f64| block(id, "leg", [x - 0.05, 0.0, z - 0.05], [x + 0.05, 0.9, z + 0.05]);
    vec![
        block("top", "top", [-1.2, 0.9, -0.7], [1.2, 1.0, 0.7]),
        leg("leg_fl", -1.05, -0.55),
        leg("leg_fr", 1.05, -0.55),
        leg("leg_bl", -1.05, 0.55),
        leg("leg_br", 1.05, 0.55),
        block("stretcher", "stretcher", [-1.0, 0.2, -0.58], [1.0, 0.3, -0.52]),
    ]
}

/// Box carcass with a door hinged on the left panel and a handle on the door.
pub fn cabinet() -> Vec<InputPart> {
    vec![
        block("side_l", "side panel", [-0.5, 0.0, -0.43], [-0.48, 1.2, 0.4]),
        block("side_r", "side panel", [0.48, 0.0, -0.43], [0.5, 1.2, 0.4]),
        block("top", "top", [-0.48, 1.18, -0.4], [0.48, 1.2, 0.4]),
        block("bottom", "bottom", [-0.48, 0.0, -0.4], [0.48, 0.02, 0.4]),
        block("back", "back panel", [-0.48, 0.02, 0.38], [0.48, 1.18, 0.4]),
        block("door", "door", [-0.48, 0.05, -0.43], [0.46, 1.15, -0.4]),
        block("handle", "handle", [0.36, 0.5, -0.46], [0.4, 0.7, -0.43]),
    ]
}

/// Five equally spaced slats on two supports.
pub fn bench() -> Vec<InputPart> {
    let mut parts = vec![
        block("support_l", "support", [-1.1, 0.0, -0.5], [-1.0, 0.45, 0.5]),
        block("support_r", "support", [1.0, 0.0, -0.5], [1.1, 0.45, 0.5]),
    ];
    for k in 0..5 {
        let z = -0.44 + 0.22 * k as f64;
        parts.push(block(&format!("slat{k}"), "slat", [-1.2, 0.45, z - 0.06], [1.2, 0.5, z + 0.06]));
    }
    parts
}

/// Two side panels holding three stacked shelves.
pub fn shelf() -> Vec<InputPart> {
    let mut parts = vec![
        block("side_l", "side panel", [-0.6, 0.0, -0.2], [-0.58, 1.5, 0.2]),
        block("side_r", "side panel", [0.58, 0.0, -0.2], [0.6, 1.5, 0.2]),
    ];
    for k in 0..3 {
        let y = 0.1 + 0.6 * k as f64;
        parts.push(block(&format!("shelf{k}"), "shelf", [-0.58, y, -0.2], [0.58, y + 0.03, 0.2]));
    }
    parts
}

/// Pole with a shade, standing on a hub with three feet at 120°.
pub fn lamp() -> Vec<InputPart> {
    let mut parts = vec![
        block("hub", "hub", [-0.06, 0.0, -0.06], [0.06, 0.1, 0.06]),
        block("pole", "pole", [-0.03, 0.1, -0.03], [0.03, 1.5, 0.03]),
        block("shade", "shade", [-0.25, 1.3, -0.25], [0.25, 1.6, 0.25]),
    ];
    let foot = Mesh::cuboid(Vec3::new(0.04, 0.0, -0.03), Vec3::new(0.44, 0.04, 0.03), SUBDIV);
    for k in 0..3 {
        // feet point along +z, then every 120° around the pole
        let angle = -std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::FRAC_PI_3;
        let r = rotation_matrix(&Vec3::y(), angle);
        parts.push(InputPart { id: format!("foot{k}"), label: "foot".into(), mesh: foot.transformed(|p| r * p) });
    }
    parts
}

/// A base slab carrying a 7 × 7 grid of posts (50 parts).
pub fn grid50() -> Vec<InputPart> {
    let mut parts = vec![block("base", "base", [-1.5, 0.0, -1.5], [1.5, 0.1, 1.5])];
    for i in 0..7 {
        for j in 0..7 {
            let x = -1.2 + 0.4 * i as f64;
            let z = -1.2 + 0.4 * j as f64;
            let h = 0.5 + 0.05 * ((i + 2 * j) % 5) as f64;
            parts.push(block(&format!("post{i}{j}"), "post", [x - 0.05, 0.1, z - 0.05], [x + 0.05, 0.1 + h, z + 0.05]));
        }
    }
    parts
}

pub const NAMES: [&str; 7] = ["chair", "table", "cabinet", "bench", "shelf", "lamp", "grid50"];

pub fn by_name(name: &str) -> Option<Vec<InputPart>> {
    Some(match name {
        "chair" => chair(),
        "table" => table(),
        "cabinet" => cabinet(),
        "bench" => bench(),
        "shelf" => shelf(),
        "lamp" => lamp(),
        "grid50" => grid50(),
        _ => return None,
    })
}
