//! Binary evaluation frames.
//!
//! All integers are `u32` and all reals `f32`, little-endian. Every block
//! starts on a 4-byte boundary so the float blocks can be viewed in place.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "SPEV"
//! 4       4           version (1)
//! 8       4           part count P
//! 12      4           vertex count V (all parts)
//! 16      4           name block length N (multiple of 4)
//! 20      16 * P      part table: source node index, first vertex,
//!                     vertex count, name length in bytes
//! ..      N           part ids, UTF-8, back to back, zero padded
//! ..      96 * P      cage corners, 8 * xyz per part
//! ..      12 * V      vertices, xyz
//! ```
//!
//! Corner `k` of a cage lies on the positive side of local axis `i` when
//! bit `i` of `k` is set. Parts appear in evaluation order: the graph's
//! nodes first, then parts created by count edits, whose source node index
//! names the part whose triangles they reuse.

use thiserror::Error;

use crate::dsl::DeformedShape;
use crate::shape::ShapeGraph;

pub const MAGIC: &[u8; 4] = b"SPEV";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;
pub const ENTRY_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame truncated at byte {0}")]
    Truncated(usize),
    #[error("not an evaluation frame")]
    BadMagic,
    #[error("unsupported frame version {0}")]
    Version(u32),
    #[error("part name is not UTF-8")]
    Name,
    #[error("part table does not match the vertex count")]
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FramePart {
    pub id: String,
    pub source: u32,
    pub corners: [[f32; 3]; 8],
    pub vertices: Vec<[f32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    pub parts: Vec<FramePart>,
}

fn put(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&(v as f32).to_le_bytes());
}

pub fn encode(shape: &DeformedShape, graph: &ShapeGraph) -> Vec<u8> {
    let total: usize = shape.parts.iter().map(|p| p.vertices.len()).sum();
    let names: usize = shape.parts.iter().map(|p| p.id.len()).sum();
    let padded = names.div_ceil(4) * 4;
    let mut out = Vec::with_capacity(HEADER_LEN + shape.parts.len() * (ENTRY_LEN + 96) + padded + total * 12);
    out.extend_from_slice(MAGIC);
    put(&mut out, VERSION);
    put(&mut out, shape.parts.len() as u32);
    put(&mut out, total as u32);
    put(&mut out, padded as u32);
    let mut first = 0u32;
    for p in &shape.parts {
        let source = graph.node_index(&p.source).unwrap_or(u32::MAX as usize) as u32;
        put(&mut out, source);
        put(&mut out, first);
        put(&mut out, p.vertices.len() as u32);
        put(&mut out, p.id.len() as u32);
        first += p.vertices.len() as u32;
    }
    for p in &shape.parts {
        out.extend_from_slice(p.id.as_bytes());
    }
    out.resize(out.len() + padded - names, 0);
    for p in &shape.parts {
        for c in &p.corners {
            put_f(&mut out, c.x);
            put_f(&mut out, c.y);
            put_f(&mut out, c.z);
        }
    }
    for p in &shape.parts {
        for v in &p.vertices {
            put_f(&mut out, v.x);
            put_f(&mut out, v.y);
            put_f(&mut out, v.z);
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FrameError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(FrameError::Truncated(self.bytes.len()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, FrameError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn xyz(&mut self) -> Result<[f32; 3], FrameError> {
        let b = self.take(12)?;
        let f = |i: usize| f32::from_le_bytes(b[i..i + 4].try_into().expect("4 bytes"));
        Ok([f(0), f(4), f(8)])
    }
}

pub fn decode(bytes: &[u8]) -> Result<Frame, FrameError> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(4)? != MAGIC {
        return Err(FrameError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FrameError::Version(version));
    }
    let n_parts = r.u32()? as usize;
    let n_verts = r.u32()? as usize;
    let names_len = r.u32()? as usize;
    let mut table = Vec::with_capacity(n_parts.min(bytes.len() / ENTRY_LEN));
    for _ in 0..n_parts {
        table.push([r.u32()?, r.u32()?, r.u32()?, r.u32()?]);
    }
    let names = r.take(names_len)?;
    let mut at = 0usize;
    let mut parts = Vec::with_capacity(table.len());
    for &[source, _, count, len] in &table {
        let end = at + len as usize;
        let id = names.get(at..end).ok_or(FrameError::Inconsistent)?;
        let id = std::str::from_utf8(id).map_err(|_| FrameError::Name)?.to_string();
        at = end;
        let mut corners = [[0.0f32; 3]; 8];
        for c in corners.iter_mut() {
            *c = r.xyz()?;
        }
        parts.push(FramePart { id, source, corners, vertices: Vec::with_capacity(count as usize) });
    }
    let mut expected = 0usize;
    for entry in &table {
        if entry[1] as usize != expected {
            return Err(FrameError::Inconsistent);
        }
        expected += entry[2] as usize;
    }
    if expected != n_verts {
        return Err(FrameError::Inconsistent);
    }
    let mut out = Vec::with_capacity(parts.len());
    for (mut p, entry) in parts.into_iter().zip(&table) {
        for _ in 0..entry[2] {
            p.vertices.push(r.xyz()?);
        }
        out.push(p);
    }
    Ok(Frame { parts: out })
}
