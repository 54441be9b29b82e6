//! Decoder for the service's little-endian evaluation frames: a 20-byte
//! header (`SPEV`, version, part count, vertex count, name block length),
//! a 16-byte entry per part (source index, first vertex, vertex count, name
//! length), the zero-padded name block, 24 floats of cage corners per part
//! and 3 floats per vertex.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame truncated")]
    Truncated,
    #[error("not an evaluation frame")]
    BadMagic,
    #[error("unsupported frame version {0}")]
    Version(u32),
    #[error("malformed part table")]
    Table,
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

fn u32_at(b: &[u8], at: usize) -> Result<u32, FrameError> {
    b.get(at..at + 4).map(|s| u32::from_le_bytes(s.try_into().unwrap())).ok_or(FrameError::Truncated)
}

fn xyz_at(b: &[u8], at: usize) -> Result<[f32; 3], FrameError> {
    let s = b.get(at..at + 12).ok_or(FrameError::Truncated)?;
    let f = |i: usize| f32::from_le_bytes(s[i..i + 4].try_into().unwrap());
    Ok([f(0), f(4), f(8)])
}

pub fn decode_frame(b: &[u8]) -> Result<Frame, FrameError> {
    if b.get(0..4).ok_or(FrameError::Truncated)? != b"SPEV" {
        return Err(FrameError::BadMagic);
    }
    let version = u32_at(b, 4)?;
    if version != 1 {
        return Err(FrameError::Version(version));
    }
    let n = u32_at(b, 8)? as usize;
    let n_verts = u32_at(b, 12)? as usize;
    let names_len = u32_at(b, 16)? as usize;
    let table = 20;
    let names = table + 16 * n;
    let cages = names + names_len;
    let verts = cages + 96 * n;
    if b.len() != verts + 12 * n_verts {
        return Err(FrameError::Truncated);
    }
    let mut name_at = names;
    let mut parts = Vec::with_capacity(n);
    for i in 0..n {
        let e = table + 16 * i;
        let (source, first, count, len) = (u32_at(b, e)?, u32_at(b, e + 4)? as usize, u32_at(b, e + 8)? as usize, u32_at(b, e + 12)? as usize);
        if name_at + len > cages || first + count > n_verts {
            return Err(FrameError::Table);
        }
        let id = String::from_utf8(b[name_at..name_at + len].to_vec()).map_err(|_| FrameError::Table)?;
        name_at += len;
        let mut corners = [[0.0; 3]; 8];
        for (k, c) in corners.iter_mut().enumerate() {
            *c = xyz_at(b, cages + 96 * i + 12 * k)?;
        }
        let vertices = (first..first + count).map(|v| xyz_at(b, verts + 12 * v)).collect::<Result<_, _>>()?;
        parts.push(FramePart { id, source, corners, vertices });
    }
    Ok(Frame { parts })
}
