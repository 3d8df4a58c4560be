use std::path::Path;

use panomem_core::{EquirectImage, PluckerField};
use serde::{Deserialize, Serialize};

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};

/// One-line JSON header preceding a little-endian `f32` tensor stored
/// row-major as `[h][w][channels]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub w: usize,
    pub h: usize,
    pub channels: usize,
}

pub fn write_tensor(path: &Path, header: TensorHeader, data: &[f32]) -> Result<()> {
    if data.len() != header.w * header.h * header.channels {
        return Err(Error::usage("tensor data does not match its header"));
    }
    let mut out = serde_json::to_vec(&header).map_err(|e| Error::format(path, e.to_string()))?;
    out.push(b'\n');
    out.reserve(data.len() * 4);
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path, &out)
}

pub fn read_tensor(path: &Path) -> Result<(TensorHeader, Vec<f32>)> {
    let bytes = read_bytes(path)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(path, "missing JSON header line"))?;
    let header: TensorHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::format(path, format!("bad header: {e}")))?;
    let body = &bytes[nl + 1..];
    let expect = header.w * header.h * header.channels * 4;
    if body.len() != expect {
        return Err(Error::format(
            path,
            format!("expected {expect} data bytes, found {}", body.len()),
        ));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((header, data))
}

/// Depth raster; uncovered pixels are stored as `+inf`.
pub fn write_depth(path: &Path, img: &EquirectImage) -> Result<()> {
    let n = img.len();
    let depth: Vec<f32> = (0..n)
        .map(|i| {
            if img.is_covered(i) {
                img.depth.as_ref().map_or(f32::INFINITY, |d| d[i])
            } else {
                f32::INFINITY
            }
        })
        .collect();
    write_tensor(
        path,
        TensorHeader {
            w: img.width(),
            h: img.height(),
            channels: 1,
        },
        &depth,
    )
}

/// Returns `(width, height, depth)`.
pub fn read_depth(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let (h, data) = read_tensor(path)?;
    if h.channels != 1 {
        return Err(Error::format(path, format!("depth raster has {} channels", h.channels)));
    }
    Ok((h.w, h.h, data))
}

/// `[d, c × d]` per pixel as six `f32` channels.
pub fn write_plucker(path: &Path, field: &PluckerField) -> Result<()> {
    let data: Vec<f32> = field.data().iter().flatten().map(|&v| v as f32).collect();
    write_tensor(
        path,
        TensorHeader {
            w: field.width(),
            h: field.height(),
            channels: 6,
        },
        &data,
    )
}

pub fn read_plucker(path: &Path) -> Result<PluckerField> {
    let (h, data) = read_tensor(path)?;
    if h.channels != 6 {
        return Err(Error::format(path, format!("Plücker file has {} channels, expected 6", h.channels)));
    }
    let px = data
        .chunks_exact(6)
        .map(|c| [c[0], c[1], c[2], c[3], c[4], c[5]].map(f64::from))
        .collect();
    PluckerField::from_data(h.w, h.h, px).map_err(|e| Error::format(path, e.to_string()))
}
