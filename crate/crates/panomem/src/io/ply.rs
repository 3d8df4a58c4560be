use std::path::Path;

use panomem_core::MemPoint;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};

const PROPERTIES: [&str; 7] = [
    "property float x",
    "property float y",
    "property float z",
    "property uchar red",
    "property uchar green",
    "property uchar blue",
    "property float confidence",
];
const RECORD: usize = 4 * 3 + 3 + 4;

/// Binary little-endian PLY with position, 8-bit color and confidence.
pub fn write_ply(path: &Path, points: &[MemPoint]) -> Result<()> {
    let mut out = format!(
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n{}\nend_header\n",
        points.len(),
        PROPERTIES.join("\n")
    )
    .into_bytes();
    out.reserve(points.len() * RECORD);
    for p in points {
        for v in p.xyz {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend(p.rgb.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8));
        out.extend_from_slice(&p.confidence.to_le_bytes());
    }
    write_bytes(path, &out)
}

/// Reads a file written by [`write_ply`], tagging every point with `frame_id`.
pub fn read_ply(path: &Path, frame_id: u32) -> Result<Vec<MemPoint>> {
    let bytes = read_bytes(path)?;
    let marker = b"end_header\n";
    let end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| Error::format(path, "missing end_header"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| Error::format(path, "header is not UTF-8"))?;
    let mut lines = header.lines().map(str::trim);
    if lines.next() != Some("ply") || lines.next() != Some("format binary_little_endian 1.0") {
        return Err(Error::format(path, "expected a binary little-endian PLY"));
    }
    let count: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("element vertex "))
        .and_then(|n| n.trim().parse().ok())
        .ok_or_else(|| Error::format(path, "missing vertex count"))?;
    let props: Vec<&str> = lines.filter(|l| !l.starts_with("comment")).collect();
    if props != PROPERTIES {
        return Err(Error::format(path, "unsupported vertex properties"));
    }
    let body = &bytes[end + marker.len()..];
    if body.len() != count * RECORD {
        return Err(Error::format(
            path,
            format!("expected {} vertex bytes, found {}", count * RECORD, body.len()),
        ));
    }
    let f = |b: &[u8]| f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
    Ok(body
        .chunks_exact(RECORD)
        .map(|r| {
            MemPoint {
                xyz: [f(&r[0..4]), f(&r[4..8]), f(&r[8..12])],
                rgb: [r[12], r[13], r[14]].map(|c| c as f32 / 255.0),
                confidence: f(&r[15..19]),
                frame_id,
            }
        })
        .collect())
}
