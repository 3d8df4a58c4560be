//! Depth-buffered splatting of colored points into equirectangular views,
//! and the inverse lifting of a depth panorama back into points.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{UnitQuaternion, Vector3};
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::geometry::CameraPose;
use crate::memory::MemPoint;
use crate::sphere::{face_coord, pixel_dir, pixel_of_dir, unproject_dir, EquirectImage, BACKGROUND};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterConfig {
    /// 1 writes a single pixel; `r` writes a `(2r−1)²` square.
    pub splat_radius: u32,
    /// Color of pixels no point reached.
    pub background: [f32; 3],
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            splat_radius: 1,
            background: BACKGROUND,
        }
    }
}

/// A rendered view with depth and mask populated.
#[derive(Debug, Clone, PartialEq)]
pub struct Reprojection {
    pub image: EquirectImage,
    pub covered_fraction: f64,
}

impl Reprojection {
    /// Nothing rendered: background everywhere, mask all false.
    pub fn empty(width: usize, height: usize, cfg: &RasterConfig) -> Result<Self> {
        let n = width * height;
        let image = EquirectImage::filled(width, height, cfg.background)?
            .with_depth(vec![f32::INFINITY; n], vec![false; n])?;
        Ok(Self {
            image,
            covered_fraction: 0.0,
        })
    }

    pub fn mask(&self) -> &[bool] {
        self.image.mask.as_deref().unwrap_or(&[])
    }
}

struct DepthBuffer {
    width: usize,
    height: usize,
    depth: Vec<f64>,
    color: Vec<[f32; 3]>,
}

impl DepthBuffer {
    fn new(width: usize, height: usize, background: [f32; 3]) -> Self {
        Self {
            width,
            height,
            depth: vec![f64::INFINITY; width * height],
            color: vec![background; width * height],
        }
    }

    // Strict comparison: on exact ties the earlier point keeps the pixel.
    #[inline]
    fn write(&mut self, col: usize, row: usize, dist: f64, rgb: [f32; 3]) {
        let i = row * self.width + col;
        if dist < self.depth[i] {
            self.depth[i] = dist;
            self.color[i] = rgb;
        }
    }

    #[inline]
    fn splat(&mut self, col: usize, row: usize, radius: u32, dist: f64, rgb: [f32; 3]) {
        if radius <= 1 {
            self.write(col, row, dist, rgb);
            return;
        }
        let k = radius as i64 - 1;
        let (w, h) = (self.width as i64, self.height as i64);
        for dr in -k..=k {
            let r = row as i64 + dr;
            if r < 0 || r >= h {
                continue;
            }
            for dc in -k..=k {
                let c = (col as i64 + dc).rem_euclid(w);
                self.write(c as usize, r as usize, dist, rgb);
            }
        }
    }

    fn into_reprojection(self) -> Result<Reprojection> {
        let mask: Vec<bool> = self.depth.iter().map(|d| d.is_finite()).collect();
        let covered = mask.iter().filter(|&&m| m).count();
        let n = mask.len();
        let depth = self.depth.iter().map(|&d| d as f32).collect();
        let image = EquirectImage::from_rgb(self.width, self.height, self.color)?.with_depth(depth, mask)?;
        Ok(Reprojection {
            image,
            covered_fraction: covered as f64 / n as f64,
        })
    }
}

fn check_view(width: usize, height: usize) -> Result<()> {
    if height == 0 || width != 2 * height {
        return Err(invalid("target view must have width = 2 * height > 0"));
    }
    Ok(())
}

struct ViewTransform {
    center: Vector3<f64>,
    camera_from_world: UnitQuaternion<f64>,
}

impl ViewTransform {
    fn new(pose: &CameraPose) -> Self {
        Self {
            center: pose.center(),
            camera_from_world: pose.world_from_camera().inverse(),
        }
    }

    /// Camera-frame offset and metric distance `|x − c|` of a point.
    #[inline]
    fn project(&self, p: &MemPoint) -> Option<(Vector3<f64>, f64)> {
        let d = p.position() - self.center;
        let dist = d.norm();
        if !(dist > 0.0) || !dist.is_finite() {
            return None;
        }
        Some((self.camera_from_world * d, dist))
    }
}

/// Renders points into a `width × height` panorama seen from `pose`.
///
/// Each pixel keeps the point with the smallest distance `|x − c|`; on exact
/// ties the point that comes first wins, so output does not depend on
/// anything but input order. Unwritten pixels get `cfg.background` and
/// `mask = false`.
pub fn reproject(
    points: &[MemPoint],
    pose: &CameraPose,
    width: usize,
    height: usize,
    cfg: &RasterConfig,
) -> Result<Reprojection> {
    reproject_chunks(core::iter::once(points), pose, width, height, cfg)
}

/// [`reproject`] over several point slices taken in order, without copying.
pub fn reproject_chunks<'a>(
    chunks: impl IntoIterator<Item = &'a [MemPoint]>,
    pose: &CameraPose,
    width: usize,
    height: usize,
    cfg: &RasterConfig,
) -> Result<Reprojection> {
    check_view(width, height)?;
    let view = ViewTransform::new(pose);
    let mut buf = DepthBuffer::new(width, height, cfg.background);
    for chunk in chunks {
        for p in chunk {
            if let Some((cam, dist)) = view.project(p) {
                let (col, row) = pixel_of_dir(&cam, width, height);
                buf.splat(col, row, cfg.splat_radius, dist, p.rgb);
            }
        }
    }
    buf.into_reprojection()
}

/// Ground-truth render of a scene; same kernel as [`reproject`].
pub fn render_scene(
    scene: &[MemPoint],
    pose: &CameraPose,
    width: usize,
    height: usize,
    cfg: &RasterConfig,
) -> Result<Reprojection> {
    reproject(scene, pose, width, height, cfg)
}

/// Renders through six 90° pinhole faces of side `face_size`, then composes
/// the faces into the panorama with nearest-neighbor lookup.
pub fn reproject_via_cubemap(
    points: &[MemPoint],
    pose: &CameraPose,
    width: usize,
    height: usize,
    face_size: usize,
    cfg: &RasterConfig,
) -> Result<Reprojection> {
    check_view(width, height)?;
    if face_size < 2 {
        return Err(invalid("cube face size must be at least 2"));
    }
    let view = ViewTransform::new(pose);
    let mut faces: Vec<DepthBuffer> = (0..6)
        .map(|_| DepthBuffer::new(face_size, face_size, cfg.background))
        .collect();
    let nearest = |x: f64| ((x + 0.5).floor().max(0.0) as usize).min(face_size - 1);
    for p in points {
        if let Some((cam, dist)) = view.project(p) {
            let (face, x, y) = face_coord(&cam, face_size);
            faces[face as usize].splat(nearest(x), nearest(y), 1, dist, p.rgb);
        }
    }
    let mut out = DepthBuffer::new(width, height, cfg.background);
    for row in 0..height {
        for col in 0..width {
            let d = pixel_dir(col, row, width, height);
            let (face, x, y) = face_coord(&d, face_size);
            let src = &faces[face as usize];
            let j = nearest(y) * face_size + nearest(x);
            let i = row * width + col;
            out.depth[i] = src.depth[j];
            out.color[i] = src.color[j];
        }
    }
    out.into_reprojection()
}

/// Lifts covered pixels back to world points: `c + depth · ray(pixel)`.
///
/// Only pixels whose row and column are multiples of `stride` are used. The
/// optional `confidence` raster (row-major, same size) sets per-point
/// confidence, otherwise it is 1.
pub fn unproject(
    img: &EquirectImage,
    pose: &CameraPose,
    stride: usize,
    confidence: Option<&[f32]>,
    frame_id: u32,
) -> Result<Vec<MemPoint>> {
    let depth = img
        .depth
        .as_ref()
        .ok_or_else(|| invalid("unproject needs a depth raster"))?;
    if stride == 0 {
        return Err(invalid("stride must be at least 1"));
    }
    if let Some(c) = confidence {
        if c.len() != img.len() {
            return Err(invalid("confidence raster size mismatch"));
        }
    }
    let (w, h) = (img.width(), img.height());
    let rot = pose.world_from_camera();
    let center = pose.center();
    let mut out = Vec::new();
    for row in (0..h).step_by(stride) {
        for col in (0..w).step_by(stride) {
            let i = row * w + col;
            if !img.is_covered(i) {
                continue;
            }
            let ray = rot * unproject_dir(col, row, w, h);
            let p = center + ray * depth[i] as f64;
            let conf = confidence.map_or(1.0, |c| c[i]);
            out.push(MemPoint::new(p, img.rgb[i], conf, frame_id));
        }
    }
    Ok(out)
}
