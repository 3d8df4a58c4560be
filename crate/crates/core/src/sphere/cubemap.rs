use alloc::vec::Vec;

use nalgebra::Vector3;
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use super::{dir_to_sph, pixel_dir, sph_to_uv, EquirectImage, Sampling};
use crate::error::{invalid, Result};

/// The six faces of a cube map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CubeFace {
    Front,
    Back,
    Left,
    Right,
    Top,
    Bottom,
}

impl CubeFace {
    pub const ALL: [CubeFace; 6] = [
        CubeFace::Front,
        CubeFace::Back,
        CubeFace::Left,
        CubeFace::Right,
        CubeFace::Top,
        CubeFace::Bottom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CubeFace::Front => "front",
            CubeFace::Back => "back",
            CubeFace::Left => "left",
            CubeFace::Right => "right",
            CubeFace::Top => "top",
            CubeFace::Bottom => "bottom",
        }
    }

    /// `(forward, image-right, image-up)` axes of the face camera.
    ///
    /// Side faces keep +y up and have image-right pointing toward increasing
    /// longitude, so each side face reads like the matching panorama window.
    /// The top face has the front face below it, the bottom face above it.
    pub fn frame(self) -> [Vector3<f64>; 3] {
        let x = Vector3::x();
        let y = Vector3::y();
        let z = Vector3::z();
        match self {
            CubeFace::Front => [z, x, y],
            CubeFace::Right => [x, -z, y],
            CubeFace::Back => [-z, -x, y],
            CubeFace::Left => [-x, z, y],
            CubeFace::Top => [y, x, -z],
            CubeFace::Bottom => [-y, x, z],
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Unnormalized ray through the center of face pixel `(col, row)`.
#[inline]
pub(crate) fn face_pixel_dir(face: CubeFace, col: usize, row: usize, size: usize) -> Vector3<f64> {
    let f = size as f64;
    let a = 2.0 * (col as f64 + 0.5) / f - 1.0;
    let b = 1.0 - 2.0 * (row as f64 + 0.5) / f;
    let [n, r, u] = face.frame();
    n + r * a + u * b
}

/// Face hit by a direction, plus the continuous face-pixel coordinate
/// (pixel centers at integers).
#[inline]
pub(crate) fn face_coord(d: &Vector3<f64>, size: usize) -> (CubeFace, f64, f64) {
    let (ax, ay, az) = (d.x.abs(), d.y.abs(), d.z.abs());
    let face = if az >= ax && az >= ay {
        if d.z >= 0.0 {
            CubeFace::Front
        } else {
            CubeFace::Back
        }
    } else if ax >= ay {
        if d.x >= 0.0 {
            CubeFace::Right
        } else {
            CubeFace::Left
        }
    } else if d.y >= 0.0 {
        CubeFace::Top
    } else {
        CubeFace::Bottom
    };
    let [n, r, u] = face.frame();
    let depth = d.dot(&n);
    let a = d.dot(&r) / depth;
    let b = d.dot(&u) / depth;
    let f = size as f64;
    (face, (a + 1.0) * 0.5 * f - 0.5, (1.0 - b) * 0.5 * f - 0.5)
}

/// Six square RGB faces of side `face_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeMap {
    face_size: usize,
    faces: [Vec<[f32; 3]>; 6],
}

impl CubeMap {
    pub fn new(face_size: usize, faces: [Vec<[f32; 3]>; 6]) -> Result<Self> {
        if face_size < 2 {
            return Err(invalid("cube face size must be at least 2"));
        }
        if faces.iter().any(|f| f.len() != face_size * face_size) {
            return Err(invalid("every cube face must hold face_size² pixels"));
        }
        Ok(Self { face_size, faces })
    }

    pub fn face_size(&self) -> usize {
        self.face_size
    }

    /// Pixels of one face, row-major.
    pub fn face(&self, face: CubeFace) -> &[[f32; 3]] {
        &self.faces[face.slot()]
    }

    fn sample(&self, face: CubeFace, x: f64, y: f64, sampling: Sampling) -> [f32; 3] {
        let n = self.face_size;
        let px = &self.faces[face.slot()];
        let max = (n - 1) as f64;
        let (x, y) = (x.clamp(0.0, max), y.clamp(0.0, max));
        match sampling {
            Sampling::Nearest => {
                let c = ((x + 0.5).floor() as usize).min(n - 1);
                let r = ((y + 0.5).floor() as usize).min(n - 1);
                px[r * n + c]
            }
            Sampling::Bilinear => {
                let c0 = x.floor() as usize;
                let r0 = y.floor() as usize;
                let c1 = (c0 + 1).min(n - 1);
                let r1 = (r0 + 1).min(n - 1);
                let (fx, fy) = (x - c0 as f64, y - r0 as f64);
                let mut out = [0.0f32; 3];
                for (k, o) in out.iter_mut().enumerate() {
                    let a = px[r0 * n + c0][k] as f64;
                    let b = px[r0 * n + c1][k] as f64;
                    let c = px[r1 * n + c0][k] as f64;
                    let d = px[r1 * n + c1][k] as f64;
                    let top = a + (b - a) * fx;
                    let bot = c + (d - c) * fx;
                    *o = (top + (bot - top) * fy) as f32;
                }
                out
            }
        }
    }
}

/// Splits a panorama into six 90° faces of side `face_size`.
pub fn pano_to_cubemap(img: &EquirectImage, face_size: usize, sampling: Sampling) -> Result<CubeMap> {
    if face_size < 2 {
        return Err(invalid("cube face size must be at least 2"));
    }
    let (w, h) = (img.width() as f64, img.height() as f64);
    let faces = CubeFace::ALL.map(|face| {
        let mut px = Vec::with_capacity(face_size * face_size);
        for row in 0..face_size {
            for col in 0..face_size {
                let d = face_pixel_dir(face, col, row, face_size).normalize();
                let (phi, theta) = dir_to_sph(d.x, d.y, d.z);
                let (u, v) = sph_to_uv(phi, theta, w, h);
                px.push(img.sample(u, v, sampling));
            }
        }
        px
    });
    CubeMap::new(face_size, faces)
}

/// Composes six faces back into a `width × height` panorama.
pub fn cubemap_to_pano(
    cm: &CubeMap,
    width: usize,
    height: usize,
    sampling: Sampling,
) -> Result<EquirectImage> {
    EquirectImage::filled(width, height, [0.0; 3])?;
    let mut rgb = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in 0..width {
            let d = pixel_dir(col, row, width, height);
            let (face, x, y) = face_coord(&d, cm.face_size);
            rgb.push(cm.sample(face, x, y, sampling));
        }
    }
    EquirectImage::from_rgb(width, height, rgb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_centers_hit_axes() {
        for face in CubeFace::ALL {
            let d = face_pixel_dir(face, 2, 2, 5);
            assert_eq!(d, face.frame()[0]);
            let (f, x, y) = face_coord(&d, 5);
            assert_eq!((f, x, y), (face, 2.0, 2.0));
        }
    }

    #[test]
    fn face_pixel_round_trip() {
        for face in CubeFace::ALL {
            for (c, r) in [(0, 0), (7, 3), (15, 15), (4, 11)] {
                let d = face_pixel_dir(face, c, r, 16);
                let (f, x, y) = face_coord(&d, 16);
                assert_eq!(f, face);
                assert!((x - c as f64).abs() < 1e-9 && (y - r as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_panorama_gives_constant_faces() {
        let color = [0.25, 0.5, 0.75];
        let img = EquirectImage::filled(64, 32, color).unwrap();
        let cm = pano_to_cubemap(&img, 16, Sampling::Bilinear).unwrap();
        for face in CubeFace::ALL {
            assert!(cm.face(face).iter().all(|&p| p == color));
        }
        let back = cubemap_to_pano(&cm, 64, 32, Sampling::Bilinear).unwrap();
        assert!(back.rgb.iter().all(|&p| p == color));
    }

    #[test]
    fn front_center_samples_image_center() {
        let (w, h) = (64, 32);
        let img = EquirectImage::from_fn(w, h, |phi, theta| [phi as f32, theta as f32, 0.0]).unwrap();
        let cm = pano_to_cubemap(&img, 9, Sampling::Nearest).unwrap();
        assert_eq!(cm.face(CubeFace::Front)[4 * 9 + 4], img.pixel(w / 2, h / 2));
    }
}
