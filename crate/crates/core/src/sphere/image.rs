use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use super::{pix_to_sph, rotate_sph, sph_to_uv, uv_to_sph, PixCoord};
use crate::error::{invalid, Result};

/// Color written where nothing was rasterized.
pub const BACKGROUND: [f32; 3] = [0.5, 0.5, 0.5];

/// Resampling kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    Nearest,
    #[default]
    Bilinear,
}

/// A `W × H` equirectangular panorama with optional depth and coverage mask.
///
/// Storage is row-major. `depth` holds metric distances; pixels outside the
/// mask carry `f32::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquirectImage {
    width: usize,
    height: usize,
    pub rgb: Vec<[f32; 3]>,
    pub depth: Option<Vec<f32>>,
    pub mask: Option<Vec<bool>>,
}

impl EquirectImage {
    /// A constant-color panorama. Width must be twice the height.
    pub fn filled(width: usize, height: usize, color: [f32; 3]) -> Result<Self> {
        check_shape(width, height)?;
        Ok(Self {
            width,
            height,
            rgb: vec![color; width * height],
            depth: None,
            mask: None,
        })
    }

    pub fn from_rgb(width: usize, height: usize, rgb: Vec<[f32; 3]>) -> Result<Self> {
        check_shape(width, height)?;
        if rgb.len() != width * height {
            return Err(invalid("rgb buffer length does not match dimensions"));
        }
        if rgb.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("rgb values must be finite"));
        }
        Ok(Self {
            width,
            height,
            rgb,
            depth: None,
            mask: None,
        })
    }

    /// Builds a panorama by evaluating `f(phi, theta)` at every pixel center.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(f64, f64) -> [f32; 3],
    ) -> Result<Self> {
        check_shape(width, height)?;
        let mut rgb = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                let (phi, theta) = uv_to_sph(col as f64, row as f64, width as f64, height as f64);
                rgb.push(f(phi, theta));
            }
        }
        Self::from_rgb(width, height, rgb)
    }

    /// Attaches depth and mask. Depth must be positive wherever mask is set.
    pub fn with_depth(mut self, depth: Vec<f32>, mask: Vec<bool>) -> Result<Self> {
        let n = self.width * self.height;
        if depth.len() != n || mask.len() != n {
            return Err(invalid("depth/mask length does not match dimensions"));
        }
        if depth
            .iter()
            .zip(&mask)
            .any(|(&d, &m)| m && !(d > 0.0 && d.is_finite()))
        {
            return Err(invalid("depth must be positive and finite on masked pixels"));
        }
        self.depth = Some(depth);
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn pixel(&self, col: usize, row: usize) -> [f32; 3] {
        self.rgb[self.index(col, row)]
    }

    /// Whether pixel `i` carries a valid depth sample.
    #[inline]
    pub fn is_covered(&self, i: usize) -> bool {
        match (&self.mask, &self.depth) {
            (Some(m), _) => m[i],
            (None, Some(d)) => d[i] > 0.0 && d[i].is_finite(),
            (None, None) => false,
        }
    }

    /// Fraction of pixels inside the mask (0 when there is no mask).
    pub fn coverage(&self) -> f64 {
        match &self.mask {
            Some(m) if !m.is_empty() => m.iter().filter(|&&b| b).count() as f64 / m.len() as f64,
            _ => 0.0,
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Samples the color at a continuous coordinate. Columns wrap, rows clamp.
    pub fn sample(&self, u: f64, v: f64, sampling: Sampling) -> [f32; 3] {
        match sampling {
            Sampling::Nearest => {
                let (c, r) = super::pixel_index(u, v, self.width, self.height);
                self.pixel(c, r)
            }
            Sampling::Bilinear => {
                let w = self.width as i64;
                let v = v.clamp(0.0, (self.height - 1) as f64);
                let c0 = u.floor();
                let r0 = v.floor();
                let fu = u - c0;
                let fv = v - r0;
                let c0 = (c0 as i64).rem_euclid(w) as usize;
                let c1 = (c0 + 1) % self.width;
                let r0 = r0 as usize;
                let r1 = (r0 + 1).min(self.height - 1);
                let mut out = [0.0f32; 3];
                for (k, o) in out.iter_mut().enumerate() {
                    let a = self.pixel(c0, r0)[k] as f64;
                    let b = self.pixel(c1, r0)[k] as f64;
                    let c = self.pixel(c0, r1)[k] as f64;
                    let d = self.pixel(c1, r1)[k] as f64;
                    let top = a + (b - a) * fu;
                    let bot = c + (d - c) * fu;
                    *o = (top + (bot - top) * fv) as f32;
                }
                out
            }
        }
    }

    /// Rotates the panorama by `(dphi, dtheta)` in spherical space.
    ///
    /// Every output pixel samples the source at the inverse-rotated
    /// coordinate. Depth and mask, when present, follow by nearest sampling.
    pub fn rotate(&self, dphi: f64, dtheta: f64, sampling: Sampling) -> Result<Self> {
        if !dphi.is_finite() || !dtheta.is_finite() {
            return Err(invalid("non-finite rotation offset"));
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let shift = dphi * w / TAU;
        let mut out = self.clone();
        for row in 0..self.height {
            for col in 0..self.width {
                let (u, v) = if dtheta == 0.0 {
                    (snap(col as f64 - shift), row as f64)
                } else {
                    let s = pix_to_sph(PixCoord { u: col as f64, v: row as f64 }, self.width, self.height)?;
                    let (phi, theta) = rotate_sph(s.phi, s.theta, -dphi, -dtheta);
                    let (u, v) = sph_to_uv(phi, theta, w, h);
                    (snap(u), snap(v))
                };
                let i = row * self.width + col;
                out.rgb[i] = self.sample(u, v, sampling);
                if self.depth.is_some() || self.mask.is_some() {
                    let (sc, sr) = super::pixel_index(u, v, self.width, self.height);
                    let j = self.index(sc, sr);
                    if let (Some(d), Some(sd)) = (&mut out.depth, &self.depth) {
                        d[i] = sd[j];
                    }
                    if let (Some(m), Some(sm)) = (&mut out.mask, &self.mask) {
                        m[i] = sm[j];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Drops depth and mask, keeping only color.
    pub fn color_only(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            rgb: self.rgb.clone(),
            depth: None,
            mask: None,
        }
    }
}

/// Rounds coordinates within 1e-9 of an integer so exact pixel hits sample
/// exactly.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x
    }
}

/// Free-function form of [`EquirectImage::rotate`].
pub fn rotate_pano(
    img: &EquirectImage,
    dphi: f64,
    dtheta: f64,
    sampling: Sampling,
) -> Result<EquirectImage> {
    img.rotate(dphi, dtheta, sampling)
}

fn check_shape(width: usize, height: usize) -> Result<()> {
    if height == 0 || width != 2 * height {
        return Err(invalid("equirectangular image must have width = 2 * height > 0"));
    }
    Ok(())
}
