//! Spherical and equirectangular coordinate math.
//!
//! World axes are y-up and z-forward with `x = y × z`. Longitude `phi` is
//! measured from +z toward +x and latitude `theta` is positive toward +y.
//! Pixel `(i, j)` of a `W × H` panorama has its center at the continuous
//! coordinate `(u, v) = (i, j)`, so a pixel spans half a pixel either side of
//! its center. `u` is periodic in `W`; `v` is not.

mod cubemap;
mod image;
mod plucker;

pub use self::cubemap::{cubemap_to_pano, pano_to_cubemap, CubeFace, CubeMap};
pub(crate) use self::cubemap::face_coord;
pub use self::image::{rotate_pano, EquirectImage, Sampling, BACKGROUND};
pub use self::plucker::{plucker_field, ray_field, PluckerField};

use core::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::{Euclid, Float};

use crate::error::{invalid, Result};

/// A direction on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphCoord {
    /// Longitude in `[-π, π)`.
    pub phi: f64,
    /// Latitude in `[-π/2, π/2]`.
    pub theta: f64,
}

impl SphCoord {
    /// Wraps `phi` into `[-π, π)` and clamps `theta` to `[-π/2, π/2]`.
    pub fn new(phi: f64, theta: f64) -> Self {
        Self {
            phi: wrap_phi(phi),
            theta: theta.clamp(-FRAC_PI_2, FRAC_PI_2),
        }
    }
}

/// A continuous pixel coordinate on an equirectangular panorama.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixCoord {
    pub u: f64,
    pub v: f64,
}

impl PixCoord {
    /// Wraps `u` into `[0, width)`. `v` is stored as given.
    pub fn new(u: f64, v: f64, width: usize) -> Self {
        Self {
            u: wrap_u(u, width as f64),
            v,
        }
    }
}

pub(crate) fn wrap_phi(phi: f64) -> f64 {
    let mut p = Euclid::rem_euclid(&(phi + PI), &TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if p >= PI {
        p -= TAU;
    }
    p
}

fn wrap_u(u: f64, w: f64) -> f64 {
    let r = Euclid::rem_euclid(&u, &w);
    if r >= w {
        0.0
    } else {
        r
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < 2 || height < 1 {
        return Err(invalid("panorama needs width >= 2 and height >= 1"));
    }
    Ok(())
}

/// Maps a spherical coordinate to a continuous pixel coordinate.
pub fn sph_to_pix(s: SphCoord, width: usize, height: usize) -> Result<PixCoord> {
    check_dims(width, height)?;
    if !s.phi.is_finite() || !s.theta.is_finite() {
        return Err(invalid("non-finite spherical coordinate"));
    }
    let s = SphCoord::new(s.phi, s.theta);
    let (u, v) = sph_to_uv(s.phi, s.theta, width as f64, height as f64);
    Ok(PixCoord::new(u, v, width))
}

/// Maps a continuous pixel coordinate to a spherical coordinate.
pub fn pix_to_sph(p: PixCoord, width: usize, height: usize) -> Result<SphCoord> {
    check_dims(width, height)?;
    if !p.u.is_finite() || !p.v.is_finite() {
        return Err(invalid("non-finite pixel coordinate"));
    }
    let (phi, theta) = uv_to_sph(p.u, p.v, width as f64, height as f64);
    Ok(SphCoord::new(phi, theta))
}

#[inline]
pub(crate) fn sph_to_uv(phi: f64, theta: f64, w: f64, h: f64) -> (f64, f64) {
    // Dividing by π before scaling keeps the image center exact.
    ((phi + PI) / TAU * w, (FRAC_PI_2 - theta) / PI * h)
}

#[inline]
pub(crate) fn uv_to_sph(u: f64, v: f64, w: f64, h: f64) -> (f64, f64) {
    (TAU * u / w - PI, FRAC_PI_2 - PI * v / h)
}

/// Rotates a pixel coordinate in spherical space by `(dphi, dtheta)`.
///
/// Longitude wraps modulo 2π. Latitude wraps modulo π back into
/// `[-π/2, π/2]` only when the offset pushes it outside that interval, so a
/// zero offset is an exact identity.
pub fn sph_rotate(
    p: PixCoord,
    dphi: f64,
    dtheta: f64,
    width: usize,
    height: usize,
) -> Result<PixCoord> {
    if !dphi.is_finite() || !dtheta.is_finite() {
        return Err(invalid("non-finite rotation offset"));
    }
    let s = pix_to_sph(p, width, height)?;
    if dtheta == 0.0 {
        // A pure longitude offset is a column shift; stay in pixel space.
        return Ok(PixCoord::new(p.u + dphi * width as f64 / TAU, p.v, width));
    }
    let (phi, theta) = rotate_sph(s.phi, s.theta, dphi, dtheta);
    let (u, v) = sph_to_uv(phi, theta, width as f64, height as f64);
    Ok(PixCoord::new(u, v, width))
}

pub(crate) fn rotate_sph(phi: f64, theta: f64, dphi: f64, dtheta: f64) -> (f64, f64) {
    let phi = wrap_phi(phi + dphi);
    let mut theta = theta + dtheta;
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
        theta = Euclid::rem_euclid(&(theta + FRAC_PI_2), &PI) - FRAC_PI_2;
    }
    (phi, theta)
}

/// Unit direction for a spherical coordinate: `(cosθ sinφ, sinθ, cosθ cosφ)`.
pub fn dir_from_sph(s: SphCoord) -> Vector3<f64> {
    let (sp, cp) = s.phi.sin_cos();
    let (st, ct) = s.theta.sin_cos();
    Vector3::new(ct * sp, st, ct * cp)
}

/// Spherical coordinate of a direction. At the poles `phi` is 0.
pub fn sph_from_dir(d: &Vector3<f64>) -> Result<SphCoord> {
    let n = d.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(invalid("direction must be a finite nonzero vector"));
    }
    let (phi, theta) = dir_to_sph(d.x / n, d.y / n, d.z / n);
    Ok(SphCoord { phi, theta })
}

/// `(phi, theta)` of a unit direction, with `phi := 0` on the polar axis.
#[inline]
pub(crate) fn dir_to_sph(x: f64, y: f64, z: f64) -> (f64, f64) {
    let theta = y.clamp(-1.0, 1.0).asin();
    let phi = if x == 0.0 && z == 0.0 {
        0.0
    } else {
        wrap_phi(x.atan2(z))
    };
    (phi, theta)
}

/// Pixel index `(col, row)` containing a continuous coordinate.
#[inline]
pub(crate) fn pixel_index(u: f64, v: f64, width: usize, height: usize) -> (usize, usize) {
    let col = (u + 0.5).floor() as i64;
    let col = col.rem_euclid(width as i64) as usize;
    let row = ((v + 0.5).floor() as i64).clamp(0, height as i64 - 1) as usize;
    (col, row)
}

/// Pixel index for a (not necessarily unit) direction in the camera frame.
#[inline]
pub(crate) fn pixel_of_dir(d: &Vector3<f64>, width: usize, height: usize) -> (usize, usize) {
    let n = d.norm();
    let (phi, theta) = dir_to_sph(d.x / n, d.y / n, d.z / n);
    let (u, v) = sph_to_uv(phi, theta, width as f64, height as f64);
    pixel_index(u, v, width, height)
}

/// Direction through the center of pixel `(col, row)`.
#[inline]
pub(crate) fn pixel_dir(col: usize, row: usize, width: usize, height: usize) -> Vector3<f64> {
    let (phi, theta) = uv_to_sph(col as f64, row as f64, width as f64, height as f64);
    dir_from_sph(SphCoord { phi, theta })
}

/// Offset (in rows) of the representative ray used for the north-pole row.
///
/// Every pixel center of row 0 sits on the pole, so their rays coincide.
/// Unprojection uses a ray a quarter row below the pole instead, which keeps
/// the column recoverable while staying inside the row.
pub(crate) const POLE_ROW_OFFSET: f64 = 0.25;

/// Ray used when lifting pixel `(col, row)` back into 3D.
#[inline]
pub(crate) fn unproject_dir(col: usize, row: usize, width: usize, height: usize) -> Vector3<f64> {
    if row == 0 {
        let (phi, theta) = uv_to_sph(col as f64, POLE_ROW_OFFSET, width as f64, height as f64);
        dir_from_sph(SphCoord { phi, theta })
    } else {
        pixel_dir(col, row, width, height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn center_and_corner() {
        let p = sph_to_pix(SphCoord::new(0.0, 0.0), 2000, 1000).unwrap();
        assert_eq!((p.u, p.v), (1000.0, 500.0));
        let p = sph_to_pix(SphCoord::new(-PI, FRAC_PI_2), 2000, 1000).unwrap();
        assert_eq!((p.u, p.v), (0.0, 0.0));
        let s = pix_to_sph(PixCoord { u: 1000.0, v: 500.0 }, 2000, 1000).unwrap();
        assert_eq!((s.phi, s.theta), (0.0, 0.0));
        let s = pix_to_sph(PixCoord { u: 0.0, v: 0.0 }, 2000, 1000).unwrap();
        assert_eq!((s.phi, s.theta), (-PI, FRAC_PI_2));
    }

    #[test]
    fn quarter_turn_down() {
        // u = 2000/2π · (π/2 + π) = 1500, v = 1000/π · (π/2 + π/4) = 750
        let p = sph_to_pix(SphCoord::new(FRAC_PI_2, -PI / 4.0), 2000, 1000).unwrap();
        assert_abs_diff_eq!(p.u, 1500.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.v, 750.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sph_to_pix(SphCoord { phi: f64::NAN, theta: 0.0 }, 4, 2).is_err());
        assert!(pix_to_sph(PixCoord { u: 0.0, v: f64::INFINITY }, 4, 2).is_err());
        assert!(sph_to_pix(SphCoord::new(0.0, 0.0), 1, 1).is_err());
        assert!(sph_from_dir(&Vector3::zeros()).is_err());
    }

    #[test]
    fn axis_directions() {
        let d = dir_from_sph(SphCoord::new(0.0, 0.0));
        assert_eq!(d, Vector3::new(0.0, 0.0, 1.0));
        let d = dir_from_sph(SphCoord::new(FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(d, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        let s = sph_from_dir(&Vector3::new(0.0, 2.0, 0.0)).unwrap();
        assert_eq!((s.phi, s.theta), (0.0, FRAC_PI_2));
    }

    #[test]
    fn rotate_identity_and_shift() {
        let (w, h) = (64, 32);
        for (u, v) in [(0.0, 0.0), (3.0, 7.0), (63.0, 31.0), (17.25, 31.9)] {
            let p = PixCoord { u, v };
            assert_eq!(sph_rotate(p, 0.0, 0.0, w, h).unwrap(), p);
            let q = sph_rotate(p, TAU / w as f64, 0.0, w, h).unwrap();
            let expect = (u + 1.0) % w as f64;
            let du = (q.u - expect).abs().min(w as f64 - (q.u - expect).abs());
            assert!(du < 1e-9, "{u} -> {}", q.u);
            assert_abs_diff_eq!(q.v, v, epsilon = 1e-9);
            let r = sph_rotate(p, TAU, 0.0, w, h).unwrap();
            let du = (r.u - u).abs().min(w as f64 - (r.u - u).abs());
            assert!(du < 1e-9);
        }
    }

    #[test]
    fn latitude_wraps_mod_pi() {
        let (phi, theta) = rotate_sph(0.0, 1.4, 0.0, 0.4);
        assert_abs_diff_eq!(phi, 0.0);
        assert_abs_diff_eq!(theta, 1.8 - PI, epsilon = 1e-12);
    }

    #[test]
    fn pixel_index_wraps_and_clamps() {
        assert_eq!(pixel_index(63.6, 0.2, 64, 32), (0, 0));
        assert_eq!(pixel_index(-0.4, 32.0, 64, 32), (0, 31));
        assert_eq!(pixel_index(10.49, 5.5, 64, 32), (10, 6));
    }
}
