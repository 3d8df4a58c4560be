use alloc::vec::Vec;

use nalgebra::Vector3;

use super::pixel_dir;
use crate::error::{invalid, Result};
use crate::geometry::CameraPose;

/// Per-pixel world-frame unit ray directions, row-major.
pub fn ray_field(pose: &CameraPose, width: usize, height: usize) -> Vec<Vector3<f64>> {
    let rot = pose.world_from_camera();
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in 0..width {
            out.push((rot * pixel_dir(col, row, width, height)).normalize());
        }
    }
    out
}

/// Spherical Plücker embedding of one panoramic camera.
///
/// Each pixel stores `[d_x, d_y, d_z, m_x, m_y, m_z]` where `d` is the unit
/// world ray and `m = c × d` its moment about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerField {
    width: usize,
    height: usize,
    data: Vec<[f64; 6]>,
}

impl PluckerField {
    pub fn from_data(width: usize, height: usize, data: Vec<[f64; 6]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(invalid("plucker data length does not match dimensions"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major `[H][W][6]` channels.
    pub fn data(&self) -> &[[f64; 6]] {
        &self.data
    }

    pub fn at(&self, col: usize, row: usize) -> [f64; 6] {
        self.data[row * self.width + col]
    }

    pub fn direction(&self, col: usize, row: usize) -> Vector3<f64> {
        let p = self.at(col, row);
        Vector3::new(p[0], p[1], p[2])
    }

    pub fn moment(&self, col: usize, row: usize) -> Vector3<f64> {
        let p = self.at(col, row);
        Vector3::new(p[3], p[4], p[5])
    }
}

/// One Plücker field per pose.
pub fn plucker_field(poses: &[CameraPose], width: usize, height: usize) -> Result<Vec<PluckerField>> {
    if poses.is_empty() {
        return Err(invalid("plucker_field needs at least one pose"));
    }
    if width == 0 || height == 0 {
        return Err(invalid("plucker field dimensions must be positive"));
    }
    let raw: Vec<Vector3<f64>> = (0..height)
        .flat_map(|row| (0..width).map(move |col| pixel_dir(col, row, width, height)))
        .collect();
    Ok(poses
        .iter()
        .map(|pose| {
            let rot = pose.world_from_camera();
            let c = pose.center();
            let data = raw
                .iter()
                .map(|r| {
                    let d = (rot * r).normalize();
                    let m = c.cross(&d);
                    [d.x, d.y, d.z, m.x, m.y, m.z]
                })
                .collect();
            PluckerField {
                width,
                height,
                data,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_ray_field_center() {
        let field = ray_field(&CameraPose::identity(), 64, 32);
        assert_eq!(field[16 * 64 + 32], Vector3::new(0.0, 0.0, 1.0));
        let yawed = CameraPose::from_yaw(Vector3::zeros(), core::f64::consts::PI);
        let field = ray_field(&yawed, 64, 32);
        assert_abs_diff_eq!(field[16 * 64 + 32], Vector3::new(0.0, 0.0, -1.0), epsilon = 1e-12);
        assert!(field.iter().all(|d| (d.norm() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn moment_vanishes_at_origin() {
        let f = &plucker_field(&[CameraPose::identity()], 16, 8).unwrap()[0];
        assert!(f.data().iter().all(|p| p[3] == 0.0 && p[4] == 0.0 && p[5] == 0.0));
    }

    #[test]
    fn offset_camera_center_pixel() {
        // c = (1,0,0), d = (0,0,1): c × d = (0·1 − 0·0, 0·0 − 1·1, 1·0 − 0·0) = (0,−1,0)
        let pose = CameraPose::from_yaw(Vector3::new(1.0, 0.0, 0.0), 0.0);
        let f = &plucker_field(&[pose], 64, 32).unwrap()[0];
        assert_eq!(f.at(32, 16), [0.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn needs_a_pose() {
        assert!(plucker_field(&[], 4, 2).is_err());
    }
}
