use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use super::{CameraPose, Convention};
use crate::error::{Error, Result};

/// `x ↦ s·R·x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(scale: f64, rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            scale,
            rotation,
            translation,
        }
    }

    #[inline]
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p * self.scale + self.translation
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &Self) -> Self {
        Self {
            scale: self.scale * inner.scale,
            rotation: self.rotation * inner.rotation,
            translation: self.rotation * inner.translation * self.scale + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rot = self.rotation.inverse();
        Self {
            scale: 1.0 / self.scale,
            rotation: rot,
            translation: -(rot * self.translation) / self.scale,
        }
    }

    /// Moves a camera by this transform, keeping its convention.
    pub fn apply_to_pose(&self, pose: &CameraPose) -> CameraPose {
        let center = self.apply(&pose.center());
        let rot = UnitQuaternion::from_rotation_matrix(&self.rotation) * pose.world_from_camera();
        CameraPose::looking(center, rot).to_convention(pose.convention())
    }
}

/// Applies `t` to every point.
pub fn apply_similarity(t: &SimilarityTransform, pts: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    pts.iter().map(|p| t.apply(p)).collect()
}

/// Least-squares similarity mapping `src` onto `dst` (Umeyama).
///
/// Minimizes `Σ |dst_i − (s·R·src_i + t)|²` in closed form from the SVD of
/// the cross-covariance, with a reflection fix so that `det R = +1`. With
/// `with_scale == false` the scale is pinned to 1.
pub fn umeyama_align(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
    with_scale: bool,
) -> Result<SimilarityTransform> {
    if src.len() != dst.len() {
        return Err(Error::InvalidArgument(format!(
            "point sets differ in size ({} vs {})",
            src.len(),
            dst.len()
        )));
    }
    let n = src.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("need at least 3 points, got {n}")));
    }
    let inv_n = 1.0 / n as f64;
    let mu_s = src.iter().sum::<Vector3<f64>>() * inv_n;
    let mu_d = dst.iter().sum::<Vector3<f64>>() * inv_n;

    let mut cov = Matrix3::zeros();
    let mut var_s = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let (a, b) = (s - mu_s, d - mu_d);
        cov += b * a.transpose();
        var_s += a.norm_squared();
    }
    cov *= inv_n;
    var_s *= inv_n;

    let svd = cov.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Degenerate("SVD did not converge".into())),
    };
    let sv = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(core::cmp::Ordering::Equal));
    let (largest, middle, smallest) = (sv[order[0]], sv[order[1]], order[2]);
    if !(largest > 0.0) || middle <= 1e-10 * largest || var_s <= 0.0 {
        return Err(Error::Degenerate(
            "points are coincident or collinear (cross-covariance rank < 2)".into(),
        ));
    }

    let mut signs = Vector3::repeat(1.0);
    if (u.determinant() * v_t.determinant()) < 0.0 {
        signs[smallest] = -1.0;
    }
    let rot = u * Matrix3::from_diagonal(&signs) * v_t;
    let scale = if with_scale {
        (0..3).map(|i| sv[i] * signs[i]).sum::<f64>() / var_s
    } else {
        1.0
    };
    let mut rotation = Rotation3::from_matrix_unchecked(rot);
    rotation.renormalize();
    let translation = mu_d - rotation * mu_s * scale;
    Ok(SimilarityTransform {
        scale,
        rotation,
        translation,
    })
}

/// Aligns estimated camera poses onto ground-truth poses.
///
/// Each camera contributes its center plus three probes along its axes. The
/// probe arm is the RMS spread of the camera centers in each set, so the arms
/// scale with the trajectory and the probe sets correspond exactly under a
/// similarity. This keeps the fit well posed for collinear trajectories and
/// for a single camera (where scale is pinned to 1).
pub fn align_poses(
    est: &[CameraPose],
    gt: &[CameraPose],
    with_scale: bool,
) -> Result<SimilarityTransform> {
    if est.len() != gt.len() {
        return Err(Error::InvalidArgument(format!(
            "pose counts differ ({} vs {})",
            est.len(),
            gt.len()
        )));
    }
    if est.is_empty() {
        return Err(Error::InvalidArgument("no poses to align".into()));
    }
    let est: Vec<_> = est.iter().map(|p| p.to_convention(Convention::CameraToWorldGl)).collect();
    let gt: Vec<_> = gt.iter().map(|p| p.to_convention(Convention::CameraToWorldGl)).collect();
    let spread = |ps: &[CameraPose]| {
        let mu = ps.iter().map(|p| p.center()).sum::<Vector3<f64>>() / ps.len() as f64;
        (ps.iter().map(|p| (p.center() - mu).norm_squared()).sum::<f64>() / ps.len() as f64).sqrt()
    };
    let (se, sg) = (spread(&est), spread(&gt));
    let tiny = 1e-9;
    let (arm_est, arm_gt, with_scale) = if se > tiny && sg > tiny {
        if with_scale {
            (se, sg, true)
        } else {
            (se, se, false)
        }
    } else {
        (1.0, 1.0, false)
    };
    let probes = |ps: &[CameraPose], arm: f64| {
        let mut out = Vec::with_capacity(ps.len() * 4);
        for p in ps {
            let c = p.center();
            let r = p.world_from_camera();
            out.push(c);
            out.push(c + r * Vector3::x() * arm);
            out.push(c + r * Vector3::y() * arm);
            out.push(c + r * Vector3::z() * arm);
        }
        out
    };
    umeyama_align(&probes(&est, arm_est), &probes(&gt, arm_gt), with_scale)
}
