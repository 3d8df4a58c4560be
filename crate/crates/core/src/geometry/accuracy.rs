use alloc::format;
use alloc::vec::Vec;

use nalgebra::Vector3;
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use super::{CameraPose, Convention};
use crate::error::{invalid, Error, Result};

/// Geodesic angle in degrees between the two orientations (`R_aᵀ R_b`).
///
/// Poses in different conventions are compared after converting `b` into
/// the convention of `a`.
pub fn relative_rotation_error(a: &CameraPose, b: &CameraPose) -> f64 {
    let b = b.to_convention(a.convention());
    let rel = a.orientation().inverse() * b.orientation();
    rotation_angle_deg(&rel)
}

fn rotation_angle_deg(q: &nalgebra::UnitQuaternion<f64>) -> f64 {
    let q = q.quaternion();
    let v = (q.i * q.i + q.j * q.j + q.k * q.k).sqrt();
    (2.0 * v.atan2(q.w.abs())).to_degrees()
}

/// Angle in degrees between two translation directions.
pub fn relative_translation_error(a: &Vector3<f64>, b: &Vector3<f64>) -> Result<f64> {
    let (na, nb) = (a.norm(), b.norm());
    if !(na > 0.0) || !(nb > 0.0) {
        return Err(Error::UndefinedDirection("zero-length translation".into()));
    }
    // atan2 of |a×b| and a·b stays accurate near 0° and 180°.
    let sin = a.cross(b).norm() / (na * nb);
    Ok(sin.atan2(a.dot(b) / (na * nb)).to_degrees())
}

/// Per-pair rotation and translation errors, in degrees.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoseErrors {
    pub rra: Vec<f64>,
    pub rta: Vec<f64>,
}

impl PoseErrors {
    pub fn new(rra: Vec<f64>, rta: Vec<f64>) -> Result<Self> {
        if rra.len() != rta.len() {
            return Err(invalid("rra and rta must have the same length"));
        }
        if rra.iter().chain(&rta).any(|e| !(0.0..=180.0).contains(e)) {
            return Err(invalid("pose errors must lie in [0, 180] degrees"));
        }
        Ok(Self { rra, rta })
    }

    pub fn len(&self) -> usize {
        self.rra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rra.is_empty()
    }
}

/// Errors of an estimated trajectory against ground truth.
///
/// Pairs are anchor-relative: frame `i ≥ 1` is compared with frame 0 in both
/// sets. The relative translation is expressed in the anchor camera's frame.
pub fn pose_errors(est: &[CameraPose], gt: &[CameraPose]) -> Result<PoseErrors> {
    if est.len() != gt.len() {
        return Err(invalid(format!(
            "pose counts differ ({} vs {})",
            est.len(),
            gt.len()
        )));
    }
    if est.len() < 2 {
        return Err(invalid("need at least two poses to form a pair"));
    }
    let to_gl = |p: &CameraPose| p.to_convention(Convention::CameraToWorldGl);
    let (e0, g0) = (to_gl(&est[0]), to_gl(&gt[0]));
    let mut rra = Vec::with_capacity(est.len() - 1);
    let mut rta = Vec::with_capacity(est.len() - 1);
    for (e, g) in est.iter().zip(gt).skip(1) {
        let (e, g) = (to_gl(e), to_gl(g));
        let rel_e = e0.orientation().inverse() * e.orientation();
        let rel_g = g0.orientation().inverse() * g.orientation();
        rra.push(rotation_angle_deg(&(rel_e.inverse() * rel_g)));
        let te = e0.orientation().inverse() * (e.center() - e0.center());
        let tg = g0.orientation().inverse() * (g.center() - g0.center());
        rta.push(relative_translation_error(&te, &tg)?);
    }
    Ok(PoseErrors { rra, rta })
}

/// How rotation and translation errors combine into per-pair correctness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AucCombine {
    /// Correct at τ when both errors are ≤ τ, i.e. `max(rra, rta) ≤ τ`.
    #[default]
    BothWithin,
    /// Correct at τ when the smaller error is ≤ τ.
    EitherWithin,
}

/// Area under the accuracy-vs-threshold curve on `(0, tau_max]`, normalized
/// to `[0, 1]`.
///
/// The accuracy curve is a step function of the combined per-pair error `e`,
/// so the area is exactly `mean((tau_max − e)⁺) / tau_max`.
pub fn pose_auc(errors: &PoseErrors, tau_max: f64, combine: AucCombine) -> Result<f64> {
    if errors.is_empty() {
        return Err(invalid("pose AUC needs at least one frame pair"));
    }
    if errors.rra.len() != errors.rta.len() {
        return Err(invalid("rra and rta must have the same length"));
    }
    if !(tau_max > 0.0) {
        return Err(invalid("tau_max must be positive"));
    }
    let mut combined: Vec<f64> = errors
        .rra
        .iter()
        .zip(&errors.rta)
        .map(|(&r, &t)| match combine {
            AucCombine::BothWithin => r.max(t),
            AucCombine::EitherWithin => r.min(t),
        })
        .collect();
    combined.sort_by(|a, b| a.total_cmp(b));
    let area: f64 = combined
        .iter()
        .take_while(|&&e| e < tau_max)
        .map(|&e| tau_max - e)
        .sum();
    Ok(area / (tau_max * combined.len() as f64))
}
