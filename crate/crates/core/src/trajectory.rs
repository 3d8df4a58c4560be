//! Camera paths: random closed polylines, centripetal Catmull-Rom curves and
//! discrete action walks, plus splitting into overlapping clip windows.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use nalgebra::{UnitQuaternion, Vector3};
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::{Euclid, Float};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::geometry::CameraPose;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Forward,
    Rotate,
}

/// A discrete move: `Forward` in meters or `Rotate` (yaw) in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    kind: ActionKind,
    magnitude: f64,
}

impl Action {
    pub const DEFAULT_FORWARD: f64 = 0.4;
    pub const DEFAULT_ROTATE: f64 = 22.5;

    pub fn forward(meters: f64) -> Result<Self> {
        if !(meters > 0.0 && meters.is_finite()) {
            return Err(invalid("forward magnitude must be positive"));
        }
        Ok(Self {
            kind: ActionKind::Forward,
            magnitude: meters,
        })
    }

    pub fn rotate(degrees: f64) -> Result<Self> {
        if degrees == 0.0 || !degrees.is_finite() {
            return Err(invalid("rotate magnitude must be nonzero"));
        }
        Ok(Self {
            kind: ActionKind::Rotate,
            magnitude: degrees,
        })
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    PolylineLoop,
    Curve,
    ActionWalk,
}

impl TrajectoryKind {
    pub fn name(self) -> &'static str {
        match self {
            TrajectoryKind::PolylineLoop => "polyline_loop",
            TrajectoryKind::Curve => "curve",
            TrajectoryKind::ActionWalk => "action_walk",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "polyline_loop" | "loop" => Some(TrajectoryKind::PolylineLoop),
            "curve" => Some(TrajectoryKind::Curve),
            "action_walk" | "walk" => Some(TrajectoryKind::ActionWalk),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub poses: Vec<CameraPose>,
    pub step: f64,
    pub kind: TrajectoryKind,
    pub seed: Option<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Sum of distances between consecutive camera centers.
    pub fn arc_length(&self) -> f64 {
        self.poses
            .windows(2)
            .map(|w| (w[1].center() - w[0].center()).norm())
            .sum()
    }

    /// Distance between the first and last camera centers.
    pub fn closure(&self) -> f64 {
        match (self.poses.first(), self.poses.last()) {
            (Some(a), Some(b)) => (b.center() - a.center()).norm(),
            _ => 0.0,
        }
    }
}

/// Orientation facing along `dir` with +y kept up (no roll).
pub fn facing(dir: &Vector3<f64>) -> UnitQuaternion<f64> {
    let horiz = (dir.x * dir.x + dir.z * dir.z).sqrt();
    let yaw = dir.x.atan2(dir.z);
    let pitch = -dir.y.atan2(horiz);
    UnitQuaternion::from_axis_angle(&Vector3::y_axis(), yaw)
        * UnitQuaternion::from_axis_angle(&Vector3::x_axis(), pitch)
}

/// Poses at `points`, each facing the chord to the next point; the last
/// pose copies the previous orientation.
fn poses_along(points: &[Vector3<f64>]) -> Vec<CameraPose> {
    let mut out = Vec::with_capacity(points.len());
    let mut rot = UnitQuaternion::identity();
    for (i, p) in points.iter().enumerate() {
        if let Some(next) = points.get(i + 1) {
            let chord = next - p;
            if chord.norm() > 0.0 {
                rot = facing(&chord);
            }
        }
        out.push(CameraPose::looking(*p, rot));
    }
    out
}

/// Parameters of a random closed polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    /// Requested arc length (meters).
    pub length: f64,
    pub step: f64,
    pub seed: u64,
    /// Camera height above the ground plane.
    pub height: f64,
    /// Start position `(x, z)`.
    pub start: [f64; 2],
    /// Keep every position within this distance of the start.
    pub max_radius: Option<f64>,
}

impl Default for LoopParams {
    fn default() -> Self {
        Self {
            length: 20.0,
            step: 0.4,
            seed: 0,
            height: 1.5,
            start: [0.0, 0.0],
            max_radius: None,
        }
    }
}

const MAX_TURN: f64 = PI / 3.0;
const CLOSING_FRACTION: f64 = 0.7;

fn wrap_angle(a: f64) -> f64 {
    Euclid::rem_euclid(&(a + PI), &TAU) - PI
}

/// Random-turn polyline of `round(length/step)` segments whose end lies
/// within one step of its start.
///
/// Each segment turns by a uniform angle in ±60°. After 70% of the length the
/// turn is biased toward the start. A candidate that would make closure
/// impossible with the remaining segments (or leave `max_radius`) is
/// resampled, and after repeated failures the segment heads straight home,
/// which always preserves feasibility.
pub fn gen_polyline_loop(params: &LoopParams) -> Result<Trajectory> {
    let LoopParams {
        length,
        step,
        seed,
        height,
        start,
        max_radius,
    } = *params;
    if !(step > 0.0 && step.is_finite()) || !(length.is_finite()) {
        return Err(invalid("loop step and length must be finite and positive"));
    }
    if length < 4.0 * step {
        return Err(invalid(format!(
            "loop length {length} m is shorter than four steps of {step} m"
        )));
    }
    if let Some(r) = max_radius {
        if !(r >= step) {
            return Err(invalid("max_radius must be at least one step"));
        }
    }
    let segments = (length / step).round() as usize;
    let origin = Vector3::new(start[0], height, start[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heading = rng.random_range(-PI..PI);
    let mut pos = origin;
    let mut points = Vec::with_capacity(segments + 1);
    points.push(pos);
    for i in 0..segments {
        let remaining = (segments - i) as f64;
        let home = origin - pos;
        let home_heading = home.x.atan2(home.z);
        let closing = i as f64 >= CLOSING_FRACTION * segments as f64;
        let feasible = |h: f64| {
            let next = pos + Vector3::new(h.sin(), 0.0, h.cos()) * step;
            let d = (next - origin).norm();
            d <= (remaining * step) * (1.0 - 1e-12) && max_radius.is_none_or(|r| d <= r)
        };
        let mut chosen = None;
        for _ in 0..16 {
            let mut turn = rng.random_range(-MAX_TURN..MAX_TURN);
            if closing {
                let bias = wrap_angle(home_heading - heading).clamp(-MAX_TURN, MAX_TURN);
                turn = bias + 0.25 * turn;
            }
            let h = wrap_angle(heading + turn);
            if feasible(h) {
                chosen = Some(h);
                break;
            }
        }
        heading = match chosen {
            Some(h) => h,
            None if home.norm() > 0.0 => home_heading,
            None => heading,
        };
        pos += Vector3::new(heading.sin(), 0.0, heading.cos()) * step;
        points.push(pos);
    }
    Ok(Trajectory {
        poses: poses_along(&points),
        step,
        kind: TrajectoryKind::PolylineLoop,
        seed: Some(seed),
    })
}

/// Centripetal (α = 0.5) Catmull-Rom spline through a control polygon.
///
/// Segment `i` runs from control `i + 1` to control `i + 2`, so the curve
/// interpolates every interior control point.
#[derive(Debug, Clone, PartialEq)]
pub struct CatmullRom {
    controls: Vec<Vector3<f64>>,
}

impl CatmullRom {
    pub fn new(controls: &[Vector3<f64>]) -> Result<Self> {
        if controls.len() < 4 {
            return Err(invalid("Catmull-Rom needs at least 4 control points"));
        }
        if controls.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(invalid("control points must be finite"));
        }
        if controls.windows(2).any(|w| (w[1] - w[0]).norm() == 0.0) {
            return Err(invalid("adjacent control points must differ"));
        }
        Ok(Self {
            controls: controls.to_vec(),
        })
    }

    pub fn segment_count(&self) -> usize {
        self.controls.len() - 3
    }

    /// Point on segment `seg` at local parameter `t ∈ [0, 1]`.
    pub fn eval(&self, seg: usize, t: f64) -> Vector3<f64> {
        let p = &self.controls[seg..seg + 4];
        let knot = |a: &Vector3<f64>, b: &Vector3<f64>| (b - a).norm().sqrt();
        let t0 = 0.0;
        let t1 = t0 + knot(&p[0], &p[1]);
        let t2 = t1 + knot(&p[1], &p[2]);
        let t3 = t2 + knot(&p[2], &p[3]);
        let t = t1 + (t2 - t1) * t;
        let lerp = |a: &Vector3<f64>, b: &Vector3<f64>, ta: f64, tb: f64| {
            a * ((tb - t) / (tb - ta)) + b * ((t - ta) / (tb - ta))
        };
        let a1 = lerp(&p[0], &p[1], t0, t1);
        let a2 = lerp(&p[1], &p[2], t1, t2);
        let a3 = lerp(&p[2], &p[3], t2, t3);
        let b1 = lerp(&a1, &a2, t0, t2);
        let b2 = lerp(&a2, &a3, t1, t3);
        lerp(&b1, &b2, t1, t2)
    }

    /// Point at global parameter `s ∈ [0, segment_count]`.
    pub fn at(&self, s: f64) -> Vector3<f64> {
        let n = self.segment_count();
        let s = s.clamp(0.0, n as f64);
        let seg = (s.floor() as usize).min(n - 1);
        self.eval(seg, s - seg as f64)
    }

    /// Points along the curve whose consecutive Euclidean gaps all equal
    /// `step`, starting at the first interior control point.
    ///
    /// The curve is marched in small parameter increments until the chord
    /// from the last sample reaches `step`, then the crossing is refined by
    /// bisection.
    pub fn resample(&self, step: f64) -> Result<Vec<Vector3<f64>>> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("step must be positive"));
        }
        let end = self.segment_count() as f64;
        let dt = 1.0 / 512.0;
        let mut s = 0.0;
        let mut last = self.at(0.0);
        let mut out = alloc::vec![last];
        loop {
            let mut hi = s;
            let mut found = false;
            while hi < end {
                let next = (hi + dt).min(end);
                if (self.at(next) - last).norm() >= step {
                    hi = next;
                    found = true;
                    break;
                }
                hi = next;
            }
            if !found {
                break;
            }
            let mut lo = (hi - dt).max(s);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (self.at(mid) - last).norm() >= step {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            // Snap onto the step-radius sphere around the previous sample.
            let p = self.at(hi);
            let p = last + (p - last).normalize() * step;
            out.push(p);
            last = p;
            s = hi;
        }
        Ok(out)
    }
}

/// Smooth trajectory through `control` resampled at `step`.
pub fn catmull_rom(control: &[Vector3<f64>], step: f64) -> Result<Trajectory> {
    let spline = CatmullRom::new(control)?;
    let points = spline.resample(step)?;
    Ok(Trajectory {
        poses: poses_along(&points),
        step,
        kind: TrajectoryKind::Curve,
        seed: None,
    })
}

/// Folds actions from `start`: one pose per action plus the start.
pub fn action_walk(actions: &[Action], start: &CameraPose) -> Trajectory {
    let mut center = start.center();
    let mut rot = start.world_from_camera();
    let mut poses = Vec::with_capacity(actions.len() + 1);
    poses.push(CameraPose::looking(center, rot));
    for a in actions {
        match a.kind {
            ActionKind::Forward => {
                let f = rot * Vector3::z();
                let flat = Vector3::new(f.x, 0.0, f.z);
                let dir = if flat.norm() > 1e-12 { flat.normalize() } else { f };
                center += dir * a.magnitude;
            }
            ActionKind::Rotate => {
                let yaw = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), a.magnitude.to_radians());
                rot = yaw * rot;
            }
        }
        poses.push(CameraPose::looking(center, rot));
    }
    let step = actions
        .iter()
        .find(|a| a.kind == ActionKind::Forward)
        .map_or(Action::DEFAULT_FORWARD, |a| a.magnitude);
    Trajectory {
        poses,
        step,
        kind: TrajectoryKind::ActionWalk,
        seed: None,
    }
}

/// A run of consecutive trajectory poses starting at index `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipWindow {
    pub start: usize,
    pub poses: Vec<CameraPose>,
}

impl ClipWindow {
    pub fn end(&self) -> usize {
        self.start + self.poses.len()
    }
}

/// Splits poses into windows of `clip_len` sharing `overlap` poses with the
/// previous window. The final window may be shorter but holds at least
/// `overlap + 1` poses.
pub fn clip_targets(poses: &[CameraPose], clip_len: usize, overlap: usize) -> Result<Vec<ClipWindow>> {
    if clip_len < 2 {
        return Err(invalid("clip length must be at least 2"));
    }
    if overlap == 0 || overlap >= clip_len {
        return Err(invalid("overlap must lie in [1, clip_len)"));
    }
    if poses.len() < clip_len {
        return Err(invalid(format!(
            "trajectory of {} poses is shorter than one clip of {clip_len}",
            poses.len()
        )));
    }
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + clip_len).min(poses.len());
        out.push(ClipWindow {
            start,
            poses: poses[start..end].to_vec(),
        });
        if end == poses.len() {
            break;
        }
        start = end - overlap;
    }
    Ok(out)
}
