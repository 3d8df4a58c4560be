use core::fmt;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};

/// How a [`CameraPose`] stores its extrinsics.
///
/// The camera frame of `CameraToWorldGl` is the panorama frame: y-up,
/// z-forward, `x = y × z`. The OpenCV camera frame is that frame with y and
/// z flipped, so an OpenCV camera looks down its own −z in these terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    /// `orientation` maps world to camera, `position` is the extrinsic
    /// translation `t` in `x_cam = R x_world + t`.
    WorldToCameraCv,
    /// `orientation` maps camera to world, `position` is the camera center.
    CameraToWorldGl,
}

impl Convention {
    pub fn tag(self) -> &'static str {
        match self {
            Convention::WorldToCameraCv => "cv",
            Convention::CameraToWorldGl => "gl",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "cv" => Some(Convention::WorldToCameraCv),
            "gl" => Some(Convention::CameraToWorldGl),
            _ => None,
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// 180° about x: swaps between the panorama camera frame and the OpenCV one.
fn flip_yz() -> UnitQuaternion<f64> {
    UnitQuaternion::new_unchecked(Quaternion::new(0.0, 1.0, 0.0, 0.0))
}

/// A camera position and orientation with an explicit convention tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    position: Vector3<f64>,
    orientation: UnitQuaternion<f64>,
    convention: Convention,
}

impl CameraPose {
    /// Builds a pose from a position and a `(w, x, y, z)` quaternion, which is
    /// normalized here.
    pub fn new(position: [f64; 3], quat_wxyz: [f64; 4], convention: Convention) -> Result<Self> {
        if position.iter().chain(&quat_wxyz).any(|v| !v.is_finite()) {
            return Err(invalid("pose components must be finite"));
        }
        let [w, x, y, z] = quat_wxyz;
        let q = Quaternion::new(w, x, y, z);
        if q.norm() < 1e-12 {
            return Err(invalid("pose quaternion must be nonzero"));
        }
        Ok(Self {
            position: Vector3::from(position),
            orientation: UnitQuaternion::from_quaternion(q),
            convention,
        })
    }

    pub fn from_parts(
        position: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
        convention: Convention,
    ) -> Self {
        Self {
            position,
            orientation,
            convention,
        }
    }

    /// Identity camera at the origin looking along +z.
    pub fn identity() -> Self {
        Self::from_parts(Vector3::zeros(), UnitQuaternion::identity(), Convention::CameraToWorldGl)
    }

    /// Camera at `center` with the given world-from-camera rotation.
    pub fn looking(center: Vector3<f64>, world_from_camera: UnitQuaternion<f64>) -> Self {
        Self::from_parts(center, world_from_camera, Convention::CameraToWorldGl)
    }

    /// Camera at `center` yawed by `yaw` radians about +y; yaw 0 faces +z and
    /// yaw π/2 faces +x.
    pub fn from_yaw(center: Vector3<f64>, yaw: f64) -> Self {
        Self::looking(center, UnitQuaternion::from_axis_angle(&Vector3::y_axis(), yaw))
    }

    pub fn position(&self) -> Vector3<f64> {
        self.position
    }

    pub fn orientation(&self) -> UnitQuaternion<f64> {
        self.orientation
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Orientation as `[w, x, y, z]`.
    pub fn quat_wxyz(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        match self.convention {
            Convention::CameraToWorldGl => self.position,
            Convention::WorldToCameraCv => -(self.orientation.inverse() * self.position),
        }
    }

    /// Rotation taking panorama-frame directions into the world.
    pub fn world_from_camera(&self) -> UnitQuaternion<f64> {
        match self.convention {
            Convention::CameraToWorldGl => self.orientation,
            Convention::WorldToCameraCv => self.orientation.inverse() * flip_yz(),
        }
    }

    /// The same physical camera expressed in `target`.
    pub fn to_convention(&self, target: Convention) -> Self {
        if target == self.convention {
            return *self;
        }
        let center = self.center();
        let rot = self.world_from_camera();
        match target {
            Convention::CameraToWorldGl => Self::looking(center, rot),
            Convention::WorldToCameraCv => {
                let cw = flip_yz() * rot.inverse();
                Self::from_parts(-(cw * center), cw, Convention::WorldToCameraCv)
            }
        }
    }

    /// Same orientation, center moved by `offset`.
    pub fn translated(&self, offset: Vector3<f64>) -> Self {
        let gl = self.to_convention(Convention::CameraToWorldGl);
        Self::looking(gl.position + offset, gl.orientation).to_convention(self.convention)
    }

    /// Maps a world point into the panorama camera frame.
    pub fn world_to_camera_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.world_from_camera().inverse() * (p - self.center())
    }

    /// Heading (yaw about +y) of the camera's forward axis, in radians.
    pub fn yaw(&self) -> f64 {
        let f = self.world_from_camera() * Vector3::z();
        f.x.atan2(f.z)
    }
}
