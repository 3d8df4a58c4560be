//! Procedural colored point scenes used as hidden ground truth.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use nalgebra::Vector3;
// Float methods are inherent once std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::geometry::CameraPose;
use crate::memory::MemPoint;
use crate::raster::{render_scene, RasterConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorScheme {
    /// One flat color per primitive face group.
    #[default]
    Solid,
    /// Alternating light/dark squares of `CHECKER_SIZE` meters.
    Checker,
}

pub const CHECKER_SIZE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    /// Size along x, y (height) and z in meters, centered on the origin in
    /// x and z with the floor at y = 0.
    pub extent: [f64; 3],
    /// Close the scene with walls and a ceiling.
    pub enclosed: bool,
    pub pillars: usize,
    pub boxes: usize,
    pub spheres: usize,
    /// Surface samples per square meter.
    pub density: f64,
    pub colors: ColorScheme,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self::room_1()
    }
}

impl SceneSpec {
    /// The canonical test room: 8 × 3 × 8 m interior with four pillars.
    pub fn room_1() -> Self {
        Self {
            seed: 1,
            extent: [8.0, 3.0, 8.0],
            enclosed: true,
            pillars: 4,
            boxes: 0,
            spheres: 0,
            density: 2000.0,
            colors: ColorScheme::Solid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(invalid("density must be positive"));
        }
        if self.extent.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("extent must be positive"));
        }
        Ok(())
    }
}

/// Distinct saturated colors via golden-ratio hue stepping.
pub fn palette(i: usize) -> [f32; 3] {
    let hue = (0.11 + i as f64 * 0.618_033_988_75).fract();
    let value = if i % 2 == 0 { 0.9 } else { 0.65 };
    hsv(hue, 0.75, value)
}

fn hsv(h: f64, s: f64, v: f64) -> [f32; 3] {
    let h6 = h * 6.0;
    let k = h6.floor();
    let f = h6 - k;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    let (r, g, b) = match k as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r as f32, g as f32, b as f32]
}

struct Builder {
    rng: ChaCha8Rng,
    density: f64,
    colors: ColorScheme,
    points: Vec<MemPoint>,
    next_color: usize,
}

impl Builder {
    fn color_at(&self, base: [f32; 3], s: f64, t: f64) -> [f32; 3] {
        match self.colors {
            ColorScheme::Solid => base,
            ColorScheme::Checker => {
                let parity = ((s / CHECKER_SIZE).floor() + (t / CHECKER_SIZE).floor()) as i64;
                if parity.rem_euclid(2) == 0 {
                    base
                } else {
                    base.map(|c| c * 0.55)
                }
            }
        }
    }

    fn next_color(&mut self) -> [f32; 3] {
        let c = palette(self.next_color);
        self.next_color += 1;
        c
    }

    /// `round(|a|·|b|·density)` jittered-grid samples on the parallelogram
    /// `origin + s·a + t·b`, `s, t ∈ [0, 1]`.
    fn quad(&mut self, origin: Vector3<f64>, a: Vector3<f64>, b: Vector3<f64>, color: [f32; 3]) {
        let (la, lb) = (a.norm(), b.norm());
        let n = (la * lb * self.density).round() as usize;
        if n == 0 {
            return;
        }
        let cols = ((n as f64 * la / lb).sqrt().ceil() as usize).clamp(1, n);
        let rows = n.div_ceil(cols);
        for k in 0..n {
            let s = ((k % cols) as f64 + self.rng.random::<f64>()) / cols as f64;
            let t = ((k / cols) as f64 + self.rng.random::<f64>()) / rows as f64;
            let p = origin + a * s + b * t;
            let rgb = self.color_at(color, s * la, t * lb);
            self.points.push(MemPoint::new(p, rgb, 1.0, 0));
        }
    }

    /// Axis-aligned box faces; `faces` selects −x,+x,−y,+y,−z,+z.
    fn cuboid(&mut self, min: Vector3<f64>, max: Vector3<f64>, faces: [bool; 6], color: [f32; 3]) {
        let d = max - min;
        let (ex, ey, ez) = (Vector3::x() * d.x, Vector3::y() * d.y, Vector3::z() * d.z);
        let quads = [
            (min, ez, ey),
            (min + ex, ez, ey),
            (min, ex, ez),
            (min + ey, ex, ez),
            (min, ex, ey),
            (min + ez, ex, ey),
        ];
        for ((o, a, b), on) in quads.into_iter().zip(faces) {
            if on {
                self.quad(o, a, b, color);
            }
        }
    }

    fn sphere(&mut self, center: Vector3<f64>, radius: f64, color: [f32; 3]) {
        let n = (4.0 * PI * radius * radius * self.density).round() as usize;
        for _ in 0..n {
            let z: f64 = self.rng.random_range(-1.0..1.0);
            let az: f64 = self.rng.random_range(0.0..TAU);
            let r = (1.0 - z * z).sqrt();
            let d = Vector3::new(r * az.cos(), z, r * az.sin());
            let rgb = self.color_at(color, az * radius, z * radius);
            self.points.push(MemPoint::new(center + d * radius, rgb, 1.0, 0));
        }
    }
}

/// Samples the scene described by `spec`. Identical specs give identical
/// clouds.
pub fn make_scene(spec: &SceneSpec) -> Result<Vec<MemPoint>> {
    spec.validate()?;
    let [sx, sy, sz] = spec.extent;
    let (hx, hz) = (sx / 2.0, sz / 2.0);
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        density: spec.density,
        colors: spec.colors,
        points: Vec::new(),
        next_color: 0,
    };
    let floor = b.next_color();
    b.quad(Vector3::new(-hx, 0.0, -hz), Vector3::x() * sx, Vector3::z() * sz, floor);
    if spec.enclosed {
        let ceiling = b.next_color();
        b.quad(Vector3::new(-hx, sy, -hz), Vector3::x() * sx, Vector3::z() * sz, ceiling);
        let walls = [
            (Vector3::new(-hx, 0.0, -hz), Vector3::x() * sx),
            (Vector3::new(hx, 0.0, -hz), Vector3::z() * sz),
            (Vector3::new(hx, 0.0, hz), Vector3::x() * -sx),
            (Vector3::new(-hx, 0.0, hz), Vector3::z() * -sz),
        ];
        for (o, a) in walls {
            let c = b.next_color();
            b.quad(o, a, Vector3::y() * sy, c);
        }
    }

    const PILLAR_WIDTH: f64 = 0.5;
    for i in 0..spec.pillars {
        let ang = PI / 4.0 + TAU * i as f64 / spec.pillars as f64;
        let (cx, cz) = (0.7 * hx * 2.0.sqrt() * ang.cos(), 0.7 * hz * 2.0.sqrt() * ang.sin());
        let h = PILLAR_WIDTH / 2.0;
        let c = b.next_color();
        b.cuboid(
            Vector3::new(cx - h, 0.0, cz - h),
            Vector3::new(cx + h, sy, cz + h),
            [true, true, false, false, true, true],
            c,
        );
    }
    for _ in 0..spec.boxes {
        let size = Vector3::new(
            b.rng.random_range(0.3..1.0),
            b.rng.random_range(0.3..1.0).min(sy),
            b.rng.random_range(0.3..1.0),
        );
        let cx = b.rng.random_range(-0.8 * hx..0.8 * hx);
        let cz = b.rng.random_range(-0.8 * hz..0.8 * hz);
        let min = Vector3::new(cx - size.x / 2.0, 0.0, cz - size.z / 2.0);
        let c = b.next_color();
        b.cuboid(min, min + size, [true, true, false, true, true, true], c);
    }
    for _ in 0..spec.spheres {
        let r = b.rng.random_range(0.2..0.6);
        let center = Vector3::new(
            b.rng.random_range(-0.8 * hx..0.8 * hx),
            b.rng.random_range(r..(sy - r).max(r + 1e-9)),
            b.rng.random_range(-0.8 * hz..0.8 * hz),
        );
        let c = b.next_color();
        b.sphere(center, r, c);
    }
    Ok(b.points)
}

/// Fraction of a `width × height` render from `pose` that the scene covers.
pub fn scene_visibility(scene: &[MemPoint], pose: &CameraPose, width: usize, height: usize) -> Result<f64> {
    Ok(render_scene(scene, pose, width, height, &RasterConfig::default())?.covered_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_count_matches_density() {
        let spec = SceneSpec {
            extent: [1.0, 1.0, 1.0],
            enclosed: false,
            pillars: 0,
            density: 2000.0,
            ..SceneSpec::room_1()
        };
        assert_eq!(make_scene(&spec).unwrap().len(), 2000);
        let spec = SceneSpec { density: 10.4, ..spec };
        assert_eq!(make_scene(&spec).unwrap().len(), 10);
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = SceneSpec {
            density: 50.0,
            boxes: 2,
            spheres: 2,
            ..SceneSpec::room_1()
        };
        assert_eq!(make_scene(&spec).unwrap(), make_scene(&spec).unwrap());
        let bad = SceneSpec { density: 0.0, ..spec };
        assert!(make_scene(&bad).is_err());
    }

    #[test]
    fn palette_is_distinct() {
        for i in 0..12 {
            for j in 0..i {
                assert_ne!(palette(i), palette(j));
            }
        }
    }

    #[test]
    fn empty_scene_is_invisible() {
        assert_eq!(scene_visibility(&[], &CameraPose::identity(), 16, 8).unwrap(), 0.0);
    }
}
