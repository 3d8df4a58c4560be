use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{UnitQuaternion, Vector3};
use panomem_core::geometry::CameraPose;
use panomem_core::memory::MemPoint;
use panomem_core::raster::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent pixel lookup: longitude from +z toward +x, latitude up,
/// pixel centers on integer coordinates.
fn oracle_pixel(d: Vector3<f64>, w: usize, h: usize) -> (usize, usize) {
    let d = d.normalize();
    let lon = d.x.atan2(d.z);
    let lat = d.y.asin();
    let u = (lon + PI) / (2.0 * PI) * w as f64;
    let v = (PI / 2.0 - lat) / PI * h as f64;
    let col = ((u + 0.5).floor() as i64).rem_euclid(w as i64) as usize;
    let row = ((v + 0.5).floor() as i64).clamp(0, h as i64 - 1) as usize;
    (col, row)
}

fn random_scene(rng: &mut ChaCha8Rng, n: usize) -> Vec<MemPoint> {
    (0..n)
        .map(|_| {
            let p = Vector3::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
            );
            let rgb = [rng.random(), rng.random(), rng.random()];
            MemPoint::new(p, rgb, 1.0, 0)
        })
        .collect()
}

fn random_pose(rng: &mut ChaCha8Rng) -> CameraPose {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let rot = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), rng.random_range(0.0..PI));
    CameraPose::looking(Vector3::new(rng.random_range(-1.0..1.0), 0.0, rng.random_range(-1.0..1.0)), rot)
}

#[test]
fn depth_is_brute_force_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (w, h) = (128, 64);
    for _ in 0..5 {
        let scene = random_scene(&mut rng, 3000);
        let pose = random_pose(&mut rng);
        let r = reproject(&scene, &pose, w, h, &RasterConfig::default()).unwrap();
        let rot = pose.world_from_camera().inverse();
        let mut best: HashMap<(usize, usize), (f64, [f32; 3])> = HashMap::new();
        for p in &scene {
            let rel = p.position() - pose.center();
            let dist = rel.norm();
            let px = oracle_pixel(rot * rel, w, h);
            let e = best.entry(px).or_insert((f64::INFINITY, [0.0; 3]));
            if dist < e.0 {
                *e = (dist, p.rgb);
            }
        }
        let depth = r.image.depth.as_ref().unwrap();
        for row in 0..h {
            for col in 0..w {
                let i = row * w + col;
                match best.get(&(col, row)) {
                    Some(&(d, rgb)) => {
                        assert_eq!(depth[i], d as f32);
                        assert_eq!(r.image.rgb[i], rgb);
                        assert!(r.mask()[i]);
                    }
                    None => {
                        assert!(!r.mask()[i]);
                        assert_eq!(r.image.rgb[i], RasterConfig::default().background);
                    }
                }
            }
        }
    }
}

#[test]
fn unproject_then_reproject_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (w, h) = (96, 48);
    let scene = random_scene(&mut rng, 20000);
    let pose = random_pose(&mut rng);
    let cfg = RasterConfig::default();
    let first = reproject(&scene, &pose, w, h, &cfg).unwrap();
    let pts = unproject(&first.image, &pose, 1, None, 0).unwrap();
    assert_eq!(pts.len(), first.mask().iter().filter(|&&m| m).count());
    let second = reproject(&pts, &pose, w, h, &cfg).unwrap();
    assert_eq!(first.mask(), second.mask());
    for (i, &m) in first.mask().iter().enumerate() {
        if m {
            assert_eq!(first.image.rgb[i], second.image.rgb[i]);
        }
    }
}

#[test]
fn stride_counts_points() {
    let img = panomem_core::EquirectImage::filled(40, 20, [0.1, 0.2, 0.3])
        .unwrap()
        .with_depth(vec![2.0; 800], vec![true; 800])
        .unwrap();
    for stride in 1..6 {
        let n = unproject(&img, &CameraPose::identity(), stride, None, 0).unwrap().len();
        assert_eq!(n, 40usize.div_ceil(stride) * 20usize.div_ceil(stride));
    }
}

#[test]
fn splat_covers_square() {
    let p = MemPoint::new(Vector3::new(0.0, 0.0, 3.0), [1.0, 0.0, 0.0], 1.0, 0);
    for (radius, side) in [(1u32, 1usize), (2, 3), (3, 5)] {
        let cfg = RasterConfig {
            splat_radius: radius,
            ..RasterConfig::default()
        };
        let r = reproject(&[p], &CameraPose::identity(), 64, 32, &cfg).unwrap();
        assert_eq!(r.mask().iter().filter(|&&m| m).count(), side * side);
        assert!((r.covered_fraction - (side * side) as f64 / 2048.0).abs() < 1e-12);
    }
}

#[test]
fn cubemap_path_agrees_with_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shell: Vec<MemPoint> = (0..200_000)
        .map(|_| {
            let d = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let d = d.normalize();
            let rgb = [(d.x > 0.0) as u8 as f32, (d.y > 0.0) as u8 as f32, (d.z > 0.0) as u8 as f32];
            MemPoint::new(d * 3.0, rgb, 1.0, 0)
        })
        .collect();
    let pose = CameraPose::identity();
    let cfg = RasterConfig::default();
    let direct = reproject(&shell, &pose, 64, 32, &cfg).unwrap();
    let cube = reproject_via_cubemap(&shell, &pose, 64, 32, 32, &cfg).unwrap();
    assert!(cube.covered_fraction > 0.99);
    let same = direct
        .image
        .rgb
        .iter()
        .zip(&cube.image.rgb)
        .filter(|(a, b)| a == b)
        .count();
    assert!(same as f64 / 2048.0 > 0.9, "{same}");
}

#[test]
fn points_behind_nothing_are_background() {
    let r = reproject(&[], &CameraPose::identity(), 16, 8, &RasterConfig::default()).unwrap();
    assert_eq!(r.covered_fraction, 0.0);
    assert!(reproject(&[], &CameraPose::identity(), 16, 7, &RasterConfig::default()).is_err());
}
