use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit, UnitQuaternion, Vector3};
use panomem_core::geometry::*;
use proptest::prelude::*;

fn rot(ax: f64, ay: f64, az: f64, angle: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(ax, ay, az)), angle)
}

fn angle_between(a: &Rotation3<f64>, b: &Rotation3<f64>) -> f64 {
    UnitQuaternion::from_rotation_matrix(a).angle_to(&UnitQuaternion::from_rotation_matrix(b))
}

fn axis() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn umeyama_recovers_similarity(
        (ax, ay, az) in axis(), angle in 0.0..3.1f64, log_s in (0.1f64).ln()..(10.0f64).ln(),
        tx in -5.0..5.0f64, ty in -5.0..5.0f64, tz in -5.0..5.0f64, seed in 0u64..1000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let truth = SimilarityTransform::new(log_s.exp(), rot(ax, ay, az, angle), Vector3::new(tx, ty, tz));
        let src: Vec<_> = (0..12)
            .map(|_| Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let dst = apply_similarity(&truth, &src);
        let est = umeyama_align(&src, &dst, true).unwrap();
        prop_assert!((est.scale - truth.scale).abs() < 1e-6 * truth.scale.max(1.0));
        prop_assert!(angle_between(&est.rotation, &truth.rotation) < 1e-6);
        prop_assert!((est.translation - truth.translation).norm() < 1e-6);
    }

    #[test]
    fn rotation_error_is_a_metric(
        a in axis(), b in axis(), c in axis(), ta in 0.0..PI, tb in 0.0..PI, tc in 0.0..PI,
    ) {
        let pose = |(x, y, z): (f64, f64, f64), t: f64| {
            CameraPose::looking(Vector3::zeros(), UnitQuaternion::from_rotation_matrix(&rot(x, y, z, t)))
        };
        let (p, q, r) = (pose(a, ta), pose(b, tb), pose(c, tc));
        let pq = relative_rotation_error(&p, &q);
        prop_assert!((pq - relative_rotation_error(&q, &p)).abs() < 1e-6);
        prop_assert!((0.0..=180.0 + 1e-9).contains(&pq));
        let pr = relative_rotation_error(&p, &r);
        let qr = relative_rotation_error(&q, &r);
        prop_assert!(pr <= pq + qr + 1e-6);
    }

    #[test]
    fn convention_round_trip(
        (ax, ay, az) in axis(), angle in 0.0..PI, cx in -9.0..9.0f64, cz in -9.0..9.0f64,
    ) {
        let q = UnitQuaternion::from_rotation_matrix(&rot(ax, ay, az, angle));
        let gl = CameraPose::looking(Vector3::new(cx, 1.5, cz), q);
        let cv = gl.to_convention(Convention::WorldToCameraCv);
        prop_assert_eq!(cv.convention(), Convention::WorldToCameraCv);
        prop_assert!((cv.center() - gl.center()).norm() < 1e-9);
        let back = cv.to_convention(Convention::CameraToWorldGl);
        prop_assert!((back.position() - gl.position()).norm() < 1e-9);
        prop_assert!(back.orientation().angle_to(&gl.orientation()) < 1e-9);
        let n: f64 = cv.quat_wxyz().iter().map(|v| v * v).sum();
        prop_assert!((n - 1.0).abs() < 1e-12);
    }
}

#[test]
fn gl_forward_is_cv_minus_z() {
    // A gl camera looking down world +z sees that direction on its cv -z axis.
    let cv = CameraPose::identity().to_convention(Convention::WorldToCameraCv);
    let p = cv.orientation() * Vector3::new(0.0, 0.0, 5.0) + cv.position();
    assert!((p - Vector3::new(0.0, 0.0, -5.0)).norm() < 1e-12);
}

#[test]
fn align_poses_recovers_scale_two() {
    let gt: Vec<_> = (0..6)
        .map(|i| CameraPose::from_yaw(Vector3::new(0.4 * i as f64, 1.5, 0.1 * (i * i) as f64), 0.3 * i as f64))
        .collect();
    let t = SimilarityTransform::new(2.0, rot(0.2, 1.0, -0.3, 0.7), Vector3::new(1.0, -2.0, 0.5));
    let est: Vec<_> = gt
        .iter()
        .map(|p| t.apply_to_pose(p).to_convention(Convention::WorldToCameraCv))
        .collect();
    let a = align_poses(&est, &gt, true).unwrap();
    assert!((a.scale - 0.5).abs() < 1e-6);
    let inv = t.inverse();
    assert!(angle_between(&a.rotation, &inv.rotation) < 1e-9);
    assert!((a.translation - inv.translation).norm() < 1e-9);
}

#[test]
fn align_handles_collinear_and_single_cameras() {
    let gt: Vec<_> = (0..5).map(|i| CameraPose::from_yaw(Vector3::new(i as f64, 0.0, 0.0), 0.0)).collect();
    let t = SimilarityTransform::new(3.0, rot(0.0, 1.0, 0.0, 1.0), Vector3::new(0.0, 2.0, 0.0));
    let est: Vec<_> = gt.iter().map(|p| t.apply_to_pose(p)).collect();
    let a = align_poses(&est, &gt, true).unwrap();
    assert!((a.scale - 1.0 / 3.0).abs() < 1e-9);
    let one = align_poses(&est[..1], &gt[..1], true).unwrap();
    assert!((one.scale - 1.0).abs() < 1e-12);
    assert!((one.apply(&est[0].center()) - gt[0].center()).norm() < 1e-9);
    let pts = [Vector3::zeros(), Vector3::x()];
    assert!(matches!(umeyama_align(&pts, &pts, true), Err(panomem_core::Error::Degenerate(_))));
}

/// Accuracy integrated on a fine threshold grid by the midpoint rule.
fn numeric_auc(errors: &[f64], tau_max: f64) -> f64 {
    let steps = 200_000;
    let dt = tau_max / steps as f64;
    let mut area = 0.0;
    for k in 0..steps {
        let tau = (k as f64 + 0.5) * dt;
        let acc = errors.iter().filter(|&&e| e <= tau).count() as f64 / errors.len() as f64;
        area += acc * dt;
    }
    area / tau_max
}

#[test]
fn auc_matches_numeric_integral() {
    let rra = vec![1.0, 5.0, 12.0, 29.0, 45.0, 0.0];
    let rta = vec![3.0, 2.0, 20.0, 31.0, 1.0, 0.0];
    let errs = PoseErrors::new(rra.clone(), rta.clone()).unwrap();
    let both: Vec<f64> = rra.iter().zip(&rta).map(|(a, b)| a.max(*b)).collect();
    let either: Vec<f64> = rra.iter().zip(&rta).map(|(a, b)| a.min(*b)).collect();
    let got = pose_auc(&errs, 30.0, AucCombine::BothWithin).unwrap();
    assert!((got - numeric_auc(&both, 30.0)).abs() < 1e-4);
    let got = pose_auc(&errs, 30.0, AucCombine::EitherWithin).unwrap();
    assert!((got - numeric_auc(&either, 30.0)).abs() < 1e-4);
    assert!(PoseErrors::new(vec![181.0], vec![0.0]).is_err());
    assert!(PoseErrors::new(vec![1.0], vec![]).is_err());
}

#[test]
fn perturbed_trajectory_errors() {
    let gt: Vec<_> = (0..4)
        .map(|i| CameraPose::from_yaw(Vector3::new(i as f64, 0.0, 1.0), 0.0))
        .collect();
    let mut est = gt.clone();
    est[2] = CameraPose::from_yaw(est[2].center(), 10f64.to_radians());
    let e = pose_errors(&est, &gt).unwrap();
    assert!((e.rra[1] - 10.0).abs() < 1e-9);
    assert!(e.rra[0].abs() < 1e-9 && e.rta.iter().all(|t| t.abs() < 1e-6));
    assert!(pose_errors(&gt, &gt[..3]).is_err());
    let same = vec![gt[0]; 2];
    assert!(matches!(pose_errors(&same, &same), Err(panomem_core::Error::UndefinedDirection(_))));
}
