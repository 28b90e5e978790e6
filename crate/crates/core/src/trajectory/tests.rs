use super::*;
use crate::geometry::{relative_pose, rotation_angle};
use crate::scene::{Background, FloorTexture, MovingKind, MovingObject, ObjectMotion, StaticKind, StaticObject};

fn start() -> CameraPose {
    look_at(Vec3::new(0.5, 1.6, 8.0), Vec3::new(-1.0, 0.8, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap()
}

fn intr() -> Intrinsics {
    Intrinsics::from_hfov(64, 48, 60.0).unwrap()
}

fn scene() -> SceneSpec {
    let mut s = SceneSpec::empty(Background::Sky, FloorTexture::ALL[0]);
    s.static_objects.push(StaticObject { kind: StaticKind::Tree, position: [3.0, 0.0, -2.0], scale: 2.0 });
    s.static_objects.push(StaticObject { kind: StaticKind::Bush, position: [-4.0, 0.0, 1.0], scale: 1.0 });
    s.moving_objects.push(MovingObject {
        kind: MovingKind::Sphere,
        start: [0.0, 0.0, 0.0],
        scale: 1.0,
        motion: ObjectMotion::Linear { velocity: [0.5, 0.0, 0.3] },
        color: [200, 40, 40],
    });
    s
}

fn aim_error(pose: &CameraPose, target: Vec3) -> f64 {
    let to = (target - pose.center()).normalized().unwrap();
    pose.forward().dot(to).clamp(-1.0, 1.0).acos()
}

#[test]
fn push_in_displacement_and_frame_zero() {
    let s = start();
    let t = make_simple(MotionKind::Simple(SimpleKind::PushIn), &s, 1.5, &intr(), 17, 8.0).unwrap();
    assert_eq!(t.len(), 17);
    assert_eq!(t.frames[0].pose, s);
    let disp = t.frames[16].pose.center() - s.center();
    let expected = s.forward() * (1.5 * 16.0 / 8.0);
    assert!((disp - expected).norm() < 1e-12);
    t.validate().unwrap();
}

#[test]
fn translations_keep_rotation() {
    for kind in SimpleKind::TRANSLATIONS {
        let t = make_simple(MotionKind::Simple(kind), &start(), 1.0, &intr(), 9, 8.0).unwrap();
        assert!(t.poses().all(|p| p.rotation == start().rotation), "{kind:?}");
    }
}

#[test]
fn pans_and_tilts_turn_the_right_way() {
    let s = start();
    let k = 8;
    let get = |kind| make_simple(MotionKind::Simple(kind), &s, 10.0, &intr(), k + 1, 8.0).unwrap().frames[k].pose;
    let pl = get(SimpleKind::PanLeft);
    assert!(pl.forward().dot(s.right()) < 0.0);
    assert!((rotation_angle(&pl.rotation, &s.rotation).unwrap().to_degrees() - 10.0).abs() < 1e-9);
    assert!((pl.center() - s.center()).norm() < 1e-12);
    assert!(get(SimpleKind::PanRight).forward().dot(s.right()) > 0.0);
    assert!(get(SimpleKind::TiltUp).forward().dot(s.up()) > 0.0);
    assert!(get(SimpleKind::TiltDown).forward().dot(s.up()) < 0.0);
    assert!(get(SimpleKind::PedestalUp).center().dot(s.up()) > s.center().dot(s.up()));
}

#[test]
fn make_simple_rejects_complex_kinds() {
    assert!(matches!(
        make_simple(MotionKind::Orbit, &start(), 1.0, &intr(), 9, 8.0),
        Err(TrajectoryError::WrongKind(MotionKind::Orbit))
    ));
}

#[test]
fn compose_halves_and_continuity() {
    let s = start();
    let a = SimpleMotion::with_default_speed(SimpleKind::PushIn);
    let b = SimpleMotion::with_default_speed(SimpleKind::TruckLeft);
    let t = compose(a, b, &s, &intr(), 49, 8.0).unwrap();
    assert_eq!(t.len(), 49);
    assert_eq!(handoff_frame(49), 24);
    let solo = make_simple(MotionKind::Simple(SimpleKind::PushIn), &s, a.speed, &intr(), 49, 8.0).unwrap();
    for k in 0..25 {
        assert_eq!(t.frames[k].pose, solo.frames[k].pose);
    }
    let handoff = t.frames[24].pose;
    for k in 25..49 {
        assert_eq!(t.frames[k].pose.rotation, handoff.rotation);
    }
    let stat = compose(a, SimpleMotion::new(SimpleKind::Static, 0.0), &s, &intr(), 49, 8.0).unwrap();
    assert!(stat.frames[24..].iter().all(|f| f.pose == stat.frames[24].pose));
}

#[test]
fn orbit_circle_sweep_and_aim() {
    let c = Vec3::new(1.0, 0.5, -2.0);
    let t = orbit(c, 6.0, 2.0, 360.0, &intr(), 49, 8.0, None).unwrap();
    for f in &t.frames {
        assert!(((f.pose.center() - c).norm() - 6.0f64.hypot(2.0)).abs() < 1e-9);
        assert!(aim_error(&f.pose, c) < 1e-6);
    }
    let q = t.frames[12].pose.center() - c;
    let az = q.x.atan2(q.z).to_degrees();
    assert!((az - 90.0).abs() < 1e-9, "{az}");
    assert!(orbit(c, 0.0, 1.0, 90.0, &intr(), 5, 8.0, None).is_err());
}

#[test]
fn dolly_zoom_compensation() {
    let target = Vec3::new(0.0, 1.0, 0.0);
    let i = intr();
    let t = dolly_zoom(target, &i, 8.0, 3.0, Vec3::new(0.0, 0.0, 1.0), 25, 8.0, None).unwrap();
    t.validate().unwrap();
    let ratio0 = t.frames[0].intrinsics.focal_px / 8.0;
    for f in &t.frames {
        let d = (f.pose.center() - target).norm();
        assert!((f.intrinsics.focal_px * 0.7 / d - ratio0 * 0.7).abs() < 1e-12);
        assert!(aim_error(&f.pose, target) < 1e-6);
    }
    let flat = dolly_zoom(target, &i, 5.0, 5.0, Vec3::new(1.0, 0.0, 0.0), 9, 8.0, None).unwrap();
    assert!(flat.frames.iter().all(|f| f.intrinsics == i));
}

#[test]
fn intrinsics_constant_unless_dolly() {
    let mut t = make_simple(MotionKind::Simple(SimpleKind::PushIn), &start(), 1.0, &intr(), 5, 8.0).unwrap();
    t.frames[3].intrinsics = t.frames[3].intrinsics.with_focal(99.0);
    assert!(t.validate().is_err());
}

#[test]
fn handheld_shake_properties() {
    let base = make_simple(MotionKind::Simple(SimpleKind::TruckRight), &start(), 1.0, &intr(), 49, 8.0).unwrap();
    let zero = handheld_shake(&base, 0.0, 0.0, 0.8, 3).unwrap();
    assert_eq!(zero.frames, base.frames);
    let a = handheld_shake(&base, 2.5, 0.05, 0.8, 7).unwrap();
    let b = handheld_shake(&base, 2.5, 0.05, 0.8, 7).unwrap();
    assert_eq!(a, b);
    let max_rot = a
        .frames
        .iter()
        .zip(&base.frames)
        .map(|(s, o)| rotation_angle(&s.pose.rotation, &o.pose.rotation).unwrap())
        .fold(0.0, f64::max);
    assert!((max_rot.to_degrees() - 2.5).abs() < 1e-9, "{}", max_rot.to_degrees());
    let max_t =
        a.frames.iter().zip(&base.frames).map(|(s, o)| (s.pose.center() - o.pose.center()).norm()).fold(0.0, f64::max);
    assert!((max_t - 0.05).abs() < 1e-9);
    assert_ne!(handheld_shake(&base, 2.5, 0.05, 0.8, 8).unwrap(), a);
    assert!(handheld_shake(&base, -1.0, 0.0, 0.8, 1).is_err());
}

#[test]
fn explosive_shake_properties() {
    let base = static_trajectory(&start(), &intr(), 49, 8.0).unwrap();
    let t = explosive_shake(&base, 10, 6.0, 0.9, 0.12, 5).unwrap();
    for k in 0..10 {
        assert_eq!(t.frames[k], base.frames[k]);
    }
    // Peak magnitudes of |sin| lobes decay.
    let mags: Vec<f64> =
        (0..49).map(|k| rotation_angle(&t.frames[k].pose.rotation, &base.frames[k].pose.rotation).unwrap()).collect();
    let peaks: Vec<f64> =
        (11..48).filter(|&k| mags[k] > mags[k - 1] && mags[k] >= mags[k + 1]).map(|k| mags[k]).collect();
    assert!(peaks.len() >= 3);
    assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{peaks:?}");
    for k in 10..49 {
        let expect = explosive_angle_deg(k, 10, 6.0, 0.9, 0.12).abs().to_radians();
        assert!((mags[k] - expect).abs() < 1e-9);
    }
    let none = explosive_shake(&base, 0, 0.0, 0.9, 0.12, 5).unwrap();
    assert!(none.frames.iter().zip(&base.frames).all(|(a, b)| a.pose.rotation.max_abs_diff(&b.pose.rotation) == 0.0));
    assert!(explosive_shake(&base, 49, 1.0, 1.0, 0.1, 5).is_err());
}

#[test]
fn seek_then_focus_locks_on() {
    let sc = scene();
    let target = ObjectRef::Moving(0);
    let p = SeekParams::with_defaults(target, 49);
    let t = seek_then_focus(&sc, &start(), &intr(), p, 49, 8.0).unwrap();
    assert_eq!(t.len(), 49);
    let last = &t.frames[48].pose;
    let tgt = sc.object_center(target, 48.0 / 8.0).unwrap();
    assert!(aim_error(last, tgt).to_degrees() < 0.5);

    // Yaw alternates sign across sweep extrema.
    let s = start();
    let yaw = |k: usize| t.frames[k].pose.forward().dot(s.right()).signum();
    let quarter = p.lock_frame / (4 * p.n_sweeps as usize);
    assert_eq!(yaw(quarter), -yaw(3 * quarter));

    let same = SeekParams { push_ratio: 1.0, ..p };
    let t1 = seek_then_focus(&sc, &start(), &intr(), same, 49, 8.0).unwrap();
    let settle = p.lock_frame + p.transition_frames;
    let d: Vec<f64> = (settle..49)
        .map(|k| (t1.frames[k].pose.center() - sc.object_center(target, k as f64 / 8.0).unwrap()).norm())
        .collect();
    assert!(d.iter().all(|x| (x - d[0]).abs() < 1e-9));

    let bad = SeekParams { target: ObjectRef::Moving(5), ..p };
    assert!(matches!(seek_then_focus(&sc, &start(), &intr(), bad, 49, 8.0), Err(TrajectoryError::UnknownTarget(_))));
}

#[test]
fn switch_focus_thirds() {
    let sc = scene();
    let c = Vec3::new(0.0, 1.5, 9.0);
    let (a, b) = (ObjectRef::Static(0), ObjectRef::Static(1));
    let t = switch_focus(&sc, c, &intr(), a, b, 48, 8.0).unwrap();
    let (n1, nm, _) = switch_focus_phases(48);
    let pa = sc.object_center(a, 0.0).unwrap();
    let pb = sc.object_center(b, 0.0).unwrap();
    for k in 0..n1 {
        assert!(aim_error(&t.frames[k].pose, pa) < 1e-6);
    }
    for k in n1 + nm..48 {
        assert!(aim_error(&t.frames[k].pose, pb) < 1e-6);
    }
    assert!(t.poses().all(|p| (p.center() - c).norm() < 1e-9));
    let same = switch_focus(&sc, c, &intr(), a, a, 48, 8.0).unwrap();
    assert!(same.poses().all(|p| p.rotation == same.frames[0].pose.rotation));
    assert!(switch_focus(&sc, c, &intr(), a, ObjectRef::Static(9), 48, 8.0).is_err());
}

#[test]
fn roll_rotation_cases() {
    let s = start();
    let t = roll_rotation(&s, &intr(), 180.0, 49, 8.0).unwrap();
    assert!((t.frames[48].pose.up() + s.up()).norm() < 1e-9);
    assert!(t.poses().all(|p| (p.center() - s.center()).norm() < 1e-9));
    let n = roll_rotation(&s, &intr(), 90.0, 49, 8.0).unwrap();
    let mid = rotation_angle(&n.frames[24].pose.rotation, &s.rotation).unwrap();
    assert!((mid.to_degrees() - 45.0).abs() < 1e-9);
    assert!((n.frames[24].pose.forward() - s.forward()).norm() < 1e-12);
    assert!(matches!(roll_rotation(&s, &intr(), 0.0, 49, 8.0), Err(TrajectoryError::BadAngle(_))));
    assert!(matches!(roll_rotation(&s, &intr(), 45.0, 49, 8.0), Err(TrajectoryError::BadAngle(_))));
}

#[test]
fn static_trajectory_is_identity_relative() {
    let t = static_trajectory(&start(), &intr(), 49, 8.0).unwrap();
    for f in &t.frames {
        assert_eq!(f, &t.frames[0]);
        let rel = relative_pose(&t.frames[0].pose, &f.pose);
        assert!(rel.rotation.max_abs_diff(&Mat3::identity()) < 1e-12);
        assert!(rel.translation.norm() < 1e-12);
    }
    assert_eq!(describe(&t, &scene()), "");
}

#[test]
fn describe_templates() {
    let sc = scene();
    let a = SimpleMotion::with_default_speed(SimpleKind::PushIn);
    let b = SimpleMotion::with_default_speed(SimpleKind::TruckLeft);
    let t = compose(a, b, &start(), &intr(), 49, 8.0).unwrap();
    assert_eq!(
        describe(&t, &sc),
        "Camera: The camera pushes forward, focusing on a moving sphere. Then the camera trucks left."
    );
    assert_eq!(describe(&t, &sc), describe(&t.clone(), &sc));

    let seek =
        seek_then_focus(&sc, &start(), &intr(), SeekParams::with_defaults(ObjectRef::Static(0), 49), 49, 8.0).unwrap();
    assert!(describe(&seek, &sc).starts_with("Camera: The camera pans around, searching for a tree."));

    let pan = make_simple(MotionKind::Simple(SimpleKind::PanLeft), &start(), 10.0, &intr(), 9, 8.0).unwrap();
    assert_eq!(describe(&pan, &sc), "Camera: The camera pans left.");
    let all = SceneSpec::empty(Background::Sky, FloorTexture::ALL[0]);
    let push = make_simple(MotionKind::Simple(SimpleKind::PushIn), &start(), 1.0, &intr(), 9, 8.0).unwrap();
    assert_eq!(describe(&push, &all), "Camera: The camera pushes forward.");
}

#[test]
fn jsonl_round_trip_is_bit_exact() {
    let base = make_simple(MotionKind::Simple(SimpleKind::PanRight), &start(), 12.0, &intr(), 13, 8.0).unwrap();
    let t = handheld_shake(&base, 1.0, 0.02, 0.7, 11).unwrap();
    let mut buf = Vec::new();
    io::write_jsonl(&t, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 14);
    let back = io::read_jsonl(&buf[..]).unwrap();
    assert_eq!(back, t);

    let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    assert!(matches!(io::read_jsonl(truncated.as_bytes()), Err(TrajectoryError::Parse { .. })));
}

#[test]
fn every_catalogue_kind_builds() {
    let sc = scene();
    for kind in MotionKind::catalogue() {
        let t = build_default(kind, &sc, &start(), &intr(), 17, 8.0, 42).unwrap();
        assert_eq!(t.kind, kind);
        assert_eq!(t.len(), 17);
        t.validate().unwrap();
        assert!(!describe(&t, &sc).is_empty(), "{kind}");
    }
}
