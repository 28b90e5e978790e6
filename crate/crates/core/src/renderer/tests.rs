use super::*;
use crate::geometry::look_at;
use crate::scene::{Background, MovingObject, ObjectMotion};
use crate::trajectory::static_trajectory;

fn still(kind: MovingKind, base: [f64; 3], scale: f64) -> MovingObject {
    MovingObject { kind, start: base, scale, motion: ObjectMotion::Linear { velocity: [0.0; 3] }, color: [200, 60, 40] }
}

fn bare(background: Background) -> SceneSpec {
    SceneSpec::empty(background, FloorTexture::BlackSand)
}

fn intr() -> Intrinsics {
    Intrinsics::from_hfov(128, 96, 60.0).unwrap()
}

fn bbox(frame: &Frame, id: u32) -> Option<(usize, usize, usize, usize)> {
    let w = frame.image.width as usize;
    let mut b: Option<(usize, usize, usize, usize)> = None;
    for (i, &v) in frame.ids.iter().enumerate() {
        if v == id {
            let (x, y) = (i % w, i / w);
            b = Some(match b {
                None => (x, x, y, y),
                Some((x0, x1, y0, y1)) => (x0.min(x), x1.max(x), y0.min(y), y1.max(y)),
            });
        }
    }
    b
}

#[test]
fn empty_sky_is_uniform() {
    let scene = bare(Background::Sky);
    // Looking well above the horizon, nothing but sky is visible.
    let pose = look_at(Vec3::new(0.0, 1.6, 0.0), Vec3::new(0.0, 11.6, -6.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
    let f = render_frame(&scene, &pose, &intr(), 0, 8.0);
    assert!(f.image.data.chunks(3).all(|p| p == SKY_COLOR));
    assert!(f.depth.iter().all(|d| d.is_infinite()));
    assert!(f.ids.iter().all(|&i| i == ids::SKY));
}

#[test]
fn mountains_and_floor_appear() {
    let pose = look_at(Vec3::new(0.0, 1.6, 0.0), Vec3::new(0.0, 1.6, -10.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
    let f = render_frame(&bare(Background::BothMountains), &pose, &intr(), 0, 8.0);
    assert!(f.count(ids::MOUNTAIN) > 100);
    assert!(f.count(ids::FLOOR) > 1000);
    let g = render_frame(&bare(Background::Sky), &pose, &intr(), 0, 8.0);
    assert_eq!(g.count(ids::MOUNTAIN), 0);
}

#[test]
fn cube_face_matches_pinhole_size() {
    let i = intr();
    for (d, s) in [(4.0, 1.0), (6.0, 1.5), (3.0, 0.5)] {
        let mut scene = bare(Background::Sky);
        scene.moving_objects.push(still(MovingKind::Cube, [0.0, 0.0, -(d + 0.5 * s)], s));
        let eye = Vec3::new(0.0, 0.5 * s, 0.0);
        let pose = look_at(eye, eye + Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let f = render_frame(&scene, &pose, &i, 0, 8.0);
        let (x0, x1, y0, y1) = bbox(&f, ids::MOVING_BASE).unwrap();
        let expect = i.focal_px * s / d;
        let (wpx, hpx) = ((x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64);
        assert!((wpx - expect).abs() <= 1.0, "width {wpx} vs {expect}");
        assert!((hpx - expect).abs() <= 1.0, "height {hpx} vs {expect}");
    }
}

#[test]
fn hidden_cube_contributes_nothing() {
    let mut scene = bare(Background::Sky);
    scene.moving_objects.push(still(MovingKind::Cube, [0.0, 0.0, -5.0], 2.0));
    scene.moving_objects.push(still(MovingKind::Cube, [0.0, 0.5, -8.0], 0.5));
    let eye = Vec3::new(0.0, 1.0, 0.0);
    let pose = look_at(eye, Vec3::new(0.0, 1.0, -5.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
    let f = render_frame(&scene, &pose, &intr(), 0, 8.0);
    assert!(f.count(ids::MOVING_BASE) > 0);
    assert_eq!(f.count(ids::MOVING_BASE + 1), 0);
    // Swapping draw order must not change the result.
    scene.moving_objects.swap(0, 1);
    let g = render_frame(&scene, &pose, &intr(), 0, 8.0);
    assert_eq!(g.count(ids::MOVING_BASE), 0);
    assert_eq!(g.count(ids::MOVING_BASE + 1), f.count(ids::MOVING_BASE));
}

#[test]
fn near_plane_clipping_keeps_floor_under_camera() {
    let pose = look_at(Vec3::new(0.0, 0.3, 0.0), Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
    let f = render_frame(&bare(Background::Sky), &pose, &intr(), 0, 8.0);
    let w = 128;
    // Bottom row sees floor everywhere, depth positive and finite.
    for x in 0..w {
        let i = 95 * w + x;
        assert_eq!(f.ids[i], ids::FLOOR);
        assert!(f.depth[i].is_finite() && f.depth[i] > 0.0);
    }
}

#[test]
fn moving_sphere_centroid_is_monotone() {
    let mut scene = bare(Background::Sky);
    scene.moving_objects.push(MovingObject {
        kind: MovingKind::Sphere,
        start: [-3.0, 0.0, -8.0],
        scale: 1.0,
        motion: ObjectMotion::Linear { velocity: [1.0, 0.0, 0.0] },
        color: [220, 50, 50],
    });
    let pose = look_at(Vec3::new(0.0, 1.5, 0.0), Vec3::new(0.0, 0.5, -8.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
    let traj = static_trajectory(&pose, &intr(), 25, 8.0).unwrap();
    let frames = render_frames(&scene, &traj);
    let cx: Vec<f64> = frames
        .iter()
        .map(|f| {
            let (mut s, mut n) = (0.0, 0.0);
            for (i, &id) in f.ids.iter().enumerate() {
                if id == ids::MOVING_BASE {
                    s += (i % 128) as f64;
                    n += 1.0;
                }
            }
            s / n
        })
        .collect();
    assert!(cx.windows(2).all(|w| w[1] > w[0]), "{cx:?}");
}

#[test]
fn render_is_deterministic_and_static_clip_is_constant() {
    let scene = crate::scene::sample_scene(11, &crate::scene::SceneConfig::default()).unwrap();
    let mut still_scene = scene.clone();
    still_scene.moving_objects.clear();
    let pose = look_at(Vec3::new(2.0, 1.6, 12.0), Vec3::new(0.0, 0.5, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
    let traj = static_trajectory(&pose, &intr(), 6, 8.0).unwrap();
    let a = render_frames(&scene, &traj);
    let b = render_frames(&scene, &traj);
    assert_eq!(a, b);
    let s = render_frames(&still_scene, &traj);
    assert!(s.iter().all(|f| f.image == s[0].image));
    let (video, records) = render_video(&scene, &traj);
    assert_eq!(video.frames, 6);
    assert_eq!(records, crate::trajectory::io::records(&traj));
    assert_eq!(video.to_images()[3], a[3].image);
}
