use super::{MotionKind, MotionParams, SimpleKind, TimedTrajectory};
use crate::scene::{ObjectRef, SceneSpec};

fn phrase(scene: &SceneSpec, obj: Option<ObjectRef>) -> String {
    obj.and_then(|o| scene.object_phrase(o).ok()).unwrap_or_else(|| "the scene".to_string())
}

/// Push/pull clauses name the first moving object when the scene has one.
fn simple_clause(kind: SimpleKind, scene: &SceneSpec) -> String {
    let mut s = format!("the camera {}", kind.verb());
    if matches!(kind, SimpleKind::PushIn | SimpleKind::PullOut) {
        if let Some(o) = scene.moving_objects.first() {
            s.push_str(&format!(", focusing on a moving {}", o.kind.noun()));
        }
    }
    s
}

fn sentence(clause: &str) -> String {
    format!("{}.", crate::scene::capitalize(clause))
}

/// Camera instruction `c_m` without the `"Camera: "` prefix; empty for a
/// static camera.
pub fn camera_instruction(traj: &TimedTrajectory, scene: &SceneSpec) -> String {
    match (&traj.kind, &traj.params) {
        (MotionKind::Simple(SimpleKind::Static), _) => String::new(),
        (MotionKind::Simple(k), _) => sentence(&simple_clause(*k, scene)),
        (MotionKind::Composed(a, b), _) => {
            format!("{} Then {}.", sentence(&simple_clause(*a, scene)), simple_clause(*b, scene))
        }
        (MotionKind::SeekThenFocus, MotionParams::SeekThenFocus { target, .. }) => {
            let p = phrase(scene, Some(*target));
            format!("The camera pans around, searching for {p}. Then the camera locks onto it and pushes forward.")
        }
        (MotionKind::SwitchFocus, MotionParams::SwitchFocus { first, second }) => format!(
            "The camera focuses on {}, then turns to focus on {}.",
            phrase(scene, Some(*first)),
            phrase(scene, Some(*second))
        ),
        (MotionKind::Orbit, MotionParams::Orbit { target, degrees, .. }) => {
            let dir = if *degrees >= 0.0 { "clockwise" } else { "counterclockwise" };
            format!("The camera orbits {dir} around {}.", phrase(scene, *target))
        }
        (MotionKind::DollyZoom, MotionParams::DollyZoom { focus, d0, d1, .. }) => {
            let way = if d1 < d0 { "moves toward" } else { "moves away from" };
            format!(
                "The camera performs a dolly zoom: it {way} {} while zooming to keep it the same size.",
                phrase(scene, *focus)
            )
        }
        (MotionKind::HandheldShake, _) => base_with(traj, scene, "with a handheld shake"),
        (MotionKind::ExplosiveShake, _) => base_with(traj, scene, "and shakes violently as if from an explosion"),
        (MotionKind::RollRotation(d), _) => format!("The camera rolls {d} degrees around its viewing axis."),
        // Params that disagree with the kind fall back to a kind-only template.
        (kind, _) => format!("The camera performs a {} motion.", kind.to_string().replace('_', " ")),
    }
}

fn base_with(traj: &TimedTrajectory, scene: &SceneSpec, suffix: &str) -> String {
    let base_kind = match &traj.params {
        MotionParams::HandheldShake { base_kind, .. } | MotionParams::ExplosiveShake { base_kind, .. } => *base_kind,
        _ => MotionKind::Simple(SimpleKind::Static),
    };
    match base_kind {
        MotionKind::Simple(SimpleKind::Static) => format!("The camera is held still {suffix}."),
        MotionKind::Simple(k) => format!("{} {suffix}.", crate::scene::capitalize(&simple_clause(k, scene))),
        other => format!("The camera performs a {} motion {suffix}.", other.to_string().replace('_', " ")),
    }
}

/// Full camera prompt, `"Camera: <c_m>"`, or empty when the camera is static.
pub fn describe(traj: &TimedTrajectory, scene: &SceneSpec) -> String {
    let c = camera_instruction(traj, scene);
    if c.is_empty() {
        c
    } else {
        format!("Camera: {c}")
    }
}
