//! Seeded procedural low-poly scenes and their content descriptions.
//!
//! A scene is a floor plane, a background, static vegetation and a few moving
//! geometric primitives. All positions are base points on the floor (`y = 0`);
//! meshes are built upwards from there.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("invalid scene config: {0}")]
    Config(String),
    #[error("could not place {what} after {attempts} attempts")]
    PlacementFailure { what: String, attempts: u32 },
    #[error("unknown object {0}")]
    UnknownObject(ObjectRef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    Sky,
    FarMountains,
    CloserMountains,
    BothMountains,
}

impl Background {
    pub const ALL: [Background; 4] =
        [Background::Sky, Background::FarMountains, Background::CloserMountains, Background::BothMountains];

    pub fn has_far(self) -> bool {
        matches!(self, Background::FarMountains | Background::BothMountains)
    }

    pub fn has_closer(self) -> bool {
        matches!(self, Background::CloserMountains | Background::BothMountains)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorTexture {
    BrickStone,
    BlackSand,
    GreenGrass,
    BrownGround,
    YellowGrass,
    LightGreenGrass,
}

impl FloorTexture {
    pub const ALL: [FloorTexture; 6] = [
        FloorTexture::BrickStone,
        FloorTexture::BlackSand,
        FloorTexture::GreenGrass,
        FloorTexture::BrownGround,
        FloorTexture::YellowGrass,
        FloorTexture::LightGreenGrass,
    ];

    /// Name used in content prompts.
    pub fn phrase(self) -> &'static str {
        match self {
            FloorTexture::BrickStone => "brick and stone floor",
            FloorTexture::BlackSand => "black sand ground",
            FloorTexture::GreenGrass => "green grassland",
            FloorTexture::BrownGround => "brown ground",
            FloorTexture::YellowGrass => "yellow grassland",
            FloorTexture::LightGreenGrass => "light green grassland",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|f| *f == self).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaticKind {
    Tree,
    Bush,
    Grass,
}

impl StaticKind {
    pub const ALL: [StaticKind; 3] = [StaticKind::Tree, StaticKind::Bush, StaticKind::Grass];

    pub fn noun_phrase(self) -> &'static str {
        match self {
            StaticKind::Tree => "a tree",
            StaticKind::Bush => "a bush",
            StaticKind::Grass => "a patch of grass",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MovingKind {
    Sphere,
    Cube,
    Polygon,
    Cylinder,
}

impl MovingKind {
    pub const ALL: [MovingKind; 4] = [MovingKind::Sphere, MovingKind::Cube, MovingKind::Polygon, MovingKind::Cylinder];

    pub fn noun(self) -> &'static str {
        match self {
            MovingKind::Sphere => "sphere",
            MovingKind::Cube => "cube",
            MovingKind::Polygon => "polygon",
            MovingKind::Cylinder => "cylinder",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticObject {
    pub kind: StaticKind,
    /// Base point on the floor.
    pub position: [f64; 3],
    /// Overall height in metres.
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectMotion {
    /// Constant horizontal velocity (m/s), reflected elastically at the interior bounds.
    Linear { velocity: [f64; 3] },
    /// Uniform circular path in the floor plane.
    Circular { center: [f64; 2], radius: f64, angular_speed: f64, phase: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingObject {
    pub kind: MovingKind,
    /// Base point at `t = 0`.
    pub start: [f64; 3],
    /// Edge length / diameter / height in metres.
    pub scale: f64,
    pub motion: ObjectMotion,
    pub color: [u8; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectRef {
    Static(usize),
    Moving(usize),
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectRef::Static(i) => write!(f, "static:{i}"),
            ObjectRef::Moving(i) => write!(f, "moving:{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub min: u32,
    pub max: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueRange {
    pub min: f64,
    pub max: f64,
}

impl ValueRange {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.max > self.min {
            rng.random_range(self.min..self.max)
        } else {
            self.min
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Half side of the square ground plane (m).
    pub arena_half_extent: f64,
    /// Half side of the square region objects are kept in (m).
    pub interior_half_extent: f64,
    pub static_count: CountRange,
    pub moving_count: CountRange,
    pub static_scale: ValueRange,
    pub moving_scale: ValueRange,
    /// Linear speed range (m/s); also the tangential speed of circular paths.
    pub speed: ValueRange,
    pub circle_radius: ValueRange,
    pub circular_probability: f64,
    pub placement_retries: u32,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            arena_half_extent: 20.0,
            interior_half_extent: 15.0,
            static_count: CountRange { min: 6, max: 12 },
            moving_count: CountRange { min: 1, max: 3 },
            static_scale: ValueRange { min: 0.6, max: 2.5 },
            moving_scale: ValueRange { min: 0.5, max: 1.2 },
            speed: ValueRange { min: 0.3, max: 1.5 },
            circle_radius: ValueRange { min: 1.0, max: 4.0 },
            circular_probability: 0.5,
            placement_retries: 100,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Config(m));
        if !(self.arena_half_extent > 0.0) || !(self.interior_half_extent > 0.0) {
            return bad("arena extents must be positive".into());
        }
        if self.interior_half_extent > self.arena_half_extent {
            return bad("interior_half_extent exceeds arena_half_extent".into());
        }
        for (name, r) in [("static_count", self.static_count), ("moving_count", self.moving_count)] {
            if r.min > r.max {
                return bad(format!("{name}: min {} > max {}", r.min, r.max));
            }
        }
        for (name, r) in [
            ("static_scale", self.static_scale),
            ("moving_scale", self.moving_scale),
            ("speed", self.speed),
            ("circle_radius", self.circle_radius),
        ] {
            if r.min > r.max || !r.min.is_finite() || !r.max.is_finite() {
                return bad(format!("{name}: min {} > max {}", r.min, r.max));
            }
            if r.min < 0.0 {
                return bad(format!("{name}: negative bound"));
            }
        }
        if self.static_scale.min <= 0.0 || self.moving_scale.min <= 0.0 {
            return bad("object scales must be positive".into());
        }
        if self.moving_scale.max >= self.interior_half_extent {
            return bad("moving_scale does not fit the interior".into());
        }
        if !(0.0..=1.0).contains(&self.circular_probability) {
            return bad("circular_probability outside [0, 1]".into());
        }
        if self.placement_retries == 0 {
            return bad("placement_retries must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub seed: u64,
    pub arena_half_extent: f64,
    pub interior_half_extent: f64,
    pub background: Background,
    pub floor: FloorTexture,
    pub static_objects: Vec<StaticObject>,
    pub moving_objects: Vec<MovingObject>,
}

impl SceneSpec {
    /// Empty scene on the given floor, mostly useful for tests.
    pub fn empty(background: Background, floor: FloorTexture) -> Self {
        let d = SceneConfig::default();
        Self {
            seed: 0,
            arena_half_extent: d.arena_half_extent,
            interior_half_extent: d.interior_half_extent,
            background,
            floor,
            static_objects: Vec::new(),
            moving_objects: Vec::new(),
        }
    }

    pub fn object_refs(&self) -> impl Iterator<Item = ObjectRef> + '_ {
        (0..self.moving_objects.len())
            .map(ObjectRef::Moving)
            .chain((0..self.static_objects.len()).map(ObjectRef::Static))
    }

    pub fn contains(&self, obj: ObjectRef) -> bool {
        match obj {
            ObjectRef::Static(i) => i < self.static_objects.len(),
            ObjectRef::Moving(i) => i < self.moving_objects.len(),
        }
    }

    /// Short noun phrase, e.g. "a moving sphere" or "a tree".
    pub fn object_phrase(&self, obj: ObjectRef) -> Result<String, SceneError> {
        match obj {
            ObjectRef::Static(i) => self
                .static_objects
                .get(i)
                .map(|o| o.kind.noun_phrase().to_string())
                .ok_or(SceneError::UnknownObject(obj)),
            ObjectRef::Moving(i) => self
                .moving_objects
                .get(i)
                .map(|o| format!("a moving {}", o.kind.noun()))
                .ok_or(SceneError::UnknownObject(obj)),
        }
    }

    /// Visual centre of an object at time `t` seconds (base point lifted by half its height).
    pub fn object_center(&self, obj: ObjectRef, t: f64) -> Result<Vec3, SceneError> {
        match obj {
            ObjectRef::Static(i) => {
                let o = self.static_objects.get(i).ok_or(SceneError::UnknownObject(obj))?;
                Ok(Vec3::from_array(o.position) + Vec3::new(0.0, 0.5 * o.scale, 0.0))
            }
            ObjectRef::Moving(i) => {
                let o = self.moving_objects.get(i).ok_or(SceneError::UnknownObject(obj))?;
                Ok(self.moving_base(o, t) + Vec3::new(0.0, 0.5 * o.scale, 0.0))
            }
        }
    }

    /// Base point of a moving object at time `t` seconds.
    pub fn moving_base(&self, obj: &MovingObject, t: f64) -> Vec3 {
        let start = Vec3::from_array(obj.start);
        match &obj.motion {
            ObjectMotion::Linear { velocity } => {
                let r = 0.5 * obj.scale;
                let lo = -self.interior_half_extent + r;
                let hi = self.interior_half_extent - r;
                Vec3::new(
                    reflect(start.x + velocity[0] * t, lo, hi),
                    start.y,
                    reflect(start.z + velocity[2] * t, lo, hi),
                )
            }
            ObjectMotion::Circular { center, radius, angular_speed, phase } => {
                let a = phase + angular_speed * t;
                Vec3::new(center[0] + radius * a.cos(), start.y, center[1] + radius * a.sin())
            }
        }
    }

    /// Checks the structural invariants of a generated scene.
    pub fn validate(&self, config: &SceneConfig) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Config(m));
        let l = self.interior_half_extent;
        let inside = |p: [f64; 3], r: f64| p[0].abs() + r <= l + 1e-9 && p[2].abs() + r <= l + 1e-9;
        for o in &self.static_objects {
            if !inside(o.position, 0.5 * o.scale) || o.position[1] < 0.0 {
                return bad(format!("static object outside arena: {:?}", o.position));
            }
        }
        for o in &self.moving_objects {
            if !inside(o.start, 0.5 * o.scale) || o.start[1] < 0.0 {
                return bad(format!("moving object outside arena: {:?}", o.start));
            }
            if let ObjectMotion::Circular { center, radius, .. } = &o.motion {
                let reach = radius + 0.5 * o.scale;
                if center[0].abs() + reach > l + 1e-9 || center[1].abs() + reach > l + 1e-9 {
                    return bad("circular path leaves the arena".into());
                }
            }
        }
        let ns = self.static_objects.len() as u32;
        let nm = self.moving_objects.len() as u32;
        if ns < config.static_count.min || ns > config.static_count.max {
            return bad(format!("static count {ns} outside range"));
        }
        if nm < config.moving_count.min || nm > config.moving_count.max {
            return bad(format!("moving count {nm} outside range"));
        }
        Ok(())
    }
}

/// Triangle-wave fold of `x` into `[lo, hi]` (elastic reflection).
fn reflect(x: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return lo;
    }
    let period = 2.0 * span;
    let y = (x - lo).rem_euclid(period);
    lo + if y > span { period - y } else { y }
}

const MOVING_PALETTE: [[u8; 3]; 8] = [
    [220, 60, 50],
    [240, 170, 40],
    [70, 110, 220],
    [160, 70, 200],
    [240, 240, 240],
    [40, 180, 200],
    [230, 100, 160],
    [120, 200, 80],
];

struct Footprint {
    x: f64,
    z: f64,
    r: f64,
}

fn place(
    rng: &mut ChaCha8Rng,
    taken: &[Footprint],
    limit: f64,
    r: f64,
    retries: u32,
    what: &str,
) -> Result<(f64, f64), SceneError> {
    let half = limit - r;
    for _ in 0..retries {
        let x = rng.random_range(-half..=half);
        let z = rng.random_range(-half..=half);
        if taken.iter().all(|f| ((f.x - x).powi(2) + (f.z - z).powi(2)).sqrt() >= f.r + r) {
            return Ok((x, z));
        }
    }
    Err(SceneError::PlacementFailure { what: what.to_string(), attempts: retries })
}

/// Draws a scene. Pure function of `(seed, config)`.
pub fn sample_scene(seed: u64, config: &SceneConfig) -> Result<SceneSpec, SceneError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background = Background::ALL[rng.random_range(0..Background::ALL.len())];
    let floor = FloorTexture::ALL[rng.random_range(0..FloorTexture::ALL.len())];
    let limit = config.interior_half_extent;
    let mut taken: Vec<Footprint> = Vec::new();

    let n_static = rng.random_range(config.static_count.min..=config.static_count.max);
    let mut static_objects = Vec::with_capacity(n_static as usize);
    for i in 0..n_static {
        let kind = StaticKind::ALL[rng.random_range(0..StaticKind::ALL.len())];
        let mut scale = config.static_scale.sample(&mut rng);
        if kind == StaticKind::Grass {
            scale *= 0.3;
        }
        let r = 0.5 * scale;
        let (x, z) = place(&mut rng, &taken, limit, r, config.placement_retries, &format!("static object {i}"))?;
        taken.push(Footprint { x, z, r });
        static_objects.push(StaticObject { kind, position: [x, 0.0, z], scale });
    }

    let n_moving = rng.random_range(config.moving_count.min..=config.moving_count.max);
    let mut moving_objects = Vec::with_capacity(n_moving as usize);
    for i in 0..n_moving {
        let kind = MovingKind::ALL[rng.random_range(0..MovingKind::ALL.len())];
        let scale = config.moving_scale.sample(&mut rng);
        let r = 0.5 * scale;
        let speed = config.speed.sample(&mut rng);
        let circular = rng.random_bool(config.circular_probability);
        let color = MOVING_PALETTE[rng.random_range(0..MOVING_PALETTE.len())];
        let what = format!("moving object {i}");
        let (start, motion) = if circular {
            let mut radius = config.circle_radius.sample(&mut rng);
            radius = radius.min(limit - r - 1e-6).max(0.0);
            let reach = radius + r;
            let (cx, cz) = place(&mut rng, &taken, limit, reach, config.placement_retries, &what)?;
            taken.push(Footprint { x: cx, z: cz, r: reach });
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let angular_speed = if radius > 0.0 { dir * speed / radius } else { 0.0 };
            let start = [cx + radius * phase.cos(), 0.0, cz + radius * phase.sin()];
            (start, ObjectMotion::Circular { center: [cx, cz], radius, angular_speed, phase })
        } else {
            let (x, z) = place(&mut rng, &taken, limit, r, config.placement_retries, &what)?;
            taken.push(Footprint { x, z, r });
            let heading = rng.random_range(0.0..std::f64::consts::TAU);
            let velocity = [speed * heading.cos(), 0.0, speed * heading.sin()];
            ([x, 0.0, z], ObjectMotion::Linear { velocity })
        };
        moving_objects.push(MovingObject { kind, start, scale, motion, color });
    }

    Ok(SceneSpec {
        seed,
        arena_half_extent: config.arena_half_extent,
        interior_half_extent: config.interior_half_extent,
        background,
        floor,
        static_objects,
        moving_objects,
    })
}

/// Literal style indicator token carried by training prompts.
pub const VIRTUAL_TOKEN: &str = "<VIRTUAL>";

/// Content text `c` without the `"Content: "` prefix.
pub fn content_text(spec: &SceneSpec, virtual_indicator: bool) -> String {
    let floor = spec.floor.phrase();
    let movers: Vec<String> = spec.moving_objects.iter().map(|o| format!("a moving {}", o.kind.noun())).collect();
    let body = if movers.is_empty() {
        format!("there are small plants and geometries on the {floor}.")
    } else {
        let verb = if movers.len() == 1 { "is" } else { "are" };
        format!("there {verb} {}. There are also small plants and geometries on the {floor}.", join_list(&movers))
    };
    if virtual_indicator {
        format!("In this low-poly 3D {VIRTUAL_TOKEN} scene, {body}")
    } else {
        capitalize(&body)
    }
}

/// Deterministic content prompt, e.g. `"Content: There are small plants and geometries on the black sand ground."`.
pub fn scene_description(spec: &SceneSpec, virtual_indicator: bool) -> String {
    format!("Content: {}", content_text(spec, virtual_indicator))
}

pub(crate) fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

pub(crate) fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere_on_black_sand() -> SceneSpec {
        let mut s = SceneSpec::empty(Background::Sky, FloorTexture::BlackSand);
        s.moving_objects.push(MovingObject {
            kind: MovingKind::Sphere,
            start: [0.0, 0.0, 0.0],
            scale: 1.0,
            motion: ObjectMotion::Linear { velocity: [0.5, 0.0, 0.0] },
            color: [200, 40, 40],
        });
        s
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SceneConfig::default();
        let a = serde_json::to_string(&sample_scene(7, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&sample_scene(7, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&sample_scene(8, &cfg).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_moving_objects() {
        let cfg = SceneConfig { moving_count: CountRange { min: 0, max: 0 }, ..Default::default() };
        let s = sample_scene(3, &cfg).unwrap();
        assert!(s.moving_objects.is_empty());
        s.validate(&cfg).unwrap();
    }

    #[test]
    fn inverted_ranges_rejected() {
        let cfg = SceneConfig { static_count: CountRange { min: 5, max: 2 }, ..Default::default() };
        assert!(matches!(sample_scene(1, &cfg), Err(SceneError::Config(_))));
        let cfg = SceneConfig { speed: ValueRange { min: 2.0, max: 1.0 }, ..Default::default() };
        assert!(matches!(sample_scene(1, &cfg), Err(SceneError::Config(_))));
    }

    #[test]
    fn crowded_arena_fails_placement() {
        let cfg = SceneConfig {
            interior_half_extent: 2.0,
            static_count: CountRange { min: 60, max: 60 },
            static_scale: ValueRange { min: 1.5, max: 1.5 },
            ..Default::default()
        };
        assert!(matches!(sample_scene(1, &cfg), Err(SceneError::PlacementFailure { attempts: 100, .. })));
    }

    #[test]
    fn background_frequencies_are_uniform() {
        let cfg = SceneConfig::default();
        let mut counts = [0usize; 4];
        let n = 10_000;
        for seed in 0..n {
            let s = sample_scene(seed, &cfg).unwrap();
            counts[Background::ALL.iter().position(|b| *b == s.background).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((0.22..=0.28).contains(&f), "{counts:?}");
        }
    }

    #[test]
    fn description_templates() {
        let s = sphere_on_black_sand();
        assert_eq!(
            scene_description(&s, true),
            "Content: In this low-poly 3D <VIRTUAL> scene, there is a moving sphere. There are also small plants and geometries on the black sand ground."
        );
        assert_eq!(
            scene_description(&s, false),
            "Content: There is a moving sphere. There are also small plants and geometries on the black sand ground."
        );
        let plain = SceneSpec::empty(Background::Sky, FloorTexture::LightGreenGrass);
        assert_eq!(
            scene_description(&plain, false),
            "Content: There are small plants and geometries on the light green grassland."
        );
        assert_eq!(
            scene_description(&plain, true),
            "Content: In this low-poly 3D <VIRTUAL> scene, there are small plants and geometries on the light green grassland."
        );
    }

    #[test]
    fn several_movers_are_listed() {
        let mut s = sphere_on_black_sand();
        let mut cube = s.moving_objects[0].clone();
        cube.kind = MovingKind::Cube;
        s.moving_objects.push(cube);
        assert!(scene_description(&s, false).starts_with("Content: There are a moving sphere and a moving cube."));
    }

    #[test]
    fn reflection_stays_in_bounds() {
        for i in 0..200 {
            let x = reflect(-40.0 + i as f64 * 0.73, -3.0, 5.0);
            assert!((-3.0..=5.0).contains(&x));
        }
        assert_eq!(reflect(6.0, -3.0, 5.0), 4.0);
    }

    proptest! {
        #[test]
        fn generated_scenes_are_valid(seed in any::<u64>()) {
            let cfg = SceneConfig::default();
            let s = sample_scene(seed, &cfg).unwrap();
            prop_assert!(s.validate(&cfg).is_ok());
            let text = serde_json::to_string(&s).unwrap();
            let back: SceneSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, s.clone());
            for obj in &s.moving_objects {
                for k in 0..40 {
                    let p = s.moving_base(obj, k as f64 * 0.5);
                    prop_assert!(p.x.abs() + 0.5 * obj.scale <= s.interior_half_extent + 1e-9);
                    prop_assert!(p.z.abs() + 0.5 * obj.scale <= s.interior_half_extent + 1e-9);
                }
            }
        }
    }
}
