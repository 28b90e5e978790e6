//! The two-step adaptation procedure on the default toy world.

use std::sync::OnceLock;

use camsynth::toytrain::world::{ToyWorld, WorldConfig};
use camsynth::toytrain::{
    pretrain_base, train_appearance, train_camera, Adapter, Denoiser, NoiseSchedule, Paradigm, StepLog, TrainConfig,
    TrainingCurve, TrajectoryEncoder,
};

struct Fixture {
    world: ToyWorld,
    sched: NoiseSchedule,
    base: Denoiser,
    encoder: TrajectoryEncoder,
    theta_d: u64,
    theta_e: u64,
    appearance: Adapter,
    appearance_curve: TrainingCurve,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let sched = NoiseSchedule::default();
        let world = ToyWorld::new(WorldConfig::default()).unwrap();
        let (base, encoder, _) =
            pretrain_base(world.model_config(), &world.base_set(Paradigm::Text), &TrainConfig::base(), &sched).unwrap();
        let (theta_d, theta_e) = (base.checksum(), encoder.base_checksum());
        // Long enough to read the running mean at step 500.
        let cfg = TrainConfig { steps: 501, ..TrainConfig::appearance() };
        let (appearance, appearance_curve) =
            train_appearance(&base, &encoder, &world.appearance_set(Paradigm::Text), &cfg, &sched).unwrap();
        Fixture { world, sched, base, encoder, theta_d, theta_e, appearance, appearance_curve }
    })
}

fn diffusion(l: &StepLog) -> f64 {
    l.diffusion
}

#[test]
fn appearance_step_leaves_the_base_alone_and_learns() {
    let f = fixture();
    assert_eq!(f.base.checksum(), f.theta_d);
    assert_eq!(f.encoder.base_checksum(), f.theta_e);
    let curve = &f.appearance_curve;
    assert_eq!(curve.steps.len(), 501);
    let late = curve.running_mean(500, 50, diffusion);
    let early = curve.steps[10].diffusion;
    assert!(late < early, "running mean at 500 = {late}, loss at 10 = {early}");
}

#[test]
fn camera_step_freezes_base_and_appearance_and_reduces_flow() {
    let f = fixture();
    let before = f.appearance.checksum();
    let (_, curve) = train_camera(
        &f.base,
        &f.encoder,
        Some(&f.appearance),
        &f.world.camera_set(Paradigm::Text),
        &TrainConfig::camera(),
        Paradigm::Text,
        &f.sched,
    )
    .unwrap();
    assert_eq!(f.base.checksum(), f.theta_d);
    assert_eq!(f.appearance.checksum(), before);
    let n = curve.steps.len();
    let start = curve.running_mean(49, 50, |l| l.flow);
    let end = curve.running_mean(n - 1, 50, |l| l.flow);
    assert!(end < start, "flow loss {start} -> {end}");
}

#[test]
fn trajectory_paradigm_only_moves_the_encoder() {
    let f = fixture();
    let sched = &f.sched;
    let cfg = TrainConfig { steps: 30, ..TrainConfig::appearance() };
    let (app, _) =
        train_appearance(&f.base, &f.encoder, &f.world.appearance_set(Paradigm::Trajectory), &cfg, sched).unwrap();
    let before = app.checksum();
    let cfg = TrainConfig { steps: 30, ..TrainConfig::camera() };
    train_camera(
        &f.base,
        &f.encoder,
        Some(&app),
        &f.world.camera_set(Paradigm::Trajectory),
        &cfg,
        Paradigm::Trajectory,
        sched,
    )
    .unwrap();
    assert_eq!(f.base.checksum(), f.theta_d);
    assert_eq!(f.encoder.base_checksum(), f.theta_e);
    assert_eq!(app.checksum(), before);
}

#[test]
fn zero_lambda_total_is_the_diffusion_term() {
    let f = fixture();
    let data = f.world.camera_set(Paradigm::Text);
    let run = |lambda| {
        let cfg = TrainConfig { steps: 25, lambda, ..TrainConfig::camera() };
        train_camera(&f.base, &f.encoder, Some(&f.appearance), &data, &cfg, Paradigm::Text, &f.sched).unwrap().1
    };
    let plain = run(0.0);
    for l in &plain.steps {
        assert_eq!(l.total.to_bits(), l.diffusion.to_bits(), "step {}", l.step);
    }
    // Same seeded batches with the flow term switched on: identical first
    // diffusion term, totals that differ by exactly λ·flow.
    let with_flow = run(0.1);
    let (a, b) = (&plain.steps[0], &with_flow.steps[0]);
    assert_eq!(a.diffusion.to_bits(), b.diffusion.to_bits());
    assert!((b.total - (b.diffusion + 0.1 * b.flow)).abs() <= 1e-12 * b.total.abs().max(1.0));
    assert!(b.flow > 0.0);
}
