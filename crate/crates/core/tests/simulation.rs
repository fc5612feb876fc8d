mod common;

use common::{prefix_sum_spikes, rng};
use proptest::prelude::*;
use rand::Rng;
use spikelight::scene::ProceduralScene;
use spikelight::simulator::{FrameSource, CHARGE_ONE};
use spikelight::{
    apply_darkening, generate_synthetic_scene, simulate_stream, MotionParams, SceneKind, SceneSequence, SimConfig,
    SpikeStream,
};

fn pixel_counts(s: &SpikeStream) -> Vec<u32> {
    let mut c = vec![0; s.pixels()];
    for t in 0..s.len() {
        for (p, v) in c.iter_mut().enumerate() {
            *v += s.get(t, p) as u32;
        }
    }
    c
}

fn random_scene(r: &mut impl Rng, h: usize, w: usize, n: usize) -> SceneSequence {
    let frames = (0..n).map(|_| (0..h * w).map(|_| r.random::<f32>()).collect()).collect();
    SceneSequence::new(h, w, 0, frames).unwrap()
}

#[test]
fn noiseless_simulation_equals_prefix_sum_oracle() {
    let mut r = rng(10);
    for _ in 0..20 {
        let (h, w, n) = (4, 5, 300);
        let scene = random_scene(&mut r, h, w, n);
        let threshold = r.random_range(0.5..2.0);
        let cfg = SimConfig::noiseless(threshold, threshold * r.random_range(0.05..0.9));
        let s = simulate_stream(&scene, &cfg).unwrap();
        for p in 0..h * w {
            let charges: Vec<u64> = (0..n)
                .map(|t| cfg.charge(cfg.gain * scene.frame(t)[p] as f64).0)
                .collect();
            let expected = prefix_sum_spikes(&charges, CHARGE_ONE);
            let got: Vec<bool> = (0..n).map(|t| s.get(t, p)).collect();
            assert_eq!(got, expected, "pixel {p}");
        }
    }
}

#[test]
fn constant_dark_current_also_follows_oracle() {
    let cfg = SimConfig {
        dark_mean: 0.013,
        dark_fpn_sigma: 0.0,
        ..SimConfig::noiseless(1.0, 0.25)
    };
    let scene = SceneSequence::constant(2, 2, 500, 0.1).unwrap();
    let s = simulate_stream(&scene, &cfg).unwrap();
    let q = cfg.charge(0.25 * 0.1f32 as f64).0 + cfg.charge(0.013).0;
    let expected = prefix_sum_spikes(&vec![q; 500], CHARGE_ONE);
    for p in 0..4 {
        assert_eq!((0..500).map(|t| s.get(t, p)).collect::<Vec<_>>(), expected);
    }
}

#[test]
fn rate_law_for_constant_intensity() {
    let mut r = rng(11);
    let cfg = SimConfig::noiseless(1.0, 0.25);
    for _ in 0..50 {
        let y: f32 = r.random();
        let n = 1000;
        let s = simulate_stream(&SceneSequence::constant(2, 3, n, y).unwrap(), &cfg).unwrap();
        let expected = (n as f64 * cfg.gain * y as f64 / cfg.threshold).floor() as i64;
        for c in pixel_counts(&s) {
            assert!((c as i64 - expected).abs() <= 1, "y={y}: {c} vs {expected}");
        }
    }
}

#[test]
fn darkening_never_adds_spikes() {
    let mut r = rng(12);
    let cfg = SimConfig::noiseless(1.0, 0.25);
    for _ in 0..20 {
        let scene = random_scene(&mut r, 6, 6, 200);
        let dark = apply_darkening(&scene, r.random_range(0.01..=1.0)).unwrap();
        let a = pixel_counts(&simulate_stream(&scene, &cfg).unwrap());
        let b = pixel_counts(&simulate_stream(&dark, &cfg).unwrap());
        assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
    }
}

#[test]
fn simulation_is_deterministic_under_seed() {
    let scene = random_scene(&mut rng(13), 70, 70, 40);
    let cfg = SimConfig {
        shot_noise: true,
        dark_fpn_sigma: 0.001,
        seed: 42,
        ..SimConfig::default()
    };
    let a = simulate_stream(&scene, &cfg).unwrap();
    let b = simulate_stream(&scene, &cfg).unwrap();
    let c = simulate_stream(&scene, &SimConfig { seed: 43, ..cfg }).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn shot_noise_preserves_mean_rate() {
    let n = 4000;
    let cfg = SimConfig {
        shot_noise: true,
        electrons_per_threshold: 50.0,
        ..SimConfig::noiseless(1.0, 0.25)
    };
    let s = simulate_stream(&SceneSequence::constant(8, 8, n, 0.4).unwrap(), &cfg).unwrap();
    let mean = pixel_counts(&s).iter().map(|&c| c as f64).sum::<f64>() / 64.0;
    let expected = n as f64 * 0.1;
    assert!((mean - expected).abs() < 0.03 * expected, "{mean} vs {expected}");
}

#[test]
fn full_size_stream_shape() {
    let scene = ProceduralScene::new(SceneKind::RandomTextureFlow, 250, 400, 1000, MotionParams::still(), 1).unwrap();
    let s = simulate_stream(&scene, &SimConfig::default()).unwrap();
    assert_eq!((s.height(), s.width(), s.len()), (250, 400, 1000));
    assert_eq!(s.packed().len(), 1000 * 12_500);
}

#[test]
fn bouncing_ball_stays_inside() {
    let mut r = rng(14);
    for _ in 0..200 {
        let (h, w) = (r.random_range(4..80), r.random_range(4..80));
        let max_speed = r.random_range(0.0..5.0);
        let motion = MotionParams::random(&mut r, max_speed, h, w);
        let scene = ProceduralScene::new(SceneKind::BouncingBall, h, w, 500, motion, r.random()).unwrap();
        for t in 0..500 {
            let (y, x) = scene.ball_center(t as f64).unwrap();
            assert!((0.0..=(h - 1) as f64).contains(&y) && (0.0..=(w - 1) as f64).contains(&x));
        }
    }
}

#[test]
fn motion_per_tick_is_bounded() {
    // Max displacement of a moving bar edge equals the speed.
    let mut r = rng(15);
    for _ in 0..50 {
        let max_speed = r.random_range(0.1..3.0);
        let m = MotionParams::random(&mut r, max_speed, 32, 32);
        assert!(m.speed <= max_speed);
        let rim = std::f64::consts::TAU * 0.4 * 32.0 / m.period.abs();
        assert!(rim <= max_speed * (1.0 + 1e-12));
    }
}

#[test]
fn scene_intensities_in_unit_range() {
    let mut r = rng(16);
    for kind in SceneKind::ALL {
        let m = MotionParams::random(&mut r, 1.0, 24, 30);
        let s = generate_synthetic_scene(kind, 24, 30, 50, m, 5).unwrap();
        assert!(s.frames().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(FrameSource::len(&s), 50);
    }
}

proptest! {
    #[test]
    fn brighter_scene_fires_at_least_as_often(seed in any::<u64>(), factor in 0.001f64..1.0) {
        let mut r = rng(seed);
        let scene = random_scene(&mut r, 3, 3, 120);
        let cfg = SimConfig::noiseless(1.0, 0.25);
        let dark = apply_darkening(&scene, factor).unwrap();
        let a = pixel_counts(&simulate_stream(&scene, &cfg).unwrap());
        let b = pixel_counts(&simulate_stream(&dark, &cfg).unwrap());
        prop_assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
    }
}
