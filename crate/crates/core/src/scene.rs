//! Seeded procedural scenes used in place of rendered footage.
//!
//! Each scene is a continuous function of `(row, col, tick)` built once from
//! its seed, so frames can be rendered lazily at any size and length.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::simulator::{FrameSource, SceneSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SceneKind {
    TranslatingBars,
    RotatingDisk,
    BouncingBall,
    RandomTextureFlow,
}

impl SceneKind {
    pub const ALL: [SceneKind; 4] = [
        SceneKind::TranslatingBars,
        SceneKind::RotatingDisk,
        SceneKind::BouncingBall,
        SceneKind::RandomTextureFlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SceneKind::TranslatingBars => "translating-bars",
            SceneKind::RotatingDisk => "rotating-disk",
            SceneKind::BouncingBall => "bouncing-ball",
            SceneKind::RandomTextureFlow => "random-texture-flow",
        }
    }
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SceneKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown scene kind {s:?}")))
    }
}

/// Motion of a procedural scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    /// Translation speed, pixels per tick.
    pub speed: f64,
    /// Direction of translation, radians.
    pub direction: f64,
    /// Ticks per revolution for rotating content; negative spins the other way.
    pub period: f64,
}

impl MotionParams {
    pub fn still() -> Self {
        Self {
            speed: 0.0,
            direction: 0.0,
            period: f64::INFINITY,
        }
    }

    /// Random motion whose per-tick displacement stays within `max_speed` pixels.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_speed: f64, height: usize, width: usize) -> Self {
        let speed = rng.random_range(0.25..=1.0) * max_speed;
        let direction = rng.random_range(0.0..TAU);
        // rim speed 2πR/period must not exceed max_speed
        let rim = TAU * disk_radius(height, width);
        let min_period = if max_speed > 0.0 { rim / max_speed } else { f64::INFINITY };
        let period = min_period * rng.random_range(1.0..3.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        Self {
            speed,
            direction,
            period: sign * period,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(Error::Argument(format!("speed must be finite and >= 0, got {}", self.speed)));
        }
        if !self.direction.is_finite() {
            return Err(Error::Argument("direction must be finite".into()));
        }
        if self.period.is_nan() || self.period == 0.0 {
            return Err(Error::Argument(format!("period must be nonzero, got {}", self.period)));
        }
        Ok(())
    }

    fn velocity(&self) -> (f64, f64) {
        (self.speed * self.direction.sin(), self.speed * self.direction.cos())
    }

    /// Rotation phase in `[0, 1)` at tick `t`; exact zero at multiples of the period.
    fn phase(&self, t: f64) -> f64 {
        if self.period.is_infinite() {
            return 0.0;
        }
        let p = self.period.abs();
        let ph = (t % p) / p;
        if self.period < 0.0 && ph != 0.0 {
            1.0 - ph
        } else {
            ph
        }
    }
}

fn disk_radius(height: usize, width: usize) -> f64 {
    0.4 * height.min(width) as f64
}

/// Periodic value noise on a `cell`-pixel lattice, used as texture.
#[derive(Debug, Clone)]
struct ValueNoise {
    rows: usize,
    cols: usize,
    cell: f64,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new<R: Rng + ?Sized>(rng: &mut R, height: usize, width: usize, cell: f64) -> Self {
        let rows = ((height as f64 / cell).ceil() as usize).max(2);
        let cols = ((width as f64 / cell).ceil() as usize).max(2);
        let lattice = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
        Self {
            rows,
            cols,
            cell,
            lattice,
        }
    }

    /// Smooth sample in `[0, 1]` at continuous pixel coordinates; wraps around.
    fn sample(&self, y: f64, x: f64) -> f64 {
        let gy = (y / self.cell).rem_euclid(self.rows as f64);
        let gx = (x / self.cell).rem_euclid(self.cols as f64);
        let (y0, x0) = (gy.floor() as usize % self.rows, gx.floor() as usize % self.cols);
        let (y1, x1) = ((y0 + 1) % self.rows, (x0 + 1) % self.cols);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (fy, fx) = (smooth(gy.fract()), smooth(gx.fract()));
        let at = |r: usize, c: usize| self.lattice[r * self.cols + c];
        let top = at(y0, x0) * (1.0 - fx) + at(y0, x1) * fx;
        let bottom = at(y1, x0) * (1.0 - fx) + at(y1, x1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

#[derive(Debug, Clone)]
enum Layout {
    Bars {
        period: f64,
        orientation: f64,
        low: f64,
        high: f64,
    },
    Disk {
        radius: f64,
        blades: f64,
        low: f64,
        high: f64,
    },
    Ball {
        radius: f64,
        start: (f64, f64),
        level: f64,
    },
    Flow {
        contrast: f64,
        offset: f64,
    },
}

/// A lazily rendered procedural scene.
#[derive(Debug, Clone)]
pub struct ProceduralScene {
    kind: SceneKind,
    height: usize,
    width: usize,
    len: usize,
    motion: MotionParams,
    background: ValueNoise,
    layout: Layout,
}

impl ProceduralScene {
    pub fn new(
        kind: SceneKind,
        height: usize,
        width: usize,
        len: usize,
        motion: MotionParams,
        seed: u64,
    ) -> Result<Self> {
        if height == 0 || width == 0 || len == 0 {
            return Err(Error::Argument(format!(
                "scene dims must be positive, got {height}x{width}x{len}"
            )));
        }
        motion.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let background = ValueNoise::new(&mut rng, height, width, 12.0);
        let layout = match kind {
            SceneKind::TranslatingBars => Layout::Bars {
                period: rng.random_range(8.0..24.0),
                orientation: rng.random_range(0.0..TAU),
                low: rng.random_range(0.05..0.3),
                high: rng.random_range(0.6..1.0),
            },
            SceneKind::RotatingDisk => Layout::Disk {
                radius: disk_radius(height, width),
                blades: rng.random_range(2..=6) as f64,
                low: rng.random_range(0.05..0.3),
                high: rng.random_range(0.6..1.0),
            },
            SceneKind::BouncingBall => {
                let radius = (0.15 * height.min(width) as f64).max(1.0);
                Layout::Ball {
                    radius,
                    start: (
                        rng.random_range(0.0..height as f64),
                        rng.random_range(0.0..width as f64),
                    ),
                    level: rng.random_range(0.7..1.0),
                }
            }
            SceneKind::RandomTextureFlow => Layout::Flow {
                contrast: rng.random_range(0.5..0.9),
                offset: rng.random_range(0.05..0.15),
            },
        };
        Ok(Self {
            kind,
            height,
            width,
            len,
            motion,
            background,
            layout,
        })
    }

    pub fn kind(&self) -> SceneKind {
        self.kind
    }

    pub fn motion(&self) -> MotionParams {
        self.motion
    }

    /// Ball centre `(row, col)` at tick `t`; `None` for other kinds.
    pub fn ball_center(&self, t: f64) -> Option<(f64, f64)> {
        match self.layout {
            Layout::Ball { radius, start, .. } => {
                let (vy, vx) = self.motion.velocity();
                let lo = radius.min((self.height as f64 - 1.0) / 2.0);
                let y = bounce(start.0 + vy * t, lo, self.height as f64 - 1.0 - lo);
                let lo = radius.min((self.width as f64 - 1.0) / 2.0);
                let x = bounce(start.1 + vx * t, lo, self.width as f64 - 1.0 - lo);
                Some((y, x))
            }
            _ => None,
        }
    }

    fn intensity(&self, y: f64, x: f64, t: f64) -> f64 {
        let bg = 0.15 + 0.2 * self.background.sample(y, x);
        let v = match self.layout {
            Layout::Bars {
                period,
                orientation,
                low,
                high,
            } => {
                let (vy, vx) = self.motion.velocity();
                let (yy, xx) = (y - vy * t, x - vx * t);
                let u = xx * orientation.cos() + yy * orientation.sin();
                let on = (u / period).rem_euclid(1.0) < 0.5;
                let tex = 0.1 * self.background.sample(yy, xx);
                if on {
                    high - tex
                } else {
                    low + tex
                }
            }
            Layout::Disk {
                radius,
                blades,
                low,
                high,
            } => {
                let (cy, cx) = ((self.height as f64 - 1.0) / 2.0, (self.width as f64 - 1.0) / 2.0);
                let (dy, dx) = (y - cy, x - cx);
                if dy.hypot(dx) <= radius {
                    let angle = dy.atan2(dx) - TAU * self.motion.phase(t);
                    low + (high - low) * (0.5 + 0.5 * (blades * angle).cos())
                } else {
                    bg
                }
            }
            Layout::Ball { radius, level, .. } => {
                let (cy, cx) = self.ball_center(t).expect("ball layout");
                if (y - cy).hypot(x - cx) <= radius {
                    level
                } else {
                    bg
                }
            }
            Layout::Flow { contrast, offset } => {
                let (vy, vx) = self.motion.velocity();
                offset + contrast * self.background.sample(y - vy * t, x - vx * t)
            }
        };
        v.clamp(0.0, 1.0)
    }
}

/// Reflects `p` into `[lo, hi]` (triangle wave).
fn bounce(p: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return lo;
    }
    let m = (p - lo).rem_euclid(2.0 * span);
    let r = if m <= span { lo + m } else { lo + 2.0 * span - m };
    r.clamp(lo, hi)
}

impl FrameSource for ProceduralScene {
    fn height(&self) -> usize {
        self.height
    }
    fn width(&self) -> usize {
        self.width
    }
    fn len(&self) -> usize {
        self.len
    }
    fn render(&self, index: usize, out: &mut [f32]) {
        let t = index as f64;
        for (y, row) in out.chunks_mut(self.width).enumerate() {
            for (x, v) in row.iter_mut().enumerate() {
                *v = self.intensity(y as f64, x as f64, t) as f32;
            }
        }
    }
}

/// Materialises `len` frames of a procedural scene.
pub fn generate_synthetic_scene(
    kind: SceneKind,
    height: usize,
    width: usize,
    len: usize,
    motion: MotionParams,
    seed: u64,
) -> Result<SceneSequence> {
    let scene = ProceduralScene::new(kind, height, width, len, motion, seed)?;
    SceneSequence::from_source(&scene)
}
