//! Integrate-and-fire spike camera model.
//!
//! Every pixel integrates `I_tot = gain·Y + dark` once per readout tick. When the
//! accumulator reaches the threshold φ the pixel fires (at most once per tick)
//! and keeps `A mod φ`. Charge is held in 32.32 fixed point relative to φ, so the
//! integrator is exact and bit-identical across serial and parallel runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stream::SpikeStream;

/// Fixed-point representation of one threshold φ.
pub const CHARGE_ONE: u64 = 1 << 32;

const DARK_RNG_STREAM: u64 = u64::MAX;
const PAR_MIN_PIXELS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Firing threshold φ.
    pub threshold: f64,
    /// Accumulation per tick at normalised intensity 1.0.
    pub gain: f64,
    /// Readout period in ticks. The discrete model only supports 1.
    pub readout_period: u32,
    /// Mean dark current, accumulation units per tick.
    pub dark_mean: f64,
    /// Spread of the fixed-pattern dark current across pixels.
    pub dark_fpn_sigma: f64,
    /// Poisson shot noise on the photon term.
    pub shot_noise: bool,
    /// Photo-electrons per threshold; sets the shot noise granularity.
    pub electrons_per_threshold: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            gain: 0.25,
            readout_period: 1,
            dark_mean: 1.0 / 2500.0,
            dark_fpn_sigma: 1.0 / 10000.0,
            shot_noise: false,
            electrons_per_threshold: 1000.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// No dark current and no shot noise.
    pub fn noiseless(threshold: f64, gain: f64) -> Self {
        Self {
            threshold,
            gain,
            dark_mean: 0.0,
            dark_fpn_sigma: 0.0,
            shot_noise: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !positive(self.threshold) {
            return Err(Error::Config(format!("threshold must be > 0, got {}", self.threshold)));
        }
        if !positive(self.gain) {
            return Err(Error::Config(format!("gain must be > 0, got {}", self.gain)));
        }
        if !nonneg(self.dark_mean) {
            return Err(Error::Config(format!("dark_mean must be >= 0, got {}", self.dark_mean)));
        }
        if !nonneg(self.dark_fpn_sigma) {
            return Err(Error::Config(format!(
                "dark_fpn_sigma must be >= 0, got {}",
                self.dark_fpn_sigma
            )));
        }
        if self.readout_period != 1 {
            return Err(Error::Config(format!(
                "readout_period must be 1 tick, got {}",
                self.readout_period
            )));
        }
        if !positive(self.electrons_per_threshold) {
            return Err(Error::Config(format!(
                "electrons_per_threshold must be > 0, got {}",
                self.electrons_per_threshold
            )));
        }
        Ok(())
    }

    /// Converts accumulation units to fixed-point charge.
    pub fn charge(&self, units: f64) -> Charge {
        Charge::from_units(units, self.threshold)
    }
}

/// Accumulated charge in 32.32 fixed point, `CHARGE_ONE` == φ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Charge(pub u64);

impl Charge {
    pub fn from_units(units: f64, threshold: f64) -> Self {
        let q = (units / threshold * CHARGE_ONE as f64).round();
        // `as` saturates, and maps NaN and negatives to 0.
        Charge(q as u64)
    }

    pub fn to_units(self, threshold: f64) -> f64 {
        self.0 as f64 / CHARGE_ONE as f64 * threshold
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PixelState {
    /// `A(x, t)`, kept in `[0, φ)` between readouts.
    pub accumulator: Charge,
    /// Fixed-pattern dark current per tick.
    pub dark_current: Charge,
}

impl PixelState {
    /// Integrates one tick of `input` charge; returns whether the pixel fired.
    #[inline]
    pub fn integrate(&mut self, input: Charge) -> bool {
        let acc = self.accumulator.0.saturating_add(input.0).saturating_add(self.dark_current.0);
        if acc >= CHARGE_ONE {
            self.accumulator = Charge(acc % CHARGE_ONE);
            true
        } else {
            self.accumulator = Charge(acc);
            false
        }
    }
}

/// Anything that can render intensity frames in `[0, 1]`, one per tick.
pub trait FrameSource {
    fn height(&self) -> usize;
    fn width(&self) -> usize;
    /// Number of frames.
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn origin_tick(&self) -> u64 {
        0
    }
    /// Writes frame `index` (row-major) into `out`.
    fn render(&self, index: usize, out: &mut [f32]);
}

/// A materialised sequence of intensity frames, piecewise constant per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSequence {
    height: usize,
    width: usize,
    origin_tick: u64,
    frames: Vec<Vec<f32>>,
}

impl SceneSequence {
    pub fn new(height: usize, width: usize, origin_tick: u64, frames: Vec<Vec<f32>>) -> Result<Self> {
        if height == 0 || width == 0 || frames.is_empty() {
            return Err(Error::Argument(format!(
                "scene needs positive dims and at least one frame, got {height}x{width}x{}",
                frames.len()
            )));
        }
        for (i, f) in frames.iter().enumerate() {
            if f.len() != height * width {
                return Err(Error::Argument(format!(
                    "frame {i} has {} samples, expected {}",
                    f.len(),
                    height * width
                )));
            }
            if let Some(v) = f.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Argument(format!("frame {i} has intensity {v} outside [0,1]")));
            }
        }
        Ok(Self {
            height,
            width,
            origin_tick,
            frames,
        })
    }

    /// `len` identical frames of value `value`.
    pub fn constant(height: usize, width: usize, len: usize, value: f32) -> Result<Self> {
        Self::new(height, width, 0, vec![vec![value; height * width]; len])
    }

    pub fn from_source(source: &impl FrameSource) -> Result<Self> {
        let mut frames = Vec::with_capacity(source.len());
        for i in 0..source.len() {
            let mut f = vec![0.0; source.height() * source.width()];
            source.render(i, &mut f);
            frames.push(f);
        }
        Self::new(source.height(), source.width(), source.origin_tick(), frames)
    }

    pub fn frames(&self) -> &[Vec<f32>] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &[f32] {
        &self.frames[index]
    }

    pub fn tick_of_frame(&self, index: usize) -> u64 {
        self.origin_tick + index as u64
    }
}

impl FrameSource for SceneSequence {
    fn height(&self) -> usize {
        self.height
    }
    fn width(&self) -> usize {
        self.width
    }
    fn len(&self) -> usize {
        self.frames.len()
    }
    fn origin_tick(&self) -> u64 {
        self.origin_tick
    }
    fn render(&self, index: usize, out: &mut [f32]) {
        out.copy_from_slice(&self.frames[index]);
    }
}

#[inline]
fn darken(v: f32, factor: f64) -> f32 {
    ((v as f64) * factor).clamp(0.0, 1.0) as f32
}

fn check_factor(factor: f64) -> Result<()> {
    if factor.is_finite() && factor > 0.0 && factor <= 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("darkening factor must be in (0, 1], got {factor}")))
    }
}

/// Multiplies every intensity by `factor ∈ (0, 1]`.
pub fn apply_darkening(scene: &SceneSequence, factor: f64) -> Result<SceneSequence> {
    check_factor(factor)?;
    let frames = scene
        .frames
        .iter()
        .map(|f| f.iter().map(|&v| darken(v, factor)).collect())
        .collect();
    Ok(SceneSequence {
        frames,
        ..scene.clone()
    })
}

/// Lazily darkened view of a frame source; renders the same values as
/// [`apply_darkening`].
#[derive(Debug, Clone)]
pub struct Darkened<S> {
    inner: S,
    factor: f64,
}

impl<S: FrameSource> Darkened<S> {
    pub fn new(inner: S, factor: f64) -> Result<Self> {
        check_factor(factor)?;
        Ok(Self { inner, factor })
    }
}

impl<S: FrameSource> FrameSource for Darkened<S> {
    fn height(&self) -> usize {
        self.inner.height()
    }
    fn width(&self) -> usize {
        self.inner.width()
    }
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn origin_tick(&self) -> u64 {
        self.inner.origin_tick()
    }
    fn render(&self, index: usize, out: &mut [f32]) {
        self.inner.render(index, out);
        for v in out.iter_mut() {
            *v = darken(*v, self.factor);
        }
    }
}

/// Per-pixel fixed-pattern dark current, `max(0, N(dark_mean, dark_fpn_sigma))`.
pub fn sample_dark_current<R: Rng + ?Sized>(
    cfg: &SimConfig,
    height: usize,
    width: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = height * width;
    if cfg.dark_fpn_sigma == 0.0 {
        return Ok(vec![cfg.dark_mean; n]);
    }
    let normal = Normal::new(cfg.dark_mean, cfg.dark_fpn_sigma)
        .map_err(|e| Error::Config(format!("dark current distribution: {e}")))?;
    Ok((0..n).map(|_| normal.sample(rng).max(0.0)).collect())
}

/// The RNG used for the dark map of a run seeded with `seed`.
pub fn dark_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DARK_RNG_STREAM);
    rng
}

fn pixel_rng(seed: u64, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pixel as u64);
    rng
}

/// Stateful sensor: one [`PixelState`] per pixel plus per-pixel noise RNGs.
pub struct Simulator {
    cfg: SimConfig,
    height: usize,
    width: usize,
    pixels: Vec<PixelState>,
    shot_rngs: Vec<ChaCha8Rng>,
    photon_scratch: Vec<Charge>,
    parallel: bool,
}

impl Simulator {
    pub fn new(cfg: &SimConfig, height: usize, width: usize) -> Result<Self> {
        let dark = sample_dark_current(cfg, height, width, &mut dark_rng(cfg.seed))?;
        Self::with_dark_map(cfg, height, width, &dark)
    }

    pub fn with_dark_map(cfg: &SimConfig, height: usize, width: usize, dark: &[f64]) -> Result<Self> {
        cfg.validate()?;
        let n = height * width;
        if n == 0 || dark.len() != n {
            return Err(Error::Argument(format!(
                "dark map has {} entries for a {height}x{width} sensor",
                dark.len()
            )));
        }
        let pixels = dark
            .iter()
            .map(|&d| PixelState {
                accumulator: Charge(0),
                dark_current: cfg.charge(d.max(0.0)),
            })
            .collect();
        let shot_rngs = if cfg.shot_noise {
            (0..n).map(|p| pixel_rng(cfg.seed, p)).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            cfg: cfg.clone(),
            height,
            width,
            pixels,
            shot_rngs,
            photon_scratch: vec![Charge(0); n],
            parallel: n >= PAR_MIN_PIXELS,
        })
    }

    /// Overrides the size-based choice between the serial and rayon paths.
    /// Output is identical either way.
    pub fn set_parallel(&mut self, parallel: bool) {
        self.parallel = parallel;
    }

    pub fn pixel_states(&self) -> &[PixelState] {
        &self.pixels
    }

    /// Integrates one readout tick of `frame` and writes the packed spike frame.
    pub fn step(&mut self, frame: &[f32], out: &mut [u8]) {
        let n = self.height * self.width;
        assert_eq!(frame.len(), n);
        assert_eq!(out.len(), n.div_ceil(8));

        let cfg = &self.cfg;
        let photon = |y: f32, rng: Option<&mut ChaCha8Rng>| -> Charge {
            let units = cfg.gain * y.clamp(0.0, 1.0) as f64;
            match rng {
                None => cfg.charge(units),
                Some(rng) => {
                    let lambda = units / cfg.threshold * cfg.electrons_per_threshold;
                    let count = if lambda > 0.0 {
                        Poisson::new(lambda).map(|p| p.sample(rng)).unwrap_or(0.0)
                    } else {
                        0.0
                    };
                    Charge((count / cfg.electrons_per_threshold * CHARGE_ONE as f64).round() as u64)
                }
            }
        };

        // Photon charge first (the only RNG consumer), then the integrator.
        let parallel = self.parallel;
        if self.shot_rngs.is_empty() {
            let fill = |(q, &y): (&mut Charge, &f32)| *q = photon(y, None);
            if parallel {
                self.photon_scratch.par_iter_mut().zip(frame.par_iter()).for_each(fill);
            } else {
                self.photon_scratch.iter_mut().zip(frame.iter()).for_each(fill);
            }
        } else {
            let fill = |((q, &y), rng): ((&mut Charge, &f32), &mut ChaCha8Rng)| *q = photon(y, Some(rng));
            if parallel {
                self.photon_scratch
                    .par_iter_mut()
                    .zip(frame.par_iter())
                    .zip(self.shot_rngs.par_iter_mut())
                    .for_each(fill);
            } else {
                self.photon_scratch
                    .iter_mut()
                    .zip(frame.iter())
                    .zip(self.shot_rngs.iter_mut())
                    .for_each(fill);
            }
        }

        let integrate_byte = |(byte, (states, input)): (&mut u8, (&mut [PixelState], &[Charge]))| {
            let mut b = 0u8;
            for (k, (s, &q)) in states.iter_mut().zip(input).enumerate() {
                if s.integrate(q) {
                    b |= 1 << k;
                }
            }
            *byte = b;
        };
        if parallel {
            out.par_iter_mut()
                .zip(self.pixels.par_chunks_mut(8).zip(self.photon_scratch.par_chunks(8)))
                .for_each(integrate_byte);
        } else {
            out.iter_mut()
                .zip(self.pixels.chunks_mut(8).zip(self.photon_scratch.chunks(8)))
                .for_each(integrate_byte);
        }
    }
}

/// Converts a scene into a spike stream of the same length and origin.
pub fn simulate_stream(scene: &impl FrameSource, cfg: &SimConfig) -> Result<SpikeStream> {
    let (h, w) = (scene.height(), scene.width());
    let mut sim = Simulator::new(cfg, h, w)?;
    let mut stream = SpikeStream::zeros(h, w, scene.len(), scene.origin_tick())?;
    let mut frame = vec![0f32; h * w];
    for n in 0..scene.len() {
        scene.render(n, &mut frame);
        sim.step(&frame, stream.frame_mut(n));
    }
    Ok(stream)
}
