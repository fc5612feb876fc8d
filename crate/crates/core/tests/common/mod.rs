//! Independent reference implementations shared by the integration suites.
//! None of these call into the code paths they are used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikelight::{Image, SpikeStream};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random stream where every pixel gets its own firing probability, including
/// never-firing and always-firing pixels.
pub fn mixed_density_stream(rng: &mut ChaCha8Rng, h: usize, w: usize, n: usize) -> SpikeStream {
    const DENSITIES: [f64; 8] = [0.0, 1.0, 0.003, 0.01, 0.03, 0.1, 0.5, 0.9];
    let density: Vec<f64> = (0..h * w)
        .map(|_| DENSITIES[rng.random_range(0..DENSITIES.len())])
        .collect();
    let mut s = SpikeStream::zeros(h, w, n, 0).unwrap();
    for t in 0..n {
        for (p, &d) in density.iter().enumerate() {
            if d >= 1.0 || (d > 0.0 && rng.random_bool(d)) {
                s.set(t, p, true);
            }
        }
    }
    s
}

/// Interval by scanning raw ticks of the stream within `[span_start, span_end]`.
///
/// Returns `(interval, censored_prev, censored_next)` with the substitution
/// `prev := span_start − 1`, `next := span_end + 1`, clamped to the span length.
pub fn scan_interval(
    stream: &SpikeStream,
    pixel: usize,
    center: u64,
    span_start: u64,
    span_end: u64,
) -> (u32, bool, bool) {
    let at = |t: u64| stream.get((t - stream.origin_tick()) as usize, pixel);
    let prev = (span_start..=center).rev().find(|&t| at(t));
    let next = (center + 1..=span_end).find(|&t| at(t));
    let p = prev.map_or(span_start as i64 - 1, |t| t as i64);
    let n = next.map_or(span_end as i64 + 1, |t| t as i64);
    let cap = (span_end - span_start + 1) as i64;
    ((n - p).min(cap) as u32, prev.is_none(), next.is_none())
}

pub struct OracleMaps {
    pub intervals: Vec<u32>,
    pub censored_prev: Vec<bool>,
    pub censored_next: Vec<bool>,
}

#[derive(Clone, Copy, Debug)]
pub enum OracleMode {
    Local,
    Forward,
    Backward,
    Combined,
}

/// Full-scan oracle for window `i` of `k` contiguous windows of length `l`
/// starting at the stream origin.
pub fn oracle_window(stream: &SpikeStream, k: usize, l: usize, i: usize, mode: OracleMode) -> OracleMaps {
    let o = stream.origin_tick();
    let w_start = o + (i * l) as u64;
    let w_end = w_start + l as u64 - 1;
    let g_start = o;
    let g_end = o + (k * l) as u64 - 1;
    let center = w_start + (l / 2) as u64;
    let (s, e) = match mode {
        OracleMode::Local => (w_start, w_end),
        OracleMode::Forward => (g_start, w_end),
        OracleMode::Backward => (w_start, g_end),
        OracleMode::Combined => (g_start, g_end),
    };
    let mut out = OracleMaps {
        intervals: vec![],
        censored_prev: vec![],
        censored_next: vec![],
    };
    for p in 0..stream.pixels() {
        let (iv, cp, cn) = scan_interval(stream, p, center, s, e);
        out.intervals.push(iv);
        out.censored_prev.push(cp);
        out.censored_next.push(cn);
    }
    out
}

/// Per-pixel spike count by testing every bit.
pub fn naive_counts(stream: &SpikeStream, first: usize, len: usize) -> Vec<u32> {
    let mut c = vec![0; stream.pixels()];
    for t in first..first + len {
        for y in 0..stream.height() {
            for x in 0..stream.width() {
                if stream.get(t, y * stream.width() + x) {
                    c[y * stream.width() + x] += 1;
                }
            }
        }
    }
    c
}

/// Spike train of one pixel from exact prefix sums of integer per-tick charge:
/// fires at `n` iff `floor(S_n / one) > floor(S_{n−1} / one)`.
pub fn prefix_sum_spikes(charges: &[u64], one: u64) -> Vec<bool> {
    let mut sum: u128 = 0;
    let mut out = Vec::with_capacity(charges.len());
    for &q in charges {
        let before = sum / one as u128;
        sum += q as u128;
        out.push(sum / one as u128 > before);
    }
    out
}

pub fn naive_mse(a: &Image, b: &Image) -> f64 {
    let mut s = 0.0;
    for y in 0..a.height() {
        for x in 0..a.width() {
            let d = a.at(y, x) - b.at(y, x);
            s += d * d;
        }
    }
    s / (a.height() * a.width()) as f64
}

/// Direct 2-D SSIM: explicit 11×11 weights at every fully covered position.
#[allow(clippy::needless_range_loop)]
pub fn naive_ssim(a: &Image, b: &Image) -> f64 {
    let sigma = 1.5f64;
    let mut w = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in w.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    let c1 = 0.0001;
    let c2 = 0.0009;
    let mut acc = 0.0;
    let mut count = 0usize;
    for y0 in 0..=a.height() - 11 {
        for x0 in 0..=a.width() - 11 {
            let (mut mx, mut my) = (0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let wt = w[i][j] / total;
                    mx += wt * a.at(y0 + i, x0 + j);
                    my += wt * b.at(y0 + i, x0 + j);
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let wt = w[i][j] / total;
                    let dx = a.at(y0 + i, x0 + j) - mx;
                    let dy = b.at(y0 + i, x0 + j) - my;
                    vx += wt * dx * dx;
                    vy += wt * dy * dy;
                    cxy += wt * dx * dy;
                }
            }
            acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    acc / count as f64
}

pub fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    Image::from_fn(h, w, |_, _| rng.random::<f64>())
}
