//! Full-reference quality metrics: PSNR and Gaussian-window SSIM.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::image::Image;

/// PSNR reported for identical images.
pub const PSNR_CAP: f64 = 99.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if a.same_dims(b) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "image dims differ: {}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )))
    }
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.data().len() as f64)
}

/// `10·log10(1 / MSE)` for unit peak; [`PSNR_CAP`] when MSE is zero.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (1.0 / m).log10()).min(PSNR_CAP))
}

/// Normalised 1-D Gaussian taps.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let taps: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable "valid" filtering; output is `(h − k + 1) × (w − k + 1)`.
fn filter_valid(data: &[f64], height: usize, width: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let (oh, ow) = (height - k + 1, width - k + 1);
    let mut rows = vec![0.0; height * ow];
    for y in 0..height {
        let src = &data[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = kernel.iter().zip(&src[x..x + k]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, w)| w * rows[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all fully covered 11×11 Gaussian windows (σ = 1.5, L = 1).
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let (h, w) = (a.height(), a.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::Argument(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}"
        )));
    }
    let kernel = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);
    let (x, y) = (a.data(), b.data());
    let sq = |v: &[f64]| v.iter().map(|p| p * p).collect::<Vec<_>>();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();

    let mu_x = filter_valid(x, h, w, &kernel);
    let mu_y = filter_valid(y, h, w, &kernel);
    let e_xx = filter_valid(&sq(x), h, w, &kernel);
    let e_yy = filter_valid(&sq(y), h, w, &kernel);
    let e_xy = filter_valid(&xy, h, w, &kernel);

    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let n = mu_x.len();
    let total: f64 = (0..n)
        .map(|i| ssim_term(mu_x[i], mu_y[i], e_xx[i], e_yy[i], e_xy[i], c1, c2))
        .sum();
    Ok(total / n as f64)
}

/// Local SSIM from first and second moments.
#[inline]
pub fn ssim_term(mu_x: f64, mu_y: f64, e_xx: f64, e_yy: f64, e_xy: f64, c1: f64, c2: f64) -> f64 {
    let var_x = e_xx - mu_x * mu_x;
    let var_y = e_yy - mu_y * mu_y;
    let cov = e_xy - mu_x * mu_y;
    ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetric {
    pub scene: String,
    pub frame: String,
    pub psnr: f64,
    pub ssim: f64,
}

/// Per-frame metrics and their means.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    pub rows: Vec<FrameMetric>,
}

impl MetricReport {
    pub fn push(&mut self, scene: impl Into<String>, frame: impl Into<String>, reference: &Image, test: &Image) -> Result<()> {
        self.rows.push(FrameMetric {
            scene: scene.into(),
            frame: frame.into(),
            psnr: psnr(test, reference)?,
            ssim: ssim(test, reference)?,
        });
        Ok(())
    }

    pub fn mean_psnr(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.psnr))
    }

    pub fn mean_ssim(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.ssim))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scene,frame,psnr,ssim\n");
        for r in &self.rows {
            writeln!(out, "{},{},{:.6},{:.8}", r.scene, r.frame, r.psnr, r.ssim).unwrap();
        }
        out
    }

    /// Per-scene and overall means as an aligned text table.
    pub fn summary_table(&self) -> String {
        let mut scenes: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !scenes.contains(&r.scene.as_str()) {
                scenes.push(&r.scene);
            }
        }
        let width = scenes.iter().map(|s| s.len()).max().unwrap_or(0).max(5);
        let mut out = format!("{:<width$}  {:>6}  {:>10}  {:>8}\n", "scene", "frames", "psnr", "ssim");
        for s in &scenes {
            let rows: Vec<&FrameMetric> = self.rows.iter().filter(|r| r.scene == *s).collect();
            writeln!(
                out,
                "{:<width$}  {:>6}  {:>10.4}  {:>8.5}",
                s,
                rows.len(),
                mean(rows.iter().map(|r| r.psnr)),
                mean(rows.iter().map(|r| r.ssim))
            )
            .unwrap();
        }
        writeln!(
            out,
            "{:<width$}  {:>6}  {:>10.4}  {:>8.5}",
            "mean",
            self.rows.len(),
            self.mean_psnr(),
            self.mean_ssim()
        )
        .unwrap();
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}
