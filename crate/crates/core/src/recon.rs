//! Training-free reconstructions from firing rate and inter-spike interval.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::isi::{gisi_sweep, lisi_transform, IsiMap};
use crate::simulator::SimConfig;
use crate::stream::{spike_count_map, SpikeWindow};

/// Reconstructed intensity, every value finite and in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconImage(Image);

impl ReconImage {
    pub fn new(image: Image) -> Result<Self> {
        if let Some(v) = image.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Argument(format!("reconstruction value {v} outside [0,1]")));
        }
        Ok(Self(image))
    }

    fn from_values(height: usize, width: usize, values: impl Iterator<Item = f64>) -> Self {
        let data = values
            .map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        Self(Image::new(height, width, data).expect("dims come from a window"))
    }

    pub fn image(&self) -> &Image {
        &self.0
    }

    pub fn into_image(self) -> Image {
        self.0
    }
}

impl std::ops::Deref for ReconImage {
    type Target = Image;

    fn deref(&self) -> &Image {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReconMethod {
    Tfp,
    Tfi,
    GisiTfi,
}

impl ReconMethod {
    pub const ALL: [ReconMethod; 3] = [ReconMethod::Tfp, ReconMethod::Tfi, ReconMethod::GisiTfi];

    pub fn name(self) -> &'static str {
        match self {
            ReconMethod::Tfp => "tfp",
            ReconMethod::Tfi => "tfi",
            ReconMethod::GisiTfi => "gisi-tfi",
        }
    }
}

impl std::str::FromStr for ReconMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReconMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown reconstruction method {s:?}")))
    }
}

/// Firing-rate reconstruction: `φ·count / (L·gain)`.
pub fn tfp_reconstruct(window: &SpikeWindow<'_>, cfg: &SimConfig) -> ReconImage {
    let scale = cfg.threshold / (window.len() as f64 * cfg.gain);
    let counts = spike_count_map(window);
    ReconImage::from_values(
        window.height(),
        window.width(),
        counts.into_iter().map(|c| c as f64 * scale),
    )
}

/// Interval reconstruction: `φ / (gain·interval)`.
///
/// Censored pixels use their substituted interval; fully censored ones end up
/// at the floor value `φ / (gain·cap)`.
pub fn tfi_reconstruct(isi: &IsiMap, cfg: &SimConfig) -> ReconImage {
    let k = cfg.threshold / cfg.gain;
    ReconImage::from_values(
        isi.height(),
        isi.width(),
        isi.intervals().iter().map(|&iv| k / iv as f64),
    )
}

/// TFI on the combined global interval of each window.
pub fn gisi_tfi_reconstruct(windows: &[SpikeWindow<'_>], cfg: &SimConfig) -> Result<Vec<ReconImage>> {
    let sweep = gisi_sweep(windows)?;
    Ok(sweep.combined.iter().map(|m| tfi_reconstruct(m, cfg)).collect())
}

/// Runs `method` on every window.
pub fn reconstruct(method: ReconMethod, windows: &[SpikeWindow<'_>], cfg: &SimConfig) -> Result<Vec<ReconImage>> {
    cfg.validate()?;
    match method {
        ReconMethod::Tfp => Ok(windows.iter().map(|w| tfp_reconstruct(w, cfg)).collect()),
        ReconMethod::Tfi => Ok(windows
            .iter()
            .map(|w| tfi_reconstruct(&lisi_transform(w), cfg))
            .collect()),
        ReconMethod::GisiTfi => gisi_tfi_reconstruct(windows, cfg),
    }
}
