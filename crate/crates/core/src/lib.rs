//! Spike camera stream processing: an integrate-and-fire sensor simulator,
//! a bit-packed stream format, local and global inter-spike-interval
//! transforms with carried release times, classical reconstructions, and
//! PSNR/SSIM evaluation.

pub mod error;
pub mod image;
pub mod isi;
pub mod kv;
pub mod metrics;
pub mod pipeline;
pub mod recon;
pub mod scene;
pub mod simulator;
pub mod stream;
pub mod tensor;

pub use error::{Error, Result};
pub use image::Image;
pub use isi::{
    gisi_sweep, gisi_update, lisi_transform, release_state_update, Direction, GisiSweep, IsiMap, IsiMode,
    ReleaseTimeState, TickSpan,
};
pub use metrics::{psnr, ssim, MetricReport};
pub use recon::{gisi_tfi_reconstruct, tfi_reconstruct, tfp_reconstruct, ReconImage, ReconMethod};
pub use scene::{generate_synthetic_scene, MotionParams, ProceduralScene, SceneKind};
pub use simulator::{apply_darkening, sample_dark_current, simulate_stream, SceneSequence, SimConfig};
pub use stream::{decode_stream, encode_stream, slice_window, spike_count_map, SpikeStream, SpikeWindow};
