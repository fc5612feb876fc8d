use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spikelight::isi::IsiMode;
use spikelight::kv::KeyValues;
use spikelight::pipeline::{
    cmd_eval, cmd_export_tensors, cmd_gen_dataset, cmd_recon, cmd_recon_dataset, cmd_transform,
    sim_config_from_kv, DatasetConfig, DEFAULT_NUM_WINDOWS, MANIFEST_FILE,
};
use spikelight::recon::ReconMethod;
use spikelight::simulator::SimConfig;
use spikelight::stream::DEFAULT_WINDOW_LEN;
use spikelight::{Error, Result};

#[derive(Parser)]
#[command(name = "spikelight", version, about = "Spike camera simulation, interval transforms and reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a low-light synthetic dataset (streams, ground truth, manifest).
    GenDataset {
        /// key = value dataset config; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export interval maps of a stream as .ten tensors.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// lisi | gisi-forward | gisi-backward | gisi-combined
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = DEFAULT_WINDOW_LEN)]
        window_len: usize,
        #[arg(long, default_value_t = DEFAULT_NUM_WINDOWS)]
        num_windows: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct one image per window from a stream or a whole dataset.
    Recon {
        /// A .spk file, or a dataset directory containing manifest.txt.
        #[arg(long)]
        input: PathBuf,
        /// tfp | tfi | gisi-tfi
        #[arg(long)]
        method: String,
        /// Sensor key = value file (threshold, gain); ignored for datasets.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_LEN)]
        window_len: usize,
        #[arg(long, default_value_t = DEFAULT_NUM_WINDOWS)]
        num_windows: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score reconstructions against ground truth; CSV plus a summary table.
    Eval {
        #[arg(long)]
        recon: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Write the CSV here instead of stdout; the summary goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export per-window spike, interval and ground-truth tensors of a dataset.
    ExportTensors {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenDataset { config, seed, out } => {
            let mut cfg = match config {
                Some(p) => DatasetConfig::load(p)?,
                None => DatasetConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let m = cmd_gen_dataset(&cfg, &out)?;
            println!(
                "wrote {} scenes of {}x{}x{} to {}",
                m.scenes.len(),
                m.height,
                m.width,
                m.stream_len,
                out.display()
            );
        }
        Command::Transform {
            input,
            mode,
            window_len,
            num_windows,
            out,
        } => {
            let mode: IsiMode = mode.parse()?;
            let files = cmd_transform(&input, mode, num_windows, window_len, &out)?;
            println!("wrote {} tensors to {}", files.len(), out.display());
        }
        Command::Recon {
            input,
            method,
            config,
            window_len,
            num_windows,
            out,
        } => {
            let method: ReconMethod = method.parse()?;
            if input.is_dir() && input.join(MANIFEST_FILE).is_file() {
                cmd_recon_dataset(&input, method, &out)?;
            } else {
                let cfg = match config {
                    Some(p) => {
                        let text = fs::read_to_string(&p).map_err(|e| Error::IoAt { path: p, source: e })?;
                        sim_config_from_kv(&KeyValues::parse(&text)?, &SimConfig::default())?
                    }
                    None => SimConfig::default(),
                };
                cmd_recon(&input, method, &cfg, num_windows, window_len, &out)?;
            }
            println!("wrote reconstructions to {}", out.display());
        }
        Command::Eval { recon, gt, out } => {
            let report = cmd_eval(&recon, &gt)?;
            match out {
                Some(path) => {
                    fs::write(&path, report.to_csv()).map_err(|e| Error::IoAt {
                        path: path.clone(),
                        source: e,
                    })?;
                    let summary = path.with_extension("summary.txt");
                    fs::write(&summary, report.summary_table()).map_err(|e| Error::IoAt {
                        path: summary,
                        source: e,
                    })?;
                    print!("{}", report.summary_table());
                }
                None => print!("{}", report.to_csv()),
            }
        }
        Command::ExportTensors { input, out } => {
            cmd_export_tensors(&input, &out)?;
            println!("wrote tensors to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
