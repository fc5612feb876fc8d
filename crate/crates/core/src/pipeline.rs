//! Dataset generation, interval export, reconstruction and evaluation drivers
//! behind the command-line subcommands.
//!
//! Dataset layout under the output directory:
//!
//! ```text
//! manifest.txt
//! streams/<scene>.spk
//! gt/<scene>/<window:03>.pgm
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{read_pgm, Image};
use crate::isi::{gisi_sweep, IsiMap, IsiMode};
use crate::kv::KeyValues;
use crate::metrics::MetricReport;
use crate::recon::{reconstruct, ReconMethod};
use crate::scene::{MotionParams, ProceduralScene, SceneKind};
use crate::simulator::{simulate_stream, Darkened, FrameSource, SimConfig};
use crate::stream::{window_center, SpikeStream, DEFAULT_WINDOW_LEN};
use crate::tensor::Tensor;

pub const DEFAULT_NUM_WINDOWS: usize = 21;
pub const MANIFEST_FILE: &str = "manifest.txt";
const MANIFEST_FORMAT: &str = "spikelight-dataset";
const MANIFEST_VERSION: u32 = 1;

/// How each scene is darkened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Darkening {
    /// Uniform in `(0, 1]`, drawn per scene.
    Random,
    Fixed(f64),
}

impl Darkening {
    /// Named presets for the hand-designed low-light test scenes.
    pub const PRESETS: [(&'static str, f64); 4] = [("normal", 1.0), ("dim", 0.3), ("low", 0.1), ("dark", 0.03)];

    fn parse(s: &str) -> Result<Self> {
        if s == "random" {
            return Ok(Darkening::Random);
        }
        if let Some((_, f)) = Self::PRESETS.iter().find(|(name, _)| *name == s) {
            return Ok(Darkening::Fixed(*f));
        }
        match s.parse::<f64>() {
            Ok(f) if f > 0.0 && f <= 1.0 => Ok(Darkening::Fixed(f)),
            _ => Err(Error::Config(format!(
                "darkening must be random, a preset or a number in (0, 1], got {s:?}"
            ))),
        }
    }

    fn render(&self) -> String {
        match self {
            Darkening::Random => "random".into(),
            Darkening::Fixed(f) => f.to_string(),
        }
    }
}

/// Inputs of `gen-dataset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub scenes: usize,
    pub height: usize,
    pub width: usize,
    pub stream_len: usize,
    pub num_windows: usize,
    pub window_len: usize,
    pub seed: u64,
    pub kinds: Vec<SceneKind>,
    pub darkening: Darkening,
    /// Upper bound on per-tick motion, pixels.
    pub max_speed: f64,
    /// Sensor parameters; the per-scene noise seed is drawn from `seed`.
    pub sim: SimConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            scenes: 4,
            height: 64,
            width: 64,
            stream_len: DEFAULT_NUM_WINDOWS * DEFAULT_WINDOW_LEN,
            num_windows: DEFAULT_NUM_WINDOWS,
            window_len: DEFAULT_WINDOW_LEN,
            seed: 0,
            kinds: SceneKind::ALL.to_vec(),
            darkening: Darkening::Random,
            max_speed: 0.5,
            sim: SimConfig::default(),
        }
    }
}

const SIM_KEYS: [&str; 7] = [
    "threshold",
    "gain",
    "readout_period",
    "dark_mean",
    "dark_fpn_sigma",
    "shot_noise",
    "electrons_per_threshold",
];

/// Reads sensor keys from `kv` on top of `base`.
pub fn sim_config_from_kv(kv: &KeyValues, base: &SimConfig) -> Result<SimConfig> {
    let cfg = SimConfig {
        threshold: kv.parse_or("threshold", base.threshold)?,
        gain: kv.parse_or("gain", base.gain)?,
        readout_period: kv.parse_or("readout_period", base.readout_period)?,
        dark_mean: kv.parse_or("dark_mean", base.dark_mean)?,
        dark_fpn_sigma: kv.parse_or("dark_fpn_sigma", base.dark_fpn_sigma)?,
        shot_noise: kv.parse_or("shot_noise", base.shot_noise)?,
        electrons_per_threshold: kv.parse_or("electrons_per_threshold", base.electrons_per_threshold)?,
        seed: kv.parse_or("sim_seed", base.seed)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn sim_config_to_kv(cfg: &SimConfig, kv: &mut KeyValues) {
    kv.set("threshold", cfg.threshold);
    kv.set("gain", cfg.gain);
    kv.set("readout_period", cfg.readout_period);
    kv.set("dark_mean", cfg.dark_mean);
    kv.set("dark_fpn_sigma", cfg.dark_fpn_sigma);
    kv.set("shot_noise", cfg.shot_noise);
    kv.set("electrons_per_threshold", cfg.electrons_per_threshold);
}

impl DatasetConfig {
    /// Full-size training set: 100 scenes of 250×400 pixels and 1000 ticks.
    pub fn full_size() -> Self {
        Self {
            scenes: 100,
            height: 250,
            width: 400,
            stream_len: 1000,
            ..Self::default()
        }
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        const KEYS: [&str; 10] = [
            "scenes",
            "height",
            "width",
            "stream_len",
            "num_windows",
            "window_len",
            "seed",
            "kinds",
            "darkening",
            "max_speed",
        ];
        kv.check_known(|k| KEYS.contains(&k) || SIM_KEYS.contains(&k))?;
        let base = Self::default();
        let num_windows = kv.parse_or("num_windows", base.num_windows)?;
        let window_len = kv.parse_or("window_len", base.window_len)?;
        let kinds = match kv.get("kinds") {
            None | Some("all") => SceneKind::ALL.to_vec(),
            Some(list) => list
                .split(',')
                .map(|k| k.trim().parse::<SceneKind>().map_err(|e| Error::Config(e.to_string())))
                .collect::<Result<Vec<_>>>()?,
        };
        let cfg = Self {
            scenes: kv.parse_or("scenes", base.scenes)?,
            height: kv.parse_or("height", base.height)?,
            width: kv.parse_or("width", base.width)?,
            stream_len: kv.parse_or("stream_len", num_windows * window_len)?,
            num_windows,
            window_len,
            seed: kv.parse_or("seed", base.seed)?,
            kinds,
            darkening: kv.get("darkening").map_or(Ok(Darkening::Random), Darkening::parse)?,
            max_speed: kv.parse_or("max_speed", base.max_speed)?,
            sim: sim_config_from_kv(kv, &base.sim)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Self::from_kv(&KeyValues::parse(&text)?)
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("scenes", self.scenes);
        kv.set("height", self.height);
        kv.set("width", self.width);
        kv.set("stream_len", self.stream_len);
        kv.set("num_windows", self.num_windows);
        kv.set("window_len", self.window_len);
        kv.set("seed", self.seed);
        kv.set(
            "kinds",
            self.kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(","),
        );
        kv.set("darkening", self.darkening.render());
        kv.set("max_speed", self.max_speed);
        sim_config_to_kv(&self.sim, &mut kv);
        kv
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenes == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::Config("scenes, height and width must be positive".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("no scene kinds".into()));
        }
        check_windowing(self.num_windows, self.window_len, self.stream_len).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.max_speed.is_finite() && self.max_speed >= 0.0) {
            return Err(Error::Config(format!("max_speed must be >= 0, got {}", self.max_speed)));
        }
        self.sim.validate()
    }
}

fn check_windowing(num_windows: usize, window_len: usize, stream_len: usize) -> Result<()> {
    if num_windows == 0 {
        return Err(Error::Argument("num_windows must be positive".into()));
    }
    if window_len.is_multiple_of(2) {
        return Err(Error::Argument(format!("window_len must be odd, got {window_len}")));
    }
    match num_windows.checked_mul(window_len) {
        Some(n) if n <= stream_len => Ok(()),
        _ => Err(Error::Argument(format!(
            "{num_windows} windows of {window_len} ticks exceed stream length {stream_len}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneEntry {
    pub id: String,
    pub kind: SceneKind,
    /// Seed of the procedural scene content.
    pub seed: u64,
    /// Seed of the sensor noise.
    pub sim_seed: u64,
    pub darkening: f64,
    pub motion: MotionParams,
    /// Relative to the dataset directory.
    pub stream: PathBuf,
    pub gt_dir: PathBuf,
}

impl SceneEntry {
    pub fn gt_path(&self, window: usize) -> PathBuf {
        self.gt_dir.join(frame_file_name(window))
    }
}

pub fn frame_file_name(window: usize) -> String {
    format!("{window:03}.pgm")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub height: usize,
    pub width: usize,
    pub stream_len: usize,
    pub num_windows: usize,
    pub window_len: usize,
    pub seed: u64,
    pub sim: SimConfig,
    pub scenes: Vec<SceneEntry>,
}

impl DatasetManifest {
    /// Sensor config of one scene.
    pub fn scene_sim(&self, scene: &SceneEntry) -> SimConfig {
        SimConfig {
            seed: scene.sim_seed,
            ..self.sim.clone()
        }
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("format", MANIFEST_FORMAT);
        kv.set("version", MANIFEST_VERSION);
        kv.set("height", self.height);
        kv.set("width", self.width);
        kv.set("stream_len", self.stream_len);
        kv.set("num_windows", self.num_windows);
        kv.set("window_len", self.window_len);
        kv.set("seed", self.seed);
        sim_config_to_kv(&self.sim, &mut kv);
        kv.set("scenes", self.scenes.len());
        for (i, s) in self.scenes.iter().enumerate() {
            let key = |name: &str| format!("scene.{i:03}.{name}");
            kv.set(&key("id"), &s.id);
            kv.set(&key("kind"), s.kind);
            kv.set(&key("seed"), s.seed);
            kv.set(&key("sim_seed"), s.sim_seed);
            kv.set(&key("darkening"), s.darkening);
            kv.set(&key("speed"), s.motion.speed);
            kv.set(&key("direction"), s.motion.direction);
            kv.set(&key("period"), s.motion.period);
            kv.set(&key("stream"), s.stream.display());
            kv.set(&key("gt"), s.gt_dir.display());
        }
        kv
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let m = |e: Error| Error::Manifest(e.to_string());
        if kv.get("format") != Some(MANIFEST_FORMAT) {
            return Err(Error::Manifest("not a dataset manifest".into()));
        }
        let version: u32 = kv.parse_value("version").map_err(m)?.unwrap_or(0);
        if version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!("unsupported manifest version {version}")));
        }
        let req = |key: &str| -> Result<&str> { kv.require(key).map_err(m) };
        let num = |key: &str| -> Result<usize> {
            req(key)?
                .parse()
                .map_err(|_| Error::Manifest(format!("bad value for {key}")))
        };
        let count = num("scenes")?;
        let mut scenes = Vec::with_capacity(count);
        for i in 0..count {
            let key = |name: &str| format!("scene.{i:03}.{name}");
            let f = |name: &str| -> Result<f64> {
                req(&key(name))?
                    .parse()
                    .map_err(|_| Error::Manifest(format!("bad value for {}", key(name))))
            };
            let u = |name: &str| -> Result<u64> {
                req(&key(name))?
                    .parse()
                    .map_err(|_| Error::Manifest(format!("bad value for {}", key(name))))
            };
            scenes.push(SceneEntry {
                id: req(&key("id"))?.to_string(),
                kind: req(&key("kind"))?.parse().map_err(m)?,
                seed: u("seed")?,
                sim_seed: u("sim_seed")?,
                darkening: f("darkening")?,
                motion: MotionParams {
                    speed: f("speed")?,
                    direction: f("direction")?,
                    period: f("period")?,
                },
                stream: PathBuf::from(req(&key("stream"))?),
                gt_dir: PathBuf::from(req(&key("gt"))?),
            });
        }
        let manifest = Self {
            height: num("height")?,
            width: num("width")?,
            stream_len: num("stream_len")?,
            num_windows: num("num_windows")?,
            window_len: num("window_len")?,
            seed: req("seed")?
                .parse()
                .map_err(|_| Error::Manifest("bad value for seed".into()))?,
            sim: sim_config_from_kv(kv, &SimConfig::default()).map_err(m)?,
            scenes,
        };
        check_windowing(manifest.num_windows, manifest.window_len, manifest.stream_len).map_err(m)?;
        Ok(manifest)
    }

    pub fn render(&self) -> String {
        format!("# spikelight dataset manifest\n{}", self.to_kv().render())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(&KeyValues::parse(text).map_err(|e| Error::Manifest(e.to_string()))?)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io_at(&path, e))?;
        Self::parse(&text)
    }

    /// Checks that every referenced file exists and decodes with the expected shape.
    pub fn verify(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for s in &self.scenes {
            let stream = SpikeStream::read_file(dir.join(&s.stream))
                .map_err(|e| Error::Manifest(format!("scene {}: {e}", s.id)))?;
            if (stream.height(), stream.width(), stream.len()) != (self.height, self.width, self.stream_len) {
                return Err(Error::Manifest(format!("scene {}: stream shape mismatch", s.id)));
            }
            for i in 0..self.num_windows {
                let (h, w, _) = read_pgm(dir.join(s.gt_path(i)))
                    .map_err(|e| Error::Manifest(format!("scene {}: {e}", s.id)))?;
                if (h, w) != (self.height, self.width) {
                    return Err(Error::Manifest(format!("scene {}: ground truth {i} shape mismatch", s.id)));
                }
            }
        }
        Ok(())
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io_at(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io_at(path, e))
}

/// Draws the per-scene parameters of a dataset, in scene order.
pub fn plan_dataset(cfg: &DatasetConfig) -> Vec<SceneEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.scenes)
        .map(|i| {
            let id = format!("scene_{i:03}");
            let kind = cfg.kinds[i % cfg.kinds.len()];
            let seed = rng.random::<u64>();
            let sim_seed = rng.random::<u64>();
            // 1 − U[0,1) lies in (0, 1]
            let random_factor = 1.0 - rng.random::<f64>();
            let darkening = match cfg.darkening {
                Darkening::Random => random_factor,
                Darkening::Fixed(f) => f,
            };
            let motion = MotionParams::random(&mut rng, cfg.max_speed, cfg.height, cfg.width);
            SceneEntry {
                stream: PathBuf::from("streams").join(format!("{id}.spk")),
                gt_dir: PathBuf::from("gt").join(&id),
                id,
                kind,
                seed,
                sim_seed,
                darkening,
                motion,
            }
        })
        .collect()
}

/// Generates streams, per-window ground truth and the manifest under `out_dir`.
pub fn cmd_gen_dataset(cfg: &DatasetConfig, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    create_dir(&out_dir.join("streams"))?;
    let manifest = DatasetManifest {
        height: cfg.height,
        width: cfg.width,
        stream_len: cfg.stream_len,
        num_windows: cfg.num_windows,
        window_len: cfg.window_len,
        seed: cfg.seed,
        sim: SimConfig {
            seed: 0,
            ..cfg.sim.clone()
        },
        scenes: plan_dataset(cfg),
    };

    manifest
        .scenes
        .par_iter()
        .map(|entry| write_scene(&manifest, entry, out_dir))
        .collect::<Result<Vec<()>>>()?;
    write_text(&out_dir.join(MANIFEST_FILE), &manifest.render())?;
    Ok(manifest)
}

fn write_scene(manifest: &DatasetManifest, entry: &SceneEntry, out_dir: &Path) -> Result<()> {
    let scene = ProceduralScene::new(
        entry.kind,
        manifest.height,
        manifest.width,
        manifest.stream_len,
        entry.motion,
        entry.seed,
    )?;
    let scene = Darkened::new(scene, entry.darkening)?;
    let stream = simulate_stream(&scene, &manifest.scene_sim(entry))?;
    stream.write_file(out_dir.join(&entry.stream))?;

    let gt_dir = out_dir.join(&entry.gt_dir);
    create_dir(&gt_dir)?;
    let mut frame = vec![0f32; manifest.height * manifest.width];
    for i in 0..manifest.num_windows {
        let tick = window_center(0, i, manifest.window_len) as usize;
        scene.render(tick, &mut frame);
        let img = Image::new(
            manifest.height,
            manifest.width,
            frame.iter().map(|&v| v as f64).collect(),
        )?;
        img.write_pgm(out_dir.join(entry.gt_path(i)))?;
    }
    Ok(())
}

fn censor_tensor(map: &IsiMap) -> Result<Tensor> {
    let mut data: Vec<f32> = map.censored_prev().iter().map(|&c| c as u8 as f32).collect();
    data.extend(map.censored_next().iter().map(|&c| c as u8 as f32));
    Tensor::new(vec![2, map.height(), map.width()], data)
}

fn interval_tensor(map: &IsiMap) -> Result<Tensor> {
    Tensor::new(
        vec![map.height(), map.width()],
        map.intervals().iter().map(|&v| v as f32).collect(),
    )
}

/// Writes `<mode>_<i>.ten` interval maps and `<mode>_<i>_censor.ten` flags
/// (`[2, H, W]`: past side, future side) for the first `num_windows` windows.
pub fn cmd_transform(
    stream_path: impl AsRef<Path>,
    mode: IsiMode,
    num_windows: usize,
    window_len: usize,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let stream = SpikeStream::read_file(stream_path)?;
    check_windowing(num_windows, window_len, stream.len())?;
    let windows = stream.windows(num_windows, window_len)?;
    let sweep = gisi_sweep(&windows)?;
    let out_dir = out_dir.as_ref();
    create_dir(out_dir)?;
    let mut written = Vec::new();
    for (i, map) in sweep.maps(mode).iter().enumerate() {
        let p = out_dir.join(format!("{}_{i:03}.ten", mode.name()));
        interval_tensor(map)?.write_file(&p)?;
        written.push(p);
        let p = out_dir.join(format!("{}_{i:03}_censor.ten", mode.name()));
        censor_tensor(map)?.write_file(&p)?;
        written.push(p);
    }
    Ok(written)
}

/// Reconstructs one image per window and writes `<i:03>.pgm` files.
pub fn cmd_recon(
    stream_path: impl AsRef<Path>,
    method: ReconMethod,
    cfg: &SimConfig,
    num_windows: usize,
    window_len: usize,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let stream = SpikeStream::read_file(stream_path)?;
    check_windowing(num_windows, window_len, stream.len())?;
    let windows = stream.windows(num_windows, window_len)?;
    let images = reconstruct(method, &windows, cfg)?;
    let out_dir = out_dir.as_ref();
    create_dir(out_dir)?;
    images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            let p = out_dir.join(frame_file_name(i));
            img.write_pgm(&p)?;
            Ok(p)
        })
        .collect()
}

/// Reconstructs every scene of a dataset into `out_dir/<scene>/<i:03>.pgm`.
pub fn cmd_recon_dataset(dataset_dir: impl AsRef<Path>, method: ReconMethod, out_dir: impl AsRef<Path>) -> Result<()> {
    let dataset_dir = dataset_dir.as_ref();
    let manifest = DatasetManifest::load(dataset_dir)?;
    let out_dir = out_dir.as_ref();
    manifest
        .scenes
        .par_iter()
        .map(|s| {
            cmd_recon(
                dataset_dir.join(&s.stream),
                method,
                &manifest.sim,
                manifest.num_windows,
                manifest.window_len,
                out_dir.join(&s.id),
            )
            .map(|_| ())
        })
        .collect()
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io_at(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io_at(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn pgm_stems(dir: &Path) -> Result<Vec<String>> {
    Ok(sorted_entries(dir)?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "pgm"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect())
}

/// Pairs `recon_dir` with `gt_dir` by relative path and scores every frame.
///
/// Subdirectories of `recon_dir` are scenes (`<scene>/<frame>.pgm` on both
/// sides); a flat directory is a single scene named after it.
pub fn cmd_eval(recon_dir: impl AsRef<Path>, gt_dir: impl AsRef<Path>) -> Result<MetricReport> {
    let (recon_dir, gt_dir) = (recon_dir.as_ref(), gt_dir.as_ref());
    let scene_dirs: Vec<PathBuf> = sorted_entries(recon_dir)?.into_iter().filter(|p| p.is_dir()).collect();
    let groups: Vec<(String, PathBuf, PathBuf)> = if scene_dirs.is_empty() {
        let name = recon_dir
            .file_name()
            .map_or_else(|| "scene".to_string(), |n| n.to_string_lossy().into_owned());
        vec![(name, recon_dir.to_path_buf(), gt_dir.to_path_buf())]
    } else {
        scene_dirs
            .into_iter()
            .map(|d| {
                let name = d.file_name().unwrap().to_string_lossy().into_owned();
                let gt = gt_dir.join(&name);
                (name, d, gt)
            })
            .collect()
    };

    let mut report = MetricReport::default();
    for (scene, rdir, gdir) in groups {
        let frames = pgm_stems(&rdir)?;
        if !gdir.is_dir() {
            return Err(Error::Manifest(format!("no ground truth directory for scene {scene}")));
        }
        let gt_frames = pgm_stems(&gdir)?;
        if let Some(f) = frames.iter().find(|f| !gt_frames.contains(f)) {
            return Err(Error::Manifest(format!("scene {scene}: no ground truth for frame {f}")));
        }
        if let Some(f) = gt_frames.iter().find(|f| !frames.contains(f)) {
            return Err(Error::Manifest(format!("scene {scene}: no reconstruction for frame {f}")));
        }
        for f in frames {
            let test = Image::read_pgm(rdir.join(format!("{f}.pgm")))?;
            let reference = Image::read_pgm(gdir.join(format!("{f}.pgm")))?;
            report.push(&scene, &f, &reference, &test)?;
        }
    }
    Ok(report)
}

/// Writes the per-window tensors a learned reconstructor consumes, per scene:
/// `spikes_<i>.ten` `[L, H, W]`, one interval map per [`IsiMode`] with its
/// censor flags, and `gt_<i>.ten` `[H, W]` in `[0, 1]`.
pub fn cmd_export_tensors(dataset_dir: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<()> {
    let dataset_dir = dataset_dir.as_ref();
    let manifest = DatasetManifest::load(dataset_dir)?;
    let out_dir = out_dir.as_ref();
    create_dir(out_dir)?;

    manifest
        .scenes
        .par_iter()
        .map(|s| -> Result<()> {
            let dir = out_dir.join(&s.id);
            create_dir(&dir)?;
            let stream = SpikeStream::read_file(dataset_dir.join(&s.stream))?;
            let windows = stream.windows(manifest.num_windows, manifest.window_len)?;
            let sweep = gisi_sweep(&windows)?;
            for (i, w) in windows.iter().enumerate() {
                let mut spikes = Vec::with_capacity(w.len() * w.pixels());
                for j in 0..w.len() {
                    spikes.extend((0..w.pixels()).map(|p| w.get(j, p) as u8 as f32));
                }
                Tensor::new(vec![w.len(), w.height(), w.width()], spikes)?
                    .write_file(dir.join(format!("spikes_{i:03}.ten")))?;
                for mode in IsiMode::ALL {
                    let map = &sweep.maps(mode)[i];
                    interval_tensor(map)?.write_file(dir.join(format!("{}_{i:03}.ten", mode.name())))?;
                    censor_tensor(map)?.write_file(dir.join(format!("{}_{i:03}_censor.ten", mode.name())))?;
                }
                let gt = Image::read_pgm(dataset_dir.join(s.gt_path(i)))?;
                Tensor::new(
                    vec![gt.height(), gt.width()],
                    gt.data().iter().map(|&v| v as f32).collect(),
                )?
                .write_file(dir.join(format!("gt_{i:03}.ten")))?;
            }
            let mut index = KeyValues::new();
            index.set("scene", &s.id);
            index.set("num_windows", manifest.num_windows);
            index.set("window_len", manifest.window_len);
            for mode in IsiMode::ALL {
                index.set(&format!("{}.cap", mode.name()), sweep.maps(mode)[0].cap());
            }
            write_text(&dir.join("index.txt"), &index.render())
        })
        .collect::<Result<Vec<()>>>()?;
    write_text(&out_dir.join(MANIFEST_FILE), &manifest.render())
}
