//! Command-line surface. Every run records its resolved command and
//! settings in a run config next to its outputs; `replay` re-executes one.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::backproject::{build_pair, render_banded_mask};
use crate::banding::{extract_banding_pattern, shape_geometry, BandingPattern, ExtractParams, PatternRecord};
use crate::dataset::{build_dataset, discover, load_pairs, split_karyotype, DatasetConfig, PairMeta};
use crate::error::{Error, Result};
use crate::imagecore::{
    binarize, load_raster, load_shape_mask, resize, save_banded_mask, save_gray,
    save_shape_mask, side_by_side, to_grayscale, PreprocessParams,
};
use crate::metrics::{
    baseline_compare, evaluate_set, Condition, DiceMode, EvalSample, Evaluation, MaskSample,
};
use crate::perlin::{generate_perlin_pattern, PerlinConfig, PerlinDefaults};
use crate::synth::{synth_chromosome, write_corpus, SynthParams};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// Module parameters; every field can be overridden by `--config FILE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub preprocess: PreprocessParams,
    pub extract: ExtractParams,
    pub perlin: PerlinDefaults,
    pub synth: SynthParams,
    pub dice_mode: DiceMode,
    /// Smallest component kept when splitting karyotype images.
    pub split_min_area: usize,
    pub split_margin: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            preprocess: PreprocessParams::default(),
            extract: ExtractParams::default(),
            perlin: PerlinDefaults::default(),
            synth: SynthParams::default(),
            dice_mode: DiceMode::Macro,
            split_min_area: 50,
            split_margin: 4,
        }
    }
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn dataset(&self) -> DatasetConfig {
        DatasetConfig {
            preprocess: self.preprocess,
            extract: self.extract,
            perlin: self.perlin,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "karyoband", version, about = "Chromosome banding patterns, banded masks and paired data")]
pub struct Cli {
    /// JSON settings file overriding module defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-image parallelism (default: logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Perlin parameters that override the configured defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct PerlinOverrides {
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub octaves: Option<u32>,
    #[arg(long)]
    pub persistence: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
}

impl PerlinOverrides {
    fn config(&self, defaults: &PerlinDefaults, length: usize, seed: u64) -> PerlinConfig {
        let base = defaults.config(length, seed);
        PerlinConfig {
            scale: self.scale.unwrap_or(base.scale),
            octaves: self.octaves.unwrap_or(base.octaves),
            persistence: self.persistence.unwrap_or(base.persistence),
            threshold: self.threshold.unwrap_or(base.threshold),
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Extract the banding pattern of one chromosome image.
    Extract {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Render a banded mask from a pattern (or a Perlin pattern) on a shape.
    Mask {
        /// Shape mask PNG with white foreground, as written by `extract`.
        #[arg(long, required_unless_present = "image", conflicts_with = "image")]
        shape: Option<PathBuf>,
        /// Chromosome image whose segmented shape is used.
        #[arg(long)]
        image: Option<PathBuf>,
        /// Banding pattern JSON; its length must match the shape's frame.
        #[arg(long, required_unless_present = "perlin", conflicts_with = "perlin")]
        bands: Option<PathBuf>,
        /// Generate a Perlin pattern of the frame's length instead.
        #[arg(long)]
        perlin: bool,
        #[arg(long, env = "KARYOBAND_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        overrides: PerlinOverrides,
        /// Output banded mask PNG.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Generate one Perlin banding pattern.
    Perlin {
        #[arg(long)]
        length: usize,
        #[arg(long, env = "KARYOBAND_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        overrides: PerlinOverrides,
        /// Output JSON.
        #[arg(long, short)]
        out: PathBuf,
        /// Optional 1-pixel-per-sample PNG strip.
        #[arg(long)]
        strip: Option<PathBuf>,
    },
    /// Build splits, paired data and the Perlin test set from a corpus.
    Dataset {
        src: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, env = "KARYOBAND_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Emit `[mask | photo]` pairs for a corpus without splitting or resizing.
    Pairs {
        src: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Score generated images against the masks they were conditioned on.
    Evaluate {
        /// Pair directory, e.g. `data/test` or `data/test_perlin`.
        #[arg(long)]
        inputs: PathBuf,
        /// Directory of generated `{id}.png` images.
        #[arg(long)]
        fakes: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Condition::Real)]
        condition: Condition,
        /// Overrides the configured dice mode.
        #[arg(long, value_enum)]
        dice_mode: Option<DiceMode>,
    },
    /// Compare Perlin masks with the real masks of the same shapes.
    Baseline {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        perlin: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_enum)]
        dice_mode: Option<DiceMode>,
    },
    /// Cut a karyotype image into single-chromosome crops.
    Split {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Render synthetic chromosomes with known banding.
    Synth {
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, env = "KARYOBAND_SEED", default_value_t = 0)]
        seed: u64,
        /// Write a `<karyotype>/<class>/<id>.png` corpus with this many
        /// karyotypes instead of flat samples.
        #[arg(long)]
        karyotypes: Option<usize>,
    },
    /// Re-run a recorded run config.
    Replay { run_config: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub settings: Settings,
}

impl RunConfig {
    pub fn new(command: Command, settings: Settings) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command,
            settings,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn ensure_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => ensure_dir(p),
        _ => Ok(()),
    }
}

/// Run config path for a single-file output: `<stem>.run_config.json`.
fn sidecar_config(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{RUN_CONFIG_FILE}"))
}

fn load_chromosome(path: &Path) -> Result<crate::imagecore::GrayImage> {
    to_grayscale(&load_raster(path)?)
}

/// Parse arguments, apply `--config` and `--threads`, and run.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidConfig("--threads must be >= 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    let settings = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    execute(&cli.command, &settings)
}

/// Run one command with explicit settings.
pub fn execute(command: &Command, settings: &Settings) -> Result<()> {
    let record = RunConfig::new(command.clone(), settings.clone());
    match command {
        Command::Extract { input, out } => {
            ensure_dir(out)?;
            cmd_extract(input, out, settings)?;
            record.write(&out.join(RUN_CONFIG_FILE))
        }
        Command::Mask { shape, image, bands, perlin, seed, overrides, out } => {
            ensure_parent(out)?;
            cmd_mask(shape.as_deref(), image.as_deref(), bands.as_deref(), *perlin, *seed, overrides, out, settings)?;
            record.write(&sidecar_config(out))
        }
        Command::Perlin { length, seed, overrides, out, strip } => {
            ensure_parent(out)?;
            let cfg = overrides.config(&settings.perlin, *length, *seed);
            let generated = generate_perlin_pattern(&cfg)?;
            write_json(
                out,
                &serde_json::json!({
                    "config": cfg,
                    "seed_used": generated.seed_used,
                    "degenerate": generated.degenerate,
                    "pattern": generated.pattern.to_record(),
                }),
            )?;
            if let Some(strip) = strip {
                ensure_parent(strip)?;
                save_gray(strip, &generated.pattern.to_strip(1))?;
            }
            record.write(&sidecar_config(out))
        }
        Command::Dataset { src, out, seed } => {
            ensure_dir(out)?;
            let manifest = build_dataset(src, out, *seed, &settings.dataset())?;
            let failed = manifest.entries.iter().filter(|e| e.error.is_some()).count();
            log::info!("dataset: {} entries, {failed} failed", manifest.entries.len());
            record.write(&out.join(RUN_CONFIG_FILE))
        }
        Command::Pairs { src, out } => {
            ensure_dir(out)?;
            cmd_pairs(src, out, settings)?;
            record.write(&out.join(RUN_CONFIG_FILE))
        }
        Command::Evaluate { inputs, fakes, out, condition, dice_mode } => {
            ensure_dir(out)?;
            let mode = dice_mode.unwrap_or(settings.dice_mode);
            let ev = cmd_evaluate(inputs, fakes, *condition, mode, settings)?;
            write_evaluation(out, &ev)?;
            record.write(&out.join(RUN_CONFIG_FILE))
        }
        Command::Baseline { real, perlin, out, dice_mode } => {
            ensure_dir(out)?;
            let mode = dice_mode.unwrap_or(settings.dice_mode);
            let ev = cmd_baseline(real, perlin, mode)?;
            write_evaluation(out, &ev)?;
            record.write(&out.join(RUN_CONFIG_FILE))
        }
        Command::Split { input, out } => {
            ensure_dir(out)?;
            let img = load_chromosome(input)?;
            let crops = split_karyotype(&img, settings.split_min_area, settings.split_margin);
            let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            for (i, crop) in crops.iter().enumerate() {
                save_gray(&out.join(format!("{stem}_{i:03}.png")), crop)?;
            }
            record.write(&out.join(RUN_CONFIG_FILE))
        }
        Command::Synth { out, count, seed, karyotypes } => {
            ensure_dir(out)?;
            match karyotypes {
                Some(k) => {
                    write_corpus(out, *k, *count, *seed, &settings.synth)?;
                }
                None => cmd_synth(out, *count, *seed, &settings.synth)?,
            }
            record.write(&out.join(RUN_CONFIG_FILE))
        }
        Command::Replay { run_config } => {
            let rc = RunConfig::read(run_config)?;
            if matches!(rc.command, Command::Replay { .. }) {
                return Err(Error::InvalidConfig("a run config cannot replay another replay".into()));
            }
            execute(&rc.command, &rc.settings)
        }
    }
}

fn cmd_extract(input: &Path, out: &Path, settings: &Settings) -> Result<()> {
    let image = load_chromosome(input)?;
    let ex = extract_banding_pattern(&image, &settings.extract)?;
    let frame = ex.frame();
    write_json(&out.join("bp.json"), &ex.pattern.to_record())?;
    save_gray(&out.join("bp.png"), &ex.pattern.to_strip(16))?;
    save_shape_mask(&out.join("shape.png"), &ex.mask)?;
    write_json(&out.join("frame.json"), frame)?;
    let csv_file = |name: &str| {
        let p = out.join(name);
        fs::File::create(&p).map_err(|e| Error::io(&p, e))
    };
    ex.profile.write_csv(csv_file("profile.csv")?)?;
    ex.filtered.write_csv(csv_file("filtered.csv")?)?;
    let mask = render_banded_mask(&ex.pattern, &ex.mask, frame)?;
    save_banded_mask(&out.join("mask.png"), &mask)?;
    // debug overlay: skeleton dark, sampled axis points white
    let mut overlay = image.clone();
    for (r, c) in ex.geometry.axis.skeleton.pixels() {
        overlay.set(r, c, 0);
    }
    for &(r, c) in &frame.points {
        let (r, c) = (r.round(), c.round());
        if r >= 0.0 && c >= 0.0 && (r as usize) < overlay.height() && (c as usize) < overlay.width() {
            overlay.set(r as usize, c as usize, 255);
        }
    }
    save_gray(&out.join("overlay.png"), &overlay)?;
    log::info!("extracted {} samples, {} bands", ex.pattern.len(), ex.pattern.runs().len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mask(
    shape: Option<&Path>,
    image: Option<&Path>,
    bands: Option<&Path>,
    perlin: bool,
    seed: u64,
    overrides: &PerlinOverrides,
    out: &Path,
    settings: &Settings,
) -> Result<()> {
    let mask = match (shape, image) {
        (Some(s), _) => load_shape_mask(s)?,
        (None, Some(i)) => binarize(&load_chromosome(i)?)?,
        (None, None) => return Err(Error::InvalidConfig("one of --shape or --image is required".into())),
    };
    let frame = shape_geometry(&mask, &settings.extract)?.frame;
    let pattern = match (bands, perlin) {
        (Some(b), _) => {
            let text = fs::read_to_string(b).map_err(|e| Error::io(b, e))?;
            BandingPattern::try_from(serde_json::from_str::<PatternRecord>(&text)?)?
        }
        (None, true) => {
            let cfg = overrides.config(&settings.perlin, frame.len(), seed);
            generate_perlin_pattern(&cfg)?.pattern
        }
        (None, false) => return Err(Error::InvalidConfig("one of --bands or --perlin is required".into())),
    };
    let banded = render_banded_mask(&pattern, &mask, &frame)?;
    save_banded_mask(out, &banded)?;
    write_json(&out.with_extension("json"), &pattern.to_record())
}

fn cmd_pairs(src: &Path, out: &Path, settings: &Settings) -> Result<()> {
    use rayon::prelude::*;
    let entries = discover(src)?;
    let failures: Vec<String> = entries
        .par_iter()
        .map(|e| -> Result<Option<String>> {
            let image = load_chromosome(&src.join(&e.source))?;
            match build_pair(&image, &settings.extract) {
                Ok(pair) => {
                    save_gray(&out.join(format!("{}.png", e.id)), &side_by_side(&pair.mask.to_image(), &image)?)?;
                    PairMeta {
                        id: e.id.clone(),
                        class: e.class,
                        pattern: pair.extraction.pattern.to_record(),
                        real_pattern: None,
                        perlin: None,
                        perlin_seed_used: None,
                    }
                    .write(&out.join(format!("{}.json", e.id)))?;
                    Ok(None)
                }
                Err(err) => Ok(Some(format!("{}: {err}", e.id))),
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for f in &failures {
        log::warn!("pair skipped: {f}");
    }
    Ok(())
}

/// Pair directory → evaluation samples, reading `{id}.png` from `fakes`.
/// A missing or unreadable fake becomes a failure record; a square fake of
/// another size is resized to the mask size first.
fn cmd_evaluate(
    inputs: &Path,
    fakes: &Path,
    condition: Condition,
    mode: DiceMode,
    settings: &Settings,
) -> Result<Evaluation> {
    let pairs = load_pairs(inputs)?;
    if pairs.is_empty() {
        return Err(Error::EmptyInput(format!("no pairs in {}", inputs.display())));
    }
    let mut samples = Vec::new();
    let mut missing = Vec::new();
    for p in pairs {
        let input = MaskSample {
            id: p.meta.id.clone(),
            class: p.meta.class,
            pattern: p.pattern()?,
            mask: p.mask,
        };
        let fake_path = fakes.join(format!("{}.png", input.id));
        let fake = load_chromosome(&fake_path).and_then(|f| {
            let (w, h) = input.mask.dims();
            if f.dims() != (w, h) && f.width() == f.height() && w == h {
                resize(&f, w)
            } else {
                Ok(f)
            }
        });
        match fake {
            Ok(fake) => samples.push(EvalSample { input, fake }),
            Err(e) => missing.push(crate::metrics::EvalFailure {
                id: input.id,
                class: input.class,
                error: e.to_string(),
            }),
        }
    }
    let mut ev = if samples.is_empty() {
        Evaluation {
            records: Vec::new(),
            failures: Vec::new(),
            summary: crate::metrics::Summary::from_records(condition, mode, &[], 0),
        }
    } else {
        evaluate_set(&samples, condition, &settings.extract, mode)?
    };
    if !missing.is_empty() {
        ev.failures.extend(missing);
        ev.failures.sort_by(|a, b| a.id.cmp(&b.id));
        ev.summary.failures = ev.failures.len();
    }
    Ok(ev)
}

fn cmd_baseline(real: &Path, perlin: &Path, mode: DiceMode) -> Result<Evaluation> {
    let to_samples = |dir: &Path| -> Result<Vec<MaskSample>> {
        load_pairs(dir)?
            .into_iter()
            .map(|p| {
                Ok(MaskSample {
                    id: p.meta.id.clone(),
                    class: p.meta.class,
                    pattern: p.pattern()?,
                    mask: p.mask,
                })
            })
            .collect()
    };
    baseline_compare(&to_samples(real)?, &to_samples(perlin)?, mode)
}

fn write_evaluation(out: &Path, ev: &Evaluation) -> Result<()> {
    ev.write_records_csv(&out.join("records.csv"))?;
    ev.write_class_csv(&out.join("per_class.csv"))?;
    ev.write_summary_json(&out.join("summary.json"))?;
    write_json(&out.join("failures.json"), &ev.failures)?;
    let s = &ev.summary;
    match (s.dice, s.maenb) {
        (Some(d), Some(m)) => println!(
            "{} samples, {} failed: dice {:.4} ± {:.4}, maenb {:.4} ± {:.4}",
            s.count, s.failures, d.mean, d.std, m.mean, m.std
        ),
        _ => println!("0 samples scored, {} failed", s.failures),
    }
    Ok(())
}

fn cmd_synth(out: &Path, count: usize, seed: u64, params: &SynthParams) -> Result<()> {
    for i in 0..count {
        let s = synth_chromosome(seed.wrapping_add(i as u64), params)?;
        save_gray(&out.join(format!("synth_{i:04}.png")), &s.image)?;
        save_banded_mask(&out.join(format!("synth_{i:04}_mask.png")), &s.mask)?;
        write_json(&out.join(format!("synth_{i:04}.json")), &s.pattern.to_record())?;
    }
    Ok(())
}

/// Machine-readable error line for stderr.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}
