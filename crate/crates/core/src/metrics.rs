//! Dice over banded masks, MAENB over banding patterns, and set-level
//! evaluation with overall and per-class summaries.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backproject::render_banded_mask;
use crate::banding::{extract_banding_pattern, BandingPattern, ExtractParams};
use crate::error::{Error, Result};
use crate::imagecore::{BandedMask, GrayImage, BLACK, WHITE};

/// How the two band classes are combined into one dice score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DiceMode {
    /// Mean of the per-class dice of black and white bands.
    #[default]
    Macro,
    /// One dice over all foreground pixels, counting a pixel as overlap
    /// when both masks give it the same band code.
    Pooled,
}

fn class_dice(a: &BandedMask, b: &BandedMask, code: u8) -> Option<f64> {
    let (mut na, mut nb, mut both) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        na += usize::from(x == code);
        nb += usize::from(y == code);
        both += usize::from(x == code && y == code);
    }
    (na + nb > 0).then(|| 2.0 * both as f64 / (na + nb) as f64)
}

/// Macro dice over the black and white classes, background omitted.
pub fn dice(a: &BandedMask, b: &BandedMask) -> Result<f64> {
    dice_with(a, b, DiceMode::Macro)
}

pub fn dice_with(a: &BandedMask, b: &BandedMask, mode: DiceMode) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            found: b.dims(),
        });
    }
    let is_fg = |v: u8| v == BLACK || v == WHITE;
    let fg_a = a.data().iter().filter(|&&v| is_fg(v)).count();
    let fg_b = b.data().iter().filter(|&&v| is_fg(v)).count();
    if fg_a + fg_b == 0 {
        return Err(Error::EmptyForeground);
    }
    match mode {
        DiceMode::Macro => {
            let scores: Vec<f64> = [BLACK, WHITE]
                .into_iter()
                .filter_map(|code| class_dice(a, b, code))
                .collect();
            Ok(scores.iter().sum::<f64>() / scores.len() as f64)
        }
        DiceMode::Pooled => {
            let agree = a
                .data()
                .iter()
                .zip(b.data())
                .filter(|&(&x, &y)| is_fg(x) && x == y)
                .count();
            Ok(2.0 * agree as f64 / (fg_a + fg_b) as f64)
        }
    }
}

/// Mean absolute error of the number of black and white bands, normalized
/// by the band count of `input`. Not symmetric in its arguments.
pub fn maenb(input: &BandingPattern, fake: &BandingPattern) -> f64 {
    let (bi, wi) = (input.black_bands(), input.white_bands());
    let (bf, wf) = (fake.black_bands(), fake.white_bands());
    let alpha = 1.0 / (bi + wi) as f64;
    alpha * (bi.abs_diff(bf) + wi.abs_diff(wf)) as f64
}

/// Chromosome class 1-22, with X and Y both mapped to 23.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ChromosomeClass(u8);

impl ChromosomeClass {
    pub const SEX: ChromosomeClass = ChromosomeClass(23);

    pub fn new(class: u8) -> Result<Self> {
        if (1..=23).contains(&class) {
            Ok(Self(class))
        } else {
            Err(Error::InvalidConfig(format!("chromosome class {class} outside 1..=23")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for ChromosomeClass {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ChromosomeClass> for u8 {
    fn from(c: ChromosomeClass) -> u8 {
        c.0
    }
}

impl FromStr for ChromosomeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_uppercase().as_str() {
            "X" | "Y" | "XY" => Ok(Self::SEX),
            _ => s
                .parse::<u8>()
                .map_err(|_| Error::InvalidConfig(format!("bad chromosome class {s:?}")))
                .and_then(Self::new),
        }
    }
}

impl fmt::Display for ChromosomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Real,
    Perlin,
    Baseline,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Real => "real",
            Condition::Perlin => "perlin",
            Condition::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub class: ChromosomeClass,
    pub condition: Condition,
    pub dice: f64,
    pub maenb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFailure {
    pub id: String,
    pub class: ChromosomeClass,
    pub error: String,
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
}

impl Stats {
    /// Two-pass computation; `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: ChromosomeClass,
    pub count: usize,
    pub dice: Stats,
    pub maenb: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub condition: Condition,
    pub dice_mode: DiceMode,
    pub count: usize,
    pub failures: usize,
    /// `None` when every sample failed.
    pub dice: Option<Stats>,
    pub maenb: Option<Stats>,
    pub per_class: Vec<ClassSummary>,
}

impl Summary {
    pub fn from_records(
        condition: Condition,
        dice_mode: DiceMode,
        records: &[EvalRecord],
        failures: usize,
    ) -> Self {
        let dice: Vec<f64> = records.iter().map(|r| r.dice).collect();
        let maenb: Vec<f64> = records.iter().map(|r| r.maenb).collect();
        let mut by_class: BTreeMap<ChromosomeClass, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for r in records {
            let e = by_class.entry(r.class).or_default();
            e.0.push(r.dice);
            e.1.push(r.maenb);
        }
        let per_class = by_class
            .into_iter()
            .map(|(class, (d, m))| ClassSummary {
                class,
                count: d.len(),
                dice: Stats::of(&d).unwrap_or_default(),
                maenb: Stats::of(&m).unwrap_or_default(),
            })
            .collect();
        Self {
            condition,
            dice_mode,
            count: records.len(),
            failures,
            dice: Stats::of(&dice),
            maenb: Stats::of(&maenb),
            per_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub records: Vec<EvalRecord>,
    pub failures: Vec<EvalFailure>,
    pub summary: Summary,
}

impl Evaluation {
    fn assemble(
        condition: Condition,
        mode: DiceMode,
        outcomes: Vec<std::result::Result<EvalRecord, EvalFailure>>,
    ) -> Self {
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for o in outcomes {
            match o {
                Ok(r) => records.push(r),
                Err(f) => {
                    log::warn!("sample {} failed: {}", f.id, f.error);
                    failures.push(f);
                }
            }
        }
        let summary = Summary::from_records(condition, mode, &records, failures.len());
        Self {
            records,
            failures,
            summary,
        }
    }

    /// Per-sample CSV with header `id,class,condition,dice,maenb`.
    pub fn write_records_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Per-class CSV with header
    /// `class,count,dice_mean,dice_std,maenb_mean,maenb_std`.
    pub fn write_class_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["class", "count", "dice_mean", "dice_std", "maenb_mean", "maenb_std"])?;
        for c in &self.summary.per_class {
            w.write_record([
                c.class.to_string(),
                c.count.to_string(),
                c.dice.mean.to_string(),
                c.dice.std.to_string(),
                c.maenb.mean.to_string(),
                c.maenb.std.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_summary_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(&mut f, &self.summary)?;
        writeln!(f).map_err(|e| Error::io(path, e))
    }
}

/// A conditioning mask with its pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSample {
    pub id: String,
    pub class: ChromosomeClass,
    pub mask: BandedMask,
    pub pattern: BandingPattern,
}

/// A conditioning mask and the image generated from it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSample {
    pub input: MaskSample,
    pub fake: GrayImage,
}

fn score_fake(sample: &EvalSample, params: &ExtractParams, mode: DiceMode) -> Result<(f64, f64)> {
    let ex = extract_banding_pattern(&sample.fake, params)?;
    let rendered = render_banded_mask(&ex.pattern, &ex.mask, ex.frame())?;
    let d = dice_with(&sample.input.mask, &rendered, mode)?;
    Ok((d, maenb(&sample.input.pattern, &ex.pattern)))
}

/// Score generated images against their conditioning masks: each fake is
/// run through extraction and back-projection on its own shape, then
/// compared by dice (masks) and MAENB (patterns). Samples whose
/// extraction fails are reported and left out of the summary.
pub fn evaluate_set(
    samples: &[EvalSample],
    condition: Condition,
    params: &ExtractParams,
    mode: DiceMode,
) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to evaluate".into()));
    }
    let outcomes = samples
        .par_iter()
        .map(|s| match score_fake(s, params, mode) {
            Ok((dice, maenb)) => Ok(EvalRecord {
                id: s.input.id.clone(),
                class: s.input.class,
                condition,
                dice,
                maenb,
            }),
            Err(e) => Err(EvalFailure {
                id: s.input.id.clone(),
                class: s.input.class,
                error: e.to_string(),
            }),
        })
        .collect();
    Ok(Evaluation::assemble(condition, mode, outcomes))
}

/// Compare Perlin masks with the real masks on the same shapes. The
/// Perlin pattern takes the input role in MAENB.
pub fn baseline_compare(
    real: &[MaskSample],
    perlin: &[MaskSample],
    mode: DiceMode,
) -> Result<Evaluation> {
    if real.len() != perlin.len() {
        return Err(Error::Misaligned(format!(
            "{} real masks vs {} perlin masks",
            real.len(),
            perlin.len()
        )));
    }
    if real.is_empty() {
        return Err(Error::EmptyInput("no masks to compare".into()));
    }
    for (r, p) in real.iter().zip(perlin) {
        if r.id != p.id || r.mask.foreground() != p.mask.foreground() {
            return Err(Error::Misaligned(format!(
                "real {:?} and perlin {:?} differ in id or shape",
                r.id, p.id
            )));
        }
    }
    let outcomes = real
        .par_iter()
        .zip(perlin)
        .map(|(r, p)| {
            dice_with(&p.mask, &r.mask, mode)
                .map(|dice| EvalRecord {
                    id: r.id.clone(),
                    class: r.class,
                    condition: Condition::Baseline,
                    dice,
                    maenb: maenb(&p.pattern, &r.pattern),
                })
                .map_err(|e| EvalFailure {
                    id: r.id.clone(),
                    class: r.class,
                    error: e.to_string(),
                })
        })
        .collect();
    Ok(Evaluation::assemble(Condition::Baseline, mode, outcomes))
}

/// One row of a training run's validation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValMetricsRow {
    pub epoch: u32,
    pub dice_mean: f64,
    pub dice_std: f64,
    pub maenb_mean: f64,
    pub maenb_std: f64,
}

impl ValMetricsRow {
    pub fn from_summary(epoch: u32, summary: &Summary) -> Self {
        let d = summary.dice.unwrap_or_default();
        let m = summary.maenb.unwrap_or_default();
        Self {
            epoch,
            dice_mean: d.mean,
            dice_std: d.std,
            maenb_mean: m.mean,
            maenb_std: m.std,
        }
    }
}

pub const VAL_METRICS_HEADER: [&str; 5] = ["epoch", "dice_mean", "dice_std", "maenb_mean", "maenb_std"];

pub fn write_val_metrics(path: &Path, rows: &[ValMetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(VAL_METRICS_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a validation log, rejecting any header other than
/// [`VAL_METRICS_HEADER`].
pub fn read_val_metrics(path: &Path) -> Result<Vec<ValMetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != VAL_METRICS_HEADER {
        return Err(Error::InvalidConfig(format!(
            "unexpected validation log header {header:?}"
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
