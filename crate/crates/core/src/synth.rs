//! Procedural chromosome images with known banding, for fixtures and
//! round-trip checks.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::banding::{BandingPattern, Run};
use crate::error::{Error, Result};
use crate::imagecore::{save_gray, BandedMask, GrayImage, BACKGROUND, BLACK, WHITE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub size: usize,
    pub min_length: f64,
    pub max_length: f64,
    pub min_half_width: f64,
    pub max_half_width: f64,
    /// Band lengths along the axis, in pixels.
    pub min_band: f64,
    pub max_band: f64,
    pub dark: u8,
    pub light: u8,
    /// Uniform intensity jitter amplitude on foreground pixels.
    pub noise: u8,
    /// Probability that a shape is an arc instead of a straight bar.
    pub curved_fraction: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            size: 128,
            min_length: 50.0,
            max_length: 100.0,
            min_half_width: 5.0,
            max_half_width: 8.0,
            min_band: 4.0,
            max_band: 12.0,
            dark: 40,
            light: 140,
            noise: 5,
            curved_fraction: 0.5,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        let ok = self.min_length > 0.0
            && self.min_length <= self.max_length
            && self.min_half_width >= 1.0
            && self.min_half_width <= self.max_half_width
            && self.min_band >= 1.0
            && self.min_band <= self.max_band
            && self.max_length / 2.0 + self.max_half_width + 1.0 < self.size as f64 / 2.0
            && (0.0..=1.0).contains(&self.curved_fraction)
            && self.light as u16 + self.noise as u16 <= 254
            && self.dark >= self.noise;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("inconsistent synth parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Centerline {
    Straight { center: (f64, f64), angle: f64, length: f64 },
    /// Arc of `radius` around `center`, spanning `span` radians centered
    /// on direction `mid`.
    Arc { center: (f64, f64), radius: f64, mid: f64, span: f64 },
}

impl Centerline {
    pub fn length(&self) -> f64 {
        match *self {
            Centerline::Straight { length, .. } => length,
            Centerline::Arc { radius, span, .. } => radius * span,
        }
    }

    /// Arc-length coordinate and distance from the centerline of `(row, col)`,
    /// or `None` past the ends.
    fn locate(&self, row: f64, col: f64) -> Option<(f64, f64)> {
        match *self {
            Centerline::Straight { center, angle, length } => {
                let (dr, dc) = (row - center.0, col - center.1);
                let (ur, uc) = (angle.sin(), angle.cos());
                let along = dr * ur + dc * uc;
                let across = -dr * uc + dc * ur;
                let s = along + length / 2.0;
                (0.0..=length).contains(&s).then_some((s, across.abs()))
            }
            Centerline::Arc { center, radius, mid, span } => {
                let (dr, dc) = (row - center.0, col - center.1);
                let mut delta = dr.atan2(dc) - mid;
                while delta > PI {
                    delta -= 2.0 * PI;
                }
                while delta <= -PI {
                    delta += 2.0 * PI;
                }
                (delta.abs() <= span / 2.0)
                    .then(|| (radius * (delta + span / 2.0), (dr.hypot(dc) - radius).abs()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthChromosome {
    pub image: GrayImage,
    /// Ground-truth banded mask of the rendered shape.
    pub mask: BandedMask,
    /// One run per rendered band, run lengths in whole pixels of arc length.
    pub pattern: BandingPattern,
    pub centerline: Centerline,
}

/// Alternating bands covering `length`; a short remainder joins the last band.
fn draw_bands(rng: &mut impl Rng, length: f64, p: &SynthParams) -> Vec<(u8, f64)> {
    let mut bands: Vec<(u8, f64)> = Vec::new();
    let mut bit = u8::from(rng.random_bool(0.5));
    let mut total = 0.0;
    while total < length {
        let len = rng.random_range(p.min_band..=p.max_band).min(length - total);
        if len < p.min_band && !bands.is_empty() {
            bands.last_mut().expect("non-empty").1 += len;
        } else {
            bands.push((bit, len));
            bit ^= 1;
        }
        total += len;
    }
    bands
}

fn random_centerline(rng: &mut impl Rng, p: &SynthParams) -> Centerline {
    let c = p.size as f64 / 2.0 - 0.5;
    let length = rng.random_range(p.min_length..=p.max_length);
    if rng.random_bool(p.curved_fraction) {
        let span = rng.random_range(0.5..=1.5);
        let radius = length / span;
        let mid = rng.random_range(-PI..PI);
        // arc midpoint at the canvas center
        let center = (c - radius * mid.sin(), c - radius * mid.cos());
        Centerline::Arc { center, radius, mid, span }
    } else {
        Centerline::Straight {
            center: (c, c),
            angle: rng.random_range(0.0..PI),
            length,
        }
    }
}

/// Render one chromosome from `seed`.
pub fn synth_chromosome(seed: u64, params: &SynthParams) -> Result<SynthChromosome> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centerline = random_centerline(&mut rng, params);
    let half_width = rng.random_range(params.min_half_width..=params.max_half_width);
    let bands = draw_bands(&mut rng, centerline.length(), params);
    let mut ends = Vec::with_capacity(bands.len());
    let mut acc = 0.0;
    for &(_, len) in &bands {
        acc += len;
        ends.push(acc);
    }
    let band_at = |s: f64| ends.iter().position(|&e| s <= e).unwrap_or(ends.len() - 1);

    let n = params.size;
    let mut codes = vec![BACKGROUND; n * n];
    let mut image = GrayImage::filled(n, n, BACKGROUND);
    for r in 0..n {
        for c in 0..n {
            if let Some((s, d)) = centerline.locate(r as f64, c as f64) {
                if d <= half_width {
                    let bit = bands[band_at(s)].0;
                    let jitter = rng.random_range(-i16::from(params.noise)..=i16::from(params.noise));
                    let level = if bit == 1 { params.dark } else { params.light };
                    codes[r * n + c] = if bit == 1 { BLACK } else { WHITE };
                    image.set(r, c, (i16::from(level) + jitter) as u8);
                }
            }
        }
    }
    let runs: Vec<Run> = bands
        .iter()
        .map(|&(bit, len)| Run {
            bit,
            len: (len.round() as usize).max(1),
        })
        .collect();
    Ok(SynthChromosome {
        image,
        mask: BandedMask::new(n, n, codes)?,
        pattern: BandingPattern::from_runs(&runs)?,
        centerline,
    })
}

/// Write a karyotype-style corpus `dir/<karyotype>/<class>/<id>.png` with
/// tight crops (plus `margin`) of synthetic chromosomes. Classes cycle
/// through 1..=23; returns the number of files written.
pub fn write_corpus(
    dir: &Path,
    karyotypes: usize,
    per_karyotype: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<usize> {
    let margin = 4;
    let mut written = 0;
    for k in 0..karyotypes {
        for i in 0..per_karyotype {
            let item_seed = seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add((k * per_karyotype + i) as u64);
            let chrom = synth_chromosome(item_seed, params)?;
            let fg = chrom.mask.foreground();
            let (r0, c0, r1, c1) = fg.bounding_box().ok_or(Error::EmptyMask)?;
            let (r0, c0) = (r0.saturating_sub(margin), c0.saturating_sub(margin));
            let r1 = (r1 + margin).min(params.size - 1);
            let c1 = (c1 + margin).min(params.size - 1);
            let crop = chrom.image.crop(r0, c0, c1 - c0 + 1, r1 - r0 + 1);
            let class = i % 23 + 1;
            let sub = dir.join(format!("k{k:03}")).join(class.to_string());
            std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
            save_gray(&sub.join(format!("k{k:03}_{i:02}.png")), &crop)?;
            written += 1;
        }
    }
    Ok(written)
}
