//! Density profile → binary banding pattern.
//!
//! The profile is first flattened into uniform-density bands
//! ([`uniformize`]): extrema with sufficient prominence are located on a
//! lightly smoothed copy, band boundaries sit at the half-amplitude
//! crossing between neighboring extrema, and every band takes the mean of
//! the raw profile over its extent. [`binarize_pattern`] then labels each
//! band dark (1) or light (0), splitting saddle plateaus between their
//! neighbors.

use serde::{Deserialize, Serialize};

use crate::density_profile::{build_frame, sample_profile, DensityProfile, SamplingFrame};
use crate::error::{Error, Result};
use crate::imagecore::{binarize, GrayImage, ShapeMask};
use crate::medial_axis::{trace_axis, AxisParams, AxisTrace};

/// Binary banding pattern: 1 = black band, 0 = white band.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PatternRecord", into = "PatternRecord")]
pub struct BandingPattern {
    bits: Vec<u8>,
}

/// Maximal run of equal bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub bit: u8,
    pub len: usize,
}

/// On-disk form: `{"length": K, "runs": [{"bit": 1, "len": 4}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub length: usize,
    pub runs: Vec<Run>,
}

impl BandingPattern {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidPattern("pattern is empty".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidPattern(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Result<Self> {
        Self::new(bits.into_iter().map(u8::from).collect())
    }

    /// Parse a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidPattern(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .and_then(Self::new)
    }

    pub fn from_runs(runs: &[Run]) -> Result<Self> {
        let mut bits = Vec::new();
        for run in runs {
            if run.bit > 1 {
                return Err(Error::InvalidPattern(format!("bit value {} is not 0 or 1", run.bit)));
            }
            bits.extend(std::iter::repeat_n(run.bit, run.len));
        }
        Self::new(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn runs(&self) -> Vec<Run> {
        let mut runs: Vec<Run> = Vec::new();
        for &b in &self.bits {
            match runs.last_mut() {
                Some(run) if run.bit == b => run.len += 1,
                _ => runs.push(Run { bit: b, len: 1 }),
            }
        }
        runs
    }

    /// Number of black bands `|bp|_b`.
    pub fn black_bands(&self) -> usize {
        self.runs().iter().filter(|r| r.bit == 1).count()
    }

    /// Number of white bands `|bp|_w`.
    pub fn white_bands(&self) -> usize {
        self.runs().iter().filter(|r| r.bit == 0).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            bits: self.bits.iter().rev().copied().collect(),
        }
    }

    pub fn to_record(&self) -> PatternRecord {
        PatternRecord {
            length: self.len(),
            runs: self.runs(),
        }
    }

    /// `height x K` strip: black bands 0, white bands 255.
    pub fn to_strip(&self, height: usize) -> GrayImage {
        GrayImage::from_fn(self.len(), height.max(1), |_, c| {
            if self.bits[c] == 1 {
                0
            } else {
                255
            }
        })
    }
}

impl std::fmt::Display for BandingPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl TryFrom<PatternRecord> for BandingPattern {
    type Error = Error;

    fn try_from(rec: PatternRecord) -> Result<Self> {
        let bp = Self::from_runs(&rec.runs)?;
        if bp.len() != rec.length {
            return Err(Error::InvalidPattern(format!(
                "runs add up to {} but length is {}",
                bp.len(),
                rec.length
            )));
        }
        Ok(bp)
    }
}

impl From<BandingPattern> for PatternRecord {
    fn from(bp: BandingPattern) -> Self {
        bp.to_record()
    }
}

/// Tuning of the uniform-band filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Minimum peak-to-valley amplitude, in intensity levels.
    pub prominence: f64,
    /// Odd moving-average window applied before extrema detection.
    pub smoothing_window: usize,
    /// Bands shorter than this are merged into a neighbor. Never below the
    /// smoothing window.
    pub min_band: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            prominence: 10.0,
            smoothing_window: 3,
            min_band: 3,
        }
    }
}

/// Centered moving average, truncated at the ends.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Extremum {
    pos: usize,
    value: f64,
}

/// Alternating extrema whose successive differences are at least `delta`.
fn alternating_extrema(values: &[f64], delta: f64) -> Vec<Extremum> {
    #[derive(PartialEq)]
    enum Seek {
        Either,
        Max,
        Min,
    }
    let mut out = Vec::new();
    if values.is_empty() {
        return out;
    }
    let (mut mx, mut mx_pos, mut mn, mut mn_pos) = (values[0], 0, values[0], 0);
    let mut seek = Seek::Either;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > mx {
            mx = v;
            mx_pos = i;
        }
        if v < mn {
            mn = v;
            mn_pos = i;
        }
        let rose = v - mn >= delta;
        let fell = mx - v >= delta;
        if rose && seek != Seek::Max {
            out.push(Extremum { pos: mn_pos, value: mn });
            seek = Seek::Max;
            mx = v;
            mx_pos = i;
        } else if fell && seek != Seek::Min {
            out.push(Extremum { pos: mx_pos, value: mx });
            seek = Seek::Min;
            mn = v;
            mn_pos = i;
        }
    }
    match seek {
        Seek::Max => out.push(Extremum { pos: mx_pos, value: mx }),
        Seek::Min => out.push(Extremum { pos: mn_pos, value: mn }),
        Seek::Either => {}
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: usize,
    len: usize,
    mean: f64,
}

fn segment_mean(values: &[f64]) -> f64 {
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        first
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn merge(segments: &mut Vec<Segment>, i: usize, j: usize, values: &[f64]) {
    let (a, b) = (i.min(j), i.max(j));
    debug_assert_eq!(b, a + 1);
    let start = segments[a].start;
    let len = segments[a].len + segments[b].len;
    segments[a] = Segment {
        start,
        len,
        mean: segment_mean(&values[start..start + len]),
    };
    segments.remove(b);
}

/// Index of the neighbor of `i` with the closer mean (left on ties).
fn closer_neighbor(segments: &[Segment], i: usize) -> usize {
    if i == 0 {
        return 1;
    }
    if i + 1 == segments.len() {
        return i - 1;
    }
    let dl = (segments[i].mean - segments[i - 1].mean).abs();
    let dr = (segments[i].mean - segments[i + 1].mean).abs();
    if dr < dl {
        i + 1
    } else {
        i - 1
    }
}

/// Merge until every band is at least `min_band` long, neighboring bands
/// differ by at least `delta`, and levels alternate up/down.
fn repair(segments: &mut Vec<Segment>, values: &[f64], delta: f64, min_band: usize) {
    while segments.len() > 1 {
        let short = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len < min_band)
            .min_by_key(|(_, s)| s.len)
            .map(|(i, _)| i);
        if let Some(i) = short {
            let j = closer_neighbor(segments, i);
            merge(segments, i, j, values);
            continue;
        }
        let flat = (0..segments.len() - 1)
            .map(|i| (i, (segments[i].mean - segments[i + 1].mean).abs()))
            .filter(|&(_, d)| d < delta)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i);
        if let Some(i) = flat {
            merge(segments, i, i + 1, values);
            continue;
        }
        let monotone = (1..segments.len().saturating_sub(1)).find(|&i| {
            let (a, b, c) = (segments[i - 1].mean, segments[i].mean, segments[i + 1].mean);
            (a < b && b < c) || (a > b && b > c)
        });
        if let Some(i) = monotone {
            let j = closer_neighbor(segments, i);
            merge(segments, i, j, values);
            continue;
        }
        break;
    }
}

/// Non-linear filter turning each band of the profile into a uniform level.
pub fn uniformize_with(profile: &DensityProfile, params: &FilterParams) -> DensityProfile {
    let values = &profile.values;
    if values.is_empty() {
        return profile.clone();
    }
    let window = params.smoothing_window.max(1) | 1;
    let smoothed = smooth(values, window);
    let extrema = alternating_extrema(&smoothed, params.prominence);

    let mut cuts = vec![0];
    for pair in extrema.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = (a.value + b.value) / 2.0;
        let rising = b.value > a.value;
        let cut = (a.pos + 1..=b.pos)
            .find(|&j| {
                if rising {
                    smoothed[j] > half
                } else {
                    smoothed[j] < half
                }
            })
            .unwrap_or(b.pos);
        cuts.push(cut);
    }
    cuts.push(values.len());
    let mut segments: Vec<Segment> = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Segment {
            start: w[0],
            len: w[1] - w[0],
            mean: segment_mean(&values[w[0]..w[1]]),
        })
        .collect();
    repair(
        &mut segments,
        values,
        params.prominence,
        params.min_band.max(window),
    );

    let mut out = Vec::with_capacity(values.len());
    for s in &segments {
        out.extend(std::iter::repeat_n(s.mean, s.len));
    }
    DensityProfile::new(out)
}

/// [`uniformize_with`] using the default smoothing and minimum band length.
pub fn uniformize(profile: &DensityProfile, prominence: f64) -> DensityProfile {
    uniformize_with(
        profile,
        &FilterParams {
            prominence,
            ..FilterParams::default()
        },
    )
}

/// Classify the plateaus of a piecewise-constant profile.
///
/// A plateau darker than the mean of its neighbors' levels is black (1),
/// otherwise white (0); end plateaus compare against their only neighbor.
/// A saddle, whose neighbors lie on opposite sides of it, is split at its
/// midpoint (extra element to the left) and each half takes the class of
/// the adjacent side: the half next to the darker neighbor is black.
/// A profile with a single plateau is all black.
pub fn binarize_pattern(filtered: &DensityProfile) -> Result<BandingPattern> {
    let v = &filtered.values;
    if v.is_empty() {
        return Err(Error::InvalidPattern("empty profile".into()));
    }
    let mut plateaus: Vec<(usize, f64)> = Vec::new();
    for &x in v {
        match plateaus.last_mut() {
            Some((len, level)) if *level == x => *len += 1,
            _ => plateaus.push((1, x)),
        }
    }
    if plateaus.len() == 1 {
        return BandingPattern::new(vec![1; v.len()]);
    }
    let mut bits = Vec::with_capacity(v.len());
    let n = plateaus.len();
    for i in 0..n {
        let (len, level) = plateaus[i];
        let left = (i > 0).then(|| plateaus[i - 1].1);
        let right = (i + 1 < n).then(|| plateaus[i + 1].1);
        match (left, right) {
            (Some(l), Some(r)) if (l < level && level < r) || (l > level && level > r) => {
                let left_half = len - len / 2;
                let left_bit = u8::from(l < level);
                let right_bit = u8::from(r < level);
                bits.extend(std::iter::repeat_n(left_bit, left_half));
                bits.extend(std::iter::repeat_n(right_bit, len / 2));
            }
            _ => {
                let threshold = match (left, right) {
                    (Some(l), Some(r)) => (l + r) / 2.0,
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => unreachable!("single plateau handled above"),
                };
                bits.extend(std::iter::repeat_n(u8::from(level < threshold), len));
            }
        }
    }
    BandingPattern::new(bits)
}

/// Parameters of the whole extraction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ExtractParams {
    pub axis: AxisParams,
    pub sampling: SamplingParams,
    pub filter: FilterParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    /// Arc-length distance between perpendicular lines, in pixels.
    pub spacing: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self { spacing: 1.0 }
    }
}

/// Sampling geometry of a shape mask, independent of any image content.
#[derive(Debug, Clone)]
pub struct ShapeGeometry {
    pub axis: AxisTrace,
    pub frame: SamplingFrame,
}

pub fn shape_geometry(mask: &ShapeMask, params: &ExtractParams) -> Result<ShapeGeometry> {
    let axis = trace_axis(mask, &params.axis)?;
    let frame = build_frame(&axis.polyline, mask, params.sampling.spacing)?;
    Ok(ShapeGeometry { axis, frame })
}

/// Result of banding-pattern extraction, with every intermediate stage.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub pattern: BandingPattern,
    pub mask: ShapeMask,
    pub geometry: ShapeGeometry,
    pub profile: DensityProfile,
    pub filtered: DensityProfile,
}

impl Extraction {
    pub fn frame(&self) -> &SamplingFrame {
        &self.geometry.frame
    }
}

/// Pattern extraction on a known shape mask.
pub fn extract_with_mask(image: &GrayImage, mask: ShapeMask, params: &ExtractParams) -> Result<Extraction> {
    let geometry = shape_geometry(&mask, params)?;
    let profile = sample_profile(image, &geometry.frame)?;
    let filtered = uniformize_with(&profile, &params.filter);
    let pattern = binarize_pattern(&filtered)?;
    Ok(Extraction {
        pattern,
        mask,
        geometry,
        profile,
        filtered,
    })
}

/// Full extraction: binarize → skeletonize → longest_path → fit_polyline →
/// build_frame → sample_profile → uniformize → binarize_pattern.
pub fn extract_banding_pattern(image: &GrayImage, params: &ExtractParams) -> Result<Extraction> {
    let mask = binarize(image)?;
    extract_with_mask(image, mask, params)
}
