//! Raster primitives shared by every pipeline stage: grayscale images,
//! binary shape masks, banded segmentation masks, and the preprocessing
//! chain (grayscale conversion, square padding, bilinear resize, Otsu
//! binarization).
//!
//! All coordinates are `(row, col)`; buffers are row-major.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Code of a black (dark) band pixel in a [`BandedMask`].
pub const BLACK: u8 = 0;
/// Code of a white (light) band pixel in a [`BandedMask`].
pub const WHITE: u8 = 127;
/// Code of a background pixel in a [`BandedMask`].
pub const BACKGROUND: u8 = 255;

/// BT.709 luma weights (R, G, B).
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }

    /// Intensity inversion `255 - v`.
    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| 255 - v).collect(),
        }
    }

    /// Copy of the `width x height` window whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Self {
        Self::from_fn(width, height, |r, c| self.get(row + r, col + c))
    }
}

/// Multi-channel 8-bit raster as decoded from disk, before grayscale conversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::BufferSize {
                expected: width * height * channels,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }
}

impl From<GrayImage> for Raster {
    fn from(img: GrayImage) -> Self {
        Raster {
            width: img.width,
            height: img.height,
            channels: 1,
            data: img.data,
        }
    }
}

/// Binary foreground mask of a single chromosome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShapeMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl ShapeMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.width + col] = value;
    }

    /// Foreground test with signed coordinates; anything outside the raster is background.
    pub fn contains(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.get(row as usize, col as usize)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// Foreground pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i / self.width, i % self.width))
    }

    /// Inclusive bounding box `(row_min, col_min, row_max, col_max)` of the foreground.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        self.pixels().fold(None, |acc, (r, c)| {
            Some(match acc {
                None => (r, c, r, c),
                Some((r0, c0, r1, c1)) => (r0.min(r), c0.min(c), r1.max(r), c1.max(c)),
            })
        })
    }

    /// Render as an 8-bit image: foreground 255, background 0.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v { 255 } else { 0 }).collect(),
        }
    }

    /// Inverse of [`ShapeMask::to_image`]; any value >= 128 is foreground.
    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            data: img.data.iter().map(|&v| v >= 128).collect(),
        }
    }
}

/// Banded segmentation mask over the codes {0, 127, 255}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BandedMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BandedMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                found: data.len(),
            });
        }
        if let Some(&bad) = data
            .iter()
            .find(|&&v| v != BLACK && v != WHITE && v != BACKGROUND)
        {
            return Err(Error::InvalidCode(bad));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn background(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![BACKGROUND; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    /// Panics on a code outside {0, 127, 255}.
    pub fn set(&mut self, row: usize, col: usize, code: u8) {
        assert!(
            code == BLACK || code == WHITE || code == BACKGROUND,
            "invalid banded mask code {code}"
        );
        self.data[row * self.width + col] = code;
    }

    /// Pixels whose code is not background.
    pub fn foreground(&self) -> ShapeMask {
        ShapeMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v != BACKGROUND).collect(),
        }
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.clone(),
        }
    }

    pub fn from_image(img: &GrayImage) -> Result<Self> {
        Self::new(img.width, img.height, img.data.clone())
    }

    /// Paint a mask as a chromosome-like photo: band codes mapped to the given intensities.
    pub fn render_intensities(&self, black: u8, white: u8, background: u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| match v {
                    BLACK => black,
                    WHITE => white,
                    _ => background,
                })
                .collect(),
        }
    }
}

/// Luminance conversion with BT.709 weights, rounded half-up.
pub fn to_grayscale(raster: &Raster) -> Result<GrayImage> {
    match raster.channels {
        1 => GrayImage::new(raster.width, raster.height, raster.data.clone()),
        3 => {
            let data = raster
                .data
                .chunks_exact(3)
                .map(|px| {
                    let y = LUMA_WEIGHTS[0] * f64::from(px[0])
                        + LUMA_WEIGHTS[1] * f64::from(px[1])
                        + LUMA_WEIGHTS[2] * f64::from(px[2]);
                    (y + 0.5).floor().clamp(0.0, 255.0) as u8
                })
                .collect();
            GrayImage::new(raster.width, raster.height, data)
        }
        n => Err(Error::UnsupportedChannels(n)),
    }
}

/// Pad to `target x target`, centering the image; an odd surplus puts the
/// extra pixel on the bottom/right.
pub fn pad_square(image: &GrayImage, target: usize, fill: u8) -> Result<GrayImage> {
    if target < image.width || target < image.height {
        return Err(Error::PadTargetTooSmall {
            target,
            width: image.width,
            height: image.height,
        });
    }
    let left = (target - image.width) / 2;
    let top = (target - image.height) / 2;
    let mut out = GrayImage::filled(target, target, fill);
    for r in 0..image.height {
        let src = &image.data[r * image.width..(r + 1) * image.width];
        let start = (r + top) * target + left;
        out.data[start..start + image.width].copy_from_slice(src);
    }
    Ok(out)
}

/// Bilinear resize of a square image to `size x size`.
///
/// Pixel centers are aligned (`src = (dst + 0.5) * scale - 0.5`) and
/// samples are clamped at the border, so corner pixels keep their values
/// and a same-size resize is the identity.
pub fn resize(image: &GrayImage, size: usize) -> Result<GrayImage> {
    if image.width != image.height {
        return Err(Error::NotSquare {
            width: image.width,
            height: image.height,
        });
    }
    let n = image.width;
    if n == size {
        return Ok(image.clone());
    }
    if n == 0 || size == 0 {
        return Ok(GrayImage::filled(size, size, 0));
    }
    let scale = n as f64 / size as f64;
    let taps: Vec<(usize, usize, f64)> = (0..size)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(n - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect();
    Ok(GrayImage::from_fn(size, size, |r, c| {
        let (r0, r1, fr) = taps[r];
        let (c0, c1, fc) = taps[c];
        let px = |rr, cc| f64::from(image.get(rr, cc));
        let top = px(r0, c0) * (1.0 - fc) + px(r0, c1) * fc;
        let bottom = px(r1, c0) * (1.0 - fc) + px(r1, c1) * fc;
        let v = top * (1.0 - fr) + bottom * fr;
        (v + 0.5).floor().clamp(0.0, 255.0) as u8
    }))
}

/// Otsu threshold: the intensity `t` maximizing between-class variance of
/// `{v <= t}` versus `{v > t}`. `None` if fewer than two intensities occur.
pub fn otsu_threshold(image: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in &image.data {
        hist[v as usize] += 1;
    }
    if hist.iter().filter(|&&h| h > 0).count() < 2 {
        return None;
    }
    let total = image.data.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &h)| i as f64 * h as f64)
        .sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best: Option<(u8, f64)> = None;
    for t in 0..255usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((t as u8, between));
        }
    }
    best.map(|(t, _)| t)
}

/// Dark-on-light segmentation: pixels at or below the Otsu threshold.
pub fn threshold_dark(image: &GrayImage) -> Result<ShapeMask> {
    let t = otsu_threshold(image).ok_or(Error::DegenerateImage)?;
    Ok(ShapeMask {
        width: image.width,
        height: image.height,
        data: image.data.iter().map(|&v| v <= t).collect(),
    })
}

/// 4-connected components of the foreground, each as a list of pixels in
/// discovery order. Components are ordered by their first pixel in
/// row-major scan order.
pub fn components(mask: &ShapeMask) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if !mask.data[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut comp = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (r, c) = (i / w, i % w);
            comp.push((r, c));
            let neighbors = [
                (r > 0).then(|| i - w),
                (r + 1 < h).then(|| i + w),
                (c > 0).then(|| i - 1),
                (c + 1 < w).then(|| i + 1),
            ];
            for j in neighbors.into_iter().flatten() {
                if mask.data[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Keep only the largest 4-connected component (first in scan order on ties).
pub fn largest_component(mask: &ShapeMask) -> ShapeMask {
    let comps = components(mask);
    let mut out = ShapeMask::from_fn(mask.width, mask.height, |_, _| false);
    let mut best: Option<&Vec<(usize, usize)>> = None;
    for comp in &comps {
        if best.is_none_or(|b| comp.len() > b.len()) {
            best = Some(comp);
        }
    }
    if let Some(comp) = best {
        for &(r, c) in comp {
            out.set(r, c, true);
        }
    }
    out
}

/// Fill background regions not 4-reachable from the image border.
pub fn fill_holes(mask: &ShapeMask) -> ShapeMask {
    let (w, h) = mask.dims();
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            let border = r == 0 || c == 0 || r + 1 == h || c + 1 == w;
            let i = r * w + c;
            if border && !mask.data[i] {
                outside[i] = true;
                queue.push_back(i);
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = (i / w, i % w);
        let neighbors = [
            (r > 0).then(|| i - w),
            (r + 1 < h).then(|| i + w),
            (c > 0).then(|| i - 1),
            (c + 1 < w).then(|| i + 1),
        ];
        for j in neighbors.into_iter().flatten() {
            if !mask.data[j] && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        }
    }
    ShapeMask {
        width: w,
        height: h,
        data: outside.into_iter().map(|o| !o).collect(),
    }
}

/// Intensity gap below the background level that still counts as
/// chromosome when grown from the Otsu seeds.
pub const HALO_MARGIN: u8 = 16;

/// Most frequent intensity among pixels brighter than `t`.
fn background_level(image: &GrayImage, t: u8) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in image.data.iter().filter(|&&v| v > t) {
        hist[v as usize] += 1;
    }
    let (level, &count) = hist.iter().enumerate().max_by_key(|&(i, &h)| (h, std::cmp::Reverse(i)))?;
    (count > 0).then_some(level as u8)
}

/// Grow `seeds` through 4-connected pixels at or below `limit`.
fn grow(image: &GrayImage, seeds: &ShapeMask, limit: u8) -> ShapeMask {
    let (w, h) = seeds.dims();
    let mut out = seeds.data.clone();
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&i| out[i]).collect();
    while let Some(i) = queue.pop_front() {
        let (r, c) = (i / w, i % w);
        let neighbors = [
            (r > 0).then(|| i - w),
            (r + 1 < h).then(|| i + w),
            (c > 0).then(|| i - 1),
            (c + 1 < w).then(|| i + 1),
        ];
        for j in neighbors.into_iter().flatten() {
            if !out[j] && image.data[j] <= limit {
                out[j] = true;
                queue.push_back(j);
            }
        }
    }
    ShapeMask {
        width: w,
        height: h,
        data: out,
    }
}

/// Chromosome shape mask: Otsu threshold (dark foreground), grown through
/// connected pixels at least [`HALO_MARGIN`] darker than the background
/// level so pale bands stay attached, then the largest 4-connected
/// component with interior holes filled.
pub fn binarize(image: &GrayImage) -> Result<ShapeMask> {
    let t = otsu_threshold(image).ok_or(Error::DegenerateImage)?;
    let mut raw = threshold_dark(image)?;
    if let Some(bg) = background_level(image, t) {
        let limit = bg.saturating_sub(HALO_MARGIN);
        if limit > t {
            raw = grow(image, &raw, limit);
        }
    }
    let mask = fill_holes(&largest_component(&raw));
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(mask)
}

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Decode any supported file into a 1- or 3-channel raster (alpha dropped).
pub fn load_raster(path: &Path) -> Result<Raster> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if img.color().has_color() {
        Raster::new(w, h, 3, img.to_rgb8().into_raw())
    } else {
        Raster::new(w, h, 1, img.to_luma8().into_raw())
    }
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    to_grayscale(&load_raster(path)?)
}

pub fn save_gray(path: &Path, image: &GrayImage) -> Result<()> {
    let buf = image::GrayImage::from_raw(
        image.width as u32,
        image.height as u32,
        image.data.clone(),
    )
    .expect("buffer length checked at construction");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

pub fn load_banded_mask(path: &Path) -> Result<BandedMask> {
    BandedMask::from_image(&load_gray(path)?)
}

pub fn save_banded_mask(path: &Path, mask: &BandedMask) -> Result<()> {
    save_gray(path, &mask.to_image())
}

pub fn load_shape_mask(path: &Path) -> Result<ShapeMask> {
    Ok(ShapeMask::from_image(&load_gray(path)?))
}

pub fn save_shape_mask(path: &Path, mask: &ShapeMask) -> Result<()> {
    save_gray(path, &mask.to_image())
}

/// Side-by-side `[left | right]` composite of two equally sized images.
pub fn side_by_side(left: &GrayImage, right: &GrayImage) -> Result<GrayImage> {
    if left.dims() != right.dims() {
        return Err(Error::DimensionMismatch {
            expected: left.dims(),
            found: right.dims(),
        });
    }
    let w = left.width;
    Ok(GrayImage::from_fn(2 * w, left.height, |r, c| {
        if c < w {
            left.get(r, c)
        } else {
            right.get(r, c - w)
        }
    }))
}

/// Inverse of [`side_by_side`].
pub fn split_side_by_side(pair: &GrayImage) -> Result<(GrayImage, GrayImage)> {
    if !pair.width.is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: (pair.width + 1, pair.height),
            found: pair.dims(),
        });
    }
    let w = pair.width / 2;
    Ok((pair.crop(0, 0, w, pair.height), pair.crop(0, w, w, pair.height)))
}

/// Preprocessing parameters applied to every chromosome crop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessParams {
    /// Output side length.
    pub size: usize,
    /// Padding intensity (white background).
    pub pad_fill: u8,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            size: 128,
            pad_fill: 255,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, data: &[u8]) -> GrayImage {
        GrayImage::new(w, h, data.to_vec()).unwrap()
    }

    #[test]
    fn grayscale_identity_on_single_channel() {
        let img = gray(2, 2, &[1, 2, 3, 4]);
        let out = to_grayscale(&Raster::from(img.clone())).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn grayscale_bt709() {
        let r = Raster::new(3, 1, 3, vec![255, 255, 255, 255, 0, 0, 0, 0, 0]).unwrap();
        let out = to_grayscale(&r).unwrap();
        assert_eq!(out.data(), &[255, 54, 0]);
    }

    #[test]
    fn grayscale_rejects_two_channels() {
        let r = Raster::new(1, 1, 2, vec![0, 0]).unwrap();
        assert!(matches!(
            to_grayscale(&r),
            Err(Error::UnsupportedChannels(2))
        ));
    }

    #[test]
    fn pad_noop_when_already_target() {
        let img = GrayImage::from_fn(4, 4, |r, c| (r * 4 + c) as u8);
        assert_eq!(pad_square(&img, 4, 255).unwrap(), img);
    }

    #[test]
    fn pad_even_surplus_is_centered() {
        let img = GrayImage::filled(2, 4, 7);
        let out = pad_square(&img, 4, 255).unwrap();
        for r in 0..4 {
            let row: Vec<u8> = (0..4).map(|c| out.get(r, c)).collect();
            assert_eq!(row, vec![255, 7, 7, 255]);
        }
    }

    #[test]
    fn pad_odd_surplus_goes_right() {
        let img = GrayImage::filled(3, 4, 7);
        let out = pad_square(&img, 4, 255).unwrap();
        for r in 0..4 {
            let row: Vec<u8> = (0..4).map(|c| out.get(r, c)).collect();
            assert_eq!(row, vec![7, 7, 7, 255]);
        }
        let tall = GrayImage::filled(4, 3, 7);
        let out = pad_square(&tall, 4, 0).unwrap();
        assert_eq!(out.get(3, 0), 0);
        assert_eq!(out.get(0, 0), 7);
    }

    #[test]
    fn pad_rejects_small_target() {
        let img = GrayImage::filled(5, 3, 0);
        assert!(matches!(
            pad_square(&img, 4, 255),
            Err(Error::PadTargetTooSmall { .. })
        ));
    }

    #[test]
    fn resize_identity_and_constant() {
        let img = GrayImage::from_fn(128, 128, |r, c| ((r * 7 + c * 3) % 256) as u8);
        assert_eq!(resize(&img, 128).unwrap(), img);
        let flat = GrayImage::filled(256, 256, 93);
        assert_eq!(resize(&flat, 128).unwrap(), GrayImage::filled(128, 128, 93));
    }

    #[test]
    fn resize_checkerboard_by_hand() {
        // Hand-evaluated bilinear weights at source offsets 0.25 / 0.75:
        // (1,1): 0.75*(0.75*0 + 0.25*255) + 0.25*(0.75*255 + 0.25*0) = 95.625
        // (1,2): 0.75*(0.25*0 + 0.75*255) + 0.25*(0.25*255 + 0.75*0) = 159.375
        let board = gray(2, 2, &[0, 255, 255, 0]);
        let out = resize(&board, 4).unwrap();
        assert_eq!(out.get(0, 0), 0);
        assert_eq!(out.get(0, 3), 255);
        assert_eq!(out.get(3, 0), 255);
        assert_eq!(out.get(3, 3), 0);
        assert_eq!(out.get(1, 1), 96);
        assert_eq!(out.get(1, 2), 159);
        assert_eq!(out.get(2, 2), 96);
        assert_eq!(out.get(2, 1), 159);
    }

    #[test]
    fn resize_rejects_non_square() {
        assert!(matches!(
            resize(&GrayImage::filled(3, 4, 0), 8),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn binarize_rectangle() {
        let img = GrayImage::from_fn(10, 8, |r, c| {
            if (2..6).contains(&r) && (3..8).contains(&c) {
                0
            } else {
                255
            }
        });
        let mask = binarize(&img).unwrap();
        let expect = ShapeMask::from_fn(10, 8, |r, c| (2..6).contains(&r) && (3..8).contains(&c));
        assert_eq!(mask, expect);
    }

    #[test]
    fn binarize_keeps_largest_component() {
        let img = GrayImage::from_fn(12, 12, |r, c| {
            if ((2..6).contains(&r) && (2..8).contains(&c)) || (r == 10 && c == 10) {
                0
            } else {
                255
            }
        });
        let mask = binarize(&img).unwrap();
        assert_eq!(mask.count(), 24);
        assert!(!mask.get(10, 10));
    }

    #[test]
    fn binarize_fills_ring() {
        let img = GrayImage::from_fn(21, 21, |r, c| {
            let d2 = (r as i64 - 10).pow(2) + (c as i64 - 10).pow(2);
            if (16..=64).contains(&d2) {
                0
            } else {
                255
            }
        });
        let mask = binarize(&img).unwrap();
        let disk = ShapeMask::from_fn(21, 21, |r, c| {
            (r as i64 - 10).pow(2) + (c as i64 - 10).pow(2) <= 64
        });
        assert_eq!(mask, disk);
    }

    #[test]
    fn binarize_degenerate() {
        assert!(matches!(
            binarize(&GrayImage::filled(5, 5, 255)),
            Err(Error::DegenerateImage)
        ));
    }

    #[test]
    fn banded_mask_rejects_bad_codes() {
        assert!(matches!(
            BandedMask::new(2, 1, vec![0, 128]),
            Err(Error::InvalidCode(128))
        ));
    }

    #[test]
    fn side_by_side_layout() {
        let a = GrayImage::filled(3, 2, 1);
        let b = GrayImage::filled(3, 2, 2);
        let pair = side_by_side(&a, &b).unwrap();
        assert_eq!(pair.dims(), (6, 2));
        let (l, r) = split_side_by_side(&pair).unwrap();
        assert_eq!((l, r), (a, b));
    }

    #[test]
    fn png_roundtrip_keeps_codes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let mask = BandedMask::new(3, 1, vec![0, 127, 255]).unwrap();
        save_banded_mask(&path, &mask).unwrap();
        assert_eq!(load_banded_mask(&path).unwrap(), mask);
    }

    #[test]
    fn binarize_keeps_pale_bands() {
        // dark / pale / dark stripes on white: Otsu alone splits off the pale band
        let img = GrayImage::from_fn(60, 60, |r, c| {
            if (20..30).contains(&r) && (10..50).contains(&c) {
                if (23..37).contains(&c) { 220 } else { 40 }
            } else {
                255
            }
        });
        assert!(otsu_threshold(&img).unwrap() < 220);
        let m = binarize(&img).unwrap();
        assert_eq!(m, ShapeMask::from_fn(60, 60, |r, c| (20..30).contains(&r) && (10..50).contains(&c)));
    }

    #[test]
    fn binarize_ignores_faint_background_noise() {
        let img = GrayImage::from_fn(40, 40, |r, c| {
            if (10..20).contains(&r) && (10..30).contains(&c) {
                30
            } else if (r + c) % 7 == 0 {
                248
            } else {
                255
            }
        });
        let m = binarize(&img).unwrap();
        assert_eq!(m.count(), 200);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pad_then_crop_is_identity(w in 1usize..12, h in 1usize..12, extra in 0usize..6, seed in any::<u64>()) {
                let img = GrayImage::from_fn(w, h, |r, c| (seed.wrapping_mul((r * 31 + c + 1) as u64) >> 56) as u8);
                let target = w.max(h) + extra;
                let padded = pad_square(&img, target, 255).unwrap();
                let (left, top) = ((target - w) / 2, (target - h) / 2);
                prop_assert_eq!(padded.crop(top, left, w, h), img);
            }

            #[test]
            fn resize_constant_stays_constant(n in 1usize..40, size in 1usize..40, v in any::<u8>()) {
                let out = resize(&GrayImage::filled(n, n, v), size).unwrap();
                prop_assert!(out.data().iter().all(|&x| x == v));
            }

            #[test]
            fn binarize_single_component_without_holes(seed in any::<u64>()) {
                let mut s = seed;
                let img = GrayImage::from_fn(16, 16, |_, _| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if (s >> 60) < 7 { 20 } else { 230 }
                });
                if let Ok(mask) = binarize(&img) {
                    prop_assert_eq!(components(&mask).len(), 1);
                    prop_assert_eq!(fill_holes(&mask), mask);
                }
            }
        }
    }
}
