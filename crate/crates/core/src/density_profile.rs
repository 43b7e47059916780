//! Perpendicular sampling lines along the medial axis and the averaged
//! density profile read through them.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{GrayImage, ShapeMask};
use crate::medial_axis::{AxisPolyline, Point};

/// Per-position sampling geometry: axis point, unit normal, and the
/// rasterized foreground pixels `P_k` of the perpendicular line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingFrame {
    pub width: usize,
    pub height: usize,
    /// Arc-length position of each sample along the axis.
    pub arc: Vec<f64>,
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    /// `P_k`, ordered from the negative-normal end to the positive-normal end.
    pub lines: Vec<Vec<(usize, usize)>>,
}

impl SamplingFrame {
    /// Number of sample positions `K`.
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Checks that the frame belongs to `mask`: same raster size, every
    /// `P_k` non-empty and entirely on the foreground.
    pub fn check_against(&self, mask: &ShapeMask) -> Result<()> {
        if (self.width, self.height) != mask.dims() {
            return Err(Error::DimensionMismatch {
                expected: mask.dims(),
                found: (self.width, self.height),
            });
        }
        for (k, line) in self.lines.iter().enumerate() {
            if line.is_empty() {
                return Err(Error::FrameMismatch(format!("P_{k} is empty")));
            }
            if let Some(&(r, c)) = line
                .iter()
                .find(|&&(r, c)| r >= self.height || c >= self.width || !mask.get(r, c))
            {
                return Err(Error::FrameMismatch(format!(
                    "P_{k} contains ({r}, {c}) outside the foreground"
                )));
            }
        }
        Ok(())
    }
}

/// Mean intensity along each perpendicular line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub values: Vec<f64>,
}

impl DensityProfile {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `k,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "value"])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([k.to_string(), format!("{v:.6}")])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

fn cumulative(lengths: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for l in lengths {
        acc.push(acc.last().unwrap() + l);
    }
    acc
}

/// Normal angle of a unit tangent; the angle `a` encodes the vector
/// `(row, col) = (sin a, cos a)`.
fn normal_angle(t: Point) -> f64 {
    // normal = (-t_col, t_row)
    (-t.1).atan2(t.0)
}

fn unwrap_angles(angles: &mut [f64]) {
    for i in 1..angles.len() {
        let prev = angles[i - 1];
        let mut a = angles[i];
        while a - prev > PI {
            a -= TAU;
        }
        while a - prev < -PI {
            a += TAU;
        }
        angles[i] = a;
    }
}

/// Axis point and interpolated unit normal at arc length `s`.
///
/// Each segment's normal angle is attached to the segment midpoint;
/// between midpoints the angle is linear in arc length (taking the short
/// way around), and constant beyond the first and last midpoints.
pub fn axis_sample(axis: &AxisPolyline, s: f64) -> (Point, Point) {
    let lengths = axis.segment_lengths();
    let arc = cumulative(&lengths);
    let pts = axis.points();
    let total = *arc.last().unwrap();
    let s = s.clamp(0.0, total);

    let seg = (0..lengths.len())
        .find(|&i| s <= arc[i + 1])
        .unwrap_or(lengths.len() - 1);
    let f = if lengths[seg] > 0.0 {
        (s - arc[seg]) / lengths[seg]
    } else {
        0.0
    };
    let (a, b) = (pts[seg], pts[seg + 1]);
    let point = (a.0 + (b.0 - a.0) * f, a.1 + (b.1 - a.1) * f);

    let mut angles: Vec<f64> = axis.tangents().iter().map(|&t| normal_angle(t)).collect();
    unwrap_angles(&mut angles);
    let mids: Vec<f64> = (0..lengths.len())
        .map(|i| arc[i] + lengths[i] / 2.0)
        .collect();
    let angle = if s <= mids[0] {
        angles[0]
    } else if s >= *mids.last().unwrap() {
        *angles.last().unwrap()
    } else {
        let i = (0..mids.len() - 1)
            .find(|&i| s <= mids[i + 1])
            .unwrap_or(mids.len() - 2);
        let span = mids[i + 1] - mids[i];
        let f = if span > 0.0 { (s - mids[i]) / span } else { 0.0 };
        angles[i] + (angles[i + 1] - angles[i]) * f
    };
    (point, (angle.sin(), angle.cos()))
}

/// Bresenham line from `from` to `to`, excluding `from`.
fn bresenham(from: (isize, isize), to: (isize, isize)) -> impl Iterator<Item = (isize, isize)> {
    let (mut r, mut c) = from;
    let dr = (to.0 - r).abs();
    let dc = (to.1 - c).abs();
    let sr = if to.0 >= r { 1 } else { -1 };
    let sc = if to.1 >= c { 1 } else { -1 };
    let mut err = dc - dr;
    std::iter::from_fn(move || {
        if (r, c) == to {
            return None;
        }
        let e2 = 2 * err;
        if e2 > -dr {
            err -= dr;
            c += sc;
        }
        if e2 < dc {
            err += dc;
            r += sr;
        }
        Some((r, c))
    })
}

fn walk(mask: &ShapeMask, start: (isize, isize), dir: Point) -> Vec<(usize, usize)> {
    let reach = (mask.width() + mask.height()) as f64;
    let target = (
        start.0 + (dir.0 * reach).round() as isize,
        start.1 + (dir.1 * reach).round() as isize,
    );
    bresenham(start, target)
        .take_while(|&(r, c)| mask.contains(r, c))
        .map(|(r, c)| (r as usize, c as usize))
        .collect()
}

/// Sample the axis every `spacing` pixels of arc length (both ends
/// included) and rasterize the perpendicular line at each sample,
/// clipped to the foreground. Positions whose line is empty are dropped.
pub fn build_frame(axis: &AxisPolyline, mask: &ShapeMask, spacing: f64) -> Result<SamplingFrame> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sampling spacing must be positive, got {spacing}"
        )));
    }
    let total = axis.length();
    let n = ((total / spacing).round() as usize).max(1);
    let mut frame = SamplingFrame {
        width: mask.width(),
        height: mask.height(),
        arc: Vec::new(),
        points: Vec::new(),
        normals: Vec::new(),
        lines: Vec::new(),
    };
    for k in 0..=n {
        let s = total * k as f64 / n as f64;
        let (p, normal) = axis_sample(axis, s);
        let start = (p.0.round() as isize, p.1.round() as isize);
        if !mask.contains(start.0, start.1) {
            continue;
        }
        let mut line = walk(mask, start, (-normal.0, -normal.1));
        line.reverse();
        line.push((start.0 as usize, start.1 as usize));
        line.extend(walk(mask, start, normal));
        frame.arc.push(s);
        frame.points.push(p);
        frame.normals.push(normal);
        frame.lines.push(line);
    }
    if frame.is_empty() {
        return Err(Error::AxisOutsideMask);
    }
    Ok(frame)
}

/// Mean of `image` over each `P_k`.
pub fn sample_profile(image: &GrayImage, frame: &SamplingFrame) -> Result<DensityProfile> {
    if image.dims() != (frame.width, frame.height) {
        return Err(Error::DimensionMismatch {
            expected: (frame.width, frame.height),
            found: image.dims(),
        });
    }
    let values = frame
        .lines
        .iter()
        .map(|line| {
            let sum: u64 = line.iter().map(|&(r, c)| u64::from(image.get(r, c))).sum();
            sum as f64 / line.len() as f64
        })
        .collect();
    Ok(DensityProfile { values })
}
