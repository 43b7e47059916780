//! Medial axis approximation: Zhang–Suen thinning, graph-diameter branch
//! pruning, and resampling of the surviving path into a polyline whose
//! ends are pushed out to the chromosome tips.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::ShapeMask;

/// Subpixel `(row, col)` coordinate.
pub type Point = (f64, f64);

/// Clockwise 8-neighborhood starting north: P2..P9 in Zhang–Suen notation.
const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Polyline approximation of the medial axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPolyline {
    points: Vec<Point>,
    tangents: Vec<Point>,
}

impl AxisPolyline {
    /// Builds a polyline from at least two points, dropping consecutive duplicates.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let mut clean: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if clean.last().is_none_or(|q| dist(*q, p) > 1e-9) {
                clean.push(p);
            }
        }
        if clean.len() < 2 {
            return Err(Error::EmptyPath);
        }
        let tangents = clean
            .windows(2)
            .map(|w| {
                let d = dist(w[0], w[1]);
                ((w[1].0 - w[0].0) / d, (w[1].1 - w[0].1) / d)
            })
            .collect();
        Ok(Self {
            points: clean,
            tangents,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Unit direction of each segment.
    pub fn tangents(&self) -> &[Point] {
        &self.tangents
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| dist(w[0], w[1])).collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// True when no two non-adjacent segments intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.points.len();
        for i in 0..n - 1 {
            for j in i + 2..n - 1 {
                if segments_intersect(
                    self.points[i],
                    self.points[i + 1],
                    self.points[j],
                    self.points[j + 1],
                ) {
                    return false;
                }
            }
        }
        true
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let cross = |o: Point, p: Point, q: Point| (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0);
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Parameters for turning a shape mask into an axis polyline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisParams {
    /// Arc-length spacing of polyline vertices, in pixels.
    pub step: f64,
    /// Path ends are trimmed by this multiple of the local half-width
    /// before extension, removing the corner forks thinning leaves at the tips.
    pub end_trim: f64,
}

impl Default for AxisParams {
    fn default() -> Self {
        Self {
            step: 5.0,
            end_trim: 1.5,
        }
    }
}

struct Thinning {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Thinning {
    fn at(&self, r: isize, c: isize) -> bool {
        r >= 0
            && c >= 0
            && (r as usize) < self.height
            && (c as usize) < self.width
            && self.data[r as usize * self.width + c as usize]
    }

    fn ring(&self, r: usize, c: usize) -> [bool; 8] {
        RING.map(|(dr, dc)| self.at(r as isize + dr, c as isize + dc))
    }

    fn deletable(&self, r: usize, c: usize, first_pass: bool, min_b: usize) -> bool {
        let p = self.ring(r, c);
        let b = p.iter().filter(|&&v| v).count();
        if !(min_b..=6).contains(&b) {
            return false;
        }
        let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
        if a != 1 {
            return false;
        }
        let (n, e, s, w) = (p[0], p[2], p[4], p[6]);
        if first_pass {
            !(n && e && s) && !(e && s && w)
        } else {
            !(n && e && w) && !(n && s && w)
        }
    }

    /// Number of 8-connected groups among the set neighbors of a pixel.
    fn neighbor_groups(p: &[bool; 8]) -> usize {
        let mut groups = 0;
        for i in 0..8 {
            if !p[i] {
                continue;
            }
            // predecessor in the same group: adjacent ring slot, or the
            // 4-neighbor two slots back across an empty diagonal
            let prev = p[(i + 7) % 8] || (i % 2 == 0 && p[(i + 6) % 8]);
            if !prev {
                groups += 1;
            }
        }
        // a closed loop of neighbors has no first member
        groups.max(usize::from(p.iter().any(|&v| v)))
    }

    /// Sequentially drop the inner corner of every staircase step, leaving
    /// diagonal runs one pixel wide.
    fn remove_staircases(&mut self) {
        for r in 0..self.height {
            for c in 0..self.width {
                if !self.data[r * self.width + c] {
                    continue;
                }
                let p = self.ring(r, c);
                let b = p.iter().filter(|&&v| v).count();
                let four: Vec<usize> = (0..4).filter(|&k| p[2 * k]).collect();
                let corner = four.len() == 2 && (four[1] - four[0]) % 2 == 1;
                if (2..=3).contains(&b) && corner && Self::neighbor_groups(&p) == 1 {
                    self.data[r * self.width + c] = false;
                }
            }
        }
    }
}

impl Thinning {
    fn run(mask: &ShapeMask, min_b: usize) -> Self {
        let mut t = Thinning {
            width: mask.width(),
            height: mask.height(),
            data: mask.data().to_vec(),
        };
        loop {
            let mut changed = false;
            for first_pass in [true, false] {
                let candidates: Vec<(usize, usize)> = (0..t.height)
                    .flat_map(|r| (0..t.width).map(move |c| (r, c)))
                    .filter(|&(r, c)| {
                        t.data[r * t.width + c] && t.deletable(r, c, first_pass, min_b)
                    })
                    .collect();
                for (r, c) in candidates {
                    if t.deletable(r, c, first_pass, min_b) {
                        t.data[r * t.width + c] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                return t;
            }
        }
    }
}

/// Extent of a pixel set projected on `dir`.
fn extent(pixels: impl Iterator<Item = (usize, usize)>, dir: Point) -> f64 {
    let (lo, hi) = pixels.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (r, c)| {
        let t = r as f64 * dir.0 + c as f64 * dir.1;
        (lo.min(t), hi.max(t))
    });
    hi - lo
}

/// Zhang–Suen thinning to a one-pixel-wide, 8-connected skeleton.
///
/// Each sub-iteration marks candidates in parallel, then removes them in
/// scan order only if the deletion conditions still hold. The re-check
/// keeps 2x2 blocks from vanishing, so the skeleton has one component iff
/// the mask has one.
///
/// Plain Zhang–Suen eats two-pixel-thick diagonal runs from their ends, so
/// a bar near 45° can shrink to a few pixels. When the skeleton spans less
/// than half of the mask length minus its width, thinning is redone with
/// ends protected (at least three neighbors to delete) and the leftover
/// staircases are reduced to single diagonal steps.
pub fn skeletonize(mask: &ShapeMask) -> Result<ShapeMask> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let t = Thinning::run(mask, 2);
    let skel = ShapeMask::new(t.width, t.height, t.data)?;
    let dir = principal_direction(mask);
    let pixels: Vec<_> = skel.pixels().collect();
    let radius = distance_to_background(mask, &pixels)
        .into_iter()
        .fold(0.0, f64::max);
    let expected = extent(mask.pixels(), dir) - 2.0 * radius;
    if extent(skel.pixels(), dir) >= 0.5 * expected {
        return Ok(skel);
    }
    let mut t = Thinning::run(mask, 3);
    t.remove_staircases();
    ShapeMask::new(t.width, t.height, t.data)
}

#[derive(Clone, Copy, PartialEq)]
struct Visit {
    dist: f64,
    node: usize,
}

impl Eq for Visit {}

impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pixel graph over the 8-neighborhood; orthogonal steps weigh 1, diagonal √2.
pub(crate) struct PixelGraph {
    pub nodes: Vec<(usize, usize)>,
    pub edges: Vec<Vec<(usize, f64)>>,
}

impl PixelGraph {
    pub fn from_mask(mask: &ShapeMask) -> Self {
        let nodes: Vec<(usize, usize)> = mask.pixels().collect();
        let mut index = vec![usize::MAX; mask.width() * mask.height()];
        for (i, &(r, c)) in nodes.iter().enumerate() {
            index[r * mask.width() + c] = i;
        }
        let edges = nodes
            .iter()
            .map(|&(r, c)| {
                RING.iter()
                    .filter(|&&(dr, dc)| mask.contains(r as isize + dr, c as isize + dc))
                    .map(|&(dr, dc)| {
                        let j = index[(r as isize + dr) as usize * mask.width()
                            + (c as isize + dc) as usize];
                        let w = if dr != 0 && dc != 0 {
                            std::f64::consts::SQRT_2
                        } else {
                            1.0
                        };
                        (j, w)
                    })
                    .collect()
            })
            .collect();
        Self { nodes, edges }
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut count = 0;
        for s in 0..self.nodes.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(i) = queue.pop_front() {
                for &(j, _) in &self.edges[i] {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }

    /// Single-source shortest paths: (distance, predecessor).
    pub fn dijkstra(&self, source: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Visit {
            dist: 0.0,
            node: source,
        });
        while let Some(Visit { dist: d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            for &(j, w) in &self.edges[node] {
                let nd = d + w;
                if nd < dist[j] - 1e-12 {
                    dist[j] = nd;
                    prev[j] = node;
                    heap.push(Visit { dist: nd, node: j });
                }
            }
        }
        (dist, prev)
    }
}

/// Longest shortest path (graph diameter) through the skeleton, as an
/// ordered pixel list starting at the row-major-smaller end.
pub fn longest_path(skeleton: &ShapeMask) -> Result<Vec<(usize, usize)>> {
    let graph = PixelGraph::from_mask(skeleton);
    if graph.nodes.is_empty() {
        return Err(Error::EmptyPath);
    }
    let components = graph.component_count();
    if components > 1 {
        return Err(Error::DisconnectedSkeleton { components });
    }
    let mut best = (0usize, 0usize, -1.0f64);
    let mut best_prev = Vec::new();
    for s in 0..graph.nodes.len() {
        let (dist, prev) = graph.dijkstra(s);
        for (t, &d) in dist.iter().enumerate().skip(s) {
            if d > best.2 + 1e-9 {
                best = (s, t, d);
                best_prev.clone_from(&prev);
            }
        }
    }
    let (s, mut t, _) = best;
    if s == t {
        return Ok(vec![graph.nodes[s]]);
    }
    let mut rev = vec![graph.nodes[t]];
    while t != s {
        t = best_prev[t];
        rev.push(graph.nodes[t]);
    }
    rev.reverse();
    Ok(rev)
}

fn cumulative_arc(points: &[Point]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(points.len());
    let mut total = 0.0;
    acc.push(0.0);
    for w in points.windows(2) {
        total += dist(w[0], w[1]);
        acc.push(total);
    }
    acc
}

/// Position at arc length `s` along a polyline given its cumulative arc table.
fn point_at(points: &[Point], arc: &[f64], s: f64) -> Point {
    let s = s.clamp(0.0, *arc.last().unwrap());
    let i = match arc.binary_search_by(|a| a.total_cmp(&s)) {
        Ok(i) => return points[i],
        Err(i) => i.clamp(1, points.len() - 1),
    };
    let (a, b) = (points[i - 1], points[i]);
    let span = arc[i] - arc[i - 1];
    let f = if span > 0.0 { (s - arc[i - 1]) / span } else { 0.0 };
    (a.0 + (b.0 - a.0) * f, a.1 + (b.1 - a.1) * f)
}

/// Euclidean distance from each foreground pixel center in `pixels` to the
/// nearest background pixel center (pixels outside the raster count as background).
pub(crate) fn distance_to_background(mask: &ShapeMask, pixels: &[(usize, usize)]) -> Vec<f64> {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let mut border = Vec::new();
    for r in -1..=h {
        for c in -1..=w {
            if mask.contains(r, c) {
                continue;
            }
            let touches = [(-1, 0), (1, 0), (0, -1), (0, 1)]
                .iter()
                .any(|&(dr, dc)| mask.contains(r + dr, c + dc));
            if touches {
                border.push((r as f64, c as f64));
            }
        }
    }
    pixels
        .iter()
        .map(|&(r, c)| {
            let p = (r as f64, c as f64);
            border
                .iter()
                .map(|&b| dist(p, b))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Trim both ends of the path by `factor` times its median half-width,
/// never leaving less than half of the path.
pub fn trim_path_ends(path: &[(usize, usize)], mask: &ShapeMask, factor: f64) -> Vec<(usize, usize)> {
    if path.len() < 3 || factor <= 0.0 {
        return path.to_vec();
    }
    let mut widths = distance_to_background(mask, path);
    widths.sort_by(f64::total_cmp);
    let half_width = widths[widths.len() / 2];
    let pts: Vec<Point> = path.iter().map(|&(r, c)| (r as f64, c as f64)).collect();
    let arc = cumulative_arc(&pts);
    let total = *arc.last().unwrap();
    let cut = (factor * half_width).min(total / 4.0);
    let kept: Vec<(usize, usize)> = path
        .iter()
        .zip(&arc)
        .filter(|(_, &s)| s >= cut - 1e-9 && s <= total - cut + 1e-9)
        .map(|(&p, _)| p)
        .collect();
    if kept.len() < 2 {
        let mid = path.len() / 2;
        return path[mid - 1..=mid].to_vec();
    }
    kept
}

/// Major principal axis of the mask foreground as a unit `(row, col)` vector.
fn principal_direction(mask: &ShapeMask) -> Point {
    let n = mask.count() as f64;
    let (mut mr, mut mc) = (0.0, 0.0);
    for (r, c) in mask.pixels() {
        mr += r as f64;
        mc += c as f64;
    }
    mr /= n;
    mc /= n;
    let (mut srr, mut scc, mut src) = (0.0, 0.0, 0.0);
    for (r, c) in mask.pixels() {
        let (dr, dc) = (r as f64 - mr, c as f64 - mc);
        srr += dr * dr;
        scc += dc * dc;
        src += dr * dc;
    }
    let theta = 0.5 * (2.0 * src).atan2(srr - scc);
    (theta.cos(), theta.sin())
}

/// Walk from `from` along unit `dir` in half-pixel steps while still on
/// the foreground; returns the last foreground position reached.
fn extend_to_boundary(mask: &ShapeMask, from: Point, dir: Point) -> Option<Point> {
    let limit = 2 * (mask.width() + mask.height());
    let mut last = None;
    for k in 1..=limit {
        let t = 0.5 * k as f64;
        let q = (from.0 + dir.0 * t, from.1 + dir.1 * t);
        if !mask.contains(q.0.round() as isize, q.1.round() as isize) {
            break;
        }
        last = Some(q);
    }
    last
}

/// Resample an ordered pixel path into a polyline with a vertex every
/// `step` pixels of arc length plus both endpoints, then extend each end
/// along its terminal tangent until the next step would leave the mask.
pub fn fit_polyline(path: &[(usize, usize)], mask: &ShapeMask, step: f64) -> Result<AxisPolyline> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    if !(step > 0.0) {
        return Err(Error::InvalidConfig(format!("polyline step must be positive, got {step}")));
    }
    let pts: Vec<Point> = path.iter().map(|&(r, c)| (r as f64, c as f64)).collect();
    let mut vertices: Vec<Point>;
    let (head_dir, tail_dir);
    if pts.len() == 1 {
        let d = principal_direction(mask);
        let p = pts[0];
        vertices = vec![(p.0 - 0.5 * d.0, p.1 - 0.5 * d.1), (p.0 + 0.5 * d.0, p.1 + 0.5 * d.1)];
        head_dir = (-d.0, -d.1);
        tail_dir = d;
    } else {
        let arc = cumulative_arc(&pts);
        let total = *arc.last().unwrap();
        vertices = Vec::new();
        let mut s = 0.0;
        while s < total - 1e-9 {
            vertices.push(point_at(&pts, &arc, s));
            s += step;
        }
        vertices.push(*pts.last().unwrap());
        let back = step.min(total);
        let unit = |a: Point, b: Point| {
            let d = dist(a, b);
            ((a.0 - b.0) / d, (a.1 - b.1) / d)
        };
        head_dir = unit(pts[0], point_at(&pts, &arc, back));
        tail_dir = unit(*pts.last().unwrap(), point_at(&pts, &arc, total - back));
    }
    if let Some(q) = extend_to_boundary(mask, vertices[0], head_dir) {
        vertices.insert(0, q);
    }
    if let Some(q) = extend_to_boundary(mask, *vertices.last().unwrap(), tail_dir) {
        vertices.push(q);
    }
    AxisPolyline::new(vertices)
}

/// Everything computed on the way from a shape mask to its axis.
#[derive(Debug, Clone)]
pub struct AxisTrace {
    pub skeleton: ShapeMask,
    pub path: Vec<(usize, usize)>,
    pub polyline: AxisPolyline,
}

/// skeletonize → longest_path → end trimming → fit_polyline.
pub fn trace_axis(mask: &ShapeMask, params: &AxisParams) -> Result<AxisTrace> {
    let skeleton = skeletonize(mask)?;
    let path = longest_path(&skeleton)?;
    let trimmed = trim_path_ends(&path, mask, params.end_trim);
    let polyline = fit_polyline(&trimmed, mask, params.step)?;
    Ok(AxisTrace {
        skeleton,
        path,
        polyline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_of(w: usize, h: usize, pixels: &[(usize, usize)]) -> ShapeMask {
        ShapeMask::from_fn(w, h, |r, c| pixels.contains(&(r, c)))
    }

    /// Plain parallel Zhang–Suen, transcribed directly, as an oracle.
    fn zhang_suen_reference(mask: &ShapeMask) -> ShapeMask {
        let mut img = mask.clone();
        loop {
            let mut changed = false;
            for pass in 0..2 {
                let mut del = Vec::new();
                for (r, c) in img.pixels() {
                    let p: Vec<bool> = RING
                        .iter()
                        .map(|&(dr, dc)| img.contains(r as isize + dr, c as isize + dc))
                        .collect();
                    let b = p.iter().filter(|&&v| v).count();
                    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
                    let cond = if pass == 0 {
                        !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
                    } else {
                        !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
                    };
                    if (2..=6).contains(&b) && a == 1 && cond {
                        del.push((r, c));
                    }
                }
                changed |= !del.is_empty();
                for (r, c) in del {
                    img.set(r, c, false);
                }
            }
            if !changed {
                return img;
            }
        }
    }

    #[test]
    fn skeleton_of_bar_is_middle_row() {
        let bar = ShapeMask::from_fn(13, 5, |r, c| (1..4).contains(&r) && (1..12).contains(&c));
        let skel = skeletonize(&bar).unwrap();
        let reference = zhang_suen_reference(&bar);
        assert!(!reference.is_empty());
        assert!(reference.pixels().all(|(r, c)| skel.get(r, c)));
        let pixels: Vec<_> = skel.pixels().collect();
        assert!(!pixels.is_empty());
        assert!(pixels.iter().all(|&(r, _)| r == 2));
        let cols: Vec<usize> = pixels.iter().map(|&(_, c)| c).collect();
        assert!(cols.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn skeleton_of_diagonal_bar_spans_it() {
        // 45° bar, about 6 px thick and 50 px long
        let bar = ShapeMask::from_fn(50, 50, |r, c| {
            let (u, v) = (r as f64 + c as f64, r as f64 - c as f64);
            (10.0..80.0).contains(&u) && v.abs() <= 4.0
        });
        let skel = skeletonize(&bar).unwrap();
        assert_eq!(PixelGraph::from_mask(&skel).component_count(), 1);
        let path = longest_path(&skel).unwrap();
        let (a, b) = (path[0], *path.last().unwrap());
        let span = (b.0 as f64 - a.0 as f64).hypot(b.1 as f64 - a.1 as f64);
        assert!(span > 35.0, "span {span}");
        // one pixel wide: no 2x2 block survives
        for (r, c) in skel.pixels() {
            let block = [(r, c + 1), (r + 1, c), (r + 1, c + 1)];
            assert!(!block.iter().all(|&(rr, cc)| skel.contains(rr as isize, cc as isize)));
        }
    }

    #[test]
    fn skeleton_of_single_pixel() {
        let m = mask_of(3, 3, &[(1, 1)]);
        assert_eq!(skeletonize(&m).unwrap(), m);
    }

    #[test]
    fn skeleton_of_plus_keeps_center_and_arms() {
        let plus = ShapeMask::from_fn(11, 11, |r, c| {
            let (r, c) = (r as isize - 5, c as isize - 5);
            (r.abs() <= 1 && c.abs() <= 4) || (c.abs() <= 1 && r.abs() <= 4)
        });
        let skel = skeletonize(&plus).unwrap();
        assert!(skel.get(5, 5));
        // one arm reaches out in each direction
        assert!((0..4).any(|r| skel.get(r, 5)));
        assert!((7..11).any(|r| skel.get(r, 5)));
        assert!((0..4).any(|c| skel.get(5, c)));
        assert!((7..11).any(|c| skel.get(5, c)));
    }

    #[test]
    fn skeleton_of_2x2_block_survives() {
        let m = mask_of(4, 4, &[(1, 1), (1, 2), (2, 1), (2, 2)]);
        assert!(zhang_suen_reference(&m).is_empty());
        let skel = skeletonize(&m).unwrap();
        assert!(!skel.is_empty());
        assert_eq!(PixelGraph::from_mask(&skel).component_count(), 1);
    }

    #[test]
    fn skeleton_rejects_empty() {
        let m = ShapeMask::from_fn(3, 3, |_, _| false);
        assert!(matches!(skeletonize(&m), Err(Error::EmptyMask)));
    }

    #[test]
    fn longest_path_of_line() {
        let line: Vec<_> = (0..10).map(|c| (2, c + 1)).collect();
        let m = mask_of(12, 5, &line);
        assert_eq!(longest_path(&m).unwrap(), line);
    }

    #[test]
    fn longest_path_of_t_shape() {
        let mut px: Vec<_> = (0..20).map(|c| (1, c)).collect();
        px.extend([(2, 10), (3, 10), (4, 10)]);
        let m = mask_of(20, 6, &px);
        let path = longest_path(&m).unwrap();
        let expect: Vec<_> = (0..20).map(|c| (1, c)).collect();
        assert_eq!(path, expect);
    }

    #[test]
    fn longest_path_single_pixel() {
        let m = mask_of(3, 3, &[(1, 1)]);
        assert_eq!(longest_path(&m).unwrap(), vec![(1, 1)]);
    }

    #[test]
    fn longest_path_rejects_disconnected() {
        let m = mask_of(6, 3, &[(1, 0), (1, 4)]);
        assert!(matches!(
            longest_path(&m),
            Err(Error::DisconnectedSkeleton { components: 2 })
        ));
    }

    #[test]
    fn fit_straight_path_before_extension() {
        let path: Vec<_> = (0..20).map(|c| (5, c)).collect();
        let mask = mask_of(20, 11, &path);
        let poly = fit_polyline(&path, &mask, 5.0).unwrap();
        // the path already spans the mask, so nothing is added at the ends
        let expect = vec![(5.0, 0.0), (5.0, 5.0), (5.0, 10.0), (5.0, 15.0), (5.0, 19.0)];
        assert_eq!(poly.points(), expect.as_slice());
    }

    #[test]
    fn fit_extends_to_mask_ends() {
        let mask = ShapeMask::from_fn(30, 11, |r, c| (3..8).contains(&r) && (2..28).contains(&c));
        let path: Vec<_> = (8..20).map(|c| (5, c)).collect();
        let poly = fit_polyline(&path, &mask, 5.0).unwrap();
        let first = poly.points()[0];
        let last = *poly.points().last().unwrap();
        assert!((first.1 - 2.0).abs() <= 0.5, "{first:?}");
        assert!((last.1 - 27.0).abs() <= 0.5, "{last:?}");
    }

    #[test]
    fn fit_two_pixel_path() {
        let path = vec![(2, 2), (2, 3)];
        let mask = mask_of(6, 5, &path);
        let poly = fit_polyline(&path, &mask, 5.0).unwrap();
        let pts = poly.points();
        assert!(pts.contains(&(2.0, 2.0)) && pts.contains(&(2.0, 3.0)));
        // any extension stays within the two pixel squares
        assert!(pts.iter().all(|p| p.0 == 2.0 && (1.5..=3.5).contains(&p.1)));
    }

    #[test]
    fn fit_l_shape_has_corner_vertex() {
        let mut path: Vec<_> = (0..11).map(|r| (r, 0)).collect();
        path.extend((1..11).map(|c| (10, c)));
        let mask = mask_of(12, 12, &path);
        let poly = fit_polyline(&path, &mask, 5.0).unwrap();
        // arc positions 0,5,10,15,20 → the 10 sample sits exactly on the corner
        assert!(poly.points().iter().any(|&p| dist(p, (10.0, 0.0)) < 1e-9));
        assert_eq!(poly.points().len(), 5);
        assert!(poly.is_simple());
    }

    #[test]
    fn fit_single_pixel_uses_principal_axis() {
        let mask = ShapeMask::from_fn(9, 9, |r, c| r == 4 && (2..7).contains(&c));
        let poly = fit_polyline(&[(4, 4)], &mask, 5.0).unwrap();
        let pts = poly.points();
        assert!((pts[0].1 - 2.0).abs() <= 0.5);
        assert!((pts.last().unwrap().1 - 6.0).abs() <= 0.5);
        assert!(pts.iter().all(|p| (p.0 - 4.0).abs() < 1e-9));
    }

    #[test]
    fn axis_of_rectangle_tracks_centerline() {
        for (w, h) in [(60usize, 9usize), (80, 14), (100, 20)] {
            let (r0, c0) = (10usize, 10usize);
            let mask = ShapeMask::from_fn(w + 20, h + 20, |r, c| {
                (r0..r0 + h).contains(&r) && (c0..c0 + w).contains(&c)
            });
            let trace = trace_axis(&mask, &AxisParams::default()).unwrap();
            let center = r0 as f64 + (h as f64 - 1.0) / 2.0;
            for p in trace.polyline.points() {
                assert!((p.0 - center).abs() <= 1.0, "{w}x{h}: {p:?}");
            }
            let pts = trace.polyline.points();
            let span = (pts.last().unwrap().1 - pts[0].1).abs();
            assert!(span >= (w - 2) as f64, "{w}x{h}: span {span}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn blob(seed: u64, w: usize, h: usize) -> ShapeMask {
            let mut s = seed | 1;
            let raw = ShapeMask::from_fn(w, h, |_, _| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                s % 10 < 6
            });
            crate::imagecore::largest_component(&raw)
        }

        /// Brute-force graph diameter via Floyd–Warshall.
        fn diameter(mask: &ShapeMask) -> f64 {
            let nodes: Vec<_> = mask.pixels().collect();
            let n = nodes.len();
            let mut d = vec![vec![f64::INFINITY; n]; n];
            for i in 0..n {
                d[i][i] = 0.0;
                for j in 0..n {
                    let (dr, dc) = (
                        nodes[i].0.abs_diff(nodes[j].0),
                        nodes[i].1.abs_diff(nodes[j].1),
                    );
                    if dr <= 1 && dc <= 1 && i != j {
                        d[i][j] = if dr + dc == 2 { 2f64.sqrt() } else { 1.0 };
                    }
                }
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if d[i][k] + d[k][j] < d[i][j] {
                            d[i][j] = d[i][k] + d[k][j];
                        }
                    }
                }
            }
            d.iter().flatten().cloned().fold(0.0, f64::max)
        }

        fn path_length(path: &[(usize, usize)]) -> f64 {
            path.windows(2)
                .map(|w| {
                    let (dr, dc) = (w[0].0.abs_diff(w[1].0), w[0].1.abs_diff(w[1].1));
                    assert!(dr <= 1 && dc <= 1 && dr + dc > 0);
                    if dr + dc == 2 { 2f64.sqrt() } else { 1.0 }
                })
                .sum()
        }

        proptest! {
            #[test]
            fn skeleton_subset_and_connected(seed in any::<u64>(), w in 3usize..14, h in 3usize..14) {
                let mask = blob(seed, w, h);
                prop_assume!(!mask.is_empty());
                let skel = skeletonize(&mask).unwrap();
                prop_assert!(skel.pixels().all(|(r, c)| mask.get(r, c)));
                prop_assert_eq!(PixelGraph::from_mask(&skel).component_count(), 1);
            }

            #[test]
            fn longest_path_is_diameter(seed in any::<u64>(), w in 3usize..10, h in 3usize..10) {
                let mask = blob(seed, w, h);
                let skel = skeletonize(&mask).unwrap();
                prop_assume!(skel.count() <= 50);
                let path = longest_path(&skel).unwrap();
                prop_assert!((path_length(&path) - diameter(&skel)).abs() < 1e-9);
            }
        }
    }
}
