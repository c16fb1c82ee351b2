//! Text-region and character candidates from prediction maps.

use std::f64::consts::PI;

use crate::geometry::polygon::distance_to_segment;
use crate::geometry::{Orientation, Point2};
use crate::labelgen::denormalize_orientation;
use crate::raster::{Mask, RasterMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateParams {
    /// Region-map foreground threshold (`p >= threshold`).
    pub region_threshold: f32,
    /// Region components smaller than this many pixels are dropped.
    pub min_region_area: usize,
    /// Range the per-region Otsu threshold on the character map is clamped to.
    pub char_threshold_min: f32,
    pub char_threshold_max: f32,
}

impl Default for CandidateParams {
    fn default() -> Self {
        Self {
            region_threshold: 0.5,
            min_region_area: 12,
            char_threshold_min: 0.4,
            char_threshold_max: 0.7,
        }
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelBox {
    fn point(x: usize, y: usize) -> Self {
        Self {
            x0: x,
            y0: y,
            x1: x,
            y1: y,
        }
    }

    fn include(&mut self, x: usize, y: usize) {
        self.x0 = self.x0.min(x);
        self.y0 = self.y0.min(y);
        self.x1 = self.x1.max(x);
        self.y1 = self.y1.max(y);
    }

    /// True when the continuous point lies within the covered pixel squares.
    pub fn contains_point(&self, p: Point2) -> bool {
        p.x >= self.x0 as f64
            && p.x <= (self.x1 + 1) as f64
            && p.y >= self.y0 as f64
            && p.y <= (self.y1 + 1) as f64
    }
}

/// Horizontal pixel run `[x_start, x_end)` on row `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Run {
    pub y: usize,
    pub x_start: usize,
    pub x_end: usize,
}

/// 8-connected component labelling with dense labels from 1 in raster-scan
/// order of each component's first pixel. Label 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl Labels {
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel runs of each component, indexed by `label - 1`, in scan order.
    pub fn runs(&self) -> Vec<Vec<Run>> {
        let mut out = vec![Vec::new(); self.count];
        for y in 0..self.height {
            let row = &self.labels[y * self.width..(y + 1) * self.width];
            let mut x = 0;
            while x < self.width {
                let l = row[x];
                if l == 0 {
                    x += 1;
                    continue;
                }
                let start = x;
                while x < self.width && row[x] == l {
                    x += 1;
                }
                out[l as usize - 1].push(Run {
                    y,
                    x_start: start,
                    x_end: x,
                });
            }
        }
        out
    }
}

pub fn connected_components(mask: &Mask) -> Labels {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut count = 0usize;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.data()[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        let label = count as u32;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            for ny in y.saturating_sub(1)..(y + 2).min(h) {
                for nx in x.saturating_sub(1)..(x + 2).min(w) {
                    let j = ny * w + nx;
                    if mask.data()[j] && labels[j] == 0 {
                        labels[j] = label;
                        stack.push(j);
                    }
                }
            }
        }
    }
    Labels {
        width: w,
        height: h,
        labels,
        count,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionCandidate {
    pub id: usize,
    pub runs: Vec<Run>,
    pub area: usize,
    pub bbox: PixelBox,
}

impl RegionCandidate {
    fn from_runs(id: usize, runs: Vec<Run>) -> Self {
        let mut bbox = PixelBox::point(runs[0].x_start, runs[0].y);
        let mut area = 0;
        for r in &runs {
            bbox.include(r.x_start, r.y);
            bbox.include(r.x_end - 1, r.y);
            area += r.x_end - r.x_start;
        }
        Self {
            id,
            runs,
            area,
            bbox,
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        let first = self.runs.partition_point(|r| r.y < y);
        self.runs[first..]
            .iter()
            .take_while(|r| r.y == y)
            .any(|r| (r.x_start..r.x_end).contains(&x))
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.runs
            .iter()
            .flat_map(|r| (r.x_start..r.x_end).map(move |x| (x, r.y)))
    }
}

/// Connected text-region candidates of the region map.
pub fn segment_regions(region_map: &RasterMap, params: &CandidateParams) -> Vec<RegionCandidate> {
    let labels = connected_components(&region_map.threshold(params.region_threshold));
    labels
        .runs()
        .into_iter()
        .filter(|runs| {
            runs.iter().map(|r| r.x_end - r.x_start).sum::<usize>() >= params.min_region_area
        })
        .enumerate()
        .map(|(id, runs)| RegionCandidate::from_runs(id, runs))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCandidate {
    pub center: Point2,
    /// Estimated character radius (twice the radius of the shrunk blob).
    pub radius: f64,
    /// Mean character-map probability over the blob.
    pub confidence: f64,
    pub region: usize,
    pub area: usize,
}

/// Otsu threshold over values in `[0, 1]` using 256 bins; `None` when the
/// values carry no between-class variance.
pub fn otsu_threshold(values: &[f32]) -> Option<f32> {
    const BINS: usize = 256;
    let mut hist = [0usize; BINS];
    for &v in values {
        let b = ((v.clamp(0.0, 1.0) * BINS as f32) as usize).min(BINS - 1);
        hist[b] += 1;
    }
    let total = values.len() as f64;
    if total == 0.0 {
        return None;
    }
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best: Option<(f64, usize)> = None;
    for (k, &count) in hist.iter().enumerate().take(BINS - 1) {
        w0 += count as f64;
        sum0 += k as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(b, _)| between > b) {
            best = Some((between, k));
        }
    }
    best.filter(|(b, _)| *b > 0.0)
        .map(|(_, k)| (k + 1) as f32 / BINS as f32)
}

/// Character candidates inside each region: per-region Otsu threshold on the
/// character map, 8-connected blobs, radius doubled to undo the half-size
/// training masks.
pub fn extract_characters(
    char_map: &RasterMap,
    regions: &[RegionCandidate],
    params: &CandidateParams,
) -> Vec<CharCandidate> {
    let mut out = Vec::new();
    for region in regions {
        let values: Vec<f32> = region.pixels().map(|(x, y)| char_map.get(x, y)).collect();
        let threshold = otsu_threshold(&values)
            .unwrap_or(0.5)
            .clamp(params.char_threshold_min, params.char_threshold_max);

        let b = region.bbox;
        let (w, h) = (b.x1 - b.x0 + 1, b.y1 - b.y0 + 1);
        let mut local = Mask::new(w, h);
        for (x, y) in region.pixels() {
            if char_map.get(x, y) >= threshold {
                local.set(x - b.x0, y - b.y0, true);
            }
        }
        let labels = connected_components(&local);
        for runs in labels.runs() {
            let (mut sx, mut sy, mut sv, mut n) = (0.0, 0.0, 0.0, 0usize);
            for r in &runs {
                for x in r.x_start..r.x_end {
                    sx += (x + b.x0) as f64 + 0.5;
                    sy += (r.y + b.y0) as f64 + 0.5;
                    sv += char_map.get(x + b.x0, r.y + b.y0) as f64;
                    n += 1;
                }
            }
            let nf = n as f64;
            out.push(CharCandidate {
                center: Point2::new(sx / nf, sy / nf),
                radius: 2.0 * (nf / PI).sqrt(),
                confidence: (sv / nf).clamp(0.0, 1.0),
                region: region.id,
                area: n,
            });
        }
    }
    out
}

/// Linking orientation sampled between two characters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub orientation: Orientation,
    /// Valid (region-foreground) pixels in the corridor.
    pub pixels: usize,
    /// True when the corridor held no valid pixel and the segment
    /// orientation was used instead.
    pub fallback: bool,
}

/// Mean linking orientation over the corridor of pixels within
/// `max(r_a, r_b)` of the segment joining the two centers, restricted to
/// region foreground.
///
/// Values are averaged as axial data (angles doubled), so orientations on
/// either side of the vertical wrap average correctly.
pub fn sample_linking_orientation(
    orient_map: &RasterMap,
    region_map: &RasterMap,
    a: &CharCandidate,
    b: &CharCandidate,
    region_threshold: f32,
) -> LinkSample {
    // Canonical endpoint order keeps the pixel set identical for (a, b) and (b, a).
    let (p, q) = if (a.center.x, a.center.y) <= (b.center.x, b.center.y) {
        (a.center, b.center)
    } else {
        (b.center, a.center)
    };
    let reach = a.radius.max(b.radius);
    let (w, h) = (orient_map.width() as f64, orient_map.height() as f64);
    let x0 = (p.x.min(q.x) - reach - 0.5).floor().max(0.0) as usize;
    let y0 = (p.y.min(q.y) - reach - 0.5).floor().max(0.0) as usize;
    let x1 = (p.x.max(q.x) + reach).ceil().min(w) as usize;
    let y1 = (p.y.max(q.y) + reach).ceil().min(h) as usize;

    let (mut sc, mut ss, mut n) = (0.0f64, 0.0f64, 0usize);
    for y in y0..y1 {
        for x in x0..x1 {
            if region_map.get(x, y) < region_threshold {
                continue;
            }
            let c = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
            if distance_to_segment(c, p, q) > reach {
                continue;
            }
            let theta = denormalize_orientation(orient_map.get(x, y) as f64).radians();
            let (s, co) = (2.0 * theta).sin_cos();
            sc += co;
            ss += s;
            n += 1;
        }
    }
    let resultant = sc.hypot(ss);
    if n == 0 || resultant <= 1e-9 * n as f64 {
        return LinkSample {
            orientation: Orientation::of_segment(p, q),
            pixels: n,
            fallback: true,
        };
    }
    LinkSample {
        orientation: Orientation::wrap(0.5 * ss.atan2(sc)),
        pixels: n,
        fallback: false,
    }
}
