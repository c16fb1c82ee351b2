//! Full detection: maps to candidates to text lines to detections.

use rayon::prelude::*;
use thiserror::Error;

use crate::candidates::{
    extract_characters, segment_regions, CandidateParams, CharCandidate, RegionCandidate,
};
use crate::geometry::{maximum_spanning_tree, GraphEdge, OrientedBox, Point2};
use crate::lines::{
    build_similarity_graph, fuse_multiscale, order_along_axis, partition_lines, sort_detections,
    word_partition, Detection, DetectionKind, LineError, TextLine, DEFAULT_TAU,
};
use crate::raster::{MapSet, RasterError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Line(#[from] LineError),
    #[error("scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("edge ({a}, {b}) with weight {weight} > tau {tau} was cut")]
    ProtectedEdgeCut {
        a: usize,
        b: usize,
        weight: f64,
        tau: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub tau: f64,
    pub iou_thresh: f64,
    /// Emit word detections instead of line detections.
    pub words: bool,
    pub scales: Vec<f64>,
    pub candidates: CandidateParams,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            iou_thresh: 0.5,
            words: false,
            scales: vec![1.0],
            candidates: CandidateParams::default(),
        }
    }
}

/// Intermediate results at one scale, in that scale's pixel coordinates.
#[derive(Debug, Clone)]
pub struct ScaleReport {
    pub scale: f64,
    pub width: usize,
    pub height: usize,
    pub regions: usize,
    pub chars: Vec<CharCandidate>,
    pub lines: Vec<TextLine>,
    /// Tree edges removed by the partition, with global character indices.
    pub cut_edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone)]
pub struct DetectionReport {
    /// Final detections in original image coordinates, canonical order.
    pub detections: Vec<Detection>,
    pub scales: Vec<ScaleReport>,
}

/// Line box: minimum-area rectangle over the member discs and the region
/// pixels nearest to this line's characters.
fn line_box(chars: &[CharCandidate], members: &[usize], pixels: &[Point2]) -> OrientedBox {
    let discs: Vec<(Point2, f64)> = members
        .iter()
        .map(|&i| (chars[i].center, chars[i].radius))
        .collect();
    OrientedBox::enclosing(pixels, &discs).expect("a line has at least one character")
}

struct RegionLines {
    lines: Vec<TextLine>,
    cut_edges: Vec<GraphEdge>,
}

fn region_lines(
    maps: &MapSet,
    region: &RegionCandidate,
    chars: &[CharCandidate],
    ids: &[usize],
    config: &DetectConfig,
) -> Result<RegionLines, PipelineError> {
    let local: Vec<CharCandidate> = ids.iter().map(|&i| chars[i]).collect();
    let graph = build_similarity_graph(
        &local,
        &maps.orientation,
        &maps.region,
        config.candidates.region_threshold,
    )?;
    let tree = maximum_spanning_tree(&graph.graph);
    let points: Vec<Point2> = local.iter().map(|c| c.center).collect();
    let partition = partition_lines(&points, &tree, config.tau)?;
    if let Some(e) = partition.cut_edges.iter().find(|e| e.weight > config.tau) {
        return Err(PipelineError::ProtectedEdgeCut {
            a: ids[e.a],
            b: ids[e.b],
            weight: e.weight,
            tau: config.tau,
        });
    }

    // Assign each region pixel to the cluster whose disc edge is nearest.
    let mut cluster_of = vec![0usize; local.len()];
    for (k, c) in partition.clusters.iter().enumerate() {
        for &v in c {
            cluster_of[v] = k;
        }
    }
    let mut pixels: Vec<Vec<Point2>> = vec![Vec::new(); partition.clusters.len()];
    for (x, y) in region.pixels() {
        let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
        let nearest = local
            .iter()
            .enumerate()
            .map(|(i, c)| (p.distance(c.center) - c.radius, i))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, i)| i)
            .expect("region has characters");
        pixels[cluster_of[nearest]].push(p);
    }

    let mut lines = Vec::with_capacity(partition.clusters.len());
    for (cluster, px) in partition.clusters.iter().zip(&pixels) {
        let mut members: Vec<usize> = cluster.iter().map(|&v| ids[v]).collect();
        let bbox = line_box(chars, &members, px);
        order_along_axis(chars, &mut members, &bbox);
        lines.push(TextLine {
            chars: members,
            bbox,
            region: region.id,
        });
    }
    let cut_edges = partition
        .cut_edges
        .iter()
        .map(|e| GraphEdge {
            a: ids[e.a],
            b: ids[e.b],
            weight: e.weight,
        })
        .collect();
    Ok(RegionLines { lines, cut_edges })
}

/// Runs candidate extraction and line formation on one set of maps.
pub fn detect_single_scale(
    maps: &MapSet,
    config: &DetectConfig,
    scale: f64,
) -> Result<ScaleReport, PipelineError> {
    let regions = segment_regions(&maps.region, &config.candidates);
    let chars = extract_characters(&maps.character, &regions, &config.candidates);
    let mut by_region: Vec<Vec<usize>> = vec![Vec::new(); regions.len()];
    for (i, c) in chars.iter().enumerate() {
        by_region[c.region].push(i);
    }
    let results: Vec<RegionLines> = regions
        .par_iter()
        .zip(&by_region)
        .filter(|(_, ids)| !ids.is_empty())
        .map(|(region, ids)| region_lines(maps, region, &chars, ids, config))
        .collect::<Result<_, _>>()?;
    let mut lines = Vec::new();
    let mut cut_edges = Vec::new();
    for r in results {
        lines.extend(r.lines);
        cut_edges.extend(r.cut_edges);
    }
    Ok(ScaleReport {
        scale,
        width: maps.width(),
        height: maps.height(),
        regions: regions.len(),
        chars,
        lines,
        cut_edges,
    })
}

fn scaled_dims(w: usize, h: usize, s: f64) -> (usize, usize) {
    (
        ((w as f64 * s).round() as usize).max(1),
        ((h as f64 * s).round() as usize).max(1),
    )
}

/// Detects text at every configured scale and fuses the results.
pub fn detect(maps: &MapSet, config: &DetectConfig) -> Result<DetectionReport, PipelineError> {
    maps.region.same_dims(&maps.character)?;
    maps.region.same_dims(&maps.orientation)?;
    let (w, h) = (maps.width(), maps.height());
    let mut scales = Vec::with_capacity(config.scales.len());
    let mut per_scale = Vec::with_capacity(config.scales.len());
    for &s in &config.scales {
        if !(s > 0.0 && s.is_finite()) {
            return Err(PipelineError::BadScale(s));
        }
        let (sw, sh) = scaled_dims(w, h, s);
        let report = if (sw, sh) == (w, h) {
            detect_single_scale(maps, config, s)?
        } else {
            detect_single_scale(&maps.resized(sw, sh), config, s)?
        };
        let (bx, by) = (w as f64 / sw as f64, h as f64 / sh as f64);
        let mut dets = Vec::new();
        for line in &report.lines {
            if config.words {
                dets.extend(word_partition(line, &report.chars));
            } else {
                dets.push(Detection {
                    kind: DetectionKind::Line,
                    bbox: line.bbox,
                    score: line.score(&report.chars),
                });
            }
        }
        for d in &mut dets {
            d.bbox = d.bbox.scaled(bx, by);
        }
        per_scale.push(dets);
        scales.push(report);
    }
    let detections = if per_scale.len() > 1 {
        fuse_multiscale(&per_scale, config.iou_thresh)
    } else {
        let mut d = per_scale.pop().unwrap_or_default();
        sort_detections(&mut d);
        d
    };
    Ok(DetectionReport { detections, scales })
}
