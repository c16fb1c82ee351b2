//! Text-line formation: similarity graph over character candidates,
//! maximum-spanning-tree partition, oriented boxes, word splitting and
//! multi-scale fusion.

pub mod fusion;
pub mod partition;
pub mod similarity;
pub mod words;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::CharCandidate;
use crate::geometry::{GeometryError, OrientedBox, Point2};

pub use fusion::fuse_multiscale;
pub use partition::{partition_lines, straightness, Partition};
pub use similarity::{
    build_similarity_graph, orientation_similarity, pair_similarity, spatial_similarity,
    SimilarityEdge, SimilarityGraph,
};
pub use words::{inter_word_splits, word_partition};

/// Default protection threshold: tree edges heavier than this are never cut.
pub const DEFAULT_TAU: f64 = 0.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineError {
    #[error("mean edge length must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("tau must lie in (0, 1], got {0}")]
    InvalidTau(f64),
    #[error("a clique needs at least one character")]
    EmptyClique,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionKind {
    Line,
    Word,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub kind: DetectionKind,
    pub bbox: OrientedBox,
    /// Mean confidence of the member characters.
    pub score: f64,
}

impl Detection {
    pub fn polygon(&self) -> Vec<Point2> {
        self.bbox.corners().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextLine {
    /// Indices into the image's character list, ordered along the box axis.
    pub chars: Vec<usize>,
    pub bbox: OrientedBox,
    pub region: usize,
}

impl TextLine {
    pub fn score(&self, chars: &[CharCandidate]) -> f64 {
        mean_confidence(chars, &self.chars)
    }
}

pub(crate) fn mean_confidence(chars: &[CharCandidate], members: &[usize]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    members.iter().map(|&i| chars[i].confidence).sum::<f64>() / members.len() as f64
}

/// Minimum-area rectangle enclosing the member character discs.
pub fn fit_oriented_box(chars: &[CharCandidate], members: &[usize]) -> OrientedBox {
    let discs: Vec<(Point2, f64)> = members
        .iter()
        .map(|&i| (chars[i].center, chars[i].radius))
        .collect();
    OrientedBox::enclosing(&[], &discs).expect("a text line has at least one character")
}

/// Sorts `members` by their projection on the axis of `bbox`.
pub fn order_along_axis(chars: &[CharCandidate], members: &mut [usize], bbox: &OrientedBox) {
    let (u, _) = bbox.axes();
    members.sort_by(|&a, &b| {
        chars[a]
            .center
            .dot(u)
            .total_cmp(&chars[b].center.dot(u))
            .then(a.cmp(&b))
    });
}

/// Canonical detection order: by box center, top to bottom then left to right.
pub fn sort_detections(dets: &mut [Detection]) {
    dets.sort_by(|a, b| {
        a.bbox
            .center
            .y
            .total_cmp(&b.bbox.center.y)
            .then(a.bbox.center.x.total_cmp(&b.bbox.center.x))
            .then(b.score.total_cmp(&a.score))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ch(x: f64, y: f64, r: f64) -> CharCandidate {
        CharCandidate {
            center: Point2::new(x, y),
            radius: r,
            confidence: 1.0,
            region: 0,
            area: 1,
        }
    }

    #[test]
    fn single_char_box_is_square() {
        let b = fit_oriented_box(&[ch(5.0, 5.0, 3.0)], &[0]);
        assert_abs_diff_eq!(b.width, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.height, 6.0, epsilon = 1e-12);
        assert_eq!(b.angle.radians(), 0.0);
    }

    #[test]
    fn two_char_box_follows_axis() {
        let theta = -0.7;
        let a = Point2::new(30.0, 30.0);
        let b = a + Point2::unit(theta) * 15.0;
        let bx = fit_oriented_box(&[ch(a.x, a.y, 2.0), ch(b.x, b.y, 2.0)], &[0, 1]);
        assert_abs_diff_eq!(bx.width, 19.0, epsilon = 1e-9);
        assert_abs_diff_eq!(bx.height, 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(bx.angle.radians(), theta, epsilon = 1e-9);
    }

    #[test]
    fn curved_line_box_contains_every_disc() {
        let chars: Vec<CharCandidate> = (0..5)
            .map(|k| {
                let a = PI * (0.2 + 0.15 * k as f64);
                ch(
                    50.0 + 30.0 * a.cos(),
                    50.0 + 30.0 * a.sin(),
                    3.0 + 0.5 * k as f64,
                )
            })
            .collect();
        let bx = fit_oriented_box(&chars, &[0, 1, 2, 3, 4]);
        // Containment oracle over sampled disc boundary points.
        for c in &chars {
            for s in 0..360 {
                let p = c.center + Point2::unit(s as f64 * PI / 180.0) * c.radius;
                assert!(bx.contains(p, 1e-9), "boundary point {p:?} outside");
            }
        }
    }
}
