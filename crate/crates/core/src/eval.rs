//! IoU matching of detections against ground truth and P/R/F scores.

use serde::{Deserialize, Serialize};

use crate::geometry::polygon::{area, intersection_area};
use crate::geometry::Point2;

/// Intersection over union of two simple polygons; zero if either is degenerate.
pub fn polygon_iou(a: &[Point2], b: &[Point2]) -> f64 {
    let (aa, ab) = (area(a), area(b));
    if !(aa > 0.0 && ab > 0.0) {
        return 0.0;
    }
    let inter = intersection_area(a, b).clamp(0.0, aa.min(ab));
    let union = aa + ab - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub detection: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchPair>,
    pub unmatched_detections: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

impl MatchResult {
    pub fn detection_count(&self) -> usize {
        self.pairs.len() + self.unmatched_detections.len()
    }

    pub fn gt_count(&self) -> usize {
        self.pairs.len() + self.unmatched_gts.len()
    }
}

/// Greedy one-to-one matching in descending IoU order; ties go to the
/// lower (detection, gt) index pair.
pub fn match_detections<D, G>(dets: &[D], gts: &[G], iou_thresh: f64) -> MatchResult
where
    D: AsRef<[Point2]>,
    G: AsRef<[Point2]>,
{
    let mut cands = Vec::new();
    for (i, d) in dets.iter().enumerate() {
        for (j, g) in gts.iter().enumerate() {
            let iou = polygon_iou(d.as_ref(), g.as_ref());
            if iou >= iou_thresh && iou > 0.0 {
                cands.push(MatchPair {
                    detection: i,
                    gt: j,
                    iou,
                });
            }
        }
    }
    cands.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then((a.detection, a.gt).cmp(&(b.detection, b.gt)))
    });
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for c in cands {
        if det_used[c.detection] || gt_used[c.gt] {
            continue;
        }
        det_used[c.detection] = true;
        gt_used[c.gt] = true;
        pairs.push(c);
    }
    pairs.sort_by_key(|p| p.detection);
    MatchResult {
        pairs,
        unmatched_detections: (0..dets.len()).filter(|&i| !det_used[i]).collect(),
        unmatched_gts: (0..gts.len()).filter(|&j| !gt_used[j]).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Scores from raw counts.
pub fn prf_counts(matched: usize, detections: usize, gts: usize) -> Prf {
    let precision = match (detections, gts) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (d, _) => matched as f64 / d as f64,
    };
    let recall = if gts == 0 {
        1.0
    } else {
        matched as f64 / gts as f64
    };
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf {
        precision,
        recall,
        f_measure,
    }
}

pub fn prf(m: &MatchResult) -> Prf {
    prf_counts(m.pairs.len(), m.detection_count(), m.gt_count())
}

/// Micro-averaged scores over several images.
pub fn aggregate(results: &[MatchResult]) -> Prf {
    let matched = results.iter().map(|m| m.pairs.len()).sum();
    let dets = results.iter().map(|m| m.detection_count()).sum();
    let gts = results.iter().map(|m| m.gt_count()).sum();
    prf_counts(matched, dets, gts)
}
