//! Merging detections found at several image scales.

use crate::eval::polygon_iou;

use super::{sort_detections, Detection};

/// Greedy non-maximum suppression by score: a detection is dropped when
/// it overlaps an already kept one with IoU `>= iou_thresh`. Output is in
/// canonical order.
pub fn fuse_multiscale(per_scale: &[Vec<Detection>], iou_thresh: f64) -> Vec<Detection> {
    let mut all: Vec<Detection> = per_scale.iter().flatten().copied().collect();
    all.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.center.y.total_cmp(&b.bbox.center.y))
            .then(a.bbox.center.x.total_cmp(&b.bbox.center.x))
    });
    let mut kept: Vec<(Detection, Vec<_>)> = Vec::new();
    for d in all {
        let poly = d.polygon();
        if kept
            .iter()
            .filter(|(k, _)| k.kind == d.kind)
            .all(|(_, kp)| polygon_iou(&poly, kp) < iou_thresh)
        {
            kept.push((d, poly));
        }
    }
    let mut out: Vec<Detection> = kept.into_iter().map(|(d, _)| d).collect();
    sort_detections(&mut out);
    out
}
