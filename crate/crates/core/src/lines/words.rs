//! Splitting text lines into words at wide inter-character gaps.

use crate::candidates::CharCandidate;
use crate::geometry::{OrientedBox, Point2};

use super::{mean_confidence, Detection, DetectionKind, TextLine};

/// Lines whose angle is within this many radians of horizontal get
/// axis-aligned word boxes.
pub const AXIS_ALIGNED_WORD_ANGLE: f64 = 5.0 * std::f64::consts::PI / 180.0;

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Indices `k` of gaps (between characters `k` and `k + 1`) that separate
/// words: wider than twice the median gap and 1.5 times the mean radius.
pub fn inter_word_splits(gaps: &[f64], mean_radius: f64) -> Vec<usize> {
    if gaps.len() < 2 {
        return Vec::new();
    }
    let m = median(gaps);
    gaps.iter()
        .enumerate()
        .filter(|(_, &g)| g > 2.0 * m && g > 1.5 * mean_radius)
        .map(|(k, _)| k)
        .collect()
}

/// Edge-to-edge gaps between consecutive characters along the line axis.
pub fn line_gaps(line: &TextLine, chars: &[CharCandidate]) -> Vec<f64> {
    let (u, _) = line.bbox.axes();
    line.chars
        .windows(2)
        .map(|w| {
            let (a, b) = (&chars[w[0]], &chars[w[1]]);
            (b.center - a.center).dot(u).abs() - a.radius - b.radius
        })
        .collect()
}

/// Word detections of one line; characters must be ordered along the axis.
pub fn word_partition(line: &TextLine, chars: &[CharCandidate]) -> Vec<Detection> {
    let splits = if line.chars.len() <= 2 {
        Vec::new()
    } else {
        let mean_r =
            line.chars.iter().map(|&i| chars[i].radius).sum::<f64>() / line.chars.len() as f64;
        inter_word_splits(&line_gaps(line, chars), mean_r)
    };
    let theta = line.bbox.angle.radians();
    let mut words = Vec::with_capacity(splits.len() + 1);
    let mut start = 0;
    for end in splits.iter().map(|&k| k + 1).chain([line.chars.len()]) {
        let members = &line.chars[start..end];
        let discs: Vec<(Point2, f64)> = members
            .iter()
            .map(|&i| (chars[i].center, chars[i].radius))
            .collect();
        let bbox = if theta.abs() < AXIS_ALIGNED_WORD_ANGLE {
            OrientedBox::axis_aligned_enclosing(&[], &discs)
        } else {
            OrientedBox::enclosing_at(theta, &[], &discs)
        }
        .expect("a word has at least one character");
        words.push(Detection {
            kind: DetectionKind::Word,
            bbox,
            score: mean_confidence(chars, members),
        });
        start = end;
    }
    words
}
