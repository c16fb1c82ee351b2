#![allow(dead_code)]

use textgraph::eval::polygon_iou;
use textgraph::lines::TextLine;
use textgraph::pipeline::ScaleReport;
use textgraph::synth::Scene;

/// Ground-truth (line, char) for a detected character: the gt character
/// whose disc contains the detected center.
fn gt_slot(scene: &Scene, center: textgraph::geometry::Point2) -> Option<(usize, usize)> {
    scene.lines.iter().enumerate().find_map(|(li, l)| {
        l.centers
            .iter()
            .position(|c| c.distance(center) <= l.radius)
            .map(|ci| (li, ci))
    })
}

/// True when the detected lines partition the ground-truth characters
/// exactly as the scene's lines do.
pub fn exact_grouping(scene: &Scene, report: &ScaleReport) -> bool {
    let mut seen: Vec<Vec<bool>> = scene
        .lines
        .iter()
        .map(|l| vec![false; l.centers.len()])
        .collect();
    let mut line_used = vec![false; scene.lines.len()];
    if report.lines.len() != scene.lines.len() {
        return false;
    }
    for line in &report.lines {
        let mut gt_line = None;
        for &i in &line.chars {
            let Some((li, ci)) = gt_slot(scene, report.chars[i].center) else {
                return false;
            };
            if seen[li][ci] || gt_line.is_some_and(|g| g != li) {
                return false;
            }
            seen[li][ci] = true;
            gt_line = Some(li);
        }
        let li = gt_line.expect("lines are non-empty");
        if line_used[li] || line.chars.len() != scene.lines[li].centers.len() {
            return false;
        }
        line_used[li] = true;
    }
    seen.iter().flatten().all(|&s| s)
}

/// The gt line that most of this line's characters belong to.
pub fn gt_line_of(scene: &Scene, report: &ScaleReport, line: &TextLine) -> Option<usize> {
    let mut votes = vec![0usize; scene.lines.len()];
    for &i in &line.chars {
        if let Some((li, _)) = gt_slot(scene, report.chars[i].center) {
            votes[li] += 1;
        }
    }
    let (best, n) = votes.iter().enumerate().max_by_key(|(_, n)| **n)?;
    (*n > 0).then_some(best)
}

/// IoU of each detected line box with the region of its gt line.
pub fn line_ious(scene: &Scene, report: &ScaleReport) -> Vec<f64> {
    report
        .lines
        .iter()
        .map(|l| match gt_line_of(scene, report, l) {
            Some(g) => polygon_iou(&l.bbox.corners(), &scene.lines[g].region),
            None => 0.0,
        })
        .collect()
}
