//! JSON detection lists.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::polygon::signed_area;
use crate::geometry::Point2;
use crate::lines::{Detection, DetectionKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub kind: DetectionKind,
    /// Four corners `x1, y1, ..., x4, y4`, clockwise on screen, starting at
    /// the top-left-most corner.
    pub polygon: [f64; 8],
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionFile {
    pub image_id: String,
    pub detections: Vec<DetectionRecord>,
}

fn round4(v: f64) -> f64 {
    let r = (v * 1e4).round() / 1e4;
    // Avoid "-0.0" in the output.
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Orders corners clockwise on screen (y down) from the corner with the
/// smallest `x + y`, ties broken by smaller `y`.
pub fn canonical_corners(corners: &[Point2; 4]) -> [Point2; 4] {
    let mut c = *corners;
    if signed_area(&c) < 0.0 {
        c.reverse();
    }
    let start = (0..4)
        .min_by(|&a, &b| {
            (c[a].x + c[a].y)
                .total_cmp(&(c[b].x + c[b].y))
                .then(c[a].y.total_cmp(&c[b].y))
        })
        .unwrap();
    [
        c[start],
        c[(start + 1) % 4],
        c[(start + 2) % 4],
        c[(start + 3) % 4],
    ]
}

impl DetectionRecord {
    pub fn from_detection(d: &Detection) -> Self {
        let c = canonical_corners(&d.bbox.corners());
        let mut polygon = [0.0; 8];
        for (k, p) in c.iter().enumerate() {
            polygon[2 * k] = round4(p.x);
            polygon[2 * k + 1] = round4(p.y);
        }
        Self {
            kind: d.kind,
            polygon,
            score: (d.score.clamp(0.0, 1.0) * 1e6).round() / 1e6,
        }
    }

    pub fn points(&self) -> Vec<Point2> {
        self.polygon
            .chunks(2)
            .map(|c| Point2::new(c[0], c[1]))
            .collect()
    }
}

impl DetectionFile {
    pub fn new(image_id: impl Into<String>, detections: &[Detection]) -> Self {
        Self {
            image_id: image_id.into(),
            detections: detections
                .iter()
                .map(DetectionRecord::from_detection)
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("detections serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn read(path: &Path) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()).into())
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_json())
    }
}
