//! Ground-truth label maps from polygon annotations.
//!
//! Three maps are produced per image: a binary text-region map, a binary
//! character map built from character polygons shrunk to half size about
//! their centroids, and a soft linking-orientation map whose foreground
//! pixels hold `(theta + pi/2) / pi`.
//!
//! A pixel belongs to a polygon when its center `(x + 0.5, y + 0.5)` lies
//! inside or on the boundary of the polygon.

use std::f64::consts::{FRAC_PI_2, PI};

use log::warn;
use thiserror::Error;

use crate::geometry::polygon::{self, bounding_box, centroid, is_simple, scale_about};
use crate::geometry::{included_angle, Orientation, Point2};
use crate::raster::{Channel, Mask, RasterMap};

/// Character polygons may exceed their region's bounding box by this much.
pub const CHARACTER_BBOX_SLACK: f64 = 2.0;
/// Consecutive character segments turning more than this mark a curved chain.
pub const CURVED_TURN_THRESHOLD: f64 = 5.0 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrientationSource {
    /// Derive from geometry: the character chain for curved regions, the
    /// longer principal axis of the region polygon otherwise.
    Auto,
    Explicit(Orientation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionAnnotation {
    pub polygon: Vec<Point2>,
    /// Character polygons in reading order.
    pub characters: Vec<Vec<Point2>>,
    pub orientation: OrientationSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    width: usize,
    height: usize,
    regions: Vec<RegionAnnotation>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("image dimensions must be positive, got {0}x{1}")]
    BadDims(usize, usize),
    #[error("region {0}: polygon needs at least 3 vertices")]
    TooFewVertices(usize),
    #[error("region {0}: polygon is not simple")]
    NotSimple(usize),
    #[error("region {region}, character {character}: polygon is not simple")]
    CharacterNotSimple { region: usize, character: usize },
    #[error("region {region}, character {character}: outside the region bounding box")]
    CharacterOutsideRegion { region: usize, character: usize },
    #[error("region {0}: non-finite coordinate")]
    NonFinite(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelError {
    #[error("region {0}: orientation cannot be derived from its geometry")]
    UnderivableOrientation(usize),
}

impl AnnotationSet {
    pub fn new(
        width: usize,
        height: usize,
        regions: Vec<RegionAnnotation>,
    ) -> Result<Self, AnnotationError> {
        if width == 0 || height == 0 {
            return Err(AnnotationError::BadDims(width, height));
        }
        for (i, r) in regions.iter().enumerate() {
            if r.polygon.len() < 3 {
                return Err(AnnotationError::TooFewVertices(i));
            }
            let finite = r
                .polygon
                .iter()
                .chain(r.characters.iter().flatten())
                .all(|p| p.is_finite());
            if !finite {
                return Err(AnnotationError::NonFinite(i));
            }
            if !is_simple(&r.polygon) {
                return Err(AnnotationError::NotSimple(i));
            }
            let (lo, hi) = bounding_box(&r.polygon);
            for (k, ch) in r.characters.iter().enumerate() {
                if ch.len() < 3 || !is_simple(ch) {
                    return Err(AnnotationError::CharacterNotSimple {
                        region: i,
                        character: k,
                    });
                }
                let inside = ch.iter().all(|p| {
                    p.x >= lo.x - CHARACTER_BBOX_SLACK
                        && p.x <= hi.x + CHARACTER_BBOX_SLACK
                        && p.y >= lo.y - CHARACTER_BBOX_SLACK
                        && p.y <= hi.y + CHARACTER_BBOX_SLACK
                });
                if !inside {
                    return Err(AnnotationError::CharacterOutsideRegion {
                        region: i,
                        character: k,
                    });
                }
            }
        }
        Ok(Self {
            width,
            height,
            regions,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self, AnnotationError> {
        Self::new(width, height, Vec::new())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn regions(&self) -> &[RegionAnnotation] {
        &self.regions
    }

    /// Rotates every polygon by `angle` radians about `pivot`; explicit
    /// orientations turn with it.
    pub fn rotated(&self, pivot: Point2, angle: f64) -> Result<Self, AnnotationError> {
        let rot = |poly: &Vec<Point2>| -> Vec<Point2> {
            poly.iter().map(|p| p.rotated_about(pivot, angle)).collect()
        };
        let regions = self
            .regions
            .iter()
            .map(|r| RegionAnnotation {
                polygon: rot(&r.polygon),
                characters: r.characters.iter().map(rot).collect(),
                orientation: match r.orientation {
                    OrientationSource::Auto => OrientationSource::Auto,
                    OrientationSource::Explicit(o) => {
                        OrientationSource::Explicit(Orientation::wrap(o.radians() + angle))
                    }
                },
            })
            .collect();
        Self::new(self.width, self.height, regions)
    }
}

/// Sets every pixel whose center lies in `poly`. Returns true when part of
/// the polygon falls outside the image.
fn rasterize(mask: &mut Mask, poly: &[Point2]) -> bool {
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    let (lo, hi) = bounding_box(poly);
    let clipped = lo.x < 0.0 || lo.y < 0.0 || hi.x > w || hi.y > h;
    let x0 = (lo.x - 0.5).ceil().max(0.0) as usize;
    let y0 = (lo.y - 0.5).ceil().max(0.0) as usize;
    let x1 = ((hi.x - 0.5).floor().min(w - 1.0)).max(-1.0);
    let y1 = ((hi.y - 0.5).floor().min(h - 1.0)).max(-1.0);
    if x1 < 0.0 || y1 < 0.0 {
        return clipped;
    }
    for y in y0..=y1 as usize {
        for x in x0..=x1 as usize {
            if polygon::contains(poly, Point2::new(x as f64 + 0.5, y as f64 + 0.5)) {
                mask.set(x, y, true);
            }
        }
    }
    clipped
}

pub fn region_mask(ann: &AnnotationSet) -> Mask {
    let mut mask = Mask::new(ann.width, ann.height);
    for (i, r) in ann.regions.iter().enumerate() {
        if rasterize(&mut mask, &r.polygon) {
            warn!("region {i} extends outside the image and was clipped");
        }
    }
    mask
}

pub fn gen_region_map(ann: &AnnotationSet) -> RasterMap {
    region_mask(ann).to_raster(Channel::Region)
}

/// Half-size copy of a character polygon, anchored at its area centroid.
pub fn shrink_character(poly: &[Point2]) -> Vec<Point2> {
    scale_about(poly, centroid(poly), 0.5)
}

pub fn gen_character_map(ann: &AnnotationSet) -> RasterMap {
    let mut mask = Mask::new(ann.width, ann.height);
    for (i, r) in ann.regions.iter().enumerate() {
        if r.characters.is_empty() {
            warn!(
                "region {i} has no character polygons; it contributes nothing to the character map"
            );
        }
        for ch in &r.characters {
            rasterize(&mut mask, &shrink_character(ch));
        }
    }
    mask.to_raster(Channel::Character)
}

/// Maps an orientation in `[-pi/2, pi/2)` onto `[0, 1)`.
pub fn normalize_orientation(theta: Orientation) -> f64 {
    let v = (theta.radians() + FRAC_PI_2) / PI;
    if v >= 1.0 {
        0.0
    } else {
        v.max(0.0)
    }
}

/// Inverse of [`normalize_orientation`].
pub fn denormalize_orientation(value: f64) -> Orientation {
    Orientation::wrap(value * PI - FRAC_PI_2)
}

/// Orientation assignment resolved for one region.
#[derive(Debug, Clone, PartialEq)]
pub enum OrientationRule {
    Constant(Orientation),
    /// Ordered character centroids of a curved chain.
    Chain(Vec<Point2>),
}

impl OrientationRule {
    pub fn at(&self, p: Point2) -> Orientation {
        match self {
            OrientationRule::Constant(o) => *o,
            OrientationRule::Chain(centers) => {
                let nearest = centers
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.distance_sq(p).total_cmp(&b.1.distance_sq(p)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                let neighbour = match (nearest.checked_sub(1), centers.get(nearest + 1)) {
                    (Some(prev), Some(next)) => {
                        if centers[prev].distance_sq(p) <= next.distance_sq(p) {
                            prev
                        } else {
                            nearest + 1
                        }
                    }
                    (Some(prev), None) => prev,
                    (None, _) => nearest + 1,
                };
                let (a, b) = if nearest < neighbour {
                    (centers[nearest], centers[neighbour])
                } else {
                    (centers[neighbour], centers[nearest])
                };
                Orientation::of_segment(a, b)
            }
        }
    }
}

fn is_curved_chain(centers: &[Point2]) -> bool {
    centers.windows(3).any(|w| {
        included_angle(
            Orientation::of_segment(w[0], w[1]),
            Orientation::of_segment(w[1], w[2]),
        ) > CURVED_TURN_THRESHOLD
    })
}

pub fn orientation_rule(
    index: usize,
    region: &RegionAnnotation,
) -> Result<OrientationRule, LabelError> {
    match region.orientation {
        OrientationSource::Explicit(o) => Ok(OrientationRule::Constant(o)),
        OrientationSource::Auto => {
            let centers: Vec<Point2> = region.characters.iter().map(|c| centroid(c)).collect();
            if centers.len() >= 3 && is_curved_chain(&centers) {
                return Ok(OrientationRule::Chain(centers));
            }
            polygon::principal_axis(&region.polygon)
                .map(OrientationRule::Constant)
                .ok_or(LabelError::UnderivableOrientation(index))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationLabels {
    pub map: RasterMap,
    /// Pixels where the orientation value is meaningful (region foreground).
    pub valid: Mask,
}

/// Orientation label map. Background pixels hold 0 and are marked invalid;
/// where regions overlap the first region in annotation order wins.
pub fn gen_orientation_map(ann: &AnnotationSet) -> Result<OrientationLabels, LabelError> {
    let rules = ann
        .regions
        .iter()
        .enumerate()
        .map(|(i, r)| orientation_rule(i, r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut map = RasterMap::zeros(ann.width, ann.height, Channel::Orientation);
    let mut valid = Mask::new(ann.width, ann.height);
    for (region, rule) in ann.regions.iter().zip(&rules) {
        let mut own = Mask::new(ann.width, ann.height);
        rasterize(&mut own, &region.polygon);
        for y in 0..ann.height {
            for x in 0..ann.width {
                if own.get(x, y) && !valid.get(x, y) {
                    let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                    map.set(x, y, normalize_orientation(rule.at(p)) as f32);
                    valid.set(x, y, true);
                }
            }
        }
    }
    Ok(OrientationLabels { map, valid })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMaps {
    pub region: RasterMap,
    pub character: RasterMap,
    pub orientation: OrientationLabels,
}

pub fn gen_label_maps(ann: &AnnotationSet) -> Result<LabelMaps, LabelError> {
    Ok(LabelMaps {
        region: gen_region_map(ann),
        character: gen_character_map(ann),
        orientation: gen_orientation_map(ann)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point2> {
        vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ]
    }

    fn region(poly: Vec<Point2>) -> RegionAnnotation {
        RegionAnnotation {
            polygon: poly,
            characters: vec![],
            orientation: OrientationSource::Auto,
        }
    }

    fn disc(c: Point2, r: f64, n: usize) -> Vec<Point2> {
        (0..n)
            .map(|k| c + Point2::unit(2.0 * PI * k as f64 / n as f64) * r)
            .collect()
    }

    #[test]
    fn empty_annotation_gives_zero_map() {
        let ann = AnnotationSet::empty(8, 5).unwrap();
        assert!(gen_region_map(&ann).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rectangle_covers_expected_pixel_centers() {
        let ann = AnnotationSet::new(10, 10, vec![region(rect(2.0, 2.0, 6.0, 4.0))]).unwrap();
        let m = gen_region_map(&ann);
        for y in 0..10 {
            for x in 0..10 {
                let expect = (2..6).contains(&x) && (2..4).contains(&y);
                assert_eq!(m.get(x, y) == 1.0, expect, "pixel ({x}, {y})");
            }
        }
    }

    #[test]
    fn overlapping_polygons_union() {
        let ann = AnnotationSet::new(
            10,
            10,
            vec![
                region(rect(1.0, 1.0, 6.0, 6.0)),
                region(rect(4.0, 4.0, 9.0, 9.0)),
            ],
        )
        .unwrap();
        let m = gen_region_map(&ann);
        assert!(m.data().iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(m.data().iter().filter(|&&v| v == 1.0).count(), 25 + 25 - 4);
    }

    #[test]
    fn square_character_shrinks_to_half() {
        let ch = rect(10.2, 10.2, 20.2, 20.2);
        let ann = AnnotationSet::new(
            30,
            30,
            vec![RegionAnnotation {
                polygon: rect(8.0, 8.0, 22.0, 22.0),
                characters: vec![ch],
                orientation: OrientationSource::Auto,
            }],
        )
        .unwrap();
        let m = gen_character_map(&ann);
        // Shrunk square spans [12.7, 17.7]: pixel centers 13.5..=17.5 on each axis.
        for y in 0..30 {
            for x in 0..30 {
                let expect = (13..=17).contains(&x) && (13..=17).contains(&y);
                assert_eq!(m.get(x, y) == 1.0, expect, "pixel ({x}, {y})");
            }
        }
    }

    #[test]
    fn tiny_character_vanishes() {
        let ann = AnnotationSet::new(
            10,
            10,
            vec![RegionAnnotation {
                polygon: rect(1.0, 1.0, 8.0, 8.0),
                characters: vec![rect(3.6, 3.6, 4.6, 4.6)],
                orientation: OrientationSource::Auto,
            }],
        )
        .unwrap();
        assert!(gen_character_map(&ann).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn disc_character_area_oracle() {
        let c = Point2::new(20.3, 19.7);
        let ann = AnnotationSet::new(
            40,
            40,
            vec![RegionAnnotation {
                polygon: rect(5.0, 5.0, 35.0, 35.0),
                characters: vec![disc(c, 8.0, 64)],
                orientation: OrientationSource::Auto,
            }],
        )
        .unwrap();
        let m = gen_character_map(&ann);
        let area = m.data().iter().filter(|&&v| v == 1.0).count() as f64;
        // Oracle: count pixel centers inside the radius-4 circle directly.
        let mut oracle = 0usize;
        for y in 0..40 {
            for x in 0..40 {
                let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                if p.distance(c) <= 4.0 {
                    oracle += 1;
                }
            }
        }
        let target = PI * 16.0;
        assert!((area - target).abs() <= 0.15 * target, "area {area}");
        assert!((area - oracle as f64).abs() <= 0.15 * target);
    }

    #[test]
    fn normalize_examples_and_inverse() {
        assert_abs_diff_eq!(normalize_orientation(Orientation::wrap(0.0)), 0.5);
        assert_abs_diff_eq!(normalize_orientation(Orientation::wrap(-FRAC_PI_2)), 0.0);
        assert_abs_diff_eq!(normalize_orientation(Orientation::wrap(PI / 4.0)), 0.75);
        for k in 0..100 {
            let v = k as f64 / 100.0;
            assert_abs_diff_eq!(
                normalize_orientation(denormalize_orientation(v)),
                v,
                epsilon = 1e-12
            );
            let t = Orientation::wrap(-FRAC_PI_2 + PI * k as f64 / 100.0);
            assert_abs_diff_eq!(
                denormalize_orientation(normalize_orientation(t)).radians(),
                t.radians(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn orientation_map_values() {
        let horizontal =
            AnnotationSet::new(30, 30, vec![region(rect(2.0, 10.0, 28.0, 16.0))]).unwrap();
        let labels = gen_orientation_map(&horizontal).unwrap();
        let region = gen_region_map(&horizontal);
        for y in 0..30 {
            for x in 0..30 {
                if region.get(x, y) == 1.0 {
                    assert!(labels.valid.get(x, y));
                    assert_abs_diff_eq!(labels.map.get(x, y), 0.5, epsilon = 1e-6);
                } else {
                    assert!(!labels.valid.get(x, y));
                    assert_eq!(labels.map.get(x, y), 0.0);
                }
            }
        }

        let c = Point2::new(15.0, 15.0);
        let diag = horizontal.rotated(c, PI / 4.0).unwrap();
        let labels = gen_orientation_map(&diag).unwrap();
        for (v, ok) in labels.map.data().iter().zip(labels.valid.data()) {
            if *ok {
                assert_abs_diff_eq!(*v, 0.75, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn underivable_orientation_is_an_error() {
        let sliver = vec![
            Point2::new(1.0, 1.0),
            Point2::new(5.0, 1.0),
            Point2::new(3.0, 1.0),
        ];
        let ann = AnnotationSet::new(10, 10, vec![region(sliver)]).unwrap();
        assert_eq!(
            gen_orientation_map(&ann),
            Err(LabelError::UnderivableOrientation(0))
        );
        let r = region(vec![
            Point2::new(1.0, 1.0),
            Point2::new(5.0, 1.0),
            Point2::new(5.0, 1.0 + 1e-12),
        ]);
        assert_eq!(
            orientation_rule(0, &r),
            Err(LabelError::UnderivableOrientation(0))
        );
    }

    #[test]
    fn curved_chain_uses_local_segments() {
        let centers = [
            Point2::new(10.0, 20.0),
            Point2::new(20.0, 20.0),
            Point2::new(28.0, 26.0),
        ];
        let region = RegionAnnotation {
            polygon: rect(4.0, 14.0, 34.0, 32.0),
            characters: centers.iter().map(|&c| disc(c, 3.0, 16)).collect(),
            orientation: OrientationSource::Auto,
        };
        let rule = orientation_rule(0, &region).unwrap();
        assert!(matches!(rule, OrientationRule::Chain(_)));
        assert_abs_diff_eq!(
            rule.at(Point2::new(12.0, 20.0)).radians(),
            0.0,
            epsilon = 1e-9
        );
        let expect = Orientation::of_segment(centers[1], centers[2]).radians();
        assert_abs_diff_eq!(
            rule.at(Point2::new(27.0, 26.0)).radians(),
            expect,
            epsilon = 1e-9
        );
    }

    #[test]
    fn character_outside_region_rejected() {
        let r = RegionAnnotation {
            polygon: rect(0.0, 0.0, 5.0, 5.0),
            characters: vec![rect(10.0, 10.0, 12.0, 12.0)],
            orientation: OrientationSource::Auto,
        };
        assert!(matches!(
            AnnotationSet::new(20, 20, vec![r]),
            Err(AnnotationError::CharacterOutsideRegion { .. })
        ));
    }
}
