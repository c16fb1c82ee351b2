//! Synthetic scenes with known line layouts and their ideal prediction maps.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::polygon::{contains, polygon_distance};
use crate::geometry::{Orientation, Point2};
use crate::labelgen::{
    gen_character_map, gen_region_map, normalize_orientation, AnnotationError, AnnotationSet,
    OrientationSource, RegionAnnotation,
};
use crate::raster::{Channel, MapSet, RasterMap};

/// Generator behind every seeded draw in this module.
pub const RNG_ALGORITHM: &str = "ChaCha8";
/// Region half-width as a multiple of the character radius.
pub const REGION_SCALE: f64 = 1.5;
/// Vertices of the polygon approximating each character disc.
pub const DISC_VERTICES: usize = 32;
/// Regions closer than this are rejected as ambiguous.
pub const MIN_REGION_GAP: f64 = 3.0;
const ARC_STEP: f64 = 2.0 * PI / 180.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("line {0}: {1}")]
    BadLine(usize, &'static str),
    #[error("line {0} does not fit inside the image")]
    OutOfBounds(usize),
    #[error("lines {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LinePath {
    /// First character at `start`, advancing along `angle`.
    Straight { start: Point2, angle: f64 },
    /// Circle about `center`; the first character sits at `start_angle` and
    /// later ones follow with increasing angle.
    Arc {
        center: Point2,
        radius: f64,
        start_angle: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub path: LinePath,
    pub char_count: usize,
    pub char_radius: f64,
    /// Edge-to-edge spacing between neighbouring characters.
    pub spacing: f64,
    /// Gap `k` widens the space between characters `k` and `k + 1`.
    #[serde(default)]
    pub word_gaps: Vec<usize>,
    /// Extra spacing added at each word gap.
    #[serde(default)]
    pub word_gap: f64,
}

impl LineSpec {
    fn pitch(&self) -> f64 {
        2.0 * self.char_radius + self.spacing
    }

    /// Arc-length position of each character along the path.
    pub fn offsets(&self) -> Vec<f64> {
        let mut s = 0.0;
        let mut out = Vec::with_capacity(self.char_count);
        for k in 0..self.char_count {
            if k > 0 {
                s += self.pitch();
                if self.word_gaps.contains(&(k - 1)) {
                    s += self.word_gap;
                }
            }
            out.push(s);
        }
        out
    }

    pub fn point_at(&self, s: f64) -> Point2 {
        match self.path {
            LinePath::Straight { start, angle } => start + Point2::unit(angle) * s,
            LinePath::Arc {
                center,
                radius,
                start_angle,
            } => center + Point2::unit(start_angle + s / radius) * radius,
        }
    }

    pub fn centers(&self) -> Vec<Point2> {
        self.offsets()
            .into_iter()
            .map(|s| self.point_at(s))
            .collect()
    }

    /// Path tangent orientation at pixel position `p`.
    pub fn tangent_at(&self, p: Point2) -> Orientation {
        match self.path {
            LinePath::Straight { angle, .. } => Orientation::wrap(angle),
            LinePath::Arc { center, .. } => {
                let d = p - center;
                Orientation::wrap(d.y.atan2(d.x) + FRAC_PI_2)
            }
        }
    }

    /// Path swept by `REGION_SCALE` character radii, extended past both end
    /// characters by the same amount.
    pub fn region_polygon(&self) -> Vec<Point2> {
        let h = REGION_SCALE * self.char_radius;
        let end = *self.offsets().last().unwrap_or(&0.0);
        match self.path {
            LinePath::Straight { start, angle } => {
                let u = Point2::unit(angle);
                let v = Point2::new(-u.y, u.x);
                let (a, b) = (start - u * h, start + u * (end + h));
                vec![a - v * h, b - v * h, b + v * h, a + v * h]
            }
            LinePath::Arc {
                center,
                radius,
                start_angle,
            } => {
                let a0 = start_angle - h / radius;
                let a1 = start_angle + (end + h) / radius;
                let steps = ((a1 - a0) / ARC_STEP).ceil().max(1.0) as usize;
                let angles: Vec<f64> = (0..=steps)
                    .map(|k| a0 + (a1 - a0) * k as f64 / steps as f64)
                    .collect();
                let outer = angles
                    .iter()
                    .map(|&a| center + Point2::unit(a) * (radius + h));
                let inner = angles
                    .iter()
                    .rev()
                    .map(|&a| center + Point2::unit(a) * (radius - h));
                outer.chain(inner).collect()
            }
        }
    }

    /// Index ranges of the words of this line.
    pub fn words(&self) -> Vec<Range<usize>> {
        let mut gaps: Vec<usize> = self
            .word_gaps
            .iter()
            .copied()
            .filter(|&g| g + 1 < self.char_count)
            .collect();
        gaps.sort_unstable();
        gaps.dedup();
        let mut out = Vec::new();
        let mut start = 0;
        for g in gaps {
            out.push(start..g + 1);
            start = g + 1;
        }
        out.push(start..self.char_count);
        out
    }

    fn rotated(&self, pivot: Point2, angle: f64) -> LineSpec {
        let path = match self.path {
            LinePath::Straight { start, angle: a } => LinePath::Straight {
                start: start.rotated_about(pivot, angle),
                angle: a + angle,
            },
            LinePath::Arc {
                center,
                radius,
                start_angle,
            } => LinePath::Arc {
                center: center.rotated_about(pivot, angle),
                radius,
                start_angle: start_angle + angle,
            },
        };
        LineSpec {
            path,
            ..self.clone()
        }
    }

    fn validate(&self, index: usize) -> Result<(), SynthError> {
        if self.char_count == 0 {
            return Err(SynthError::BadLine(index, "needs at least one character"));
        }
        if !(self.char_radius > 0.0) || !(self.spacing >= 0.0) || !(self.word_gap >= 0.0) {
            return Err(SynthError::BadLine(
                index,
                "radius must be positive and gaps non-negative",
            ));
        }
        if let LinePath::Arc { radius, .. } = self.path {
            if !(radius > 2.0 * REGION_SCALE * self.char_radius) {
                return Err(SynthError::BadLine(
                    index,
                    "arc radius too small for its characters",
                ));
            }
            let end = *self.offsets().last().unwrap();
            let sweep = (end + 2.0 * REGION_SCALE * self.char_radius) / radius;
            if sweep >= 1.5 * PI {
                return Err(SynthError::BadLine(
                    index,
                    "arc wraps too far around its center",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub lines: Vec<LineSpec>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub blur_radius: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SceneSpec {
    pub fn image_center(&self) -> Point2 {
        Point2::new(0.5 * self.width as f64, 0.5 * self.height as f64)
    }

    /// The same scene rotated by `angle` radians about the image center.
    pub fn rotated(&self, angle: f64) -> SceneSpec {
        let c = self.image_center();
        SceneSpec {
            lines: self.lines.iter().map(|l| l.rotated(c, angle)).collect(),
            ..self.clone()
        }
    }
}

/// Ground truth of one generated line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineTruth {
    pub centers: Vec<Point2>,
    pub radius: f64,
    pub region: Vec<Point2>,
    pub words: Vec<Range<usize>>,
    pub curved: bool,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub spec: SceneSpec,
    pub annotation: AnnotationSet,
    /// Noise-free maps.
    pub maps: MapSet,
    pub lines: Vec<LineTruth>,
}

impl Scene {
    /// Maps with the spec's noise and blur applied.
    pub fn perturbed(&self) -> MapSet {
        perturb_maps(
            &self.maps,
            self.spec.noise_sigma,
            self.spec.blur_radius,
            self.spec.seed,
        )
    }
}

fn disc_polygon(c: Point2, r: f64) -> Vec<Point2> {
    (0..DISC_VERTICES)
        .map(|k| c + Point2::unit(2.0 * PI * k as f64 / DISC_VERTICES as f64) * r)
        .collect()
}

fn inside_image(poly: &[Point2], w: usize, h: usize) -> bool {
    poly.iter()
        .all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x <= w as f64 && p.y <= h as f64)
}

/// Builds the annotation and the ideal maps of a scene.
///
/// Straight lines carry their path angle as explicit orientation; arcs
/// derive it from their character chain.
pub fn gen_scene(spec: &SceneSpec) -> Result<Scene, SynthError> {
    let mut regions = Vec::with_capacity(spec.lines.len());
    let mut truths = Vec::with_capacity(spec.lines.len());
    for (i, line) in spec.lines.iter().enumerate() {
        line.validate(i)?;
        let centers = line.centers();
        let region = line.region_polygon();
        if !inside_image(&region, spec.width, spec.height) {
            return Err(SynthError::OutOfBounds(i));
        }
        let curved = matches!(line.path, LinePath::Arc { .. });
        let orientation = match line.path {
            LinePath::Straight { angle, .. } => {
                OrientationSource::Explicit(Orientation::wrap(angle))
            }
            LinePath::Arc { .. } => OrientationSource::Auto,
        };
        regions.push(RegionAnnotation {
            polygon: region.clone(),
            characters: centers
                .iter()
                .map(|&c| disc_polygon(c, line.char_radius))
                .collect(),
            orientation,
        });
        truths.push(LineTruth {
            centers,
            radius: line.char_radius,
            region,
            words: line.words(),
            curved,
        });
    }
    for i in 0..truths.len() {
        for j in i + 1..truths.len() {
            if polygon_distance(&truths[i].region, &truths[j].region) < MIN_REGION_GAP {
                return Err(SynthError::Overlap(i, j));
            }
        }
    }
    let annotation = AnnotationSet::new(spec.width, spec.height, regions)?;
    let region = gen_region_map(&annotation);
    let character = gen_character_map(&annotation);
    let mut orientation = RasterMap::zeros(spec.width, spec.height, Channel::Orientation);
    for y in 0..spec.height {
        for x in 0..spec.width {
            if region.get(x, y) < 0.5 {
                continue;
            }
            let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
            let owner = truths
                .iter()
                .position(|t| contains(&t.region, p))
                .unwrap_or(0);
            let theta = spec.lines[owner].tangent_at(p);
            orientation.set(x, y, normalize_orientation(theta) as f32);
        }
    }
    let maps = MapSet::new(region, character, orientation).expect("channels share dimensions");
    Ok(Scene {
        spec: spec.clone(),
        annotation,
        maps,
        lines: truths,
    })
}

fn box_blur(map: &RasterMap, radius: usize) -> RasterMap {
    if radius == 0 {
        return map.clone();
    }
    let (w, h) = (map.width(), map.height());
    let mut out = RasterMap::zeros(w, h, map.channel());
    for y in 0..h {
        for x in 0..w {
            let (mut acc, mut n) = (0.0f64, 0usize);
            for yy in y.saturating_sub(radius)..(y + radius + 1).min(h) {
                for xx in x.saturating_sub(radius)..(x + radius + 1).min(w) {
                    acc += map.get(xx, yy) as f64;
                    n += 1;
                }
            }
            out.set(x, y, (acc / n as f64) as f32);
        }
    }
    out
}

/// Adds seeded Gaussian noise, then a box blur of the given radius, and
/// clamps to `[0, 1]`. Each channel draws from its own stream of the seed.
pub fn perturb_maps(maps: &MapSet, sigma: f64, blur: usize, seed: u64) -> MapSet {
    assert!(
        sigma >= 0.0 && sigma.is_finite(),
        "noise sigma must be non-negative"
    );
    let perturb = |m: &RasterMap| {
        let mut noisy = m.clone();
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m.channel().tag() as u64);
            let normal = Normal::new(0.0, sigma).expect("valid sigma");
            for y in 0..m.height() {
                for x in 0..m.width() {
                    let v = m.get(x, y) as f64 + normal.sample(&mut rng);
                    noisy.set(x, y, v as f32);
                }
            }
        }
        box_blur(&noisy, blur)
    };
    MapSet {
        region: perturb(&maps.region),
        character: perturb(&maps.character),
        orientation: perturb(&maps.orientation),
    }
}

/// Image size of the standard suite.
pub const SUITE_SIZE: usize = 320;
pub const SUITE_STRAIGHT_SCENES: usize = 50;
pub const SUITE_ARC_SCENES: usize = 10;
/// Scenes keep within this distance of the image center so that moderate
/// rotations stay inside the image.
const SUITE_SAFE_RADIUS: f64 = 150.0;

fn fits_safe_disc(spec: &SceneSpec) -> bool {
    let c = spec.image_center();
    spec.lines
        .iter()
        .flat_map(|l| l.region_polygon())
        .all(|p| p.distance(c) <= SUITE_SAFE_RADIUS)
}

fn random_straight(rng: &mut ChaCha8Rng, seed: u64) -> SceneSpec {
    loop {
        let count = rng.random_range(1..=4usize);
        let base = rng.random_range(-35.0f64..35.0).to_radians();
        let mut lines = Vec::with_capacity(count);
        let mut offset = 0.0;
        let mut prev_half = 0.0;
        for i in 0..count {
            let char_count = rng.random_range(3..=10usize);
            let r = rng.random_range(6.0..10.0);
            let spacing = rng.random_range(1.0..0.5 * r);
            let (word_gaps, word_gap) = if char_count >= 6 && rng.random_bool(0.3) {
                (
                    vec![rng.random_range(2..char_count - 3)],
                    rng.random_range(1.5 * r..2.5 * r),
                )
            } else {
                (Vec::new(), 0.0)
            };
            let angle = base + rng.random_range(-5.0f64..5.0).to_radians();
            let half = REGION_SCALE * r;
            if i > 0 {
                offset += prev_half + half + rng.random_range(8.0..20.0);
            }
            prev_half = half;
            let shift = rng.random_range(-20.0..20.0);
            lines.push((
                offset,
                shift,
                angle,
                LineSpec {
                    path: LinePath::Straight {
                        start: Point2::new(0.0, 0.0),
                        angle,
                    },
                    char_count,
                    char_radius: r,
                    spacing,
                    word_gaps,
                    word_gap,
                },
            ));
        }
        // Stack lines across the base direction and center the block.
        let u = Point2::unit(base);
        let v = Point2::new(-u.y, u.x);
        let c = Point2::new(0.5 * SUITE_SIZE as f64, 0.5 * SUITE_SIZE as f64);
        let mid = 0.5 * offset;
        let lines: Vec<LineSpec> = lines
            .into_iter()
            .map(|(off, shift, angle, mut spec)| {
                let len = *spec.offsets().last().unwrap();
                let middle = c + v * (off - mid) + u * shift;
                spec.path = LinePath::Straight {
                    start: middle - Point2::unit(angle) * (0.5 * len),
                    angle,
                };
                spec
            })
            .collect();
        let spec = SceneSpec {
            width: SUITE_SIZE,
            height: SUITE_SIZE,
            lines,
            noise_sigma: 0.0,
            blur_radius: 0,
            seed,
        };
        if fits_safe_disc(&spec) && gen_scene(&spec).is_ok() {
            return spec;
        }
    }
}

fn random_arc(rng: &mut ChaCha8Rng, seed: u64) -> SceneSpec {
    loop {
        let char_count = rng.random_range(3..=10usize);
        let r = rng.random_range(6.0..10.0);
        let spacing = rng.random_range(1.0..0.5 * r);
        let span = rng.random_range(30.0f64..90.0).to_radians();
        let pitch = 2.0 * r + spacing;
        let radius = pitch * (char_count - 1) as f64 / span;
        if radius < 4.0 * r || radius > 140.0 {
            continue;
        }
        let mid = rng.random_range(-PI..PI);
        let c = Point2::new(0.5 * SUITE_SIZE as f64, 0.5 * SUITE_SIZE as f64);
        let spec = SceneSpec {
            width: SUITE_SIZE,
            height: SUITE_SIZE,
            lines: vec![LineSpec {
                path: LinePath::Arc {
                    // Arc midpoint lands on the image center.
                    center: c - Point2::unit(mid) * radius,
                    radius,
                    start_angle: mid - 0.5 * span,
                },
                char_count,
                char_radius: r,
                spacing,
                word_gaps: Vec::new(),
                word_gap: 0.0,
            }],
            noise_sigma: 0.0,
            blur_radius: 0,
            seed,
        };
        if fits_safe_disc(&spec) && gen_scene(&spec).is_ok() {
            return spec;
        }
    }
}

/// The standard seeded suite: straight multi-line scenes followed by
/// single-arc scenes.
pub fn oracle_suite(seed: u64) -> Vec<SceneSpec> {
    let mut out = Vec::with_capacity(SUITE_STRAIGHT_SCENES + SUITE_ARC_SCENES);
    for k in 0..SUITE_STRAIGHT_SCENES + SUITE_ARC_SCENES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let scene_seed = seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
        out.push(if k < SUITE_STRAIGHT_SCENES {
            random_straight(&mut rng, scene_seed)
        } else {
            random_arc(&mut rng, scene_seed)
        });
    }
    out
}
