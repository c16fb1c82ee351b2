//! Geometric and graph primitives shared by the label generator and the
//! detection pipeline.
//!
//! All angles are measured in image coordinates (x to the right, y down) as
//! `atan2(dy, dx)`, so a positive angle turns clockwise on screen.

pub mod delaunay;
pub mod mst;
pub mod obox;
pub mod polygon;

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use delaunay::{delaunay, Triangulation};
pub use mst::{maximum_spanning_tree, GraphEdge, SpanningTree, WeightedGraph};
pub use obox::OrientedBox;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("empty point set")]
    EmptyInput,
    #[error("vertex index {index} out of range for {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("self loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn distance_sq(self, other: Point2) -> f64 {
        let d = self - other;
        d.dot(d)
    }

    /// Rotates the point by `angle` radians about `pivot`.
    pub fn rotated_about(self, pivot: Point2, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        let d = self - pivot;
        Point2::new(pivot.x + c * d.x - s * d.y, pivot.y + s * d.x + c * d.y)
    }

    /// Unit vector pointing along `angle`.
    pub fn unit(angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c, s)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// An undirected line orientation, stored in `[-pi/2, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Orientation(f64);

impl Orientation {
    pub const HORIZONTAL: Orientation = Orientation(0.0);

    /// Wraps a finite angle into `[-pi/2, pi/2)`.
    ///
    /// Panics on non-finite input; use [`wrap_orientation`] for fallible
    /// construction.
    pub fn wrap(angle: f64) -> Self {
        wrap_orientation(angle).expect("orientation must be finite")
    }

    /// Orientation of the line through `a` and `b`.
    pub fn of_segment(a: Point2, b: Point2) -> Self {
        let d = b - a;
        Self::wrap(d.y.atan2(d.x))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

pub fn wrap_orientation(angle: f64) -> Result<Orientation, GeometryError> {
    if !angle.is_finite() {
        return Err(GeometryError::NonFinite(angle));
    }
    if (-FRAC_PI_2..FRAC_PI_2).contains(&angle) {
        return Ok(Orientation(angle));
    }
    let mut r = angle - PI * ((angle + FRAC_PI_2) / PI).floor();
    // floor() can land one period off when the quotient rounds to an integer.
    while r >= FRAC_PI_2 {
        r -= PI;
    }
    while r < -FRAC_PI_2 {
        r += PI;
    }
    Ok(Orientation(r))
}

/// Acute angle between two undirected orientations, in `[0, pi/2]`.
pub fn included_angle(phi: Orientation, psi: Orientation) -> f64 {
    let d = (phi.0 - psi.0).abs();
    if d > FRAC_PI_2 {
        PI - d
    } else {
        d
    }
}

/// Eigenvalues `(largest, second)` of the population covariance of `points`.
pub fn covariance_eigs(points: &[Point2]) -> (f64, f64) {
    if points.len() < 2 {
        return (0.0, 0.0);
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    let (mx, my) = (sx / n, sy / n);
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - mx, p.y - my);
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    cxx /= n;
    cyy /= n;
    cxy /= n;
    let half_trace = 0.5 * (cxx + cyy);
    let disc = (0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy).sqrt();
    let l1 = half_trace + disc;
    let l2 = (half_trace - disc).max(0.0);
    (l1, l2)
}
