//! Oriented rectangles and minimum-area enclosing boxes.

use std::f64::consts::{FRAC_PI_2, PI};

use super::polygon::convex_hull;
use super::{Orientation, Point2};

/// Rectangle with `width` measured along `angle` and `height` across it.
/// Canonical boxes keep `width >= height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Point2,
    pub width: f64,
    pub height: f64,
    pub angle: Orientation,
}

/// A disc given by center and radius.
pub type Disc = (Point2, f64);

const DISC_SAMPLES: usize = 16;

impl OrientedBox {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn axes(&self) -> (Point2, Point2) {
        let u = Point2::unit(self.angle.radians());
        (u, Point2::new(-u.y, u.x))
    }

    /// Corners in order: -u-v, +u-v, +u+v, -u+v.
    pub fn corners(&self) -> [Point2; 4] {
        let (u, v) = self.axes();
        let (hw, hh) = (0.5 * self.width, 0.5 * self.height);
        let c = self.center;
        [
            c - u * hw - v * hh,
            c + u * hw - v * hh,
            c + u * hw + v * hh,
            c - u * hw + v * hh,
        ]
    }

    pub fn contains(&self, p: Point2, tolerance: f64) -> bool {
        let (u, v) = self.axes();
        let d = p - self.center;
        d.dot(u).abs() <= 0.5 * self.width + tolerance
            && d.dot(v).abs() <= 0.5 * self.height + tolerance
    }

    /// Maps the box through `p -> p * (sx, sy)`. Exact for uniform scaling;
    /// anisotropic factors re-fit the box around the mapped corners.
    pub fn scaled(&self, sx: f64, sy: f64) -> OrientedBox {
        let corners: Vec<Point2> = self
            .corners()
            .iter()
            .map(|p| Point2::new(p.x * sx, p.y * sy))
            .collect();
        if (sx - sy).abs() <= 1e-12 * sx.abs().max(1.0) {
            return OrientedBox {
                center: Point2::new(self.center.x * sx, self.center.y * sy),
                width: self.width * sx,
                height: self.height * sx,
                angle: self.angle,
            };
        }
        OrientedBox::enclosing(&corners, &[]).expect("four corners")
    }

    fn canonical(center: Point2, width: f64, height: f64, angle: f64) -> OrientedBox {
        if height > width {
            OrientedBox {
                center,
                width: height,
                height: width,
                angle: Orientation::wrap(angle + FRAC_PI_2),
            }
        } else {
            OrientedBox {
                center,
                width,
                height,
                angle: Orientation::wrap(angle),
            }
        }
    }

    /// Box aligned with the image axes around all points and discs.
    pub fn axis_aligned_enclosing(points: &[Point2], discs: &[Disc]) -> Option<OrientedBox> {
        let ext = Extents::along(0.0, points, discs)?;
        Some(ext.into_box(0.0))
    }

    /// Box along `theta` enclosing all points and discs.
    pub fn enclosing_at(theta: f64, points: &[Point2], discs: &[Disc]) -> Option<OrientedBox> {
        Some(Extents::along(theta, points, discs)?.into_box(theta))
    }

    /// Minimum-area rectangle enclosing all points and discs.
    ///
    /// Candidate orientations are the edge directions of the convex hull of
    /// the points, the disc centers and polygons circumscribing each disc;
    /// extents are evaluated exactly against the discs.
    pub fn enclosing(points: &[Point2], discs: &[Disc]) -> Option<OrientedBox> {
        if points.is_empty() && discs.is_empty() {
            return None;
        }
        let mut candidates = vec![0.0];
        let mut hull_input: Vec<Point2> = points.to_vec();
        hull_input.extend(discs.iter().map(|d| d.0));
        push_hull_angles(&mut candidates, &hull_input);
        if discs.iter().any(|d| d.1 > 0.0) {
            let inflate = 1.0 / (PI / DISC_SAMPLES as f64).cos();
            for &(c, r) in discs {
                for k in 0..DISC_SAMPLES {
                    let a = 2.0 * PI * k as f64 / DISC_SAMPLES as f64;
                    hull_input.push(c + Point2::unit(a) * (r * inflate));
                }
            }
            push_hull_angles(&mut candidates, &hull_input);
        }

        let mut best: Option<(f64, Extents, f64)> = None;
        for &theta in &candidates {
            let ext = Extents::along(theta, points, discs)?;
            let a = ext.area();
            let better = match &best {
                None => true,
                Some((best_area, _, _)) => a < best_area * (1.0 - 1e-9),
            };
            if better {
                best = Some((a, ext, theta));
            }
        }
        best.map(|(_, ext, theta)| ext.into_box(theta))
    }
}

fn push_hull_angles(out: &mut Vec<f64>, points: &[Point2]) {
    let hull = convex_hull(points);
    let n = hull.len();
    if n < 2 {
        return;
    }
    for i in 0..n {
        let d = hull[(i + 1) % n] - hull[i];
        if d.norm() > 0.0 {
            out.push(d.y.atan2(d.x));
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Extents {
    u_min: f64,
    u_max: f64,
    v_min: f64,
    v_max: f64,
}

impl Extents {
    fn along(theta: f64, points: &[Point2], discs: &[Disc]) -> Option<Extents> {
        let u = Point2::unit(theta);
        let v = Point2::new(-u.y, u.x);
        let mut e = Extents {
            u_min: f64::INFINITY,
            u_max: f64::NEG_INFINITY,
            v_min: f64::INFINITY,
            v_max: f64::NEG_INFINITY,
        };
        let mut any = false;
        for (p, r) in points
            .iter()
            .map(|&p| (p, 0.0))
            .chain(discs.iter().copied())
        {
            any = true;
            let (pu, pv) = (p.dot(u), p.dot(v));
            e.u_min = e.u_min.min(pu - r);
            e.u_max = e.u_max.max(pu + r);
            e.v_min = e.v_min.min(pv - r);
            e.v_max = e.v_max.max(pv + r);
        }
        any.then_some(e)
    }

    fn area(&self) -> f64 {
        (self.u_max - self.u_min) * (self.v_max - self.v_min)
    }

    fn into_box(self, theta: f64) -> OrientedBox {
        let u = Point2::unit(theta);
        let v = Point2::new(-u.y, u.x);
        let cu = 0.5 * (self.u_min + self.u_max);
        let cv = 0.5 * (self.v_min + self.v_max);
        OrientedBox::canonical(
            u * cu + v * cv,
            self.u_max - self.u_min,
            self.v_max - self.v_min,
            theta,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_disc_gives_axis_aligned_square() {
        let b = OrientedBox::enclosing(&[], &[(Point2::new(3.0, 4.0), 2.5)]).unwrap();
        assert_abs_diff_eq!(b.width, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.height, 5.0, epsilon = 1e-12);
        assert_eq!(b.angle.radians(), 0.0);
        assert_abs_diff_eq!(b.center.x, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn two_discs_along_an_angle() {
        let theta: f64 = 0.6;
        let (r, len) = (3.0, 20.0);
        let a = Point2::new(10.0, 10.0);
        let b = a + Point2::unit(theta) * len;
        let bx = OrientedBox::enclosing(&[], &[(a, r), (b, r)]).unwrap();
        assert_abs_diff_eq!(bx.width, len + 2.0 * r, epsilon = 1e-9);
        assert_abs_diff_eq!(bx.height, 2.0 * r, epsilon = 1e-9);
        assert_abs_diff_eq!(bx.angle.radians(), theta, epsilon = 1e-9);
    }

    #[test]
    fn rotated_rectangle_points_recovered() {
        let c = Point2::new(50.0, 40.0);
        let corners: Vec<Point2> = [(-10.0, -3.0), (10.0, -3.0), (10.0, 3.0), (-10.0, 3.0)]
            .iter()
            .map(|&(x, y)| Point2::new(c.x + x, c.y + y).rotated_about(c, -0.3))
            .collect();
        let b = OrientedBox::enclosing(&corners, &[]).unwrap();
        assert_abs_diff_eq!(b.area(), 120.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b.angle.radians(), -0.3, epsilon = 1e-9);
        for p in &corners {
            assert!(b.contains(*p, 1e-9));
        }
    }

    #[test]
    fn uniform_scaling() {
        let b = OrientedBox {
            center: Point2::new(10.0, 20.0),
            width: 8.0,
            height: 2.0,
            angle: Orientation::wrap(0.2),
        };
        let s = b.scaled(0.5, 0.5);
        assert_abs_diff_eq!(s.width, 4.0);
        assert_eq!(s.center, Point2::new(5.0, 10.0));
    }
}
