//! Polygon helpers: areas, containment, hulls, clipping and distances.
//!
//! Polygons are plain vertex lists without a repeated closing vertex.

use super::{Orientation, Point2};

const EPS: f64 = 1e-9;

/// Shoelace area; positive when the vertices turn counter-clockwise in
/// standard (y up) axes.
pub fn signed_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        acc += poly[i].cross(poly[(i + 1) % poly.len()]);
    }
    0.5 * acc
}

pub fn area(poly: &[Point2]) -> f64 {
    signed_area(poly).abs()
}

/// Area centroid; falls back to the vertex mean for degenerate polygons.
pub fn centroid(poly: &[Point2]) -> Point2 {
    let vertex_mean = || {
        let n = poly.len().max(1) as f64;
        let s = poly.iter().fold(Point2::default(), |acc, &p| acc + p);
        s * (1.0 / n)
    };
    if poly.len() < 3 {
        return vertex_mean();
    }
    let origin = poly[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..poly.len() {
        let p = poly[i] - origin;
        let q = poly[(i + 1) % poly.len()] - origin;
        let c = p.cross(q);
        a += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    if a.abs() < EPS {
        return vertex_mean();
    }
    Point2::new(origin.x + cx / (3.0 * a), origin.y + cy / (3.0 * a))
}

pub fn bounding_box(poly: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

pub fn scale_about(poly: &[Point2], pivot: Point2, factor: f64) -> Vec<Point2> {
    poly.iter().map(|&p| pivot + (p - pivot) * factor).collect()
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    let ab = b - a;
    let ap = p - a;
    let len = ab.norm();
    if len < EPS {
        return ap.norm() <= EPS;
    }
    if (ab.cross(ap) / len).abs() > EPS {
        return false;
    }
    let t = ap.dot(ab) / (len * len);
    (-EPS..=1.0 + EPS).contains(&t)
}

/// Point-in-polygon test; points on the boundary count as inside.
pub fn contains(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, without
/// collinear vertices.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn is_convex(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let (mut pos, mut neg) = (false, false);
    for i in 0..n {
        let c = (poly[(i + 1) % n] - poly[i]).cross(poly[(i + 2) % n] - poly[(i + 1) % n]);
        if c > EPS {
            pos = true;
        } else if c < -EPS {
            neg = true;
        }
    }
    !(pos && neg)
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(q1, p1, p2)
        || on_segment(q2, p1, p2)
        || on_segment(p1, q1, q2)
        || on_segment(p2, q1, q2)
}

/// True when no two non-adjacent edges touch and no vertex repeats.
pub fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if poly[i].distance(poly[j]) < EPS {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a1, a2) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(a1, a2, poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Orientation of the major principal axis of the polygon's area, or `None`
/// for a polygon without area.
pub fn principal_axis(poly: &[Point2]) -> Option<Orientation> {
    if poly.len() < 3 {
        return None;
    }
    let c = centroid(poly);
    let (mut a, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..poly.len() {
        let p = poly[i] - c;
        let q = poly[(i + 1) % poly.len()] - c;
        let cr = p.cross(q);
        a += cr;
        sxx += cr * (p.x * p.x + p.x * q.x + q.x * q.x);
        syy += cr * (p.y * p.y + p.y * q.y + q.y * q.y);
        sxy += cr * (p.x * q.y + 2.0 * p.x * p.y + 2.0 * q.x * q.y + q.x * p.y);
    }
    if a.abs() < EPS {
        return None;
    }
    // Common factors (1/12, 1/24 and the area) cancel in the angle once the
    // sign of the orientation is removed.
    let s = a.signum();
    let (sxx, syy, sxy) = (s * sxx / 12.0, s * syy / 12.0, s * sxy / 24.0);
    Some(Orientation::wrap(0.5 * (2.0 * sxy).atan2(sxx - syy)))
}

/// Sutherland-Hodgman clip of `subject` against the convex polygon `clip`.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut clip = clip.to_vec();
    if signed_area(&clip) < 0.0 {
        clip.reverse();
    }
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let edge = b - a;
        let side = |p: Point2| edge.cross(p - a);
        let input = std::mem::take(&mut output);
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(prev + (cur - prev) * (sp / (sp - sc)));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(prev + (cur - prev) * (sp / (sp - sc)));
            }
        }
    }
    output
}

/// Ear-clipping triangulation of a simple polygon.
pub fn triangulate(poly: &[Point2]) -> Vec<[Point2; 3]> {
    let mut verts = poly.to_vec();
    if signed_area(&verts) < 0.0 {
        verts.reverse();
    }
    let mut idx: Vec<usize> = (0..verts.len()).collect();
    let mut out = Vec::new();
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&i| {
            let (a, b, c) = (
                verts[idx[(i + n - 1) % n]],
                verts[idx[i]],
                verts[idx[(i + 1) % n]],
            );
            if (b - a).cross(c - b) <= 0.0 {
                return false;
            }
            let tri = [a, b, c];
            !idx.iter().enumerate().any(|(k, &v)| {
                k != i && k != (i + n - 1) % n && k != (i + 1) % n && contains(&tri, verts[v])
            })
        });
        let i = ear.unwrap_or(0);
        out.push([
            verts[idx[(i + n - 1) % n]],
            verts[idx[i]],
            verts[idx[(i + 1) % n]],
        ]);
        idx.remove(i);
    }
    if idx.len() == 3 {
        out.push([verts[idx[0]], verts[idx[1]], verts[idx[2]]]);
    }
    out
}

/// Area of the intersection of two simple polygons.
pub fn intersection_area(a: &[Point2], b: &[Point2]) -> f64 {
    if area(a) < EPS || area(b) < EPS {
        return 0.0;
    }
    if is_convex(b) {
        area(&clip_convex(a, b))
    } else if is_convex(a) {
        area(&clip_convex(b, a))
    } else {
        triangulate(b)
            .iter()
            .map(|t| area(&clip_convex(a, t)))
            .sum()
    }
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Shortest distance from `p` to the closed segment `[a, b]`.
pub fn distance_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    point_segment_distance(p, a, b)
}

/// Minimum distance between two polygons; zero when they touch, overlap or
/// one contains the other.
pub fn polygon_distance(a: &[Point2], b: &[Point2]) -> f64 {
    if a.iter().any(|&p| contains(b, p)) || b.iter().any(|&p| contains(a, p)) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        let (a1, a2) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (b1, b2) = (b[j], b[(j + 1) % b.len()]);
            if segments_intersect(a1, a2, b1, b2) {
                return 0.0;
            }
            best = best
                .min(point_segment_distance(a1, b1, b2))
                .min(point_segment_distance(a2, b1, b2))
                .min(point_segment_distance(b1, a1, a2))
                .min(point_segment_distance(b2, a1, a2));
        }
    }
    best
}
