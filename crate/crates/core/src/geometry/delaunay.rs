//! Planar Delaunay triangulation for small point sets.
//!
//! A lexicographic sweep builds an initial triangulation of the convex hull,
//! then Lawson edge flips restore the empty-circumcircle property. Both
//! stages use exact `orient2d`/`incircle` predicates, so cocircular input is
//! detected exactly and resolved by a deterministic diagonal rule.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use super::{GeometryError, Point2};

/// Points closer than this are merged before triangulation.
pub const DUPLICATE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    points: Vec<Point2>,
    representative: Vec<usize>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
}

impl Triangulation {
    /// Input points, including duplicates.
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Triangles as counter-clockwise (in `orient2d` terms) triples of input
    /// indices, smallest index first, sorted.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Unique undirected edges `(i, j)` with `i < j`, sorted. Only
    /// representative vertices appear.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Input index of the point that stands in for `index` after merging
    /// coincident points.
    pub fn representative(&self, index: usize) -> usize {
        self.representative[index]
    }

    /// Pairs `(duplicate, representative)` for every merged point.
    pub fn duplicates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.representative
            .iter()
            .enumerate()
            .filter(|(i, r)| *i != **r)
            .map(|(i, &r)| (i, r))
    }

    pub fn mean_edge_length(&self) -> Option<f64> {
        if self.edges.is_empty() {
            return None;
        }
        let total: f64 = self
            .edges
            .iter()
            .map(|&(a, b)| self.points[a].distance(self.points[b]))
            .sum();
        Some(total / self.edges.len() as f64)
    }
}

fn coord(p: Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

fn orient(points: &[Point2], a: usize, b: usize, c: usize) -> f64 {
    orient2d(coord(points[a]), coord(points[b]), coord(points[c]))
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn delaunay(points: &[Point2]) -> Result<Triangulation, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        let bad = if p.x.is_finite() { p.y } else { p.x };
        return Err(GeometryError::NonFinite(bad));
    }

    let mut representative: Vec<usize> = (0..points.len()).collect();
    let mut unique: Vec<usize> = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        match unique
            .iter()
            .find(|&&u| points[u].distance(points[i]) <= DUPLICATE_TOLERANCE)
        {
            Some(&u) => representative[i] = u,
            None => unique.push(i),
        }
    }

    let mut tri = Triangulation {
        points: points.to_vec(),
        representative,
        triangles: Vec::new(),
        edges: Vec::new(),
    };

    if unique.len() == 2 {
        tri.edges.push(ordered(unique[0], unique[1]));
    }
    if unique.len() <= 2 {
        return Ok(tri);
    }

    let mut sorted = unique;
    sorted.sort_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
    });

    let (first, last) = (sorted[0], sorted[sorted.len() - 1]);
    if sorted
        .iter()
        .all(|&c| orient(points, first, last, c) == 0.0)
    {
        // Collinear: the lexicographic order is the order along the line.
        tri.edges = sorted.windows(2).map(|w| ordered(w[0], w[1])).collect();
        tri.edges.sort_unstable();
        return Ok(tri);
    }

    let mut triangles = sweep(points, &sorted);
    legalize(points, &mut triangles);

    for t in &mut triangles {
        let min_pos = (0..3).min_by_key(|&k| t[k]).unwrap_or(0);
        t.rotate_left(min_pos);
    }
    triangles.sort_unstable();
    let mut edges: Vec<(usize, usize)> = triangles
        .iter()
        .flat_map(|t| {
            [
                ordered(t[0], t[1]),
                ordered(t[1], t[2]),
                ordered(t[2], t[0]),
            ]
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    tri.triangles = triangles;
    tri.edges = edges;
    Ok(tri)
}

/// Triangulates the convex hull of `sorted` (lexicographically ordered,
/// not all collinear) by adding each point against the visible hull edges.
fn sweep(points: &[Point2], sorted: &[usize]) -> Vec<[usize; 3]> {
    let mut triangles = Vec::new();

    // Leading collinear run followed by the first point off that line.
    let mut k = 2;
    while orient(points, sorted[0], sorted[1], sorted[k]) == 0.0 {
        k += 1;
    }
    let chain = &sorted[..k];
    let apex = sorted[k];
    let left = orient(points, chain[0], chain[k - 1], apex) > 0.0;
    for w in chain.windows(2) {
        if left {
            triangles.push([w[0], w[1], apex]);
        } else {
            triangles.push([w[1], w[0], apex]);
        }
    }
    // Hull kept counter-clockwise.
    let mut hull: Vec<usize> = if left {
        chain.iter().copied().chain(std::iter::once(apex)).collect()
    } else {
        chain
            .iter()
            .rev()
            .copied()
            .chain(std::iter::once(apex))
            .collect()
    };

    for &p in &sorted[k + 1..] {
        let n = hull.len();
        let visible: Vec<bool> = (0..n)
            .map(|i| orient(points, hull[i], hull[(i + 1) % n], p) < 0.0)
            .collect();
        for i in 0..n {
            if visible[i] {
                triangles.push([hull[(i + 1) % n], hull[i], p]);
            }
        }
        // The visible edges form one cyclic run; find where it starts.
        let start = (0..n)
            .find(|&i| visible[i] && !visible[(i + n - 1) % n])
            .expect("new extreme point sees at least one hull edge");
        let mut end = start;
        while visible[(end + 1) % n] {
            end = (end + 1) % n;
        }
        // Keep hull[end + 1] .. hull[start] (cyclically), then insert p.
        let mut next = Vec::with_capacity(n + 1);
        let mut i = (end + 1) % n;
        loop {
            next.push(hull[i]);
            if i == start {
                break;
            }
            i = (i + 1) % n;
        }
        next.push(p);
        hull = next;
    }
    triangles
}

/// Lawson flips until every interior edge is locally Delaunay. On exact
/// cocircularity the diagonal with the lexicographically smaller sorted
/// endpoint pair wins.
fn legalize(points: &[Point2], triangles: &mut [[usize; 3]]) {
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            owner.insert((tri[k], tri[(k + 1) % 3]), t);
        }
    }

    let mut stack: Vec<(usize, usize)> = owner
        .keys()
        .copied()
        .filter(|&(a, b)| a < b && owner.contains_key(&(b, a)))
        .collect();
    stack.sort_unstable_by(|x, y| y.cmp(x));

    let budget = 64 * triangles.len() * triangles.len() + 1024;
    let mut flips = 0usize;
    while let Some((a, b)) = stack.pop() {
        let (Some(&t1), Some(&t2)) = (owner.get(&(a, b)), owner.get(&(b, a))) else {
            continue;
        };
        let c = third(&triangles[t1], a, b);
        let d = third(&triangles[t2], b, a);
        let test = incircle(
            coord(points[a]),
            coord(points[b]),
            coord(points[c]),
            coord(points[d]),
        );
        let flip = test > 0.0 || (test == 0.0 && ordered(c, d) < ordered(a, b));
        if !flip {
            continue;
        }
        flips += 1;
        assert!(flips <= budget, "Delaunay edge flipping did not converge");

        for tri in [triangles[t1], triangles[t2]] {
            for k in 0..3 {
                owner.remove(&(tri[k], tri[(k + 1) % 3]));
            }
        }
        // Quad a, d, b, c is counter-clockwise; new diagonal c-d.
        triangles[t1] = [a, d, c];
        triangles[t2] = [d, b, c];
        for t in [t1, t2] {
            let tri = triangles[t];
            for k in 0..3 {
                owner.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        for (u, v) in [(a, d), (d, b), (b, c), (c, a)] {
            stack.push(ordered(u, v));
        }
    }
}

fn third(tri: &[usize; 3], a: usize, b: usize) -> usize {
    *tri.iter()
        .find(|&&v| v != a && v != b)
        .expect("triangle has three distinct vertices")
}
