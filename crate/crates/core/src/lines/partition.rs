//! Cutting the spanning tree into straight text lines.

use crate::geometry::mst::DisjointSet;
use crate::geometry::{covariance_eigs, GraphEdge, Point2, SpanningTree};

use super::LineError;

/// Floor on the minor eigenvalue.
pub const STRAIGHTNESS_EPS: f64 = 1e-6;
/// Minimum relative gain in mean straightness for a cut to be accepted.
pub const MIN_RELATIVE_GAIN: f64 = 0.01;

fn cluster_ratio(points: &[Point2]) -> f64 {
    if points.len() < 3 {
        return 1.0;
    }
    let (l1, l2) = covariance_eigs(points);
    l1 / l2.max(STRAIGHTNESS_EPS)
}

/// Sum over clusters of major over minor covariance eigenvalue.
pub fn straightness(clusters: &[Vec<Point2>]) -> f64 {
    clusters.iter().map(|c| cluster_ratio(c)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Vertex lists, each sorted; clusters ordered by their smallest vertex.
    pub clusters: Vec<Vec<usize>>,
    /// Tree edges removed, in the order they were cut.
    pub cut_edges: Vec<GraphEdge>,
}

fn components(n: usize, edges: &[GraphEdge], removed: &[bool]) -> Vec<Vec<usize>> {
    let mut ds = DisjointSet::new(n);
    for (e, _) in edges.iter().zip(removed).filter(|(_, &r)| !r) {
        ds.union(e.a, e.b);
    }
    let mut root_slot = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = ds.find(v);
        if root_slot[r] == usize::MAX {
            root_slot[r] = out.len();
            out.push(Vec::new());
        }
        out[root_slot[r]].push(v);
    }
    out
}

fn mean_straightness(points: &[Point2], clusters: &[Vec<usize>]) -> f64 {
    let total: f64 = clusters
        .iter()
        .map(|c| cluster_ratio(&c.iter().map(|&i| points[i]).collect::<Vec<_>>()))
        .sum();
    total / clusters.len() as f64
}

/// Greedy tree cutting.
///
/// Eligible edges (weight `<= tau`) are tried from lightest to heaviest. A
/// cut is kept when it raises the mean straightness by more than
/// [`MIN_RELATIVE_GAIN`]; the first rejected cut ends the search.
pub fn partition_lines(
    points: &[Point2],
    tree: &SpanningTree,
    tau: f64,
) -> Result<Partition, LineError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(LineError::InvalidTau(tau));
    }
    assert_eq!(
        points.len(),
        tree.vertex_count(),
        "tree does not match points"
    );
    let n = points.len();
    let edges = tree.edges();
    let mut order: Vec<usize> = (0..edges.len())
        .filter(|&k| edges[k].weight <= tau)
        .collect();
    order.sort_by(|&x, &y| {
        let (a, b) = (&edges[x], &edges[y]);
        a.weight
            .total_cmp(&b.weight)
            .then((a.a, a.b).cmp(&(b.a, b.b)))
    });

    let mut removed = vec![false; edges.len()];
    let mut clusters = components(n, edges, &removed);
    let mut current = mean_straightness(points, &clusters);
    let mut cut_edges = Vec::new();
    for k in order {
        removed[k] = true;
        let trial = components(n, edges, &removed);
        let score = mean_straightness(points, &trial);
        if score > current * (1.0 + MIN_RELATIVE_GAIN) {
            log::debug!(
                "cut edge ({}, {}) w={:.4}: mean straightness {:.4} -> {:.4}",
                edges[k].a,
                edges[k].b,
                edges[k].weight,
                current,
                score
            );
            clusters = trial;
            current = score;
            cut_edges.push(edges[k]);
        } else {
            removed[k] = false;
            break;
        }
    }
    debug_assert!(cut_edges.iter().all(|e| e.weight <= tau));
    Ok(Partition {
        clusters,
        cut_edges,
    })
}
