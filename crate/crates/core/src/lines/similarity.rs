//! Pairwise character similarity over the Delaunay triangulation.

use crate::candidates::{sample_linking_orientation, CharCandidate};
use crate::geometry::{delaunay, included_angle, Orientation, Triangulation, WeightedGraph};
use crate::raster::RasterMap;

use super::LineError;

/// Gaussian of the center distance, scaled by the mean Delaunay edge length.
pub fn spatial_similarity(
    a: &CharCandidate,
    b: &CharCandidate,
    mean_edge_length: f64,
) -> Result<f64, LineError> {
    if !(mean_edge_length > 0.0) || !mean_edge_length.is_finite() {
        return Err(LineError::NonPositiveScale(mean_edge_length));
    }
    let d2 = a.center.distance_sq(b.center);
    Ok((-d2 / (2.0 * mean_edge_length * mean_edge_length)).exp())
}

/// Cosine of the included angle between the segment and linking orientations.
pub fn orientation_similarity(phi: Orientation, psi: Orientation) -> f64 {
    included_angle(phi, psi).cos().clamp(0.0, 1.0)
}

/// Harmonic mean of the two similarities; zero when both are zero.
pub fn pair_similarity(spatial: f64, orientation: f64) -> f64 {
    let s = spatial + orientation;
    if s <= 0.0 {
        return 0.0;
    }
    (2.0 * spatial * orientation / s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub in_triangulation: bool,
    pub spatial: f64,
    pub orientation: f64,
    pub phi: Orientation,
    pub psi: Orientation,
    /// The linking orientation fell back to the segment orientation.
    pub psi_fallback: bool,
}

#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    pub triangulation: Triangulation,
    /// `None` when the triangulation has no edges.
    pub mean_edge_length: Option<f64>,
    pub edges: Vec<SimilarityEdge>,
    pub graph: WeightedGraph,
}

/// Builds the weighted graph for the characters of one region.
///
/// Pairs outside the triangulation get no edge (weight zero). Coincident
/// characters are tied to their representative with weight one.
pub fn build_similarity_graph(
    chars: &[CharCandidate],
    orient_map: &RasterMap,
    region_map: &RasterMap,
    region_threshold: f32,
) -> Result<SimilarityGraph, LineError> {
    if chars.is_empty() {
        return Err(LineError::EmptyClique);
    }
    let centers: Vec<_> = chars.iter().map(|c| c.center).collect();
    let triangulation = delaunay(&centers)?;
    let mean_edge_length = triangulation.mean_edge_length().filter(|&d| d > 0.0);
    let mut graph = WeightedGraph::new(chars.len());
    let mut edges = Vec::with_capacity(triangulation.edges().len());

    for &(i, j) in triangulation.edges() {
        let (a, b) = (&chars[i], &chars[j]);
        let d = mean_edge_length.expect("a triangulation edge has positive length");
        let spatial = spatial_similarity(a, b, d)?;
        let phi = Orientation::of_segment(a.center, b.center);
        let link = sample_linking_orientation(orient_map, region_map, a, b, region_threshold);
        let orientation = orientation_similarity(phi, link.orientation);
        let weight = pair_similarity(spatial, orientation);
        graph.add_edge(i, j, weight)?;
        edges.push(SimilarityEdge {
            i,
            j,
            weight,
            in_triangulation: true,
            spatial,
            orientation,
            phi,
            psi: link.orientation,
            psi_fallback: link.fallback,
        });
    }
    for (dup, rep) in triangulation.duplicates() {
        let (i, j) = (dup.min(rep), dup.max(rep));
        graph.add_edge(i, j, 1.0)?;
        edges.push(SimilarityEdge {
            i,
            j,
            weight: 1.0,
            in_triangulation: true,
            spatial: 1.0,
            orientation: 1.0,
            phi: Orientation::HORIZONTAL,
            psi: Orientation::HORIZONTAL,
            psi_fallback: true,
        });
    }
    edges.sort_by_key(|e| (e.i, e.j));
    Ok(SimilarityGraph {
        triangulation,
        mean_edge_length,
        edges,
        graph,
    })
}
