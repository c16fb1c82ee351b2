use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    /// Smaller endpoint.
    pub a: usize,
    /// Larger endpoint.
    pub b: usize,
    pub weight: f64,
}

/// Undirected graph with at most one edge per vertex pair and weights in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<GraphEdge>,
}

impl WeightedGraph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) -> Result<(), GeometryError> {
        for v in [i, j] {
            if v >= self.vertex_count {
                return Err(GeometryError::VertexOutOfRange {
                    index: v,
                    count: self.vertex_count,
                });
            }
        }
        if i == j {
            return Err(GeometryError::SelfLoop(i));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(GeometryError::WeightOutOfRange(weight));
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if self.edges.iter().any(|e| e.a == a && e.b == b) {
            return Err(GeometryError::DuplicateEdge(a, b));
        }
        self.edges.push(GraphEdge { a, b, weight });
        Ok(())
    }

    /// Weight of edge `{i, j}`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges
            .iter()
            .find(|e| e.a == a && e.b == b)
            .map_or(0.0, |e| e.weight)
    }
}

/// Maximum spanning forest of a [`WeightedGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    vertex_count: usize,
    edges: Vec<GraphEdge>,
    component_count: usize,
}

impl SpanningTree {
    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// True when the source graph was disconnected and this is a forest.
    pub fn is_forest(&self) -> bool {
        self.component_count > 1
    }
}

#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal on edges ordered by descending weight, then ascending index pair.
pub fn maximum_spanning_tree(graph: &WeightedGraph) -> SpanningTree {
    let mut order: Vec<&GraphEdge> = graph.edges.iter().collect();
    order.sort_by(|x, y| {
        y.weight
            .total_cmp(&x.weight)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });
    let mut sets = DisjointSet::new(graph.vertex_count);
    let mut edges = Vec::with_capacity(graph.vertex_count.saturating_sub(1));
    for e in order {
        if sets.union(e.a, e.b) {
            edges.push(*e);
        }
    }
    SpanningTree {
        vertex_count: graph.vertex_count,
        component_count: graph.vertex_count - edges.len(),
        edges,
    }
}
