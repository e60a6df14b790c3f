//! Small hand-checkable inputs: a six-node hypergraph with heterogeneous
//! contributions and a four-node digraph with 26 in-forests.

use crate::digraph::WeightedDigraph;
use crate::hypergraph::{Hyperedge, Hypergraph};

/// Six nodes, four unit-weight hyperedges.
pub fn toy_hypergraph() -> Hypergraph {
    Hypergraph::new(
        6,
        vec![
            Hyperedge::new(vec![0, 1], 1.0, vec![0.7, 0.3]),
            Hyperedge::new(vec![0, 1, 3], 1.0, vec![0.5, 0.3, 0.2]),
            Hyperedge::new(vec![0, 2, 5], 1.0, vec![0.5, 0.3, 0.2]),
            Hyperedge::new(vec![1, 2, 4], 1.0, vec![0.3, 0.2, 0.5]),
        ],
    )
}

/// Internal opinions `0.1, 0.2, …, 0.6` for [`toy_hypergraph`].
pub fn toy_opinions() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
}

/// Four nodes, six unit arcs.
pub fn toy_digraph() -> WeightedDigraph {
    WeightedDigraph::from_arcs(
        4,
        [(0, 1, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 0, 1.0), (3, 0, 1.0)],
    )
    .expect("valid arcs")
}

/// `26 · (I + L)⁻¹` of [`toy_digraph`].
pub const TOY_DIGRAPH_FOREST_MATRIX: [[i64; 4]; 4] =
    [[12, 4, 2, 8], [4, 10, 5, 7], [6, 2, 14, 4], [6, 2, 1, 17]];

/// Number of in-forests of [`toy_digraph`].
pub const TOY_DIGRAPH_FORESTS: i64 = 26;
