//! Hypergraph to (di)graph projections.
//!
//! A hyperedge `e` with weight `h(e)` contributes, for every ordered pair of
//! distinct members `(i, j)`:
//!
//! ```text
//! clique:    w_ij += 2 h(e) / (|e| (|e| - 1))
//! directed:  w_ij += 2 h(e) γ_e(j) / (|e| - 1)
//! ```
//!
//! The clique projection is the directed one with `γ_e(j) = 1/|e|`, and both
//! are evaluated with the same floating-point expression so that the
//! identity holds bit for bit. Contributions are accumulated in hyperedge
//! order.

use thiserror::Error;

use crate::digraph::{GraphError, WeightedDigraph};
use crate::hypergraph::{Hypergraph, Violation};

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("invalid hypergraph ({} violation(s)): {}", .0.len(), first_violation(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn first_violation(v: &[Violation]) -> String {
    v.first().map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Clique,
    Directed,
}

impl Projection {
    pub fn apply(self, h: &Hypergraph) -> Result<WeightedDigraph, ProjectionError> {
        match self {
            Projection::Clique => project_clique(h),
            Projection::Directed => project_directed(h),
        }
    }
}

/// Undirected clique expansion, returned as a symmetric digraph.
pub fn project_clique(h: &Hypergraph) -> Result<WeightedDigraph, ProjectionError> {
    project_with(h, |e, _| 1.0 / e.len() as f64)
}

/// Directed projection weighting arc `i -> j` by the target's contribution.
pub fn project_directed(h: &Hypergraph) -> Result<WeightedDigraph, ProjectionError> {
    project_with(h, |e, k| e.gamma()[k])
}

fn project_with<F>(h: &Hypergraph, share: F) -> Result<WeightedDigraph, ProjectionError>
where
    F: Fn(&crate::hypergraph::Hyperedge, usize) -> f64,
{
    let violations = h.validate();
    if !violations.is_empty() {
        return Err(ProjectionError::Invalid(violations));
    }
    let mut arcs = Vec::new();
    for e in h.edges() {
        let members = e.members();
        let inv = 1.0 / (members.len() - 1) as f64;
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate() {
                if a != b {
                    arcs.push((i, j, 2.0 * (e.weight() * share(e, b) * inv)));
                }
            }
        }
    }
    Ok(WeightedDigraph::from_arcs(h.node_count(), arcs)?)
}
