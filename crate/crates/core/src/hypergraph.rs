//! Weighted hypergraphs with hyperedge-dependent node weights.
//!
//! Every hyperedge carries a scalar weight `h(e) > 0` and one contribution
//! fraction `γ_e(i)` per member; the fractions of a hyperedge sum to one.
//! Nodes are dense indices in `0..n`.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerance on `Σ γ_e(i) = 1`.
pub const GAMMA_SUM_TOL: f64 = 1e-9;

/// Ingestion renormalizes contribution fractions whose sum is off by at most
/// this much and rejects anything further away.
pub const GAMMA_RENORMALIZE_TOL: f64 = 1e-6;

/// Dense node identifier in `0..n`.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    members: Vec<NodeId>,
    weight: f64,
    gamma: Vec<f64>,
}

impl Hyperedge {
    /// Builds a hyperedge without checking it; see [`Hypergraph::validate`].
    pub fn new(members: Vec<NodeId>, weight: f64, gamma: Vec<f64>) -> Self {
        Hyperedge {
            members,
            weight,
            gamma,
        }
    }

    /// Hyperedge with homogeneous contributions `1/|e|`.
    pub fn uniform(members: Vec<NodeId>, weight: f64) -> Self {
        let gamma = uniform_fractions(members.len());
        Hyperedge {
            members,
            weight,
            gamma,
        }
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `(member, γ_e(member))` pairs.
    pub fn contributions(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.members.iter().copied().zip(self.gamma.iter().copied())
    }
}

fn uniform_fractions(len: usize) -> Vec<f64> {
    if len == 0 {
        return Vec::new();
    }
    let share = 1.0 / len as f64;
    vec![share; len]
}

/// A single invariant breach found by [`Hypergraph::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MemberOutOfRange { edge: usize, node: NodeId, n: usize },
    DuplicateMember { edge: usize, node: NodeId },
    Undersized { edge: usize, size: usize },
    NonPositiveWeight { edge: usize, weight: f64 },
    GammaLength { edge: usize, members: usize, gamma: usize },
    NegativeGamma { edge: usize, node: NodeId, gamma: f64 },
    GammaSum { edge: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::MemberOutOfRange { edge, node, n } => {
                write!(f, "hyperedge {edge}: member {node} out of range (n = {n})")
            }
            Violation::DuplicateMember { edge, node } => {
                write!(f, "hyperedge {edge}: node {node} appears more than once")
            }
            Violation::Undersized { edge, size } => {
                write!(f, "hyperedge {edge}: {size} member(s), at least 2 required")
            }
            Violation::NonPositiveWeight { edge, weight } => {
                write!(f, "hyperedge {edge}: weight {weight} is not positive")
            }
            Violation::GammaLength {
                edge,
                members,
                gamma,
            } => write!(
                f,
                "hyperedge {edge}: {gamma} contribution fractions for {members} members"
            ),
            Violation::NegativeGamma { edge, node, gamma } => {
                write!(f, "hyperedge {edge}: node {node} has negative fraction {gamma}")
            }
            Violation::GammaSum { edge, sum } => {
                write!(f, "hyperedge {edge}: contribution fractions sum to {sum}, not 1")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Hyperedge>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<Hyperedge>) -> Self {
        Hypergraph { n, edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    /// Reports every invariant breach, in hyperedge order.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = vec![usize::MAX; self.n];
        for (idx, e) in self.edges.iter().enumerate() {
            if e.members.len() < 2 {
                out.push(Violation::Undersized {
                    edge: idx,
                    size: e.members.len(),
                });
            }
            for &node in &e.members {
                if node >= self.n {
                    out.push(Violation::MemberOutOfRange {
                        edge: idx,
                        node,
                        n: self.n,
                    });
                } else if seen[node] == idx {
                    out.push(Violation::DuplicateMember { edge: idx, node });
                } else {
                    seen[node] = idx;
                }
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                out.push(Violation::NonPositiveWeight {
                    edge: idx,
                    weight: e.weight,
                });
            }
            if e.gamma.len() != e.members.len() {
                out.push(Violation::GammaLength {
                    edge: idx,
                    members: e.members.len(),
                    gamma: e.gamma.len(),
                });
                continue;
            }
            for (node, g) in e.contributions() {
                if !(g >= 0.0) {
                    out.push(Violation::NegativeGamma {
                        edge: idx,
                        node,
                        gamma: g,
                    });
                }
            }
            if !e.members.is_empty() {
                let sum: f64 = e.gamma.iter().sum();
                if !((sum - 1.0).abs() <= GAMMA_SUM_TOL) {
                    out.push(Violation::GammaSum { edge: idx, sum });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Drops hyperedges with fewer than two members. The node count is kept.
    pub fn filter_singletons(&self) -> Hypergraph {
        Hypergraph {
            n: self.n,
            edges: self.edges.iter().filter(|e| e.len() >= 2).cloned().collect(),
        }
    }

    pub fn uniform_gamma(&self) -> Hypergraph {
        self.map_edges(|_, e| Hyperedge::uniform(e.members.clone(), e.weight))
    }

    /// Heterogeneous contributions: one Pareto draw with density `x⁻²` on
    /// `[1, ∞)` per member, normalized to sum one within each hyperedge.
    pub fn powerlaw_gamma(&self, seed: u64) -> Hypergraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.map_edges(|_, e| {
            let raw: Vec<f64> = (0..e.len()).map(|_| pareto_unit(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            let gamma = raw.iter().map(|r| r / total).collect();
            Hyperedge::new(e.members.clone(), e.weight, gamma)
        })
    }

    pub fn unit_edge_weights(&self) -> Hypergraph {
        self.map_edges(|_, e| Hyperedge::new(e.members.clone(), 1.0, e.gamma.clone()))
    }

    /// Rescales each hyperedge's fractions to sum one when the sum is within
    /// [`GAMMA_RENORMALIZE_TOL`] of one. Hyperedges further off are left as
    /// they are and reported through the returned indices.
    pub fn renormalize_gamma(&self) -> (Hypergraph, Vec<usize>) {
        let mut rejected = Vec::new();
        let h = self.map_edges(|idx, e| {
            let sum: f64 = e.gamma.iter().sum();
            if e.is_empty() || (sum - 1.0).abs() > GAMMA_RENORMALIZE_TOL {
                if !e.is_empty() {
                    rejected.push(idx);
                }
                return e.clone();
            }
            let gamma = e.gamma.iter().map(|g| g / sum).collect();
            Hyperedge::new(e.members.clone(), e.weight, gamma)
        });
        (h, rejected)
    }

    fn map_edges<F>(&self, mut f: F) -> Hypergraph
    where
        F: FnMut(usize, &Hyperedge) -> Hyperedge,
    {
        Hypergraph {
            n: self.n,
            edges: self.edges.iter().enumerate().map(|(i, e)| f(i, e)).collect(),
        }
    }
}

/// Inverse-transform draw from the Pareto law with density `x⁻²` on `[1, ∞)`.
fn pareto_unit<R: Rng>(rng: &mut R) -> f64 {
    // gen::<f64>() is in [0, 1); flip it to (0, 1].
    let u = 1.0 - rng.gen::<f64>();
    1.0 / u
}

/// Internal opinions drawn i.i.d. uniform on `[0, 1]`.
pub fn random_opinions(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()
}

/// Synthetic hypergraph: `edges` hyperedges with sizes uniform in
/// `min_size..=max_size` (capped at `n`), members drawn without replacement,
/// unit weights and uniform contributions.
pub fn random_hypergraph(
    n: usize,
    edges: usize,
    min_size: usize,
    max_size: usize,
    seed: u64,
) -> Hypergraph {
    assert!(min_size <= max_size, "min_size must not exceed max_size");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = max_size.min(n);
    let lo = min_size.min(hi);
    let edges = (0..edges)
        .filter_map(|_| {
            if hi == 0 {
                return None;
            }
            let size = rng.gen_range(lo..=hi);
            let members = index::sample(&mut rng, n, size).into_vec();
            Some(Hyperedge::uniform(members, 1.0))
        })
        .collect();
    Hypergraph::new(n, edges)
}
