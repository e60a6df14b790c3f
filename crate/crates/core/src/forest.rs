//! Spanning converging forests (in-forests) and the brute-force oracle.
//!
//! An in-forest assigns every node either no successor (it is a root) or
//! exactly one out-arc, with no cycles. Its weight `ε(φ)` is the product of
//! its arc weights (one for the empty forest). Summing over all in-forests
//! `Γ`, and over the subset `Γ_ij` in which `i` drains into root `j`, gives
//!
//! ```text
//! (I + L)⁻¹[i][j] = ε(Γ_ij) / ε(Γ)
//! ```
//!
//! Enumeration is exponential and only meant as a correctness oracle for
//! small graphs.

use std::ops::Mul;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::digraph::WeightedDigraph;
use crate::dynamics::FundamentalMatrix;
use crate::hypergraph::NodeId;

/// Largest graph the enumerator accepts.
pub const MAX_ENUMERATION_NODES: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum ForestError {
    #[error("{n} nodes exceed the enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("node {node} outside 0..{n}")]
    NodeOutOfRange { node: NodeId, n: usize },
}

/// A spanning converging forest with each node's root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InForest {
    pub successor: Vec<Option<NodeId>>,
    pub root_of: Vec<NodeId>,
}

impl InForest {
    /// Resolves roots; `None` if the successor map has a cycle or points
    /// outside the node range.
    pub fn from_successors(successor: Vec<Option<NodeId>>) -> Option<InForest> {
        let n = successor.len();
        let mut root_of = vec![usize::MAX; n];
        let mut path = Vec::new();
        let mut on_path = vec![false; n];
        for start in 0..n {
            let mut u = start;
            while root_of[u] == usize::MAX {
                if on_path[u] {
                    return None;
                }
                on_path[u] = true;
                path.push(u);
                match successor[u] {
                    None => {
                        root_of[u] = u;
                        break;
                    }
                    Some(v) if v < n => u = v,
                    Some(_) => return None,
                }
            }
            let root = root_of[u];
            for v in path.drain(..) {
                root_of[v] = root;
                on_path[v] = false;
            }
        }
        Some(InForest { successor, root_of })
    }

    pub fn len(&self) -> usize {
        self.successor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successor.is_empty()
    }

    pub fn is_root(&self, i: NodeId) -> bool {
        self.successor[i].is_none()
    }

    /// Product of the weights of the forest's arcs in `g`.
    pub fn weight(&self, g: &WeightedDigraph) -> f64 {
        self.successor
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|j| g.weight(i, j)))
            .product()
    }

    /// Checks arc membership, acyclicity and root labels against `g`.
    pub fn check(&self, g: &WeightedDigraph) -> Result<(), String> {
        if self.len() != g.node_count() || self.root_of.len() != self.len() {
            return Err("forest size does not match graph".into());
        }
        for (i, s) in self.successor.iter().enumerate() {
            if let Some(j) = *s {
                if j >= self.len() || g.weight(i, j) <= 0.0 {
                    return Err(format!("successor {i}->{j} is not an arc"));
                }
            }
        }
        match InForest::from_successors(self.successor.clone()) {
            None => Err("successor map has a cycle".into()),
            Some(f) if f.root_of != self.root_of => Err("root labels disagree".into()),
            Some(_) => Ok(()),
        }
    }
}

/// Every in-forest of a graph with its weight `ε(φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestFamily {
    pub forests: Vec<(InForest, f64)>,
}

impl ForestFamily {
    pub fn len(&self) -> usize {
        self.forests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forests.is_empty()
    }

    /// `ε(Γ)`.
    pub fn total_weight(&self) -> f64 {
        self.forests.iter().map(|(_, w)| w).sum()
    }

    /// `ε(Γ_ij)`.
    pub fn rooted_weight(&self, i: NodeId, j: NodeId) -> f64 {
        self.forests
            .iter()
            .filter(|(f, _)| f.root_of[i] == j)
            .map(|(_, w)| w)
            .sum()
    }
}

fn guard(g: &WeightedDigraph) -> Result<(), ForestError> {
    let n = g.node_count();
    if n > MAX_ENUMERATION_NODES {
        return Err(ForestError::TooLarge {
            n,
            limit: MAX_ENUMERATION_NODES,
        });
    }
    Ok(())
}

/// Depth-first search over successor assignments in node order. A choice
/// `i -> t` is pruned when following already-assigned successors from `t`
/// leads back to `i`; every cycle is caught when its last node is assigned.
fn visit_forests<W, F>(g: &WeightedDigraph, arc_weight: impl Fn(f64) -> W, mut visit: F)
where
    W: Clone + One + for<'a> Mul<&'a W, Output = W>,
    F: FnMut(&[Option<NodeId>], &W),
{
    let n = g.node_count();
    let options: Vec<Vec<(NodeId, W)>> = (0..n)
        .map(|i| g.out_arcs(i).map(|(j, w)| (j, arc_weight(w))).collect())
        .collect();
    let mut successor: Vec<Option<NodeId>> = vec![None; n];

    fn closes_cycle(successor: &[Option<NodeId>], assigned: usize, i: NodeId, t: NodeId) -> bool {
        let mut u = t;
        loop {
            if u == i {
                return true;
            }
            if u >= assigned {
                return false;
            }
            match successor[u] {
                Some(v) => u = v,
                None => return false,
            }
        }
    }

    fn recurse<W, F>(
        i: usize,
        options: &[Vec<(NodeId, W)>],
        successor: &mut Vec<Option<NodeId>>,
        weight: W,
        visit: &mut F,
    ) where
        W: Clone + for<'a> Mul<&'a W, Output = W>,
        F: FnMut(&[Option<NodeId>], &W),
    {
        if i == options.len() {
            visit(successor, &weight);
            return;
        }
        successor[i] = None;
        recurse(i + 1, options, successor, weight.clone(), visit);
        for (t, w) in &options[i] {
            if closes_cycle(successor, i, i, *t) {
                continue;
            }
            successor[i] = Some(*t);
            recurse(i + 1, options, successor, weight.clone() * w, visit);
        }
        successor[i] = None;
    }

    recurse(0, &options, &mut successor, W::one(), &mut visit);
}

fn roots(successor: &[Option<NodeId>], out: &mut [NodeId]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let mut u = i;
        while let Some(v) = successor[u] {
            u = v;
        }
        *slot = u;
    }
}

/// Lists every in-forest of `g` exactly once, with its weight.
pub fn enumerate_in_forests(g: &WeightedDigraph) -> Result<ForestFamily, ForestError> {
    guard(g)?;
    let mut forests = Vec::new();
    visit_forests(g, |w| w, |succ, &w| {
        let f = InForest::from_successors(succ.to_vec()).expect("enumerated forests are acyclic");
        forests.push((f, w));
    });
    Ok(ForestFamily { forests })
}

/// `ε(Γ_ij)`: total weight of forests in which `i` lies in the tree rooted at `j`.
pub fn forest_weight_rooted(g: &WeightedDigraph, i: NodeId, j: NodeId) -> Result<f64, ForestError> {
    guard(g)?;
    let n = g.node_count();
    for node in [i, j] {
        if node >= n {
            return Err(ForestError::NodeOutOfRange { node, n });
        }
    }
    let mut total = 0.0;
    let mut root = vec![0; n];
    visit_forests(g, |w| w, |succ, &w| {
        roots(succ, &mut root);
        if root[i] == j {
            total += w;
        }
    });
    Ok(total)
}

/// Accumulates `ε(Γ)` and every `ε(Γ_ij)` in one pass.
fn forest_weights<W>(g: &WeightedDigraph, arc_weight: impl Fn(f64) -> W) -> (W, Vec<Vec<W>>)
where
    W: Clone + Zero + One + for<'a> Mul<&'a W, Output = W> + for<'a> std::ops::AddAssign<&'a W>,
{
    let n = g.node_count();
    let mut total = W::zero();
    let mut rooted = vec![vec![W::zero(); n]; n];
    let mut root = vec![0; n];
    visit_forests(g, arc_weight, |succ, w| {
        roots(succ, &mut root);
        total += w;
        for (i, &r) in root.iter().enumerate() {
            rooted[i][r] += w;
        }
    });
    (total, rooted)
}

/// `Ω` assembled entry by entry as `ε(Γ_ij) / ε(Γ)` in floating point.
pub fn forest_matrix_bruteforce(g: &WeightedDigraph) -> Result<FundamentalMatrix, ForestError> {
    guard(g)?;
    let n = g.node_count();
    let (total, rooted) = forest_weights(g, |w| w);
    let m = DMatrix::from_fn(n, n, |i, j| rooted[i][j] / total);
    Ok(FundamentalMatrix::from_matrix(m))
}

/// Exact forest weights. Every finite `f64` is a dyadic rational, so the
/// conversion is lossless and the sums are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactForestWeights {
    /// `ε(Γ)`.
    pub total: BigRational,
    /// `ε(Γ_ij)` indexed `[i][j]`.
    pub rooted: Vec<Vec<BigRational>>,
}

impl ExactForestWeights {
    /// `ε(Γ_ij) / ε(Γ)`.
    pub fn omega(&self, i: NodeId, j: NodeId) -> BigRational {
        &self.rooted[i][j] / &self.total
    }

    /// `ε(Γ)` as an integer, when it is one (e.g. unit weights, where it
    /// counts the forests).
    pub fn total_as_integer(&self) -> Option<BigInt> {
        self.total.is_integer().then(|| self.total.to_integer())
    }
}

pub fn exact_forest_weights(g: &WeightedDigraph) -> Result<ExactForestWeights, ForestError> {
    guard(g)?;
    let (total, rooted) = forest_weights(g, |w| {
        BigRational::from_float(w).expect("graph weights are finite")
    });
    Ok(ExactForestWeights { total, rooted })
}
