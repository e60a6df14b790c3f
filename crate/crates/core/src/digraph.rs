//! Compressed weighted digraph.
//!
//! Arcs are stored per source in contiguous slices, together with the
//! weighted out-degree `d_i` and running prefix sums of each node's arc
//! weights so that a successor can be drawn with a binary search.

use thiserror::Error;

use crate::hypergraph::NodeId;

/// Relative tolerance for weight equality in [`WeightedDigraph::is_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("arc {from}->{target} references a node outside 0..{n}")]
    NodeOutOfRange {
        from: NodeId,
        target: NodeId,
        n: usize,
    },
    #[error("self-arc at node {0}")]
    SelfArc(NodeId),
    #[error("arc {from}->{target} has invalid weight {weight}")]
    BadWeight {
        from: NodeId,
        target: NodeId,
        weight: f64,
    },
    #[error("vector of length {got} does not match node count {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
    prefix: Vec<f64>,
    out_degree: Vec<f64>,
}

impl WeightedDigraph {
    /// Graph with `n` nodes and no arcs.
    pub fn empty(n: usize) -> Self {
        WeightedDigraph {
            n,
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            weights: Vec::new(),
            prefix: Vec::new(),
            out_degree: vec![0.0; n],
        }
    }

    /// Builds the graph from `(source, target, weight)` triples.
    ///
    /// Parallel arcs are merged by summing their weights in input order and
    /// zero-weight arcs are dropped. Negative or non-finite weights and
    /// self-arcs are rejected.
    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut list: Vec<(NodeId, NodeId, f64)> = Vec::new();
        for (source, target, weight) in arcs {
            if source >= n || target >= n {
                return Err(GraphError::NodeOutOfRange { from: source, target, n });
            }
            if source == target {
                return Err(GraphError::SelfArc(source));
            }
            if !(weight >= 0.0) || !weight.is_finite() {
                return Err(GraphError::BadWeight {
                    from: source,
                    target,
                    weight,
                });
            }
            list.push((source, target, weight));
        }
        // Stable, so merged weights are summed in input order.
        list.sort_by_key(|&(s, t, _)| (s, t));

        let mut merged: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(list.len());
        for (s, t, w) in list {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (s, t) => last.2 += w,
                _ => merged.push((s, t, w)),
            }
        }
        merged.retain(|&(_, _, w)| w > 0.0);

        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(merged.len());
        let mut weights = Vec::with_capacity(merged.len());
        for (s, t, w) in merged {
            offsets[s + 1] += 1;
            targets.push(t);
            weights.push(w);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }

        let mut prefix = Vec::with_capacity(weights.len());
        let mut out_degree = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for &w in &weights[offsets[i]..offsets[i + 1]] {
                acc += w;
                prefix.push(acc);
            }
            out_degree[i] = acc;
        }

        let g = WeightedDigraph {
            n,
            offsets,
            targets,
            weights,
            prefix,
            out_degree,
        };
        debug_assert!(g.check_degrees());
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// Weighted out-degree `d_i`.
    pub fn out_degree(&self, i: NodeId) -> f64 {
        self.out_degree[i]
    }

    pub fn out_degrees(&self) -> &[f64] {
        &self.out_degree
    }

    /// `(target, weight)` pairs leaving `i`, sorted by target.
    pub fn out_arcs(&self, i: NodeId) -> impl ExactSizeIterator<Item = (NodeId, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn out_targets(&self, i: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Running sums of `i`'s arc weights; the last entry equals `d_i`.
    pub fn prefix_sums(&self, i: NodeId) -> &[f64] {
        &self.prefix[self.offsets[i]..self.offsets[i + 1]]
    }

    /// All arcs as `(source, target, weight)`, sorted by source then target.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.out_arcs(i).map(move |(j, w)| (i, j, w)))
    }

    /// Weight of arc `i -> j`, zero when absent.
    pub fn weight(&self, i: NodeId, j: NodeId) -> f64 {
        let t = self.out_targets(i);
        match t.binary_search(&j) {
            Ok(k) => self.weights[self.offsets[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Target of the arc selected by `r ∈ [0, d_i)` over the prefix sums.
    pub fn successor_at(&self, i: NodeId, r: f64) -> NodeId {
        let prefix = self.prefix_sums(i);
        let k = prefix.partition_point(|&p| p <= r);
        // r can round up to d_i; clamp onto the last arc.
        self.out_targets(i)[k.min(prefix.len() - 1)]
    }

    /// `(D - A) v`, arc by arc.
    pub fn laplacian_apply(&self, v: &[f64]) -> Result<Vec<f64>, GraphError> {
        if v.len() != self.n {
            return Err(GraphError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| {
                self.out_arcs(i)
                    .map(|(j, w)| w * (v[i] - v[j]))
                    .sum::<f64>()
            })
            .collect())
    }

    /// Nodes reachable from `i` along directed paths, including `i`, in
    /// ascending order.
    pub fn reachable_from(&self, i: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![i];
        seen[i] = true;
        while let Some(u) = stack.pop() {
            for &v in self.out_targets(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter_map(|(k, &s)| s.then_some(k))
            .collect()
    }

    /// True iff every arc `i -> j` has a reverse arc of equal weight.
    pub fn is_symmetric(&self) -> bool {
        self.arcs().all(|(i, j, w)| {
            let back = self.weight(j, i);
            (w - back).abs() <= SYMMETRY_TOL * w.abs().max(back.abs()).max(1.0)
        })
    }

    fn check_degrees(&self) -> bool {
        (0..self.n).all(|i| {
            let s: f64 = self.out_arcs(i).map(|(_, w)| w).sum();
            (s - self.out_degree[i]).abs() <= 1e-12 * s.max(1.0)
        })
    }
}
