//! Exact Friedkin-Johnsen machinery on a weighted digraph.
//!
//! Node `i` holds a fixed internal opinion `x_i` and an expressed opinion
//! updated as the convex combination
//!
//! ```text
//! z_i ← (x_i + Σ_j w_ij z_j) / (1 + Σ_j w_ij)
//! ```
//!
//! whose unique fixed point is `z = (I + L)⁻¹ x`. The matrix
//! `Ω = (I + L)⁻¹` is row stochastic and nonnegative; for symmetric graphs
//! it is doubly stochastic.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::digraph::WeightedDigraph;

/// Largest node count for which dense factorization is attempted.
pub const DEFAULT_DENSE_LIMIT: usize = 50_000;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Tolerance for the row/column-sum and zero-pattern checks on `Ω`.
pub const STOCHASTIC_TOL: f64 = 1e-9;
/// Entries of `Ω` may dip this far below zero from rounding.
pub const NONNEGATIVE_FLOOR: f64 = -1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FjError {
    #[error("vector of length {got} does not match node count {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{n} nodes exceed the dense limit of {limit}; use the forest sampler instead")]
    TooLarge { n: usize, limit: usize },
    #[error("no convergence after {iterations} iterations (last change {change:e})")]
    NotConverged { iterations: usize, change: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("polarization of an empty opinion vector")]
    Empty,
    #[error("internal error: {0}")]
    Internal(String),
}

fn check_len(g: &WeightedDigraph, v: &[f64]) -> Result<(), FjError> {
    if v.len() != g.node_count() {
        return Err(FjError::DimensionMismatch {
            expected: g.node_count(),
            got: v.len(),
        });
    }
    Ok(())
}

/// One synchronous update of every expressed opinion.
pub fn fj_step(g: &WeightedDigraph, x: &[f64], z: &[f64]) -> Result<Vec<f64>, FjError> {
    check_len(g, x)?;
    check_len(g, z)?;
    Ok((0..g.node_count())
        .map(|i| {
            let pull: f64 = g.out_arcs(i).map(|(j, w)| w * z[j]).sum();
            (x[i] + pull) / (1.0 + g.out_degree(i))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iterated {
    pub z: Vec<f64>,
    pub iterations: usize,
}

/// Repeats [`fj_step`] from `z⁽⁰⁾ = x`.
///
/// The update contracts in max-norm with factor `ρ = d_max / (1 + d_max)`,
/// so `‖z_k − z‖ ≤ d_max ‖z_k − z_{k−1}‖`. Iteration stops once
/// `max(1, d_max) · change < tol`, which keeps the returned vector within
/// `tol` of the fixed point.
pub fn fj_iterate(
    g: &WeightedDigraph,
    x: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Iterated, FjError> {
    if !(tol > 0.0) {
        return Err(FjError::BadTolerance(tol));
    }
    check_len(g, x)?;
    let scale = g.out_degrees().iter().cloned().fold(1.0, f64::max);
    let mut z = x.to_vec();
    let mut change = f64::INFINITY;
    for k in 1..=max_iter {
        let next = fj_step(g, x, &z)?;
        change = next
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        z = next;
        if scale * change < tol {
            return Ok(Iterated { z, iterations: k });
        }
    }
    Err(FjError::NotConverged {
        iterations: max_iter,
        change,
    })
}

/// `Σ z_i`.
pub fn overall_opinion(z: &[f64]) -> f64 {
    z.iter().sum()
}

/// Squared norm of the mean-centered opinion vector.
pub fn polarization(z: &[f64]) -> Result<f64, FjError> {
    if z.is_empty() {
        return Err(FjError::Empty);
    }
    let (lo, hi) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // The true mean lies in [lo, hi]; clamping removes summation drift.
    let mean = (overall_opinion(z) / z.len() as f64).clamp(lo, hi);
    Ok(z.iter().map(|v| (v - mean) * (v - mean)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub z: Vec<f64>,
    pub overall: f64,
    pub polarization: f64,
}

impl EquilibriumReport {
    pub fn from_opinions(z: Vec<f64>) -> Self {
        let overall = overall_opinion(&z);
        let polarization = polarization(&z).unwrap_or(0.0);
        EquilibriumReport {
            z,
            overall,
            polarization,
        }
    }
}

/// Dense `(I + L)⁻¹` with its row-stochastic structure.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    omega: DMatrix<f64>,
}

impl FundamentalMatrix {
    pub fn from_matrix(omega: DMatrix<f64>) -> Self {
        assert!(omega.is_square(), "fundamental matrix must be square");
        FundamentalMatrix { omega }
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.omega[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.omega.row_iter().map(|r| r.sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.omega.column_iter().map(|c| c.sum()).collect()
    }

    /// `Ω x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.omega * DVector::from_column_slice(x)).iter().copied().collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &FundamentalMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        self.omega
            .iter()
            .zip(other.omega.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks nonnegativity, unit row sums and zeros at unreachable pairs.
    pub fn check(&self, g: &WeightedDigraph) -> Result<(), String> {
        let n = self.n();
        if n != g.node_count() {
            return Err(format!("matrix order {n} != node count {}", g.node_count()));
        }
        for (i, s) in self.row_sums().into_iter().enumerate() {
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(format!("row {i} sums to {s}"));
            }
        }
        for i in 0..n {
            let mut reach = vec![false; n];
            for j in g.reachable_from(i) {
                reach[j] = true;
            }
            for j in 0..n {
                let w = self.omega[(i, j)];
                if w < NONNEGATIVE_FLOOR {
                    return Err(format!("entry ({i},{j}) = {w} is negative"));
                }
                if !reach[j] && w.abs() > STOCHASTIC_TOL {
                    return Err(format!("entry ({i},{j}) = {w} but {j} is unreachable from {i}"));
                }
                // Nobody trusts j more than j trusts itself.
                if i != j && w > self.omega[(j, j)] + STOCHASTIC_TOL {
                    return Err(format!("entry ({i},{j}) = {w} exceeds diagonal ({j},{j})"));
                }
            }
        }
        Ok(())
    }
}

/// Dense direct solver for `(I + L) z = x`.
#[derive(Debug, Clone, Copy)]
pub struct DenseSolver {
    pub limit: usize,
}

impl Default for DenseSolver {
    fn default() -> Self {
        DenseSolver {
            limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

impl DenseSolver {
    pub fn new(limit: usize) -> Self {
        DenseSolver { limit }
    }

    fn system(&self, g: &WeightedDigraph) -> Result<DMatrix<f64>, FjError> {
        let n = g.node_count();
        if n > self.limit {
            return Err(FjError::TooLarge {
                n,
                limit: self.limit,
            });
        }
        let mut m = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            m[(i, i)] += g.out_degree(i);
            for (j, w) in g.out_arcs(i) {
                m[(i, j)] -= w;
            }
        }
        Ok(m)
    }

    pub fn equilibrium(&self, g: &WeightedDigraph, x: &[f64]) -> Result<EquilibriumReport, FjError> {
        check_len(g, x)?;
        let lu = self.system(g)?.lu();
        let z = lu
            .solve(&DVector::from_column_slice(x))
            .ok_or_else(|| FjError::Internal("I + L reported singular".into()))?;
        Ok(EquilibriumReport::from_opinions(z.iter().copied().collect()))
    }

    pub fn fundamental_matrix(&self, g: &WeightedDigraph) -> Result<FundamentalMatrix, FjError> {
        let omega = self
            .system(g)?
            .lu()
            .try_inverse()
            .ok_or_else(|| FjError::Internal("I + L reported singular".into()))?;
        let f = FundamentalMatrix::from_matrix(omega);
        f.check(g).map_err(FjError::Internal)?;
        Ok(f)
    }
}

/// [`DenseSolver::equilibrium`] with the default node limit.
pub fn exact_equilibrium(g: &WeightedDigraph, x: &[f64]) -> Result<EquilibriumReport, FjError> {
    DenseSolver::default().equilibrium(g, x)
}

/// [`DenseSolver::fundamental_matrix`] with the default node limit.
pub fn fundamental_matrix(g: &WeightedDigraph) -> Result<FundamentalMatrix, FjError> {
    DenseSolver::default().fundamental_matrix(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_arc() -> WeightedDigraph {
        WeightedDigraph::from_arcs(2, [(0, 1, 1.0)]).unwrap()
    }

    fn random_digraph(n: usize, p: f64, wmax: f64, seed: u64) -> WeightedDigraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen_bool(p) {
                    arcs.push((i, j, rng.gen_range(0.0..wmax) + 1e-3));
                }
            }
        }
        WeightedDigraph::from_arcs(n, arcs).unwrap()
    }

    #[test]
    fn step_without_arcs_returns_internal() {
        let g = WeightedDigraph::empty(3);
        let x = [0.1, 0.5, 0.9];
        assert_eq!(fj_step(&g, &x, &[0.3, 0.3, 0.3]).unwrap(), x.to_vec());
    }

    #[test]
    fn step_keeps_consensus() {
        let g = random_digraph(6, 0.5, 2.0, 1);
        let c = vec![0.37; 6];
        for v in fj_step(&g, &c, &c).unwrap() {
            assert_relative_eq!(v, 0.37, max_relative = 1e-15);
        }
    }

    #[test]
    fn step_single_arc() {
        assert_eq!(fj_step(&single_arc(), &[0.0, 1.0], &[0.0, 1.0]).unwrap(), vec![0.5, 1.0]);
        assert!(matches!(
            fj_step(&single_arc(), &[0.0], &[0.0, 1.0]),
            Err(FjError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn iterate_edge_cases() {
        let it = fj_iterate(&WeightedDigraph::empty(2), &[0.2, 0.4], 1e-10, 100).unwrap();
        assert_eq!(it.iterations, 1);
        assert_eq!(it.z, vec![0.2, 0.4]);

        let g = random_digraph(8, 0.4, 2.0, 2);
        let it = fj_iterate(&g, &[0.6; 8], 1e-10, 100).unwrap();
        for v in it.z {
            assert_relative_eq!(v, 0.6, max_relative = 1e-14);
        }
        assert_eq!(fj_iterate(&g, &[0.6; 8], 0.0, 100), Err(FjError::BadTolerance(0.0)));
        assert!(matches!(
            fj_iterate(&g, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0], 1e-14, 2),
            Err(FjError::NotConverged { iterations: 2, .. })
        ));
    }

    #[test]
    fn iterate_agrees_with_dense_solve() {
        let tol = 1e-10;
        let g = random_digraph(50, 0.1, 2.0, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..50).map(|_| rng.gen()).collect();
        let it = fj_iterate(&g, &x, tol, DEFAULT_MAX_ITER).unwrap();
        let exact = exact_equilibrium(&g, &x).unwrap();
        for (a, b) in it.z.iter().zip(&exact.z) {
            assert!((a - b).abs() <= 10.0 * tol, "{a} vs {b}");
        }
    }

    #[test]
    fn two_node_closed_form() {
        let r = exact_equilibrium(&single_arc(), &[0.0, 1.0]).unwrap();
        assert_relative_eq!(r.z[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.z[1], 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.overall, 1.5, max_relative = 1e-15);
        let f = fundamental_matrix(&single_arc()).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.0, 1.0]);
        assert!((f.matrix() - expect).abs().max() < 1e-15);
    }

    #[test]
    fn isolated_node_matrix() {
        let f = fundamental_matrix(&WeightedDigraph::empty(1)).unwrap();
        assert_eq!(f.get(0, 0), 1.0);
    }

    #[test]
    fn dense_limit_is_enforced() {
        let g = WeightedDigraph::empty(5);
        assert_eq!(
            DenseSolver::new(4).equilibrium(&g, &[0.0; 5]),
            Err(FjError::TooLarge { n: 5, limit: 4 })
        );
        assert!(DenseSolver::new(4).fundamental_matrix(&g).is_err());
    }

    #[test]
    fn polarization_cases() {
        assert_eq!(polarization(&[0.3; 7]).unwrap(), 0.0);
        assert_eq!(polarization(&[0.1; 3]).unwrap(), 0.0);
        assert_eq!(polarization(&[0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(polarization(&[]), Err(FjError::Empty));
        assert_eq!(overall_opinion(&[0.0; 4]), 0.0);
    }

    #[test]
    fn row_dominance_can_fail_on_digraphs() {
        // A heavy single arc: node 0 trusts node 1 more than itself.
        let g = WeightedDigraph::from_arcs(2, [(0, 1, 2.0)]).unwrap();
        let f = fundamental_matrix(&g).unwrap();
        assert_relative_eq!(f.get(0, 0), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(f.get(0, 1), 2.0 / 3.0, epsilon = 1e-15);
        assert!(f.get(1, 1) > f.get(0, 1));
    }

    #[test]
    fn omega_structure_on_random_digraphs() {
        for seed in 0..30 {
            let g = random_digraph(12, 0.2, 2.0, seed);
            let f = fundamental_matrix(&g).unwrap();
            for i in 0..12 {
                let reach = g.reachable_from(i);
                for j in 0..12 {
                    let w = f.get(i, j);
                    assert!(w >= NONNEGATIVE_FLOOR);
                    if !reach.contains(&j) {
                        assert!(w.abs() <= 1e-9);
                    }
                    if j != i {
                        assert!(f.get(j, j) > w + 1e-12, "column dominance at ({i},{j})");
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..12).map(|_| rng.gen()).collect();
            let z = f.apply(&x);
            let (lo, hi) = x.iter().fold((1.0f64, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
            assert!(z.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
        }
    }
}
