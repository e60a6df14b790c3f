//! End-to-end checks across projection, solvers, oracle and sampler.

use approx::assert_abs_diff_eq;
use hyperfj::dynamics::{exact_equilibrium, fj_iterate, fundamental_matrix, DEFAULT_MAX_ITER};
use hyperfj::forest::forest_matrix_bruteforce;
use hyperfj::hypergraph::{random_hypergraph, random_opinions};
use hyperfj::projection::{project_clique, project_directed};
use hyperfj::sampler::{estimate, estimate_with_stderr, SamplerConfig};
use hyperfj::toy::{toy_digraph, toy_hypergraph, toy_opinions};

#[test]
fn toy_hypergraph_equilibria() {
    let h = toy_hypergraph();
    let x = toy_opinions();
    let c = exact_equilibrium(&project_clique(&h).unwrap(), &x).unwrap();
    let d = exact_equilibrium(&project_directed(&h).unwrap(), &x).unwrap();
    assert_abs_diff_eq!(c.overall, 2.1, epsilon = 1e-12);
    assert_abs_diff_eq!(d.overall, 1.99195, epsilon = 1e-5);
    assert_abs_diff_eq!(c.polarization, 0.036929, epsilon = 1e-6);
    assert_abs_diff_eq!(d.polarization, 0.040742, epsilon = 1e-6);
    let want_c = [0.2539, 0.2713, 0.3319, 0.3451, 0.4206, 0.4772];
    let want_d = [0.2222, 0.2536, 0.3159, 0.3262, 0.4262, 0.4477];
    for i in 0..6 {
        assert_abs_diff_eq!(c.z[i], want_c[i], epsilon = 1e-4);
        assert_abs_diff_eq!(d.z[i], want_d[i], epsilon = 1e-4);
    }
}

#[test]
fn reversing_opinions_flips_the_directed_shift() {
    let g = project_directed(&toy_hypergraph()).unwrap();
    let x = toy_opinions();
    let rev: Vec<f64> = x.iter().rev().cloned().collect();
    let a = exact_equilibrium(&g, &x).unwrap();
    let b = exact_equilibrium(&g, &rev).unwrap();
    assert_abs_diff_eq!(b.overall, 2.20805, epsilon = 1e-5);
    // Σz = Σ_j c_j x_j with column sums c; reversing x mirrors the shift
    // only because Σc = n, so the two totals straddle Σx = 2.1.
    assert!(a.overall < 2.1 && b.overall > 2.1);
}

#[test]
fn three_oracles_agree_on_toy_digraph() {
    let g = toy_digraph();
    let brute = forest_matrix_bruteforce(&g).unwrap();
    let inv = fundamental_matrix(&g).unwrap();
    assert!(brute.max_abs_diff(&inv) < 1e-14);
    let x = [0.9, 0.1, 0.4, 0.7];
    let it = fj_iterate(&g, &x, 1e-13, DEFAULT_MAX_ITER).unwrap();
    for (a, b) in inv.apply(&x).iter().zip(&it.z) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn sampler_mean_is_unbiased() {
    // Mean of 200 independent τ=1000 estimates on the toy digraph against
    // the exact equilibrium, in units of the standard error of that mean.
    let g = toy_digraph();
    let x = [0.9, 0.1, 0.4, 0.7];
    let z = exact_equilibrium(&g, &x).unwrap().z;
    let runs = 200;
    let mut sum = [0.0; 4];
    let mut sum_sq = [0.0; 4];
    for r in 0..runs {
        let est = estimate(&g, &x, &SamplerConfig::new(1000, 10_000 + r)).unwrap();
        for i in 0..4 {
            sum[i] += est.z_hat[i];
            sum_sq[i] += est.z_hat[i] * est.z_hat[i];
        }
    }
    let n = runs as f64;
    for i in 0..4 {
        let mean = sum[i] / n;
        let var = (sum_sq[i] / n - mean * mean) * n / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - z[i]).abs() < 4.0 * se, "node {i}: mean {mean} vs {}, se {se}", z[i]);
    }
}

#[test]
fn sampler_tracks_exact_solution_on_projection() {
    let h = random_hypergraph(60, 50, 2, 5, 11).powerlaw_gamma(11);
    let g = project_directed(&h).unwrap();
    let x = random_opinions(60, 12);
    let z = exact_equilibrium(&g, &x).unwrap().z;
    let cfg = SamplerConfig::new(20_000, 5).with_workers(3);
    let (est, se) = estimate_with_stderr(&g, &x, &cfg).unwrap();
    let within = est
        .z_hat
        .iter()
        .zip(&z)
        .zip(&se)
        .filter(|((a, b), s)| (*a - *b).abs() <= 5.0 * **s + 1e-12)
        .count();
    assert!(within >= 59, "{within}/60 within 5 stderr");
}

#[test]
fn worker_count_only_changes_summation_order() {
    // Every worker count draws the same forests; only the order in which
    // partial sums are merged differs, so results agree to rounding and are
    // bit-identical for a fixed worker count.
    let g = project_directed(&toy_hypergraph()).unwrap();
    let x = toy_opinions();
    let one = estimate(&g, &x, &SamplerConfig::new(5000, 9)).unwrap();
    let four = estimate(&g, &x, &SamplerConfig::new(5000, 9).with_workers(4)).unwrap();
    let again = estimate(&g, &x, &SamplerConfig::new(5000, 9).with_workers(4)).unwrap();
    assert_eq!(four, again);
    for (a, b) in one.z_hat.iter().zip(&four.z_hat) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}
