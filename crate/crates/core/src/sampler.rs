//! Monte Carlo estimation of equilibrium opinions by sampling spanning
//! converging forests.
//!
//! A forest is drawn with probability `ε(φ) / ε(Γ)` by loop-erased random
//! walks: from each node not yet in the forest, walk until absorbed (with
//! probability `1 / (1 + d_u)` at the current node `u`) or until hitting the
//! frozen forest, moving along arc `u -> v` with probability
//! `w_uv / (1 + d_u)`. The successor map is overwritten on revisits, which
//! erases loops, and the surviving path is then frozen with its root.
//!
//! Since `P(root_of[i] = j) = ω_ij`, averaging `x[root_of[i]]` over
//! independent forests is an unbiased estimate of `z_i`.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::digraph::WeightedDigraph;
use crate::dynamics::{overall_opinion, polarization};
use crate::forest::InForest;
use crate::hypergraph::NodeId;

pub const DEFAULT_TAU: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("vector of length {got} does not match node count {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample count must be at least {min}, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("worker count must be positive")]
    NoWorkers,
    #[error("internal opinion {value} at node {node} is not finite")]
    NonFinite { node: NodeId, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub tau: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            tau: DEFAULT_TAU,
            seed: 0,
            workers: 1,
        }
    }
}

impl SamplerConfig {
    pub fn new(tau: usize, seed: u64) -> Self {
        SamplerConfig {
            tau,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        SamplerConfig { workers, ..self }
    }

    fn check(&self, min_tau: usize) -> Result<(), SamplerError> {
        if self.tau < min_tau {
            return Err(SamplerError::TooFewSamples {
                min: min_tau,
                got: self.tau,
            });
        }
        if self.workers == 0 {
            return Err(SamplerError::NoWorkers);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub z_hat: Vec<f64>,
    pub overall_hat: f64,
    /// Polarization of `z_hat`. Sampling noise biases it upward by `O(1/τ)`.
    pub polarization_hat: f64,
    pub tau: usize,
    pub seed: u64,
}

/// Random stream of sample `index`: ChaCha keyed by the seed, one stream
/// per sample, so samples are independent of how they are split across
/// workers.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per-worker walk state, reused across samples. A node belongs to the
/// current forest when its stamp equals the current sample's stamp, so no
/// O(n) reset is needed between samples.
struct Walker {
    stamp: Vec<u64>,
    next: Vec<NodeId>,
    root: Vec<NodeId>,
    current: u64,
}

const NO_NODE: NodeId = usize::MAX;

impl Walker {
    fn new(n: usize) -> Self {
        Walker {
            stamp: vec![0; n],
            next: vec![NO_NODE; n],
            root: vec![0; n],
            current: 0,
        }
    }

    /// Draws one forest into `self.next` / `self.root`.
    fn sample<R: Rng>(&mut self, g: &WeightedDigraph, rng: &mut R) {
        self.current += 1;
        let cur = self.current;
        for i in 0..g.node_count() {
            let mut u = i;
            while self.stamp[u] != cur {
                let d = g.out_degree(u);
                // One uniform draw on [0, 1 + d): [0, 1) absorbs, otherwise the
                // offset selects an arc proportionally to its weight.
                let r = rng.gen::<f64>() * (1.0 + d);
                if d == 0.0 || r < 1.0 {
                    self.stamp[u] = cur;
                    self.next[u] = NO_NODE;
                    self.root[u] = u;
                } else {
                    let v = g.successor_at(u, r - 1.0);
                    self.next[u] = v;
                    u = v;
                }
            }
            let root = self.root[u];
            let mut u = i;
            while self.stamp[u] != cur {
                self.stamp[u] = cur;
                self.root[u] = root;
                u = self.next[u];
            }
        }
    }

    fn forest(&self) -> InForest {
        InForest {
            successor: self
                .next
                .iter()
                .map(|&v| (v != NO_NODE).then_some(v))
                .collect(),
            root_of: self.root.clone(),
        }
    }
}

/// Draws one spanning converging forest.
pub fn sample_forest<R: Rng>(g: &WeightedDigraph, rng: &mut R) -> InForest {
    let mut w = Walker::new(g.node_count());
    w.sample(g, rng);
    w.forest()
}

/// Per-node running statistics of `x[root_of[i]]`.
#[derive(Debug, Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments {
            sum: vec![0.0; n],
            sum_sq: vec![0.0; n],
            lo: vec![f64::INFINITY; n],
            hi: vec![f64::NEG_INFINITY; n],
        }
    }

    fn merge(&mut self, other: &Moments) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
            self.lo[i] = self.lo[i].min(other.lo[i]);
            self.hi[i] = self.hi[i].max(other.hi[i]);
        }
    }

    /// Sample means, clamped into the observed range so that rounding
    /// cannot push an estimate outside the values it averages.
    fn means(&self, tau: usize) -> Vec<f64> {
        (0..self.sum.len())
            .map(|i| (self.sum[i] / tau as f64).clamp(self.lo[i], self.hi[i]))
            .collect()
    }

    fn stderr(&self, tau: usize) -> Vec<f64> {
        let t = tau as f64;
        self.means(tau)
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                if self.lo[i] == self.hi[i] {
                    return 0.0;
                }
                let var = ((self.sum_sq[i] - t * m * m) / (t - 1.0)).max(0.0);
                (var / t).sqrt()
            })
            .collect()
    }
}

fn chunks(tau: usize, workers: usize) -> Vec<Range<u64>> {
    let workers = workers.min(tau).max(1);
    let base = tau / workers;
    let extra = tau % workers;
    let mut start = 0u64;
    (0..workers)
        .map(|w| {
            let len = (base + usize::from(w < extra)) as u64;
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Runs `cfg.tau` samples across `cfg.workers` threads. Each worker folds
/// its contiguous range of samples; partial results merge in worker order.
fn run_parallel<T, F, M>(g: &WeightedDigraph, cfg: &SamplerConfig, init: T, work: F, mut merge: M) -> T
where
    T: Clone + Send + Sync,
    F: Fn(&mut T, &mut Walker, &mut ChaCha8Rng) + Sync,
    M: FnMut(&mut T, &T),
{
    let ranges = chunks(cfg.tau, cfg.workers);
    let run = |range: Range<u64>| {
        let mut acc = init.clone();
        let mut walker = Walker::new(g.node_count());
        for s in range {
            let mut rng = sample_rng(cfg.seed, s);
            work(&mut acc, &mut walker, &mut rng);
        }
        acc
    };
    let parts: Vec<T> = if ranges.len() == 1 {
        vec![run(ranges[0].clone())]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|r| scope.spawn(move || run(r)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampler worker panicked"))
                .collect()
        })
    };
    let mut total = init;
    for p in &parts {
        merge(&mut total, p);
    }
    total
}

fn check_opinions(g: &WeightedDigraph, x: &[f64]) -> Result<(), SamplerError> {
    if x.len() != g.node_count() {
        return Err(SamplerError::DimensionMismatch {
            expected: g.node_count(),
            got: x.len(),
        });
    }
    if let Some((node, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(SamplerError::NonFinite { node, value });
    }
    Ok(())
}

fn root_moments(g: &WeightedDigraph, x: &[f64], cfg: &SamplerConfig) -> Moments {
    run_parallel(
        g,
        cfg,
        Moments::new(g.node_count()),
        |acc, walker, rng| {
            walker.sample(g, rng);
            for (i, &r) in walker.root.iter().enumerate() {
                let v = x[r];
                acc.sum[i] += v;
                acc.sum_sq[i] += v * v;
                acc.lo[i] = acc.lo[i].min(v);
                acc.hi[i] = acc.hi[i].max(v);
            }
        },
        Moments::merge,
    )
}

fn report(g: &WeightedDigraph, m: &Moments, cfg: &SamplerConfig) -> EstimateReport {
    let z_hat = if g.node_count() == 0 {
        Vec::new()
    } else {
        m.means(cfg.tau)
    };
    EstimateReport {
        overall_hat: overall_opinion(&z_hat),
        polarization_hat: polarization(&z_hat).unwrap_or(0.0),
        z_hat,
        tau: cfg.tau,
        seed: cfg.seed,
    }
}

/// Estimates `z`, `Σ z` and the polarization from `cfg.tau` forests.
pub fn estimate(
    g: &WeightedDigraph,
    x: &[f64],
    cfg: &SamplerConfig,
) -> Result<EstimateReport, SamplerError> {
    cfg.check(1)?;
    check_opinions(g, x)?;
    let m = root_moments(g, x, cfg);
    Ok(report(g, &m, cfg))
}

/// Per-node standard error of `ẑ_i`: sample standard deviation of
/// `x[root_of[i]]` over the forests, divided by `√τ`.
pub fn estimator_stderr(
    g: &WeightedDigraph,
    x: &[f64],
    cfg: &SamplerConfig,
) -> Result<Vec<f64>, SamplerError> {
    estimate_with_stderr(g, x, cfg).map(|(_, s)| s)
}

/// [`estimate`] and [`estimator_stderr`] from the same set of forests.
pub fn estimate_with_stderr(
    g: &WeightedDigraph,
    x: &[f64],
    cfg: &SamplerConfig,
) -> Result<(EstimateReport, Vec<f64>), SamplerError> {
    cfg.check(2)?;
    check_opinions(g, x)?;
    let m = root_moments(g, x, cfg);
    Ok((report(g, &m, cfg), m.stderr(cfg.tau)))
}

/// Empirical `P(root_of[i] = j)` over `cfg.tau` forests, as a dense
/// row-major `n × n` table.
pub fn root_frequencies(g: &WeightedDigraph, cfg: &SamplerConfig) -> Result<Vec<Vec<f64>>, SamplerError> {
    cfg.check(1)?;
    let n = g.node_count();
    let counts = run_parallel(
        g,
        cfg,
        vec![0u64; n * n],
        |acc, walker, rng| {
            walker.sample(g, rng);
            for (i, &r) in walker.root.iter().enumerate() {
                acc[i * n + r] += 1;
            }
        },
        |total, part| {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        },
    );
    let tau = cfg.tau as f64;
    Ok((0..n)
        .map(|i| (0..n).map(|j| counts[i * n + j] as f64 / tau).collect())
        .collect())
}
