//! Friedkin-Johnsen opinion dynamics on hypergraphs.
//!
//! A hypergraph with hyperedge-dependent node weights is projected onto a
//! weighted digraph (the undirected clique expansion or the directed
//! projection), on which equilibrium opinions `z = (I + L)⁻¹ x`, the overall
//! opinion `Σ z_i` and the polarization `‖z − mean(z)‖²` are computed either
//! exactly with a dense solve or approximately by sampling spanning
//! converging forests in time linear in the graph size.
//!
//! ```
//! use hyperfj::{hypergraph::{Hyperedge, Hypergraph}, projection, dynamics};
//!
//! let h = Hypergraph::new(3, vec![Hyperedge::new(vec![0, 1, 2], 1.0, vec![0.5, 0.3, 0.2])]);
//! let g = projection::project_directed(&h).unwrap();
//! let eq = dynamics::exact_equilibrium(&g, &[0.0, 0.5, 1.0]).unwrap();
//! assert!(eq.polarization >= 0.0);
//! ```

pub mod cli;
pub mod digraph;
pub mod dynamics;
pub mod forest;
pub mod hypergraph;
pub mod io;
pub mod projection;
pub mod sampler;
pub mod toy;

pub use digraph::WeightedDigraph;
pub use dynamics::{EquilibriumReport, FundamentalMatrix};
pub use forest::InForest;
pub use hypergraph::{Hyperedge, Hypergraph, NodeId};
pub use sampler::{EstimateReport, SamplerConfig};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] digraph::GraphError),
    #[error(transparent)]
    Projection(#[from] projection::ProjectionError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::FjError),
    #[error(transparent)]
    Forest(#[from] forest::ForestError),
    #[error(transparent)]
    Sampler(#[from] sampler::SamplerError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Graph(_) => "graph",
            Error::Projection(_) => "projection",
            Error::Dynamics(_) => "dynamics",
            Error::Forest(_) => "forest",
            Error::Sampler(_) => "sampler",
            Error::Io(_) => "io",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
