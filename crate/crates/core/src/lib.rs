//! Planted partition models, Diamond Percolation community detection, and
//! pair-counting partition similarity.
//!
//! The crate is organised bottom-up:
//!
//! * [`partition`]: the [`Partition`] type and random partition samplers
//!   (balanced, multinomial, power-law, Boltzmann-uniform).
//! * [`graph`]: the immutable CSR [`Graph`] and the PPM / Erdős–Rényi
//!   generators.
//! * [`diamond`]: common-neighbor filtering and connected components.
//! * [`metrics`]: pair counts, the correlation coefficient and refinement.
//! * [`theory`]: closed-form recovery thresholds, bounds and limits, plus the
//!   Monte Carlo estimate of the weak-recovery constant.
//! * [`stats`]: small statistical helpers shared by tests and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diamond;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod partition;
mod quadrature;
pub mod rng;
pub mod stats;
pub mod theory;

pub use diamond::{diamond_percolation, filter_edges, DiamondConfig};
pub use error::{Error, Result};
pub use graph::{Graph, PpmParams};
pub use metrics::{correlation, is_refinement, pair_counts, PairCounts};
pub use partition::{Partition, PowerLawSpec};
pub use rng::{stream_rng, stream_seed, SimRng};
