//! Synchronization analysis and aggregation-based model reduction for
//! swing-equation power networks.
//!
//! A [`PowerNetwork`] of generators, generator buses and non-generator buses
//! joined by lossless reactance lines is Kron-reduced into a [`KronSystem`],
//! whose coupling matrix `Gamma` decides which generator pairs and partitions
//! synchronize ([`sync`]). Any [`Partition`] can be used to aggregate the
//! network into a smaller one of the same form ([`aggregation`]); for weakly
//! synchronized partitions and cluster-uniform initial states the reduced
//! model reproduces the full response exactly ([`simulator`]).

pub mod aggregation;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod kron;
pub mod network;
pub mod partition;
pub mod simulator;
pub mod sync;

pub use nalgebra::{DMatrix, DVector};

pub use aggregation::{aggregate, build_p, lift, project_initial, AggregationMatrix};
pub use error::{Error, Result};
pub use kron::{
    kron_reduce, recover_gen_bus_voltages, recover_nongen_voltages, KronSystem, Phasor,
};
pub use network::{build_laplacian, build_ld, Generator, LaplacianBlocks, Line, PowerNetwork};
pub use partition::Partition;
pub use simulator::{
    compare, integrate, swing_rhs, CompareMetrics, SimConfig, SwingState, Trajectory,
};
pub use sync::{
    coarsest_equitable_refinement, in_s_ij, in_x_ij, pair_sync, pair_sync_general, strong_sync,
    weak_sync, SyncReport, DEFAULT_TOL,
};

/// Laplacian blocks and Kron reduction in one step.
pub fn analyze(net: &PowerNetwork) -> Result<(LaplacianBlocks, KronSystem)> {
    let blocks = build_laplacian(net);
    let ks = kron_reduce(net, &blocks)?;
    Ok((blocks, ks))
}
