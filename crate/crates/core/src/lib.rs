//! Single-linkage clustering on a simulated massively-parallel runtime.
//!
//! The crate builds `(1 + η)`-approximate minimum spanning trees for point
//! sets under `ℓ1`, `ℓ2` and `ℓ∞` by repeatedly sampling a randomly shifted
//! hierarchical grid, merging components cell by cell from the bottom level
//! up ([`unitstep`]), and running an exact Borůvka pass over the union of all
//! emitted edges ([`slc`]). Every distributed step runs on a logical
//! machine model ([`mpc`]) that records rounds, per-machine words and message
//! volume, so space and round bounds can be asserted from the trace.
//!
//! Alongside the approximate pipeline:
//!
//! - [`hamming`] computes exact Hamming MSTs for small dimension through
//!   mask-projected sorting.
//! - [`hardness`] generates cycle, connectivity and Hamming instances whose
//!   2-SLC objective separates one cycle from two, plus a Gaussian JL map.
//! - [`oracle`] holds deliberately naive ground truth (Prim, Kruskal,
//!   exhaustive partition search) used by the tests.
//! - [`io`] and [`experiment`] drive CSV ingestion and the k-sweep reports
//!   behind the `slc` binary.
//!
//! ```
//! use mpc_slc::{approximate_mst, k_slc_from_mst, Metric, PointSet, Seed, SlcParams};
//!
//! let ps = PointSet::new(
//!     vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![10.0, 0.0], vec![11.0, 0.0]],
//!     Metric::L2,
//! )
//! .unwrap();
//! let run = approximate_mst(&ps, &SlcParams::new(0.5, Seed(7))).unwrap();
//! let two = k_slc_from_mst(&run.tree, 2, ps.len()).unwrap();
//! assert_eq!(two.labels[0], two.labels[1]);
//! assert_ne!(two.labels[1], two.labels[2]);
//! ```

pub mod error;
pub mod experiment;
pub mod graph;
pub mod hamming;
pub mod hardness;
pub mod io;
pub mod mpc;
pub mod oracle;
pub mod partition;
pub mod points;
pub mod rng;
pub mod slc;
pub mod unitstep;

mod kdtree;

pub use error::{Error, Result};
pub use graph::{Edge, SpanningTree, WeightedEdgeList};
pub use mpc::{MpcConfig, MpcTrace, RoundStats};
pub use partition::{sample_partition, CellId, HierarchicalPartition, PartitionParams};
pub use points::{distance, sparse_distance, Metric, PointSet, SparsePoint};
pub use rng::{rng_stream, Seed};
pub use slc::{
    approximate_mst, derive_eps, k_slc_from_mst, verify_per_edge_guarantee, Clustering,
    EdgeGuaranteeReport, MstRun, SlcParams,
};
pub use unitstep::{ComponentState, UnitStepOutput};
