//! Simulation, verification and search of local protocols that distinguish
//! orthogonal bipartite pure states while keeping part of their entanglement.
//!
//! States are coefficient matrices (rows index Bob, columns index Alice);
//! local operations are Kraus operators; a protocol is a finite tree of local
//! measurements whose leaves declare which state the parties hold.

pub mod analysis;
pub mod catalog;
pub mod error;
pub mod measurement;
pub mod numerics;
pub mod protocol;
pub mod search;
pub mod states;

pub use error::{Error, Result};
pub use numerics::{
    is_proportional_unitary, kron, numeric_rank, support_projector, ComplexMatrix, Tolerance, C64,
};
pub use states::{pairwise_orthogonal, BipartiteState, MultipartiteState, Party, StateSet};
pub use measurement::{LocalMeasurement, SepOutcome, SeparablePovm};
pub use protocol::{
    verify_sep, Failure, FailureReason, OutcomeRecord, ProtocolClass, ProtocolNode, ProtocolTree,
    VerificationReport, VerifyOptions,
};
pub use analysis::{
    cascading_partition, corollary7_nbound, domino_preserves_orthogonality, multi_nmax, nmax,
    partition_to_protocol, purification_check, r2_bound, rank_sum_bound, theorem4_check,
    theorem5_check, theorem6_check, BoundReport, FirstParty, PartitionNode, PartitionTree,
    PurificationReport,
};
pub use catalog::{CatalogEntry, CatalogProtocol, Distinguishable, Expected};
pub use search::{search_protocols, SearchResult, SearchSpec};
