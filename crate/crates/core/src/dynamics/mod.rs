//! Single-excitation dynamics: the full discretized-waveguide model and the
//! reduced Markovian node models.

mod full;
mod reduced;
mod schedule;
mod state;
mod transfer;

pub use full::{integrate_full, FullOptions};
pub use reduced::{
    integrate_reduced_emitter, integrate_reduced_star, CascadeLink, PortKind, PortRef,
    ReducedNetwork, ReducedNode, ReducedPort, ReducedRun,
};
pub use schedule::{Assignment, Schedule};
pub use state::{ExcitationState, Trajectory};
pub use transfer::{two_node_transfer, TransferAmplitudes, TransferModel};
