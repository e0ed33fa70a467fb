//! Mode-level simulation of cluster-state quantum computing with time-bin
//! photonic qubits in optical fibre.
//!
//! Layers, bottom up:
//! - [`fock`]: exact multi-photon states and linear-optical transformations.
//! - [`elements`]: fibre components (couplers, switches, phase modulators,
//!   delays, polarisation optics) compiled to mode unitaries.
//! - [`circuits`]: the named gate, converter, fusion and measurement circuits.
//! - [`graphstate`]: ideal graph-state algebra used as the reference oracle.
//! - [`mbqc`]: adaptive measurement patterns with feedforward.
//! - [`resources`]: Monte-Carlo estimate of seed consumption under loss.
//! - [`formats`]: scenario, edge-list and amplitude text formats.

pub mod circuits;
pub mod elements;
pub mod fock;
pub mod formats;
pub mod graphstate;
pub mod logical;
pub mod mbqc;
pub mod resources;
pub mod scenario;
pub mod selftest;

pub use fock::{Mode, Occupation, PhotonicState, Pol};
pub use logical::{LogicalState, Mat2, Pauli};

/// Version tag written on the first line of every text file this crate emits.
pub const FORMAT_HEADER: &str = "fiberloom/1";
