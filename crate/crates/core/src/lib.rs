//! Conference-key rates in pair-entangled networks.
//!
//! A pair-entangled network (PEN) places a bipartite quantum state on every
//! edge of a connected graph; a subset of the vertices (the secrecy seekers)
//! wants a shared secret key. This crate computes the classic upper bounds on
//! the distillable conference key for such networks:
//!
//! - the weakest-cut bound (minimum cross-entropy over seeker-separating
//!   bipartitions, computed by pairwise max-flow),
//! - the partition bound (minimum of cross weight over proper vertex
//!   partitions, scaled by `1/(p-1)`),
//! - the Devetak-Winter bound for a designated reference vertex,
//! - the exact rate on tree networks,
//! - the tripartite BB84 rate ceiling under the network-preparability
//!   constraints.
//!
//! It also simulates the spanning-tree-packing protocol that achieves the
//! partition bound when every vertex is a seeker, and ships a numerical
//! verifier for the biseparable relative-entropy identity behind the
//! weakest-cut bound.
//!
//! See the `penkey-cli` crate for the command-line front end and the network
//! file format.

pub mod bb84;
pub mod bounds;
pub mod error;
pub mod gme;
pub mod linalg;
pub mod network;
pub mod packing;
pub mod partition;
pub mod tensor;

mod maxflow;
mod simplex;

pub use error::{Error, Result};
