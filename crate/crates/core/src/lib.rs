//! Mixed-integer programming formulations for trained ReLU networks.
//!
//! The crate encodes feedforward ReLU networks as MIPs using a big-M
//! encoding, an ideal extended encoding, or the big-M base model strengthened
//! by lazily separated ideal inequalities, and solves robustness queries with
//! a built-in branch and bound over a dense simplex.
//!
//! Modules:
//! * [`nn_model`] networks, evaluation and the JSON network format;
//! * [`relaxation`] per-neuron bounds and interval propagation;
//! * [`formulation`] model builders and LP-file export;
//! * [`separation`] linear-time separation and the cut pool;
//! * [`lp_core`] the simplex solver;
//! * [`bnb`] branch and bound with the lazy cut loop;
//! * [`verify`] robustness instances, reports and result records;
//! * [`oracle`] brute-force and certificate checks for the formulations.

pub mod bnb;
pub mod error;
pub mod formulation;
pub mod lp_core;
pub mod nn_model;
pub mod oracle;
pub mod relaxation;
pub mod sampling;
pub mod separation;
pub mod verify;

pub use error::{Error, Result};
