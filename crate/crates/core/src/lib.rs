//! Quantum teleportation with measurement in arbitrary single-qubit bases.
//!
//! Alice may read out the message qubit and her half of the Bell pair in any
//! basis. Bob's correction then depends on that choice; this crate simulates
//! the protocol exactly, solves for the per-outcome restoration unitaries,
//! names them as short gate products, and measures what an eavesdropper
//! recovers with the wrong bases.
//!
//! ```
//! use multiaxis_teleport::{protocol::BasisChoice, qmath::BasisId, solver};
//!
//! let yy = BasisChoice::new(BasisId::Y, BasisId::Y);
//! let table = solver::solve_restoration(&yy).unwrap().into_table().unwrap();
//! assert!(solver::check_relation(&table));
//! ```

pub mod catalog;
pub mod cli;
pub mod decomposer;
pub mod error;
pub mod protocol;
pub mod qmath;
pub mod sampling;
pub mod security;
pub mod simulator;
pub mod solver;

pub use error::{Result, TeleportError};
