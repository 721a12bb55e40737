//! Local counter-diabatic driving toolkit.
//!
//! Variational adiabatic gauge potentials for free-fermion chains and Ising
//! spin chains, drive protocols that use them, and exact dynamics to check
//! how well they suppress excitations.

pub mod algebra;
pub mod error;
pub mod fermion;
pub mod gauge;
pub mod linalg;
pub mod model;
pub mod protocols;
pub mod scenario;
pub mod spin;

pub use error::{Error, Result};
