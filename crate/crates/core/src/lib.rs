//! Quasiparticle parity switching in gap-asymmetric SQUID transmons.
//!
//! The crate covers the whole chain from device parameters to measured
//! parity lifetimes:
//!
//! - [`specfun`]: modified Bessel, complete elliptic and photon-absorption kernels
//! - [`spectrum`]: charge-basis Hamiltonian with Josephson harmonics, levels and parity splittings
//! - [`field`]: in-plane field dependence of the SQUID junctions and gap bookkeeping
//! - [`rates`]: quasiparticle tunneling and photon-assisted pair-breaking rates
//! - [`steady`]: two-layer generation/trapping/recombination balance
//! - [`device`]: a complete device description that ties the pieces together
//! - [`observables`]: lifetimes, T1, qubit population and field/temperature sweeps
//! - [`telegraph`]: simulation and hidden-Markov analysis of single-shot parity traces
//! - [`fit`]: bounded Levenberg-Marquardt and the fitting recipes
//! - [`dataset`]: CSV ingestion of measured observables
//!
//! Frequencies are in GHz (energies divided by Planck's constant), fields in
//! tesla, temperatures in kelvin, times in seconds and rates in Hz unless a
//! name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod device;
pub mod error;
pub mod field;
pub mod fit;
pub mod linalg;
pub mod observables;
pub mod rates;
pub mod specfun;
pub mod spectrum;
pub mod steady;
pub mod telegraph;
pub mod units;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
pub(crate) mod oracle;

pub use error::{Error, Result};
