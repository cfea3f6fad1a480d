//! Hydrogen-bond interaction energies from classically simulated quantum
//! phase estimation.
//!
//! The crate covers the whole chain from a Cartesian geometry to a
//! supramolecular interaction energy:
//!
//! * [`integrals`]: XYZ/basis parsing and a McMurchie–Davidson AO integral engine
//! * [`scf`]: restricted Hartree–Fock with DIIS
//! * [`localize`]: Boys localization, orbital ordering and overlap diagnostics
//! * [`mointegrals`]: AO→MO transformation, MP2 partitions, active-space selection
//! * [`hamiltonian`]: active-space fermionic Hamiltonians and the Jordan–Wigner map
//! * [`ci`]: determinant CASCI / full-CI reference solvers
//! * [`qpe`]: Trotterized QPE simulation, phase readout, extrapolation, gate counts
//! * [`workflow`]: geometry scans, configuration, the end-to-end pipeline and reports
//!
//! Energies are in hartree internally; [`units`] holds the only conversion
//! constants used anywhere in the crate.

pub mod ci;
pub mod error;
pub mod hamiltonian;
pub mod integrals;
pub mod localize;
pub mod mointegrals;
pub mod qpe;
pub mod scf;
pub mod units;
pub mod workflow;

pub use error::{Error, Result};
