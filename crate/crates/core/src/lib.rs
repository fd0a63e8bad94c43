//! Few-photon transport observables for a waveguide coupled to a
//! Jaynes-Cummings system.
//!
//! The local system (a cavity mode dipole-coupled to a two-level atom, the
//! cavity leaking into the waveguide at rate `kappa`) is described by a
//! non-Hermitian effective Hamiltonian that is block diagonal in the total
//! excitation number. Each block with `n >= 1` excitations is a 2x2 complex
//! symmetric matrix whose eigenvalue pair coalesces at an exceptional point
//! when the cavity is resonant with the atom and `kappa = 4 sqrt(n) g`.
//!
//! The crate computes, in closed form and by independent numerical routes:
//!
//! - sector spectra, biorthogonal eigenvectors and exceptional-point sweeps
//!   ([`sector`]),
//! - the single-photon transmission amplitude, the connected two-photon
//!   S matrix and its spectral-decomposition forms ([`scattering`]),
//! - the two-photon bound-state profile in the photon separation, with the
//!   under/critical/overdamped closed forms cross-checked against direct
//!   quadrature of the S matrix ([`boundstate`]),
//! - the two-photon correlation function `G2(tau)` and its approach rate to
//!   the asymptote ([`correlation`]),
//! - the slowest-decay envelope of the N-photon bound state ([`nphoton`]).
//!
//! Conventions: the waveguide group velocity is 1, so frequencies, rates and
//! inverse lengths share one dimensionless unit system (figures customarily
//! quote everything in units of the atomic transition frequency). All
//! functions are pure; sweeps parallelize internally with deterministic
//! output ordering.

pub mod boundstate;
pub mod correlation;
pub mod error;
pub mod export;
pub mod nphoton;
pub mod numerics;
pub mod params;
pub mod scattering;
pub mod sector;

pub use error::{CoreError, Result};
pub use params::SystemParams;
pub use sector::{ComplexEnergy, ExcitationSector};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
