//! Dissipative dynamics of small spin-1/2 lattices.
//!
//! Builds anisotropic Heisenberg Hamiltonians on data-driven lattices
//! (the 7-site triangular cell with a central spin is the supported
//! preset), couples every site to a thermal Lindblad environment, and
//! evolves the density matrix in Liouville space. Observables cover
//! pairwise concurrence, the global pairwise entanglement τ₂ and local
//! ⟨Sᶻ⟩ expectations.
//!
//! Units: ħ = k_B = 1, energies in units of the field scale ω, time
//! reported as the dimensionless T = ω·t.

pub mod error;
pub mod evolve;
pub mod lattice;
pub mod liouville;
pub mod observables;
pub mod runner;
pub mod sparse;
pub mod spin_ops;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
