//! Random potentials, Hamiltonian assembly, exact diagonalisation and Green functions.

mod ensemble;
mod hamiltonian;
mod spectral;

pub use ensemble::{sample_potential, Ensemble, EnsembleKind, Potential};
pub use hamiltonian::{assemble_hamiltonian, BoundaryKind, Hamiltonian};
pub use spectral::{eigendecompose, green, spectral_gap, spectrum, verify_gre, GreCheck, SpectralData, NEAR_SPECTRUM_REL};
mod realization;
pub use realization::Realization;
