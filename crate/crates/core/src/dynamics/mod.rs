//! Eigenfunction correlators, time evolution and decay fits.

mod correlator;
mod fit;

pub use correlator::{ef_correlator, evolution_amplitude, gk_bound_audit, Correlator, GkAudit, GkWitness};
pub use fit::{decay_curve, decay_fit, write_decay_csv, DecayFit, DecayPoint};
