//! Finite-volume laboratory for Anderson localization on graphs.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod msa;
pub mod operator;
pub mod report;
pub mod runner;
pub mod seed;
pub mod subharmonic;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use graph::{build_box_graph, build_interval_graph, FiniteGraph, SubgraphView};
pub use montecarlo::{EnergyInterval, EstimateReport, ScheduleParams};
pub use msa::{Ball, ScaleParams};
pub use operator::{Ensemble, Hamiltonian, Potential, Realization, SpectralData};
pub use seed::derive_seed;
