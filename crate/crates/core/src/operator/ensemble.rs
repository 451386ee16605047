use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::graph::FiniteGraph;

/// Marginal law of the IID site potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Uniform on [0, 1).
    Uniform01,
    /// Standard normal.
    Gaussian01,
}

/// An IID potential ensemble `g * V(x)` with a declared Lipschitz constant of the
/// marginal distribution function of `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    pub coupling: f64,
    pub lipschitz: f64,
}

impl Ensemble {
    pub fn uniform(coupling: f64) -> Self {
        Ensemble { kind: EnsembleKind::Uniform01, coupling, lipschitz: 1.0 }
    }

    /// Gaussian ensemble; the declared constant is the density supremum (2π)^{-1/2}.
    pub fn gaussian(coupling: f64) -> Self {
        Ensemble {
            kind: EnsembleKind::Gaussian01,
            coupling,
            lipschitz: 1.0 / (2.0 * std::f64::consts::PI).sqrt(),
        }
    }

    /// Lipschitz constant of the distribution function of the coupled draw `g * V`,
    /// which is what enters the Wegner bound for `H = -Δ + gV`.
    pub fn wegner_constant(&self) -> f64 {
        self.lipschitz / self.coupling.abs()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let raw: f64 = match self.kind {
            EnsembleKind::Uniform01 => rng.gen(),
            EnsembleKind::Gaussian01 => rng.sample(StandardNormal),
        };
        self.coupling * raw
    }
}

/// One realisation of the coupled potential, indexed by ambient vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub values: Vec<f64>,
    pub seed: u64,
    pub ensemble: Ensemble,
}

impl Potential {
    /// Deterministic potential, mostly for fixtures.
    pub fn from_values(values: Vec<f64>, ensemble: Ensemble) -> Self {
        Potential { values, seed: 0, ensemble }
    }

    pub fn zero(len: usize) -> Self {
        Self::from_values(vec![0.0; len], Ensemble::uniform(0.0))
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// IID draws in ascending vertex order from a ChaCha8 stream keyed by `seed`.
pub fn sample_potential(e: &Ensemble, g: &FiniteGraph, seed: u64) -> Potential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..g.len()).map(|_| e.draw(&mut rng)).collect();
    Potential { values, seed, ensemble: *e }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_interval_graph;

    #[test]
    fn zero_coupling_is_zero() {
        let g = build_interval_graph(20).unwrap();
        let p = sample_potential(&Ensemble::uniform(0.0), &g, 42);
        assert!(p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_in_seed() {
        let g = build_interval_graph(50).unwrap();
        let e = Ensemble::gaussian(2.0);
        assert_eq!(sample_potential(&e, &g, 7), sample_potential(&e, &g, 7));
        assert_ne!(sample_potential(&e, &g, 7), sample_potential(&e, &g, 8));
    }

    #[test]
    fn uniform_mean_within_clt_window() {
        // 10^4 uniform draws: sd of the mean is 0.0029, so [0.49, 0.51] is a 3.5 sigma window.
        let g = build_interval_graph(10_000).unwrap();
        let p = sample_potential(&Ensemble::uniform(1.0), &g, 2024);
        let mean = p.values.iter().sum::<f64>() / p.len() as f64;
        assert!((0.49..=0.51).contains(&mean), "mean {mean}");
        assert!(p.values.iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn wegner_constant_scales_with_coupling() {
        assert_eq!(Ensemble::uniform(1.0).wegner_constant(), 1.0);
        assert_eq!(Ensemble::uniform(4.0).wegner_constant(), 0.25);
    }
}
