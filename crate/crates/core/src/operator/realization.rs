use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::graph::{FiniteGraph, SubgraphView};
use crate::operator::{assemble_hamiltonian, eigendecompose, BoundaryKind, Ensemble, Hamiltonian, Potential, SpectralData};

/// One disorder realisation on an ambient graph, with memoised ball spectra.
///
/// Ball operators are Dirichlet restrictions relative to the ambient graph.
#[derive(Debug)]
pub struct Realization<'g> {
    graph: &'g FiniteGraph,
    potential: Potential,
    spectra: Mutex<HashMap<(usize, u32), Arc<SpectralData>>>,
}

impl<'g> Realization<'g> {
    pub fn new(graph: &'g FiniteGraph, potential: Potential) -> Self {
        Realization { graph, potential, spectra: Mutex::new(HashMap::new()) }
    }

    pub fn sample(graph: &'g FiniteGraph, ensemble: &Ensemble, seed: u64) -> Self {
        Self::new(graph, crate::operator::sample_potential(ensemble, graph, seed))
    }

    pub fn graph(&self) -> &'g FiniteGraph {
        self.graph
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn ball_view(&self, center: usize, radius: u32) -> Result<SubgraphView> {
        SubgraphView::ball(self.graph, center, radius)
    }

    pub fn ball_hamiltonian(&self, center: usize, radius: u32) -> Result<Hamiltonian> {
        assemble_hamiltonian(self.graph, &self.ball_view(center, radius)?, &self.potential, BoundaryKind::Dirichlet)
    }

    pub fn ball_spectrum(&self, center: usize, radius: u32) -> Result<Arc<SpectralData>> {
        if let Some(s) = self.spectra.lock().expect("spectrum cache poisoned").get(&(center, radius)) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(eigendecompose(&self.ball_hamiltonian(center, radius)?)?);
        self.spectra.lock().expect("spectrum cache poisoned").insert((center, radius), Arc::clone(&s));
        Ok(s)
    }

    /// Operator on the whole ambient graph.
    pub fn full_hamiltonian(&self) -> Result<Hamiltonian> {
        assemble_hamiltonian(self.graph, &SubgraphView::whole(self.graph), &self.potential, BoundaryKind::Dirichlet)
    }

    /// Centers `x` whose ball `B_r(x)` lies inside `B_R(u)`.
    pub fn inner_centers(&self, u: usize, big: u32, r: u32) -> Result<Vec<usize>> {
        let big_ball = self.ball_view(u, big)?;
        let mut out = Vec::new();
        for &x in big_ball.members() {
            if self.graph.ball(x, r)?.iter().all(|v| big_ball.contains(*v)) {
                out.push(x);
            }
        }
        Ok(out)
    }
}
