use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::montecarlo::stats::run_trials;
use crate::msa::Ball;
use crate::operator::{sample_potential, Ensemble, EnsembleKind, Hamiltonian, Potential};

/// Sample average ξ of the potential over a ball and the fluctuations η = V - ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialDecomposition {
    pub ball: Ball,
    pub xi: f64,
    /// (vertex, η) in ball order.
    pub eta: Vec<(usize, f64)>,
}

impl PotentialDecomposition {
    pub fn reconstruct(&self) -> Vec<(usize, f64)> {
        self.eta.iter().map(|&(v, n)| (v, self.xi + n)).collect()
    }
}

pub fn xi_eta_decompose(v: &Potential, graph: &FiniteGraph, ball: Ball) -> Result<PotentialDecomposition> {
    let members = graph.ball(ball.center, ball.radius_u32())?;
    let xi = members.iter().map(|&x| v.value(x)).sum::<f64>() / members.len() as f64;
    let eta = members.iter().map(|&x| (x, v.value(x) - xi)).collect();
    Ok(PotentialDecomposition { ball, xi, eta })
}

/// |G_{H + t}(x, y; E + t) - G_H(x, y; E)| / max(1, |G_H(x, y; E)|).
pub fn shift_covariance_check(h: &Hamiltonian, t: f64, x: usize, y: usize, e: f64) -> Result<f64> {
    let base = crate::operator::eigendecompose(h)?;
    let shifted = crate::operator::eigendecompose(&h.shifted(t))?;
    let g0 = crate::operator::green(&base, x, y, e)?;
    let g1 = crate::operator::green(&shifted, x, y, e + t)?;
    Ok((g1 - g0).abs() / g0.abs().max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusPoint {
    pub s: f64,
    /// max over windows [w, w + s] of the empirical P(ξ ∈ window).
    pub max_increment: f64,
    /// |B|^{1/2} s / (g √(2π)).
    pub bound: f64,
    /// Three binomial standard deviations at the bound.
    pub margin: f64,
    pub exceedance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub ball_size: usize,
    pub trials: u64,
    pub points: Vec<ModulusPoint>,
    pub max_exceedance: f64,
}

/// Empirical modulus of continuity of the law of ξ_x under the Gaussian ensemble.
pub fn continuity_modulus_probe(
    graph: &FiniteGraph,
    ensemble: &Ensemble,
    ball: Ball,
    s_values: &[f64],
    trials: u64,
    seed_base: u64,
) -> Result<ModulusReport> {
    if ensemble.kind != EnsembleKind::Gaussian01 {
        return Err(Error::Unsupported("the continuity probe is implemented for the Gaussian ensemble only".into()));
    }
    if trials == 0 || s_values.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParams("need trials > 0 and nonnegative window sizes".into()));
    }
    let members = graph.ball(ball.center, ball.radius_u32())?;
    let n = members.len();
    let mut xis: Vec<f64> = run_trials(trials, seed_base, |_, seed| {
        let v = sample_potential(ensemble, graph, seed);
        members.iter().map(|&x| v.value(x)).sum::<f64>() / n as f64
    });
    xis.sort_by(f64::total_cmp);
    let density_sup = (n as f64).sqrt() / (ensemble.coupling.abs() * (2.0 * std::f64::consts::PI).sqrt());
    let points: Vec<ModulusPoint> = s_values
        .iter()
        .map(|&s| {
            let mut best = 0usize;
            let mut hi = 0usize;
            for lo in 0..xis.len() {
                while hi < xis.len() && xis[hi] <= xis[lo] + s {
                    hi += 1;
                }
                best = best.max(hi - lo);
            }
            let max_increment = if s == 0.0 { 0.0 } else { best as f64 / trials as f64 };
            let bound = density_sup * s;
            let pb = bound.min(1.0);
            let margin = 3.0 * (pb * (1.0 - pb) / trials as f64).sqrt();
            ModulusPoint { s, max_increment, bound, margin, exceedance: max_increment - bound - margin }
        })
        .collect();
    let max_exceedance = points.iter().map(|p| p.exceedance).fold(f64::NEG_INFINITY, f64::max);
    Ok(ModulusReport { ball_size: n, trials, points, max_exceedance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_box_graph, build_interval_graph, SubgraphView};
    use crate::operator::{assemble_hamiltonian, BoundaryKind, Realization};

    #[test]
    fn decomposition_examples() {
        let g = build_interval_graph(5).unwrap();
        let v = Potential::from_values(vec![9.0, 1.0, 2.0, 3.0, 9.0], Ensemble::uniform(1.0));
        let d = xi_eta_decompose(&v, &g, Ball::new(2, 1)).unwrap();
        assert_eq!(d.xi, 2.0);
        assert_eq!(d.eta, vec![(1, -1.0), (2, 0.0), (3, 1.0)]);
        let c = Potential::from_values(vec![0.7; 5], Ensemble::uniform(1.0));
        let d = xi_eta_decompose(&c, &g, Ball::new(2, 2)).unwrap();
        assert!((d.xi - 0.7).abs() < 1e-15);
        assert!(d.eta.iter().all(|(_, e)| e.abs() < 1e-15));
    }

    #[test]
    fn decomposition_reconstructs_and_centres() {
        let g = build_box_graph(2, 9).unwrap();
        let v = sample_potential(&Ensemble::gaussian(2.0), &g, 3);
        let d = xi_eta_decompose(&v, &g, Ball::new(40, 3)).unwrap();
        let mean: f64 = d.eta.iter().map(|e| e.1).sum::<f64>() / d.eta.len() as f64;
        assert!(mean.abs() < 1e-12);
        for (x, val) in d.reconstruct() {
            assert!((val - v.value(x)).abs() <= 4.0 * f64::EPSILON * v.value(x).abs().max(1.0));
        }
    }

    #[test]
    fn shift_covariance_on_the_path() {
        // Three interior vertices of a longer path: spectrum 2 - √2, 2, 2 + √2.
        let g = build_interval_graph(5).unwrap();
        let view = SubgraphView::new(&g, vec![1, 2, 3]).unwrap();
        let h = assemble_hamiltonian(&g, &view, &Potential::zero(5), BoundaryKind::Dirichlet).unwrap();
        assert_eq!(shift_covariance_check(&h, 0.0, 1, 3, 0.0).unwrap(), 0.0);
        assert!(shift_covariance_check(&h, 1.0, 1, 3, 0.0).unwrap() <= 1e-12);
    }

    #[test]
    fn shift_covariance_random_box() {
        let g = build_box_graph(2, 8).unwrap();
        let r = Realization::sample(&g, &Ensemble::uniform(3.0), 12);
        let h = r.ball_hamiltonian(27, 3).unwrap();
        assert!(shift_covariance_check(&h, 0.37, 27, 29, 2.1).unwrap() <= 1e-10);
    }

    #[test]
    fn modulus_bound_and_support() {
        let g = build_box_graph(2, 10).unwrap();
        let whole = Ball::new(0, 18);
        let rep = continuity_modulus_probe(&g, &Ensemble::gaussian(1.0), whole, &[0.0, 0.01], 10, 1).unwrap();
        assert_eq!(rep.ball_size, 100);
        assert_eq!(rep.points[0].max_increment, 0.0);
        assert!((rep.points[1].bound - 10.0 * 0.01 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!(matches!(
            continuity_modulus_probe(&g, &Ensemble::uniform(1.0), whole, &[0.1], 10, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn modulus_within_margin() {
        let g = build_interval_graph(21).unwrap();
        let rep = continuity_modulus_probe(&g, &Ensemble::gaussian(1.0), Ball::new(10, 4), &[0.02, 0.1, 0.3], 4000, 2).unwrap();
        assert!(rep.max_exceedance <= 0.0, "{rep:?}");
    }
}
