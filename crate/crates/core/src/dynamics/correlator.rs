use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, SubgraphView};
use crate::montecarlo::EnergyInterval;
use crate::msa::{classify_singular, Ball, ScaleParams};
use crate::operator::{eigendecompose, BoundaryKind, Hamiltonian, SpectralData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlator {
    pub x: usize,
    pub y: usize,
    pub interval: EnergyInterval,
    /// Σ_{λ_i ∈ I} |ψ_i(x) ψ_i(y)|.
    pub value: f64,
    pub eigenvalues_in_interval: usize,
}

/// The supremum of |⟨δ_x, φ(H) δ_y⟩| over Borel φ with |φ| ≤ 1 supported in I.
pub fn ef_correlator(s: &SpectralData, x: usize, y: usize, interval: EnergyInterval) -> Result<Correlator> {
    let (rx, ry) = (s.row(x)?, s.row(y)?);
    let vecs = s.eigenvectors();
    let mut value = 0.0;
    let mut count = 0;
    for (j, &l) in s.eigenvalues().iter().enumerate() {
        if interval.contains(l) {
            value += (vecs[(rx, j)] * vecs[(ry, j)]).abs();
            count += 1;
        }
    }
    Ok(Correlator { x, y, interval, value, eigenvalues_in_interval: count })
}

/// |⟨δ_x, e^{-itH} δ_y⟩|.
pub fn evolution_amplitude(s: &SpectralData, x: usize, y: usize, t: f64) -> Result<f64> {
    let (rx, ry) = (s.row(x)?, s.row(y)?);
    let vecs = s.eigenvectors();
    let (mut re, mut im) = (0.0, 0.0);
    for (j, &l) in s.eigenvalues().iter().enumerate() {
        let w = vecs[(rx, j)] * vecs[(ry, j)];
        re += w * (t * l).cos();
        im -= w * (t * l).sin();
    }
    Ok(re.hypot(im))
}

/// An eigenvalue at which both balls were singular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkWitness {
    pub eigenvalue: f64,
    pub x_singular: bool,
    pub y_singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GkAudit {
    BoundHolds { correlator: f64, bound: f64, eigenvalues: usize },
    NotApplicable { witness: GkWitness, correlator: f64 },
    Violation { correlator: f64, bound: f64, eigenvalues: usize },
}

impl GkAudit {
    pub fn is_violation(&self) -> bool {
        matches!(self, GkAudit::Violation { .. })
    }
}

/// `s` is the spectral data of H_G on the whole of `graph`. For each eigenvalue λ_i in I at least one of B_L(x), B_L(y) must be (λ_i, m)-nonsingular;
/// then the correlator must not exceed 4 e^{-mL}.
pub fn gk_bound_audit(
    s: &SpectralData,
    graph: &FiniteGraph,
    x: usize,
    y: usize,
    l: u64,
    interval: EnergyInterval,
    p: &ScaleParams,
    c_d: f64,
) -> Result<GkAudit> {
    if u64::from(graph.distance(x, y)?) <= 2 * l + 1 {
        return Err(Error::InvalidGeometry(format!("d({x}, {y}) must exceed 2L + 1 = {}", 2 * l + 1)));
    }
    let corr = ef_correlator(s, x, y, interval)?;
    let radius = u32::try_from(l).map_err(|_| Error::InvalidSize("radius overflow".into()))?;
    let ambient = Hamiltonian::from_matrix(s.domain().clone(), s.matrix().clone(), BoundaryKind::Dirichlet)?;
    let ball_spectrum = |c: usize| eigendecompose(&ambient.restrict(&SubgraphView::ball(graph, c, radius)?)?);
    let (spec_x, spec_y) = (ball_spectrum(x)?, ball_spectrum(y)?);
    let ns = |spec: &SpectralData, c: usize, e: f64| -> Result<bool> {
        Ok(!classify_singular(spec, graph, Ball::new(c, l), e, p, c_d)?.singular)
    };
    for &lambda in s.eigenvalues().iter().filter(|&&e| interval.contains(e)) {
        let x_ns = ns(&spec_x, x, lambda)?;
        if x_ns {
            continue;
        }
        if !ns(&spec_y, y, lambda)? {
            return Ok(GkAudit::NotApplicable {
                witness: GkWitness { eigenvalue: lambda, x_singular: true, y_singular: true },
                correlator: corr.value,
            });
        }
    }
    let bound = 4.0 * (-p.m * l as f64).exp();
    let eigenvalues = corr.eigenvalues_in_interval;
    Ok(if corr.value <= bound {
        GkAudit::BoundHolds { correlator: corr.value, bound, eigenvalues }
    } else {
        GkAudit::Violation { correlator: corr.value, bound, eigenvalues }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_box_graph, build_interval_graph};
    use crate::operator::{assemble_hamiltonian, Ensemble, Potential, Realization};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FULL: EnergyInterval = EnergyInterval { lo: -1e6, hi: 1e6 };

    fn p3() -> SpectralData {
        let g = build_interval_graph(5).unwrap();
        let view = SubgraphView::new(&g, vec![1, 2, 3]).unwrap();
        eigendecompose(&assemble_hamiltonian(&g, &view, &Potential::zero(5), BoundaryKind::Dirichlet).unwrap()).unwrap()
    }

    #[test]
    fn p3_closed_form() {
        // Eigenvectors (1, ±√2, 1)/2 and (1, 0, -1)/√2: Σ|ψ(1)ψ(3)| = 1/4 + 1/4 + 1/2.
        let s = p3();
        let c = ef_correlator(&s, 1, 3, FULL).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12);
        let mid = ef_correlator(&s, 1, 3, EnergyInterval::new(1.5, 2.5).unwrap()).unwrap();
        assert!((mid.value - 0.5).abs() < 1e-12);
        assert_eq!(ef_correlator(&s, 1, 3, EnergyInterval::new(10.0, 11.0).unwrap()).unwrap().value, 0.0);
    }

    #[test]
    fn amplitude_at_time_zero() {
        let s = p3();
        assert!(evolution_amplitude(&s, 1, 3, 0.0).unwrap() < 1e-15);
        assert!((evolution_amplitude(&s, 2, 2, 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gk_vacuous_below_the_spectrum_and_geometry() {
        let g = build_interval_graph(60).unwrap();
        let r = Realization::sample(&g, &Ensemble::uniform(10.0), 3);
        let h = r.full_hamiltonian().unwrap();
        let s = eigendecompose(&h).unwrap();
        let p = ScaleParams::section2(0.5, 8);
        let below = EnergyInterval::new(-5.0, -4.0).unwrap();
        let a = gk_bound_audit(&s, &g, 10, 40, 8, below, &p, 3.0).unwrap();
        assert!(matches!(a, GkAudit::BoundHolds { eigenvalues: 0, .. }));
        assert!(matches!(gk_bound_audit(&s, &g, 10, 27, 8, below, &p, 3.0), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn gk_bound_exercised_under_strong_disorder() {
        let g = build_interval_graph(60).unwrap();
        let p = ScaleParams::section2(0.1, 8);
        let band = EnergyInterval::new(10.0, 50.0).unwrap();
        let mut held = 0;
        for seed in 0..20 {
            let r = Realization::sample(&g, &Ensemble::uniform(60.0), seed);
            let s = eigendecompose(&r.full_hamiltonian().unwrap()).unwrap();
            match gk_bound_audit(&s, &g, 10, 40, 8, band, &p, 3.0).unwrap() {
                GkAudit::BoundHolds { eigenvalues, .. } => held += usize::from(eigenvalues > 0),
                GkAudit::Violation { correlator, bound, .. } => panic!("seed {seed}: {correlator} > {bound}"),
                GkAudit::NotApplicable { .. } => {}
            }
        }
        assert!(held >= 10, "bound held with eigenvalues present in only {held} of 20 seeds");
    }

    fn random_instance(seed: u64) -> SpectralData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = if rng.gen_bool(0.5) { build_interval_graph(rng.gen_range(2..40)).unwrap() } else { build_box_graph(2, rng.gen_range(2..7)).unwrap() };
        let r = Realization::sample(&g, &Ensemble::uniform(rng.gen_range(0.0..12.0)), seed);
        eigendecompose(&r.full_hamiltonian().unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn parseval_bessel_unitarity(seed in any::<u64>(), t in -20.0f64..20.0, lo in -2.0f64..12.0, w in 0.0f64..6.0) {
            let s = random_instance(seed);
            let members = s.domain().members().to_vec();
            let i = EnergyInterval::new(lo, lo + w).unwrap();
            for &u in &members {
                prop_assert!((ef_correlator(&s, u, u, FULL).unwrap().value - 1.0).abs() < 1e-10);
                prop_assert!(ef_correlator(&s, u, u, i).unwrap().value <= 1.0 + 1e-12);
            }
            let x = members[0];
            let total: f64 = members.iter().map(|&y| evolution_amplitude(&s, x, y, t).unwrap().powi(2)).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            for &y in &members {
                let a = evolution_amplitude(&s, x, y, t).unwrap();
                prop_assert!(a <= ef_correlator(&s, x, y, FULL).unwrap().value + 1e-12);
                let c = ef_correlator(&s, x, y, i).unwrap();
                prop_assert!(c.value <= 1.0 + 1e-12);
                prop_assert_eq!(c.value, ef_correlator(&s, y, x, i).unwrap().value);
                let wider = EnergyInterval::new(lo - 0.5, lo + w + 0.5).unwrap();
                prop_assert!(c.value <= ef_correlator(&s, x, y, wider).unwrap().value);
            }
        }

        #[test]
        fn correlator_is_the_supremum(seed in any::<u64>()) {
            let s = random_instance(seed);
            let members = s.domain().members().to_vec();
            let (x, y) = (members[0], members[members.len() - 1]);
            let i = EnergyInterval::new(1.0, 6.0).unwrap();
            let c = ef_correlator(&s, x, y, i).unwrap().value;
            let (rx, ry) = (s.row(x).unwrap(), s.row(y).unwrap());
            let vecs = s.eigenvectors();
            let w: Vec<f64> = (0..s.dim()).map(|j| vecs[(rx, j)] * vecs[(ry, j)]).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            for _ in 0..20 {
                let cuts: Vec<f64> = (0..4).map(|_| rng.gen_range(1.0..6.0)).collect();
                let levels: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let phi = |l: f64| if i.contains(l) { levels[cuts.iter().filter(|&&c| c < l).count()] } else { 0.0 };
                let v: f64 = s.eigenvalues().iter().zip(&w).map(|(&l, wj)| phi(l) * wj).sum();
                prop_assert!(v.abs() <= c + 1e-12);
            }
            let sign: f64 = s.eigenvalues().iter().zip(&w).filter(|(l, _)| i.contains(**l)).map(|(_, wj)| wj.signum() * wj).sum();
            prop_assert!((sign - c).abs() < 1e-12);
        }
    }
}
