use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::montecarlo::stats::{run_trials, EnergySpec, EstimateReport, Quantity};
use crate::msa::{classify_ball_singular, classify_resonant, max_disjoint_singular, Ball, ScaleParams};
use crate::operator::{spectrum, Ensemble, Realization};
use crate::report::TrialRow;

/// Fixed-energy experiment on balls of one radius around a list of centers.
#[derive(Debug, Clone)]
pub struct BallSetup<'g> {
    pub graph: &'g FiniteGraph,
    pub ensemble: Ensemble,
    pub params: ScaleParams,
    pub energy: f64,
    pub scale: u64,
    /// A single representative center, or several whose estimates are maximised over.
    pub centers: Vec<usize>,
    pub c_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterEstimate {
    pub center: usize,
    pub report: EstimateReport,
}

/// The reported estimate is the one of the center with the largest point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEstimate {
    pub report: EstimateReport,
    pub per_center: Vec<CenterEstimate>,
    pub rows: Vec<TrialRow>,
}

fn radius_of(l: u64) -> Result<u32> {
    u32::try_from(l).map_err(|_| Error::InvalidSize(format!("radius {l} overflows")))
}

fn sweep<F>(setup: &BallSetup<'_>, quantity: Quantity, trials: u64, seed_base: u64, event: F) -> Result<SweepEstimate>
where
    F: Fn(&Realization<'_>, usize) -> Result<(bool, &'static str)> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    if setup.centers.is_empty() {
        return Err(Error::InvalidParams("at least one center is required".into()));
    }
    let per_trial = run_trials(trials, seed_base, |i, seed| -> Result<(Vec<bool>, TrialRow)> {
        let r = Realization::sample(setup.graph, &setup.ensemble, seed);
        let mut hits = Vec::with_capacity(setup.centers.len());
        let mut labels = Vec::with_capacity(setup.centers.len());
        for &x in &setup.centers {
            let (hit, label) = event(&r, x)?;
            hits.push(hit);
            labels.push(label);
        }
        let row = TrialRow {
            trial: i,
            seed,
            scale: setup.scale,
            e_or_grid: format!("{}", setup.energy),
            verdicts: labels.join(";"),
            measure: None,
            flags: String::new(),
        };
        Ok((hits, row))
    });
    let mut counts = vec![0u64; setup.centers.len()];
    let mut rows = Vec::with_capacity(per_trial.len());
    for t in per_trial {
        let (hits, row) = t?;
        for (c, h) in counts.iter_mut().zip(hits) {
            *c += u64::from(h);
        }
        rows.push(row);
    }
    let energy = EnergySpec::Point { energy: setup.energy };
    let per_center: Vec<CenterEstimate> = setup
        .centers
        .iter()
        .zip(&counts)
        .map(|(&center, &k)| CenterEstimate {
            center,
            report: EstimateReport::from_counts(quantity, k, trials, seed_base, setup.scale, energy),
        })
        .collect();
    let best = per_center
        .iter()
        .max_by(|a, b| a.report.successes.cmp(&b.report.successes).then(b.center.cmp(&a.center)))
        .expect("nonempty");
    let mut report = best.report.clone();
    if per_center.len() > 1 {
        report = report.flag(format!("max_over_{}_centers", per_center.len()));
    }
    Ok(SweepEstimate { report, per_center, rows })
}

/// Frequency of B_L(x) being (E, m)-singular.
pub fn estimate_pk(setup: &BallSetup<'_>, trials: u64, seed_base: u64) -> Result<SweepEstimate> {
    let radius = radius_of(setup.scale)?;
    sweep(setup, Quantity::Pk, trials, seed_base, |r, x| {
        let v = classify_ball_singular(r, Ball::new(x, u64::from(radius)), setup.energy, &setup.params, setup.c_d)?;
        Ok((v.singular, if v.singular { "S" } else { "NS" }))
    })
}

/// Twice the frequency of B_L(x) being E-resonant, compared with 2 C_W C_d L^d e^{-L^β}.
pub fn estimate_qk(setup: &BallSetup<'_>, trials: u64, seed_base: u64) -> Result<SweepEstimate> {
    let radius = radius_of(setup.scale)?;
    let mut out = sweep(setup, Quantity::Qk, trials, seed_base, |r, x| {
        let s = r.ball_spectrum(x, radius)?;
        let v = classify_resonant(&s, setup.energy, &setup.params, setup.scale);
        Ok((v.resonant, if v.resonant { "R" } else { "NR" }))
    })?;
    let d = setup.graph.dim_hint() as i32;
    let bound = 2.0
        * setup.ensemble.wegner_constant()
        * setup.c_d
        * (setup.scale as f64).powi(d)
        * setup.params.resonance_threshold(setup.scale);
    let double = |r: EstimateReport| r.scaled(2.0).flag("doubled");
    out.report = double(out.report).with_bound(bound);
    out.per_center = out
        .per_center
        .into_iter()
        .map(|c| CenterEstimate { center: c.center, report: double(c.report).with_bound(bound) })
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerPoint {
    pub epsilon: f64,
    pub report: EstimateReport,
    /// C_W |Λ| ε.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerReport {
    pub points: Vec<WegnerPoint>,
    pub rows: Vec<TrialRow>,
}

/// Frequency of dist(σ(H_G), E) ≤ ε for each ε, against C_W |G| ε.
pub fn wegner_check(
    graph: &FiniteGraph,
    ensemble: &Ensemble,
    energy: f64,
    epsilons: &[f64],
    trials: u64,
    seed_base: u64,
) -> Result<WegnerReport> {
    if trials == 0 || epsilons.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidParams("need trials > 0 and nonnegative epsilons".into()));
    }
    let gaps = run_trials(trials, seed_base, |i, seed| -> Result<(f64, TrialRow)> {
        let r = Realization::sample(graph, ensemble, seed);
        let gap = spectrum(&r.full_hamiltonian()?)?.iter().map(|l| (l - energy).abs()).fold(f64::INFINITY, f64::min);
        let row = TrialRow {
            trial: i,
            seed,
            scale: graph.len() as u64,
            e_or_grid: format!("{energy}"),
            verdicts: String::new(),
            measure: Some(gap),
            flags: String::new(),
        };
        Ok((gap, row))
    });
    let mut rows = Vec::with_capacity(gaps.len());
    let mut values = Vec::with_capacity(gaps.len());
    for g in gaps {
        let (gap, row) = g?;
        values.push(gap);
        rows.push(row);
    }
    let points = epsilons
        .iter()
        .map(|&eps| {
            let k = values.iter().filter(|&&g| g <= eps).count() as u64;
            let bound = ensemble.wegner_constant() * graph.len() as f64 * eps;
            let report = EstimateReport::from_counts(Quantity::Wegner, k, trials, seed_base, graph.len() as u64, EnergySpec::Point { energy })
                .with_bound(bound)
                .flag(format!("epsilon={eps:e}"));
            WegnerPoint { epsilon: eps, report, bound }
        })
        .collect();
    Ok(WegnerReport { points, rows })
}

/// Counting experiment: the maximal number 𝒩 of pairwise disjoint (E, m)-singular L_j-balls
/// inside B_{L_{j+1}}(u).
#[derive(Debug, Clone)]
pub struct DisjointSetup<'g> {
    pub graph: &'g FiniteGraph,
    pub ensemble: Ensemble,
    pub params: ScaleParams,
    pub energy: f64,
    pub center: usize,
    pub small: u64,
    pub big: u64,
    pub c_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointTailReport {
    pub report: EstimateReport,
    /// L_j^{σ(α-1)}.
    pub threshold: f64,
    pub counts: Vec<usize>,
    /// Trials where the count came from the greedy fallback (a lower bound on 𝒩).
    pub inexact: u64,
    pub rows: Vec<TrialRow>,
}

/// Frequency of 𝒩 ≥ L_j^{σ(α-1)}, against ½ exp(-L_{j+1}^δ).
pub fn disjoint_count_tail(setup: &DisjointSetup<'_>, trials: u64, seed_base: u64) -> Result<DisjointTailReport> {
    let sigma = setup.params.sigma.ok_or_else(|| Error::InvalidParams("sigma is required".into()))?;
    let delta = setup.params.delta.ok_or_else(|| Error::InvalidParams("delta is required".into()))?;
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    if setup.big <= setup.small {
        return Err(Error::InvalidGeometry("L_{j+1} must exceed L_j".into()));
    }
    let threshold = (setup.small as f64).powf(sigma * (setup.params.alpha - 1.0));
    let (small, big) = (radius_of(setup.small)?, radius_of(setup.big)?);
    let per_trial = run_trials(trials, seed_base, |i, seed| -> Result<(usize, bool, TrialRow)> {
        let r = Realization::sample(setup.graph, &setup.ensemble, seed);
        let mut singular = Vec::new();
        for x in r.inner_centers(setup.center, big, small)? {
            if classify_ball_singular(&r, Ball::new(x, setup.small), setup.energy, &setup.params, setup.c_d)?.singular {
                singular.push(x);
            }
        }
        let count = max_disjoint_singular(&singular, setup.small, setup.graph)?;
        let row = TrialRow {
            trial: i,
            seed,
            scale: setup.small,
            e_or_grid: format!("{}", setup.energy),
            verdicts: format!("N={}", count.count),
            measure: Some(singular.len() as f64),
            flags: if count.exact { String::new() } else { "greedy".into() },
        };
        Ok((count.count, count.exact, row))
    });
    let mut counts = Vec::with_capacity(per_trial.len());
    let mut rows = Vec::with_capacity(per_trial.len());
    let mut inexact = 0;
    for t in per_trial {
        let (c, exact, row) = t?;
        counts.push(c);
        inexact += u64::from(!exact);
        rows.push(row);
    }
    let hits = counts.iter().filter(|&&c| c as f64 >= threshold).count() as u64;
    let bound = 0.5 * (-(setup.big as f64).powf(delta)).exp();
    let mut report = EstimateReport::from_counts(
        Quantity::DisjointTail,
        hits,
        trials,
        seed_base,
        setup.small,
        EnergySpec::Point { energy: setup.energy },
    )
    .with_bound(bound);
    if inexact > 0 {
        report = report.flag("greedy_lower_bound");
    }
    Ok(DisjointTailReport { report, threshold, counts, inexact, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_interval_graph;

    fn setup(g: &FiniteGraph, coupling: f64, energy: f64) -> BallSetup<'_> {
        BallSetup {
            graph: g,
            ensemble: Ensemble::uniform(coupling),
            params: ScaleParams::section2(1.0, 8),
            energy,
            scale: 8,
            centers: vec![20],
            c_d: 3.0,
        }
    }

    #[test]
    fn zero_coupling_is_deterministic() {
        let g = build_interval_graph(41).unwrap();
        let out = estimate_pk(&setup(&g, 0.0, 1.3), 30, 1).unwrap();
        let r = &out.report;
        assert!(r.point_estimate == 0.0 || r.point_estimate == 1.0);
        assert!(r.successes == 0 || r.successes == 30);
        assert_eq!(out.rows.len(), 30);
    }

    #[test]
    fn same_seed_same_report() {
        let g = build_interval_graph(41).unwrap();
        let s = setup(&g, 6.0, 3.0);
        assert_eq!(estimate_pk(&s, 40, 99).unwrap(), estimate_pk(&s, 40, 99).unwrap());
        assert_eq!(estimate_qk(&s, 40, 99).unwrap(), estimate_qk(&s, 40, 99).unwrap());
    }

    #[test]
    fn qk_vanishes_outside_the_band_and_is_doubled() {
        let g = build_interval_graph(41).unwrap();
        let far = estimate_qk(&setup(&g, 4.0, 50.0), 50, 3).unwrap();
        assert_eq!(far.report.successes, 0);
        assert!(far.report.flags.iter().any(|f| f == "doubled"));
        let near = estimate_qk(&setup(&g, 4.0, 2.0), 200, 3).unwrap();
        assert!((near.report.point_estimate - 2.0 * near.report.successes as f64 / 200.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_reports_the_worst_center() {
        let g = build_interval_graph(61).unwrap();
        let mut s = setup(&g, 5.0, 3.0);
        s.centers = vec![15, 30, 45];
        let out = estimate_pk(&s, 60, 4).unwrap();
        let max = out.per_center.iter().map(|c| c.report.successes).max().unwrap();
        assert_eq!(out.report.successes, max);
    }

    #[test]
    fn wegner_far_energy_and_zero_epsilon() {
        let g = build_interval_graph(16).unwrap();
        let rep = wegner_check(&g, &Ensemble::uniform(1.0), 100.0, &[0.0, 0.1], 50, 5).unwrap();
        assert!(rep.points.iter().all(|p| p.report.successes == 0));
        assert!((rep.points[1].bound - 1.6).abs() < 1e-12);
    }

    #[test]
    fn disjoint_tail_threshold_and_determinism() {
        let g = build_interval_graph(81).unwrap();
        let s = DisjointSetup {
            graph: &g,
            ensemble: Ensemble::uniform(100.0),
            params: ScaleParams::section8(1.0, 4),
            energy: 50.0,
            center: 40,
            small: 4,
            big: 12,
            c_d: 3.0,
        };
        let a = disjoint_count_tail(&s, 20, 8).unwrap();
        assert!((a.threshold - 4f64.powf(1.0 / 9.0)).abs() < 1e-12);
        assert_eq!(a, disjoint_count_tail(&s, 20, 8).unwrap());
        assert!((a.report.bound.unwrap() - 0.5 * (-(12f64).powf(0.25)).exp()).abs() < 1e-15);
    }
}
