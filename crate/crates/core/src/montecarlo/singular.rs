use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{boundary, FiniteGraph};
use crate::montecarlo::schedule::ScheduleParams;
use crate::montecarlo::stats::{clopper_pearson, energy_grid, run_trials, EnergySpec, EstimateReport, Quantity, CONFIDENCE};
use crate::operator::{Ensemble, Realization, SpectralData};
use crate::report::TrialRow;

/// Closed energy interval I = [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyInterval {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParams(format!("invalid energy interval [{lo}, {hi}]")));
        }
        Ok(EnergyInterval { lo, hi })
    }

    /// Unit interval centred at `mid`.
    pub fn unit_around(mid: f64) -> Self {
        EnergyInterval { lo: mid - 0.5, hi: mid + 0.5 }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo && e <= self.hi
    }
}

/// E ↦ M_x(E) = max_{y ∈ ∂⁻B_L(x)} |G_{B_L(x)}(x, y; E)| from the spectral expansion of the ball.
#[derive(Debug, Clone)]
pub struct BoundaryGreen {
    eigenvalues: Vec<f64>,
    /// κ_j(y) = ψ_j(x) ψ_j(y), one row per inner boundary vertex.
    residues: Vec<Vec<f64>>,
    tolerance: f64,
}

impl BoundaryGreen {
    pub fn new(graph: &FiniteGraph, s: &SpectralData, x: usize) -> Result<Self> {
        let inner = boundary(graph, s.domain())?.inner;
        let rx = s.row(x)?;
        let vecs = s.eigenvectors();
        let residues = inner
            .iter()
            .map(|&y| {
                let ry = s.row(y)?;
                Ok((0..s.dim()).map(|j| vecs[(rx, j)] * vecs[(ry, j)]).collect())
            })
            .collect::<Result<_>>()?;
        Ok(BoundaryGreen { eigenvalues: s.eigenvalues().to_vec(), residues, tolerance: s.near_spectrum_tolerance() })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// M_x(E); infinite within the NearSpectrum tolerance of an eigenvalue.
    pub fn value(&self, e: f64) -> f64 {
        if self.gap(e) <= self.tolerance {
            return f64::INFINITY;
        }
        self.residues
            .iter()
            .map(|k| k.iter().zip(&self.eigenvalues).map(|(kj, l)| kj / (l - e)).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    pub fn gap(&self, e: f64) -> f64 {
        self.eigenvalues.iter().map(|l| (l - e).abs()).fold(f64::INFINITY, f64::min)
    }
}

/// Grid scan of ℰ_x(a) = {E ∈ I : M_x(E) ≥ a}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub interval: EnergyInterval,
    pub grid_step: f64,
    pub grid_len: usize,
    pub threshold: f64,
    /// Indices into the grid lo + k·h.
    pub hot_points: Vec<usize>,
    /// h · |hot points|.
    pub measure_estimate: f64,
    /// Measure of the hot set with eigenvalue poles included and threshold crossings between
    /// samples located by bisection.
    pub refined_measure: f64,
}

impl SingularSet {
    pub fn energy(&self, k: usize) -> f64 {
        self.interval.lo + k as f64 * self.grid_step
    }

    /// Measures rescaled to a unit-length interval.
    pub fn normalized_measure(&self) -> (f64, f64) {
        let len = self.interval.len();
        if len > 0.0 {
            (self.measure_estimate / len, self.refined_measure / len)
        } else {
            (0.0, 0.0)
        }
    }
}

const BISECTION_STEPS: usize = 60;

pub fn singular_set_measure(m: &BoundaryGreen, threshold: f64, interval: EnergyInterval, grid_step: f64) -> Result<SingularSet> {
    if !(grid_step > 0.0) {
        return Err(Error::InvalidParams("grid step must be positive".into()));
    }
    let grid = energy_grid(interval.lo, interval.hi, grid_step);
    let hot_points: Vec<usize> = grid.iter().enumerate().filter(|(_, &e)| m.value(e) >= threshold).map(|(k, _)| k).collect();
    let measure_estimate = grid_step * hot_points.len() as f64;

    let mut samples: Vec<f64> = grid.clone();
    if *samples.last().unwrap_or(&interval.lo) < interval.hi {
        samples.push(interval.hi);
    }
    samples.extend(m.eigenvalues().iter().copied().filter(|&l| interval.contains(l)));
    samples.sort_by(f64::total_cmp);
    samples.dedup();
    let hot = |e: f64| m.value(e) >= threshold;
    let mut refined_measure = 0.0;
    for w in samples.windows(2) {
        let (p, q) = (w[0], w[1]);
        match (hot(p), hot(q)) {
            (true, true) => refined_measure += q - p,
            (false, false) => {}
            (hp, _) => {
                let (mut h, mut c) = if hp { (p, q) } else { (q, p) };
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (h + c);
                    if hot(mid) {
                        h = mid;
                    } else {
                        c = mid;
                    }
                }
                refined_measure += (h - if hp { p } else { q }).abs();
            }
        }
    }
    Ok(SingularSet {
        interval,
        grid_step,
        grid_len: grid.len(),
        threshold,
        hot_points,
        measure_estimate,
        refined_measure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CoverageOutcome {
    /// Every grid energy with M_x ≥ 2a lies within c of the spectrum; `hot` counts them.
    Covered { hot: usize },
    Violation { energy: f64, value: f64, nearest_gap: f64 },
    /// mes(ℰ_x(a)) > b: the theorem's exceptional event.
    PreconditionFailed { measure: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub outcome: CoverageOutcome,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub schedule_feasible: bool,
    pub grid_step: f64,
    pub grid_measure: f64,
    pub refined_measure: f64,
    /// Grid energies with M_x ≥ 2a farther than c from the spectrum, counted even when the
    /// precondition fails.
    pub raw_far_hot: usize,
}

/// Singular-width coverage on B_L(x) of one realisation: if mes(ℰ_x(a)) ≤ b then every grid
/// energy with M_x(E) ≥ 2a is within c of some eigenvalue of the ball.
pub fn coverage_check(
    r: &Realization<'_>,
    x: usize,
    schedule: &ScheduleParams,
    interval: EnergyInterval,
    grid_step: f64,
) -> Result<CoverageReport> {
    if grid_step > schedule.c / 50.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParams(format!("grid step {grid_step:e} exceeds c/50 = {:e}", schedule.c / 50.0)));
    }
    let radius = u32::try_from(schedule.l).map_err(|_| Error::InvalidSize("radius overflow".into()))?;
    let s = r.ball_spectrum(x, radius)?;
    let m = BoundaryGreen::new(r.graph(), &s, x)?;
    let set = singular_set_measure(&m, schedule.a, interval, grid_step)?;

    let mut first_violation = None;
    let mut hot2a = 0;
    let mut raw_far_hot = 0;
    for k in 0..set.grid_len {
        let e = set.energy(k);
        let value = m.value(e);
        if value >= 2.0 * schedule.a {
            hot2a += 1;
            let nearest_gap = m.gap(e);
            if nearest_gap > schedule.c {
                raw_far_hot += 1;
                first_violation.get_or_insert(CoverageOutcome::Violation { energy: e, value, nearest_gap });
            }
        }
    }
    let outcome = if set.refined_measure > schedule.b {
        CoverageOutcome::PreconditionFailed { measure: set.refined_measure }
    } else {
        first_violation.unwrap_or(CoverageOutcome::Covered { hot: hot2a })
    };
    Ok(CoverageReport {
        outcome,
        a: schedule.a,
        b: schedule.b,
        c: schedule.c,
        schedule_feasible: schedule.feasible,
        grid_step,
        grid_measure: set.measure_estimate,
        refined_measure: set.refined_measure,
        raw_far_hot,
    })
}

/// Shared setup for two-volume and coverage experiments.
#[derive(Debug, Clone)]
pub struct TwoVolumeSetup<'g> {
    pub graph: &'g FiniteGraph,
    pub ensemble: Ensemble,
    pub x: usize,
    pub y: usize,
    pub schedule: ScheduleParams,
    pub interval: EnergyInterval,
    pub grid_step: f64,
    pub c_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoVolumeReport {
    /// Frequency of {∃ grid E ∈ I : min(M_x(E), M_y(E)) > a}, with the closed-form bound.
    pub zeta: EstimateReport,
    /// max over grid energies of the upper confidence limit of P{M_x(E) ≥ a}.
    pub p_l: f64,
    pub wegner_term: f64,
    pub chebyshev_term: f64,
    pub rows: Vec<TrialRow>,
}

pub fn two_volume_estimate(setup: &TwoVolumeSetup<'_>, trials: u64, seed_base: u64) -> Result<TwoVolumeReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let l = setup.schedule.l;
    let radius = u32::try_from(l).map_err(|_| Error::InvalidSize("radius overflow".into()))?;
    if u64::from(setup.graph.distance(setup.x, setup.y)?) <= 2 * l {
        return Err(Error::InvalidGeometry(format!("balls of radius {l} around {} and {} intersect", setup.x, setup.y)));
    }
    let grid = energy_grid(setup.interval.lo, setup.interval.hi, setup.grid_step);
    let a = setup.schedule.a;
    let per_trial = run_trials(trials, seed_base, |i, seed| -> Result<(TrialRow, bool, Vec<u8>)> {
        let r = Realization::sample(setup.graph, &setup.ensemble, seed);
        let mx = BoundaryGreen::new(setup.graph, &*r.ball_spectrum(setup.x, radius)?, setup.x)?;
        let my = BoundaryGreen::new(setup.graph, &*r.ball_spectrum(setup.y, radius)?, setup.y)?;
        let mut event = false;
        let mut hits = Vec::with_capacity(grid.len());
        let mut first = None;
        for &e in &grid {
            let (vx, vy) = (mx.value(e), my.value(e));
            hits.push(u8::from(vx >= a) + u8::from(vy >= a));
            if vx.min(vy) > a {
                event = true;
                first.get_or_insert(e);
            }
        }
        let row = TrialRow {
            trial: i,
            seed,
            scale: l,
            e_or_grid: format!("grid[{},{}]/{}", setup.interval.lo, setup.interval.hi, setup.grid_step),
            verdicts: if event { "both_hot".into() } else { "separated".into() },
            measure: first,
            flags: String::new(),
        };
        Ok((row, event, hits))
    });
    let mut rows = Vec::with_capacity(per_trial.len());
    let mut events = 0u64;
    let mut hit_counts = vec![0u64; grid.len()];
    for t in per_trial {
        let (row, event, hits) = t?;
        events += u64::from(event);
        for (c, h) in hit_counts.iter_mut().zip(hits) {
            *c += u64::from(h);
        }
        rows.push(row);
    }
    let samples = 2 * trials;
    let p_l = hit_counts.iter().map(|&k| clopper_pearson(k, samples, CONFIDENCE).1).fold(0.0, f64::max);
    let d = setup.graph.dim_hint() as i32;
    let c_w = setup.ensemble.wegner_constant();
    let wegner_term = 4.0 * c_w * setup.c_d * setup.c_d * (l as f64).powi(2 * d) * setup.schedule.c;
    let chebyshev_term = 2.0 * p_l / setup.schedule.b;
    let energy = EnergySpec::Grid { lo: setup.interval.lo, hi: setup.interval.hi, step: setup.grid_step };
    let mut zeta = EstimateReport::from_counts(Quantity::Zeta, events, trials, seed_base, l, energy)
        .with_bound(wegner_term + chebyshev_term);
    if wegner_term + chebyshev_term >= 1.0 {
        zeta = zeta.flag("bound_vacuous");
    }
    if !setup.schedule.feasible {
        zeta = zeta.flag("schedule_infeasible");
    }
    Ok(TwoVolumeReport { zeta, p_l, wegner_term, chebyshev_term, rows })
}
