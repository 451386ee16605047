use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::montecarlo::stats::{run_trials, EnergySpec, EstimateReport, Quantity};
use crate::msa::{
    classify_ball_singular, classify_cnr, classify_resonant, classify_tunneling, Ball, PairWitness, ResonantProbe,
    ScaleParams, TunnelingMode,
};
use crate::operator::{Ensemble, Realization};
use crate::report::TrialRow;

/// Which implication is audited on the big ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    /// NR and NT (two disjoint singular sub-balls) imply NS.
    Section5,
    /// CNR and NT (counted) imply NS.
    Section8,
}

#[derive(Debug, Clone)]
pub struct InductionSetup<'g> {
    pub graph: &'g FiniteGraph,
    pub ensemble: Ensemble,
    pub params: ScaleParams,
    pub energy: f64,
    pub center: usize,
    pub small: u64,
    pub big: u64,
    pub mode: AuditMode,
    pub c_d: f64,
}

/// A trial where the premise held on B_{L_{k+1}}(u) but the ball was singular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicationViolation {
    pub trial: u64,
    pub seed: u64,
    pub ball: Ball,
    pub energy: f64,
    pub gap: f64,
    pub resonance_threshold: f64,
    pub disjoint_singular: usize,
    pub count_exact: bool,
    pub singular_centers: Vec<usize>,
    /// Offending pairs of the nonsingularity test (at most a few).
    pub pairs: Vec<PairWitness>,
    pub pairs_violating: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAudit {
    pub small_singular: bool,
    pub big_resonant: bool,
    pub premise: bool,
    pub big_singular: bool,
    pub resonant_probe: Option<ResonantProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionReport {
    pub mode: AuditMode,
    pub small: u64,
    pub big: u64,
    pub trials: u64,
    pub premise_count: u64,
    pub violations: Vec<ImplicationViolation>,
    pub violation_fraction: f64,
    pub p_k: EstimateReport,
    pub q_k1: EstimateReport,
    pub p_k1: EstimateReport,
    /// ½ C_d² L_{k+1}^{2d} P̂_k² + ½ Q̂_{k+1} from point estimates.
    pub recursion_rhs: f64,
    /// The same from the upper confidence limits.
    pub recursion_rhs_upper: f64,
    pub recursion_holds: bool,
    pub audits: Vec<TrialAudit>,
    pub rows: Vec<TrialRow>,
}

type TrialOut = (TrialAudit, Option<ImplicationViolation>, TrialRow);

pub fn induction_audit(setup: &InductionSetup<'_>, trials: u64, seed_base: u64) -> Result<InductionReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    if setup.big <= 2 * setup.small {
        return Err(Error::InvalidGeometry("L_{k+1} must exceed 2 L_k".into()));
    }
    let big_ball = Ball::new(setup.center, setup.big);
    let small_ball = Ball::new(setup.center, setup.small);
    let e = setup.energy;
    let p = &setup.params;

    let per_trial = run_trials(trials, seed_base, |i, seed| -> Result<TrialOut> {
        let r = Realization::sample(setup.graph, &setup.ensemble, seed);
        let small_singular = classify_ball_singular(&r, small_ball, e, p, setup.c_d)?.singular;
        let big_spec = r.ball_spectrum(setup.center, big_ball.radius_u32())?;
        let resonance = classify_resonant(&big_spec, e, p, setup.big);
        let (tmode, nonres, probe) = match setup.mode {
            AuditMode::Section5 => (TunnelingMode::Pairwise, !resonance.resonant, None),
            AuditMode::Section8 => {
                let cnr = classify_cnr(&r, big_ball, e, p, setup.small)?;
                (TunnelingMode::Counted, cnr.cnr, cnr.witness)
            }
        };
        let tunneling = classify_tunneling(&r, big_ball, e, p, setup.small, tmode, setup.c_d)?;
        let premise = nonres && !tunneling.tunneling;
        let singular = classify_ball_singular(&r, big_ball, e, p, setup.c_d)?;
        let violation = (premise && singular.singular).then(|| ImplicationViolation {
            trial: i,
            seed,
            ball: big_ball,
            energy: e,
            gap: resonance.gap,
            resonance_threshold: resonance.threshold,
            disjoint_singular: tunneling.count,
            count_exact: tunneling.exact,
            singular_centers: tunneling.singular_centers.clone(),
            pairs: singular.witnesses.clone(),
            pairs_violating: singular.violations,
        });
        let verdicts = [
            if resonance.resonant { "R" } else { "NR" },
            if tunneling.tunneling { "T" } else { "NT" },
            if singular.singular { "S" } else { "NS" },
            if small_singular { "small_S" } else { "small_NS" },
        ];
        let mut flags = Vec::new();
        if setup.mode == AuditMode::Section8 {
            flags.push(if nonres { "CNR" } else { "CR" });
        }
        if violation.is_some() {
            flags.push("violation");
        }
        if !tunneling.exact {
            flags.push("greedy_count");
        }
        let row = TrialRow {
            trial: i,
            seed,
            scale: setup.big,
            e_or_grid: format!("{e}"),
            verdicts: verdicts.join(";"),
            measure: Some(resonance.gap),
            flags: flags.join(";"),
        };
        let audit = TrialAudit {
            small_singular,
            big_resonant: resonance.resonant,
            premise,
            big_singular: singular.singular,
            resonant_probe: probe,
        };
        Ok((audit, violation, row))
    });

    let mut audits = Vec::with_capacity(per_trial.len());
    let mut violations = Vec::new();
    let mut rows = Vec::with_capacity(per_trial.len());
    for t in per_trial {
        let (a, v, row) = t?;
        audits.push(a);
        violations.extend(v);
        rows.push(row);
    }
    let count = |f: fn(&TrialAudit) -> bool| audits.iter().filter(|a| f(a)).count() as u64;
    let premise_count = count(|a| a.premise);
    let energy = EnergySpec::Point { energy: e };
    let p_k = EstimateReport::from_counts(Quantity::Pk, count(|a| a.small_singular), trials, seed_base, setup.small, energy);
    let q_k1 = EstimateReport::from_counts(Quantity::Qk, count(|a| a.big_resonant), trials, seed_base, setup.big, energy)
        .scaled(2.0)
        .flag("doubled");
    let p_k1 = EstimateReport::from_counts(Quantity::Pk, count(|a| a.big_singular), trials, seed_base, setup.big, energy);

    let d = setup.graph.dim_hint() as i32;
    let volume = setup.c_d * setup.c_d * (setup.big as f64).powi(2 * d);
    let rhs = |pk: f64, qk: f64| 0.5 * volume * pk * pk + 0.5 * qk;
    let recursion_rhs = rhs(p_k.point_estimate, q_k1.point_estimate);
    let recursion_rhs_upper = rhs(p_k.ci_high, q_k1.ci_high);
    let p_k1 = p_k1.with_bound(recursion_rhs);
    Ok(InductionReport {
        mode: setup.mode,
        small: setup.small,
        big: setup.big,
        trials,
        premise_count,
        violation_fraction: violations.len() as f64 / trials as f64,
        violations,
        recursion_holds: p_k1.point_estimate <= recursion_rhs,
        p_k,
        q_k1,
        p_k1,
        recursion_rhs,
        recursion_rhs_upper,
        audits,
        rows,
    })
}
