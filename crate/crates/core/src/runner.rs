//! Executes an [`ExperimentConfig`] and writes its trial CSV and summary JSON.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{EstimateQuantity, Experiment, ExperimentConfig};
use crate::dynamics::{decay_curve, decay_fit, ef_correlator, gk_bound_audit, write_decay_csv, GkAudit};
use crate::error::{Error, Result};
use crate::graph::{ball_growth_constant, FiniteGraph};
use crate::montecarlo::{
    coverage_check, disjoint_count_tail, estimate_pk, estimate_qk, induction_audit, run_trials, two_volume_estimate,
    wegner_check, BallSetup, CoverageOutcome, DisjointSetup, EnergyInterval, InductionSetup, ScheduleParams,
    TwoVolumeSetup,
};
use crate::msa::{classify_cnr, classify_m_localized, classify_resonant, classify_singular, classify_tunneling, Ball, TunnelingMode};
use crate::operator::{eigendecompose, Realization};
use crate::report::{write_trials_csv, Summary, TrialRow};
use crate::verify::{verify, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub exit_code: i32,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Exit status of an error raised while running.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    graph: FiniteGraph,
    params: crate::msa::ScaleParams,
    c_d: f64,
}

struct Outcome {
    result: Value,
    rows: Vec<TrialRow>,
    violations: Vec<String>,
    extra_files: Vec<PathBuf>,
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

fn center_of(g: &FiniteGraph) -> Result<usize> {
    if let Some(side) = g.box_side() {
        let d = g.dim_hint() as usize;
        if let Some(c) = g.box_index(&vec![side / 2; d]) {
            return Ok(c);
        }
    }
    let mut best = (u32::MAX, 0);
    for v in 0..g.len() {
        best = best.min((g.eccentricity(v)?, v));
    }
    Ok(best.1)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let graph = cfg.graph.build()?;
    let params = cfg.params.resolve(graph.dim_hint())?;
    let c_d = match cfg.c_d {
        Some(c) => c,
        None => ball_growth_constant(&graph, 16)?.c_d,
    };
    let ctx = Ctx { cfg, graph, params, c_d };
    let out = match &cfg.experiment {
        Experiment::Classify { center, radius, small_radius } => classify(&ctx, *center, *radius, *small_radius)?,
        Experiment::Estimate { quantity, scale, centers, epsilons, big } => {
            estimate(&ctx, *quantity, *scale, centers.clone(), epsilons.clone(), *big)?
        }
        Experiment::Induction { center, small, big, mode } => {
            let setup = InductionSetup {
                graph: &ctx.graph,
                ensemble: cfg.ensemble.build(),
                params: ctx.params.clone(),
                energy: cfg.energy()?,
                center: center.map_or_else(|| center_of(&ctx.graph), Ok)?,
                small: *small,
                big: *big,
                mode: *mode,
                c_d: ctx.c_d,
            };
            let mut rep = induction_audit(&setup, cfg.trials, cfg.seed_base)?;
            let rows = std::mem::take(&mut rep.rows);
            Outcome { result: to_value(&rep), rows, violations: Vec::new(), extra_files: Vec::new() }
        }
        Experiment::Coverage { center, scale, schedule } => coverage(&ctx, *center, *scale, *schedule)?,
        Experiment::TwoVolume { x, y, scale, schedule } => {
            let n = ctx.graph.ball(*x, *scale as u32)?.len();
            let setup = TwoVolumeSetup {
                graph: &ctx.graph,
                ensemble: cfg.ensemble.build(),
                x: *x,
                y: *y,
                schedule: ScheduleParams::evaluate(*schedule, *scale, n),
                interval: cfg.interval()?,
                grid_step: cfg.grid_step.unwrap_or(ScheduleParams::evaluate(*schedule, *scale, n).default_grid_step()),
                c_d: ctx.c_d,
            };
            let mut rep = two_volume_estimate(&setup, cfg.trials, cfg.seed_base)?;
            let rows = std::mem::take(&mut rep.rows);
            Outcome { result: to_value(&rep), rows, violations: Vec::new(), extra_files: Vec::new() }
        }
        Experiment::Dynamics { origin, distances, audit } => dynamics(&ctx, *origin, distances, *audit)?,
        Experiment::Verify { suite, inject_q } => {
            let opts = VerifyOptions { instances: cfg.trials, seed_base: cfg.seed_base, inject_q: *inject_q };
            let rep = verify(*suite, &opts);
            let violations = rep
                .suites
                .iter()
                .flat_map(|s| s.checks.iter().filter(|c| c.failed > 0).map(move |c| format!("{}: {} ({} failed)", s.suite, c.name, c.failed)))
                .collect();
            Outcome { result: to_value(&rep), rows: Vec::new(), violations, extra_files: Vec::new() }
        }
    };

    std::fs::create_dir_all(&cfg.output.dir)?;
    let trials_path = cfg.output.trials_path();
    write_trials_csv(&trials_path, &out.rows)?;
    let echo = json!({
        "input": to_value(cfg),
        "resolved": { "params": to_value(&ctx.params), "c_d": ctx.c_d, "vertices": ctx.graph.len() },
    });
    let mut summary = Summary::new(echo, out.result);
    summary.invariant_violations = out.violations;
    let summary_path = cfg.output.summary_path();
    summary.write(&summary_path)?;
    let exit_code = if summary.invariant_violations.is_empty() { EXIT_OK } else { EXIT_INVARIANT };
    let mut files = vec![trials_path, summary_path];
    files.extend(out.extra_files);
    Ok(RunOutput { exit_code, summary, files })
}

/// Load, run and map every failure to an exit code; the message goes to stderr.
pub fn run_path(path: &std::path::Path) -> i32 {
    let cfg = match std::fs::read_to_string(path) {
        Ok(text) => match ExperimentConfig::from_json(&text) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return EXIT_CONFIG;
            }
        },
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return EXIT_IO;
        }
    };
    match run(&cfg) {
        Ok(out) => {
            for v in &out.summary.invariant_violations {
                eprintln!("invariant violation: {v}");
            }
            out.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn classify(ctx: &Ctx<'_>, center: Option<usize>, radius: u64, small: Option<u64>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let e = cfg.energy()?;
    let center = center.map_or_else(|| center_of(&ctx.graph), Ok)?;
    let ball = Ball::new(center, radius);
    let ensemble = cfg.ensemble.build();
    let rows = run_trials(cfg.trials, cfg.seed_base, |i, seed| -> Result<TrialRow> {
        let r = Realization::sample(&ctx.graph, &ensemble, seed);
        let s = r.ball_spectrum(center, ball.radius_u32())?;
        let res = classify_resonant(&s, e, &ctx.params, radius);
        let sing = classify_singular(&s, &ctx.graph, ball, e, &ctx.params, ctx.c_d)?;
        let loc = classify_m_localized(&s, &ctx.graph, ball, &ctx.params)?;
        let mut v = vec![
            if res.resonant { "R" } else { "NR" },
            if sing.singular { "S" } else { "NS" },
            if loc.localized { "LOC" } else { "NLOC" },
        ];
        if let Some(sr) = small {
            let t = classify_tunneling(&r, ball, e, &ctx.params, sr, TunnelingMode::Pairwise, ctx.c_d)?;
            v.push(if t.tunneling { "T" } else { "NT" });
            let c = classify_cnr(&r, ball, e, &ctx.params, sr)?;
            v.push(if c.cnr { "CNR" } else { "CR" });
        }
        Ok(TrialRow {
            trial: i,
            seed,
            scale: radius,
            e_or_grid: format!("{e}"),
            verdicts: v.join(";"),
            measure: Some(res.gap),
            flags: String::new(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut counts = std::collections::BTreeMap::new();
    for r in &rows {
        for v in r.verdicts.split(';') {
            *counts.entry(v.to_string()).or_insert(0u64) += 1;
        }
    }
    Ok(Outcome { result: json!({ "ball": to_value(&ball), "counts": counts }), rows, violations: Vec::new(), extra_files: Vec::new() })
}

fn estimate(
    ctx: &Ctx<'_>,
    quantity: EstimateQuantity,
    scale: u64,
    centers: Option<Vec<usize>>,
    epsilons: Option<Vec<f64>>,
    big: Option<u64>,
) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let ensemble = cfg.ensemble.build();
    let centers = match centers {
        Some(c) => c,
        None => vec![center_of(&ctx.graph)?],
    };
    let (result, rows) = match quantity {
        EstimateQuantity::Pk | EstimateQuantity::Qk => {
            let setup = BallSetup {
                graph: &ctx.graph,
                ensemble,
                params: ctx.params.clone(),
                energy: cfg.energy()?,
                scale,
                centers,
                c_d: ctx.c_d,
            };
            let mut rep = if quantity == EstimateQuantity::Pk {
                estimate_pk(&setup, cfg.trials, cfg.seed_base)?
            } else {
                estimate_qk(&setup, cfg.trials, cfg.seed_base)?
            };
            let rows = std::mem::take(&mut rep.rows);
            (to_value(&rep), rows)
        }
        EstimateQuantity::Wegner => {
            let eps = epsilons.ok_or_else(|| Error::Config("wegner estimate needs `epsilons`".into()))?;
            let mut rep = wegner_check(&ctx.graph, &ensemble, cfg.energy()?, &eps, cfg.trials, cfg.seed_base)?;
            let rows = std::mem::take(&mut rep.rows);
            (to_value(&rep), rows)
        }
        EstimateQuantity::DisjointTail => {
            let big = big.ok_or_else(|| Error::Config("disjoint_tail estimate needs `big`".into()))?;
            let setup = DisjointSetup {
                graph: &ctx.graph,
                ensemble,
                params: ctx.params.clone(),
                energy: cfg.energy()?,
                center: centers[0],
                small: scale,
                big,
                c_d: ctx.c_d,
            };
            let mut rep = disjoint_count_tail(&setup, cfg.trials, cfg.seed_base)?;
            let rows = std::mem::take(&mut rep.rows);
            (to_value(&rep), rows)
        }
    };
    Ok(Outcome { result, rows, violations: Vec::new(), extra_files: Vec::new() })
}

fn coverage(ctx: &Ctx<'_>, center: Option<usize>, scale: u64, inputs: crate::montecarlo::ScheduleInputs) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let center = center.map_or_else(|| center_of(&ctx.graph), Ok)?;
    let n = ctx.graph.ball(center, scale as u32)?.len();
    let schedule = ScheduleParams::evaluate(inputs, scale, n);
    let interval = cfg.interval()?;
    let step = cfg.grid_step.unwrap_or(schedule.default_grid_step());
    let ensemble = cfg.ensemble.build();
    let per = run_trials(cfg.trials, cfg.seed_base, |i, seed| -> Result<(TrialRow, CoverageOutcome)> {
        let r = Realization::sample(&ctx.graph, &ensemble, seed);
        let rep = coverage_check(&r, center, &schedule, interval, step)?;
        let verdict = match &rep.outcome {
            CoverageOutcome::Covered { .. } => "covered",
            CoverageOutcome::Violation { .. } => "violation",
            CoverageOutcome::PreconditionFailed { .. } => "precondition_failed",
        };
        let row = TrialRow {
            trial: i,
            seed,
            scale,
            e_or_grid: format!("grid[{},{}]/{step}", interval.lo, interval.hi),
            verdicts: verdict.into(),
            measure: Some(rep.refined_measure),
            flags: format!("grid_measure={};far_hot={}", rep.grid_measure, rep.raw_far_hot),
        };
        Ok((row, rep.outcome))
    });
    let mut rows = Vec::new();
    let (mut covered, mut violated, mut failed) = (0u64, 0u64, 0u64);
    let mut violations = Vec::new();
    for p in per {
        let (row, outcome) = p?;
        match outcome {
            CoverageOutcome::Covered { .. } => covered += 1,
            CoverageOutcome::Violation { energy, nearest_gap, .. } => {
                violated += 1;
                if schedule.feasible {
                    violations.push(format!("trial {}: hot energy {energy} at distance {nearest_gap:e} > c", row.trial));
                }
            }
            CoverageOutcome::PreconditionFailed { .. } => failed += 1,
        }
        rows.push(row);
    }
    let result = json!({
        "schedule": to_value(&schedule),
        "grid_step": step,
        "grid_rationale": "step tied to c/50 via the derivative bound N/c^2 between resonances",
        "interval": to_value(&interval),
        "covered": covered,
        "violations": violated,
        "precondition_failed": failed,
    });
    Ok(Outcome { result, rows, violations, extra_files: Vec::new() })
}

fn dynamics(ctx: &Ctx<'_>, origin: Option<usize>, distances: &[u64], audit: Option<crate::config::GkSpec>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let origin = origin.map_or_else(|| center_of(&ctx.graph), Ok)?;
    let targets: Vec<(u64, usize)> = distances
        .iter()
        .map(|&d| {
            (0..ctx.graph.len())
                .find(|&v| ctx.graph.distance(origin, v).map(|x| u64::from(x) == d).unwrap_or(false))
                .map(|v| (d, v))
                .ok_or_else(|| Error::Config(format!("no vertex at distance {d} from {origin}")))
        })
        .collect::<Result<_>>()?;
    let full = EnergyInterval::new(f64::MIN / 4.0, f64::MAX / 4.0)?;
    let interval = match cfg.interval {
        Some(_) => cfg.interval()?,
        None => full,
    };
    let ensemble = cfg.ensemble.build();
    let per = run_trials(cfg.trials, cfg.seed_base, |i, seed| -> Result<(TrialRow, Vec<f64>, Option<GkAudit>)> {
        let r = Realization::sample(&ctx.graph, &ensemble, seed);
        let s = eigendecompose(&r.full_hamiltonian()?)?;
        let values = targets.iter().map(|&(_, v)| ef_correlator(&s, origin, v, full).map(|c| c.value)).collect::<Result<Vec<_>>>()?;
        let gk = match audit {
            Some(a) => Some(gk_bound_audit(&s, &ctx.graph, a.x, a.y, a.l, interval, &ctx.params, ctx.c_d)?),
            None => None,
        };
        let verdict = match &gk {
            Some(GkAudit::BoundHolds { .. }) => "bound_holds",
            Some(GkAudit::NotApplicable { .. }) => "not_applicable",
            Some(GkAudit::Violation { .. }) => "violation",
            None => "",
        };
        let row = TrialRow {
            trial: i,
            seed,
            scale: audit.map_or(0, |a| a.l),
            e_or_grid: if audit.is_some() { format!("[{},{}]", interval.lo, interval.hi) } else { "full".into() },
            verdicts: verdict.into(),
            measure: gk.as_ref().map(|g| match g {
                GkAudit::BoundHolds { correlator, .. } | GkAudit::Violation { correlator, .. } | GkAudit::NotApplicable { correlator, .. } => *correlator,
            }),
            flags: values.iter().zip(&targets).map(|(c, (d, _))| format!("d{d}={c:e}")).collect::<Vec<_>>().join(";"),
        };
        Ok((row, values, gk))
    });
    let mut rows = Vec::new();
    let mut samples: Vec<(u64, Vec<f64>)> = targets.iter().map(|&(d, _)| (d, Vec::new())).collect();
    let mut audits = Vec::new();
    for p in per {
        let (row, values, gk) = p?;
        for (slot, v) in samples.iter_mut().zip(values) {
            slot.1.push(v);
        }
        audits.extend(gk.map(|g| (row.trial, g)));
        rows.push(row);
    }
    let violations: Vec<String> = audits
        .iter()
        .filter(|(_, g)| g.is_violation())
        .map(|(t, g)| format!("trial {t}: {}", serde_json::to_string(g).expect("serializable")))
        .collect();
    let count = |f: fn(&GkAudit) -> bool| audits.iter().filter(|(_, g)| f(g)).count();
    let mut result = json!({
        "origin": origin,
        "gk": {
            "bound_holds": count(|g| matches!(g, GkAudit::BoundHolds { .. })),
            "not_applicable": count(|g| matches!(g, GkAudit::NotApplicable { .. })),
            "violation": count(GkAudit::is_violation),
        },
    });
    let mut extra = Vec::new();
    if cfg.trials > 0 && !targets.is_empty() {
        let curve = decay_curve(&samples)?;
        let mean_fit = decay_fit(&curve.iter().map(|p| (p.distance as f64, p.mean)).collect::<Vec<_>>());
        let median_fit = decay_fit(&curve.iter().map(|p| (p.distance as f64, p.median)).collect::<Vec<_>>());
        result["decay_curve"] = to_value(&curve);
        result["fit_mean"] = mean_fit.map(|f| to_value(&f)).unwrap_or_else(|e| json!({ "error": e.to_string() }));
        result["fit_median"] = median_fit.map(|f| to_value(&f)).unwrap_or_else(|e| json!({ "error": e.to_string() }));
        std::fs::create_dir_all(&cfg.output.dir)?;
        write_decay_csv(&cfg.output.decay_path(), &curve)?;
        extra.push(cfg.output.decay_path());
    }
    Ok(Outcome { result, rows, violations, extra_files: extra })
}
