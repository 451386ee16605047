//! Deterministic and randomized property suites, runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ef_correlator, evolution_amplitude};
use crate::error::Result;
use crate::graph::{build_box_graph, build_interval_graph, FiniteGraph, SubgraphView};
use crate::montecarlo::{parameter_schedule, shift_covariance_check, EnergyInterval, ScheduleInputs};
use crate::msa::{Ball, ScaleParams};
use crate::operator::{assemble_hamiltonian, eigendecompose, verify_gre, BoundaryKind, Ensemble, Potential, Realization};
use crate::seed::derive_seed;
use crate::subharmonic::check::Domain;
use crate::subharmonic::generator::{generate_annular, generate_subharmonic, random_cover, sharp_example};
use crate::subharmonic::{
    annuli_bound, is_lq_subharmonic, is_lqr_subharmonic, radial_bound, radial_estimate, regular_set, two_ball_bound,
    Annulus, AnnuliCover,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Operators,
    Schedules,
    All,
}

impl Suite {
    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Lemmas, Suite::Operators, Suite::Schedules],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Operators => "operators",
            Suite::Schedules => "schedules",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "operators" => Ok(Suite::Operators),
            "schedules" => Ok(Suite::Schedules),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite `{other}` (expected lemmas, operators, schedules or all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    /// Randomized instances per randomized check; zero runs the deterministic checks only.
    #[serde(default = "default_instances")]
    pub instances: u64,
    #[serde(default)]
    pub seed_base: u64,
    /// Replaces every contraction factor q, for negative testing.
    #[serde(default)]
    pub inject_q: Option<f64>,
}

fn default_instances() -> u64 {
    20
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { instances: default_instances(), seed_base: 0, inject_q: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteResult {
    pub fn failed(&self) -> u64 {
        self.checks.iter().map(|c| c.failed).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
    pub passed: u64,
    pub failed: u64,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

struct Check {
    result: CheckResult,
}

impl Check {
    fn new(name: &str) -> Self {
        Check { result: CheckResult { name: name.into(), passed: 0, failed: 0, first_failure: None } }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if ok {
            self.result.passed += 1;
        } else {
            self.result.failed += 1;
            if self.result.first_failure.is_none() {
                self.result.first_failure = Some(detail());
            }
        }
    }

    fn record_result(&mut self, r: Result<bool>, detail: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.record(ok, detail),
            Err(e) => self.record(false, || format!("{}: {e}", detail())),
        }
    }
}

pub fn verify(suite: Suite, opts: &VerifyOptions) -> VerifyReport {
    let suites: Vec<SuiteResult> = suite
        .expand()
        .into_iter()
        .map(|s| {
            let checks = match s {
                Suite::Lemmas => lemmas(opts),
                Suite::Operators => operators(opts),
                Suite::Schedules => schedules(opts),
                Suite::All => unreachable!("expanded"),
            };
            SuiteResult { suite: s.name().into(), checks: checks.into_iter().map(|c| c.result).collect() }
        })
        .collect();
    let passed = suites.iter().flat_map(|s| &s.checks).map(|c| c.passed).sum();
    let failed = suites.iter().map(SuiteResult::failed).sum();
    VerifyReport { suites, passed, failed }
}

fn rng_for(opts: &VerifyOptions, stream: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(opts.seed_base ^ stream.wrapping_mul(0x9E37_79B9), i))
}

fn q_or(opts: &VerifyOptions, q: f64) -> f64 {
    opts.inject_q.unwrap_or(q)
}

const REL: f64 = 1e-12;

fn lemmas(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();

    let mut c = Check::new("sharp descent example");
    for (l, q) in [(5u64, 0.5), (12, 0.3), (30, 0.9)] {
        let q = q_or(opts, q);
        c.record_result(
            sharp_example(l, q).and_then(|(g, f)| {
                let ball = Ball::new(0, l);
                let sub = is_lq_subharmonic(&f, &g, ball, 0, q)?.holds;
                let target = q.powi(l as i32 + 1);
                let est = radial_estimate(&f, &g, ball, 0, q)?;
                Ok(sub && (f[0] - target).abs() <= REL * target && (est.bound * est.max_global - f[0]).abs() <= REL * target)
            }),
            || format!("L={l}, q={q}"),
        );
    }
    out.push(c);

    let mut c = Check::new("bound formulas");
    c.record(radial_bound(5, 1, 0.5) == 0.125, || "radial_bound(5,1,0.5)".into());
    c.record(two_ball_bound(3, 3, 1, 0.5) == 0.0625, || "two_ball_bound(3,3,1,0.5)".into());
    let cover = AnnuliCover::new(vec![Annulus::new(4, 5, 1)], 1);
    c.record_result(cover.and_then(|cv| annuli_bound(20, 1, 0.5, &cv)).map(|b| b == 0.5f64.powi(8)), || "annuli_bound(20,1,0.5)".into());
    out.push(c);

    let mut c = Check::new("trivial functions");
    let g = build_box_graph(2, 7).expect("box");
    let ball = Ball::new(24, 2);
    let zero = vec![0.0; g.len()];
    let ones = vec![1.0; g.len()];
    let q = q_or(opts, 0.5);
    c.record_result(is_lq_subharmonic(&zero, &g, ball, 1, q).map(|v| v.holds), || "f = 0".into());
    c.record_result(regular_set(&zero, &g, ball, 1, q).map(|r| r.len() == 13), || "regular set of f = 0".into());
    c.record_result(is_lq_subharmonic(&ones, &g, ball, 0, q).map(|v| !v.holds), || "f = 1 rejected".into());
    out.push(c);

    let mut radial = Check::new("radial bound on certified functions");
    let mut product = Check::new("two-ball bound on product functions");
    let mut annular = Check::new("annuli bound on certified functions");
    let mut regular = Check::new("regular set contains the checked points iff subharmonic");
    for i in 0..opts.instances {
        let mut rng = rng_for(opts, 1, i);
        let (g, center, l) = random_host(&mut rng);
        let ell = rng.gen_range(0..=l.min(3));
        let q = q_or(opts, rng.gen_range(0.05..0.95));
        let ball = Ball::new(center, l);
        let seed = rng.gen();
        radial.record_result(
            generate_subharmonic(&g, ball, ell, q, seed).and_then(|f| {
                let accepted = is_lq_subharmonic(&f, &g, ball, ell, q)?.holds;
                Ok(accepted && radial_estimate(&f, &g, ball, ell, q)?.holds_global(REL))
            }),
            || format!("instance {i}: L={l}, ℓ={ell}, q={q}"),
        );
        regular.record_result(
            generate_subharmonic(&g, ball, ell, q, seed ^ 1).and_then(|mut f| {
                if rng.gen_bool(0.5) {
                    f[center] *= 1.0 + 10.0 / q;
                }
                let reg = regular_set(&f, &g, ball, ell, q)?;
                let inner = Domain::new(&f, &g, ball)?.inner_points(ell as u32)?;
                let full = inner.iter().all(|x| reg.contains(x));
                Ok(full == is_lq_subharmonic(&f, &g, ball, ell, q)?.holds)
            }),
            || format!("instance {i}"),
        );

        let (r2, c2) = (rng.gen_range(ell..=ell + 4), rng.gen_range(0..g.len()));
        product.record_result(product_check(&g, Ball::new(center, l), Ball::new(c2, r2), ell, q, seed), || {
            format!("instance {i}: r1={l}, r2={r2}, ℓ={ell}, q={q}")
        });

        let big = rng.gen_range(8..30u64);
        let ell_a = rng.gen_range(1..=2u64);
        let path = build_interval_graph(2 * big as usize + 3).expect("path");
        let ball_a = Ball::new(big as usize + 1, big);
        annular.record_result(
            random_cover(big, ell_a, &mut rng).and_then(|cover| {
                let f = generate_annular(&path, ball_a, ell_a, q, &cover, seed)?;
                let v = is_lqr_subharmonic(&f, &path, ball_a, ell_a, q, &cover)?;
                let bound = annuli_bound(big, ell_a, q, &cover)?;
                let max = f.iter().copied().fold(0.0, f64::max);
                Ok(v.certified() && f[ball_a.center] <= bound * max * (1.0 + REL))
            }),
            || format!("instance {i}: L={big}, ℓ={ell_a}, q={q}"),
        );
    }
    out.extend([radial, product, annular, regular]);
    out
}

/// Separately subharmonic f(x, y) = f1(x) f2(y) satisfies f(u1, u2) ≤ two_ball_bound · max f.
pub fn product_check(g: &FiniteGraph, b1: Ball, b2: Ball, ell: u64, q: f64, seed: u64) -> Result<bool> {
    let f1 = generate_subharmonic(g, b1, ell, q, seed)?;
    let f2 = generate_subharmonic(g, b2, ell, q, seed.wrapping_add(1))?;
    if !is_lq_subharmonic(&f1, g, b1, ell, q)?.holds || !is_lq_subharmonic(&f2, g, b2, ell, q)?.holds {
        return Ok(false);
    }
    let m1 = f1.iter().copied().fold(0.0, f64::max);
    let m2 = f2.iter().copied().fold(0.0, f64::max);
    let value = f1[b1.center] * f2[b2.center];
    Ok(value <= two_ball_bound(b1.radius, b2.radius, ell, q) * m1 * m2 * (1.0 + REL))
}

/// A 1D or 2D host graph with a proper ball of radius ≥ 1 inside it.
fn random_host(rng: &mut ChaCha8Rng) -> (FiniteGraph, usize, u64) {
    if rng.gen_bool(0.5) {
        let l = rng.gen_range(1..25u64);
        let n = 2 * l as usize + 3 + rng.gen_range(0..6);
        let g = build_interval_graph(n).expect("path");
        (g, l as usize + 1, l)
    } else {
        let l = rng.gen_range(1..6u64);
        let side = 2 * l as usize + 3;
        let g = build_box_graph(2, side).expect("box");
        let c = g.box_index(&[l as usize + 1, l as usize + 1]).expect("inside");
        (g, c, l)
    }
}

fn operators(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let g5 = build_interval_graph(5).expect("path");
    let p3 = SubgraphView::new(&g5, vec![1, 2, 3]).expect("view");
    let h3 = assemble_hamiltonian(&g5, &p3, &Potential::zero(5), BoundaryKind::Dirichlet).expect("assemble");

    let mut c = Check::new("three-vertex Dirichlet path");
    let sq = std::f64::consts::SQRT_2;
    c.record_result(
        eigendecompose(&h3).map(|s| {
            s.eigenvalues().iter().zip([2.0 - sq, 2.0, 2.0 + sq]).all(|(a, b)| (a - b).abs() < 1e-12)
        }),
        || "eigenvalues 2 - √2, 2, 2 + √2".into(),
    );
    c.record_result(shift_covariance_check(&h3, 1.0, 1, 3, 0.0).map(|r| r <= 1e-12), || "shift t = 1".into());
    c.record_result(
        eigendecompose(&h3).and_then(|s| ef_correlator(&s, 1, 3, EnergyInterval::new(-1e9, 1e9)?)).map(|c| (c.value - 1.0).abs() < 1e-12),
        || "full-band correlator of the end points".into(),
    );
    out.push(c);

    let mut gre = Check::new("geometric resolvent equation");
    let mut shift = Check::new("shift covariance");
    let mut unit = Check::new("Parseval, Bessel and unitarity");
    for i in 0..opts.instances {
        let mut rng = rng_for(opts, 2, i);
        let g = if rng.gen_bool(0.5) {
            build_interval_graph(rng.gen_range(6..120)).expect("path")
        } else {
            build_box_graph(2, rng.gen_range(3..11)).expect("box")
        };
        let r = Realization::sample(&g, &Ensemble::uniform(rng.gen_range(0.0..10.0)), rng.gen());
        let h = r.full_hamiltonian().expect("assemble");
        let x = rng.gen_range(0..g.len());
        let rad = rng.gen_range(0..4u32);
        let outside: Vec<usize> = (0..g.len()).filter(|&v| g.distance(x, v).map(|d| d > rad).unwrap_or(false)).collect();
        if !outside.is_empty() {
            let y = outside[rng.gen_range(0..outside.len())];
            let e = rng.gen_range(-1.0..14.0);
            let lambda = SubgraphView::ball(&g, x, rad).expect("ball");
            match verify_gre(&g, &h, &lambda, x, y, e) {
                Ok(chk) => gre.record(chk.relative <= 1e-8, || format!("instance {i}: relative {:e}", chk.relative)),
                Err(crate::Error::NearSpectrum { .. }) => {}
                Err(err) => gre.record(false, || format!("instance {i}: {err}")),
            }
        }
        let t = rng.gen_range(-3.0..3.0);
        let e = rng.gen_range(-1.0..14.0);
        match shift_covariance_check(&h, t, x, (x + 1) % g.len(), e) {
            Ok(res) => shift.record(res <= 1e-10, || format!("instance {i}: residual {res:e}")),
            Err(crate::Error::NearSpectrum { .. }) => {}
            Err(err) => shift.record(false, || format!("instance {i}: {err}")),
        }
        unit.record_result(unitarity(&h, rng.gen_range(-20.0..20.0)), || format!("instance {i}"));
    }
    out.extend([gre, shift, unit]);
    out
}

fn unitarity(h: &crate::operator::Hamiltonian, t: f64) -> Result<bool> {
    let s = eigendecompose(h)?;
    let full = EnergyInterval::new(f64::MIN / 4.0, f64::MAX / 4.0)?;
    let members = s.domain().members().to_vec();
    let x = members[0];
    let mut total = 0.0;
    let mut ok = true;
    for &y in &members {
        let a = evolution_amplitude(&s, x, y, t)?;
        total += a * a;
        ok &= a <= ef_correlator(&s, x, y, full)?.value + 1e-12;
    }
    for &u in &members {
        ok &= (ef_correlator(&s, u, u, full)?.value - 1.0).abs() < 1e-10;
    }
    Ok(ok && (total - 1.0).abs() < 1e-10)
}

fn schedules(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();

    let mut c = Check::new("closed-form schedules");
    let fmm = ScheduleInputs::Fmm { m: 3.0 }.thresholds(10);
    c.record(close(fmm.0, (-10f64).exp()) && close(fmm.1, (-20f64).exp()) && close(fmm.2, (-3.75f64).exp()), || format!("fmm {fmm:?}"));
    let sub = ScheduleInputs::Subexp { delta: 0.25 }.thresholds(16);
    c.record(
        close(sub.0, (-2.0f64 / 3.0).exp()) && close(sub.1, (-4.0f64 / 3.0).exp()) && close(sub.2, (-0.25f64).exp()),
        || format!("subexp {sub:?}"),
    );
    c.record(
        matches!(parameter_schedule(ScheduleInputs::Custom { a: 1.0, b: 0.5, c: 0.1 }, 4, 9), Err(crate::Error::ScheduleInfeasible(_))),
        || "b > c accepted".into(),
    );
    out.push(c);

    let mut c = Check::new("contraction factors");
    for preset in [ScaleParams::section2(1.0, 8), ScaleParams::section8(1.0, 8), ScaleParams::section2(0.25, 8)] {
        for ell in 1..=16u64 {
            let q = q_or(opts, preset.subharmonic_q(ell));
            c.record(q > 0.0 && q < 1.0, || format!("q = {q} at ℓ = {ell}"));
            let mut prev = 1.0;
            for l in ell..ell + 40 {
                let b = radial_bound(l, ell, q);
                c.record(b <= prev && b < 1.0, || format!("radial bound {b} not decreasing at L = {l}, q = {q}"));
                prev = b;
            }
        }
    }
    out.push(c);

    let mut c = Check::new("schedule feasibility");
    for i in 0..opts.instances {
        let mut rng = rng_for(opts, 3, i);
        let inputs = match rng.gen_range(0..3) {
            0 => ScheduleInputs::Fmm { m: rng.gen_range(0.1..4.0) },
            1 => ScheduleInputs::Subexp { delta: rng.gen_range(0.05..0.95) },
            _ => ScheduleInputs::Custom { a: rng.gen_range(0.0..1.0), b: rng.gen_range(0.0..1.0), c: rng.gen_range(0.0..1.0) },
        };
        let l = rng.gen_range(1..200u64);
        let n = rng.gen_range(1..500usize);
        let ok = match parameter_schedule(inputs, l, n) {
            Ok(s) => s.b <= s.c && s.b <= s.a * s.c * s.c / n as f64 && s.feasible,
            Err(crate::Error::ScheduleInfeasible(_)) => {
                let (a, b, c) = inputs.thresholds(l);
                !(b <= c && b <= a * c * c / n as f64)
            }
            Err(_) => false,
        };
        c.record(ok, || format!("{inputs:?} at L = {l}, N = {n}"));
    }
    out.push(c);
    out
}
