use msa_lab::montecarlo::{clopper_pearson, run_trials};
use msa_lab::msa::classify_ball_singular;
use msa_lab::report::{read_trials_csv, Summary};
use msa_lab::runner::{run, EXIT_OK};
use msa_lab::{build_interval_graph, Ball, Ensemble, ExperimentConfig, Realization, ScaleParams};
use proptest::prelude::*;

fn config(dir: &std::path::Path, experiment: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{"graph": {{"kind": "interval", "n": 65}}, "ensemble": {{"kind": "uniform01", "coupling": 10.0}},
            "params": {{"preset": "section2", "m": 0.1, "l0": 8}},
            "experiment": {experiment}, {extra}
            "output": {{"dir": "{}", "prefix": "run"}}}}"#,
        dir.display()
    );
    ExperimentConfig::from_json(&text).unwrap()
}

#[test]
fn classify_run_writes_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"kind": "classify", "radius": 8}"#, r#""trials": 12, "seed_base": 3, "energy": 0.5,"#);
    let out = run(&cfg).unwrap();
    assert_eq!(out.exit_code, EXIT_OK);
    let rows = read_trials_csv(&cfg.output.trials_path()).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().enumerate().all(|(i, r)| r.trial == i as u64));
    let summary = Summary::read(&cfg.output.summary_path()).unwrap();
    assert_eq!(summary, out.summary);
    assert!(summary.invariant_violations.is_empty());
}

#[test]
fn induction_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        r#"{"kind": "induction", "small": 4, "big": 16}"#,
        r#""trials": 10, "seed_base": 11, "energy": 1.0,"#,
    );
    run(&cfg).unwrap();
    let first = std::fs::read(cfg.output.trials_path()).unwrap();
    run(&cfg).unwrap();
    assert_eq!(first, std::fs::read(cfg.output.trials_path()).unwrap());
}

#[test]
fn trial_results_do_not_depend_on_thread_count() {
    let g = build_interval_graph(80).unwrap();
    let ensemble = Ensemble::uniform(4.0);
    let sample = || {
        run_trials(64, 99, |_, seed| {
            let r = Realization::sample(&g, &ensemble, seed);
            r.ball_spectrum(40, 10).unwrap().eigenvalues().to_vec()
        })
    };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(sample);
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(sample);
    assert_eq!(single, many);
}

proptest! {
    #[test]
    fn clopper_pearson_brackets_the_frequency(trials in 1u64..500, frac in 0.0f64..=1.0) {
        let k = (frac * trials as f64).round() as u64;
        let (lo90, hi90) = clopper_pearson(k, trials, 0.90);
        let (lo99, hi99) = clopper_pearson(k, trials, 0.99);
        let p = k as f64 / trials as f64;
        prop_assert!(0.0 <= lo99 && lo99 <= lo90 && lo90 <= p + 1e-12);
        prop_assert!(p - 1e-12 <= hi90 && hi90 <= hi99 && hi99 <= 1.0);
    }

    #[test]
    fn singular_violations_grow_with_the_growth_constant(seed in any::<u64>(), e in -2.0f64..12.0) {
        let g = build_interval_graph(41).unwrap();
        let r = Realization::sample(&g, &Ensemble::uniform(10.0), seed);
        let p = ScaleParams::section2(0.1, 8);
        let ball = Ball::new(20, 12);
        let small = classify_ball_singular(&r, ball, e, &p, 1.0).unwrap();
        let large = classify_ball_singular(&r, ball, e, &p, 3.0).unwrap();
        prop_assert!(large.violations >= small.violations);
        prop_assert!(!small.singular || large.singular);
    }
}
