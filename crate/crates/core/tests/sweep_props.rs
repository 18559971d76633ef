use hadamard_audit::funcs::{Family, Interval};
use hadamard_audit::ineq::{Theorem, Tolerances, Verdict};
use hadamard_audit::output::to_json_value;
use hadamard_audit::sweep::{run_sweep, sharpness_probe, ConfigError, SweepConfig, SweepSummary, DEFAULT_SWEEP_TOL};
use proptest::prelude::*;

fn config(theorems: &[Theorem], families: &[Family], trials: u64, seed: u64) -> SweepConfig {
    SweepConfig { theorems: theorems.to_vec(), families: families.to_vec(), trials, seed, ..SweepConfig::default() }
}

fn on_threads(threads: usize, cfg: &SweepConfig) -> SweepSummary {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_sweep(cfg)).unwrap()
}

fn without_time(s: &SweepSummary) -> serde_json::Value {
    let mut v = to_json_value(s);
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = config(&[Theorem::Hadamard, Theorem::Thm21, Theorem::Thm22, Theorem::Thm23], &Family::GENERATED, 24, 11);
    let one = on_threads(1, &cfg);
    let two = on_threads(2, &cfg);
    assert_eq!(without_time(&one), without_time(&two));
    assert_eq!(without_time(&one), without_time(&on_threads(1, &cfg)));
}

#[test]
fn reproducers_replay_exactly() {
    let cfg = config(&[Theorem::Thm21, Theorem::Thm24], &Family::GENERATED, 40, 3);
    let s = run_sweep(&cfg).unwrap();
    let tol = cfg.tolerances();
    for t in &s.theorems {
        let m = t.min_slack.as_ref().expect("some trial was judged");
        let r = m.replay(t.theorem, &tol).unwrap();
        assert_eq!(r.slack.to_bits(), m.slack.to_bits());
        assert_eq!(r.verdict, m.verdict);
        assert_eq!(r.function, m.function);
        for v in &t.violations {
            assert_eq!(v.replay(t.theorem, &tol).unwrap().verdict, Verdict::Violated);
        }
    }
}

#[test]
fn sound_statements_survive_a_sweep() {
    let cfg = config(&[Theorem::Hadamard, Theorem::Thm21, Theorem::Thm22, Theorem::Thm23], &Family::GENERATED, 100, 1);
    let s = run_sweep(&cfg).unwrap();
    assert_eq!(s.total_violated(), 0);
    assert_eq!(s.total_inconclusive(), 0);
    for t in &s.theorems {
        assert_eq!(t.trials, 100);
        assert_eq!(t.holds + t.equality + t.skipped_precondition, 100);
        assert!(t.min_slack.as_ref().unwrap().slack >= -1e-7);
    }
}

#[test]
fn midpoint_chord_statement_fails_on_power_functions() {
    let s = run_sweep(&config(&[Theorem::Thm24], &[Family::Power], 60, 7)).unwrap();
    let t = s.theorem(Theorem::Thm24).unwrap();
    assert!(t.violated >= 1);
    assert!(!t.violations.is_empty());
    assert!(t.violations.iter().all(|r| r.family == Family::Power && r.slack < 0.0));
}

#[test]
fn invalid_configurations_are_rejected() {
    let bad = config(&[Theorem::Thm21], &Family::GENERATED, 0, 1);
    assert_eq!(run_sweep(&bad).unwrap_err(), ConfigError::NoTrials);
    let bad = SweepConfig { tol: 0.0, ..SweepConfig::default() };
    assert_eq!(run_sweep(&bad).unwrap_err(), ConfigError::Tolerance(0.0));
    let parsed: Result<SweepConfig, _> = serde_json::from_str(r#"{"trials": 5, "colour": "red"}"#);
    assert!(parsed.is_err());
    let parsed: SweepConfig = serde_json::from_str(r#"{"trials": 5, "theorems": ["thm-2.4"]}"#).unwrap();
    assert_eq!(parsed.trials, 5);
    assert_eq!(parsed.theorems, [Theorem::Thm24]);
    assert_eq!(parsed.tol, DEFAULT_SWEEP_TOL);
    assert_eq!(parsed.families, Family::GENERATED);
}

#[test]
fn sharpness_examples() {
    let unit = Interval::unit();
    let tol = Tolerances::with_quad(DEFAULT_SWEEP_TOL);
    let r = sharpness_probe(Theorem::Thm21, Family::Power, unit, 1, 200, &tol).unwrap();
    assert!(r.best_slack <= 1e-6, "{}", r.best_slack);
    assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));

    let r = sharpness_probe(Theorem::Thm23, Family::Quadratic, unit, 1, 100, &tol).unwrap();
    assert!(r.best_slack.is_finite());
    assert!(r.best_slack >= -1e-8, "{}", r.best_slack);
    let again = sharpness_probe(Theorem::Thm23, Family::Quadratic, unit, 1, 100, &tol).unwrap();
    assert_eq!(to_json_value(&r), to_json_value(&again));

    assert!(matches!(
        sharpness_probe(Theorem::Thm21, Family::User, unit, 1, 10, &tol),
        Err(ConfigError::NotGenerated(Family::User))
    ));
    assert!(matches!(
        sharpness_probe(Theorem::Prop31, Family::Power, unit, 1, 10, &tol),
        Err(ConfigError::NotAnEvaluator(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn counts_partition_trials_and_repeat(seed in any::<u64>(), trials in 1u64..12, fam in 0usize..5) {
        let cfg = config(&[Theorem::Hadamard, Theorem::Thm21, Theorem::Thm22], &Family::GENERATED[fam..], trials, seed);
        let a = run_sweep(&cfg).unwrap();
        for t in &a.theorems {
            prop_assert_eq!(t.holds + t.equality + t.violated + t.inconclusive + t.skipped_precondition, trials);
            prop_assert_eq!(t.violated, 0);
        }
        prop_assert_eq!(without_time(&a), without_time(&run_sweep(&cfg).unwrap()));
    }
}
