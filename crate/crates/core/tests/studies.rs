use caltol_core::calibration::{CalibrationObjective, Regime};
use caltol_core::distributions::DistributionSpec;
use caltol_core::intervals::Method;
use caltol_core::simharness::{read_csv, run_experiment, run_sensitivity_sweep, write_csv, InfeasiblePolicy, SimConfig, SimRow};

fn base(reps: usize) -> SimConfig {
    let mut cfg = SimConfig::new(
        DistributionSpec::standard_normal(),
        15,
        CalibrationObjective::upper(0.9, 0.9).unwrap(),
        vec![Method::Wilks, Method::CalGibbs],
        reps,
        21,
    );
    cfg.schedule = Regime::Moderate.schedule();
    cfg.infeasible = InfeasiblePolicy::UseExtremes;
    cfg
}

#[test]
fn small_samples_wilks_undercovers_while_calibrated_holds() {
    let results = run_sensitivity_sweep(&base(200), &[15, 20, 25, 30]).unwrap();
    let wilks15 = results[0].method(Method::Wilks).unwrap();
    // With n = 15 the sample maximum covers only with probability 1 - 0.9^15.
    assert!(wilks15.coverage < 0.85, "{}", wilks15.coverage);
    assert!((wilks15.coverage - (1.0 - 0.9f64.powi(15))).abs() < 4.0 * wilks15.stderr);
    for r in &results {
        let g = r.method(Method::CalGibbs).unwrap();
        assert!((0.85..=0.95).contains(&g.coverage), "n = {}: {}", r.n, g.coverage);
        assert_eq!(g.failures, 0);
    }
}

#[test]
fn skip_policy_counts_infeasible_reps_as_failures() {
    let cfg = SimConfig { methods: vec![Method::Wilks], infeasible: InfeasiblePolicy::Skip, ..base(30) };
    let r = run_experiment(&cfg).unwrap();
    let w = r.method(Method::Wilks).unwrap();
    assert_eq!(w.failures, 30);
    // Failed repetitions are left out of the means, so nothing is left to average.
    assert!(w.coverage.is_nan() && w.mean_length.is_nan());
}

#[test]
fn csv_file_round_trip() {
    let results = run_sensitivity_sweep(&SimConfig { methods: vec![Method::Wilks, Method::Ym], ..base(40) }, &[22, 30]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_csv(std::fs::File::create(&path).unwrap(), &results).unwrap();
    let back = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, SimRow::from_results(&results));
    assert_eq!(back.len(), 4);
}

#[test]
fn wilks_feasibility_boundary() {
    let cases = [
        (CalibrationObjective::upper(0.9, 0.9).unwrap(), 22),
        (CalibrationObjective::upper(0.95, 0.9).unwrap(), 45),
        (CalibrationObjective::upper(0.99, 0.9).unwrap(), 230),
        (CalibrationObjective::two_sided_content(0.05, 0.95, None, 0.9).unwrap(), 38),
    ];
    for (obj, min_n) in cases {
        let cfg = SimConfig {
            objective: obj,
            methods: vec![Method::Wilks],
            infeasible: InfeasiblePolicy::Skip,
            ..base(1000)
        };
        let below = run_experiment(&SimConfig { n: min_n - 1, ..cfg.clone() }).unwrap();
        assert_eq!(below.methods[0].failures, 1000);
        let at = run_experiment(&SimConfig { n: min_n, ..cfg }).unwrap();
        let w = &at.methods[0];
        assert_eq!(w.failures, 0);
        assert!(w.coverage >= 0.9 - 2.0 * w.stderr, "n = {min_n}: {} ({})", w.coverage, w.stderr);
    }
}
