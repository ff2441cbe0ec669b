use rmf_lab::bounds::{theorem_bound, BoundInputs};
use rmf_lab::distances::{kkw_check, SampleSet};
use rmf_lab::harness::{run_simulate, ExperimentConfig};
use rmf_lab::quadruples::{fourth_moment_exact, fourth_moment_oracle, DEFAULT_BUDGET};
use rmf_lab::rmf::normalized_w;
use rmf_lab::{BoundInputs64, IntervalTable, SampleSet32, SignSource, WStatistic64};

fn quiet(x: u64, y: u64, trials: u64, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(x, y).with_trials(trials).with_seed(seed).with_workers(2);
    c.record_timing = false;
    c
}

#[test]
fn desk_scale_moments_match_exact_counts() {
    let mut config = quiet(1_000_000, 1000, 10_000, 42);
    config.exact_fourth = true;
    let report = run_simulate(&config).unwrap().report;
    let s = report.s_count as f64;
    let m = report.moments;
    assert!((m.m2 - 1.0).abs() <= 4.0 * (2.0f64 / 1e4).sqrt(), "m2 = {}", m.m2);
    let exact4 = report.exact.fourth_moment.unwrap() as f64 / (s * s);
    assert!((m.m4 - exact4).abs() <= 4.0 * m.se[3], "m4 = {} ± {}, exact {exact4}", m.m4, m.se[3]);
    assert!(report.distances.kkw_ratio <= 1.0);
}

#[test]
fn mean_is_small_for_most_seeds() {
    let trials = 400u64;
    let inside = (0..40)
        .filter(|&seed| run_simulate(&quiet(200_000, 400, trials, seed)).unwrap().report.moments.m1.abs() <= 4.0 / (trials as f64).sqrt())
        .count();
    assert!(inside >= 38, "{inside}/40");
}

#[test]
fn counting_routes_agree_on_mid_sized_interval() {
    let table = IntervalTable::segmented_factorize(5000, 480).unwrap();
    let a = fourth_moment_exact(&table, DEFAULT_BUDGET).unwrap();
    let b = fourth_moment_oracle(&table).unwrap();
    assert_eq!(a.total, b.total);
    assert_eq!(a.nondiagonal, 1368);
}

#[test]
fn single_and_double_precision_agree() {
    let table = IntervalTable::segmented_factorize(300_000, 600).unwrap();
    let w: Vec<f64> = (0..500).map(|i| normalized_w::<f64>(&table, &SignSource::for_trial(8, i)).unwrap().w).collect();
    let c64 = kkw_check(&SampleSet::new(w.clone()).unwrap());
    let c32 = kkw_check(&SampleSet32::new(w.iter().map(|&v| v as f32).collect()).unwrap());
    assert!((c64.ks - c32.ks as f64).abs() < 1e-5);
    assert!((c64.w1 - c32.w1 as f64).abs() < 1e-5);

    let first: WStatistic64 = normalized_w(&table, &SignSource::for_trial(8, 0)).unwrap();
    assert_eq!(first.w, w[0]);
    let b: BoundInputs64 = BoundInputs::new(300_000, 600, first.s_count).unwrap();
    assert!(theorem_bound(&b) <= 1.0);
}
