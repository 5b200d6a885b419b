use semipar::verify::{report_json, run_suite, Suite, SuiteParams};

fn json_with_threads(suite: Suite, params: &SuiteParams, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| report_json(&run_suite(suite, params).unwrap()).unwrap())
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cases = [
        (Suite::PointIdentities, SuiteParams::new(3).with_seed(5).with_trials(12)),
        (Suite::ResidualOracle, SuiteParams::new(3).with_seed(5).with_trials(8)),
        (Suite::ModelAScan, SuiteParams::new(3).with_grid(0.1, 1.0, 9)),
    ];
    for (suite, params) in cases {
        let one = json_with_threads(suite, &params, 1);
        let four = json_with_threads(suite, &params, 4);
        assert_eq!(one, four, "{suite}");
    }
}

#[test]
fn seeds_change_random_suites() {
    let a = run_suite(Suite::PointIdentities, &SuiteParams::new(3).with_seed(1).with_trials(5)).unwrap();
    let b = run_suite(Suite::PointIdentities, &SuiteParams::new(3).with_seed(2).with_trials(5)).unwrap();
    assert_ne!(report_json(&a).unwrap(), report_json(&b).unwrap());
}
