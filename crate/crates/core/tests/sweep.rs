mod common;

use smoothrank::evaluation::{epsilon_sweep, significance_report, SweepSpec, RESULTS_HEADER, SWEEP_HEADER};
use smoothrank::retrieval::NegativeSampling;
use smoothrank::smoothing::Method;
use smoothrank::trainer::TrainConfig;
use smoothrank::Execution;

fn spec(epsilons: Vec<f64>, seeds: Vec<u64>) -> SweepSpec {
    SweepSpec {
        base: TrainConfig {
            total_instances: 320,
            n: 5,
            hidden: 8,
            ..Default::default()
        },
        methods: vec![Method::TwoStageLs, Method::TwoStageWsls],
        epsilons,
        seeds,
        switch_at: None,
        k: 1,
    }
}

#[test]
fn counts_and_zero_epsilon_identity() {
    let e = common::experiment(5, NegativeSampling::Bm25);
    let s = spec(vec![0.0, 0.3], vec![1, 2, 3, 4, 5]);
    let out = epsilon_sweep(&s, &e.train, &e.test, Execution::default()).unwrap();
    // 2 methods x 2 epsilons x 5 seeds, plus 5 baseline runs.
    assert_eq!(out.cells.len(), 25);
    assert_eq!(out.rows.len(), 5);
    assert!(out.rows.iter().all(|r| r.aggregate.runs == 5));

    let baseline: Vec<_> = out.cells.iter().filter(|c| c.method == Method::Hard).collect();
    for m in [Method::TwoStageLs, Method::TwoStageWsls] {
        let zero: Vec<_> = out.cells.iter().filter(|c| c.method == m && c.epsilon == 0.0).collect();
        assert_eq!(zero.len(), 5);
        for (z, b) in zero.iter().zip(&baseline) {
            assert_eq!(z.seed, b.seed);
            assert_eq!(z.fingerprint, b.fingerprint, "{m} seed {}", z.seed);
            assert_eq!(z.result.value.to_bits(), b.result.value.to_bits());
        }
    }

    let sweep = out.sweep_csv();
    assert!(sweep.starts_with(SWEEP_HEADER));
    assert_eq!(sweep.lines().count(), 6);
    let results = out.results_csv();
    assert!(results.starts_with(RESULTS_HEADER));
    assert_eq!(results.lines().count(), 26);
    assert!(results.lines().nth(1).unwrap().starts_with("hard@0,hard,0,1,R5@1,"));

    let report = significance_report(&out, 0.05, 2).unwrap();
    assert_eq!(report.lines().count(), 2 + 5);
}

#[test]
fn sequential_and_parallel_agree() {
    let e = common::experiment(4, NegativeSampling::Random);
    let s = spec(vec![0.2], vec![3, 4]);
    let a = epsilon_sweep(&s, &e.train, &e.test, Execution::Sequential).unwrap();
    let b = epsilon_sweep(&s, &e.train, &e.test, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let c = Execution::with_threads(2, |exec| epsilon_sweep(&s, &e.train, &e.test, exec)).unwrap();
    assert_eq!(a, c);
}

#[test]
fn rejects_bad_grids() {
    let e = common::experiment(4, NegativeSampling::Random);
    assert!(epsilon_sweep(&spec(vec![0.2], vec![1]), &e.train, &e.test, Execution::Sequential).is_err());
    assert!(epsilon_sweep(&spec(vec![1.5], vec![1, 2]), &e.train, &e.test, Execution::Sequential).is_err());
    let mut s = spec(vec![0.2], vec![1, 2]);
    s.methods.push(Method::Hard);
    assert!(epsilon_sweep(&s, &e.train, &e.test, Execution::Sequential).is_err());
}
