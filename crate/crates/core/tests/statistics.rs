mod common;

use itertools::Itertools;

use common::{chi_square_critical, uniform_chi_square};
use permq::randtest::{classical_exhaustive, run_quantum_sim, Dataset, TestConfig};
use permq::rng::StreamFamily;
use permq::sampling::{prepare_register, Backend};
use permq::sim::amplitude_encode;

fn within_3_sigma(freq: f64, p: f64, shots: u64) -> bool {
    (freq - p).abs() <= 3.0 * (p * (1.0 - p) / shots as f64).sqrt()
}

#[test]
fn measurement_frequency_tracks_probability() {
    let state = amplitude_encode(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 3).unwrap();
    let streams = StreamFamily::new(1, "stats/measure");
    let shots = 100_000u64;
    for qubit in 0..3 {
        let p = state.exact_prob_one(qubit).unwrap();
        let ones = (0..shots).filter(|&i| state.measure_z(qubit, &mut streams.rng(i)).unwrap().0).count();
        assert!(within_3_sigma(ones as f64 / shots as f64, p, shots), "qubit {qubit}: {ones} vs {p}");
    }
}

#[test]
fn amplitude_backend_is_uniform_too() {
    let reg = prepare_register(4, None).unwrap();
    let cells: Vec<Vec<usize>> = (0..4).permutations(4).collect();
    let streams = StreamFamily::new(2, "stats/backend");
    for backend in [Backend::Shortcut, Backend::Amplitude] {
        let draws = (0..48_000).map(|i| reg.measure_with(backend, &mut streams.rng(i)).perm.into_vec());
        let (stat, stray) = uniform_chi_square(&cells, draws);
        assert_eq!(stray, 0);
        assert!(stat < chi_square_critical(23, 0.001), "{backend:?}: {stat}");
    }
}

#[test]
fn uniform_data_gives_quarter_everywhere() {
    let data = Dataset::new(vec![3.0; 8]).unwrap();
    let report = run_quantum_sim(&data, &TestConfig::new(2, 300_000, 5)).unwrap();
    assert_eq!(report.n_classes, 28);
    assert!(report.min_class_samples >= 10_000);
    for c in &report.classes {
        assert!(within_3_sigma(c.p_hat, 0.25, c.samples), "{}: {}", c.key, c.p_hat);
    }
}

#[test]
fn shot_estimates_are_consistent() {
    let data = Dataset::new((1..=8).map(f64::from).collect()).unwrap();
    for m in [1, 2] {
        let report = run_quantum_sim(&data, &TestConfig::new(m, 200_000, 9)).unwrap();
        let mut exact_cfg = TestConfig::new(m, 200_000, 9);
        exact_cfg.exact = true;
        let exact = run_quantum_sim(&data, &exact_cfg).unwrap();
        let inside = report
            .classes
            .iter()
            .filter(|c| {
                let p = exact.class(&c.key.0).unwrap().p_hat;
                within_3_sigma(c.p_hat, p, c.samples)
            })
            .count();
        assert!(inside as f64 >= 0.99 * report.n_classes as f64, "m={m}: {inside}/{}", report.n_classes);
    }
}

#[test]
fn exact_mode_matches_classical_statistics() {
    let data = Dataset::new((1..=8).map(f64::from).collect()).unwrap();
    let mut cfg = TestConfig::new(2, 20_000, 3);
    cfg.exact = true;
    let report = run_quantum_sim(&data, &cfg).unwrap();
    let mut quantum: Vec<f64> = report.classes.iter().map(|c| c.statistic).collect();
    let mut classical = classical_exhaustive(&data, 2).unwrap();
    quantum.sort_by(f64::total_cmp);
    classical.sort_by(f64::total_cmp);
    assert_eq!(quantum.len(), classical.len());
    for (q, c) in quantum.iter().zip(&classical) {
        assert!((q - c).abs() < 1e-12);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let data = Dataset::new((1..=8).map(f64::from).collect()).unwrap();
    let cfg = TestConfig::new(2, 20_000, 17);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let threaded = pool.install(|| run_quantum_sim(&data, &cfg).unwrap());
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_quantum_sim(&data, &cfg).unwrap());
    assert_eq!(threaded, single);
}
