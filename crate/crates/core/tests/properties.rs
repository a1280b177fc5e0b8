// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use qclspin::circuit::{decompose_check_r, gate_counts, gate_counts_with, run_ideal, run_noisy};
use qclspin::gates::{check_r_matrix, rotation_matrix};
use qclspin::linalg::{self, embed_operator};
use qclspin::qcl::dataset::encoded_state;
use qclspin::qcl::persist::{model_from_json, model_to_json};
use qclspin::qcl::{
    self, gen_dataset, input_encoding, nelder_mead, Executor, LossWeights, NelderMeadOptions, TrainingObservable,
    TrainingOptions,
};
use qclspin::{
    Accounting, AnsatzConfig, Axis, ChannelKind, Circuit, Dataset, ExperimentConfig, GateOp, ModelSpec, NoiseSpec,
    StateVector,
};

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn op(n: usize) -> impl Strategy<Value = GateOp<f64>> {
    let rot = (axis(), 0..n, -6.0..6.0f64).prop_map(|(a, q, t)| GateOp::rotation(a, q, t));
    let pair = (0..n, 1..n).prop_map(move |(i, k)| (i, (i + k) % n));
    let cnot = pair.clone().prop_map(|(i, j)| GateOp::cnot(i, j).unwrap());
    let r = (pair, -3.0..3.0f64).prop_map(|((i, j), u)| GateOp::check_r(i, j, u).unwrap());
    prop_oneof![rot, cnot, r]
}

fn circuit(n: usize, max: usize) -> impl Strategy<Value = Circuit<f64>> {
    prop::collection::vec(op(n), 0..max).prop_map(move |ops| {
        let mut c = Circuit::new(n);
        for o in ops {
            c.push(o).unwrap();
        }
        c
    })
}

fn channel() -> impl Strategy<Value = ChannelKind> {
    prop::sample::select(ChannelKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embedding_is_multiplicative(a in axis(), b in axis(), s in -3.0..3.0f64, t in -3.0..3.0f64,
                                   u in -3.0..3.0f64, q in 0..3usize, k in 1..3usize) {
        let j = (q + k) % 3;
        let ra = rotation_matrix::<f64>(a, s);
        let rb = rotation_matrix::<f64>(b, t);
        let lhs = embed_operator(&ra.dot(&rb), &[q], 3).unwrap();
        let rhs = embed_operator(&ra, &[q], 3).unwrap().dot(&embed_operator(&rb, &[q], 3).unwrap());
        prop_assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);

        let r = check_r_matrix::<f64>(u);
        let lhs = embed_operator(&r.dot(&r), &[q, j], 3).unwrap();
        let e = embed_operator(&r, &[q, j], 3).unwrap();
        prop_assert!(linalg::max_abs_diff(&lhs, &e.dot(&e)) < 1e-12);
    }

    #[test]
    fn check_r_is_unitary_and_template_matches(u in -50.0..50.0f64, q in 0..3usize, k in 1..3usize) {
        let j = (q + k) % 3;
        prop_assert!(linalg::unitarity_error(&check_r_matrix::<f64>(u)) < 1e-12);
        let mut dense = Circuit::new(3);
        dense.push(GateOp::check_r(q, j, u).unwrap()).unwrap();
        let template = decompose_check_r(u, q, j, 3).unwrap();
        prop_assert!(linalg::phase_distance(&template.unitary(), &dense.unitary()) < 1e-9);
    }

    #[test]
    fn noiseless_density_path_matches_state_vector(c in circuit(3, 41), kind in channel()) {
        let psi = run_ideal(&c, &StateVector::zero(3)).unwrap();
        let mut noise = NoiseSpec::new(kind, 0.0);
        noise.exempt_encoding = false;
        let rho = run_noisy(&c, &StateVector::zero(3).to_density(), &noise, true).unwrap();
        prop_assert!(linalg::max_abs_diff(rho.entries(), psi.to_density().entries()) < 1e-10);
    }

    #[test]
    fn noisy_runs_stay_physical(c in circuit(2, 10), kind in channel(),
                                p in prop::sample::select(vec![0.005, 0.01, 0.1])) {
        let rho = run_noisy(&c, &StateVector::zero(2).to_density(), &NoiseSpec::new(kind, p), true).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(linalg::hermiticity_error(rho.entries()) < 1e-12);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn gate_counts_add_over_concatenation(a in circuit(3, 10), b in circuit(3, 10)) {
        let joined = a.clone().then(&b).unwrap();
        for mode in [Accounting::Template, Accounting::PaperTally] {
            let sum = gate_counts_with(&a, mode).unwrap() + gate_counts_with(&b, mode).unwrap();
            prop_assert_eq!(gate_counts_with(&joined, mode).unwrap(), sum);
        }
        prop_assert_eq!(gate_counts_with(&joined, Accounting::Template).unwrap(),
                        gate_counts(&joined.decomposed().unwrap()).unwrap());
    }

    #[test]
    fn encoding_accepts_exactly_the_unit_interval(x in -2.0..2.0f64) {
        prop_assert_eq!(input_encoding(x, 2).is_ok(), x.abs() <= 1.0);
    }

    #[test]
    fn encoded_states_are_normalized(x in -1.0..=1.0f64, n in 2..5usize) {
        prop_assert!((encoded_state(x, n).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_best_value_never_increases(c in prop::collection::vec(-2.0..2.0f64, 3), scale in 0.1..5.0f64) {
        let f = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| scale * (a - b).powi(2)).sum::<f64>() + (x[0] * x[1]).sin();
        let opts = NelderMeadOptions { max_iterations: 300, ..Default::default() };
        let r = nelder_mead(f, &[0.0; 3], &opts).unwrap();
        prop_assert!(r.best_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(r.value <= r.best_history[0]);
    }

    #[test]
    fn conserved_targets_equal_initial_expectations(d in 1..8usize, delta in 0.01..0.2f64) {
        let spec = ModelSpec::new(2, delta).unwrap();
        let ds = gen_dataset(&spec, d, 9).unwrap();
        for o in TrainingObservable::ALL.into_iter().filter(|o| o.is_conserved()) {
            let op = o.operator(&spec).unwrap();
            for (i, &x) in ds.xs.iter().enumerate() {
                let before = encoded_state(x, 2).unwrap().expectation(&op).unwrap();
                prop_assert!((ds.target(o)[i] - before).abs() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn loss_unchanged_by_appending_an_identity_layer(theta in prop::collection::vec(-3.0..3.0f64, 6),
                                                     a in 0.5..1.5f64) {
        let spec = ModelSpec::new(2, 0.05).unwrap();
        let ds = gen_dataset(&spec, 3, 7).unwrap();
        let one = AnsatzConfig::new(2, 1, vec![0.4], 0.0, 0).unwrap();
        let two = one.with_layers(2).unwrap();
        let mut padded = theta.clone();
        padded.extend([0.0; 6]);
        let w = LossWeights::default();
        let l1 = qcl::loss(&theta, a, &ds, &one, &w, &Executor::Ideal).unwrap();
        let l2 = qcl::loss(&padded, a, &ds, &two, &w, &Executor::Ideal).unwrap();
        prop_assert!((l1 - l2).abs() < 1e-12);
    }

    #[test]
    fn loss_bounds_every_weighted_residual(theta in prop::collection::vec(-3.0..3.0f64, 6), a in 0.5..1.5f64) {
        let spec = ModelSpec::new(2, 0.05).unwrap();
        let ds = gen_dataset(&spec, 3, 5).unwrap();
        let cfg = AnsatzConfig::random(2, 1, 3).unwrap();
        let w = LossWeights::default();
        let total = qcl::loss(&theta, a, &ds, &cfg, &w, &Executor::Ideal).unwrap();
        let c = qcl::loss::model_circuit(&cfg, &theta, ds.xs[2]).unwrap();
        for (k, o) in TrainingObservable::ALL.into_iter().enumerate() {
            let pred = a * Executor::Ideal.expectation(&c, &o.operator(&spec).unwrap()).unwrap();
            // the loss is a grid mean, so one point contributes at most len() * loss
            prop_assert!(w.0[k] * (pred - ds.target(o)[2]).powi(2) <= ds.len() as f64 * total + 1e-12);
        }
    }

    #[test]
    fn dataset_csv_round_trips(d in 1..6usize, delta in 0.01..0.2f64, m in 2..20usize) {
        let ds = gen_dataset(&ModelSpec::new(2, delta).unwrap(), d, m).unwrap();
        let back: Dataset<f64> = Dataset::from_csv(&ds.to_csv()).unwrap();
        prop_assert_eq!(back.steps, ds.steps);
        prop_assert_eq!(back.hash(), ds.hash());
        for o in TrainingObservable::ALL {
            for (u, v) in back.target(o).iter().zip(ds.target(o)) {
                prop_assert!((u - v).abs() <= 1e-10 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn config_toml_round_trips(length in prop::sample::select(vec![2usize, 3, 4]), seed in any::<u32>(),
                               d in 1..20usize, shots in 0..5000u64) {
        let cfg = ExperimentConfig { length, seed: seed as u64, steps: vec![d], shots, ..Default::default() };
        prop_assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}

#[test]
fn model_json_round_trips_exactly() {
    let spec = ModelSpec::new(2, 0.05).unwrap();
    let ds = gen_dataset(&spec, 2, 6).unwrap();
    let cfg = AnsatzConfig::random(2, 1, 5).unwrap();
    let opts = TrainingOptions {
        restarts: 2,
        optimizer: NelderMeadOptions {
            max_iterations: 200,
            ..Default::default()
        },
        ..Default::default()
    };
    let m = qcl::train(&cfg, &ds, &opts).unwrap();
    let back = model_from_json::<f64>(&model_to_json(&m).unwrap()).unwrap();
    assert_eq!(back, m);
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let ds = gen_dataset(&ModelSpec::new(3, 0.04).unwrap(), 2, 5).unwrap();
    let path = dir.path().join("ds.csv");
    ds.save(&path).unwrap();
    assert_eq!(Dataset::<f64>::load(&path).unwrap().hash(), ds.hash());

    let cfg = AnsatzConfig::random(3, 1, 9).unwrap();
    let opts = TrainingOptions {
        restarts: 1,
        optimizer: NelderMeadOptions {
            max_iterations: 50,
            ..Default::default()
        },
        ..Default::default()
    };
    let m = qcl::train(&cfg, &ds, &opts).unwrap();
    let path = dir.path().join("m.json");
    qcl::save_model(&m, &path).unwrap();
    assert_eq!(qcl::load_model::<f64>(&path).unwrap(), m);
    assert!(qcl::load_model::<f64>(&dir.path().join("missing.json")).is_err());
}
