mod common;

use std::collections::BTreeMap;

use common::circuit_unitary;
use dicke_vqe::ansatz::{AnsatzSpec, build_cc, build_ccc};
use dicke_vqe::sim::{
    Angle, Circuit, DEVICE_FIDELITIES, Gate, ProbDist, ReadoutNoiseModel, SampleSet, Simulator, StateVector, apply_readout_noise, rng,
    sample, sample_dist, simulate,
};
use dicke_vqe::{Error, bits};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn w_angles(n: usize) -> Vec<f64> {
    // Each block keeps 1/(n − i) of the remaining weight on its upper wire.
    (0..n - 1).map(|i| 2.0 * (1.0 / (n - i) as f64).sqrt().acos()).collect()
}

fn dense_state(c: &Circuit, theta: &[f64]) -> Vec<C> {
    let dim = 1usize << c.n_qubits();
    let mut e0 = vec![C::new(0.0, 0.0); dim];
    e0[0] = C::new(1.0, 0.0);
    circuit_unitary(c, theta).apply(&e0)
}

fn max_gap(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn chi_square(counts: &BTreeMap<u64, u64>, dist: &ProbDist<f64>, shots: u64) -> f64 {
    dist.iter()
        .filter(|e| e.1 > 0.0)
        .map(|(x, p)| {
            let expected = p * shots as f64;
            let seen = counts.get(&x).copied().unwrap_or(0) as f64;
            (seen - expected).powi(2) / expected
        })
        .sum()
}

#[test]
fn w_state_from_single_x_staircase() {
    let c = build_cc(&AnsatzSpec::cc(5, 1)).unwrap();
    let p = simulate::<f64>(&c, &w_angles(5)).unwrap().probabilities();
    for (x, px) in p.iter().enumerate() {
        let want = if bits::weight(x as u64) == 1 { 0.2 } else { 0.0 };
        assert!((px - want).abs() < 1e-12, "{}: {px}", bits::to_string(x as u64, 5));
    }
}

#[test]
fn empty_circuit_keeps_ground_state() {
    let s = simulate::<f64>(&Circuit::new(3), &[]).unwrap();
    assert_eq!(s.amplitudes()[0], C::new(1.0, 0.0));
    assert_eq!(ProbDist::from_state(&s).get(0), 1.0);
    assert_eq!(s.probabilities().iter().sum::<f64>(), 1.0);
}

#[test]
fn d42_matches_matrix_chain() {
    let c = build_ccc(&AnsatzSpec::ccc(4, 2)).unwrap();
    let theta = [0.3, 0.9, 1.4];
    let s = simulate::<f64>(&c, &theta).unwrap();
    let want = dense_state(&c, &theta);
    assert!(max_gap(s.amplitudes(), &want) < 1e-12);
    let p = ProbDist::from_state(&s);
    for (x, a) in want.iter().enumerate() {
        assert!((p.get(x as u64) - a.norm_sqr()).abs() < 1e-12);
    }
    assert!((p.total() - 1.0).abs() < 1e-12);
}

#[test]
fn bit_order_puts_qubit_zero_first() {
    let mut c = Circuit::new(3);
    c.push(Gate::X(0)).unwrap();
    let p = ProbDist::from_state(&simulate::<f64>(&c, &[]).unwrap());
    assert_eq!(p.get(0b100), 1.0);
    assert_eq!(bits::to_string(0b100, 3), "100");
}

#[test]
fn single_precision_tracks_double() {
    let c = build_ccc(&AnsatzSpec::ccc(6, 3)).unwrap();
    let theta: Vec<f64> = (0..c.param_count()).map(|j| 0.4 + 0.3 * j as f64).collect();
    let t32: Vec<f32> = theta.iter().map(|&t| t as f32).collect();
    let a = simulate::<f64>(&c, &theta).unwrap().probabilities();
    let b = simulate::<f32>(&c, &t32).unwrap().probabilities();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - *y as f64).abs() < 1e-5);
    }
}

#[test]
fn simulate_checks_width_and_parameters() {
    let c = build_ccc(&AnsatzSpec::ccc(4, 2)).unwrap();
    assert!(matches!(simulate::<f64>(&c, &[0.1]), Err(Error::ParamLength { expected: 3, got: 1 })));
    let wide = Circuit::new(8);
    assert!(matches!(Simulator { max_qubits: 6 }.run::<f64>(&wide, &[]), Err(Error::WidthOverflow { .. })));
    assert!(Simulator { max_qubits: 6 }.run_from::<f64>(&Circuit::new(3), &[], StateVector::zero(2)).is_err());
}

#[test]
fn deterministic_state_samples_one_string() {
    let s = StateVector::<f64>::basis(3, 0b101);
    let set = sample(&s, 10, 4).unwrap();
    assert_eq!(set.counts().clone(), BTreeMap::from([(0b101, 10)]));
    assert_eq!(set.total_shots(), 10);
    assert_eq!(set.draws(), &[0b101; 10]);
}

#[test]
fn w_state_frequencies_converge() {
    let c = build_cc(&AnsatzSpec::cc(5, 1)).unwrap();
    let s = simulate::<f64>(&c, &w_angles(5)).unwrap();
    let shots = 1_000_000;
    let set = sample(&s, shots, 77).unwrap();
    for q in 0..5 {
        let f = set.counts().get(&bits::mask(5, q)).copied().unwrap_or(0) as f64 / shots as f64;
        assert!((f - 0.2).abs() < 0.005, "qubit {q}: {f}");
    }
    // 99% quantile of χ² with 4 degrees of freedom.
    assert!(chi_square(set.counts(), &ProbDist::from_state(&s), shots as u64) < 13.277);
    assert_eq!(set, sample(&s, shots, 77).unwrap());
    assert_ne!(set.draws(), sample(&s, shots, 78).unwrap().draws());
}

#[test]
fn d42_samples_pass_chi_square() {
    let c = build_ccc(&AnsatzSpec::ccc(4, 2)).unwrap();
    let s = simulate::<f64>(&c, &[1.1, 2.0, 0.7]).unwrap();
    let dist = ProbDist::from_state(&s);
    let shots = 1_000_000u64;
    let set = sample_dist(&dist, shots as usize, &mut rng::seeded(5)).unwrap();
    assert_eq!(dist.support(1e-12).len(), 6);
    // 99% quantile of χ² with 5 degrees of freedom.
    assert!(chi_square(set.counts(), &dist, shots) < 15.086);
}

#[test]
fn sample_sets_pool_and_count() {
    let a = SampleSet::from_draws(2, vec![1, 2, 2]);
    let b = SampleSet::from_counts(2, BTreeMap::from([(3, 2)]));
    let p = SampleSet::pooled([&a, &b]).unwrap();
    assert_eq!(p.total_shots(), 5);
    assert_eq!(p.counts().clone(), BTreeMap::from([(1, 1), (2, 2), (3, 2)]));
    let d = p.to_dist::<f64>();
    assert!((d.get(2) - 0.4).abs() < 1e-15);
    assert!(SampleSet::pooled([&a, &SampleSet::from_draws(3, vec![0])]).is_err());
}

#[test]
fn perfect_readout_is_identity() {
    let set = SampleSet::from_draws(4, (0..200).map(|i| (i * 7) % 16).collect());
    let out = apply_readout_noise(&set, &ReadoutNoiseModel::noiseless(4), 9).unwrap();
    assert_eq!(out, set);
}

#[test]
fn single_qubit_flip_rate() {
    let (_, f00, _) = DEVICE_FIDELITIES[0];
    assert_eq!(f00, 0.973);
    let shots = 200_000usize;
    let set = SampleSet::from_draws(1, vec![0; shots]);
    let noise = ReadoutNoiseModel::new(vec![f00], vec![1.0]).unwrap();
    let out = apply_readout_noise(&set, &noise, 12).unwrap();
    let ones = out.counts().get(&1).copied().unwrap_or(0) as f64 / shots as f64;
    let p = 1.0 - f00;
    let sigma = (p * (1.0 - p) / shots as f64).sqrt();
    assert!((ones - p).abs() < 5.0 * sigma, "{ones}");
    assert_eq!(out.draws().len(), shots);
}

#[test]
fn symmetric_half_flips_give_uniform_marginals() {
    let shots = 100_000usize;
    let set = SampleSet::from_draws(3, vec![0b110; shots]);
    let noise = ReadoutNoiseModel::uniform(3, 0.5, 0.5).unwrap();
    let out = apply_readout_noise(&set, &noise, 3).unwrap();
    let sigma = (0.25 / shots as f64).sqrt();
    for q in 0..3 {
        let ones = out.draws().iter().filter(|&&x| bits::bit(x, 3, q)).count() as f64 / shots as f64;
        assert!((ones - 0.5).abs() < 5.0 * sigma, "qubit {q}: {ones}");
    }
}

#[test]
fn noise_model_is_validated() {
    assert!(ReadoutNoiseModel::new(vec![0.9, 1.2], vec![0.9, 0.9]).is_err());
    assert!(ReadoutNoiseModel::new(vec![0.0], vec![0.9]).is_err());
    assert!(ReadoutNoiseModel::new(vec![0.9], vec![0.9, 0.9]).is_err());
    let set = SampleSet::from_draws(2, vec![0]);
    assert!(matches!(apply_readout_noise(&set, &ReadoutNoiseModel::noiseless(3), 0), Err(Error::WidthMismatch { .. })));
    let device = ReadoutNoiseModel::device(8);
    assert_eq!(device.f11[7], DEVICE_FIDELITIES[1].2);
    assert_eq!(device.slice(2, 3).unwrap().f00, vec![0.970, 0.972, 0.917]);
}

fn gate_strategy(n: usize, slots: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let pair = (0..n, 1..n.max(2)).prop_map(move |(a, d)| (a, (a + d) % n));
    let angle = prop_oneof![(0..slots).prop_map(Angle::slot), (-4.0f64..4.0).prop_map(Angle::Fixed)];
    prop_oneof![
        q.clone().prop_map(Gate::X),
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::S),
        q.clone().prop_map(Gate::Sdg),
        (q, angle.clone()).prop_map(|(q, a)| Gate::Ry(q, a)),
        pair.clone().prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Gate::cnot(a, b)),
        (pair, angle).prop_filter("distinct", |((a, b), _)| a != b).prop_map(|((a, b), t)| Gate::cry(a, b, t)),
    ]
}

fn circuit_strategy(real_only: bool) -> impl Strategy<Value = (Circuit, Vec<f64>)> {
    (2usize..=6).prop_flat_map(move |n| {
        let gates = prop::collection::vec(gate_strategy(n, 3), 0..30);
        let theta = prop::collection::vec(-6.3f64..6.3, 3);
        (gates, theta).prop_map(move |(gates, theta)| {
            let mut c = Circuit::new(n);
            for g in gates {
                if real_only && matches!(g, Gate::H(_) | Gate::S(_) | Gate::Sdg(_)) {
                    continue;
                }
                c.push(g).unwrap();
            }
            let theta = theta[..c.param_count()].to_vec();
            (c, theta)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn matches_dense_matrix_chain((c, theta) in circuit_strategy(false)) {
        let s = simulate::<f64>(&c, &theta).unwrap();
        prop_assert!(max_gap(s.amplitudes(), &dense_state(&c, &theta)) < 1e-10);
    }

    #[test]
    fn every_gate_preserves_the_norm((c, theta) in circuit_strategy(false)) {
        let mut s = StateVector::<f64>::zero(c.n_qubits());
        for g in c.gates() {
            let before = s.norm_sqr();
            s.apply(g, &theta);
            prop_assert!((s.norm_sqr() - before).abs() < 1e-12);
        }
    }

    #[test]
    fn real_gates_keep_amplitudes_real((c, theta) in circuit_strategy(true)) {
        let s = simulate::<f64>(&c, &theta).unwrap();
        prop_assert!(s.amplitudes().iter().all(|a| a.im.abs() < 1e-12));
    }

    #[test]
    fn circuit_text_round_trips((c, _) in circuit_strategy(false)) {
        prop_assume!(c.validate().is_ok());
        let text = c.to_text();
        let back = Circuit::from_text(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), shots in 1usize..500) {
        let c = build_ccc(&AnsatzSpec::ccc(5, 2)).unwrap();
        let s = simulate::<f64>(&c, &[0.3, 1.0, 1.7, 2.4, 3.1]).unwrap();
        let a = sample(&s, shots, seed).unwrap();
        prop_assert_eq!(&a, &sample(&s, shots, seed).unwrap());
        prop_assert_eq!(a.total_shots(), shots as u64);
        prop_assert!(a.draws().iter().all(|&x| bits::weight(x) == 2));
    }
}
