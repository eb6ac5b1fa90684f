use dicke_vqe::ansatz::{AnsatzSpec, build_ccc};
use dicke_vqe::mitigation::{MAX_MITIGATION_QUBITS, apply_channel, build_matrix, build_matrix_weights, restrict};
use dicke_vqe::sim::{DEVICE_FIDELITIES, ProbDist, ReadoutNoiseModel, apply_readout_noise, rng, sample_dist, simulate};
use dicke_vqe::{Error, bits};
use proptest::prelude::*;
use rand::Rng;

/// Kronecker product of per-qubit 2×2 channels, qubit 0 outermost.
fn kron_channel(noise: &ReadoutNoiseModel) -> Vec<Vec<f64>> {
    let mut m = vec![vec![1.0]];
    for q in 0..noise.width() {
        let (f00, f11) = (noise.f00[q], noise.f11[q]);
        let c = [[f00, 1.0 - f11], [1.0 - f00, f11]];
        let d = m.len();
        let mut next = vec![vec![0.0; 2 * d]; 2 * d];
        for i in 0..d {
            for j in 0..d {
                for a in 0..2 {
                    for b in 0..2 {
                        next[2 * i + a][2 * j + b] = m[i][j] * c[a][b];
                    }
                }
            }
        }
        m = next;
    }
    m
}

fn random_weight_dist(m: usize, w: usize, seed: u64) -> ProbDist<f64> {
    let mut r = rng::seeded(seed);
    let mut d = ProbDist::new(m);
    for x in 0..1u64 << m {
        if bits::weight(x) == w {
            d.add(x, r.random_range(0.01..1.0));
        }
    }
    d.normalized().unwrap()
}

#[test]
fn noiseless_matrix_is_the_identity() {
    for (m, w) in [(1, 0), (3, 1), (4, 2), (6, 3)] {
        let a = build_matrix::<f64>(&ReadoutNoiseModel::noiseless(m), m, w).unwrap();
        let dense = a.to_dense();
        let d = 1 << m;
        for i in 0..d {
            for j in 0..d {
                assert_eq!(dense[i * d + j], if i == j { 1.0 } else { 0.0 });
            }
        }
    }
}

#[test]
fn single_qubit_columns() {
    let noise = ReadoutNoiseModel::new(vec![0.9], vec![0.8]).unwrap();
    let a = build_matrix::<f64>(&noise, 1, 1).unwrap();
    assert!((a.get(0, 1) - 0.2).abs() < 1e-15);
    assert!((a.get(1, 1) - 0.8).abs() < 1e-15);
    assert_eq!((a.get(0, 0), a.get(1, 0)), (1.0, 0.0));
    assert_eq!(a.weights(), [1]);
    assert_eq!(a.qubits(), 1);
}

#[test]
fn weight_one_columns_are_kronecker_products() {
    // Q45, Q46, Q52.
    let noise = ReadoutNoiseModel::device(3);
    assert_eq!(DEVICE_FIDELITIES[..3].iter().map(|r| r.0).collect::<Vec<_>>(), ["Q45", "Q46", "Q52"]);
    let a = build_matrix::<f64>(&noise, 3, 1).unwrap();
    let k = kron_channel(&noise);
    for j in 0..8u64 {
        for i in 0..8u64 {
            let want = if bits::weight(j) == 1 {
                k[i as usize][j as usize]
            } else if i == j {
                1.0
            } else {
                0.0
            };
            assert!((a.get(i, j) - want).abs() < 1e-15, "({i}, {j})");
        }
        if bits::weight(j) == 1 {
            let col: f64 = (0..8).map(|i| a.get(i, j)).sum();
            assert!((col - 1.0).abs() < 1e-14);
        }
    }
    // Column 010 by hand: qubit 1 is 1, the others 0.
    let (f, g) = (&noise.f00, &noise.f11);
    assert!((a.get(0b010, 0b010) - f[0] * g[1] * f[2]).abs() < 1e-15);
    assert!((a.get(0b111, 0b010) - (1.0 - f[0]) * g[1] * (1.0 - f[2])).abs() < 1e-15);
}

#[test]
fn channel_matches_the_kronecker_matrix() {
    let noise = ReadoutNoiseModel::device(4);
    let p = random_weight_dist(4, 2, 9);
    let out = apply_channel(&noise, &p).unwrap();
    let k = kron_channel(&noise);
    let dense = p.to_dense();
    for i in 0..16 {
        let want: f64 = (0..16).map(|j| k[i][j] * dense[j]).sum();
        assert!((out.get(i as u64) - want).abs() < 1e-15);
    }
}

#[test]
fn noiseless_mitigation_only_restricts() {
    let a = build_matrix::<f64>(&ReadoutNoiseModel::noiseless(3), 3, 1).unwrap();
    let p = [0.1, 0.2, 0.05, 0.15, 0.1, 0.2, 0.1, 0.1];
    let out = a.mitigate(&p).unwrap();
    // Weight-1 entries are 001, 010, 100 with mass 0.2 + 0.05 + 0.1.
    let mass = 0.35;
    for (x, v) in out.iter().enumerate() {
        let want = if bits::weight(x as u64) == 1 { p[x] / mass } else { 0.0 };
        assert!((v - want).abs() < 1e-15);
    }
}

#[test]
fn exact_inversion_recovers_the_ideal() {
    for (m, w) in [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (8, 4), (10, 5)] {
        let ideal = random_weight_dist(m, w, (m * 10 + w) as u64);
        let noise = ReadoutNoiseModel::device(m);
        let noisy = apply_channel(&noise, &ideal).unwrap();
        let a = build_matrix::<f64>(&noise, m, w).unwrap();
        let out = a.mitigate_dist(&noisy).unwrap();
        assert!(out.max_abs_diff(&ideal) < 1e-8, "m = {m}, w = {w}");
    }
}

#[test]
fn several_weights_invert_together() {
    let m = 5;
    let noise = ReadoutNoiseModel::device(m);
    let mut ideal = ProbDist::new(m);
    for (x, p) in random_weight_dist(m, 1, 1).iter() {
        ideal.add(x, 0.4 * p);
    }
    for (x, p) in random_weight_dist(m, 3, 2).iter() {
        ideal.add(x, 0.6 * p);
    }
    let a = build_matrix_weights::<f64>(&noise, m, &[3, 1, 3]).unwrap();
    assert_eq!(a.weights(), [1, 3]);
    let out = a.mitigate_dist(&apply_channel(&noise, &ideal).unwrap()).unwrap();
    assert!(out.max_abs_diff(&ideal) < 1e-8);
}

#[test]
fn restrict_renormalizes_on_the_weight() {
    let p = ProbDist::<f64>::from_dense(2, &[0.1, 0.3, 0.2, 0.4]).unwrap();
    let r = restrict(&p, &[1]).unwrap();
    assert!((r.get(1) - 0.6).abs() < 1e-15);
    assert!((r.get(2) - 0.4).abs() < 1e-15);
    assert_eq!(r.get(3), 0.0);
    assert!(matches!(restrict(&ProbDist::<f64>::from_dense(2, &[1.0, 0.0, 0.0, 0.0]).unwrap(), &[2]), Err(Error::EmptyDistribution)));
}

#[test]
fn mitigation_improves_finite_shot_estimates() {
    let mut r = rng::seeded(2024);
    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut postselected = Vec::new();
    for case in 0..20u64 {
        let m = r.random_range(3..=6);
        let w = r.random_range(1..m);
        let circuit = build_ccc(&AnsatzSpec::ccc(m, w)).unwrap();
        let theta: Vec<f64> = (0..circuit.param_count()).map(|_| r.random_range(0.0..std::f64::consts::TAU)).collect();
        let ideal = ProbDist::from_state(&simulate::<f64>(&circuit, &theta).unwrap());
        let noise = ReadoutNoiseModel::device(m);
        let clean = sample_dist(&ideal, 100_000, &mut rng::stream(case, 1)).unwrap();
        let noisy = apply_readout_noise(&clean, &noise, case).unwrap().to_dist::<f64>();
        let a = build_matrix::<f64>(&noise, m, w).unwrap();
        let out = a.mitigate_dist(&noisy).unwrap();
        assert!(out.iter().all(|(x, p)| p >= 0.0 && (p == 0.0 || bits::weight(x) == w)));
        assert!((out.total() - 1.0).abs() < 1e-12);
        before.push(noisy.total_variation(&ideal));
        after.push(out.total_variation(&ideal));
        postselected.push(restrict(&noisy, &[w]).unwrap().total_variation(&ideal));
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        (v[9] + v[10]) / 2.0
    };
    let (b, a, p) = (median(&mut before), median(&mut after), median(&mut postselected));
    assert!(a < b, "median TV before {b}, after {a}");
    assert!(a < p, "median TV postselected {p}, mitigated {a}");
}

#[test]
fn errors() {
    let noise = ReadoutNoiseModel::device(13);
    assert!(matches!(build_matrix::<f64>(&noise, 13, 2), Err(Error::TooLarge { n: 13, limit: MAX_MITIGATION_QUBITS })));
    assert!(matches!(build_matrix::<f64>(&ReadoutNoiseModel::device(3), 4, 2), Err(Error::WidthMismatch { .. })));

    let a = build_matrix::<f64>(&ReadoutNoiseModel::device(2), 2, 1).unwrap();
    assert!(matches!(a.mitigate(&[0.5, 0.5]), Err(Error::WidthMismatch { .. })));
    assert!(matches!(a.mitigate(&[0.5, 0.2, 0.2, 0.2]), Err(Error::InvalidDistribution(_))));
    assert!(matches!(a.mitigate(&[1.2, -0.2, 0.0, 0.0]), Err(Error::InvalidDistribution(_))));
    // All mass outside the weight class.
    assert!(matches!(a.mitigate(&[1.0, 0.0, 0.0, 0.0]), Err(Error::EmptyDistribution)));

    // A qubit that reads 0 half the time either way makes the block singular.
    let coin = ReadoutNoiseModel::uniform(2, 0.5, 0.5).unwrap();
    let a = build_matrix::<f64>(&coin, 2, 1).unwrap();
    assert!(matches!(a.mitigate(&[0.25; 4]), Err(Error::SingularMatrix)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_holds_for_random_channels(
        m in 2usize..7,
        seed in any::<u64>(),
        f in proptest::collection::vec((0.8f64..1.0, 0.8f64..1.0), 6),
    ) {
        let w = 1 + (seed as usize % (m - 1));
        let noise = ReadoutNoiseModel::new(f[..m].iter().map(|p| p.0).collect(), f[..m].iter().map(|p| p.1).collect()).unwrap();
        let ideal = random_weight_dist(m, w, seed);
        let a = build_matrix::<f64>(&noise, m, w).unwrap();
        let out = a.mitigate_dist(&apply_channel(&noise, &ideal).unwrap()).unwrap();
        prop_assert!(out.max_abs_diff(&ideal) < 1e-8);
        prop_assert!((out.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn output_lives_on_the_weight_class(m in 2usize..6, seed in any::<u64>()) {
        let w = 1 + (seed as usize % (m - 1));
        let mut r = rng::seeded(seed);
        let raw: Vec<f64> = (0..1 << m).map(|_| r.random_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let a = build_matrix::<f64>(&ReadoutNoiseModel::device(m), m, w).unwrap();
        if let Ok(out) = a.mitigate(&p) {
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (x, v) in out.iter().enumerate() {
                prop_assert!(*v >= 0.0);
                prop_assert!(*v == 0.0 || bits::weight(x as u64) == w);
            }
        }
    }
}
