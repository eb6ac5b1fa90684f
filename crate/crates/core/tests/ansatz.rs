mod common;

use common::{Dense, circuit_unitary};
use dicke_vqe::ansatz::{
    AnsatzSpec, BlockKind, ResourceCount, build, build_cc, build_ccc, column_selector, compile_block, count_resources, generic_theta,
    raw_block, verify_support,
};
use dicke_vqe::bits;
use dicke_vqe::sim::{Angle, Circuit, Gate, ProbDist, simulate};
use rand::{Rng, SeedableRng};

fn support(c: &Circuit, theta: &[f64]) -> Vec<u64> {
    ProbDist::from_state(&simulate::<f64>(c, theta).unwrap()).support(dicke_vqe::ansatz::SUPPORT_EPS)
}

fn parameterized_blocks(c: &Circuit) -> usize {
    c.gates().iter().filter(|g| matches!(g, Gate::Cry { angle: Angle::Param { .. }, .. })).count()
}

#[test]
fn ccc_d52_layout() {
    let c = build_ccc(&AnsatzSpec::ccc(5, 2)).unwrap();
    let xs: Vec<usize> = c.gates().iter().filter_map(|g| if let Gate::X(q) = g { Some(*q) } else { None }).collect();
    assert_eq!(xs, vec![0, 2]);
    assert_eq!(parameterized_blocks(&c), 5);
    assert_eq!(c.param_count(), 5);
    // One staircase of three blocks from wire 0 and one of two from wire 2.
    let mut uppers: Vec<usize> =
        c.gates().iter().filter_map(|g| if let Gate::Cry { control, .. } = g { Some(*control) } else { None }).collect();
    uppers.sort();
    assert_eq!(uppers, vec![0, 1, 2, 2, 3]);
}

#[test]
fn smallest_dicke_case() {
    let c = build_ccc(&AnsatzSpec::ccc(2, 1)).unwrap();
    assert_eq!(c.gates().iter().filter(|g| matches!(g, Gate::X(_))).count(), 1);
    assert_eq!(c.param_count(), 1);
    assert_eq!(support(&c, &[0.9]), vec![0b01, 0b10]);
}

#[test]
fn complement_reuses_the_low_weight_skeleton() {
    let low = build_ccc(&AnsatzSpec::ccc(6, 2)).unwrap();
    let high = build_ccc(&AnsatzSpec::ccc(6, 4)).unwrap();
    assert_eq!(&high.gates()[..low.len()], low.gates());
    assert_eq!(&high.gates()[low.len()..], &(0..6).map(Gate::X).collect::<Vec<_>>()[..]);
    assert_eq!(support(&high, &generic_theta(high.param_count())), bits::weight_class(6, 4));
}

#[test]
fn cc_d52_is_exact() {
    let c = build_cc(&AnsatzSpec::cc(5, 2)).unwrap();
    assert_eq!(support(&c, &generic_theta(c.param_count())), bits::weight_class(5, 2));
}

#[test]
fn cc_single_excitation_is_the_w_ladder() {
    let c = build_cc(&AnsatzSpec::cc(5, 1)).unwrap();
    let mut want = vec![Gate::X(0)];
    for u in 0..4 {
        want.extend([Gate::cry(u, u + 1, Angle::slot(u)), Gate::cnot(u + 1, u)]);
    }
    assert_eq!(c.gates(), &want[..]);
}

#[test]
fn symmetric_partition_drops_three_blocks_at_n8_k3() {
    let full = build_cc(&AnsatzSpec::cc(8, 3)).unwrap();
    let pruned = build_cc(&AnsatzSpec::cc(8, 3).with_symmetric_partition(true)).unwrap();
    assert_eq!(parameterized_blocks(&full) - parameterized_blocks(&pruned), 3);
    let count = count_resources(&AnsatzSpec::cc(8, 3).with_symmetric_partition(true)).unwrap();
    assert_eq!(count.params, pruned.param_count());
    assert!(AnsatzSpec::ccc(8, 3).with_symmetric_partition(true).validate().is_err());
}

#[test]
fn column_selector_cases() {
    assert!(column_selector(5, 0).unwrap().is_empty());
    assert_eq!(column_selector(5, 1).unwrap().gates(), &[Gate::X(0)]);
    // k = 3 on five wires leaves |10⟩ on the top pair and W_3 below.
    let c = column_selector(5, 3).unwrap();
    let s = support(&c, &generic_theta(c.param_count()));
    assert_eq!(s, vec![0b10001, 0b10010, 0b10100]);
    assert!(column_selector(3, 4).is_err());
}

#[test]
fn compiled_three_c_matches_raw_up_to_phase() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    for i in 0..100 {
        let t = if i == 0 { std::f64::consts::FRAC_PI_2 } else { rng.random_range(-7.0..7.0) };
        let raw = circuit_unitary(&raw_block(BlockKind::ThreeC, Angle::Fixed(t)), &[]);
        let compiled = circuit_unitary(&compile_block(BlockKind::ThreeC, Angle::Fixed(t)), &[]);
        assert!(raw.phase_distance(&compiled) < 1e-10, "θ = {t}");
        assert_eq!(compile_block(BlockKind::ThreeC, Angle::Fixed(t)).cnot_count(), 2);
    }
    let id = circuit_unitary(&compile_block(BlockKind::ThreeC, Angle::Fixed(0.0)), &[]);
    assert!(id.phase_distance(&Dense::identity(4)) < 1e-12);
}

#[test]
fn compiled_two_c_matches_det_corrected_block() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2);
    for i in 0..100 {
        let t = if i == 0 { 1.1 } else { rng.random_range(-7.0..7.0) };
        let mut corrected = Circuit::new(2);
        corrected.push(Gate::cry(0, 1, Angle::Fixed(t))).unwrap();
        corrected.push(Gate::cry(1, 0, Angle::Fixed(std::f64::consts::PI))).unwrap();
        let want = circuit_unitary(&corrected, &[]);
        let compiled = compile_block(BlockKind::TwoC, Angle::Fixed(t));
        assert!(want.phase_distance(&circuit_unitary(&compiled, &[])) < 1e-10, "θ = {t}");
        assert_eq!(compiled.cnot_count(), 2);
    }
}

#[test]
fn compiled_builds_share_support() {
    for (n, k) in [(5, 2), (6, 3), (7, 3), (8, 4)] {
        for spec in [AnsatzSpec::ccc(n, k), AnsatzSpec::cc(n, k)] {
            let raw = build(&spec).unwrap();
            let compiled = build(&spec.clone().compiled(true)).unwrap();
            assert_eq!(raw.param_count(), compiled.param_count());
            let theta = generic_theta(raw.param_count());
            assert_eq!(support(&raw, &theta), support(&compiled, &theta), "{spec:?}");
        }
    }
}

fn ccc_blocks_formula(n: usize, k: usize) -> usize {
    let (n, k) = (n as f64, k as f64);
    (n * k - 1.5 * k * k + 0.5 * k).round() as usize
}

#[test]
fn resource_counts_match_built_circuits() {
    for n in 2..=20 {
        for k in 1..n {
            let kk = k.min(n - k);
            for spec in [AnsatzSpec::ccc(n, k), AnsatzSpec::cc(n, k)] {
                let count = count_resources(&spec).unwrap();
                let raw = build(&spec).unwrap();
                let compiled = build(&spec.clone().compiled(true)).unwrap();
                assert_eq!(count.blocks, parameterized_blocks(&raw), "{spec:?}");
                assert_eq!(count.params, raw.param_count());
                assert_eq!(count.cnots, compiled.cnot_count(), "{spec:?}");
                assert_eq!(count.cnot_depth, compiled.two_qubit_depth(), "{spec:?}");
                if spec.variant == dicke_vqe::ansatz::Variant::Ccc {
                    assert_eq!(count.blocks, ccc_blocks_formula(n, kk));
                    assert_eq!(count.cnots, 2 * count.blocks);
                    assert_eq!(count.cnot_depth, 2 * (n - kk));
                } else if kk % 2 == 1 {
                    assert_eq!(count.blocks, kk.div_ceil(2) * (2 * n - 1 - kk) / 2);
                }
            }
        }
    }
}

#[test]
fn d82_cnot_counts() {
    assert_eq!(count_resources(&AnsatzSpec::ccc(8, 2)).unwrap(), ResourceCount { blocks: 11, cnots: 22, cnot_depth: 12, params: 11 });
    assert_eq!(count_resources(&AnsatzSpec::cc(8, 2)).unwrap().cnots, 25);
    assert_eq!(count_resources(&AnsatzSpec::ccc(8, 0)).unwrap().blocks, 0);
    assert!(count_resources(&AnsatzSpec::ccc(8, 2).with_layers(2)).is_err());
}

#[test]
fn d63_supports() {
    let ccc = build_ccc(&AnsatzSpec::ccc(6, 3)).unwrap();
    let r = verify_support(&ccc, 3, &generic_theta(ccc.param_count())).unwrap();
    assert_eq!(r.weights.iter().copied().collect::<Vec<_>>(), vec![3]);
    assert_eq!((r.target_present, r.target_total), (20, 20));
    assert!(r.exact());
    let cc = build_cc(&AnsatzSpec::cc(6, 3)).unwrap();
    let r = verify_support(&cc, 3, &generic_theta(cc.param_count())).unwrap();
    assert!(r.weights.iter().all(|w| [1, 3].contains(w)));
    assert!(r.complete() && !r.exact());
}

#[test]
fn zero_angles_leave_the_x_layer_state() {
    for spec in [AnsatzSpec::ccc(7, 3), AnsatzSpec::cc(7, 3), AnsatzSpec::ccc(6, 4)] {
        let c = build(&spec).unwrap();
        let s = support(&c, &vec![0.0; c.param_count()]);
        assert_eq!(s.len(), 1, "{spec:?}");
    }
}

#[test]
fn ccc_support_is_the_weight_class() {
    for n in 2..=12 {
        for k in 1..n {
            let c = build_ccc(&AnsatzSpec::ccc(n, k)).unwrap();
            assert_eq!(support(&c, &generic_theta(c.param_count())), bits::weight_class(n, k), "n = {n}, k = {k}");
        }
    }
}

#[test]
fn cc_support_contains_the_weight_class() {
    for n in 2..=12 {
        for k in 1..n {
            let c = build_cc(&AnsatzSpec::cc(n, k)).unwrap();
            let r = verify_support(&c, k, &generic_theta(c.param_count())).unwrap();
            assert!(r.complete(), "n = {n}, k = {k}");
            // Extras always differ from k by an even amount.
            assert!(r.weights.iter().all(|w| w.abs_diff(k) % 2 == 0));
            if k <= 2 || k >= n - 2 {
                assert!(r.exact(), "n = {n}, k = {k}: {:?}", r.weights);
            }
        }
    }
}

#[test]
fn extra_layers_keep_the_support() {
    for (n, k) in [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4)] {
        let base = build_ccc(&AnsatzSpec::ccc(n, k)).unwrap();
        let want = support(&base, &generic_theta(base.param_count()));
        for layers in 2..=4 {
            let c = build_ccc(&AnsatzSpec::ccc(n, k).with_layers(layers)).unwrap();
            assert_eq!(c.param_count(), base.param_count() + (layers - 1) * (n - 1));
            assert_eq!(support(&c, &generic_theta(c.param_count())), want, "n = {n}, k = {k}, layers = {layers}");
        }
    }
}

/// Reverse pairs `(x, reverse(x))`, `x ≠ reverse(x)`, of the weight-`k` class
/// with both members in the support, and with neither.
fn pair_census(n: usize, k: usize, s: &[u64]) -> (usize, usize) {
    let inside = |x: u64| s.binary_search(&x).is_ok();
    let (mut both, mut neither) = (0, 0);
    for x in bits::weight_class(n, k) {
        let r = bits::reverse(x, n);
        if x < r {
            both += usize::from(inside(x) && inside(r));
            neither += usize::from(!inside(x) && !inside(r));
        }
    }
    (both, neither)
}

#[test]
fn symmetric_partition_pair_census() {
    for n in 4..=12 {
        for k in 2..=n - 2 {
            let full = build_cc(&AnsatzSpec::cc(n, k)).unwrap();
            let pruned = build_cc(&AnsatzSpec::cc(n, k).with_symmetric_partition(true)).unwrap();
            let s_full = support(&full, &generic_theta(full.param_count()));
            let s = support(&pruned, &generic_theta(pruned.param_count()));
            let extras = |s: &[u64]| s.iter().filter(|x| bits::weight(**x) != k).count();
            assert!(extras(&s) <= extras(&s_full), "n = {n}, k = {k}");
            let (both, neither) = pair_census(n, k, &s);
            if k == 2 || k == n - 2 {
                assert_eq!(neither, 0, "n = {n}, k = {k}");
            }
            if n % 2 == 0 && (k == 3 || k == n - 3) {
                assert_eq!((both, neither), (0, 0), "n = {n}, k = {k}");
            }
        }
    }
    // Odd widths at k = 3 prune one block too many and lose whole pairs.
    let c = build_cc(&AnsatzSpec::cc(7, 3).with_symmetric_partition(true)).unwrap();
    assert_eq!(pair_census(7, 3, &support(&c, &generic_theta(c.param_count()))), (0, 3));
}

#[test]
fn specs_are_validated() {
    for spec in [AnsatzSpec::ccc(1, 1), AnsatzSpec::ccc(5, 0), AnsatzSpec::ccc(5, 5), AnsatzSpec::ccc(5, 2).with_layers(0)] {
        assert!(build(&spec).is_err(), "{spec:?}");
    }
    assert!(build_cc(&AnsatzSpec::ccc(5, 2)).is_err());
    assert!(build_ccc(&AnsatzSpec::cc(5, 2)).is_err());
}
