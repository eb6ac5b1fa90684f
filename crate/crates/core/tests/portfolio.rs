use std::collections::BTreeMap;

use dicke_vqe::portfolio::{
    AssetPool, EnergyForm, EnergyTable, PortfolioProblem, SpinModel, brute_force, cvar, cvar_dist, cvar_weighted, feasible_threshold,
    generate_pool, tail_size,
};
use dicke_vqe::sim::{ProbDist, SampleSet, rng};
use dicke_vqe::{Error, bits};
use proptest::prelude::*;
use rand::Rng;

fn diagonal() -> PortfolioProblem<f64> {
    let mut cov = vec![0.0; 16];
    for i in 0..4 {
        cov[i * 5] = 1.0;
    }
    PortfolioProblem::new(vec![0.1, 0.2, 0.3, 0.4], cov, 0.5, 2).unwrap()
}

fn pool_problem(seed: u64, n: usize, k: usize) -> PortfolioProblem<f64> {
    PortfolioProblem::from_pool(&generate_pool(seed, n, 252).unwrap(), 0.5, k).unwrap()
}

/// Energy straight from the definition, with bits read MSB-first.
fn oracle_energy(p: &PortfolioProblem<f64>, x: u64, soft: bool) -> f64 {
    let n = p.n();
    let xs: Vec<f64> = (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as f64).collect();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += xs[i] * p.cov_at(i, j) * xs[j];
        }
    }
    let lin: f64 = (0..n).map(|i| p.mu()[i] * xs[i]).sum();
    let hard = p.q() * quad - lin;
    let d = p.k() as f64 - xs.iter().sum::<f64>();
    if soft { hard + p.beta() * d * d } else { hard }
}

fn weight_k(n: usize, k: usize) -> Vec<u64> {
    (0..1u64 << n).filter(|x| x.count_ones() as usize == k).collect()
}

/// True when no eigenvalue falls below `-tol`.
fn is_psd(a: &[f64], n: usize, tol: f64) -> bool {
    // Eigenvalues via Jacobi rotations; the matrices here are small.
    let mut m = a.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
                if m[p * n + q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * m[p * n + q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (mrp, mrq) = (m[r * n + p], m[r * n + q]);
                    m[r * n + p] = c * mrp - s * mrq;
                    m[r * n + q] = s * mrp + c * mrq;
                }
                for r in 0..n {
                    let (mpr, mqr) = (m[p * n + r], m[q * n + r]);
                    m[p * n + r] = c * mpr - s * mqr;
                    m[q * n + r] = s * mpr + c * mqr;
                }
            }
        }
        if off < 1e-30 {
            break;
        }
    }
    (0..n).all(|i| m[i * n + i] >= -tol)
}

#[test]
fn empty_selection_has_zero_hard_energy() {
    let p = pool_problem(1000, 6, 3);
    assert_eq!(p.energy(0, EnergyForm::Hard), 0.0);
}

#[test]
fn diagonal_example_energy() {
    let p = diagonal();
    assert!((p.energy(0b0011, EnergyForm::Hard) - 0.3).abs() < 1e-12);
    assert!((p.energy_bits(&[false, false, true, true], EnergyForm::Hard).unwrap() - 0.3).abs() < 1e-12);
    assert!(matches!(p.energy_bits(&[true; 3], EnergyForm::Hard), Err(Error::WidthMismatch { expected: 4, got: 3 })));
}

#[test]
fn soft_minus_hard_is_the_penalty() {
    let p = pool_problem(1001, 7, 3);
    for x in 0..1u64 << 7 {
        let w = bits::weight(x) as f64;
        let gap = p.energy(x, EnergyForm::Soft) - p.energy(x, EnergyForm::Hard);
        let want = p.beta() * (3.0 - w) * (3.0 - w);
        assert!((gap - want).abs() <= 1e-12 * want.max(1.0), "x = {x:07b}");
        assert!((p.energy(x, EnergyForm::Hard) - oracle_energy(&p, x, false)).abs() < 1e-12);
        assert!((p.energy(x, EnergyForm::Soft) - oracle_energy(&p, x, true)).abs() < 1e-12);
    }
}

#[test]
fn default_beta_is_twice_the_row_sum_bound() {
    let p = pool_problem(1002, 5, 2);
    let rho = (0..5).map(|i| (0..5).map(|j| p.cov_at(i, j).abs()).sum::<f64>()).fold(0.0, f64::max);
    assert!((p.beta() - 2.0 * 5.0 * 0.5 * rho).abs() < 1e-15);
    assert_eq!(p.clone().with_beta(3.0).beta(), 3.0);
}

#[test]
fn problems_are_validated() {
    assert!(PortfolioProblem::new(vec![0.1, 0.2], vec![1.0; 3], 0.5, 1).is_err());
    assert!(PortfolioProblem::new(vec![0.1, 0.2], vec![1.0; 4], 0.0, 1).is_err());
    assert!(PortfolioProblem::new(vec![0.1, 0.2], vec![1.0; 4], 0.5, 3).is_err());
    assert!(PortfolioProblem::<f64>::new(vec![], vec![], 0.5, 0).is_err());
}

#[test]
fn permuted_relabels_energies() {
    let p = pool_problem(1003, 6, 3);
    let perm = [3, 0, 5, 1, 4, 2];
    let q = p.permuted(&perm).unwrap();
    for y in weight_k(6, 3) {
        // Position j of y holds original asset perm[j].
        let x = (0..6).filter(|&j| bits::bit(y, 6, j)).fold(0u64, |acc, j| acc | 1 << (5 - perm[j]));
        assert!((q.energy(y, EnergyForm::Hard) - p.energy(x, EnergyForm::Hard)).abs() < 1e-14);
    }
    assert!(p.permuted(&[0, 0, 1, 2, 3, 4]).is_err());
    assert!(p.permuted(&[0, 1]).is_err());
}

#[test]
fn energy_table_agrees_with_direct_evaluation() {
    let p = pool_problem(1004, 8, 4);
    let t = EnergyTable::new(&p, EnergyForm::Soft);
    assert!(t.is_dense());
    for x in 0..256 {
        assert_eq!(t.get(x), p.energy(x, EnergyForm::Soft));
    }
    let big = pool_problem(1004, 18, 2);
    let lazy = EnergyTable::new(&big, EnergyForm::Hard);
    assert!(!lazy.is_dense());
    assert_eq!(lazy.get(0b11), big.energy(0b11, EnergyForm::Hard));
    let wide = pool_problem(1004, 27, 2);
    assert!(matches!(EnergyTable::materialized(&wide, EnergyForm::Hard), Err(Error::TooLarge { n: 27, limit: 26 })));
}

#[test]
fn single_precision_follows_double() {
    let p = pool_problem(1005, 6, 2);
    let s: PortfolioProblem<f32> = p.cast();
    for x in weight_k(6, 2) {
        assert!((s.energy(x, EnergyForm::Hard) as f64 - p.energy(x, EnergyForm::Hard)).abs() < 1e-5);
    }
}

#[test]
fn generated_pools_are_deterministic() {
    let a = generate_pool(1000, 5, 252).unwrap();
    let b = generate_pool(1000, 5, 252).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, generate_pool(1001, 5, 252).unwrap());
    assert_eq!(a.n(), 5);
    assert_eq!(a.days(), 252);
    assert!(a.prices.iter().flatten().all(|p| *p > 0.0));
    assert!(a.prices.iter().all(|s| s[0] == 100.0));
    assert!(generate_pool(1, 1, 10).is_err());
    assert!(generate_pool(1, 3, 1).is_err());
}

#[test]
fn pool_statistics_match_a_direct_computation() {
    let pool = generate_pool(1006, 4, 40).unwrap();
    let ret: Vec<Vec<f64>> = pool.prices.iter().map(|s| (1..s.len()).map(|t| (s[t] - s[t - 1]) / s[t - 1]).collect()).collect();
    let t = ret[0].len() as f64;
    for i in 0..4 {
        let mi = ret[i].iter().sum::<f64>() / t;
        assert!((pool.mu[i] - mi).abs() < 1e-15);
        for j in 0..4 {
            let mj = ret[j].iter().sum::<f64>() / t;
            let c = ret[i].iter().zip(&ret[j]).map(|(a, b)| (a - mi) * (b - mj)).sum::<f64>() / (t - 1.0);
            assert!((pool.cov_at(i, j) - c).abs() < 1e-15);
        }
    }
}

#[test]
fn covariance_is_symmetric_psd() {
    for seed in 1000..1010 {
        let pool = generate_pool(seed, 8, 252).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(pool.cov_at(i, j), pool.cov_at(j, i));
            }
        }
        assert!(is_psd(&pool.cov, 8, 1e-10), "seed {seed}");
    }
    // Fewer days than assets: singular but still PSD.
    let thin = generate_pool(7, 6, 4).unwrap();
    assert!(is_psd(&thin.cov, 6, 1e-10));
}

#[test]
fn constant_prices_give_zero_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, "a,b,c\n5,7,9\n5,7,9\n5,7,9\n").unwrap();
    let pool = AssetPool::from_csv(&path).unwrap();
    assert_eq!(pool.names, ["a", "b", "c"]);
    assert!(pool.mu.iter().all(|m| *m == 0.0));
    assert!(pool.cov.iter().all(|c| *c == 0.0));
}

#[test]
fn identical_columns_give_rank_one_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("twin.csv");
    std::fs::write(&path, "x,y\n1,1\n2,2\n").unwrap();
    let pool = AssetPool::from_csv(&path).unwrap();
    // 2×2 rank ≤ 1 means a vanishing determinant.
    let det = pool.cov_at(0, 0) * pool.cov_at(1, 1) - pool.cov_at(0, 1) * pool.cov_at(1, 0);
    assert!(det.abs() < 1e-15);
    assert_eq!(pool.mu, [1.0, 1.0]);

    // A richer series with two identical columns.
    std::fs::write(&path, "x,y,z\n1,1,3\n2,2,2\n1.5,1.5,4\n3,3,1\n").unwrap();
    let pool = AssetPool::from_csv(&path).unwrap();
    let det = pool.cov_at(0, 0) * pool.cov_at(1, 1) - pool.cov_at(0, 1) * pool.cov_at(1, 0);
    assert!(det.abs() < 1e-12);
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pool.csv");
    let pool = generate_pool(1000, 6, 252).unwrap();
    pool.to_csv(&path).unwrap();
    let back = AssetPool::from_csv(&path).unwrap();
    assert_eq!(back.names, pool.names);
    for (a, b) in back.mu.iter().zip(&pool.mu) {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in back.cov.iter().zip(&pool.cov) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn malformed_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    for body in ["a,b\n1,2\n0,3\n", "a,b\n1,2\n3\n", "a,b\n1,2\n-1,3\n", "a,b\n1,x\n2,3\n", "a,b\n1,2\n"] {
        std::fs::write(&path, body).unwrap();
        assert!(matches!(AssetPool::from_csv(&path), Err(Error::MalformedData(_))), "{body:?}");
    }
    assert!(AssetPool::from_csv(dir.path().join("missing.csv")).is_err());
}

fn counts(n: usize, items: &[(u64, u64)]) -> SampleSet {
    SampleSet::from_counts(n, items.iter().copied().collect::<BTreeMap<_, _>>())
}

/// Two assets whose soft energies with k = 1, β = 1 are 1, 2, 3, 4 on
/// 00, 01, 10, 11.
fn four_level() -> PortfolioProblem<f64> {
    PortfolioProblem::new(vec![0.0, 0.0], vec![3.0, -1.0, -1.0, 2.0], 1.0, 1).unwrap().with_beta(1.0)
}

#[test]
fn cvar_examples() {
    let p = four_level();
    for (x, e) in [(0b00, 1.0), (0b01, 2.0), (0b10, 3.0), (0b11, 4.0)] {
        assert!((p.energy(x, EnergyForm::Soft) - e).abs() < 1e-15);
    }
    let s = counts(2, &[(0, 1), (1, 1), (2, 1), (3, 1)]);
    assert!((cvar(&s, &p, 0.5, EnergyForm::Soft).unwrap() - 1.5).abs() < 1e-15);
    assert!((cvar(&s, &p, 1.0, EnergyForm::Soft).unwrap() - 2.5).abs() < 1e-15);
    // Multiplicity counts: three shots of 4 and one of 1, half the shots.
    let s = counts(2, &[(0, 1), (3, 3)]);
    assert!((cvar(&s, &p, 0.5, EnergyForm::Soft).unwrap() - 2.5).abs() < 1e-15);
    assert!((cvar_weighted::<f64>([(1.0, 0, 1.0), (2.0, 1, 1.0), (3.0, 2, 1.0), (4.0, 3, 1.0)], 0.5).unwrap() - 1.5).abs() < 1e-15);
}

#[test]
fn cvar_full_tail_is_the_mean() {
    let p = pool_problem(1007, 6, 3);
    let mut r = rng::seeded(3);
    let draws: Vec<u64> = (0..500).map(|_| r.random_range(0..64)).collect();
    let mean = draws.iter().map(|x| p.energy(*x, EnergyForm::Soft)).sum::<f64>() / 500.0;
    let s = SampleSet::from_draws(6, draws);
    assert!((cvar(&s, &p, 1.0, EnergyForm::Soft).unwrap() - mean).abs() < 1e-12);
}

#[test]
fn cvar_errors() {
    let p = four_level();
    assert!(matches!(cvar(&SampleSet::from_draws(2, vec![]), &p, 0.5, EnergyForm::Soft), Err(Error::EmptySamples)));
    let s = counts(2, &[(0, 1)]);
    assert!(cvar(&s, &p, 0.0, EnergyForm::Soft).is_err());
    assert!(cvar(&s, &p, 1.5, EnergyForm::Soft).is_err());
    assert!(matches!(cvar(&counts(3, &[(0, 1)]), &p, 0.5, EnergyForm::Soft), Err(Error::WidthMismatch { .. })));
}

#[test]
fn tail_size_rounds_up() {
    assert_eq!(tail_size(0.3, 10), 3);
    assert_eq!(tail_size(0.31, 10), 4);
    assert_eq!(tail_size(0.25, 1000), 250);
    assert_eq!(tail_size(1e-9, 10), 1);
    assert_eq!(tail_size(1.0, 7), 7);
}

#[test]
fn cvar_of_a_distribution_splits_the_boundary() {
    let p = four_level();
    let d = ProbDist::from_dense(2, &[0.25, 0.25, 0.25, 0.25]).unwrap();
    assert!((cvar_dist(&d, &p, 0.5, EnergyForm::Soft).unwrap() - 1.5).abs() < 1e-15);
    // Tail of 0.375: all of 00 and half of 01.
    assert!((cvar_dist(&d, &p, 0.375, EnergyForm::Soft).unwrap() - (0.25 + 0.125 * 2.0) / 0.375).abs() < 1e-14);
}

#[test]
fn cvar_is_monotone_and_bounded_below() {
    let p = pool_problem(1008, 5, 2);
    let alphas = [0.05, 0.1, 0.25, 0.4, 0.5, 0.75, 0.9, 1.0];
    for seed in 0..100 {
        let mut r = rng::seeded(seed);
        let shots = r.random_range(1..200);
        let draws: Vec<u64> = (0..shots).map(|_| r.random_range(0..32)).collect();
        let lowest = draws.iter().map(|x| p.energy(*x, EnergyForm::Soft)).fold(f64::INFINITY, f64::min);
        let s = SampleSet::from_draws(5, draws);
        let vals: Vec<f64> = alphas.iter().map(|a| cvar(&s, &p, *a, EnergyForm::Soft).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-15, "seed {seed}: {vals:?}");
        }
        assert!(vals[0] >= lowest - 1e-15);
    }
}

#[test]
fn brute_force_examples() {
    let (x, e) = brute_force(&diagonal()).unwrap();
    assert_eq!(x, 0b0011);
    assert!((e - 0.3).abs() < 1e-12);

    let mut cov = vec![0.0; 25];
    cov[0] = 1.0;
    let full = PortfolioProblem::new(vec![0.1; 5], cov, 0.5, 5).unwrap();
    assert_eq!(brute_force(&full).unwrap().0, 0b11111);

    let wide = pool_problem(1000, 31, 2);
    assert!(matches!(brute_force(&wide), Err(Error::TooLarge { n: 31, limit: 30 })));
}

#[test]
fn brute_force_matches_exhaustive_search() {
    for seed in 1000..1010 {
        let p = pool_problem(seed, 8, 3);
        let (x, e) = brute_force(&p).unwrap();
        let mut best = (u64::MAX, f64::INFINITY);
        for y in weight_k(8, 3) {
            let ey = oracle_energy(&p, y, false);
            if ey < best.1 {
                best = (y, ey);
            }
        }
        assert_eq!(x, best.0);
        assert!((e - best.1).abs() < 1e-14);
    }
}

#[test]
fn brute_force_dominates_random_feasible_strings() {
    let mut r = rng::seeded(11);
    for seed in 1000..1005 {
        let p = pool_problem(seed, 12, 5);
        let (_, e) = brute_force(&p).unwrap();
        let class = weight_k(12, 5);
        for _ in 0..50 {
            let y = class[r.random_range(0..class.len())];
            assert!(e <= p.energy(y, EnergyForm::Hard));
        }
    }
}

#[test]
fn ties_go_to_the_smaller_string() {
    let flat = PortfolioProblem::new(vec![0.0; 4], vec![0.0; 16], 0.5, 2).unwrap();
    assert_eq!(brute_force(&flat).unwrap().0, 0b0011);
}

#[test]
fn argmin_survives_affine_maps() {
    for seed in 1000..1010 {
        let p = pool_problem(seed, 7, 3);
        let (x, _) = brute_force(&p).unwrap();
        for (c, d) in [(2.5, 0.0), (0.01, 1.0), (7.0, -3.0)] {
            // Scaling μ and A by c scales every energy; shifting μ by −d/k
            // adds d to every weight-k energy.
            let mu = p.mu().iter().map(|m| c * m - d / 3.0).collect();
            let cov = p.cov().iter().map(|a| c * a).collect();
            let q = PortfolioProblem::new(mu, cov, p.q(), 3).unwrap();
            for y in weight_k(7, 3) {
                let want = c * p.energy(y, EnergyForm::Hard) + d;
                assert!((q.energy(y, EnergyForm::Hard) - want).abs() < 1e-12);
            }
            assert_eq!(brute_force(&q).unwrap().0, x, "seed {seed}, c = {c}, d = {d}");
        }
    }
}

#[test]
fn feasibility_rule() {
    let p = pool_problem(1000, 8, 3);
    let rule = feasible_threshold(&p).unwrap();
    let class = weight_k(8, 3);
    let energies: Vec<f64> = class.iter().map(|x| oracle_energy(&p, *x, false)).collect();
    let best = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((rule.optimum_energy - best).abs() < 1e-14);
    assert!((rule.worst_energy - worst).abs() < 1e-14);
    assert!(rule.accepts(&p, rule.optimum));

    // A string with a gap ratio of at least 0.9 that is not the optimum.
    let (y, _) = class
        .iter()
        .zip(&energies)
        .filter(|(y, e)| **y != rule.optimum && (worst - **e) / (worst - best) >= 0.9)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("seed-1000 pool has a near-optimal runner-up");
    assert!(rule.accepts(&p, *y));

    for (y, e) in class.iter().zip(&energies) {
        assert_eq!(rule.accepts(&p, *y), (worst - e) / (worst - best) >= 0.75);
    }
    // Weight k + 1 never passes, even when its energy is lower.
    let heavier = rule.optimum | (1 << (rule.optimum.trailing_ones()));
    assert_eq!(bits::weight(heavier), 4);
    assert!(!rule.accepts(&p, heavier));
    assert!(!rule.accepts(&p, 0b1111));
}

#[test]
fn degenerate_class_accepts_everything() {
    let flat = PortfolioProblem::new(vec![0.0; 4], vec![0.0; 16], 0.5, 2).unwrap();
    let rule = feasible_threshold(&flat).unwrap();
    assert!(weight_k(4, 2).iter().all(|y| rule.accepts(&flat, *y)));
}

#[test]
fn spin_model_matches_binary_energies() {
    for n in 2..=10 {
        let p = pool_problem(2000 + n as u64, n, n / 2);
        for form in [EnergyForm::Soft, EnergyForm::Hard] {
            let s = SpinModel::from_problem(&p, form);
            for x in 0..1u64 << n {
                let z = s.spins(x);
                for i in 0..n {
                    assert_eq!(z[i], 1.0 - 2.0 * ((x >> (n - 1 - i)) & 1) as f64);
                }
                let want = p.energy(x, form);
                assert!((s.energy(&z) - want).abs() < 1e-10, "n = {n}, x = {x:b}");
            }
        }
    }
}

#[test]
fn penalty_dominates_for_large_beta() {
    for n in 3..=10 {
        for k in [1, n / 2, n - 1] {
            let p = pool_problem(3000 + n as u64, n, k);
            let hard: Vec<f64> = (0..1u64 << n).map(|x| p.energy(x, EnergyForm::Hard)).collect();
            let span = hard.iter().copied().fold(f64::NEG_INFINITY, f64::max) - hard.iter().copied().fold(f64::INFINITY, f64::min);
            let p = p.with_beta(1.01 * span + 1e-12);
            let argmin = (0..1u64 << n).min_by(|a, b| p.energy(*a, EnergyForm::Soft).total_cmp(&p.energy(*b, EnergyForm::Soft))).unwrap();
            assert_eq!(bits::weight(argmin), k, "n = {n}, k = {k}");
        }
    }
}

#[test]
fn default_beta_also_dominates() {
    for seed in 1000..1010 {
        let p = pool_problem(seed, 8, 3);
        let argmin = (0..256u64).min_by(|a, b| p.energy(*a, EnergyForm::Soft).total_cmp(&p.energy(*b, EnergyForm::Soft))).unwrap();
        assert_eq!(argmin, brute_force(&p).unwrap().0);
    }
}

proptest! {
    #[test]
    fn energies_match_the_definition(seed in 0u64..10_000, n in 2usize..9, x in any::<u64>()) {
        let k = 1 + (seed as usize % n);
        let p = pool_problem(seed, n, k);
        let x = x & ((1u64 << n) - 1);
        prop_assert!((p.energy(x, EnergyForm::Soft) - oracle_energy(&p, x, true)).abs() < 1e-12);
    }

    #[test]
    fn cvar_never_exceeds_the_mean(seed in any::<u64>(), alpha in 0.01f64..1.0) {
        let p = pool_problem(5, 4, 2);
        let mut r = rng::seeded(seed);
        let draws: Vec<u64> = (0..60).map(|_| r.random_range(0..16)).collect();
        let s = SampleSet::from_draws(4, draws);
        let full = cvar(&s, &p, 1.0, EnergyForm::Soft).unwrap();
        prop_assert!(cvar(&s, &p, alpha, EnergyForm::Soft).unwrap() <= full + 1e-12);
    }
}
