use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use spinbath::analysis::weak_limit_residual;
use spinbath::analytic::{
    expectation, gamma0, overlap_r, r_squared, r_squared_bounds, reduced_system_state, single_spin_expectation,
};
use spinbath::crosscheck::{compare, ORACLE_TOLERANCE};
use spinbath::ensemble::{sample_amplitudes, sample_model, sample_observable, CoeffDist, CouplingDist};
use spinbath::model::{eid_observable, single_site_observable, RelevantObservable, SpinBathModel};
use spinbath::oracle::{build_initial, evolve, oracle_expectation, oracle_expectation_complex, DEFAULT_SITE_CAP};

fn model(n: usize, seed: u64) -> SpinBathModel {
    let (a, b) = sample_amplitudes(seed);
    sample_model(n, seed, &CoeffDist::Uniform, &CouplingDist::default(), a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_matches_oracle(n in 1usize..=8, seed in any::<u64>(), t in 0.0f64..100.0) {
        let m = model(n, seed);
        let o = sample_observable(n, seed ^ 0x5555).unwrap();
        let d = compare(&m, &o, &[t], DEFAULT_SITE_CAP).unwrap();
        prop_assert!(d.within(ORACLE_TOLERANCE), "{d:?}");
    }

    #[test]
    fn sampled_observable_expectation_is_real(n in 1usize..=6, seed in any::<u64>(), t in 0.0f64..50.0) {
        let m = model(n, seed);
        let state = evolve(&build_initial(&m).unwrap(), &m, t).unwrap();
        let o = sample_observable(n, seed).unwrap();
        let v = oracle_expectation_complex(&state, &o).unwrap();
        prop_assert!(v.im.abs() <= 1e-12, "{v}");
        prop_assert_eq!(oracle_expectation(&state, &o).unwrap(), v.re);
    }

    #[test]
    fn identity_normalization(n in 1usize..=200, seed in any::<u64>(), t in -1e3f64..1e3) {
        let m = model(n, seed);
        let id = RelevantObservable::identity(n).unwrap();
        prop_assert!((expectation(&m, &id, t).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!((gamma0(&m, &id, t).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn overlap_time_symmetry_and_modulus(n in 1usize..=200, seed in any::<u64>(), t in 0.0f64..500.0) {
        let m = model(n, seed);
        let r = overlap_r(&m, t);
        prop_assert!((overlap_r(&m, -t) - r.conj()).norm() <= 1e-12);
        prop_assert!((r.norm_sqr() - r_squared(&m, t)).abs() <= 1e-12);
        let (lo, hi) = r_squared_bounds(&m);
        prop_assert!(r.norm_sqr() >= lo - 1e-12 && r.norm_sqr() <= hi + 1e-12);
    }

    #[test]
    fn residual_bound(n in 1usize..=100, seed in any::<u64>(), t in 0.0f64..200.0,
                      s00 in -1.0f64..1.0, s11 in -1.0f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let m = model(n, seed);
        let s01 = C64::new(re, im);
        let o = eid_observable(s00, s01, s11, n).unwrap();
        let bound = 2.0 * m.a().norm() * m.b().norm() * s01.norm() * overlap_r(&m, t).norm();
        prop_assert!(weak_limit_residual(&m, &o, t).unwrap() <= bound + 1e-12);
    }

    #[test]
    fn reduced_state_is_a_state(n in 1usize..=100, seed in any::<u64>(), t in 0.0f64..200.0) {
        let rho = reduced_system_state(&model(n, seed), t);
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-12);
        prop_assert!(rho.eigenvalues().0 >= -1e-12);
    }

    #[test]
    fn single_site_is_periodic(n in 1usize..=20, seed in any::<u64>(), t in 0.0f64..50.0, k in 1u32..10_000) {
        let m = model(n, seed);
        let j = 1 + (seed as usize % n);
        let eps = sample_observable(1, seed).unwrap().sites[0];
        let period = TAU / m.site(j).unwrap().g;
        let v = single_spin_expectation(&m, j, &eps, t).unwrap();
        let w = single_spin_expectation(&m, j, &eps, t + k as f64 * period).unwrap();
        prop_assert!((v - w).abs() <= 1e-10);
        let via_product = expectation(&m, &single_site_observable(j, eps, n).unwrap(), t).unwrap();
        prop_assert!((v - via_product).abs() <= 1e-12);
    }
}

#[test]
fn partial_trace_matches_reduced_state_entrywise() {
    for n in 1..=8 {
        for seed in 0..5 {
            let m = model(n, seed);
            for t in [0.0, 1.7, 23.0] {
                let rho = evolve(&build_initial(&m).unwrap(), &m, t).unwrap().partial_trace_system();
                let analytic = reduced_system_state(&m, t);
                for (i, row) in rho.iter().enumerate() {
                    for (j, entry) in row.iter().enumerate() {
                        assert!((analytic.entry(i, j) - entry).norm() <= 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn unitarity_at_long_times() {
    let m = model(10, 3);
    let s = build_initial(&m).unwrap();
    let t = 1e6 / m.mean_coupling();
    assert!((evolve(&s, &m, t).unwrap().norm_sqr() - 1.0).abs() <= 1e-12);
}
