//! Brute-force reference: the full `2^(N+1)` state vector, evolved exactly and
//! contracted entry by entry.
//!
//! Nothing here uses the product formulas of [`crate::analytic`]; the point is
//! to be an independent check on them.
//!
//! Layout: the system qubit is the most significant bit (bit `N`), site `i`
//! occupies bit `N - i`, and a clear bit means `|0>` / `|up>`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Hermitian2, RelevantObservable, SpinBathModel};

/// Largest `N` materialized without an explicit override (~512 MB of state).
pub const DEFAULT_SITE_CAP: usize = 24;

/// Largest tolerated imaginary part of `<psi|O|psi>` (relative to `max(1, |re|)`).
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    amplitudes: Vec<C64>,
    n_sites: usize,
    t: f64,
}

impl DenseState {
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Index of the basis state `|s>|sigma_1 ... sigma_N>` (bits: 0 = `|0>`/`|up>`).
    pub fn index(&self, system: usize, sites: &[usize]) -> usize {
        assert_eq!(sites.len(), self.n_sites);
        sites.iter().fold(system, |acc, &b| (acc << 1) | b)
    }

    /// `Tr_E |psi><psi|` as a 2x2 matrix `[[rho00, rho01], [rho10, rho11]]`.
    pub fn partial_trace_system(&self) -> [[C64; 2]; 2] {
        let half = self.amplitudes.len() / 2;
        let (zero, one) = self.amplitudes.split_at(half);
        let inner = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p * q.conj()).sum::<C64>();
        [[inner(zero, zero), inner(zero, one)], [inner(one, zero), inner(one, one)]]
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::OverCap { n, cap });
    }
    Ok(())
}

/// Tensor product `(x_1, y_1) (x) ... (x) (x_N, y_N)` with site 1 most significant.
fn kron_pairs(head: Vec<C64>, pairs: impl Iterator<Item = (C64, C64)>) -> Vec<C64> {
    pairs.fold(head, |acc, (up, down)| {
        let mut next = Vec::with_capacity(acc.len() * 2);
        for amp in acc {
            next.push(amp * up);
            next.push(amp * down);
        }
        next
    })
}

pub fn build_initial(model: &SpinBathModel) -> Result<DenseState> {
    build_initial_with_cap(model, DEFAULT_SITE_CAP)
}

/// `(a|0> + b|1>) (x) prod_i (alpha_i|up> + beta_i|down>)`.
pub fn build_initial_with_cap(model: &SpinBathModel, cap: usize) -> Result<DenseState> {
    let n = model.n_sites();
    check_cap(n, cap)?;
    let amplitudes = kron_pairs(vec![model.a(), model.b()], model.sites().iter().map(|s| (s.alpha, s.beta)));
    Ok(DenseState { amplitudes, n_sites: n, t: 0.0 })
}

/// Applies `exp(i t H)` with `H = 1/2 z_s sum_i g_i sigma_i` (`z, sigma = +1`
/// for a clear bit). This is the propagator that turns the `|0>` branch into
/// `prod_i (alpha_i e^{i g_i t/2}|up> + beta_i e^{-i g_i t/2}|down>)`.
pub fn evolve(state: &DenseState, model: &SpinBathModel, t: f64) -> Result<DenseState> {
    let n = state.n_sites;
    if n != model.n_sites() {
        return Err(Error::StateMismatch { state: n, model: model.n_sites() });
    }
    let couplings: Vec<f64> = model.sites().iter().map(|s| s.g).collect();
    let mut amplitudes = state.amplitudes.clone();
    amplitudes.par_iter_mut().enumerate().for_each(|(k, amp)| {
        let mut field = 0.0;
        for (i, g) in couplings.iter().enumerate() {
            let bit = (k >> (n - 1 - i)) & 1;
            field += if bit == 0 { *g } else { -*g };
        }
        let z = if (k >> n) & 1 == 0 { 1.0 } else { -1.0 };
        *amp *= C64::from_polar(1.0, 0.5 * z * field * t);
    });
    Ok(DenseState { amplitudes, n_sites: n, t: state.t + t })
}

/// Applies a 2x2 matrix to the qubit at `bit` in place.
fn apply_single(amps: &mut [C64], bit: usize, m: &Hermitian2) {
    let stride = 1usize << bit;
    let (m00, m01, m10, m11) = (m.entry(0, 0), m.entry(0, 1), m.entry(1, 0), m.entry(1, 1));
    amps.par_chunks_mut(2 * stride).for_each(|block| {
        let (lo, hi) = block.split_at_mut(stride);
        for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (u, v) = (*x0, *x1);
            *x0 = m00 * u + m01 * v;
            *x1 = m10 * u + m11 * v;
        }
    });
}

/// `<psi|O|psi>` by applying each 2x2 factor to a copy of the full state.
pub fn oracle_expectation(state: &DenseState, obs: &RelevantObservable) -> Result<f64> {
    let value = oracle_expectation_complex(state, obs)?;
    if value.im.abs() > IMAGINARY_TOLERANCE * value.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue(value.im));
    }
    Ok(value.re)
}

/// `<psi|O|psi>` with its imaginary residue kept.
pub fn oracle_expectation_complex(state: &DenseState, obs: &RelevantObservable) -> Result<C64> {
    let n = state.n_sites;
    if obs.n_sites() != n {
        return Err(Error::SizeMismatch { model: n, observable: obs.n_sites() });
    }
    let mut applied = state.amplitudes.clone();
    apply_single(&mut applied, n, &obs.system);
    for (i, eps) in obs.sites.iter().enumerate() {
        apply_single(&mut applied, n - 1 - i, eps);
    }
    Ok(state.amplitudes.par_iter().zip(applied.par_iter()).map(|(p, q)| p.conj() * q).sum())
}

/// The explicit `2^N` bath vector of the `|0>` branch, `|E0(t)>`. The `|1>`
/// branch is `bath_branch(model, -t)`.
pub fn bath_branch(model: &SpinBathModel, t: f64) -> Result<Vec<C64>> {
    bath_branch_with_cap(model, t, DEFAULT_SITE_CAP)
}

pub fn bath_branch_with_cap(model: &SpinBathModel, t: f64, cap: usize) -> Result<Vec<C64>> {
    check_cap(model.n_sites(), cap)?;
    Ok(kron_pairs(
        vec![C64::new(1.0, 0.0)],
        model.sites().iter().map(|s| {
            let w = C64::from_polar(1.0, 0.5 * s.g * t);
            (s.alpha * w, s.beta * w.conj())
        }),
    ))
}

/// `<E1(t)|E0(t)>` from the two explicit bath vectors.
pub fn oracle_overlap(model: &SpinBathModel, t: f64) -> Result<C64> {
    oracle_overlap_with_cap(model, t, DEFAULT_SITE_CAP)
}

pub fn oracle_overlap_with_cap(model: &SpinBathModel, t: f64, cap: usize) -> Result<C64> {
    let e0 = bath_branch_with_cap(model, t, cap)?;
    let e1 = bath_branch_with_cap(model, -t, cap)?;
    Ok(e1.iter().zip(&e0).map(|(x, y)| x.conj() * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eid_observable, make_model};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn sample() -> SpinBathModel {
        make_model(
            C64::from_polar(0.6, 0.4),
            C64::from_polar(0.8, -0.9),
            &[
                (c(0.3f64.sqrt()), C64::from_polar(0.7f64.sqrt(), 1.9), 0.77),
                (C64::from_polar(0.9f64.sqrt(), -0.2), C64::from_polar(0.1f64.sqrt(), 0.5), 0.21),
                (c(0.5f64.sqrt()), C64::from_polar(0.5f64.sqrt(), 3.0), 0.5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn initial_basis_state() {
        let m = make_model(c(1.0), c(0.0), &[(c(1.0), c(0.0), 1.0)]).unwrap();
        let s = build_initial(&m).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(s.index(0, &[0]), 0);
    }

    #[test]
    fn initial_uniform_superposition() {
        let h = c(FRAC_1_SQRT_2);
        let m = make_model(h, h, &[(h, h, 1.0)]).unwrap();
        let s = build_initial(&m).unwrap();
        for amp in s.amplitudes() {
            assert!((amp - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn initial_norm_and_cap() {
        let s = build_initial(&sample()).unwrap();
        assert_eq!(s.amplitudes().len(), 16);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(matches!(build_initial_with_cap(&sample(), 2), Err(Error::OverCap { n: 3, cap: 2 })));
        let m = make_model(c(1.0), c(0.0), &vec![(c(1.0), c(0.0), 1.0); 25]).unwrap();
        assert!(matches!(build_initial(&m), Err(Error::OverCap { .. })));
        assert!(matches!(oracle_overlap(&m, 1.0), Err(Error::OverCap { .. })));
    }

    #[test]
    fn evolve_zero_is_identity_and_preserves_norm() {
        let m = sample();
        let s = build_initial(&m).unwrap();
        assert_eq!(evolve(&s, &m, 0.0).unwrap().amplitudes(), s.amplitudes());
        for t in [0.3, 40.0, 1e6 / m.mean_coupling()] {
            assert!((evolve(&s, &m, t).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn evolve_up_phase_advances_by_half_g_t() {
        let m = make_model(c(1.0), c(0.0), &[(c(0.6), c(0.8), 1.3)]).unwrap();
        let s = build_initial(&m).unwrap();
        let t = 0.7;
        let e = evolve(&s, &m, t).unwrap();
        let up = e.amplitudes()[e.index(0, &[0])];
        let down = e.amplitudes()[e.index(0, &[1])];
        assert!((up - C64::from_polar(0.6, 1.3 * t / 2.0)).norm() < 1e-15);
        assert!((down - C64::from_polar(0.8, -1.3 * t / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn evolve_rejects_mismatched_model() {
        let s = build_initial(&sample()).unwrap();
        let other = make_model(c(1.0), c(0.0), &[(c(1.0), c(0.0), 1.0)]).unwrap();
        assert!(matches!(evolve(&s, &other, 1.0), Err(Error::StateMismatch { .. })));
    }

    #[test]
    fn evolved_state_is_two_branch() {
        let m = sample();
        let t = 3.7;
        let e = evolve(&build_initial(&m).unwrap(), &m, t).unwrap();
        let e0 = bath_branch(&m, t).unwrap();
        let e1 = bath_branch(&m, -t).unwrap();
        let half = e.amplitudes().len() / 2;
        for k in 0..half {
            assert!((e.amplitudes()[k] - m.a() * e0[k]).norm() < 1e-12);
            assert!((e.amplitudes()[half + k] - m.b() * e1[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_and_sigma_z_expectations() {
        let m = sample();
        let s = evolve(&build_initial(&m).unwrap(), &m, 2.5).unwrap();
        let id = RelevantObservable::identity(3).unwrap();
        assert!((oracle_expectation(&s, &id).unwrap() - 1.0).abs() < 1e-12);

        let h = c(FRAC_1_SQRT_2);
        let m = make_model(h, h, &[(c(0.6), c(0.8), 0.4), (h, h, 0.9)]).unwrap();
        let sz = eid_observable(1.0, c(0.0), -1.0, 2).unwrap();
        for t in [0.0, 1.0, 20.0] {
            let s = evolve(&build_initial(&m).unwrap(), &m, t).unwrap();
            assert!(oracle_expectation(&s, &sz).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_size_mismatch() {
        let s = build_initial(&sample()).unwrap();
        assert!(matches!(
            oracle_expectation(&s, &RelevantObservable::identity(2).unwrap()),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn overlap_examples() {
        let m = sample();
        assert!((oracle_overlap(&m, 0.0).unwrap() - c(1.0)).norm() < 1e-12);
        let h = c(FRAC_1_SQRT_2);
        let m = make_model(h, h, &[(h, h, 1.0), (h, h, 1.0)]).unwrap();
        assert!(oracle_overlap(&m, PI / 2.0).unwrap().norm() < 1e-10);
    }

    #[test]
    fn partial_trace_is_unit_trace_hermitian() {
        let m = sample();
        let s = evolve(&build_initial(&m).unwrap(), &m, 4.0).unwrap();
        let rho = s.partial_trace_system();
        assert!(((rho[0][0] + rho[1][1]) - c(1.0)).norm() < 1e-12);
        assert!((rho[0][1] - rho[1][0].conj()).norm() < 1e-12);
        assert!((rho[0][0].re - m.a().norm_sqr()).abs() < 1e-12);
    }
}
