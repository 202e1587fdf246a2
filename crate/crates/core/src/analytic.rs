//! Closed-form evaluation of expectation values in `O(N)` per time point.
//!
//! The evolved state is `a|0>|E0(t)> + b|1>|E1(t)>` with
//! `|E0(t)> = |E1(-t)> = prod_i (alpha_i e^{i g_i t/2}|up> + beta_i e^{-i g_i t/2}|down>)`.
//! For a product observable `S (x) eps_1 (x) ... (x) eps_N`:
//!
//! ```text
//! <O>(t) = |a|^2 s00 G0(t) + |b|^2 s11 G0(-t) + 2 Re[a conj(b) s10 G1(t)]
//! G0(t)  = <E0|eps|E0> = prod_i [|alpha|^2 e_uu + |beta|^2 e_dd + 2 Re(conj(alpha) beta e_ud e^{-i g t})]
//! G1(t)  = <E1|eps|E0> = prod_i [|alpha|^2 e_uu e^{i g t} + |beta|^2 e_dd e^{-i g t} + 2 Re(conj(alpha) beta e_ud)]
//! r(t)   = <E1|E0>     = prod_i [|alpha|^2 e^{i g t} + |beta|^2 e^{-i g t}]
//! ```
//!
//! The `|1>` branch sees `G0(-t)`, not `G0(t)`; the two coincide only when
//! every `conj(alpha_i) beta_i e_ud` is real.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::model::{Hermitian2, RelevantObservable, Site, SpinBathModel};
use crate::product::{complex_product, real_product, Product};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPair {
    pub t: f64,
    pub gamma0: f64,
    pub gamma1: C64,
}

/// Reduced density matrix of `S0` in the `|0>, |1>` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub rho00: f64,
    pub rho11: f64,
    pub rho01: C64,
}

impl ReducedState {
    pub fn rho10(&self) -> C64 {
        self.rho01.conj()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        match (row, col) {
            (0, 0) => C64::new(self.rho00, 0.0),
            (0, 1) => self.rho01,
            (1, 0) => self.rho10(),
            (1, 1) => C64::new(self.rho11, 0.0),
            _ => panic!("ReducedState index ({row}, {col}) out of range"),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.rho00 + self.rho11);
        let half_gap = (0.25 * (self.rho00 - self.rho11).powi(2) + self.rho01.norm_sqr()).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    /// `Tr(rho S)` for a system observable.
    pub fn expectation(&self, s: &Hermitian2) -> f64 {
        self.rho00 * s.d0 + self.rho11 * s.d1 + 2.0 * (self.rho01 * s.lower()).re
    }
}

fn phase(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

fn gamma0_factor(site: &Site, eps: &Hermitian2, t: f64) -> f64 {
    site.p_up() * eps.d0 + site.p_down() * eps.d1 + 2.0 * (site.coherence() * eps.upper * phase(-site.g * t)).re
}

fn gamma1_factor(site: &Site, eps: &Hermitian2, t: f64) -> C64 {
    let w = phase(site.g * t);
    site.p_up() * eps.d0 * w
        + site.p_down() * eps.d1 * w.conj()
        + 2.0 * (site.coherence() * eps.upper).re
}

fn r_factor(site: &Site, t: f64) -> C64 {
    let w = phase(site.g * t);
    site.p_up() * w + site.p_down() * w.conj()
}

fn gamma0_product(model: &SpinBathModel, obs: &RelevantObservable, t: f64) -> Product<f64> {
    real_product(model.sites().iter().zip(&obs.sites).map(|(s, e)| gamma0_factor(s, e, t)))
}

fn gamma1_product(model: &SpinBathModel, obs: &RelevantObservable, t: f64) -> Product<C64> {
    complex_product(model.sites().iter().zip(&obs.sites).map(|(s, e)| gamma1_factor(s, e, t)))
}

/// `<E0(t)| eps_1 (x) ... (x) eps_N |E0(t)>`; exactly real.
pub fn gamma0(model: &SpinBathModel, obs: &RelevantObservable, t: f64) -> Result<f64> {
    obs.check_against(model)?;
    Ok(gamma0_product(model, obs, t).value)
}

/// `<E1(t)| eps_1 (x) ... (x) eps_N |E0(t)>`.
pub fn gamma1(model: &SpinBathModel, obs: &RelevantObservable, t: f64) -> Result<C64> {
    obs.check_against(model)?;
    Ok(gamma1_product(model, obs, t).value)
}

pub fn gamma_pair(model: &SpinBathModel, obs: &RelevantObservable, t: f64) -> Result<GammaPair> {
    obs.check_against(model)?;
    Ok(GammaPair { t, gamma0: gamma0_product(model, obs, t).value, gamma1: gamma1_product(model, obs, t).value })
}

/// `<psi(t)|O|psi(t)>` for a product observable.
pub fn expectation(model: &SpinBathModel, obs: &RelevantObservable, t: f64) -> Result<f64> {
    obs.check_against(model)?;
    let (a, b) = (model.a(), model.b());
    let s = &obs.system;
    let mut value = 0.0;
    if s.d0 != 0.0 {
        value += a.norm_sqr() * s.d0 * gamma0_product(model, obs, t).value;
    }
    if s.d1 != 0.0 {
        value += b.norm_sqr() * s.d1 * gamma0_product(model, obs, -t).value;
    }
    let cross = a * b.conj() * s.lower();
    if cross != C64::new(0.0, 0.0) {
        value += 2.0 * (cross * gamma1_product(model, obs, t).value).re;
    }
    Ok(value)
}

/// The bath-branch overlap `r(t) = <E1(t)|E0(t)>`, with its underflow flag.
pub fn overlap_r_product(model: &SpinBathModel, t: f64) -> Product<C64> {
    complex_product(model.sites().iter().map(|s| r_factor(s, t)))
}

/// The bath-branch overlap `r(t) = <E1(t)|E0(t)>`.
pub fn overlap_r(model: &SpinBathModel, t: f64) -> C64 {
    overlap_r_product(model, t).value
}

/// `|r(t)|^2` from the real product `prod_i (|alpha|^4 + |beta|^4 + 2|alpha|^2|beta|^2 cos 2 g t)`.
pub fn r_squared(model: &SpinBathModel, t: f64) -> f64 {
    real_product(model.sites().iter().map(|s| {
        let (p, q) = (s.p_up(), s.p_down());
        p * p + q * q + 2.0 * p * q * (2.0 * s.g * t).cos()
    }))
    .value
}

/// Time-independent bracket `(prod_i (2|alpha_i|^2 - 1)^2, 1)` on `|r(t)|^2`.
pub fn r_squared_bounds(model: &SpinBathModel) -> (f64, f64) {
    let lower = real_product(model.sites().iter().map(|s| {
        let d = s.p_up() - s.p_down();
        d * d
    }))
    .value;
    (lower, 1.0)
}

/// Expectation of an observable on environment spin `j` alone, from the two
/// branch-weighted site-`j` factors; the other sites contribute exactly 1.
pub fn single_spin_expectation(model: &SpinBathModel, j: usize, eps: &Hermitian2, t: f64) -> Result<f64> {
    let site = model.site(j)?;
    Ok(model.a().norm_sqr() * gamma0_factor(site, eps, t) + model.b().norm_sqr() * gamma0_factor(site, eps, -t))
}

/// `rho_S(t) = Tr_E |psi(t)><psi(t)|`: populations `|a|^2`, `|b|^2` and
/// coherence `rho01 = a conj(b) r(t)`.
pub fn reduced_system_state(model: &SpinBathModel, t: f64) -> ReducedState {
    let (a, b) = (model.a(), model.b());
    ReducedState { rho00: a.norm_sqr(), rho11: b.norm_sqr(), rho01: a * b.conj() * overlap_r(model, t) }
}
