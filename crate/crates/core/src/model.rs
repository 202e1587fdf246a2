//! The closed central-spin system, its product-form observables, and sampled
//! trajectories.
//!
//! The system qubit `S0` (basis `|0>`, `|1>`) couples to `N` environment spins
//! (basis `|up>`, `|down>`) through `H = 1/2 sigma_z(S0) * sum_i g_i sigma_z(i)`.
//! Environment sites are indexed `1..=N`; all internal storage is 0-based.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|a|^2 + |b|^2 = 1` (and per site) for the strict constructor.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Tolerance on Hermiticity of 2x2 entries.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// A 2x2 Hermitian matrix `[[d0, upper], [conj(upper), d1]]`.
///
/// For the system part `d0 = s00`, `d1 = s11`, `upper = s01`; for a site part
/// `d0 = eps_upup`, `d1 = eps_dndn`, `upper = eps_updn` (the coefficient of
/// `|up><down|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hermitian2 {
    pub d0: f64,
    pub d1: f64,
    pub upper: C64,
}

impl Hermitian2 {
    pub const IDENTITY: Hermitian2 = Hermitian2::new(1.0, C64::new(0.0, 0.0), 1.0);
    pub const PAULI_X: Hermitian2 = Hermitian2::new(0.0, C64::new(1.0, 0.0), 0.0);
    pub const PAULI_Y: Hermitian2 = Hermitian2::new(0.0, C64::new(0.0, -1.0), 0.0);
    pub const PAULI_Z: Hermitian2 = Hermitian2::new(1.0, C64::new(0.0, 0.0), -1.0);

    pub const fn new(d0: f64, upper: C64, d1: f64) -> Self {
        Hermitian2 { d0, d1, upper }
    }

    /// Builds from all four entries, rejecting anything that is not Hermitian
    /// to [`HERMITIAN_TOLERANCE`].
    pub fn from_entries(m00: C64, m01: C64, m10: C64, m11: C64) -> Result<Self> {
        let finite = [m00, m01, m10, m11].iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::NonFinite("matrix entry"));
        }
        if m00.im.abs() > HERMITIAN_TOLERANCE
            || m11.im.abs() > HERMITIAN_TOLERANCE
            || (m01 - m10.conj()).norm() > HERMITIAN_TOLERANCE
        {
            return Err(Error::NotHermitian);
        }
        Ok(Hermitian2::new(m00.re, m01, m11.re))
    }

    /// Looks up a named single-spin operator: `id`, `sx`, `sy`, `sz`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "id" | "identity" => Some(Self::IDENTITY),
            "sx" | "x" => Some(Self::PAULI_X),
            "sy" | "y" => Some(Self::PAULI_Y),
            "sz" | "z" => Some(Self::PAULI_Z),
            _ => None,
        }
    }

    pub fn lower(&self) -> C64 {
        self.upper.conj()
    }

    /// Entry `(row, col)` with `0 = |0>/|up>`, `1 = |1>/|down>`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        match (row, col) {
            (0, 0) => C64::new(self.d0, 0.0),
            (0, 1) => self.upper,
            (1, 0) => self.lower(),
            (1, 1) => C64::new(self.d1, 0.0),
            _ => panic!("Hermitian2 index ({row}, {col}) out of range"),
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        (self.d0 - 1.0).abs() <= tol && (self.d1 - 1.0).abs() <= tol && self.upper.norm() <= tol
    }

    fn is_finite(&self) -> bool {
        self.d0.is_finite() && self.d1.is_finite() && self.upper.re.is_finite() && self.upper.im.is_finite()
    }
}

/// One environment spin in the product initial state `alpha |up> + beta |down>`,
/// coupled to `S0` with angular frequency `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub alpha: C64,
    pub beta: C64,
    pub g: f64,
}

impl Site {
    /// `|alpha|^2`.
    pub fn p_up(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// `|beta|^2`.
    pub fn p_down(&self) -> f64 {
        self.beta.norm_sqr()
    }

    /// The bilinear `conj(alpha) * beta`.
    pub fn coherence(&self) -> C64 {
        self.alpha.conj() * self.beta
    }
}

/// The closed system `U = S0 + E`: system amplitudes `(a, b)` and `N >= 1`
/// normalized environment sites with positive couplings.
///
/// Immutable once constructed; deserialization goes through the strict
/// validator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct SpinBathModel {
    a: C64,
    b: C64,
    sites: Vec<Site>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    a: C64,
    b: C64,
    sites: Vec<Site>,
}

impl TryFrom<RawModel> for SpinBathModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let sites = raw.sites.iter().map(|s| (s.alpha, s.beta, s.g)).collect::<Vec<_>>();
        make_model(raw.a, raw.b, &sites)
    }
}

impl From<SpinBathModel> for RawModel {
    fn from(m: SpinBathModel) -> Self {
        RawModel { a: m.a, b: m.b, sites: m.sites }
    }
}

/// Factors applied by [`make_model_lenient`]: each amplitude pair was divided
/// by the recorded norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Renormalization {
    pub system: f64,
    pub sites: Vec<f64>,
}

impl Renormalization {
    pub fn is_trivial(&self) -> bool {
        self.system == 1.0 && self.sites.iter().all(|&f| f == 1.0)
    }
}

fn check_inputs(a: C64, b: C64, sites: &[(C64, C64, f64)]) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::EmptyBath);
    }
    let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
    if !finite(a) || !finite(b) {
        return Err(Error::NonFinite("system amplitude"));
    }
    if a.norm_sqr() + b.norm_sqr() == 0.0 {
        return Err(Error::ZeroNormSystem);
    }
    for (i, &(alpha, beta, g)) in sites.iter().enumerate() {
        let site = i + 1;
        if !finite(alpha) || !finite(beta) || !g.is_finite() {
            return Err(Error::NonFinite("site parameter"));
        }
        if alpha.norm_sqr() + beta.norm_sqr() == 0.0 {
            return Err(Error::ZeroNormSite { site });
        }
        if g <= 0.0 {
            return Err(Error::NonPositiveCoupling { site, g });
        }
    }
    Ok(())
}

/// Strict constructor: every amplitude pair must already be normalized to
/// [`NORM_TOLERANCE`].
pub fn make_model(a: C64, b: C64, sites: &[(C64, C64, f64)]) -> Result<SpinBathModel> {
    check_inputs(a, b, sites)?;
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { what: "system".into(), norm_sqr: norm });
    }
    for (i, &(alpha, beta, _)) in sites.iter().enumerate() {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { what: format!("site {}", i + 1), norm_sqr: norm });
        }
    }
    Ok(SpinBathModel {
        a,
        b,
        sites: sites.iter().map(|&(alpha, beta, g)| Site { alpha, beta, g }).collect(),
    })
}

/// Lenient constructor: divides each amplitude pair by its norm and reports
/// the factors. Zero-norm pairs and bad couplings are still rejected.
pub fn make_model_lenient(
    a: C64,
    b: C64,
    sites: &[(C64, C64, f64)],
) -> Result<(SpinBathModel, Renormalization)> {
    check_inputs(a, b, sites)?;
    let unit = |x: C64, y: C64| {
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if n == 1.0 {
            (x, y, 1.0)
        } else {
            (x / n, y / n, n)
        }
    };
    let (a, b, system) = unit(a, b);
    let mut factors = Vec::with_capacity(sites.len());
    let sites = sites
        .iter()
        .map(|&(alpha, beta, g)| {
            let (alpha, beta, f) = unit(alpha, beta);
            factors.push(f);
            Site { alpha, beta, g }
        })
        .collect();
    Ok((SpinBathModel { a, b, sites }, Renormalization { system, sites: factors }))
}

impl SpinBathModel {
    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// Number of environment spins `N`.
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Site `j` in `1..=N`.
    pub fn site(&self, j: usize) -> Result<&Site> {
        if j == 0 || j > self.sites.len() {
            return Err(Error::SiteOutOfRange { j, n: self.sites.len() });
        }
        Ok(&self.sites[j - 1])
    }

    /// Mean coupling; `1 / mean_coupling()` is the natural time unit.
    pub fn mean_coupling(&self) -> f64 {
        self.sites.iter().map(|s| s.g).sum::<f64>() / self.sites.len() as f64
    }

    pub fn with_amplitudes(&self, a: C64, b: C64) -> Result<SpinBathModel> {
        let sites = self.sites.iter().map(|s| (s.alpha, s.beta, s.g)).collect::<Vec<_>>();
        make_model(a, b, &sites)
    }
}

/// A product observable: a 2x2 Hermitian part on `S0` tensored with one 2x2
/// Hermitian part per environment site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevantObservable {
    pub system: Hermitian2,
    pub sites: Vec<Hermitian2>,
}

impl RelevantObservable {
    pub fn new(system: Hermitian2, sites: Vec<Hermitian2>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EmptyBath);
        }
        if !system.is_finite() || !sites.iter().all(Hermitian2::is_finite) {
            return Err(Error::NonFinite("observable entry"));
        }
        Ok(RelevantObservable { system, sites })
    }

    /// The identity on the whole `2^(N+1)` space.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(Hermitian2::IDENTITY, vec![Hermitian2::IDENTITY; n])
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// True when every site part is the identity, i.e. the observable only
    /// looks at `S0`.
    pub fn is_system_only(&self) -> bool {
        self.sites.iter().all(|e| e.is_identity(HERMITIAN_TOLERANCE))
    }

    pub(crate) fn check_against(&self, model: &SpinBathModel) -> Result<()> {
        if self.sites.len() != model.n_sites() {
            return Err(Error::SizeMismatch { model: model.n_sites(), observable: self.sites.len() });
        }
        Ok(())
    }
}

/// Observable acting on `S0` only: system part `[[s00, s01], [conj(s01), s11]]`
/// and `N` identity site parts.
pub fn eid_observable(s00: f64, s01: C64, s11: f64, n: usize) -> Result<RelevantObservable> {
    RelevantObservable::new(Hermitian2::new(s00, s01, s11), vec![Hermitian2::IDENTITY; n])
}

/// Observable acting on environment spin `j` (1-based) only.
pub fn single_site_observable(j: usize, eps: Hermitian2, n: usize) -> Result<RelevantObservable> {
    if j == 0 || j > n {
        return Err(Error::SiteOutOfRange { j, n });
    }
    let mut sites = vec![Hermitian2::IDENTITY; n];
    sites[j - 1] = eps;
    RelevantObservable::new(Hermitian2::IDENTITY, sites)
}

/// Sampled samples of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn abs(&self, i: usize) -> f64 {
        match self {
            Samples::Real(v) => v[i].abs(),
            Samples::Complex(v) => v[i].norm(),
        }
    }
}

/// A time series on a strictly increasing grid, in simulation time units
/// (`hbar = 1`, couplings are angular frequencies).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Samples,
    pub label: String,
    pub config_digest: String,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Samples, label: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidTrajectory("times and values differ in length"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTrajectory("non-finite time"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTrajectory("times not strictly increasing"));
        }
        Ok(Trajectory { times, values, label: label.into(), config_digest: String::new() })
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = digest.into();
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &Samples {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn abs_values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.values.abs(i)).collect()
    }

    /// Largest `|value|` over grid points with `t0 <= t <= t1`, or `None` if
    /// no grid point falls inside.
    pub fn sup_abs_between(&self, t0: f64, t1: f64) -> Option<f64> {
        self.times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= t0 && t <= t1)
            .map(|(i, _)| self.values.abs(i))
            .fold(None, |acc, v| Some(acc.map_or(v, |m: f64| m.max(v))))
    }
}

/// `points` equally spaced times covering `[0, t_max]` inclusive.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) || points < 2 {
        return Err(Error::InvalidArgument(format!(
            "time grid needs t_max > 0 and at least 2 points (got t_max={t_max}, points={points})"
        )));
    }
    let step = t_max / (points - 1) as f64;
    Ok((0..points).map(|k| k as f64 * step).collect())
}
