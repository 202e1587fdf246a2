//! Seeded random models and observables.
//!
//! Generator: ChaCha20 (`rand_chacha::ChaCha20Rng`) keyed with
//! `seed_from_u64(seed)`, one stream per index via `set_stream`. Environment
//! site `i` (1-based) of a model draws from stream `i`; observables use streams
//! `OBSERVABLE_STREAM + k` (`k = 0` for the system part, `k = i` for site `i`).
//! A 64-bit word `x` becomes a uniform `[0, 1)` double as `(x >> 11) * 2^-53`.
//!
//! Per site, draws happen in this order: `u` for `|alpha|^2`, the relative
//! phase of `beta`, then whatever the coupling distribution needs.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::model::{make_model, Hermitian2, RelevantObservable, SpinBathModel};

pub const OBSERVABLE_STREAM: u64 = 1 << 63;

/// Stream of uniform doubles for one `(seed, stream)` pair.
#[derive(Debug, Clone)]
pub struct UnitStream(ChaCha20Rng);

impl UnitStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        UnitStream(rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    pub fn next_unit_open_low(&mut self) -> f64 {
        1.0 - self.next_unit()
    }

    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}

/// Distribution of the environment amplitudes `(alpha, beta)`.
///
/// `alpha` is always real and non-negative; `beta` carries a uniform phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CoeffDist {
    /// `|alpha|^2 ~ Uniform[0, 1)`.
    #[default]
    Uniform,
    /// `|alpha|^2 = p` fixed.
    Fixed(f64),
}

/// Distribution of the couplings `g_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingDist {
    /// `g ~ Uniform(lo, hi]`; the default is `(0, 1]`.
    Uniform { lo: f64, hi: f64 },
    /// `g_i = i * g0`; every `r(t)` factor revives at `2 pi / g0`.
    Commensurate(f64),
    Constant(f64),
}

impl Default for CouplingDist {
    fn default() -> Self {
        CouplingDist::Uniform { lo: 0.0, hi: 1.0 }
    }
}

fn parse_f64(s: &str, name: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::UnknownDistribution(name.to_string()))
}

impl FromStr for CoeffDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "uniform" => Ok(CoeffDist::Uniform),
            Some(("fixed", p)) => {
                let p = parse_f64(p, s)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::UnknownDistribution(s.to_string()));
                }
                Ok(CoeffDist::Fixed(p))
            }
            _ => Err(Error::UnknownDistribution(s.to_string())),
        }
    }
}

impl fmt::Display for CoeffDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffDist::Uniform => write!(f, "uniform"),
            CoeffDist::Fixed(p) => write!(f, "fixed:{p}"),
        }
    }
}

impl FromStr for CouplingDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownDistribution(s.to_string());
        let dist = match s.split_once(':') {
            None if s == "uniform" => CouplingDist::default(),
            Some(("uniform", range)) => {
                let (lo, hi) = range.split_once(',').ok_or_else(bad)?;
                let (lo, hi) = (parse_f64(lo, s)?, parse_f64(hi, s)?);
                if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                    return Err(bad());
                }
                CouplingDist::Uniform { lo, hi }
            }
            Some(("commensurate", g0)) => CouplingDist::Commensurate(parse_f64(g0, s)?),
            Some(("constant", g)) => CouplingDist::Constant(parse_f64(g, s)?),
            _ => return Err(bad()),
        };
        match dist {
            CouplingDist::Commensurate(g) | CouplingDist::Constant(g) if !(g > 0.0 && g.is_finite()) => Err(bad()),
            d => Ok(d),
        }
    }
}

impl fmt::Display for CouplingDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingDist::Uniform { lo, hi } if *lo == 0.0 && *hi == 1.0 => write!(f, "uniform"),
            CouplingDist::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            CouplingDist::Commensurate(g0) => write!(f, "commensurate:{g0}"),
            CouplingDist::Constant(g) => write!(f, "constant:{g}"),
        }
    }
}

/// A random model with `n` environment spins. Each site draws from its own
/// stream, so site `i` is the same for every `n >= i`.
pub fn sample_model(
    n: usize,
    seed: u64,
    coeff: &CoeffDist,
    coupling: &CouplingDist,
    a: C64,
    b: C64,
) -> Result<SpinBathModel> {
    if n == 0 {
        return Err(Error::EmptyBath);
    }
    let sites: Vec<_> = (1..=n)
        .map(|i| {
            let mut rng = UnitStream::new(seed, i as u64);
            let u = match coeff {
                CoeffDist::Uniform => rng.next_unit(),
                CoeffDist::Fixed(p) => {
                    rng.next_unit();
                    *p
                }
            };
            let phi = TAU * rng.next_unit();
            let g = match coupling {
                CouplingDist::Uniform { lo, hi } => lo + (hi - lo) * rng.next_unit_open_low(),
                CouplingDist::Commensurate(g0) => i as f64 * g0,
                CouplingDist::Constant(g) => *g,
            };
            (C64::new(u.sqrt(), 0.0), C64::from_polar((1.0 - u).sqrt(), phi), g)
        })
        .collect();
    make_model(a, b, &sites)
}

fn random_hermitian(rng: &mut UnitStream) -> Hermitian2 {
    let d0 = rng.next_in(-1.0, 1.0);
    let d1 = rng.next_in(-1.0, 1.0);
    let radius = rng.next_unit();
    let phi = TAU * rng.next_unit();
    Hermitian2::new(d0, C64::from_polar(radius, phi), d1)
}

/// A random product observable with every entry bounded by 1 in modulus.
pub fn sample_observable(n: usize, seed: u64) -> Result<RelevantObservable> {
    if n == 0 {
        return Err(Error::EmptyBath);
    }
    let system = random_hermitian(&mut UnitStream::new(seed, OBSERVABLE_STREAM));
    let sites = (1..=n).map(|i| random_hermitian(&mut UnitStream::new(seed, OBSERVABLE_STREAM + i as u64))).collect();
    RelevantObservable::new(system, sites)
}

/// Random system amplitudes `(a, b)` with `|a|^2 ~ Uniform[0, 1)` and a random
/// relative phase on `b`.
pub fn sample_amplitudes(seed: u64) -> (C64, C64) {
    let mut rng = UnitStream::new(seed, 0);
    let u = rng.next_unit();
    let phi = TAU * rng.next_unit();
    (C64::new(u.sqrt(), 0.0), C64::from_polar((1.0 - u).sqrt(), phi))
}
