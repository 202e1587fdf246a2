//! Experiment configs and the command runner behind the `spinbath` binary.
//!
//! A config is a flat JSON object; every field is optional and falls back to
//! [`ExperimentConfig::default`]. Command-line flags override config fields.
//! Time fields (`t_max`, `window`, `t_start`, `t_end`) are in units of
//! `1 / mean coupling` of the sampled model; written `t` columns are in
//! simulation units (`hbar = 1`).
//!
//! Every output file carries the config digest and the crate version: CSV
//! files in a leading `#` line, JSON files in `config_digest` / `version`
//! fields.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{
    decoherence_time, expectation_trajectory, fluctuation_stats, n_scaling_sweep, overlap_trajectory,
    recurrence_check, summarize_sweep, timescale_report, SweepSpec,
};
use crate::analytic::{expectation, overlap_r};
use crate::crosscheck::{compare, Discrepancy, ORACLE_TOLERANCE};
use crate::ensemble::{sample_amplitudes, sample_model, sample_observable, CoeffDist, CouplingDist, UnitStream};
use crate::error::Error;
use crate::model::{
    eid_observable, single_site_observable, uniform_grid, Hermitian2, RelevantObservable, Samples, SpinBathModel,
};
use crate::oracle::DEFAULT_SITE_CAP;

pub const VERSION: &str = concat!("spinbath ", env!("CARGO_PKG_VERSION"));

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SPINBATH_OUT_DIR";

pub const COMMANDS: [&str; 7] =
    ["simulate-r", "simulate-obs", "sweep-n", "oracle-check", "recurrence", "timescale", "fluctuation"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("resource cap: {0}")]
    ResourceCap(String),
    #[error("i/o failure on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::ResourceCap(_) => 2,
            RunError::Io { .. } => 3,
            RunError::CheckFailed(_) => 4,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::OverCap { .. } => RunError::ResourceCap(e.to_string()),
            e => RunError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub seed: u64,
    /// Number of seeds (`seed, seed+1, ...`) in a sweep.
    pub seeds: usize,
    pub trials: usize,
    pub coeff_dist: String,
    pub g_dist: String,
    /// `[re, im]`.
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub t_max: f64,
    pub points: usize,
    pub theta: f64,
    pub window: f64,
    pub obs: String,
    pub eps: String,
    pub g_base: f64,
    pub v1: f64,
    pub v2: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub site_cap: usize,
    /// Output directory; not part of the digest.
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ExperimentConfig {
            command: String::new(),
            n: 20,
            n_list: vec![20, 100],
            seed: 7,
            seeds: 5,
            trials: 20,
            coeff_dist: "uniform".into(),
            g_dist: "uniform".into(),
            a: [h, 0.0],
            b: [h, 0.0],
            t_max: 100.0,
            points: 2000,
            theta: 0.1,
            window: 20.0,
            obs: "eid:0,1,0,0".into(),
            eps: "sz".into(),
            g_base: 1.0,
            v1: 1e23,
            v2: 1.0,
            t_start: 50.0,
            t_end: 550.0,
            samples: 1000,
            site_cap: DEFAULT_SITE_CAP,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    /// First 16 hex digits of SHA-256 over the compact JSON serialization,
    /// with `output` cleared.
    pub fn digest(&self) -> String {
        let canonical = ExperimentConfig { output: None, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn coeff(&self) -> Result<CoeffDist, RunError> {
        Ok(self.coeff_dist.parse()?)
    }

    fn coupling(&self) -> Result<CouplingDist, RunError> {
        Ok(self.g_dist.parse()?)
    }

    fn amplitudes(&self) -> (C64, C64) {
        (C64::new(self.a[0], self.a[1]), C64::new(self.b[0], self.b[1]))
    }

    fn model(&self) -> Result<SpinBathModel, RunError> {
        let (a, b) = self.amplitudes();
        Ok(sample_model(self.n, self.seed, &self.coeff()?, &self.coupling()?, a, b)?)
    }

    fn output_dir(&self) -> PathBuf {
        match &self.output {
            Some(p) => PathBuf::from(p),
            None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
        }
    }
}

/// Observable selector: `eid:s00,s01re,s01im,s11`, `single-site:<j>[:<eps>]`
/// with `<eps>` a name (`id`, `sx`, `sy`, `sz`) or `e_uu,e_udre,e_udim,e_dd`,
/// or `random:<seed>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableSpec {
    Eid { s00: f64, s01: C64, s11: f64 },
    SingleSite { j: usize, eps: Hermitian2 },
    Random(u64),
}

fn parse_numbers(text: &str, count: usize) -> Result<Vec<f64>, RunError> {
    let v = text
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| RunError::Config(format!("expected {count} numbers, got `{text}`")))?;
    if v.len() != count || v.iter().any(|x| !x.is_finite()) {
        return Err(RunError::Config(format!("expected {count} finite numbers, got `{text}`")));
    }
    Ok(v)
}

pub fn parse_eps(text: &str) -> Result<Hermitian2, RunError> {
    if let Some(h) = Hermitian2::named(text) {
        return Ok(h);
    }
    let v = parse_numbers(text, 4)?;
    Ok(Hermitian2::new(v[0], C64::new(v[1], v[2]), v[3]))
}

impl ObservableSpec {
    /// `default_eps` fills in `single-site:<j>` without an explicit operator.
    pub fn parse(text: &str, default_eps: &str) -> Result<Self, RunError> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        match kind {
            "eid" => {
                let v = parse_numbers(rest, 4)?;
                Ok(ObservableSpec::Eid { s00: v[0], s01: C64::new(v[1], v[2]), s11: v[3] })
            }
            "single-site" => {
                let (j, eps) = rest.split_once(':').unwrap_or((rest, default_eps));
                let j = j.trim().parse().map_err(|_| RunError::Config(format!("bad site index in `{text}`")))?;
                Ok(ObservableSpec::SingleSite { j, eps: parse_eps(eps)? })
            }
            "random" => Ok(ObservableSpec::Random(
                rest.trim().parse().map_err(|_| RunError::Config(format!("bad seed in `{text}`")))?,
            )),
            _ => Err(RunError::Config(format!("unknown observable `{text}`"))),
        }
    }

    pub fn build(&self, n: usize) -> Result<RelevantObservable, RunError> {
        Ok(match *self {
            ObservableSpec::Eid { s00, s01, s11 } => eid_observable(s00, s01, s11, n)?,
            ObservableSpec::SingleSite { j, eps } => single_site_observable(j, eps, n)?,
            ObservableSpec::Random(seed) => sample_observable(n, seed)?,
        })
    }
}

/// `x` with 17 significant digits and a lowercase exponent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Output {
    dir: PathBuf,
    digest: String,
    written: Vec<PathBuf>,
}

impl Output {
    fn new(cfg: &ExperimentConfig) -> Result<Self, RunError> {
        let dir = cfg.output_dir();
        fs::create_dir_all(&dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
        Ok(Output { dir, digest: cfg.digest(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), RunError> {
        let mut text = format!("# {VERSION} config {}\n{}\n", self.digest, header.join(","));
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, &text)
    }

    fn json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<(), RunError> {
        let mut value = serde_json::to_value(payload).expect("payload serializes");
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("config_digest".into(), self.digest.clone().into());
            map.insert("version".into(), VERSION.into());
        }
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        self.write(name, &text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub digest: String,
    pub files: Vec<PathBuf>,
}

fn model_times(cfg: &ExperimentConfig, model: &SpinBathModel) -> Result<Vec<f64>, RunError> {
    Ok(uniform_grid(cfg.t_max / model.mean_coupling(), cfg.points)?)
}

/// Runs one command. A failed oracle check still writes its report before
/// returning [`RunError::CheckFailed`].
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    if !COMMANDS.contains(&cfg.command.as_str()) {
        return Err(RunError::Config(format!(
            "unknown command `{}` (expected one of: {})",
            cfg.command,
            COMMANDS.join(", ")
        )));
    }
    let mut out = Output::new(cfg)?;
    let outcome = match cfg.command.as_str() {
        "simulate-r" => simulate_r(cfg, &mut out),
        "simulate-obs" => simulate_obs(cfg, &mut out),
        "sweep-n" => sweep_n(cfg, &mut out),
        "oracle-check" => oracle_check(cfg, &mut out),
        "recurrence" => recurrence(cfg, &mut out),
        "timescale" => timescale(cfg, &mut out),
        "fluctuation" => fluctuation(cfg, &mut out),
        _ => unreachable!(),
    };
    outcome.map(|()| RunReport { command: cfg.command.clone(), digest: out.digest, files: out.written })
}

fn simulate_r(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let model = cfg.model()?;
    let traj = overlap_trajectory(&model, model_times(cfg, &model)?)?;
    let Samples::Complex(values) = traj.values() else { unreachable!() };
    out.csv(
        "r.csv",
        &["t", "re_r", "im_r", "abs_r"],
        traj.times()
            .iter()
            .zip(values)
            .map(|(&t, r)| vec![fmt_f64(t), fmt_f64(r.re), fmt_f64(r.im), fmt_f64(r.norm())]),
    )?;
    out.json("model.json", &model)
}

fn simulate_obs(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let model = cfg.model()?;
    let obs = ObservableSpec::parse(&cfg.obs, &cfg.eps)?.build(model.n_sites())?;
    let traj = expectation_trajectory(&model, &obs, model_times(cfg, &model)?)?;
    let Samples::Real(values) = traj.values() else { unreachable!() };
    out.csv(
        "obs.csv",
        &["t", "value"],
        traj.times().iter().zip(values).map(|(&t, v)| vec![fmt_f64(t), fmt_f64(*v)]),
    )?;
    out.json("model.json", &model)
}

fn sweep_n(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let (a, b) = cfg.amplitudes();
    let spec = SweepSpec {
        n_list: cfg.n_list.clone(),
        seeds: (0..cfg.seeds as u64).map(|k| cfg.seed.wrapping_add(k)).collect(),
        coeff: cfg.coeff()?,
        coupling: cfg.coupling()?,
        a,
        b,
        threshold: cfg.theta,
        window_units: cfg.window,
        t_max_units: cfg.t_max,
        points: cfg.points,
    };
    let rows = n_scaling_sweep(&spec)?;
    out.csv(
        "sweep.csv",
        &["n", "seed", "t_d", "sup_late", "decohered"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.seed.to_string(),
                fmt_f64(r.verdict.t_d),
                fmt_f64(r.verdict.sup_late),
                u8::from(r.verdict.decohered).to_string(),
            ]
        }),
    )?;
    let summary: Vec<_> = summarize_sweep(&rows)
        .into_iter()
        .map(|s| {
            serde_json::json!({
                "n": s.n,
                "median_t_d": if s.median_t_d.is_finite() { serde_json::json!(s.median_t_d) } else { serde_json::json!("inf") },
                "median_sup_late": s.median_sup_late,
                "decohered": s.decohered,
                "runs": s.runs,
            })
        })
        .collect();
    out.json("sweep_summary.json", &serde_json::json!({ "theta": cfg.theta, "window": cfg.window, "rows": summary }))
}

/// One oracle trial: random amplitudes, model and observable derived from
/// `seed + trial`, checked at 10 random times in `[0, 50 / mean coupling]`.
pub fn oracle_trial(cfg: &ExperimentConfig, trial: u64) -> Result<Discrepancy, RunError> {
    let seed = cfg.seed.wrapping_add(trial);
    let (a, b) = sample_amplitudes(seed);
    let model = sample_model(cfg.n, seed, &cfg.coeff()?, &cfg.coupling()?, a, b)?;
    let obs = sample_observable(cfg.n, seed)?;
    let mut rng = UnitStream::new(seed, 1 << 62);
    let horizon = 50.0 / model.mean_coupling();
    let times: Vec<f64> = (0..10).map(|_| rng.next_in(0.0, horizon)).collect();
    Ok(compare(&model, &obs, &times, cfg.site_cap)?)
}

fn oracle_check(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    if cfg.n > cfg.site_cap {
        return Err(RunError::ResourceCap(format!("{} sites exceeds the dense-state cap of {}", cfg.n, cfg.site_cap)));
    }
    let per_trial = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| oracle_trial(cfg, k))
        .collect::<Result<Vec<_>, _>>()?;
    let worst = per_trial.iter().fold(Discrepancy::default(), |acc, d| acc.merge(*d));
    let pass = worst.within(ORACLE_TOLERANCE);
    out.json(
        "oracle_check.json",
        &serde_json::json!({
            "n": cfg.n,
            "seed": cfg.seed,
            "trials": cfg.trials,
            "tolerance": ORACLE_TOLERANCE,
            "max_delta": worst,
            "pass": pass,
        }),
    )?;
    if pass {
        Ok(())
    } else {
        Err(RunError::CheckFailed(format!("max |analytic - oracle| = {:e}", worst.max())))
    }
}

fn recurrence(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let (a, b) = cfg.amplitudes();
    if !(cfg.g_base > 0.0 && cfg.g_base.is_finite()) {
        return Err(RunError::Config(format!("g_base must be positive, got {}", cfg.g_base)));
    }
    let model = sample_model(cfg.n, cfg.seed, &cfg.coeff()?, &CouplingDist::Commensurate(cfg.g_base), a, b)?;
    let t_rec = std::f64::consts::TAU / cfg.g_base;
    let abs_r = recurrence_check(&model, t_rec)?;
    let obs = sample_observable(cfg.n, cfg.seed)?;
    let mut rng = UnitStream::new(cfg.seed, 1 << 62);
    let mut period_delta: f64 = 0.0;
    for _ in 0..10 {
        let t = rng.next_in(0.0, t_rec);
        period_delta = period_delta.max((expectation(&model, &obs, t)? - expectation(&model, &obs, t + t_rec)?).abs());
    }
    out.json(
        "recurrence.json",
        &serde_json::json!({
            "n": cfg.n,
            "g_base": cfg.g_base,
            "t_rec": t_rec,
            "abs_r_at_t_rec": abs_r,
            "abs_r_at_quarter_period": overlap_r(&model, 0.25 * t_rec).norm(),
            "observable_period_delta": period_delta,
            "revival": (abs_r - 1.0).abs() <= 1e-10,
        }),
    )?;
    out.json("model.json", &model)
}

fn timescale(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let report = timescale_report(cfg.v1, cfg.v2)?;
    out.json("timescale.json", &report)
}

fn fluctuation(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let model = cfg.model()?;
    let unit = 1.0 / model.mean_coupling();
    let stats = fluctuation_stats(&model, cfg.t_start * unit, cfg.t_end * unit, cfg.samples, cfg.seed)?;
    let times = model_times(cfg, &model)?;
    let verdict = decoherence_time(&overlap_trajectory(&model, times)?, cfg.theta, cfg.window * unit).ok();
    out.json(
        "fluctuation.json",
        &serde_json::json!({
            "n": cfg.n,
            "seed": cfg.seed,
            "t_start": cfg.t_start * unit,
            "t_end": cfg.t_end * unit,
            "samples": cfg.samples,
            "mean_r2": stats.mean_r2,
            "predicted_r2": stats.predicted_r2,
            "ratio": stats.ratio(),
            "decohered": verdict.map(|v| v.decohered),
        }),
    )?;
    out.json("model.json", &model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observable_grammar() {
        assert_eq!(
            ObservableSpec::parse("eid:1,0,0,-1", "sz").unwrap(),
            ObservableSpec::Eid { s00: 1.0, s01: C64::new(0.0, 0.0), s11: -1.0 }
        );
        assert_eq!(
            ObservableSpec::parse("single-site:3", "sz").unwrap(),
            ObservableSpec::SingleSite { j: 3, eps: Hermitian2::PAULI_Z }
        );
        assert_eq!(
            ObservableSpec::parse("single-site:2:sx", "sz").unwrap(),
            ObservableSpec::SingleSite { j: 2, eps: Hermitian2::PAULI_X }
        );
        assert_eq!(
            ObservableSpec::parse("single-site:1:0.5,0.1,-0.2,0.3", "sz").unwrap(),
            ObservableSpec::SingleSite { j: 1, eps: Hermitian2::new(0.5, C64::new(0.1, -0.2), 0.3) }
        );
        assert_eq!(ObservableSpec::parse("random:9", "sz").unwrap(), ObservableSpec::Random(9));
        for bad in ["eid:1,2", "single-site:x", "single-site:1:foo", "random:", "sigma"] {
            assert!(ObservableSpec::parse(bad, "sz").is_err(), "{bad}");
        }
        let spec = ObservableSpec::parse("single-site:3", "sz").unwrap();
        assert!(spec.build(2).is_err());
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.00125), "-1.2500000000000000e-3");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn digest_ignores_output_but_not_parameters() {
        let a = ExperimentConfig { command: "simulate-r".into(), ..Default::default() };
        let b = ExperimentConfig { output: Some("elsewhere".into()), ..a.clone() };
        let c = ExperimentConfig { seed: 8, ..a.clone() };
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(ExperimentConfig::from_json(r#"{"command":"timescale","bogus":1}"#).is_err());
        let cfg = ExperimentConfig::from_json(r#"{"command":"timescale","v1":5}"#).unwrap();
        assert_eq!(cfg.v1, 5.0);
        assert_eq!(cfg.v2, 1.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::from(Error::OverCap { n: 30, cap: 24 }).exit_code(), 2);
        assert_eq!(RunError::from(Error::EmptyBath).exit_code(), 1);
        let cfg = ExperimentConfig { command: "nope".into(), ..Default::default() };
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 1);
    }
}
