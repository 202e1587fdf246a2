//! Decoherence verdicts from trajectories, fluctuation statistics,
//! recurrences, N-scaling sweeps and the `hbar / V` timescale rule.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{expectation, overlap_r, r_squared};
use crate::ensemble::{sample_model, CoeffDist, CouplingDist, UnitStream};
use crate::error::{Error, Result};
use crate::model::{uniform_grid, RelevantObservable, Samples, SpinBathModel, Trajectory, HERMITIAN_TOLERANCE};

/// Reduced Planck constant in eV s (CODATA 2018, exact in SI).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// Default hold window, in units of `1 / mean coupling`.
pub const DEFAULT_WINDOW_UNITS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceVerdict {
    /// Earliest qualifying grid time; `f64::INFINITY` when none exists.
    pub t_d: f64,
    pub threshold: f64,
    pub window: f64,
    /// Largest `|value|` at or after `t_d`. Without a finite `t_d`, the largest
    /// `|value|` at or after `t0 + window`.
    pub sup_late: f64,
    pub decohered: bool,
}

/// Threshold-and-hold decoherence time: the earliest grid time `t*` with
/// `t* + window` inside the trajectory such that every grid point in
/// `[t*, t* + window]` has `|value| <= threshold`.
pub fn decoherence_time(traj: &Trajectory, threshold: f64, window: f64) -> Result<DecoherenceVerdict> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidArgument(format!("window must be positive, got {window}")));
    }
    let times = traj.times();
    let span = match (times.first(), times.last()) {
        (Some(first), Some(last)) => last - first,
        _ => 0.0,
    };
    if 2.0 * window > span {
        return Err(Error::WindowExceedsSpan { window, span });
    }
    let abs = traj.abs_values();
    let n = abs.len();

    // next_bad[i]: first index >= i whose value exceeds the threshold.
    let mut next_bad = vec![n; n + 1];
    for i in (0..n).rev() {
        next_bad[i] = if abs[i] > threshold { i } else { next_bad[i + 1] };
    }

    let t_end = times[n - 1];
    let mut end = 0;
    let mut found = None;
    for i in 0..n {
        if times[i] + window > t_end {
            break;
        }
        while end + 1 < n && times[end + 1] <= times[i] + window {
            end += 1;
        }
        if next_bad[i] > end {
            found = Some(i);
            break;
        }
    }

    let sup_from = |k: usize| abs[k..].iter().copied().fold(0.0, f64::max);
    Ok(match found {
        Some(i) => DecoherenceVerdict { t_d: times[i], threshold, window, sup_late: sup_from(i), decohered: true },
        None => {
            let k = times.partition_point(|&t| t < times[0] + window);
            DecoherenceVerdict { t_d: f64::INFINITY, threshold, window, sup_late: sup_from(k), decohered: false }
        }
    })
}

/// `r(t)` sampled on `times`.
pub fn overlap_trajectory(model: &SpinBathModel, times: Vec<f64>) -> Result<Trajectory> {
    let values: Vec<C64> = times.iter().map(|&t| overlap_r(model, t)).collect();
    Trajectory::new(times, Samples::Complex(values), "r(t)")
}

/// `<O>(t)` sampled on `times`.
pub fn expectation_trajectory(model: &SpinBathModel, obs: &RelevantObservable, times: Vec<f64>) -> Result<Trajectory> {
    let values = times.iter().map(|&t| expectation(model, obs, t)).collect::<Result<Vec<f64>>>()?;
    Trajectory::new(times, Samples::Real(values), "<O>(t)")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluctuationStats {
    pub mean_r2: f64,
    pub predicted_r2: f64,
}

impl FluctuationStats {
    pub fn ratio(&self) -> f64 {
        self.mean_r2 / self.predicted_r2
    }
}

pub const MIN_FLUCTUATION_SAMPLES: usize = 100;

/// Average of `|r(t)|^2` over `samples` uniform random times in
/// `[t_start, t_end]`, against `prod_i (|alpha_i|^4 + |beta_i|^4)`, the time
/// average of each factor when the couplings are incommensurate.
pub fn fluctuation_stats(
    model: &SpinBathModel,
    t_start: f64,
    t_end: f64,
    samples: usize,
    seed: u64,
) -> Result<FluctuationStats> {
    if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
        return Err(Error::DegenerateWindow(t_start, t_end));
    }
    if samples < MIN_FLUCTUATION_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_FLUCTUATION_SAMPLES} samples, got {samples}"
        )));
    }
    let mut rng = UnitStream::new(seed, 0);
    let mean_r2 = (0..samples).map(|_| r_squared(model, rng.next_in(t_start, t_end))).sum::<f64>() / samples as f64;
    let predicted_r2 = model
        .sites()
        .iter()
        .map(|s| s.p_up().powi(2) + s.p_down().powi(2))
        .product();
    Ok(FluctuationStats { mean_r2, predicted_r2 })
}

/// Tolerance on `g_i * T / 2 pi` being an integer.
const COMMENSURATE_TOLERANCE: f64 = 1e-9;

/// `|r(t_rec)|` for a model whose couplings are all integer multiples of
/// `2 pi / t_rec`. A full revival (`|r| = 1`) shows the closed system returns
/// to its initial state.
pub fn recurrence_check(model: &SpinBathModel, t_rec: f64) -> Result<f64> {
    if !(t_rec > 0.0 && t_rec.is_finite()) {
        return Err(Error::InvalidArgument(format!("recurrence time must be positive, got {t_rec}")));
    }
    for (i, s) in model.sites().iter().enumerate() {
        let cycles = s.g * t_rec / TAU;
        if (cycles - cycles.round()).abs() > COMMENSURATE_TOLERANCE || cycles.round() < 1.0 {
            return Err(Error::NotCommensurate { site: i + 1, g: s.g });
        }
    }
    Ok(overlap_r(model, t_rec).norm())
}

/// `|<O>(t) - (|a|^2 s00 + |b|^2 s11)|` for a system-only observable.
pub fn weak_limit_residual(model: &SpinBathModel, obs: &RelevantObservable, t: f64) -> Result<f64> {
    if !obs.sites.iter().all(|e| e.is_identity(HERMITIAN_TOLERANCE)) {
        return Err(Error::NotEidForm);
    }
    let limit = model.a().norm_sqr() * obs.system.d0 + model.b().norm_sqr() * obs.system.d1;
    Ok((expectation(model, obs, t)? - limit).abs())
}

/// Decoherence time estimate `hbar / V` in seconds, `V` in eV.
pub fn timescale_estimate(v_ev: f64) -> Result<f64> {
    if !(v_ev > 0.0 && v_ev.is_finite()) {
        return Err(Error::InvalidArgument(format!("interaction strength must be positive, got {v_ev}")));
    }
    Ok(HBAR_EV_S / v_ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimescaleReport {
    #[serde(rename = "V1_eV")]
    pub v1_ev: f64,
    #[serde(rename = "V2_eV")]
    pub v2_ev: f64,
    #[serde(rename = "t_DS_s")]
    pub t_ds_s: f64,
    #[serde(rename = "t_DU_s")]
    pub t_du_s: f64,
    pub hierarchy_ok: bool,
}

/// `V1` couples the proper system to its environment, `V2` the environment
/// parts among themselves.
pub fn timescale_report(v1_ev: f64, v2_ev: f64) -> Result<TimescaleReport> {
    let t_ds_s = timescale_estimate(v1_ev)?;
    let t_du_s = timescale_estimate(v2_ev)?;
    let hierarchy_ok = v1_ev <= v2_ev || t_ds_s < t_du_s;
    Ok(TimescaleReport { v1_ev, v2_ev, t_ds_s, t_du_s, hierarchy_ok })
}

/// Sweep settings. Times (`t_max`, `window`) are in units of `1 / mean
/// coupling` of each sampled model.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
    pub coeff: CoeffDist,
    pub coupling: CouplingDist,
    pub a: C64,
    pub b: C64,
    pub threshold: f64,
    pub window_units: f64,
    pub t_max_units: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub verdict: DecoherenceVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub n: usize,
    pub median_t_d: f64,
    pub median_sup_late: f64,
    pub decohered: usize,
    pub runs: usize,
}

/// Median of a non-empty slice (mean of the middle pair for even length);
/// `inf` sorts last.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// One verdict on `|r(t)|` per `(N, seed)` cell, rows ordered by `N` then seed.
pub fn n_scaling_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.n_list.is_empty() {
        return Err(Error::InvalidArgument("empty N list".into()));
    }
    if spec.seeds.is_empty() {
        return Err(Error::InvalidArgument("empty seed list".into()));
    }
    let cells: Vec<(usize, u64)> =
        spec.n_list.iter().flat_map(|&n| spec.seeds.iter().map(move |&s| (n, s))).collect();
    cells
        .par_iter()
        .map(|&(n, seed)| {
            let model = sample_model(n, seed, &spec.coeff, &spec.coupling, spec.a, spec.b)?;
            let unit = 1.0 / model.mean_coupling();
            let times = uniform_grid(spec.t_max_units * unit, spec.points)?;
            let traj = overlap_trajectory(&model, times)?;
            let verdict = decoherence_time(&traj, spec.threshold, spec.window_units * unit)?;
            Ok(SweepRow { n, seed, verdict })
        })
        .collect()
}

/// Per-`N` medians over seeds, in `N` order of first appearance.
pub fn summarize_sweep(rows: &[SweepRow]) -> Vec<SweepSummary> {
    let mut ns: Vec<usize> = Vec::new();
    for r in rows {
        if !ns.contains(&r.n) {
            ns.push(r.n);
        }
    }
    ns.into_iter()
        .map(|n| {
            let cell: Vec<&SweepRow> = rows.iter().filter(|r| r.n == n).collect();
            let t_d: Vec<f64> = cell.iter().map(|r| r.verdict.t_d).collect();
            let sup: Vec<f64> = cell.iter().map(|r| r.verdict.sup_late).collect();
            SweepSummary {
                n,
                median_t_d: median(&t_d),
                median_sup_late: median(&sup),
                decohered: cell.iter().filter(|r| r.verdict.decohered).count(),
                runs: cell.len(),
            }
        })
        .collect()
}
