//! Analytic evaluator vs. dense oracle on the same `(model, observable, t)`.

use serde::Serialize;

use crate::analytic::{expectation, overlap_r, reduced_system_state};
use crate::error::Result;
use crate::model::{RelevantObservable, SpinBathModel};
use crate::oracle::{build_initial_with_cap, evolve, oracle_expectation, oracle_overlap_with_cap};

/// Tolerance of the analytic/oracle equivalence.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Largest absolute discrepancies seen, per quantity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Discrepancy {
    pub expectation: f64,
    pub overlap: f64,
    pub reduced_state: f64,
}

impl Discrepancy {
    pub fn max(&self) -> f64 {
        self.expectation.max(self.overlap).max(self.reduced_state)
    }

    pub fn merge(self, other: Discrepancy) -> Discrepancy {
        Discrepancy {
            expectation: self.expectation.max(other.expectation),
            overlap: self.overlap.max(other.overlap),
            reduced_state: self.reduced_state.max(other.reduced_state),
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn compare(
    model: &SpinBathModel,
    obs: &RelevantObservable,
    times: &[f64],
    site_cap: usize,
) -> Result<Discrepancy> {
    let initial = build_initial_with_cap(model, site_cap)?;
    let mut worst = Discrepancy::default();
    for &t in times {
        let state = evolve(&initial, model, t)?;
        let dense_rho = state.partial_trace_system();
        let rho = reduced_system_state(model, t);
        let mut rho_delta: f64 = 0.0;
        for (i, row) in dense_rho.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                rho_delta = rho_delta.max((rho.entry(i, j) - entry).norm());
            }
        }
        worst = worst.merge(Discrepancy {
            expectation: (expectation(model, obs, t)? - oracle_expectation(&state, obs)?).abs(),
            overlap: (overlap_r(model, t) - oracle_overlap_with_cap(model, t, site_cap)?).norm(),
            reduced_state: rho_delta,
        });
    }
    Ok(worst)
}
