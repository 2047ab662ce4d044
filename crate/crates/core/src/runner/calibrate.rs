//! Scan-based estimate of the qubit frequency correction.

use crate::dynamics::{integrate_full, ExcitationState, FullOptions, Schedule};
use crate::error::{Error, Result};
use crate::planner::{assemble_schedule, PlanKind, Timing};
use crate::C64;

use super::config::RunConfig;

/// Result of a detuning scan. This is a transfer-based scan estimator, not a
/// reproduction of any particular laboratory depletion procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub kappa: f64,
    /// Scanned qubit detunings, in units of `κ`.
    pub offsets: Vec<f64>,
    /// Receiver population after an `n = 1` transfer at each offset.
    pub transfer: Vec<f64>,
    /// Parabolic refinement of the best offset, in units of `κ`.
    pub best_over_kappa: f64,
    pub best_transfer: f64,
    pub method: &'static str,
}

/// Scans a common qubit detuning `δ/κ ∈ offsets` on a two-node chain running
/// one `n = 1` transfer and reports the detuning that maximises the
/// delivered population. With `drive = false` no controls are applied, the
/// scan is flat and an error is returned.
pub fn run_depletion_calibration(
    cfg: &RunConfig,
    kappa: f64,
    offsets: &[f64],
    drive: bool,
) -> Result<Calibration> {
    if offsets.len() < 3 {
        return Err(Error::domain("calibration needs at least three scan points"));
    }
    if offsets.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("calibration offsets must increase"));
    }
    let plan_kind = PlanKind::Transfer;
    let mut net = cfg.network.clone();
    net.lamb_shift_over_kappa = 0.0;
    let base = net.build(plan_kind, kappa)?;
    let schedule = if drive {
        let timing = Timing {
            budget: Some(cfg.timing.linear_budget * 2.0 / 3.0),
            absorb_offset: cfg.timing.absorb_offset_s,
        };
        assemble_schedule(&plan_kind.build()?, &base, timing)?
    } else {
        Schedule {
            duration: cfg.timing.linear_budget / kappa,
            ..Schedule::default()
        }
    };
    let transfer = offsets
        .iter()
        .map(|&o| {
            let spec = base.with_lamb_shift(o * kappa);
            let init = ExcitationState::qubits(&spec, C64::default(), &[(0, C64::new(1.0, 0.0))])?;
            let opts = FullOptions {
                tol: cfg.tolerance,
                ..FullOptions::default()
            };
            let traj = integrate_full(&spec, &schedule, &init, &opts)?;
            Ok(traj.final_state().qubit(1).norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (lo, hi) = transfer
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < 1e-9 {
        return Err(Error::Numerical(
            "calibration scan is flat; the emitter is not coupled to the line".into(),
        ));
    }
    let i = transfer
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty scan");
    let (best, best_transfer) = if i == 0 || i + 1 == offsets.len() {
        (offsets[i], transfer[i])
    } else {
        let (x0, x1, x2) = (offsets[i - 1], offsets[i], offsets[i + 1]);
        let (y0, y1, y2) = (transfer[i - 1], transfer[i], transfer[i + 1]);
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let curv = (d12 - d01) / (x2 - x0);
        if curv < 0.0 {
            let x = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
            let y = y1 + d01 * (x - x1) + curv * (x - x0) * (x - x1);
            (x, y.max(y1))
        } else {
            (x1, y1)
        }
    };
    Ok(Calibration {
        kappa,
        offsets: offsets.to_vec(),
        transfer,
        best_over_kappa: best,
        best_transfer,
        method: "transfer-based detuning scan",
    })
}
