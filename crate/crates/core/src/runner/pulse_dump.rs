//! Sampled control tables for plotting and inspection.

use crate::error::{Error, Result};
use crate::pulse::{ControlSamples, Direction, PhotonShape, PulseSpec, ShapeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseQuantity {
    /// Qubit–resonator coupling `g(t)`.
    Coupling,
    /// Direct decay rate `κ_c(t)`.
    DecayRate,
}

/// What to sample. Times are in seconds, rates in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseDump {
    pub shape: ShapeKind,
    pub n: f64,
    pub kappa: f64,
    pub eta: f64,
    /// Filter coupling `g_p` for a Purcell-filtered node.
    pub purcell: Option<f64>,
    pub quantity: PulseQuantity,
    pub direction: Direction,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub points: usize,
}

impl PulseDump {
    pub fn new(shape: ShapeKind, n: f64, kappa: f64) -> Self {
        Self {
            shape,
            n,
            kappa,
            eta: 1.0,
            purcell: None,
            quantity: PulseQuantity::Coupling,
            direction: Direction::Emit,
            t_start: None,
            t_end: None,
            points: 2001,
        }
    }
}

/// Samples the requested control. Synthesis errors (for example a Gaussian
/// below `n_min`) pass through unchanged.
pub fn run_pulse_dump(args: &PulseDump) -> Result<ControlSamples> {
    let shape = PhotonShape::new(args.shape, args.kappa, args.n, args.eta, 0.0)?;
    let spec = PulseSpec {
        purcell: args.purcell,
        direction: args.direction,
        ..PulseSpec::emit(shape)
    };
    let controls = match args.quantity {
        PulseQuantity::Coupling => spec.couplings()?,
        PulseQuantity::DecayRate => spec.decay_rates()?,
    };
    let control = controls
        .into_iter()
        .next()
        .ok_or_else(|| Error::domain("pulse spec produced no control"))?;
    let tol = if args.shape == ShapeKind::Lorentzian { 1e-2 } else { 1e-6 };
    let half = shape.half_window(tol);
    let t_start = args.t_start.unwrap_or(-half);
    let t_end = args.t_end.unwrap_or(half);
    if !(t_end > t_start) {
        return Err(Error::domain("pulse window must have t_end > t_start"));
    }
    control.sample(t_start, t_end, args.points.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech_n1_peaks_at_half_kappa() {
        let k = 6.283e7;
        let s = run_pulse_dump(&PulseDump::new(ShapeKind::Sech, 1.0, k)).unwrap();
        let peak = s.values().iter().copied().fold(0.0, f64::max);
        assert!((peak - k / 2.0).abs() < 1e-9 * k);
    }

    #[test]
    fn gaussian_below_threshold_is_infeasible() {
        let err = run_pulse_dump(&PulseDump::new(ShapeKind::Gaussian, 1.0, 1e7)).unwrap_err();
        assert!(err.is_infeasible());
        assert!(err.to_string().contains("n_min"));
    }
}
