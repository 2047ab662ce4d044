//! Time-dependent controls as consumed by the dynamics engine.

use std::sync::Arc;

use crate::error::{Error, Result};

use super::purcell::PurcellControl;
use super::samples::{ControlKind, ControlSamples};
use super::shapes::{asymmetric_control, check_asymmetry, PhotonShape, ShapeKind};
use super::simultaneous::ChannelBank;

/// The functional form of a control, relative to its own origin.
#[derive(Debug, Clone)]
pub enum Waveform {
    /// Coupling that emits `shape` from a qubit–resonator node.
    Coupling(PhotonShape),
    /// Direct decay rate that emits `shape` from a bare qubit.
    DecayRate(PhotonShape),
    /// Emission-form control of a node with decay `ηκ` matched to a sech photon of bandwidth `κ`.
    Asymmetric { kappa: f64, eta: f64 },
    Purcell(PurcellControl),
    BankCoupling { bank: Arc<ChannelBank>, channel: usize },
    BankDecayRate { bank: Arc<ChannelBank>, channel: usize },
    Sampled(Arc<ControlSamples>),
}

impl Waveform {
    pub fn asymmetric(kappa: f64, eta: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::domain("rate κ must be positive"));
        }
        check_asymmetry(eta)?;
        Ok(Waveform::Asymmetric { kappa, eta })
    }

    pub fn kind(&self) -> ControlKind {
        match self {
            Waveform::DecayRate(_) | Waveform::BankDecayRate { .. } => ControlKind::QubitDecayRate,
            Waveform::Sampled(s) => s.kind(),
            _ => ControlKind::QubitResonatorCoupling,
        }
    }

    /// Value at time `τ` measured from the waveform's origin.
    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            Waveform::Coupling(s) => s.coupling(tau),
            Waveform::DecayRate(s) => s.decay_rate(tau),
            Waveform::Asymmetric { kappa, eta } => kappa * asymmetric_control(kappa * tau, *eta),
            Waveform::Purcell(p) => p.coupling(tau),
            Waveform::BankCoupling { bank, channel } => bank.coupling(*channel, tau),
            Waveform::BankDecayRate { bank, channel } => bank.decay_rate_unchecked(*channel, tau),
            Waveform::Sampled(s) => s.eval(tau),
        }
    }
}

/// Emission or absorption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Emit,
    Absorb,
}

/// A waveform placed on the protocol clock.
///
/// Emission controls evaluate `f(t - center)`; absorption controls evaluate
/// `f(center - t)`, so an absorber matched to a photon emitted at `t_e` and
/// arriving after `t_d` uses `center = t_e + t_d`.
#[derive(Debug, Clone)]
pub struct Control {
    pub waveform: Waveform,
    pub direction: Direction,
    pub center: f64,
    /// Constant phase `φ` applied as `g e^{-iφ}` (couplings only).
    pub phase: f64,
}

impl Control {
    pub fn emit(waveform: Waveform, center: f64) -> Self {
        Self {
            waveform,
            direction: Direction::Emit,
            center,
            phase: 0.0,
        }
    }

    pub fn absorb(waveform: Waveform, center: f64) -> Self {
        Self {
            waveform,
            direction: Direction::Absorb,
            center,
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn kind(&self) -> ControlKind {
        self.waveform.kind()
    }

    pub fn value(&self, t: f64) -> f64 {
        let tau = match self.direction {
            Direction::Emit => t - self.center,
            Direction::Absorb => self.center - t,
        };
        self.waveform.eval(tau)
    }

    /// Samples the control on `n_points` uniform times over `[t_start, t_end]`.
    pub fn sample(&self, t_start: f64, t_end: f64, n_points: usize) -> Result<ControlSamples> {
        ControlSamples::from_fn(t_start, t_end, n_points, self.kind(), |t| self.value(t))
    }
}

/// User-facing pulse description.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PulseSpec {
    pub shape: PhotonShape,
    pub direction: Direction,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub purcell: Option<f64>,
    #[serde(default)]
    pub channels: Option<Vec<super::simultaneous::Channel>>,
}

impl PulseSpec {
    pub fn emit(shape: PhotonShape) -> Self {
        Self {
            shape,
            direction: Direction::Emit,
            phase: 0.0,
            purcell: None,
            channels: None,
        }
    }

    pub fn absorb(shape: PhotonShape) -> Self {
        Self {
            direction: Direction::Absorb,
            ..Self::emit(shape)
        }
    }

    /// Checks the spec's own invariants.
    pub fn validate(&self) -> Result<()> {
        if self.direction == Direction::Absorb && self.shape.n() != 1.0 {
            return Err(Error::domain(format!(
                "absorption always uses n = 1; got n = {}",
                self.shape.n()
            )));
        }
        if let Some(g_p) = self.purcell {
            if self.shape.kind() != ShapeKind::Sech {
                return Err(Error::domain("Purcell controls are defined for sech photons only"));
            }
            PurcellControl::new(self.shape.kappa(), g_p, self.shape.n())?;
        }
        if let Some(ch) = &self.channels {
            ChannelBank::new(ch.clone())?;
        }
        Ok(())
    }

    /// Builds the qubit–resonator control this spec describes, centred on the
    /// shape's delay. Simultaneous specs yield one control per channel.
    pub fn couplings(&self) -> Result<Vec<Control>> {
        self.validate()?;
        let center = self.shape.delay();
        let base = self.shape.with_delay(0.0);
        let waveforms = if let Some(ch) = &self.channels {
            let bank = Arc::new(ChannelBank::new(ch.clone())?);
            (0..bank.len())
                .map(|channel| Waveform::BankCoupling {
                    bank: bank.clone(),
                    channel,
                })
                .collect()
        } else if let Some(g_p) = self.purcell {
            vec![Waveform::Purcell(PurcellControl::new(base.kappa(), g_p, base.n())?)]
        } else {
            vec![Waveform::Coupling(base)]
        };
        Ok(waveforms
            .into_iter()
            .map(|w| Control {
                waveform: w,
                direction: self.direction,
                center,
                phase: self.phase,
            })
            .collect())
    }

    /// Builds the direct-decay counterpart.
    pub fn decay_rates(&self) -> Result<Vec<Control>> {
        self.validate()?;
        if self.purcell.is_some() {
            return Err(Error::domain("Purcell filters apply to resonator nodes only"));
        }
        let center = self.shape.delay();
        let waveforms = if let Some(ch) = &self.channels {
            let bank = Arc::new(ChannelBank::new(ch.clone())?);
            if !bank.is_synchronous() {
                let table = super::simultaneous::DecayRateTable::solve(
                    &bank,
                    bank.earliest_start(),
                    bank.latest_end(),
                    4001,
                )?;
                table
                    .channels
                    .into_iter()
                    .map(|s| Waveform::Sampled(Arc::new(s)))
                    .collect()
            } else {
                (0..bank.len())
                    .map(|channel| Waveform::BankDecayRate {
                        bank: bank.clone(),
                        channel,
                    })
                    .collect()
            }
        } else {
            vec![Waveform::DecayRate(self.shape.with_delay(0.0))]
        };
        Ok(waveforms
            .into_iter()
            .map(|w| Control {
                waveform: w,
                direction: self.direction,
                center,
                phase: self.phase,
            })
            .collect())
    }
}
