//! The elementary two-node fractional transfer.

use crate::error::{Error, Result};
use crate::network::{End, NetworkSpec, NodeKind, WaveguideSpec};
use crate::ode::Tolerance;
use crate::pulse::{Control, PhotonShape, Waveform};
use crate::C64;

use super::full::{integrate_full, FullOptions};
use super::reduced::{CascadeLink, PortRef, ReducedNetwork, ReducedNode, ReducedPort};
use super::schedule::{Assignment, Schedule};
use super::state::ExcitationState;

/// Which model runs the transfer.
#[derive(Debug, Clone)]
pub enum TransferModel {
    /// Cascaded Markovian nodes with resonators leaking at `κ`.
    Reduced { kappa: f64 },
    /// Discretized waveguide between two nodes of the given kind.
    Full { waveguide: WaveguideSpec, kind: NodeKind },
}

/// Final amplitudes on `|00⟩`, `|10⟩` and `|01⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferAmplitudes {
    pub vacuum: C64,
    pub sender: C64,
    pub receiver: C64,
}

/// Time from `t = 0` to the emission centre, and from the arrival to the end.
const SEGMENT: f64 = 35.0 / 3.0;

/// Runs `(α|0⟩ + β|1⟩)|0⟩ → α|00⟩ + β√((n−1)/n)|10⟩ + (β/√n)|01⟩` (up to
/// local phases): the sender emits `1/n` of its excitation and the receiver
/// absorbs it with the time-reversed `n = 1` control.
pub fn two_node_transfer(alpha: C64, beta: C64, n: f64, model: &TransferModel) -> Result<TransferAmplitudes> {
    if ((alpha.norm_sqr() + beta.norm_sqr()) - 1.0).abs() > 1e-10 {
        return Err(Error::domain("need |α|² + |β|² = 1"));
    }
    match model {
        TransferModel::Reduced { kappa } => {
            let send = PhotonShape::sech(*kappa, n)?;
            let catch = PhotonShape::sech(*kappa, 1.0)?;
            let net = ReducedNetwork {
                nodes: vec![
                    ReducedNode {
                        qubit: beta,
                        ports: vec![ReducedPort::resonator(
                            *kappa,
                            vec![Control::emit(Waveform::Coupling(send), 0.0)],
                        )],
                    },
                    ReducedNode {
                        qubit: C64::default(),
                        ports: vec![ReducedPort::resonator(
                            *kappa,
                            vec![Control::absorb(Waveform::Coupling(catch), 0.0)],
                        )],
                    },
                ],
                links: vec![CascadeLink {
                    from: PortRef { node: 0, port: 0 },
                    to: PortRef { node: 1, port: 0 },
                    delay: 0.0,
                }],
            };
            let half = SEGMENT * 2.0 / kappa;
            let run = net.integrate(-half, half, 2, Tolerance::default())?;
            Ok(TransferAmplitudes {
                vacuum: alpha,
                sender: run.final_qubit(0),
                receiver: run.final_qubit(1),
            })
        }
        TransferModel::Full { waveguide, kind } => {
            let spec = NetworkSpec::linear(2, waveguide, *kind)?;
            let kappa = waveguide.decay_rate;
            let t_d = waveguide.propagation_delay()?;
            let center = SEGMENT / kappa;
            let duration = 2.0 * center + t_d;
            let wave = |shape: PhotonShape| match kind {
                NodeKind::QubitResonator => Waveform::Coupling(shape),
                NodeKind::QubitDirectDecay => Waveform::DecayRate(shape),
            };
            let on = |end| {
                spec.coupler_on(0, end)
                    .ok_or_else(|| Error::domain("two-node chain lacks a coupler"))
            };
            let schedule = Schedule {
                assignments: vec![
                    Assignment {
                        coupler: on(End::Near)?,
                        control: Control::emit(wave(PhotonShape::sech(kappa, n)?), center),
                        window: (0.0, duration),
                    },
                    Assignment {
                        coupler: on(End::Far)?,
                        control: Control::absorb(wave(PhotonShape::sech(kappa, 1.0)?), center + t_d),
                        window: (0.0, duration),
                    },
                ],
                t_s: 0.0,
                duration,
                truncation_bound: 0.0,
            };
            let init = ExcitationState::qubits(&spec, alpha, &[(0, beta)])?;
            let traj = integrate_full(&spec, &schedule, &init, &FullOptions::default())?;
            let fin = traj.final_state();
            Ok(TransferAmplitudes {
                vacuum: fin.vacuum(),
                sender: fin.qubit(0),
                receiver: fin.qubit(1),
            })
        }
    }
}
