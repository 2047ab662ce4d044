//! Browser bindings for the pulse, transfer and star demos. Everything runs
//! in units where `κ = 1`.

use fqst_core::dynamics::{
    integrate_reduced_star, CascadeLink, PortRef, ReducedNetwork,
    ReducedNode, ReducedPort,
};
use fqst_core::ode::Tolerance;
use fqst_core::planner::star_w_fractions;
use fqst_core::pulse::{Channel, ChannelBank, Control, PhotonShape, ShapeKind, Waveform};
use fqst_core::C64;
use std::sync::Arc;
use wasm_bindgen::prelude::*;

const TOL: Tolerance = Tolerance {
    rtol: 1e-9,
    atol: 1e-11,
};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Coupling `g(t)/κ` of an emitter: times in the first half of the result,
/// values in the second.
pub fn pulse_samples_impl(shape: &str, n: f64, eta: f64, points: usize) -> Result<Vec<f64>, String> {
    let kind: ShapeKind = shape.parse().map_err(err)?;
    let shape = PhotonShape::new(kind, 1.0, n, eta, 0.0).map_err(err)?;
    let half = match kind {
        ShapeKind::Lorentzian => 20.0,
        _ => shape.half_window(1e-4).min(40.0),
    };
    let points = points.clamp(2, 20_000);
    let times: Vec<f64> = (0..points)
        .map(|i| -half + 2.0 * half * i as f64 / (points - 1) as f64)
        .collect();
    let values: Vec<f64> = times.iter().map(|&t| shape.coupling(t)).collect();
    Ok([times, values].concat())
}

/// Sender emits `1/n` of its excitation; the receiver runs the time-reversed
/// `n = 1` control. Returns four equal blocks: time, sender population,
/// receiver population and photon flux.
pub fn transfer_curves_impl(n: f64, points: usize) -> Result<Vec<f64>, String> {
    let send = PhotonShape::sech(1.0, n).map_err(err)?;
    let catch = PhotonShape::sech(1.0, 1.0).map_err(err)?;
    let net = ReducedNetwork {
        nodes: vec![
            ReducedNode {
                qubit: C64::new(1.0, 0.0),
                ports: vec![ReducedPort::resonator(1.0, vec![Control::emit(Waveform::Coupling(send), 0.0)])],
            },
            ReducedNode {
                qubit: C64::default(),
                ports: vec![ReducedPort::resonator(1.0, vec![Control::absorb(Waveform::Coupling(catch), 0.0)])],
            },
        ],
        links: vec![CascadeLink {
            from: PortRef { node: 0, port: 0 },
            to: PortRef { node: 1, port: 0 },
            delay: 0.0,
        }],
    };
    let run = net
        .integrate(-15.0, 15.0, points.clamp(2, 20_000), TOL)
        .map_err(err)?;
    let pop = |node: usize| run.qubits[node].iter().map(|q| q.norm_sqr()).collect::<Vec<_>>();
    let flux = run.outputs[0].iter().map(|o| o.norm_sqr()).collect::<Vec<_>>();
    Ok([run.times.clone(), pop(0), pop(1), flux].concat())
}

/// Final qubit populations (emitter first) after a simultaneous star emission
/// that targets a W state over the leaves, or over leaves and emitter.
pub fn star_populations_impl(leaves: usize, include_emitter: bool) -> Result<Vec<f64>, String> {
    if leaves == 0 || leaves > 12 {
        return Err("choose between 1 and 12 leaves".into());
    }
    let plan = star_w_fractions(leaves, include_emitter).map_err(err)?;
    let bank = Arc::new(
        ChannelBank::new(plan.fractions.iter().map(|f| Channel::new(1.0, f.to_f64())).collect())
            .map_err(err)?,
    );
    let catch = PhotonShape::sech(1.0, 1.0).map_err(err)?;
    let emitter = (0..leaves)
        .map(|channel| {
            ReducedPort::resonator(
                1.0,
                vec![Control::emit(Waveform::BankCoupling { bank: bank.clone(), channel }, 0.0)],
            )
        })
        .collect();
    let receivers = (0..leaves)
        .map(|_| ReducedPort::resonator(1.0, vec![Control::absorb(Waveform::Coupling(catch), 0.0)]))
        .collect();
    let run = integrate_reduced_star(emitter, receivers, &vec![0.0; leaves], -20.0, 20.0, 2, TOL)
        .map_err(err)?;
    Ok((0..=leaves).map(|i| run.final_qubit(i).norm_sqr()).collect())
}

#[wasm_bindgen]
pub fn pulse_samples(shape: &str, n: f64, eta: f64, points: usize) -> Result<Vec<f64>, JsError> {
    pulse_samples_impl(shape, n, eta, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn transfer_curves(n: f64, points: usize) -> Result<Vec<f64>, JsError> {
    transfer_curves_impl(n, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn star_populations(leaves: usize, include_emitter: bool) -> Result<Vec<f64>, JsError> {
    star_populations_impl(leaves, include_emitter).map_err(|e| JsError::new(&e))
}
