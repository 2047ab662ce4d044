//! Exact single-excitation dynamics of a network with discretized waveguides.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::network::{End, NetworkSpec, NodeKind};
use crate::ode::{self, IntegratorOptions, OdeSystem, Tolerance};
use crate::C64;

use super::schedule::Schedule;
use super::state::{ExcitationState, Trajectory};

/// Settings for [`integrate_full`].
#[derive(Debug, Clone)]
pub struct FullOptions {
    pub tol: Tolerance,
    /// Extra times (besides the final one) at which to store the state.
    pub checkpoints: Vec<f64>,
    /// Quasistatic frequency shifts added to each qubit's detuning (rad/s).
    pub qubit_shifts: Option<Vec<f64>>,
    /// Fails the run when `|‖ψ‖² - 1|` exceeds this.
    pub max_norm_drift: f64,
}

impl Default for FullOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            checkpoints: Vec::new(),
            qubit_shifts: None,
            max_norm_drift: 1e-8,
        }
    }
}

struct ResonatorLink {
    coupler: usize,
    qubit: usize,
    resonator: usize,
}

struct Port {
    slot: usize,
    /// Coupler whose decay-rate control scales this port, for direct-decay nodes.
    scaled_by: Option<usize>,
}

struct Line {
    offset: usize,
    coupling: Vec<f64>,
    far_sign: Vec<f64>,
    kappa: f64,
    near: Option<Port>,
    far: Option<Port>,
}

struct FullSystem<'a> {
    dim: usize,
    n_qubits: usize,
    qubit_offset: usize,
    diag: Vec<f64>,
    links: Vec<ResonatorLink>,
    lines: Vec<Line>,
    schedule: &'a Schedule,
    /// Assignment indices per flattened coupler.
    coupler_assignments: Vec<Vec<usize>>,
    exposure_scale: f64,
}

impl FullSystem<'_> {
    /// Complex coupling (`g e^{-iφ}`) or decay rate of every coupler at `t`.
    fn controls(&self, t: f64, out: &mut [C64]) {
        for (c, list) in self.coupler_assignments.iter().enumerate() {
            let mut v = C64::default();
            for &ai in list {
                let a = &self.schedule.assignments[ai];
                let x = a.value(t);
                if x != 0.0 {
                    v += C64::from_polar(x, -a.control.phase);
                }
            }
            out[c] = v;
        }
    }
}

thread_local! {
    static SCRATCH: std::cell::RefCell<Vec<C64>> = const { std::cell::RefCell::new(Vec::new()) };
}

impl OdeSystem for FullSystem<'_> {
    fn dim(&self) -> usize {
        self.dim + self.n_qubits
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let mi = C64::new(0.0, -1.0);
        SCRATCH.with(|s| {
            let mut ctl = s.borrow_mut();
            ctl.resize(self.coupler_assignments.len(), C64::default());
            self.controls(t, &mut ctl);

            for i in 0..self.dim {
                dy[i] = mi * self.diag[i] * y[i];
            }
            for l in &self.links {
                let g = ctl[l.coupler];
                if g != C64::default() {
                    dy[l.qubit] += mi * g * y[l.resonator];
                    dy[l.resonator] += mi * g.conj() * y[l.qubit];
                }
            }
            for line in &self.lines {
                let port_amp = |p: &Option<Port>| -> (usize, f64) {
                    match p {
                        None => (usize::MAX, 0.0),
                        Some(p) => {
                            let s = match p.scaled_by {
                                None => 1.0,
                                Some(c) => (ctl[c].re.max(0.0) / line.kappa).sqrt(),
                            };
                            (p.slot, s)
                        }
                    }
                };
                let (a_slot, a_scale) = port_amp(&line.near);
                let (b_slot, b_scale) = port_amp(&line.far);
                let ya = if a_scale != 0.0 { y[a_slot] * a_scale } else { C64::default() };
                let yb = if b_scale != 0.0 { y[b_slot] * b_scale } else { C64::default() };
                let mut sum_a = C64::default();
                let mut sum_b = C64::default();
                let modes = &y[line.offset..line.offset + line.coupling.len()];
                let dmodes = &mut dy[line.offset..line.offset + line.coupling.len()];
                for k in 0..modes.len() {
                    let g = line.coupling[k];
                    let sg = g * line.far_sign[k];
                    dmodes[k] += mi * (ya * g + yb * sg);
                    sum_a += modes[k] * g;
                    sum_b += modes[k] * sg;
                }
                if a_scale != 0.0 {
                    dy[a_slot] += mi * sum_a * a_scale;
                }
                if b_scale != 0.0 {
                    dy[b_slot] += mi * sum_b * b_scale;
                }
            }
        });
        for q in 0..self.n_qubits {
            dy[self.dim + q] =
                C64::new(y[self.qubit_offset + q].norm_sqr() * self.exposure_scale, 0.0);
        }
    }
}

/// Integrates `d|ψ⟩/dt = -iH(t)|ψ⟩` for the whole network under `schedule`.
pub fn integrate_full(
    spec: &NetworkSpec,
    schedule: &Schedule,
    initial: &ExcitationState,
    opts: &FullOptions,
) -> Result<Trajectory> {
    schedule.validate(spec)?;
    let basis = Arc::new(spec.basis());
    if initial.basis().labels() != basis.labels() {
        return Err(Error::domain("initial state basis does not match the network"));
    }
    let n_qubits = spec.qubit_count();
    if let Some(s) = &opts.qubit_shifts {
        if s.len() != n_qubits {
            return Err(Error::domain(format!(
                "{} qubit shifts for {n_qubits} qubits",
                s.len()
            )));
        }
    }

    let dim = basis.len();
    let mut diag = vec![0.0; dim];
    let mut coupler_index = Vec::new();
    let mut flat = 0usize;
    for (i, node) in spec.nodes.iter().enumerate() {
        let shift = opts.qubit_shifts.as_ref().map_or(0.0, |s| s[i]);
        let base = if spec.resonant { 0.0 } else { node.qubit_detuning };
        diag[basis.qubit(i)] = base + node.lamb_shift + shift;
        let mut ids = Vec::new();
        for (slot, c) in node.couplers.iter().enumerate() {
            let id = crate::network::CouplerId { node: i, slot };
            if let Some(r) = basis.resonator(id) {
                diag[r] = if spec.resonant { 0.0 } else { c.resonator_detuning };
            }
            ids.push(flat);
            flat += 1;
        }
        coupler_index.push(ids);
    }
    let flat_of = |id: crate::network::CouplerId| coupler_index[id.node][id.slot];

    let mut coupler_assignments = vec![Vec::new(); flat];
    for (ai, a) in schedule.assignments.iter().enumerate() {
        coupler_assignments[flat_of(a.coupler)].push(ai);
    }

    let mut links = Vec::new();
    for (i, node) in spec.nodes.iter().enumerate() {
        if node.kind == NodeKind::QubitResonator {
            for slot in 0..node.couplers.len() {
                let id = crate::network::CouplerId { node: i, slot };
                links.push(ResonatorLink {
                    coupler: flat_of(id),
                    qubit: basis.qubit(i),
                    resonator: basis.resonator(id).expect("resonator node has resonator slots"),
                });
            }
        }
    }

    let mut lines = Vec::new();
    for (w, wg) in spec.waveguides.iter().enumerate() {
        let modes = wg.modes()?;
        let offset = basis.mode_offset(w);
        for (k, m) in modes.iter().enumerate() {
            diag[offset + k] = m.detuning;
        }
        let port = |end: End| {
            spec.coupler_on(w, end).map(|id| match spec.nodes[id.node].kind {
                NodeKind::QubitResonator => Port {
                    slot: basis.resonator(id).expect("resonator node has resonator slots"),
                    scaled_by: None,
                },
                NodeKind::QubitDirectDecay => Port {
                    slot: basis.qubit(id.node),
                    scaled_by: Some(flat_of(id)),
                },
            })
        };
        lines.push(Line {
            offset,
            coupling: modes.iter().map(|m| m.coupling).collect(),
            far_sign: modes.iter().map(|m| m.far_sign).collect(),
            kappa: wg.decay_rate,
            near: port(End::Near),
            far: port(End::Far),
        });
    }

    let duration = schedule.duration;
    let exposure_scale = if duration > 0.0 { 1.0 / duration } else { 0.0 };
    let sys = FullSystem {
        dim,
        n_qubits,
        qubit_offset: basis.qubit(0),
        diag,
        links,
        lines,
        schedule,
        coupler_assignments,
        exposure_scale,
    };

    let mut y0 = initial.amplitudes().to_vec();
    y0.extend(std::iter::repeat_n(C64::default(), n_qubits));

    let mut stops: Vec<f64> = opts
        .checkpoints
        .iter()
        .copied()
        .filter(|&t| t >= 0.0 && t <= duration)
        .chain(schedule.breakpoints())
        .chain(std::iter::once(duration))
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut population_times = Vec::new();
    let mut populations = Vec::new();
    let q0 = basis.qubit(0);
    let observer = |t: f64, y: &[C64]| {
        population_times.push(t);
        populations.push((0..n_qubits).map(|q| y[q0 + q].norm_sqr()).collect::<Vec<_>>());
    };
    let int_opts = IntegratorOptions {
        tol: opts.tol,
        ..IntegratorOptions::default()
    };
    let sol = if duration > 0.0 {
        ode::integrate(&sys, 0.0, &y0, &stops, &int_opts, observer)?
    } else {
        ode::Solution {
            times: vec![0.0],
            states: vec![y0.clone()],
            accepted: 0,
            rejected: 0,
        }
    };

    let mut keep: Vec<f64> = opts
        .checkpoints
        .iter()
        .copied()
        .filter(|&t| t >= 0.0 && t <= duration)
        .collect();
    keep.push(duration);
    keep.sort_by(f64::total_cmp);
    keep.dedup();

    let norm0 = initial.norm_sqr();
    let mut norm_drift = 0.0f64;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (t, y) in sol.times.iter().zip(&sol.states) {
        let n: f64 = y[..dim].iter().map(|z| z.norm_sqr()).sum();
        norm_drift = norm_drift.max((n - norm0).abs());
        if keep.contains(t) {
            times.push(*t);
            states.push(ExcitationState::new(y[..dim].to_vec(), basis.clone())?);
        }
    }
    if norm_drift > opts.max_norm_drift {
        return Err(Error::Integrator {
            t: duration,
            reason: format!(
                "norm drift {norm_drift:e} exceeds the bound {:e}",
                opts.max_norm_drift
            ),
        });
    }
    let last = sol.states.last().expect("at least one stop");
    let exposure = (0..n_qubits).map(|q| last[dim + q].re * duration).collect();

    Ok(Trajectory {
        times,
        states,
        exposure,
        population_times,
        populations,
        norm_drift,
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
    })
}
