//! Markovian node models joined by unidirectional (cascaded) links.
//!
//! A cascade is integrated in retarded time: each node runs on its own clock
//! shifted by the accumulated propagation delay from the sources, which makes
//! the delayed input–output coupling exact without storing history.

use crate::error::{Error, Result};
use crate::ode::{self, IntegratorOptions, OdeSystem, Tolerance};
use crate::pulse::{Control, ControlKind};
use crate::C64;

/// How one port of a node reaches its line.
#[derive(Debug, Clone)]
pub enum PortKind {
    /// Transfer resonator leaking at `κ`, driven by a coupling control.
    Resonator { kappa: f64 },
    /// Qubit leaking directly at the controlled rate `κ_c(t)`.
    Direct,
    /// Resonator → filter (coupling `g_p`) → line at `κ`.
    Purcell { kappa: f64, g_p: f64 },
}

#[derive(Debug, Clone)]
pub struct ReducedPort {
    pub kind: PortKind,
    /// Controls on this port, summed; evaluated on the node's own clock.
    pub controls: Vec<Control>,
}

impl ReducedPort {
    pub fn resonator(kappa: f64, controls: Vec<Control>) -> Self {
        Self {
            kind: PortKind::Resonator { kappa },
            controls,
        }
    }

    pub fn direct(controls: Vec<Control>) -> Self {
        Self {
            kind: PortKind::Direct,
            controls,
        }
    }

    pub fn purcell(kappa: f64, g_p: f64, controls: Vec<Control>) -> Self {
        Self {
            kind: PortKind::Purcell { kappa, g_p },
            controls,
        }
    }

    fn internal_dim(&self) -> usize {
        match self.kind {
            PortKind::Resonator { .. } => 1,
            PortKind::Direct => 0,
            PortKind::Purcell { .. } => 2,
        }
    }

    fn expected_kind(&self) -> ControlKind {
        match self.kind {
            PortKind::Direct => ControlKind::QubitDecayRate,
            _ => ControlKind::QubitResonatorCoupling,
        }
    }

    fn value(&self, t: f64) -> C64 {
        self.controls
            .iter()
            .map(|c| C64::from_polar(c.value(t), -c.phase))
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct ReducedNode {
    pub qubit: C64,
    pub ports: Vec<ReducedPort>,
}

/// `(node, port)` address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortRef {
    pub node: usize,
    pub port: usize,
}

/// The output field of `from` feeds `to` after `delay`.
#[derive(Debug, Clone, Copy)]
pub struct CascadeLink {
    pub from: PortRef,
    pub to: PortRef,
    pub delay: f64,
}

#[derive(Debug, Clone)]
pub struct ReducedNetwork {
    pub nodes: Vec<ReducedNode>,
    pub links: Vec<CascadeLink>,
}

/// Result of a reduced integration. Times are retarded times; node `i`'s lab
/// time is `t + offsets[i]`.
#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub offsets: Vec<f64>,
    pub times: Vec<f64>,
    /// Qubit amplitude per node per sample.
    pub qubits: Vec<Vec<C64>>,
    /// Output field `√κ·(mode amplitude) + input` per port per sample, flattened
    /// by [`ReducedRun::port_index`].
    pub outputs: Vec<Vec<C64>>,
    /// Internal amplitudes (resonator, and filter for Purcell) per port per sample.
    pub internals: Vec<Vec<Vec<C64>>>,
    /// `∫|output|²` per port over the whole run.
    pub emitted: Vec<f64>,
    port_starts: Vec<usize>,
}

impl ReducedRun {
    pub fn port_index(&self, p: PortRef) -> usize {
        self.port_starts[p.node] + p.port
    }

    pub fn final_qubit(&self, node: usize) -> C64 {
        *self.qubits[node].last().expect("at least one sample")
    }

    pub fn emitted_from(&self, p: PortRef) -> f64 {
        self.emitted[self.port_index(p)]
    }
}

struct Layout {
    qubit: Vec<usize>,
    /// First internal slot per flattened port.
    internal: Vec<usize>,
    port_starts: Vec<usize>,
    dim: usize,
    ports: usize,
}

struct ReducedSystem<'a> {
    net: &'a ReducedNetwork,
    layout: Layout,
    offsets: Vec<f64>,
    /// Incoming link source per flattened port.
    input: Vec<Option<usize>>,
    /// Topological order of nodes.
    order: Vec<usize>,
}

impl ReducedSystem<'_> {
    /// Control value and output field of every port, in topological order so
    /// each port's input is already known.
    fn fields(&self, t: f64, y: &[C64], ctl: &mut [C64], out: &mut [C64]) {
        for &n in &self.order {
            let node = &self.net.nodes[n];
            let tn = t + self.offsets[n];
            for (p, port) in node.ports.iter().enumerate() {
                let fp = self.layout.port_starts[n] + p;
                let c = port.value(tn);
                ctl[fp] = c;
                let input = self.input[fp].map_or(C64::default(), |src| out[src]);
                let own = match port.kind {
                    PortKind::Resonator { kappa } => y[self.layout.internal[fp]] * kappa.sqrt(),
                    PortKind::Purcell { kappa, .. } => {
                        y[self.layout.internal[fp] + 1] * kappa.sqrt()
                    }
                    PortKind::Direct => y[self.layout.qubit[n]] * c.re.max(0.0).sqrt(),
                };
                out[fp] = input + own;
            }
        }
    }
}

thread_local! {
    static BUF: std::cell::RefCell<(Vec<C64>, Vec<C64>)> =
        const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

impl OdeSystem for ReducedSystem<'_> {
    fn dim(&self) -> usize {
        self.layout.dim + self.layout.ports
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let mi = C64::new(0.0, -1.0);
        BUF.with(|b| {
            let (ctl, out) = &mut *b.borrow_mut();
            ctl.resize(self.layout.ports, C64::default());
            out.resize(self.layout.ports, C64::default());
            self.fields(t, y, ctl, out);
            dy.iter_mut().for_each(|d| *d = C64::default());
            for (n, node) in self.net.nodes.iter().enumerate() {
                let qi = self.layout.qubit[n];
                for (p, port) in node.ports.iter().enumerate() {
                    let fp = self.layout.port_starts[n] + p;
                    let input = self.input[fp].map_or(C64::default(), |src| out[src]);
                    let c = ctl[fp];
                    match port.kind {
                        PortKind::Resonator { kappa } => {
                            let r = self.layout.internal[fp];
                            dy[qi] += mi * c * y[r];
                            dy[r] += mi * c.conj() * y[qi] - 0.5 * kappa * y[r]
                                - kappa.sqrt() * input;
                        }
                        PortKind::Purcell { kappa, g_p } => {
                            let r = self.layout.internal[fp];
                            let f = r + 1;
                            dy[qi] += mi * c * y[r];
                            dy[r] += mi * c.conj() * y[qi] + mi * g_p * y[f];
                            dy[f] += mi * g_p * y[r] - 0.5 * kappa * y[f] - kappa.sqrt() * input;
                        }
                        PortKind::Direct => {
                            let k = c.re.max(0.0);
                            dy[qi] += -0.5 * k * y[qi] - k.sqrt() * input;
                        }
                    }
                }
            }
            for fp in 0..self.layout.ports {
                dy[self.layout.dim + fp] = C64::new(out[fp].norm_sqr(), 0.0);
            }
        });
    }
}

impl ReducedNetwork {
    fn layout(&self) -> Layout {
        let mut qubit = Vec::new();
        let mut internal = Vec::new();
        let mut port_starts = Vec::new();
        let mut slot = 0;
        let mut ports = 0;
        for node in &self.nodes {
            qubit.push(slot);
            slot += 1;
            port_starts.push(ports);
            for p in &node.ports {
                internal.push(slot);
                slot += p.internal_dim();
                ports += 1;
            }
        }
        Layout {
            qubit,
            internal,
            port_starts,
            dim: slot,
            ports,
        }
    }

    fn check(&self) -> Result<()> {
        for (n, node) in self.nodes.iter().enumerate() {
            for (p, port) in node.ports.iter().enumerate() {
                if let Some(c) = port.controls.iter().find(|c| c.kind() != port.expected_kind()) {
                    return Err(Error::domain(format!(
                        "node {n} port {p} expects {:?} controls, got {:?}",
                        port.expected_kind(),
                        c.kind()
                    )));
                }
            }
        }
        let exists = |r: PortRef| r.node < self.nodes.len() && r.port < self.nodes[r.node].ports.len();
        for l in &self.links {
            if !exists(l.from) || !exists(l.to) || l.from.node == l.to.node {
                return Err(Error::domain(format!("invalid cascade link {l:?}")));
            }
        }
        Ok(())
    }

    /// Integrates on the retarded clock from `t_start` to `t_end`, sampling
    /// `n_samples` uniform times.
    pub fn integrate(
        &self,
        t_start: f64,
        t_end: f64,
        n_samples: usize,
        tol: Tolerance,
    ) -> Result<ReducedRun> {
        self.check()?;
        if !(t_end > t_start) || n_samples < 2 {
            return Err(Error::domain("need t_end > t_start and >= 2 samples"));
        }
        let layout = self.layout();
        let mut input = vec![None; layout.ports];
        for l in &self.links {
            let to = layout.port_starts[l.to.node] + l.to.port;
            if input[to].is_some() {
                return Err(Error::domain("a port may receive from at most one link"));
            }
            input[to] = Some(layout.port_starts[l.from.node] + l.from.port);
        }

        // Clock offsets and a topological order (cascades must be acyclic).
        let n = self.nodes.len();
        let mut offsets = vec![0.0; n];
        let mut indeg = vec![0usize; n];
        for l in &self.links {
            indeg[l.to.node] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(i) = ready.pop() {
            order.push(i);
            for l in self.links.iter().filter(|l| l.from.node == i) {
                offsets[l.to.node] = offsets[i] + l.delay;
                indeg[l.to.node] -= 1;
                if indeg[l.to.node] == 0 {
                    ready.push(l.to.node);
                }
            }
        }
        if order.len() != n {
            return Err(Error::domain("cascade links form a cycle"));
        }

        let sys = ReducedSystem {
            net: self,
            layout,
            offsets: offsets.clone(),
            input,
            order,
        };
        let mut y0 = vec![C64::default(); sys.dim()];
        for (i, node) in self.nodes.iter().enumerate() {
            y0[sys.layout.qubit[i]] = node.qubit;
        }
        let dt = (t_end - t_start) / (n_samples - 1) as f64;
        let times: Vec<f64> = (0..n_samples)
            .map(|i| if i + 1 == n_samples { t_end } else { t_start + dt * i as f64 })
            .collect();
        let sol = ode::integrate(
            &sys,
            t_start,
            &y0,
            &times[1..],
            &IntegratorOptions::with_tol(tol),
            |_, _| {},
        )?;

        let mut states = vec![y0];
        states.extend(sol.states);
        let ports = sys.layout.ports;
        let mut qubits = vec![Vec::with_capacity(n_samples); n];
        let mut outputs = vec![Vec::with_capacity(n_samples); ports];
        let mut internals = vec![Vec::with_capacity(n_samples); ports];
        let mut ctl = vec![C64::default(); ports];
        let mut out = vec![C64::default(); ports];
        for (&t, y) in times.iter().zip(&states) {
            sys.fields(t, y, &mut ctl, &mut out);
            for i in 0..n {
                qubits[i].push(y[sys.layout.qubit[i]]);
            }
            for (node_i, node) in self.nodes.iter().enumerate() {
                for (p, port) in node.ports.iter().enumerate() {
                    let fp = sys.layout.port_starts[node_i] + p;
                    outputs[fp].push(out[fp]);
                    let s = sys.layout.internal[fp];
                    internals[fp].push(y[s..s + port.internal_dim()].to_vec());
                }
            }
        }
        let last = states.last().expect("states are non-empty");
        let emitted = (0..ports)
            .map(|fp| last[sys.layout.dim + fp].re)
            .collect();
        Ok(ReducedRun {
            offsets,
            times,
            qubits,
            outputs,
            internals,
            emitted,
            port_starts: sys.layout.port_starts,
        })
    }
}

/// Single emitting node with one port, starting fully excited.
pub fn integrate_reduced_emitter(
    port: ReducedPort,
    t_start: f64,
    t_end: f64,
    n_samples: usize,
    tol: Tolerance,
) -> Result<ReducedRun> {
    ReducedNetwork {
        nodes: vec![ReducedNode {
            qubit: C64::new(1.0, 0.0),
            ports: vec![port],
        }],
        links: vec![],
    }
    .integrate(t_start, t_end, n_samples, tol)
}

/// Emitter (node 0) with one port per receiver; each receiver (nodes `1..`)
/// absorbs through its single port after `delays[j]`.
pub fn integrate_reduced_star(
    emitter_ports: Vec<ReducedPort>,
    receivers: Vec<ReducedPort>,
    delays: &[f64],
    t_start: f64,
    t_end: f64,
    n_samples: usize,
    tol: Tolerance,
) -> Result<ReducedRun> {
    if emitter_ports.len() != receivers.len() || delays.len() != receivers.len() {
        return Err(Error::domain("one receiver and one delay per emitter port"));
    }
    let mut nodes = vec![ReducedNode {
        qubit: C64::new(1.0, 0.0),
        ports: emitter_ports,
    }];
    let mut links = Vec::new();
    for (j, r) in receivers.into_iter().enumerate() {
        nodes.push(ReducedNode {
            qubit: C64::default(),
            ports: vec![r],
        });
        links.push(CascadeLink {
            from: PortRef { node: 0, port: j },
            to: PortRef { node: j + 1, port: 0 },
            delay: delays[j],
        });
    }
    ReducedNetwork { nodes, links }.integrate(t_start, t_end, n_samples, tol)
}
