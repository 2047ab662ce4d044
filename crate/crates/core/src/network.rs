//! Linear and star networks of nodes joined by discretized waveguides.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Broad-wall width of a WR90 rectangular waveguide (m).
pub const WR90_WIDTH: f64 = 0.022_86;

/// One waveguide discretized into standing modes `k_m = mπ/L`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WaveguideSpec {
    /// Length `L` (m).
    pub length: f64,
    pub mode_count: usize,
    /// Cross-section `l_c` (m) setting the cutoff `cπ/l_c`.
    pub cross_section: f64,
    pub speed_of_light: f64,
    /// Carrier `ω` (rad/s); the simulation frame rotates at this frequency.
    pub center_frequency: f64,
    /// Resonator leakage `κ` into the line (rad/s).
    pub decay_rate: f64,
}

/// A discretized waveguide mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub m: u64,
    /// Wavenumber (1/m).
    pub k: f64,
    /// Lab-frame frequency `Ω_k` (rad/s).
    pub omega: f64,
    /// `Ω_k - ω` (rad/s).
    pub detuning: f64,
    /// Coupling `G_k` to a port at the near end (rad/s).
    pub coupling: f64,
    /// `(-1)^m`, the coupling sign at the far end.
    pub far_sign: f64,
}

impl WaveguideSpec {
    /// WR90 line of the given length carrying `ω` with leakage `κ`.
    pub fn wr90(length: f64, mode_count: usize, omega: f64, kappa: f64) -> Self {
        Self {
            length,
            mode_count,
            cross_section: WR90_WIDTH,
            speed_of_light: SPEED_OF_LIGHT,
            center_frequency: omega,
            decay_rate: kappa,
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.length) && pos(self.cross_section) && pos(self.speed_of_light)) {
            return Err(Error::domain("waveguide length, cross-section and c must be positive"));
        }
        if !pos(self.decay_rate) {
            return Err(Error::domain("waveguide decay rate κ must be positive"));
        }
        if self.mode_count == 0 {
            return Err(Error::domain("waveguide needs at least one mode"));
        }
        if !(self.center_frequency > self.cutoff()) {
            return Err(Error::domain(format!(
                "carrier {:e} rad/s is not above the cutoff {:e} rad/s",
                self.center_frequency,
                self.cutoff()
            )));
        }
        Ok(())
    }

    /// Cutoff `cπ/l_c` (rad/s).
    pub fn cutoff(&self) -> f64 {
        self.speed_of_light * std::f64::consts::PI / self.cross_section
    }

    /// `Ω(k) = c√((π/l_c)² + k²)`.
    pub fn dispersion(&self, k: f64) -> f64 {
        let kc = std::f64::consts::PI / self.cross_section;
        self.speed_of_light * (kc * kc + k * k).sqrt()
    }

    fn k_of(&self, omega: f64) -> f64 {
        let wc = self.cutoff();
        (omega * omega - wc * wc).sqrt() / self.speed_of_light
    }

    /// Index of the standing mode nearest the carrier.
    fn nearest_mode(&self) -> u64 {
        let m = self.k_of(self.center_frequency) * self.length / std::f64::consts::PI;
        let lo = m.floor().max(1.0) as u64;
        let hi = lo + 1;
        let d = |m: u64| (self.mode_frequency(m) - self.center_frequency).abs();
        if d(hi) < d(lo) {
            hi
        } else {
            lo
        }
    }

    fn mode_frequency(&self, m: u64) -> f64 {
        self.dispersion(m as f64 * std::f64::consts::PI / self.length)
    }

    /// Group velocity `dΩ/dk = c²k/Ω` at the mode nearest the carrier (m/s).
    pub fn group_velocity(&self) -> Result<f64> {
        self.validate()?;
        let m = self.nearest_mode();
        let k = m as f64 * std::f64::consts::PI / self.length;
        Ok(self.speed_of_light.powi(2) * k / self.dispersion(k))
    }

    /// Time for a wavepacket to cross the line, `L/v_g` (s).
    pub fn propagation_delay(&self) -> Result<f64> {
        Ok(self.length / self.group_velocity()?)
    }

    /// The `mode_count` consecutive modes whose frequencies lie nearest `ω`.
    pub fn modes(&self) -> Result<Vec<Mode>> {
        self.validate()?;
        let v_g = self.group_velocity()?;
        let n = self.mode_count as u64;
        let center = self.nearest_mode();
        // Symmetric block around the nearest mode; for even counts the extra
        // mode goes on whichever side is closer to ω.
        let mut lo = center.saturating_sub((n - 1) / 2).max(1);
        if n.is_multiple_of(2) && lo > 1 {
            let below = self.center_frequency - self.mode_frequency(lo - 1);
            let above = self.mode_frequency(lo + n - 1) - self.center_frequency;
            if below < above {
                lo -= 1;
            }
        }
        let (w, l, kappa) = (self.center_frequency, self.length, self.decay_rate);
        let modes: Vec<Mode> = (lo..lo + n)
            .map(|m| {
                let k = m as f64 * std::f64::consts::PI / l;
                let omega = self.dispersion(k);
                Mode {
                    m,
                    k,
                    omega,
                    detuning: omega - w,
                    coupling: (kappa * v_g * omega / (2.0 * w * l)).sqrt(),
                    far_sign: if m % 2 == 0 { 1.0 } else { -1.0 },
                }
            })
            .collect();
        Ok(modes)
    }
}

/// How a node talks to its waveguides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Qubit coupled by `g(t)` to one transfer resonator per waveguide.
    QubitResonator,
    /// Qubit leaking directly into each waveguide at a controlled rate `κ_c(t)`.
    QubitDirectDecay,
}

/// Which coupler of a node a slot is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// The only coupler of an end or leaf node.
    Single,
    Left,
    Right,
    /// Emitter coupler toward spoke `i`.
    Spoke(usize),
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Single => Ok(()),
            Side::Left => write!(f, ".L"),
            Side::Right => write!(f, ".R"),
            Side::Spoke(i) => write!(f, ".{}", i + 1),
        }
    }
}

/// Which end of a waveguide a coupler attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    /// Mode couplings carry sign `+1`.
    Near,
    /// Mode couplings carry the parity sign `(-1)^m`.
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerSlot {
    pub side: Side,
    pub waveguide: usize,
    pub end: End,
    /// Resonator detuning from `ω` (unused for direct-decay nodes).
    pub resonator_detuning: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub kind: NodeKind,
    /// Qubit detuning from `ω` before the Lamb-shift correction (rad/s).
    pub qubit_detuning: f64,
    pub lamb_shift: f64,
    pub couplers: Vec<CouplerSlot>,
}

impl NodeSpec {
    /// Detuning actually used in the Hamiltonian.
    pub fn effective_qubit_detuning(&self) -> f64 {
        self.qubit_detuning + self.lamb_shift
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum Topology {
    Linear(usize),
    Star(usize),
}

/// Identifies one coupler: `slot` indexes `nodes[node].couplers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CouplerId {
    pub node: usize,
    pub slot: usize,
}

/// Label of one amplitude in the single-excitation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    Vacuum,
    Qubit(usize),
    Resonator { node: usize, side: Side },
    Mode { waveguide: usize, index: usize },
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Vacuum => write!(f, "vac"),
            BasisLabel::Qubit(i) => write!(f, "q{}", i + 1),
            BasisLabel::Resonator { node, side } => write!(f, "c{}{}", node + 1, side),
            BasisLabel::Mode { waveguide, index } => write!(f, "psi{}.{}", waveguide + 1, index),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub topology: Topology,
    pub nodes: Vec<NodeSpec>,
    pub waveguides: Vec<WaveguideSpec>,
    /// Forces every qubit and resonator onto the carrier (zero detuning).
    pub resonant: bool,
}

impl NetworkSpec {
    /// Chain of `n_nodes` with one waveguide between neighbours. End nodes have
    /// a single coupler; interior nodes have left and right couplers.
    pub fn linear(n_nodes: usize, waveguide: &WaveguideSpec, kind: NodeKind) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::domain(format!("a linear network needs >= 2 nodes, got {n_nodes}")));
        }
        waveguide.validate()?;
        let nodes = (0..n_nodes)
            .map(|i| {
                let mut couplers = Vec::new();
                let interior = i > 0 && i + 1 < n_nodes;
                if i > 0 {
                    couplers.push(CouplerSlot {
                        side: if interior { Side::Left } else { Side::Single },
                        waveguide: i - 1,
                        end: End::Far,
                        resonator_detuning: 0.0,
                    });
                }
                if i + 1 < n_nodes {
                    couplers.push(CouplerSlot {
                        side: if interior { Side::Right } else { Side::Single },
                        waveguide: i,
                        end: End::Near,
                        resonator_detuning: 0.0,
                    });
                }
                NodeSpec {
                    kind,
                    qubit_detuning: 0.0,
                    lamb_shift: 0.0,
                    couplers,
                }
            })
            .collect();
        Ok(Self {
            topology: Topology::Linear(n_nodes),
            nodes,
            waveguides: vec![*waveguide; n_nodes - 1],
            resonant: true,
        })
    }

    /// Emitter (node 0) joined to `n_spokes` leaves by one waveguide each.
    pub fn star(n_spokes: usize, waveguide: &WaveguideSpec, kind: NodeKind) -> Result<Self> {
        if n_spokes < 1 {
            return Err(Error::domain("a star network needs >= 1 spoke"));
        }
        waveguide.validate()?;
        let single = n_spokes == 1;
        let mut nodes = vec![NodeSpec {
            kind,
            qubit_detuning: 0.0,
            lamb_shift: 0.0,
            couplers: (0..n_spokes)
                .map(|i| CouplerSlot {
                    side: if single { Side::Single } else { Side::Spoke(i) },
                    waveguide: i,
                    end: End::Near,
                    resonator_detuning: 0.0,
                })
                .collect(),
        }];
        nodes.extend((0..n_spokes).map(|i| NodeSpec {
            kind,
            qubit_detuning: 0.0,
            lamb_shift: 0.0,
            couplers: vec![CouplerSlot {
                side: Side::Single,
                waveguide: i,
                end: End::Far,
                resonator_detuning: 0.0,
            }],
        }));
        Ok(Self {
            topology: Topology::Star(n_spokes),
            nodes,
            waveguides: vec![*waveguide; n_spokes],
            resonant: true,
        })
    }

    /// Returns a copy with every qubit shifted by `δ_LS`.
    pub fn with_lamb_shift(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.lamb_shift += delta;
        }
        out
    }

    pub fn qubit_count(&self) -> usize {
        self.nodes.len()
    }

    /// The coupler at the given end of waveguide `w`.
    pub fn coupler_on(&self, w: usize, end: End) -> Option<CouplerId> {
        self.nodes.iter().enumerate().find_map(|(node, n)| {
            n.couplers
                .iter()
                .position(|c| c.waveguide == w && c.end == end)
                .map(|slot| CouplerId { node, slot })
        })
    }

    pub fn coupler(&self, id: CouplerId) -> Result<&CouplerSlot> {
        self.nodes
            .get(id.node)
            .and_then(|n| n.couplers.get(id.slot))
            .ok_or_else(|| Error::domain(format!("no coupler {id:?}")))
    }

    /// Basis layout: vacuum, qubits, resonators, then waveguide modes.
    pub fn basis(&self) -> BasisMap {
        let mut labels = vec![BasisLabel::Vacuum];
        labels.extend((0..self.nodes.len()).map(BasisLabel::Qubit));
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind == NodeKind::QubitResonator {
                labels.extend(node.couplers.iter().map(|c| BasisLabel::Resonator {
                    node: i,
                    side: c.side,
                }));
            }
        }
        for (w, wg) in self.waveguides.iter().enumerate() {
            labels.extend((0..wg.mode_count).map(|index| BasisLabel::Mode { waveguide: w, index }));
        }
        BasisMap::new(labels, self)
    }

    /// Writes `index,label` for every basis slot.
    pub fn write_basis_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "label"])?;
        for (i, l) in self.basis().labels().iter().enumerate() {
            w.write_record([i.to_string(), l.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the mode table of every waveguide.
    pub fn write_mode_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Config(format!("writing mode table: {e}"));
        w.write_record([
            "waveguide",
            "index",
            "m",
            "k_per_m",
            "omega_rad_s",
            "detuning_rad_s",
            "coupling_rad_s",
            "far_sign",
        ])
        .map_err(csv_err)?;
        for (wi, wg) in self.waveguides.iter().enumerate() {
            for (i, m) in wg.modes()?.iter().enumerate() {
                w.write_record([
                    (wi + 1).to_string(),
                    i.to_string(),
                    m.m.to_string(),
                    m.k.to_string(),
                    m.omega.to_string(),
                    m.detuning.to_string(),
                    m.coupling.to_string(),
                    m.far_sign.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::Config(format!("writing mode table: {e}")))?;
        Ok(())
    }
}

/// Bijection between basis labels and amplitude slots.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMap {
    labels: Vec<BasisLabel>,
    qubit_offset: usize,
    resonator_slots: Vec<Vec<Option<usize>>>,
    mode_offsets: Vec<usize>,
}

impl BasisMap {
    fn new(labels: Vec<BasisLabel>, spec: &NetworkSpec) -> Self {
        let mut resonator_slots: Vec<Vec<Option<usize>>> = spec
            .nodes
            .iter()
            .map(|n| vec![None; n.couplers.len()])
            .collect();
        let mut mode_offsets = vec![usize::MAX; spec.waveguides.len()];
        for (i, l) in labels.iter().enumerate() {
            match *l {
                BasisLabel::Resonator { node, side } => {
                    let slot = spec.nodes[node]
                        .couplers
                        .iter()
                        .position(|c| c.side == side)
                        .expect("resonator label refers to an existing coupler");
                    resonator_slots[node][slot] = Some(i);
                }
                BasisLabel::Mode { waveguide, index: 0 } => mode_offsets[waveguide] = i,
                _ => {}
            }
        }
        Self {
            labels,
            qubit_offset: 1,
            resonator_slots,
            mode_offsets,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn vacuum(&self) -> usize {
        0
    }

    pub fn qubit(&self, node: usize) -> usize {
        self.qubit_offset + node
    }

    /// Slot of the resonator behind a coupler, `None` for direct-decay nodes.
    pub fn resonator(&self, id: CouplerId) -> Option<usize> {
        self.resonator_slots
            .get(id.node)
            .and_then(|v| v.get(id.slot))
            .copied()
            .flatten()
    }

    pub fn mode_offset(&self, waveguide: usize) -> usize {
        self.mode_offsets[waveguide]
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }
}
