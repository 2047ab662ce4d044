//! Fraction schedules for W and Bell states and their executable controls.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::dynamics::{Assignment, Schedule};
use crate::error::{Error, Result};
use crate::network::{End, NetworkSpec, NodeKind, Topology};
use crate::pulse::{Channel, ChannelBank, Control, PhotonShape, Waveform};

/// Exact transfer fraction `n` (the receiver gets `1/n` of the sender's weight).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(pub Ratio<i64>);

impl Fraction {
    pub fn new(num: i64, den: i64) -> Self {
        Self(Ratio::new(num, den))
    }

    pub fn integer(n: i64) -> Self {
        Self(Ratio::from_integer(n))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Share kept by the sender, `(n-1)/n`.
    pub fn kept(self) -> Ratio<i64> {
        (self.0 - 1) / self.0
    }

    /// Share forwarded, `1/n`.
    pub fn passed(self) -> Ratio<i64> {
        self.0.recip()
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlanKind {
    /// Full transfer (`n = 1`) across a two-node chain.
    Transfer,
    /// `W_N` across an `N`-node chain.
    SequentialW { nodes: usize },
    /// Bell pair between the two ends of an `N`-node chain.
    BellEndpoints { nodes: usize },
    /// `W_{N/2}` on the even sites of an `N`-node chain.
    EvenSiteW { nodes: usize },
    /// `W_N` across the `N` leaves of a star, or `W_{N+1}` including the emitter.
    StarW { leaves: usize, include_emitter: bool },
}

impl PlanKind {
    pub fn topology(&self) -> Topology {
        match *self {
            PlanKind::Transfer => Topology::Linear(2),
            PlanKind::SequentialW { nodes }
            | PlanKind::BellEndpoints { nodes }
            | PlanKind::EvenSiteW { nodes } => Topology::Linear(nodes),
            PlanKind::StarW { leaves, .. } => Topology::Star(leaves),
        }
    }

    pub fn build(&self) -> Result<FractionPlan> {
        match *self {
            PlanKind::Transfer => Ok(transfer_plan()),
            PlanKind::SequentialW { nodes } => sequential_w_fractions(nodes),
            PlanKind::BellEndpoints { nodes } => bell_endpoint_fractions(nodes),
            PlanKind::EvenSiteW { nodes } => even_site_w_fractions(nodes),
            PlanKind::StarW {
                leaves,
                include_emitter,
            } => star_w_fractions(leaves, include_emitter),
        }
    }
}

/// Fractions plus the ideal final populations they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionPlan {
    pub kind: PlanKind,
    /// Per hop (linear) or per leaf (star).
    pub fractions: Vec<Fraction>,
    /// Ideal `|q_j|²` for every network qubit, in node order.
    pub populations: Vec<Ratio<i64>>,
    /// Nodes that carry the target state.
    pub targets: Vec<usize>,
}

impl FractionPlan {
    pub fn predicted_moduli(&self) -> Vec<f64> {
        self.populations
            .iter()
            .map(|p| (*p.numer() as f64 / *p.denom() as f64).sqrt())
            .collect()
    }

    /// Weight left outside the qubits (zero for every plan built here).
    pub fn residual(&self) -> Ratio<i64> {
        Ratio::from_integer(1) - self.populations.iter().sum::<Ratio<i64>>()
    }
}

/// Sequential chain populations: node `j` keeps `(n_j-1)/n_j` of what reached it.
fn chain_populations(fractions: &[Fraction]) -> Vec<Ratio<i64>> {
    let mut arriving = Ratio::from_integer(1);
    let mut out = Vec::with_capacity(fractions.len() + 1);
    for f in fractions {
        out.push(arriving * f.kept());
        arriving *= f.passed();
    }
    out.push(arriving);
    out
}

fn check_chain(nodes: usize) -> Result<()> {
    if nodes < 2 {
        return Err(Error::domain(format!("a chain needs at least 2 nodes, got {nodes}")));
    }
    if nodes > 1_000 {
        return Err(Error::domain("chains longer than 1000 nodes are not supported"));
    }
    Ok(())
}

/// One hop with `n = 1`.
pub fn transfer_plan() -> FractionPlan {
    let fractions = vec![Fraction::integer(1)];
    FractionPlan {
        kind: PlanKind::Transfer,
        populations: chain_populations(&fractions),
        fractions,
        targets: vec![1],
    }
}

/// `n_k = (N+1-k)/(N-k)` for `k = 1..N-1`.
pub fn sequential_w_fractions(nodes: usize) -> Result<FractionPlan> {
    check_chain(nodes)?;
    let n = nodes as i64;
    let fractions: Vec<Fraction> = (1..n).map(|k| Fraction::new(n + 1 - k, n - k)).collect();
    Ok(FractionPlan {
        kind: PlanKind::SequentialW { nodes },
        populations: chain_populations(&fractions),
        fractions,
        targets: (0..nodes).collect(),
    })
}

/// `n_1 = 2`, then every later hop forwards everything.
pub fn bell_endpoint_fractions(nodes: usize) -> Result<FractionPlan> {
    check_chain(nodes)?;
    let fractions: Vec<Fraction> = (1..nodes)
        .map(|k| Fraction::integer(if k == 1 { 2 } else { 1 }))
        .collect();
    Ok(FractionPlan {
        kind: PlanKind::BellEndpoints { nodes },
        populations: chain_populations(&fractions),
        fractions,
        targets: vec![0, nodes - 1],
    })
}

/// Odd sites (1-based) forward everything; even site `2j` keeps `2/N` of the
/// total, so `n_{2j} = (N-2j+2)/(N-2j)`.
pub fn even_site_w_fractions(nodes: usize) -> Result<FractionPlan> {
    check_chain(nodes)?;
    if nodes % 2 == 1 || nodes < 4 {
        return Err(Error::domain(format!(
            "even-site W needs an even chain of at least 4 nodes, got {nodes}"
        )));
    }
    let n = nodes as i64;
    let fractions: Vec<Fraction> = (1..n)
        .map(|k| {
            if k % 2 == 1 {
                Fraction::integer(1)
            } else {
                Fraction::new(n - k + 2, n - k)
            }
        })
        .collect();
    Ok(FractionPlan {
        kind: PlanKind::EvenSiteW { nodes },
        populations: chain_populations(&fractions),
        fractions,
        targets: (1..nodes).step_by(2).collect(),
    })
}

/// `n_j = N` for every leaf, or `N + 1` to leave the emitter a share.
pub fn star_w_fractions(leaves: usize, include_emitter: bool) -> Result<FractionPlan> {
    if leaves == 0 {
        return Err(Error::domain("a star needs at least one leaf"));
    }
    let n = leaves as i64 + i64::from(include_emitter);
    let f = Fraction::integer(n);
    let fractions = vec![f; leaves];
    let emitter = Ratio::from_integer(1) - Ratio::new(leaves as i64, n);
    let mut populations = vec![emitter];
    populations.extend(std::iter::repeat_n(f.passed(), leaves));
    let first = usize::from(!include_emitter);
    Ok(FractionPlan {
        kind: PlanKind::StarW {
            leaves,
            include_emitter,
        },
        fractions,
        populations,
        targets: (first..=leaves).collect(),
    })
}

/// Protocol timing, in units of `1/κ`, excluding photon flight time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Timing {
    /// Total control budget; `None` picks 35 for a 3-node chain (scaled by
    /// `N/3` for other lengths) and 14 for a star.
    pub budget: Option<f64>,
    /// Shift of every absorption centre against the nominal arrival (s).
    #[serde(default)]
    pub absorb_offset: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            budget: None,
            absorb_offset: 0.0,
        }
    }
}

impl Timing {
    pub fn budget_for(&self, kind: PlanKind) -> f64 {
        self.budget.unwrap_or(match kind {
            PlanKind::StarW { .. } => 14.0,
            PlanKind::Transfer => 35.0 * 2.0 / 3.0,
            PlanKind::SequentialW { nodes }
            | PlanKind::BellEndpoints { nodes }
            | PlanKind::EvenSiteW { nodes } => 35.0 * nodes as f64 / 3.0,
        })
    }
}

fn emit_waveform(kind: NodeKind, shape: PhotonShape) -> Waveform {
    match kind {
        NodeKind::QubitResonator => Waveform::Coupling(shape),
        NodeKind::QubitDirectDecay => Waveform::DecayRate(shape),
    }
}

/// Turns a plan into sech-shaped controls on `spec`.
///
/// A chain splits the budget into `N` equal segments: the first emission is
/// centred one segment after `t = 0`, each re-emission one segment after the
/// preceding arrival, and the run ends one segment after the last arrival.
/// A star emits on every spoke at once, half the budget after `t = 0`.
/// Every control stays on for the whole run.
pub fn assemble_schedule(plan: &FractionPlan, spec: &NetworkSpec, timing: Timing) -> Result<Schedule> {
    if spec.topology != plan.kind.topology() {
        return Err(Error::domain(format!(
            "plan for {:?} does not fit a {:?} network",
            plan.kind.topology(),
            spec.topology
        )));
    }
    let budget = timing.budget_for(plan.kind);
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::domain("timing budget must be positive"));
    }
    if plan.fractions.is_empty() {
        return Ok(Schedule::default());
    }
    let delays: Vec<f64> = spec
        .waveguides
        .iter()
        .map(|w| w.propagation_delay())
        .collect::<Result<_>>()?;
    let kappas: Vec<f64> = spec.waveguides.iter().map(|w| w.decay_rate).collect();
    let node_kind = |i: usize| spec.nodes[i].kind;
    let coupler = |w: usize, end: End| {
        spec.coupler_on(w, end)
            .ok_or_else(|| Error::domain(format!("no {end:?} coupler on waveguide {w}")))
    };

    let mut raw = Vec::new();
    let mut emissions = Vec::new();
    let duration;
    let mut t_s = 0.0;
    match plan.kind.topology() {
        Topology::Linear(nodes) => {
            let kappa = kappas.iter().copied().fold(f64::INFINITY, f64::min);
            let segment = budget / (nodes as f64 * kappa);
            t_s = segment;
            let mut center = segment;
            for (w, f) in plan.fractions.iter().enumerate() {
                let emitted = PhotonShape::sech(kappas[w], f.to_f64())?;
                let caught = PhotonShape::sech(kappas[w], 1.0)?;
                emissions.push((emitted, center));
                raw.push((
                    coupler(w, End::Near)?,
                    Control::emit(emit_waveform(node_kind(w), emitted), center),
                ));
                let arrival = center + delays[w];
                raw.push((
                    coupler(w, End::Far)?,
                    Control::absorb(
                        emit_waveform(node_kind(w + 1), caught),
                        arrival + timing.absorb_offset,
                    ),
                ));
                center = arrival + segment;
            }
            duration = center;
        }
        Topology::Star(leaves) => {
            let kappa = kappas.iter().copied().fold(f64::INFINITY, f64::min);
            let half = budget / (2.0 * kappa);
            let bank = Arc::new(ChannelBank::new(
                plan.fractions
                    .iter()
                    .zip(&kappas)
                    .map(|(f, &k)| Channel::new(k, f.to_f64()))
                    .collect(),
            )?);
            for (w, f) in plan.fractions.iter().enumerate().take(leaves) {
                let waveform = match node_kind(0) {
                    NodeKind::QubitResonator => Waveform::BankCoupling {
                        bank: bank.clone(),
                        channel: w,
                    },
                    NodeKind::QubitDirectDecay => Waveform::BankDecayRate {
                        bank: bank.clone(),
                        channel: w,
                    },
                };
                emissions.push((PhotonShape::sech(kappas[w], f.to_f64())?, half));
                raw.push((coupler(w, End::Near)?, Control::emit(waveform, half)));
                let caught = PhotonShape::sech(kappas[w], 1.0)?;
                raw.push((
                    coupler(w, End::Far)?,
                    Control::absorb(
                        emit_waveform(node_kind(w + 1), caught),
                        half + delays[w] + timing.absorb_offset,
                    ),
                ));
            }
            let longest = delays.iter().copied().fold(0.0, f64::max);
            duration = 2.0 * half + longest;
        }
    }

    let truncation_bound = emissions
        .iter()
        .map(|(shape, c)| shape.mass_outside(-c, duration - c))
        .sum();
    let schedule = Schedule {
        assignments: raw
            .into_iter()
            .map(|(coupler, control)| Assignment {
                coupler,
                control,
                window: (0.0, duration),
            })
            .collect(),
        t_s,
        duration,
        truncation_bound,
    };
    schedule.validate(spec)?;
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn sequential_fractions_match_the_closed_form() {
        let p = sequential_w_fractions(3).unwrap();
        assert_eq!(p.fractions, vec![Fraction::new(3, 2), Fraction::integer(2)]);
        let p = sequential_w_fractions(5).unwrap();
        assert_eq!(
            p.fractions,
            vec![
                Fraction::new(5, 4),
                Fraction::new(4, 3),
                Fraction::new(3, 2),
                Fraction::integer(2)
            ]
        );
        assert!(p.populations.iter().all(|&q| q == r(1, 5)));
        assert_eq!(p.residual(), r(0, 1));
    }

    #[test]
    fn bell_and_even_site_plans() {
        let p = bell_endpoint_fractions(3).unwrap();
        assert_eq!(p.populations, vec![r(1, 2), r(0, 1), r(1, 2)]);
        let p = even_site_w_fractions(4).unwrap();
        assert_eq!(p.populations, vec![r(0, 1), r(1, 2), r(0, 1), r(1, 2)]);
        assert_eq!(p.targets, vec![1, 3]);
        let p = even_site_w_fractions(8).unwrap();
        for (i, q) in p.populations.iter().enumerate() {
            assert_eq!(*q, if i % 2 == 1 { r(1, 4) } else { r(0, 1) });
        }
        assert!(even_site_w_fractions(2).is_err());
        assert!(even_site_w_fractions(5).is_err());
    }

    #[test]
    fn star_plans() {
        let p = star_w_fractions(3, false).unwrap();
        assert_eq!(p.fractions, vec![Fraction::integer(3); 3]);
        assert_eq!(p.populations[0], r(0, 1));
        let p = star_w_fractions(3, true).unwrap();
        assert!(p.populations.iter().all(|&q| q == r(1, 4)));
        assert_eq!(p.targets, vec![0, 1, 2, 3]);
        let p = star_w_fractions(1, false).unwrap();
        assert_eq!(p.fractions, vec![Fraction::integer(1)]);
    }
}
