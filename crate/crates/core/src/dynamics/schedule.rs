use crate::error::{Error, Result};
use crate::network::{CouplerId, NetworkSpec, NodeKind};
use crate::pulse::{Control, ControlKind};

/// A control driving one coupler during `window`; zero outside it.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub coupler: CouplerId,
    pub control: Control,
    pub window: (f64, f64),
}

impl Assignment {
    pub fn value(&self, t: f64) -> f64 {
        if t < self.window.0 || t > self.window.1 {
            0.0
        } else {
            self.control.value(t)
        }
    }
}

/// Time-ordered controls for one protocol run on `[0, duration]`.
#[derive(Debug, Clone, Default)]
pub struct Schedule {
    pub assignments: Vec<Assignment>,
    /// Separation between consecutive emissions (s); zero for single-shot protocols.
    pub t_s: f64,
    pub duration: f64,
    /// Photon probability cut away by the protocol window, summed over emissions.
    pub truncation_bound: f64,
}

impl Schedule {
    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Checks couplers exist, control kinds fit node kinds, per-coupler windows
    /// do not overlap and the duration covers every window.
    pub fn validate(&self, spec: &NetworkSpec) -> Result<()> {
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::domain("schedule duration must be finite and non-negative"));
        }
        for a in &self.assignments {
            spec.coupler(a.coupler)?;
            let want = match spec.nodes[a.coupler.node].kind {
                NodeKind::QubitResonator => ControlKind::QubitResonatorCoupling,
                NodeKind::QubitDirectDecay => ControlKind::QubitDecayRate,
            };
            if a.control.kind() != want {
                return Err(Error::domain(format!(
                    "coupler {:?} expects a {want:?} control",
                    a.coupler
                )));
            }
            if !(a.window.0 <= a.window.1) {
                return Err(Error::domain("assignment window is reversed"));
            }
            if a.window.1 > self.duration * (1.0 + 1e-12) {
                return Err(Error::domain("assignment window extends past the schedule end"));
            }
        }
        for (i, a) in self.assignments.iter().enumerate() {
            for b in &self.assignments[i + 1..] {
                if a.coupler == b.coupler && a.window.0 < b.window.1 && b.window.0 < a.window.1 {
                    return Err(Error::domain(format!(
                        "overlapping assignments on coupler {:?}",
                        a.coupler
                    )));
                }
            }
        }
        Ok(())
    }

    /// Window edges inside `(0, duration)`, where controls may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .assignments
            .iter()
            .flat_map(|a| [a.window.0, a.window.1])
            .filter(|&t| t > 0.0 && t < self.duration)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}
