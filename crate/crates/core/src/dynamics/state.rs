use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::network::{BasisLabel, BasisMap, NetworkSpec};
use crate::C64;

/// Amplitudes over the vacuum + single-excitation basis of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationState {
    amplitudes: Vec<C64>,
    basis: Arc<BasisMap>,
}

impl ExcitationState {
    pub fn new(amplitudes: Vec<C64>, basis: Arc<BasisMap>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::domain(format!(
                "{} amplitudes for a basis of {} states",
                amplitudes.len(),
                basis.len()
            )));
        }
        Ok(Self { amplitudes, basis })
    }

    /// `α|vac⟩ + Σ_i β_i|1_i⟩` over qubits; must be normalized.
    pub fn qubits(spec: &NetworkSpec, vacuum: C64, excited: &[(usize, C64)]) -> Result<Self> {
        let basis = Arc::new(spec.basis());
        let mut amplitudes = vec![C64::default(); basis.len()];
        amplitudes[basis.vacuum()] = vacuum;
        for &(node, a) in excited {
            if node >= spec.qubit_count() {
                return Err(Error::domain(format!("no qubit {node}")));
            }
            amplitudes[basis.qubit(node)] += a;
        }
        let s = Self { amplitudes, basis };
        if (s.norm_sqr() - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "initial state has norm² {} (must be 1)",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn basis(&self) -> &Arc<BasisMap> {
        &self.basis
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn vacuum(&self) -> C64 {
        self.amplitudes[self.basis.vacuum()]
    }

    pub fn qubit(&self, node: usize) -> C64 {
        self.amplitudes[self.basis.qubit(node)]
    }

    pub fn get(&self, label: BasisLabel) -> Option<C64> {
        self.basis.index_of(label).map(|i| self.amplitudes[i])
    }

    /// Probability outside the vacuum and the listed qubits.
    pub fn population_elsewhere(&self, qubits: &[usize]) -> f64 {
        let kept: f64 = self.vacuum().norm_sqr()
            + qubits.iter().map(|&q| self.qubit(q).norm_sqr()).sum::<f64>();
        (self.norm_sqr() - kept).max(0.0)
    }
}

/// Checkpointed solution of a full-network integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ExcitationState>,
    /// `τ_i = ∫ |q_i(t)|² dt` over the whole protocol, per qubit (s).
    pub exposure: Vec<f64>,
    /// Accepted-step times and per-qubit populations at those times.
    pub population_times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    /// Largest `|‖ψ‖² - 1|` seen at any checkpoint.
    pub norm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &ExcitationState {
        self.states.last().expect("trajectory holds at least the final state")
    }

    /// Writes `t,label,re,im` rows for every checkpoint and basis slot.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "label", "re", "im"])?;
        for (t, s) in self.times.iter().zip(&self.states) {
            for (label, a) in s.basis().labels().iter().zip(s.amplitudes()) {
                w.write_record([t.to_string(), label.to_string(), a.re.to_string(), a.im.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
