//! JSON run configuration. Frequencies are given in Hz (`_hz` fields) and
//! converted to rad/s; `null` times mean "infinite".

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decoherence::NoiseSpec;
use crate::error::{Error, Result};
use crate::metrics::E3fOptions;
use crate::network::{NetworkSpec, NodeKind, WaveguideSpec, SPEED_OF_LIGHT, WR90_WIDTH};
use crate::ode::Tolerance;
use crate::planner::{PlanKind, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Linear,
    Star,
}

impl TopologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Linear => "linear",
            TopologyKind::Star => "star",
        }
    }

    /// The W₃ plan each topology runs.
    pub fn w3_plan(self) -> PlanKind {
        match self {
            TopologyKind::Linear => PlanKind::SequentialW { nodes: 3 },
            TopologyKind::Star => PlanKind::StarW {
                leaves: 3,
                include_emitter: false,
            },
        }
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(TopologyKind::Linear),
            "star" => Ok(TopologyKind::Star),
            other => Err(Error::Config(format!("unknown topology `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub node_kind: NodeKind,
    pub mode_count: usize,
    pub length_m: f64,
    pub cross_section_m: f64,
    pub speed_of_light_m_s: f64,
    pub omega_hz: f64,
    /// Lamb-shift correction in units of `κ`.
    pub lamb_shift_over_kappa: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            node_kind: NodeKind::QubitResonator,
            mode_count: 100,
            length_m: 5.0,
            cross_section_m: WR90_WIDTH,
            speed_of_light_m_s: SPEED_OF_LIGHT,
            omega_hz: 8.407e9,
            lamb_shift_over_kappa: 0.0065,
        }
    }
}

impl NetworkConfig {
    pub fn waveguide(&self, kappa: f64) -> WaveguideSpec {
        WaveguideSpec {
            length: self.length_m,
            mode_count: self.mode_count,
            cross_section: self.cross_section_m,
            speed_of_light: self.speed_of_light_m_s,
            center_frequency: TAU * self.omega_hz,
            decay_rate: kappa,
        }
    }

    /// Network for `plan` at rate `κ` (rad/s), Lamb shift applied.
    pub fn build(&self, plan: PlanKind, kappa: f64) -> Result<NetworkSpec> {
        let wg = self.waveguide(kappa);
        let spec = match plan.topology() {
            crate::network::Topology::Linear(n) => NetworkSpec::linear(n, &wg, self.node_kind)?,
            crate::network::Topology::Star(n) => NetworkSpec::star(n, &wg, self.node_kind)?,
        };
        Ok(spec.with_lamb_shift(self.lamb_shift_over_kappa * kappa))
    }
}

/// One `(T1, T2)` point; `None` is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisePoint {
    pub t1_s: Option<f64>,
    pub t2_s: Option<f64>,
}

impl NoisePoint {
    pub fn t1(&self) -> f64 {
        self.t1_s.unwrap_or(f64::INFINITY)
    }

    pub fn t2(&self) -> f64 {
        self.t2_s.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Swept `T2` values; each gets `T1 = t1_over_t2 · T2`.
    pub t2_s: Vec<Option<f64>>,
    pub t1_over_t2: f64,
    /// Extra explicit points appended after the sweep.
    pub points: Vec<NoisePoint>,
    pub realizations: usize,
    pub seed: u64,
    pub bootstrap_resamples: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            t2_s: [1e-6, 2e-6, 5e-6, 1e-5, 2e-5, 5e-5, 1e-4].map(Some).to_vec(),
            t1_over_t2: 2.0,
            points: Vec::new(),
            realizations: 1000,
            seed: 1,
            bootstrap_resamples: 200,
        }
    }
}

impl NoiseConfig {
    pub fn grid(&self) -> Vec<NoisePoint> {
        self.t2_s
            .iter()
            .map(|t2| NoisePoint {
                t1_s: t2.map(|t| t * self.t1_over_t2),
                t2_s: *t2,
            })
            .chain(self.points.iter().copied())
            .collect()
    }

    pub fn spec(&self, p: NoisePoint) -> NoiseSpec {
        NoiseSpec {
            t1: p.t1(),
            t2: p.t2(),
            realizations: self.realizations,
            seed: self.seed,
            bootstrap_resamples: self.bootstrap_resamples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    /// Control budgets in units of `1/κ`, flight time excluded.
    pub linear_budget: f64,
    pub star_budget: f64,
    pub absorb_offset_s: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            linear_budget: 35.0,
            star_budget: 14.0,
            absorb_offset_s: 0.0,
        }
    }
}

impl TimingConfig {
    pub fn timing(&self, topology: TopologyKind) -> Timing {
        Timing {
            budget: Some(match topology {
                TopologyKind::Linear => self.linear_budget,
                TopologyKind::Star => self.star_budget,
            }),
            absorb_offset: self.absorb_offset_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub e3f: bool,
    pub e3f_restarts: usize,
    /// Restarts used inside each bootstrap resample of `E_3F`.
    pub e3f_bootstrap_restarts: usize,
    /// Resamples used for the `E_3F` spread (each costs one minimisation).
    pub e3f_bootstrap_resamples: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            e3f: true,
            e3f_restarts: 32,
            e3f_bootstrap_restarts: 2,
            e3f_bootstrap_resamples: 24,
        }
    }
}

impl MetricsConfig {
    pub fn e3f_options(&self, seed: u64) -> E3fOptions {
        E3fOptions {
            restarts: self.e3f_restarts,
            seed,
            ..E3fOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    /// Optional `topology,kappa_rad_s,T1_s,T2_s,realization,fidelity` dump.
    pub realizations_csv: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv: PathBuf::from("sweep.csv"),
            realizations_csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub topologies: Vec<TopologyKind>,
    pub kappa_hz: Vec<f64>,
    pub network: NetworkConfig,
    pub timing: TimingConfig,
    pub noise: NoiseConfig,
    pub tolerance: Tolerance,
    pub metrics: MetricsConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            topologies: vec![TopologyKind::Linear, TopologyKind::Star],
            kappa_hz: vec![10e6, 50e6],
            network: NetworkConfig::default(),
            timing: TimingConfig::default(),
            noise: NoiseConfig::default(),
            tolerance: Tolerance::default(),
            metrics: MetricsConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let Some(k) = self.kappa_hz.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return bad(format!("kappa_hz entries must be positive, got {k}"));
        }
        if self.noise.realizations == 0 {
            return bad("noise.realizations must be at least 1".into());
        }
        if !(self.noise.t1_over_t2 > 0.0) {
            return bad("noise.t1_over_t2 must be positive".into());
        }
        for p in self.noise.grid() {
            if !(p.t1() > 0.0 && p.t2() > 0.0) {
                return bad(format!("noise times must be positive: {p:?}"));
            }
        }
        if self.noise.bootstrap_resamples < 2 {
            return bad("noise.bootstrap_resamples must be at least 2".into());
        }
        if !(self.tolerance.rtol > 0.0 && self.tolerance.atol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    /// Angular decay rates (rad/s).
    pub fn kappas(&self) -> Vec<f64> {
        self.kappa_hz.iter().map(|k| TAU * k).collect()
    }

    /// Short SHA-256 of the canonical JSON form, output paths excluded.
    pub fn hash(&self) -> String {
        let mut physics = self.clone();
        physics.output = OutputConfig::default();
        let canonical = serde_json::to_string(&physics).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
