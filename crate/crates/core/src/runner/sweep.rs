//! Noise sweeps over topology, `κ`, `T1` and `T2`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use crate::decoherence::{bootstrap, bootstrap_with, ensemble_average, NoiseSpec, ReducedDensityMatrix};
use crate::dynamics::{integrate_full, ExcitationState, FullOptions, Schedule};
use crate::error::{Error, Result};
use crate::metrics::{e3f_mixed, fidelity_at, fidelity_phase_optimized, E3fOptions};
use crate::network::NetworkSpec;
use crate::planner::{assemble_schedule, FractionPlan};
use crate::C64;

use super::config::{NoisePoint, RunConfig, TopologyKind};
use super::{map_ordered, VERSION};

pub const SWEEP_HEADER: [&str; 14] = [
    "topology",
    "kappa_rad_s",
    "T1_s",
    "T2_s",
    "realizations",
    "fidelity",
    "fidelity_std",
    "e3f",
    "e3f_std",
    "phi2",
    "phi3",
    "seed",
    "config_hash",
    "version",
];

/// One grid point's results.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub topology: TopologyKind,
    pub kappa: f64,
    pub t1: f64,
    pub t2: f64,
    pub realizations: usize,
    pub fidelity: f64,
    pub fidelity_std: f64,
    pub e3f: Option<f64>,
    pub e3f_std: Option<f64>,
    pub phi2: f64,
    pub phi3: f64,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

type Key = (String, String, String, String);

impl SweepRow {
    fn key(&self) -> Key {
        point_key(self.topology, self.kappa, self.t1, self.t2)
    }

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.topology.as_str().to_string(),
            self.kappa.to_string(),
            self.t1.to_string(),
            self.t2.to_string(),
            self.realizations.to_string(),
            self.fidelity.to_string(),
            self.fidelity_std.to_string(),
            opt(self.e3f),
            opt(self.e3f_std),
            self.phi2.to_string(),
            self.phi3.to_string(),
            self.seed.to_string(),
            self.config_hash.clone(),
            self.version.clone(),
        ]
    }

    fn parse(rec: &csv::StringRecord) -> Option<Self> {
        let f = |i: usize| rec.get(i)?.parse::<f64>().ok();
        let opt = |i: usize| match rec.get(i) {
            Some("") => Some(None),
            Some(s) => s.parse::<f64>().ok().map(Some),
            None => None,
        };
        Some(Self {
            topology: rec.get(0)?.parse().ok()?,
            kappa: f(1)?,
            t1: f(2)?,
            t2: f(3)?,
            realizations: rec.get(4)?.parse().ok()?,
            fidelity: f(5)?,
            fidelity_std: f(6)?,
            e3f: opt(7)?,
            e3f_std: opt(8)?,
            phi2: f(9)?,
            phi3: f(10)?,
            seed: rec.get(11)?.parse().ok()?,
            config_hash: rec.get(12)?.to_string(),
            version: rec.get(13)?.to_string(),
        })
    }
}

fn point_key(topology: TopologyKind, kappa: f64, t1: f64, t2: f64) -> Key {
    (
        topology.as_str().to_string(),
        kappa.to_string(),
        t1.to_string(),
        t2.to_string(),
    )
}

/// Final amplitudes of one dephasing realization.
#[derive(Debug, Clone)]
struct Realization {
    vacuum: C64,
    qubits: Vec<C64>,
    exposure: Vec<f64>,
}

impl Realization {
    fn relaxed(&self, targets: &[usize], t1: f64) -> Result<ReducedDensityMatrix> {
        let mut u = vec![self.vacuum];
        for &q in targets {
            let damp = if t1.is_infinite() {
                1.0
            } else {
                (-self.exposure[q] / (2.0 * t1)).exp()
            };
            u.push(self.qubits[q] * damp);
        }
        ReducedDensityMatrix::from_partial(targets.to_vec(), &u)
    }
}

/// A ready-to-run protocol: network, plan and schedule.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub topology: TopologyKind,
    pub kappa: f64,
    pub spec: NetworkSpec,
    pub plan: FractionPlan,
    pub schedule: Schedule,
}

impl Protocol {
    pub fn new(cfg: &RunConfig, topology: TopologyKind, kappa: f64) -> Result<Self> {
        let kind = topology.w3_plan();
        let plan = kind.build()?;
        let spec = cfg.network.build(kind, kappa)?;
        let schedule = assemble_schedule(&plan, &spec, cfg.timing.timing(topology))?;
        Ok(Self {
            topology,
            kappa,
            spec,
            plan,
            schedule,
        })
    }

    pub fn initial_state(&self) -> Result<ExcitationState> {
        ExcitationState::qubits(&self.spec, C64::default(), &[(0, C64::new(1.0, 0.0))])
    }

    /// Runs one realization with the given qubit frequency shifts.
    fn realize(&self, tol: crate::ode::Tolerance, shifts: Vec<f64>) -> Result<Realization> {
        let opts = FullOptions {
            tol,
            qubit_shifts: Some(shifts),
            ..FullOptions::default()
        };
        let traj = integrate_full(&self.spec, &self.schedule, &self.initial_state()?, &opts)?;
        let fin = traj.final_state();
        Ok(Realization {
            vacuum: fin.vacuum(),
            qubits: (0..self.spec.qubit_count()).map(|q| fin.qubit(q)).collect(),
            exposure: traj.exposure.clone(),
        })
    }
}

fn realizations(cfg: &RunConfig, protocol: &Protocol, noise: &NoiseSpec) -> Result<Vec<Arc<Realization>>> {
    let n = protocol.spec.qubit_count();
    if noise.is_static() {
        let one = Arc::new(protocol.realize(cfg.tolerance, vec![0.0; n])?);
        return Ok(vec![one; noise.realizations]);
    }
    let runs = map_ordered(noise.realizations, |r| {
        protocol.realize(cfg.tolerance, noise.sample_dephasing(n, r as u64)?)
    })?;
    Ok(runs.into_iter().map(Arc::new).collect())
}

struct PointOutcome {
    row: SweepRow,
    per_realization: Vec<(usize, f64, Option<f64>)>,
}

fn evaluate_point(
    cfg: &RunConfig,
    protocol: &Protocol,
    runs: &[Arc<Realization>],
    point: NoisePoint,
    hash: &str,
) -> Result<PointOutcome> {
    let targets = &protocol.plan.targets;
    let members: Vec<ReducedDensityMatrix> = runs
        .iter()
        .map(|r| r.relaxed(targets, point.t1()))
        .collect::<Result<_>>()?;
    let rho = ensemble_average(&members)?;
    let best = fidelity_phase_optimized(&rho)?;
    let per_f: Vec<f64> = members
        .iter()
        .map(|m| fidelity_at(m, best.phi2, best.phi3))
        .collect::<Result<_>>()?;
    let seed = cfg.noise.seed;
    let fidelity_std = if per_f.len() >= 2 {
        bootstrap(&per_f, cfg.noise.bootstrap_resamples, seed)?.1
    } else {
        0.0
    };
    let quick = E3fOptions {
        restarts: cfg.metrics.e3f_bootstrap_restarts.max(1),
        seed,
        ..E3fOptions::default()
    };
    let (e3f, e3f_std) = if cfg.metrics.e3f {
        let value = e3f_mixed(&rho, &cfg.metrics.e3f_options(seed))?.value;
        let std = if members.len() >= 2 && cfg.metrics.e3f_bootstrap_resamples >= 2 {
            let mut failure = None;
            let (_, s) = bootstrap_with(members.len(), cfg.metrics.e3f_bootstrap_resamples, seed, |idx| {
                let picked: Vec<ReducedDensityMatrix> = idx.iter().map(|&i| members[i].clone()).collect();
                match ensemble_average(&picked).and_then(|r| e3f_mixed(&r, &quick)) {
                    Ok(e) => e.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            s
        } else {
            0.0
        };
        (Some(value), Some(std))
    } else {
        (None, None)
    };
    let per_realization = if cfg.output.realizations_csv.is_some() {
        members
            .iter()
            .zip(&per_f)
            .enumerate()
            .map(|(i, (m, &f))| {
                let e = if cfg.metrics.e3f {
                    Some(e3f_mixed(m, &quick)?.value)
                } else {
                    None
                };
                Ok((i, f, e))
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(PointOutcome {
        row: SweepRow {
            topology: protocol.topology,
            kappa: protocol.kappa,
            t1: point.t1(),
            t2: point.t2(),
            realizations: runs.len(),
            fidelity: best.fidelity,
            fidelity_std,
            e3f,
            e3f_std,
            phi2: best.phi2,
            phi3: best.phi3,
            seed,
            config_hash: hash.to_string(),
            version: VERSION.to_string(),
        },
        per_realization,
    })
}

/// Rows already present in `path` that belong to the config with `hash`.
pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        if let Some(row) = SweepRow::parse(&rec) {
            rows.push(row);
        }
    }
    Ok(rows)
}

fn write_atomically<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut csv::Writer<std::fs::File>) -> std::result::Result<(), csv::Error>,
{
    let tmp = path.with_extension("csv.tmp");
    let csv_err = |e| Error::Csv {
        path: tmp.clone(),
        source: e,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(&tmp).map_err(csv_err)?;
    fill(&mut w).map_err(csv_err)?;
    w.flush().map_err(|e| Error::io(&tmp, e))?;
    drop(w);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_rows(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_atomically(path, |w| {
        w.write_record(SWEEP_HEADER)?;
        rows.iter().try_for_each(|r| w.write_record(r.record()))
    })
}

/// Runs every grid point not already in the output CSV, rewriting the file
/// after each point. Realizations of one `T2` are shared by every `T1` that
/// pairs with it, since relaxation is applied after the dynamics.
pub fn run_sweep<F>(cfg: &RunConfig, mut progress: F) -> Result<Vec<SweepRow>>
where
    F: FnMut(&SweepRow, bool),
{
    cfg.validate()?;
    let hash = cfg.hash();
    let grid = cfg.noise.grid();
    let kappas = cfg.kappas();

    // Every protocol is built up front so infeasible settings fail before any integration.
    let mut protocols = Vec::new();
    for &topology in &cfg.topologies {
        for &kappa in &kappas {
            protocols.push(Protocol::new(cfg, topology, kappa)?);
        }
    }

    let path = cfg.output.csv.as_path();
    let mut done: HashMap<Key, SweepRow> = read_rows(path)?
        .into_iter()
        .filter(|r| r.config_hash == hash)
        .map(|r| (r.key(), r))
        .collect();
    let mut rows = Vec::new();
    let mut per_realization = Vec::new();
    for protocol in &protocols {
        let mut cache: HashMap<u64, Vec<Arc<Realization>>> = HashMap::new();
        for &point in &grid {
            let key = point_key(protocol.topology, protocol.kappa, point.t1(), point.t2());
            if let Some(row) = done.remove(&key) {
                progress(&row, true);
                rows.push(row);
                write_rows(path, &rows)?;
                continue;
            }
            let noise = cfg.noise.spec(point);
            let runs = match cache.get(&point.t2().to_bits()) {
                Some(r) => r.clone(),
                None => {
                    let r = realizations(cfg, protocol, &noise)?;
                    cache.insert(point.t2().to_bits(), r.clone());
                    r
                }
            };
            let outcome = evaluate_point(cfg, protocol, &runs, point, &hash)?;
            progress(&outcome.row, false);
            per_realization.extend(
                outcome
                    .per_realization
                    .into_iter()
                    .map(|p| (outcome.row.clone(), p)),
            );
            rows.push(outcome.row);
            write_rows(path, &rows)?;
        }
    }
    write_rows(path, &rows)?;
    if let Some(p) = &cfg.output.realizations_csv {
        write_atomically(p, |w| {
            w.write_record(["topology", "kappa_rad_s", "T1_s", "T2_s", "realization", "fidelity", "e3f"])?;
            per_realization.iter().try_for_each(|(row, (i, f, e))| {
                w.write_record([
                    row.topology.as_str().to_string(),
                    row.kappa.to_string(),
                    row.t1.to_string(),
                    row.t2.to_string(),
                    i.to_string(),
                    f.to_string(),
                    e.map(|x| x.to_string()).unwrap_or_default(),
                ])
            })
        })?;
    }
    Ok(rows)
}
