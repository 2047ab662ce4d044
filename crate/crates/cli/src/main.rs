use std::f64::consts::TAU;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fqst_core::planner::PlanKind;
use fqst_core::pulse::{Direction, ShapeKind};
use fqst_core::runner::{
    run_depletion_calibration, run_pulse_dump, run_sweep, Protocol, PulseDump, PulseQuantity,
    RunConfig, TopologyKind,
};

#[derive(Parser)]
#[command(name = "fqst", version, about = "Fractional state transfer and W-state generation in waveguide networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a noise sweep and write the results CSV.
    Simulate(SimulateArgs),
    /// Print a fraction plan and its predicted populations as CSV.
    Plan(PlanArgs),
    /// Sample one control waveform as CSV.
    Pulse(PulseArgs),
    /// Dump the basis map and mode table of a configured network.
    Describe(DescribeArgs),
    /// Estimate the qubit frequency correction with a detuning scan.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        Ok(match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output CSV (overrides the config).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Decay rates in Hz (repeatable; overrides the config).
    #[arg(long = "kappa-hz")]
    kappa_hz: Vec<f64>,
    /// Topologies to run (repeatable; overrides the config).
    #[arg(long, value_enum)]
    topology: Vec<Topo>,
    /// Also write per-realization fidelities here.
    #[arg(long)]
    realizations_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Topo {
    Linear,
    Star,
}

impl From<Topo> for TopologyKind {
    fn from(t: Topo) -> Self {
        match t {
            Topo::Linear => TopologyKind::Linear,
            Topo::Star => TopologyKind::Star,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PlanName {
    Transfer,
    SequentialW,
    Bell,
    EvenSiteW,
    StarW,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, value_enum, default_value = "sequential-w")]
    plan: PlanName,
    /// Chain length, or number of star leaves.
    #[arg(long, default_value_t = 3)]
    size: usize,
    /// Star only: keep a share on the emitter.
    #[arg(long)]
    include_emitter: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Coupling,
    DecayRate,
}

#[derive(Args)]
struct PulseArgs {
    #[arg(long, default_value = "sech")]
    shape: String,
    #[arg(long, default_value_t = 1.0)]
    n: f64,
    /// Decay rate κ in rad/s.
    #[arg(long)]
    kappa: f64,
    /// Bandwidth ratio for `sech_reduced`.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Filter coupling g_p in rad/s for a Purcell-filtered node.
    #[arg(long)]
    purcell_gp: Option<f64>,
    #[arg(long, value_enum, default_value = "coupling")]
    quantity: Quantity,
    #[arg(long)]
    absorb: bool,
    #[arg(long, allow_negative_numbers = true)]
    t_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DescribeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value = "linear")]
    topology: Topo,
    /// Decay rate in Hz; the first configured value when omitted.
    #[arg(long = "kappa-hz")]
    kappa_hz: Option<f64>,
    /// Basis map CSV; stdout when neither output is given.
    #[arg(long)]
    basis: Option<PathBuf>,
    /// Mode table CSV.
    #[arg(long)]
    modes: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long = "kappa-hz")]
    kappa_hz: Option<f64>,
    /// Half-width of the scan in units of κ.
    #[arg(long, default_value_t = 0.04)]
    span: f64,
    #[arg(long, default_value_t = 21)]
    points: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let infeasible = err
                .chain()
                .filter_map(|e| e.downcast_ref::<fqst_core::Error>())
                .any(fqst_core::Error::is_infeasible);
            ExitCode::from(if infeasible { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Plan(a) => plan(a),
        Command::Pulse(a) => pulse(a),
        Command::Describe(a) => describe(a),
        Command::Calibrate(a) => calibrate(a),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = a.config.load()?;
    if let Some(o) = a.output {
        cfg.output.csv = o;
    }
    if let Some(r) = a.realizations {
        cfg.noise.realizations = r;
    }
    if let Some(s) = a.seed {
        cfg.noise.seed = s;
    }
    if !a.kappa_hz.is_empty() {
        cfg.kappa_hz = a.kappa_hz;
    }
    if !a.topology.is_empty() {
        cfg.topologies = a.topology.into_iter().map(Into::into).collect();
    }
    if a.realizations_csv.is_some() {
        cfg.output.realizations_csv = a.realizations_csv;
    }
    cfg.validate()?;
    let rows = run_sweep(&cfg, |row, cached| {
        eprintln!(
            "{}{} κ={:.4e} T1={:e} T2={:e}  F={:.6} ± {:.2e}{}",
            if cached { "[resumed] " } else { "" },
            row.topology.as_str(),
            row.kappa,
            row.t1,
            row.t2,
            row.fidelity,
            row.fidelity_std,
            row.e3f.map(|e| format!("  E3F={e:.6}")).unwrap_or_default(),
        );
    })?;
    eprintln!("{} rows written to {}", rows.len(), cfg.output.csv.display());
    Ok(())
}

fn plan(a: PlanArgs) -> Result<()> {
    let kind = match a.plan {
        PlanName::Transfer => PlanKind::Transfer,
        PlanName::SequentialW => PlanKind::SequentialW { nodes: a.size },
        PlanName::Bell => PlanKind::BellEndpoints { nodes: a.size },
        PlanName::EvenSiteW => PlanKind::EvenSiteW { nodes: a.size },
        PlanName::StarW => PlanKind::StarW {
            leaves: a.size,
            include_emitter: a.include_emitter,
        },
    };
    let plan = kind.build()?;
    let star = matches!(kind, PlanKind::StarW { .. });
    let mut out = io::stdout().lock();
    writeln!(out, "node,n,population,modulus,target")?;
    let moduli = plan.predicted_moduli();
    for (node, pop) in plan.populations.iter().enumerate() {
        // Chains list each node's outgoing fraction, stars each leaf's channel.
        let n = if star {
            node.checked_sub(1).and_then(|j| plan.fractions.get(j))
        } else {
            plan.fractions.get(node)
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            node + 1,
            n.map(ToString::to_string).unwrap_or_default(),
            pop,
            moduli[node],
            plan.targets.contains(&node)
        )?;
    }
    Ok(())
}

fn pulse(a: PulseArgs) -> Result<()> {
    let shape: ShapeKind = a.shape.parse()?;
    let dump = PulseDump {
        shape,
        n: a.n,
        kappa: a.kappa,
        eta: a.eta,
        purcell: a.purcell_gp,
        quantity: match a.quantity {
            Quantity::Coupling => PulseQuantity::Coupling,
            Quantity::DecayRate => PulseQuantity::DecayRate,
        },
        direction: if a.absorb { Direction::Absorb } else { Direction::Emit },
        t_start: a.t_start,
        t_end: a.t_end,
        points: a.points,
    };
    let samples = run_pulse_dump(&dump)?;
    match a.output {
        Some(p) => samples.save_csv(&p)?,
        None => samples.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn describe(a: DescribeArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let kappa = TAU
        * match a.kappa_hz.or_else(|| cfg.kappa_hz.first().copied()) {
            Some(k) => k,
            None => bail!("no decay rate configured"),
        };
    let protocol = Protocol::new(&cfg, a.topology.into(), kappa)?;
    let spec = &protocol.spec;
    if a.basis.is_none() && a.modes.is_none() {
        spec.write_basis_csv(io::stdout().lock())?;
        return Ok(());
    }
    if let Some(p) = &a.basis {
        spec.write_basis_csv(open(p)?)?;
    }
    if let Some(p) = &a.modes {
        spec.write_mode_csv(open(p)?)?;
    }
    Ok(())
}

fn calibrate(a: CalibrateArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let kappa = TAU
        * match a.kappa_hz.or_else(|| cfg.kappa_hz.first().copied()) {
            Some(k) => k,
            None => bail!("no decay rate configured"),
        };
    if a.points < 3 || a.span.is_nan() || a.span <= 0.0 {
        bail!("need --points >= 3 and a positive --span");
    }
    let offsets: Vec<f64> = (0..a.points)
        .map(|i| -a.span + 2.0 * a.span * i as f64 / (a.points - 1) as f64)
        .collect();
    let cal = run_depletion_calibration(&cfg, kappa, &offsets, true)?;
    let mut out = io::stdout().lock();
    writeln!(out, "offset_over_kappa,transfer")?;
    for (o, t) in cal.offsets.iter().zip(&cal.transfer) {
        writeln!(out, "{o},{t}")?;
    }
    eprintln!(
        "{}: best δ/κ = {:.6} (transfer {:.8})",
        cal.method, cal.best_over_kappa, cal.best_transfer
    );
    Ok(())
}
