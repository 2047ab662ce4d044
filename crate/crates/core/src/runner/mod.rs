//! Configuration, sweeps, calibration and pulse dumps behind the CLI.

mod calibrate;
mod config;
mod pulse_dump;
mod sweep;

pub use calibrate::{run_depletion_calibration, Calibration};
pub use config::{
    MetricsConfig, NetworkConfig, NoiseConfig, NoisePoint, OutputConfig, RunConfig, TimingConfig,
    TopologyKind,
};
pub use pulse_dump::{run_pulse_dump, PulseDump, PulseQuantity};
pub use sweep::{read_rows, run_sweep, write_rows, Protocol, SweepRow, SWEEP_HEADER};

use crate::error::Result;

/// Artifact version stamped on every output row.
pub const VERSION: &str = concat!("fqst-core ", env!("CARGO_PKG_VERSION"));

/// Worker count from `FQST_THREADS`, if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var("FQST_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on,
/// returning results in index order.
pub fn map_ordered<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..n).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
        match thread_limit() {
            Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(run),
                Err(_) => run(),
            },
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
