//! Emission and absorption control synthesis.

mod control;
mod purcell;
mod samples;
mod shapes;
mod simultaneous;

pub use control::{Control, Direction, PulseSpec, Waveform};
pub use purcell::{purcell_coupling, purcell_max_kappa, purcell_ratio_bound, PurcellControl};
pub use samples::{time_reverse, ControlKind, ControlSamples};
pub use shapes::{
    asymmetric_absorption_coupling, gaussian_coupling, gaussian_n_min, lorentzian_coupling,
    reduced_bandwidth_coupling, sech_coupling, sech_decay_rate, sech_decay_rate_max, PhotonShape,
    ShapeKind,
};
pub use simultaneous::{
    simultaneous_couplings, simultaneous_decay_rates, Channel, ChannelBank, DecayRateTable,
};
