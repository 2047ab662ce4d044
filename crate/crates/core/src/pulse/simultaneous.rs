//! Controls that split one qubit excitation across several channels at once.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::{self, IntegratorOptions, OdeSystem, Tolerance};

use super::samples::{ControlKind, ControlSamples};
use super::shapes::{logistic_pair, sech};

/// One outgoing channel: bandwidth `κ_j`, fraction `n_j` (`∞` for no transfer)
/// and emission delay `t_j`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Channel {
    pub kappa: f64,
    pub n: f64,
    pub delay: f64,
}

impl Channel {
    pub fn new(kappa: f64, n: f64) -> Self {
        Self {
            kappa,
            n,
            delay: 0.0,
        }
    }

    fn x(&self, t: f64) -> f64 {
        self.kappa * (t - self.delay)
    }

    fn inv_n(&self) -> f64 {
        1.0 / self.n
    }

    /// Sech envelope `|γ_j(t)|` carrying probability `1/n_j`.
    pub fn amplitude(&self, t: f64) -> f64 {
        if self.n.is_infinite() {
            return 0.0;
        }
        (self.kappa / (4.0 * self.n)).sqrt() * sech(0.5 * self.x(t))
    }
}

/// Validated set of simultaneous channels with `Σ 1/n_k ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBank {
    channels: Vec<Channel>,
    inverse_sum: f64,
    deficit: f64,
}

/// Sums of `1/n_k` within this distance of 1 are treated as exactly 1.
const EXHAUST_TOL: f64 = 1e-9;

impl ChannelBank {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::domain("at least one channel is required"));
        }
        for c in &channels {
            if !(c.kappa.is_finite() && c.kappa > 0.0) {
                return Err(Error::domain(format!("channel rate {} must be positive", c.kappa)));
            }
            if c.n.is_nan() || c.n < 1.0 {
                return Err(Error::domain(format!("channel fraction n = {} must be >= 1", c.n)));
            }
            if !c.delay.is_finite() {
                return Err(Error::domain("channel delay must be finite"));
            }
        }
        let inverse_sum: f64 = channels.iter().map(Channel::inv_n).sum();
        if inverse_sum > 1.0 + EXHAUST_TOL {
            return Err(Error::infeasible(
                format!("Σ 1/n_k = {inverse_sum} exceeds 1"),
                Some(1.0),
            ));
        }
        let deficit = if (1.0 - inverse_sum).abs() <= EXHAUST_TOL {
            0.0
        } else {
            1.0 - inverse_sum
        };
        Ok(Self {
            channels,
            inverse_sum,
            deficit,
        })
    }

    /// Equal rates and fractions on every channel, no delays.
    pub fn uniform(count: usize, kappa: f64, n: f64) -> Result<Self> {
        Self::new(vec![Channel::new(kappa, n); count])
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// `Σ 1/n_k`.
    pub fn inverse_sum(&self) -> f64 {
        self.inverse_sum
    }

    /// Emitter population left after all channels finish, `1 - Σ 1/n_k`.
    pub fn final_residual(&self) -> f64 {
        self.deficit
    }

    /// True when every channel shares one bandwidth and no delays are set.
    pub fn is_synchronous(&self) -> bool {
        let c0 = self.channels[0];
        self.channels
            .iter()
            .all(|c| c.kappa == c0.kappa && c.delay == 0.0)
    }

    /// `1 - Σ_k 𝒦_k(t) = (1 - ñ) + Σ_k s_k²/n_k` with `s_k = 1/(1+e^{x_k})`.
    fn resonator_residual(&self, t: f64) -> f64 {
        self.deficit
            + self
                .channels
                .iter()
                .map(|c| {
                    let (s, _) = logistic_pair(c.x(t));
                    s * s * c.inv_n()
                })
                .sum::<f64>()
    }

    /// Ideal emitter population when driving resonators with [`Self::coupling`].
    pub fn emitter_population(&self, t: f64) -> f64 {
        self.resonator_residual(t)
    }

    /// `g_j(t; n)` for channel `j` (rad/s).
    pub fn coupling(&self, j: usize, t: f64) -> f64 {
        let c = self.channels[j];
        if c.n.is_infinite() {
            return 0.0;
        }
        let r = self.resonator_residual(t);
        if r <= 0.0 {
            return 0.0;
        }
        let x = c.x(t);
        // e^{x/2}/(1+e^x)² in overflow-safe form.
        let shape = if x > 0.0 {
            let u = (-x).exp();
            u * u.sqrt() / ((1.0 + u) * (1.0 + u))
        } else {
            let v = x.exp();
            v.sqrt() / ((1.0 + v) * (1.0 + v))
        };
        c.kappa * shape / (c.n * r).sqrt()
    }

    pub fn couplings(&self, t: f64) -> Vec<f64> {
        (0..self.len()).map(|j| self.coupling(j, t)).collect()
    }

    /// Emitter population for direct decay, `1 - Σ_k ∫_{-∞}^t |γ_k|²`.
    pub fn direct_residual(&self, t: f64) -> f64 {
        self.deficit
            + self
                .channels
                .iter()
                .map(|c| logistic_pair(c.x(t)).0 * c.inv_n())
                .sum::<f64>()
    }

    /// Closed-form decay rate `κ_{c,j}(t)` for a synchronous bank.
    pub fn decay_rate(&self, j: usize, t: f64) -> Result<f64> {
        if !self.is_synchronous() {
            return Err(Error::domain(
                "closed-form decay rates need equal bandwidths and no delays; use the ODE route",
            ));
        }
        Ok(self.decay_rate_unchecked(j, t))
    }

    pub(crate) fn decay_rate_unchecked(&self, j: usize, t: f64) -> f64 {
        let c = self.channels[j];
        if c.n.is_infinite() {
            return 0.0;
        }
        let (s, sc) = logistic_pair(c.x(t));
        let den = self.deficit + self.inverse_sum * s;
        if den <= 0.0 {
            return 0.0;
        }
        c.kappa * s * sc / (c.n * den)
    }

    /// Decay rates for every channel at `t`: closed form when synchronous,
    /// otherwise by integrating the emitter-population ODE from the far past.
    pub fn decay_rates(&self, t: f64) -> Result<Vec<f64>> {
        if self.is_synchronous() {
            return Ok((0..self.len())
                .map(|j| self.decay_rate_unchecked(j, t))
                .collect());
        }
        let start = self.earliest_start().min(t - 1e-12 * t.abs().max(1e-30));
        let table = DecayRateTable::solve(self, start, t, 2)?;
        Ok(table
            .channels
            .iter()
            .map(|s| *s.values().last().unwrap())
            .collect())
    }

    /// Earliest time at which any channel still carries more than `1e-12` of its photon.
    pub fn earliest_start(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.delay - (2e12f64).ln() / c.kappa)
            .fold(f64::INFINITY, f64::min)
    }

    /// Latest time by which every channel has emitted all but `1e-12`.
    pub fn latest_end(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.delay + (2e12f64).ln() / c.kappa)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `ẇ = -Σ_k |γ_k(t)|²` for `w = |q|²`; equivalent to the Riccati equation
/// `κ̇₁ = (Σ f_k²)κ₁² + 2κ₁γ̇₁/γ₁` through `κ₁ = γ₁²/w`.
struct EmitterPopulation<'a> {
    bank: &'a ChannelBank,
}

impl OdeSystem for EmitterPopulation<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, t: f64, _y: &[C64], dy: &mut [C64]) {
        let flux: f64 = self
            .bank
            .channels
            .iter()
            .map(|c| c.amplitude(t).powi(2))
            .sum();
        dy[0] = C64::new(-flux, 0.0);
    }
}

/// Decay rates obtained by integrating the emitter-population ODE.
#[derive(Debug, Clone)]
pub struct DecayRateTable {
    pub times: Vec<f64>,
    pub population: Vec<f64>,
    pub channels: Vec<ControlSamples>,
}

impl DecayRateTable {
    /// Integrates from `t_start` (where `w` is initialised from the analytic
    /// tail so that `w(-∞) = 1`) and samples `n_points` uniform times on `[t_start, t_end]`.
    pub fn solve(bank: &ChannelBank, t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !(t_end > t_start) {
            return Err(Error::domain("decay-rate table needs t_end > t_start and >= 2 points"));
        }
        let dt = (t_end - t_start) / (n_points - 1) as f64;
        let times: Vec<f64> = (0..n_points)
            .map(|i| if i + 1 == n_points { t_end } else { t_start + dt * i as f64 })
            .collect();
        let w0 = bank.direct_residual(t_start);
        let opts = IntegratorOptions::with_tol(Tolerance {
            rtol: 1e-12,
            atol: 1e-18,
        });
        let sys = EmitterPopulation { bank };
        let sol = ode::integrate(&sys, t_start, &[C64::new(w0, 0.0)], &times[1..], &opts, |_, _| {})?;
        let mut population = Vec::with_capacity(n_points);
        population.push(w0);
        population.extend(sol.states.iter().map(|y| y[0].re));

        let mut channels = Vec::with_capacity(bank.len());
        for c in &bank.channels {
            let mut values = Vec::with_capacity(n_points);
            for (&t, &w) in times.iter().zip(&population) {
                let g2 = c.amplitude(t).powi(2);
                if w <= 0.0 {
                    if g2 == 0.0 {
                        values.push(0.0);
                        continue;
                    }
                    return Err(Error::Numerical(format!(
                        "emitter population reached {w:e} at t = {t:e} s while still emitting"
                    )));
                }
                values.push(g2 / w);
            }
            channels.push(ControlSamples::new(
                times.clone(),
                values,
                ControlKind::QubitDecayRate,
            )?);
        }
        Ok(Self {
            times,
            population,
            channels,
        })
    }
}

/// `g_j(t; n)` for every channel.
pub fn simultaneous_couplings(t: f64, channels: &[Channel]) -> Result<Vec<f64>> {
    Ok(ChannelBank::new(channels.to_vec())?.couplings(t))
}

/// `κ_{c,j}(t)` for every channel.
pub fn simultaneous_decay_rates(t: f64, channels: &[Channel]) -> Result<Vec<f64>> {
    ChannelBank::new(channels.to_vec())?.decay_rates(t)
}
