//! Closed-form emission controls for the four photon families.
//!
//! Every control is written in terms of the dimensionless time `x = κt` and
//! evaluated through `e^{-|x|}` so that nothing overflows for large `|x|`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Photon envelope family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sech,
    Lorentzian,
    Gaussian,
    SechReduced,
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sech" => Ok(ShapeKind::Sech),
            "lorentzian" => Ok(ShapeKind::Lorentzian),
            "gaussian" => Ok(ShapeKind::Gaussian),
            "sech_reduced" | "sech-reduced" | "reduced" => Ok(ShapeKind::SechReduced),
            other => Err(Error::domain(format!("unknown photon shape `{other}`"))),
        }
    }
}

/// `(s, 1 - s)` with `s = 1/(1 + e^x)`, both to full relative precision.
#[inline]
pub(crate) fn logistic_pair(x: f64) -> (f64, f64) {
    if x > 0.0 {
        let u = (-x).exp();
        (u / (1.0 + u), 1.0 / (1.0 + u))
    } else {
        let v = x.exp();
        (1.0 / (1.0 + v), v / (1.0 + v))
    }
}

/// `sech(y)` without overflow.
#[inline]
pub(crate) fn sech(y: f64) -> f64 {
    let u = (-2.0 * y.abs()).exp();
    2.0 * (-y.abs()).exp() / (1.0 + u)
}

/// `1 - tanh(y)` without cancellation for large positive `y`.
#[inline]
pub(crate) fn one_minus_tanh(y: f64) -> f64 {
    if y > 0.0 {
        let u = (-2.0 * y).exp();
        2.0 * u / (1.0 + u)
    } else {
        2.0 / (1.0 + (2.0 * y).exp())
    }
}

fn check_fraction(n: f64) -> Result<()> {
    if n.is_nan() || n < 1.0 {
        return Err(Error::domain(format!("fraction n = {n} must satisfy n >= 1")));
    }
    Ok(())
}

fn check_rate(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::domain(format!("rate {kappa} must be finite and positive")));
    }
    Ok(())
}

/// Sech emission control `g(x; n)/κ`.
pub(crate) fn sech_control(x: f64, n: f64) -> f64 {
    if x > 0.0 {
        let u = (-x).exp();
        let root = ((n - 1.0) * (1.0 + u) * (1.0 + u) + u * u).sqrt();
        u * u.sqrt() / ((1.0 + u) * root)
    } else {
        let v = x.exp();
        let root = ((n - 1.0) * (1.0 + v) * (1.0 + v) + 1.0).sqrt();
        v.sqrt() / ((1.0 + v) * root)
    }
}

/// Direct-decay rate `κ_c(x; n)/κ` for a sech photon.
pub(crate) fn sech_rate(x: f64, n: f64) -> f64 {
    if x > 0.0 {
        let u = (-x).exp();
        u / ((1.0 + u) * ((n - 1.0) + n * u))
    } else {
        let v = x.exp();
        v / ((1.0 + v) * (n + (n - 1.0) * v))
    }
}

/// Lorentzian emission control `g(x; n)/κ` (non-negative, zero at `x = 1`).
pub(crate) fn lorentzian_control(x: f64, n: f64) -> f64 {
    let q = lorentzian_residual_scaled(x, n);
    let w = 1.0 + x * x;
    (x - 1.0) * (x - 1.0) / (2.0 * w * q.sqrt())
}

/// `nπ(1+x²)|q|² = (1+x²)(nπ - π/2 - atan x) - 1`, evaluated stably.
fn lorentzian_residual_scaled(x: f64, n: f64) -> f64 {
    let w = 1.0 + x * x;
    if x > 1.0 {
        // π/2 - atan x = atan(1/x); expand (1+x²)atan(1/x) - 1 to avoid cancellation.
        let tail = w * (n - 1.0) * PI;
        let r = 1.0 / x;
        tail + w * r.atan() - 1.0
    } else {
        w * (n * PI - FRAC_PI_2 - x.atan()) - 1.0
    }
}

/// Gaussian threshold `n_min = (1 + 2/(e^{1/4}√π) + erf(1/2))/2`.
pub fn gaussian_n_min() -> f64 {
    0.5 * (1.0 + 2.0 / ((0.25f64).exp() * PI.sqrt()) + libm::erf(0.5))
}

/// `8e^{-1/4} ∫_0^u s e^{-s-s²} ds` by its Taylor series (valid for |u| ≤ 1/2).
fn gaussian_gap_series(u: f64) -> f64 {
    // e^{-s-s²} = Σ a_k s^k with (k+1)a_{k+1} = -a_k - 2a_{k-1}.
    let mut a_prev = 0.0;
    let mut a = 1.0;
    let mut pow = u * u;
    let mut sum = 0.0;
    for k in 0..60 {
        let term = a * pow / (k as f64 + 2.0);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() && k > 4 {
            break;
        }
        let next = (-a - 2.0 * a_prev) / (k as f64 + 1.0);
        a_prev = a;
        a = next;
        pow *= u;
    }
    8.0 * (-0.25f64).exp() * sum
}

/// `D(x) = 2√π(2n-1-erf x) - 4e^{-x²}`, the Gaussian control denominator squared.
fn gaussian_denominator(x: f64, n: f64) -> f64 {
    let u = x - 0.5;
    if u.abs() <= 0.5 {
        4.0 * PI.sqrt() * (n - gaussian_n_min()) + gaussian_gap_series(u)
    } else {
        2.0 * PI.sqrt() * (2.0 * (n - 1.0) + libm::erfc(x)) - 4.0 * (-x * x).exp()
    }
}

/// Signed Gaussian emission control `g(x; n)/κ`; negative for `x < 1/2`.
pub(crate) fn gaussian_control(x: f64, n: f64) -> f64 {
    let num = (-0.5 * x * x).exp() * (2.0 * x - 1.0);
    let d = gaussian_denominator(x, n);
    if num == 0.0 {
        // At n = n_min the limit is ±1 from either side; the midpoint value is +1.
        return if d > 0.0 { 0.0 } else { 1.0 };
    }
    if d <= 0.0 {
        return num.signum();
    }
    num / d.sqrt()
}

/// Reduced-bandwidth sech control `g(x; η, n)/κ` with photon bandwidth `κ/η`.
pub(crate) fn reduced_control(x: f64, eta: f64, n: f64) -> f64 {
    let y = x / (2.0 * eta);
    let m = one_minus_tanh(y);
    let arg = 4.0 * eta * (n - 1.0) + m * (2.0 * (eta - 1.0) + m);
    sech(y) * ((eta - 1.0) + m) / (2.0 * eta * arg.sqrt())
}

/// Emission-form control that, time reversed, lets a node with decay `ηκ`
/// absorb a sech photon of bandwidth `κ`; returned as `g(x)/κ`.
pub(crate) fn asymmetric_control(x: f64, eta: f64) -> f64 {
    let y = 0.5 * x;
    let m = one_minus_tanh(y);
    let arg = m * (2.0 * (eta - 1.0) + m);
    sech(y) * ((eta - 1.0) + m) / (2.0 * arg.sqrt())
}

/// A target photon envelope `γ(t)` emitted with probability `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhotonShape {
    kind: ShapeKind,
    kappa: f64,
    n: f64,
    eta: f64,
    delay: f64,
}

impl PhotonShape {
    /// Validates and builds a shape. `eta` is ignored unless `kind` is `SechReduced`.
    pub fn new(kind: ShapeKind, kappa: f64, n: f64, eta: f64, delay: f64) -> Result<Self> {
        check_rate(kappa)?;
        check_fraction(n)?;
        if !delay.is_finite() {
            return Err(Error::domain("photon delay must be finite"));
        }
        let eta = match kind {
            ShapeKind::SechReduced => {
                if eta.is_nan() || eta < 1.0 || !eta.is_finite() {
                    return Err(Error::domain(format!(
                        "bandwidth reduction η = {eta} must satisfy η >= 1"
                    )));
                }
                eta
            }
            _ => 1.0,
        };
        if kind == ShapeKind::Gaussian {
            let n_min = gaussian_n_min();
            if n < n_min {
                return Err(Error::infeasible(
                    format!(
                        "a Gaussian photon needs n >= n_min = {n_min:.10}; got n = {n}"
                    ),
                    Some(n_min),
                ));
            }
        }
        Ok(Self {
            kind,
            kappa,
            n,
            eta,
            delay,
        })
    }

    pub fn sech(kappa: f64, n: f64) -> Result<Self> {
        Self::new(ShapeKind::Sech, kappa, n, 1.0, 0.0)
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    /// Spectral width of the photon itself (`κ/η` for reduced pulses).
    pub fn photon_bandwidth(&self) -> f64 {
        self.kappa / self.eta
    }

    fn x(&self, t: f64) -> f64 {
        self.kappa * (t - self.delay)
    }

    /// Envelope `|γ(t)|` in units of √(rad/s).
    pub fn amplitude(&self, t: f64) -> f64 {
        let x = self.x(t);
        let (k, n) = (self.kappa, self.n);
        match self.kind {
            ShapeKind::Sech => (k / (4.0 * n)).sqrt() * sech(0.5 * x),
            ShapeKind::SechReduced => {
                (k / (4.0 * self.eta * n)).sqrt() * sech(x / (2.0 * self.eta))
            }
            ShapeKind::Lorentzian => (k / (n * PI * (1.0 + x * x))).sqrt(),
            ShapeKind::Gaussian => (k / (PI.sqrt() * n)).sqrt() * (-0.5 * x * x).exp(),
        }
    }

    /// Photon probability emitted up to time `t`, `∫_{-∞}^t |γ|²`.
    pub fn cumulative(&self, t: f64) -> f64 {
        1.0 / self.n - self.remaining(t)
    }

    /// Photon probability still to be emitted after `t`, `∫_t^∞ |γ|²`.
    pub fn remaining(&self, t: f64) -> f64 {
        let x = self.x(t);
        let n = self.n;
        match self.kind {
            ShapeKind::Sech => one_minus_tanh(0.5 * x) / (2.0 * n),
            ShapeKind::SechReduced => one_minus_tanh(x / (2.0 * self.eta)) / (2.0 * n),
            ShapeKind::Lorentzian => {
                let tail = if x > 0.0 {
                    (1.0 / x).atan()
                } else {
                    FRAC_PI_2 - x.atan()
                };
                tail / (n * PI)
            }
            ShapeKind::Gaussian => libm::erfc(x) / (2.0 * n),
        }
    }

    /// `|q(t)|²` of a directly decaying qubit emitting this photon: `1 - ∫_{-∞}^t |γ|²`.
    pub fn direct_residual(&self, t: f64) -> f64 {
        (self.n - 1.0) / self.n + self.remaining(t)
    }

    /// Qubit–resonator coupling `g(t)` that emits this photon (rad/s).
    pub fn coupling(&self, t: f64) -> f64 {
        let x = self.x(t);
        self.kappa
            * match self.kind {
                ShapeKind::Sech => sech_control(x, self.n),
                ShapeKind::SechReduced => reduced_control(x, self.eta, self.n),
                ShapeKind::Lorentzian => lorentzian_control(x, self.n),
                ShapeKind::Gaussian => gaussian_control(x, self.n),
            }
    }

    /// Direct qubit decay rate `κ_c(t) = |γ|²/|q|²` that emits this photon (rad/s).
    pub fn decay_rate(&self, t: f64) -> f64 {
        match self.kind {
            ShapeKind::Sech => self.kappa * sech_rate(self.x(t), self.n),
            _ => {
                let a = self.amplitude(t);
                a * a / self.direct_residual(t)
            }
        }
    }

    /// Half-width (s) of a window around the delay outside which the photon
    /// carries less than `tol` of its total probability.
    pub fn half_window(&self, tol: f64) -> f64 {
        let tol = tol.clamp(1e-300, 1.0);
        let x = match self.kind {
            ShapeKind::Sech => (2.0 / tol).ln(),
            ShapeKind::SechReduced => self.eta * (2.0 / tol).ln(),
            ShapeKind::Lorentzian => 2.0 / (PI * tol),
            ShapeKind::Gaussian => {
                // erfc(x) < e^{-x²}; solve e^{-x²} = tol.
                (-(tol.ln())).sqrt().max(1.0)
            }
        };
        x / self.kappa
    }

    /// Photon probability outside `[t_lo, t_hi]`.
    pub fn mass_outside(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.cumulative(t_lo) + self.remaining(t_hi)
    }
}

/// `g(t; n)` for a sech photon of bandwidth `κ` centred at `t = 0`.
pub fn sech_coupling(t: f64, n: f64, kappa: f64) -> Result<f64> {
    check_fraction(n)?;
    check_rate(kappa)?;
    Ok(kappa * sech_control(kappa * t, n))
}

/// Direct decay rate `κ_c(t; n)` for a sech photon of bandwidth `κ`.
pub fn sech_decay_rate(t: f64, n: f64, kappa: f64) -> Result<f64> {
    check_fraction(n)?;
    check_rate(kappa)?;
    Ok(kappa * sech_rate(kappa * t, n))
}

/// Peak of `κ_c(t; n)` over `t`: `κ` for `n = 1` (approached as `t → ∞`),
/// `κ(2n-1-2√(n²-n))` otherwise.
pub fn sech_decay_rate_max(n: f64, kappa: f64) -> Result<f64> {
    check_fraction(n)?;
    check_rate(kappa)?;
    if n == 1.0 {
        return Ok(kappa);
    }
    Ok(kappa / (2.0 * n - 1.0 + 2.0 * (n * n - n).sqrt()))
}

pub fn lorentzian_coupling(t: f64, n: f64, kappa: f64) -> Result<f64> {
    Ok(PhotonShape::new(ShapeKind::Lorentzian, kappa, n, 1.0, 0.0)?.coupling(t))
}

pub fn gaussian_coupling(t: f64, n: f64, kappa: f64) -> Result<f64> {
    Ok(PhotonShape::new(ShapeKind::Gaussian, kappa, n, 1.0, 0.0)?.coupling(t))
}

pub fn reduced_bandwidth_coupling(t: f64, eta: f64, n: f64, kappa: f64) -> Result<f64> {
    Ok(PhotonShape::new(ShapeKind::SechReduced, kappa, n, eta, 0.0)?.coupling(t))
}

/// Emission-form control for a node of decay `κ_e = ηκ` matched to a sech photon of
/// bandwidth `κ`. Absorb with the time-reversed control `g(t_d - t)`.
pub fn asymmetric_absorption_coupling(t: f64, kappa: f64, eta: f64) -> Result<f64> {
    check_rate(kappa)?;
    check_asymmetry(eta)?;
    Ok(kappa * asymmetric_control(kappa * t, eta))
}

pub(crate) fn check_asymmetry(eta: f64) -> Result<()> {
    if eta.is_nan() || eta < 1.0 || !eta.is_finite() {
        return Err(Error::infeasible(
            format!(
                "a node with decay ηκ, η = {eta} < 1, cannot fully absorb a photon of bandwidth κ"
            ),
            Some(1.0),
        ));
    }
    Ok(())
}
