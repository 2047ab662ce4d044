//! Sampled control waveforms and their cubic-spline interpolation.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// What a control value means physically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    /// Qubit–resonator coupling `g(t)`.
    QubitResonatorCoupling,
    /// Direct qubit decay rate `κ_c(t)` into the line.
    QubitDecayRate,
}

/// A control sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSamples {
    times: Vec<f64>,
    values: Vec<f64>,
    kind: ControlKind,
    second: Vec<f64>,
}

impl ControlSamples {
    pub fn new(times: Vec<f64>, values: Vec<f64>, kind: ControlKind) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::domain("times and values differ in length"));
        }
        if times.len() < 2 {
            return Err(Error::domain("a sampled control needs at least two points"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("sample times must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite control sample {v}")));
        }
        if kind == ControlKind::QubitDecayRate && values.iter().any(|&v| v < 0.0) {
            return Err(Error::Numerical("negative decay-rate sample".into()));
        }
        let second = natural_spline(&times, &values);
        Ok(Self {
            times,
            values,
            kind,
            second,
        })
    }

    /// Samples `f` on `n_points` uniformly spaced times covering `[t_start, t_end]`.
    pub fn from_fn(
        t_start: f64,
        t_end: f64,
        n_points: usize,
        kind: ControlKind,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n_points < 2 || !(t_end > t_start) {
            return Err(Error::domain("sampling needs t_end > t_start and >= 2 points"));
        }
        let dt = (t_end - t_start) / (n_points - 1) as f64;
        let times: Vec<f64> = (0..n_points)
            .map(|i| {
                if i + 1 == n_points {
                    t_end
                } else {
                    t_start + dt * i as f64
                }
            })
            .collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values, kind)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ControlKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Cubic-spline value at `t`; zero outside the sampled range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return 0.0;
        }
        let i = match self.times.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let v = a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0;
        if self.kind == ControlKind::QubitDecayRate {
            v.max(0.0)
        } else {
            v
        }
    }

    /// Writes the `t_seconds,value_rad_per_s` table.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_seconds", "value_rad_per_s"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Second derivatives of the natural cubic spline through `(x, y)`.
fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

/// Absorption counterpart of an emission control: samples of `f(t_d - t)`.
///
/// The caller supplies the `n = 1` emission waveform; the receiver always
/// absorbs the full photon regardless of the fraction the sender emitted.
pub fn time_reverse(pulse: &ControlSamples, t_d: f64) -> ControlSamples {
    let times: Vec<f64> = pulse.times.iter().rev().map(|&t| t_d - t).collect();
    let values: Vec<f64> = pulse.values.iter().rev().copied().collect();
    let second = pulse.second.iter().rev().copied().collect();
    ControlSamples {
        times,
        values,
        kind: pulse.kind,
        second,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_smooth_function() {
        let s = ControlSamples::from_fn(0.0, 6.0, 400, ControlKind::QubitResonatorCoupling, f64::sin)
            .unwrap();
        for i in 0..=100 {
            let t = 0.05 + 5.9 * i as f64 / 100.0;
            assert!((s.eval(t) - t.sin()).abs() < 1e-6, "{t}");
        }
        assert_eq!(s.eval(-1.0), 0.0);
        assert_eq!(s.eval(7.0), 0.0);
    }

    #[test]
    fn reversal_mirrors_about_delay() {
        let s = ControlSamples::from_fn(-2.0, 3.0, 101, ControlKind::QubitDecayRate, |t| {
            (t + 3.0).powi(2)
        })
        .unwrap();
        let r = time_reverse(&s, 0.5);
        assert_eq!(r.start(), 0.5 - 3.0);
        assert_eq!(r.end(), 0.5 + 2.0);
        for i in 0..50 {
            let t = -1.9 + i as f64 * 0.09;
            assert!((r.eval(0.5 - t) - s.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(ControlSamples::new(vec![0.0, 0.0], vec![1.0, 1.0], ControlKind::QubitDecayRate)
            .is_err());
        assert!(ControlSamples::new(vec![0.0, 1.0], vec![1.0, -1.0], ControlKind::QubitDecayRate)
            .is_err());
        assert!(ControlSamples::new(
            vec![0.0, 1.0],
            vec![f64::NAN, 1.0],
            ControlKind::QubitResonatorCoupling
        )
        .is_err());
    }
}
