//! Quasistatic dephasing, post-hoc relaxation and ensemble statistics.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::dynamics::ExcitationState;
use crate::error::{Error, Result};
use crate::C64;

/// Noise parameters. Infinite `T1`/`T2` switch the corresponding channel off.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpec {
    pub t1: f64,
    pub t2: f64,
    pub realizations: usize,
    pub seed: u64,
    pub bootstrap_resamples: usize,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            realizations: 1,
            seed: 0,
            bootstrap_resamples: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) {
            return Err(Error::domain(format!("T1 must be positive, got {}", self.t1)));
        }
        if !(self.t2 > 0.0) {
            return Err(Error::domain(format!("T2 must be positive, got {}", self.t2)));
        }
        if self.realizations == 0 {
            return Err(Error::domain("at least one realization is required"));
        }
        Ok(())
    }

    /// Standard deviation `√2/T2` of the frequency shifts (rad/s).
    pub fn sigma(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.t2
    }

    /// Whether every realization would see the same dynamics.
    pub fn is_static(&self) -> bool {
        self.t2.is_infinite()
    }

    /// Frequency shifts for one realization; stream `realization` of the
    /// master seed, so any realization is reproducible on its own.
    pub fn sample_dephasing(&self, n_qubits: usize, realization: u64) -> Result<Vec<f64>> {
        self.validate()?;
        if self.is_static() {
            return Ok(vec![0.0; n_qubits]);
        }
        let sigma = self.sigma();
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(realization);
        Ok((0..n_qubits)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect())
    }
}

/// State of a set of target qubits on `{|0…0⟩, |1_1⟩, …, |1_N⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    /// Network node of each single-excitation slot.
    pub qubits: Vec<usize>,
    pub matrix: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `|u⟩⟨u| + (1 - ‖u‖²)|0⟩⟨0|` for `u = (vacuum, q_1, …, q_N)`.
    pub fn from_partial(qubits: Vec<usize>, u: &[C64]) -> Result<Self> {
        if u.len() != qubits.len() + 1 {
            return Err(Error::domain("need one amplitude per target plus the vacuum"));
        }
        let norm: f64 = u.iter().map(|a| a.norm_sqr()).sum();
        if norm > 1.0 + 1e-8 {
            return Err(Error::domain(format!("partial amplitudes carry weight {norm} > 1")));
        }
        let v = nalgebra::DVector::from_column_slice(u);
        let mut matrix = &v * v.adjoint();
        matrix[(0, 0)] += C64::new((1.0 - norm).max(0.0), 0.0);
        Ok(Self { qubits, matrix })
    }

    /// Reduced state of `targets` after relaxation with per-qubit exposures
    /// `τ_i` (indexed by network node): amplitudes shrink by `e^{-τ_i/(2T1)}`
    /// and the lost weight joins the vacuum.
    pub fn relaxed(
        state: &ExcitationState,
        targets: &[usize],
        exposure: &[f64],
        t1: f64,
    ) -> Result<Self> {
        if !(t1 > 0.0) {
            return Err(Error::domain(format!("T1 must be positive, got {t1}")));
        }
        let mut u = vec![state.vacuum()];
        for &q in targets {
            let tau = *exposure
                .get(q)
                .ok_or_else(|| Error::domain(format!("no exposure for qubit {q}")))?;
            let damp = if t1.is_infinite() { 1.0 } else { (-tau / (2.0 * t1)).exp() };
            u.push(state.qubit(q) * damp);
        }
        Self::from_partial(targets.to_vec(), &u)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Hermitian part's eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.hermitian().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn hermitian(&self) -> DMatrix<C64> {
        (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0)
    }

    /// Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let asym = (&self.matrix - self.matrix.adjoint()).camax();
        if asym > 1e-12 {
            return Err(Error::domain(format!("density matrix not Hermitian ({asym:e})")));
        }
        if (self.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("density matrix trace {} ≠ 1", self.trace())));
        }
        let low = self.eigenvalues()[0];
        if low < -1e-10 {
            return Err(Error::domain(format!("density matrix has eigenvalue {low:e} < 0")));
        }
        Ok(())
    }

    /// Population of each target qubit.
    pub fn populations(&self) -> Vec<f64> {
        (1..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }
}

/// Mean of the inputs, summed in order.
pub fn ensemble_average(members: &[ReducedDensityMatrix]) -> Result<ReducedDensityMatrix> {
    let first = members
        .first()
        .ok_or_else(|| Error::domain("ensemble needs at least one member"))?;
    let mut acc = DMatrix::<C64>::zeros(first.dim(), first.dim());
    for m in members {
        if m.qubits != first.qubits {
            return Err(Error::domain("ensemble members use different bases"));
        }
        acc += &m.matrix;
    }
    acc /= C64::new(members.len() as f64, 0.0);
    Ok(ReducedDensityMatrix {
        qubits: first.qubits.clone(),
        matrix: acc,
    })
}

/// Bootstrap estimate of a statistic over `n` items: calls `stat` on each
/// resample (a list of indices with replacement) and returns the mean and
/// standard deviation of the results.
pub fn bootstrap_with<F>(n: usize, resamples: usize, seed: u64, mut stat: F) -> Result<(f64, f64)>
where
    F: FnMut(&[usize]) -> f64,
{
    if n < 2 {
        return Err(Error::domain("bootstrap needs at least two values"));
    }
    if resamples < 2 {
        return Err(Error::domain("bootstrap needs at least two resamples"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut idx = vec![0usize; n];
    let stats: Vec<f64> = (0..resamples)
        .map(|_| {
            idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
            stat(&idx)
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / resamples as f64;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok((mean, var.sqrt()))
}

/// Mean of `values` and the bootstrap standard deviation of that mean.
pub fn bootstrap(values: &[f64], resamples: usize, seed: u64) -> Result<(f64, f64)> {
    let (_, std) = bootstrap_with(values.len(), resamples, seed, |idx| {
        idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
    })?;
    Ok((values.iter().sum::<f64>() / values.len() as f64, std))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dephasing_is_reproducible_per_realization() {
        let spec = NoiseSpec {
            t1: 1e-5,
            t2: 5e-6,
            realizations: 10,
            seed: 42,
            bootstrap_resamples: 10,
        };
        let a = spec.sample_dephasing(3, 7).unwrap();
        let b = spec.sample_dephasing(3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, spec.sample_dephasing(3, 8).unwrap());
        let inf = NoiseSpec { t2: f64::INFINITY, ..spec };
        assert_eq!(inf.sample_dephasing(3, 0).unwrap(), vec![0.0; 3]);
        assert!(NoiseSpec { t2: 0.0, ..spec }.sample_dephasing(3, 0).is_err());
    }

    #[test]
    fn dephasing_std_matches_sigma() {
        let spec = NoiseSpec {
            t1: 1.0,
            t2: 2e-6,
            realizations: 1,
            seed: 1,
            bootstrap_resamples: 2,
        };
        let draws: Vec<f64> = (0..25_000u64)
            .flat_map(|r| spec.sample_dephasing(4, r).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let std = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();
        assert!((std / spec.sigma() - 1.0).abs() < 0.01, "{}", std / spec.sigma());
    }

    #[test]
    fn bootstrap_of_constant_and_bernoulli() {
        let (m, s) = bootstrap(&[0.3; 50], 100, 1).unwrap();
        assert!((m - 0.3).abs() < 1e-15 && s < 1e-15);
        let coin: Vec<f64> = (0..100).map(|i| f64::from(i % 2 == 0)).collect();
        let (_, s) = bootstrap(&coin, 2000, 9).unwrap();
        assert!((s - 0.05).abs() < 0.01, "{s}");
        assert!(bootstrap(&[1.0], 10, 0).is_err());
    }

    #[test]
    fn partial_state_keeps_unit_trace() {
        let h = C64::new(0.5, 0.0);
        let rho = ReducedDensityMatrix::from_partial(vec![0, 1], &[C64::default(), h, h]).unwrap();
        rho.validate().unwrap();
        assert!((rho.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
    }
}
