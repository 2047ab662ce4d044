use std::f64::consts::PI;

use fqst_core::decoherence::{bootstrap, bootstrap_with, ensemble_average, NoiseSpec, ReducedDensityMatrix};
use fqst_core::dynamics::ExcitationState;
use fqst_core::network::{NetworkSpec, NodeKind, WaveguideSpec};
use fqst_core::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn chain() -> NetworkSpec {
    let line = WaveguideSpec::wr90(5.0, 4, 2.0 * PI * 8.407e9, 2.0 * PI * 1e7);
    NetworkSpec::linear(3, &line, NodeKind::QubitResonator).unwrap()
}

fn noise(t2: f64) -> NoiseSpec {
    NoiseSpec {
        t1: 2.0 * t2,
        t2,
        realizations: 10,
        seed: 7,
        bootstrap_resamples: 50,
    }
}

#[test]
fn relaxation_follows_the_closed_form() {
    let spec = chain();
    let q = [c(0.5, 0.1), c(-0.3, 0.4), c(0.2, -0.6)];
    let norm: f64 = q.iter().map(|z| z.norm_sqr()).sum();
    let vac = c((1.0 - norm).sqrt(), 0.0);
    let state = ExcitationState::qubits(&spec, vac, &[(0, q[0]), (1, q[1]), (2, q[2])]).unwrap();
    let tau = [1e-7, 3e-7, 2e-7];
    let t1 = 5e-6;
    let rho = ReducedDensityMatrix::relaxed(&state, &[0, 1, 2], &tau, t1).unwrap();
    rho.validate().unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = q[i] * q[j].conj() * (-(tau[i] + tau[j]) / (2.0 * t1)).exp();
            assert!((rho.matrix[(i + 1, j + 1)] - want).norm() < 1e-15);
        }
        let want = vac * q[i].conj() * (-tau[i] / (2.0 * t1)).exp();
        assert!((rho.matrix[(0, i + 1)] - want).norm() < 1e-15);
    }
    let lost: f64 = (0..3).map(|i| q[i].norm_sqr() * (1.0 - (-tau[i] / t1).exp())).sum();
    assert!((rho.matrix[(0, 0)].re - (vac.norm_sqr() + lost)).abs() < 1e-15);

    let untouched = ReducedDensityMatrix::relaxed(&state, &[0, 1, 2], &tau, f64::INFINITY).unwrap();
    assert!((untouched.matrix[(1, 1)].re - q[0].norm_sqr()).abs() < 1e-15);
    assert!(ReducedDensityMatrix::relaxed(&state, &[0, 1, 2], &tau, 0.0).is_err());
    assert!(ReducedDensityMatrix::relaxed(&state, &[0, 5], &tau, t1).is_err());
}

#[test]
fn relaxation_commutes_with_averaging_at_equal_exposure() {
    let spec = chain();
    let tau = [2e-7f64; 3];
    let t1 = 1e-6f64;
    let damp = (-tau[0] / (2.0 * t1)).exp();
    let states: Vec<ExcitationState> = (0..5)
        .map(|k| {
            let phase = 0.7 * k as f64;
            let a = 1.0 / 3f64.sqrt();
            ExcitationState::qubits(
                &spec,
                c(0.0, 0.0),
                &[(0, c(a, 0.0)), (1, C64::from_polar(a, phase)), (2, C64::from_polar(a, -phase))],
            )
            .unwrap()
        })
        .collect();
    let relaxed: Vec<ReducedDensityMatrix> = states
        .iter()
        .map(|s| ReducedDensityMatrix::relaxed(s, &[0, 1, 2], &tau, t1).unwrap())
        .collect();
    let after = ensemble_average(&relaxed).unwrap();
    let pure: Vec<ReducedDensityMatrix> = states
        .iter()
        .map(|s| ReducedDensityMatrix::relaxed(s, &[0, 1, 2], &tau, f64::INFINITY).unwrap())
        .collect();
    let before = ensemble_average(&pure).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let f = match (i, j) {
                (0, 0) => continue,
                (0, _) | (_, 0) => damp,
                _ => damp * damp,
            };
            assert!((after.matrix[(i, j)] - before.matrix[(i, j)] * f).norm() < 1e-15);
        }
    }
    assert!((after.trace() - 1.0).abs() < 1e-14);
}

#[test]
fn dephasing_samples_are_reproducible_and_scaled() {
    let spec = noise(10e-6);
    let a = spec.sample_dephasing(3, 4).unwrap();
    assert_eq!(a, spec.sample_dephasing(3, 4).unwrap());
    assert_ne!(a, spec.sample_dephasing(3, 5).unwrap());
    let other_seed = NoiseSpec { seed: 8, ..spec };
    assert_ne!(a, other_seed.sample_dephasing(3, 4).unwrap());

    let draws: Vec<f64> = (0..4000).flat_map(|r| spec.sample_dephasing(3, r).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
    let sigma = 2f64.sqrt() / 10e-6;
    assert!(mean.abs() < 0.05 * sigma);
    assert!((var.sqrt() / sigma - 1.0).abs() < 0.03);

    let still = NoiseSpec::noiseless();
    assert!(still.is_static());
    assert_eq!(still.sample_dephasing(2, 9).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn invalid_noise_is_rejected() {
    assert!(NoiseSpec { t1: 0.0, ..noise(1e-6) }.validate().is_err());
    assert!(NoiseSpec { t2: -1.0, ..noise(1e-6) }.validate().is_err());
    assert!(NoiseSpec { realizations: 0, ..noise(1e-6) }.validate().is_err());
    assert!(ensemble_average(&[]).is_err());
    assert!(bootstrap(&[1.0], 10, 0).is_err());
    assert!(bootstrap(&[1.0, 2.0], 1, 0).is_err());
}

#[test]
fn bootstrap_estimates_the_standard_error() {
    let (mean, std) = bootstrap(&[0.25; 50], 100, 3).unwrap();
    assert_eq!(mean, 0.25);
    assert!(std.abs() < 1e-15);

    // Alternating ±1: the standard error of the mean is 1/√n.
    let values: Vec<f64> = (0..400).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let (mean, std) = bootstrap(&values, 400, 11).unwrap();
    assert!(mean.abs() < 1e-15);
    assert!((std / (1.0 / 20.0) - 1.0).abs() < 0.15, "{std}");
    let again = bootstrap(&values, 400, 11).unwrap();
    assert_eq!((mean, std), again);

    let (m, s) = bootstrap_with(10, 20, 1, |idx| idx.len() as f64).unwrap();
    assert_eq!((m, s), (10.0, 0.0));
}

fn amplitude() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #[test]
    fn relaxed_states_are_physical(
        q in prop::array::uniform3(amplitude()),
        tau in prop::array::uniform3(0.0f64..1e-5),
        t1 in 1e-7f64..1e-3,
        keep in 0.0f64..1.0,
    ) {
        let norm: f64 = q.iter().map(|z| z.norm_sqr()).sum();
        prop_assume!(norm > 1e-6);
        let scale = (keep / norm).sqrt();
        let q: Vec<C64> = q.iter().map(|z| z * scale).collect();
        let vac = c((1.0 - keep).sqrt(), 0.0);
        let state = ExcitationState::qubits(&chain(), vac, &[(0, q[0]), (1, q[1]), (2, q[2])]).unwrap();
        let rho = ReducedDensityMatrix::relaxed(&state, &[0, 1, 2], &tau, t1).unwrap();
        prop_assert!(rho.validate().is_ok());
        for (i, p) in rho.populations().iter().enumerate() {
            prop_assert!(*p <= q[i].norm_sqr() + 1e-15);
        }
    }
}
