use std::f64::consts::PI;

use fqst_core::decoherence::ReducedDensityMatrix;
use fqst_core::metrics::{
    e3f_mixed, e3f_pure, embed_single_excitation, fidelity, fidelity_at, fidelity_phase_optimized,
    w3_e3f, E3fOptions, TargetKind, TargetState,
};
use fqst_core::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

mod common;
use common::{entropy_oracle, spectral_oracle};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pure(v: [C64; 4]) -> ReducedDensityMatrix {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let u: Vec<C64> = v.iter().map(|z| z / norm).collect();
    ReducedDensityMatrix::from_partial(vec![0, 1, 2], &u).unwrap()
}

fn w3_with_phases(p2: f64, p3: f64) -> ReducedDensityMatrix {
    let a = 1.0 / 3f64.sqrt();
    pure([c(0.0, 0.0), c(a, 0.0), C64::from_polar(a, p2), C64::from_polar(a, p3)])
}

fn mixture(parts: &[(f64, &ReducedDensityMatrix)]) -> ReducedDensityMatrix {
    let mut m = DMatrix::<C64>::zeros(4, 4);
    for (p, r) in parts {
        m += &r.matrix * c(*p, 0.0);
    }
    ReducedDensityMatrix { qubits: vec![0, 1, 2], matrix: m }
}

fn quick() -> E3fOptions {
    E3fOptions {
        restarts: 4,
        ..E3fOptions::default()
    }
}

#[test]
fn w3_entropy_has_the_closed_form() {
    let a = c(1.0 / 3f64.sqrt(), 0.0);
    let psi = embed_single_excitation(&[c(0.0, 0.0), a, a, a]);
    let exact = 3f64.log2() - 2.0 / 3.0;
    assert!((e3f_pure(&psi) - exact).abs() <= 1e-12);
    assert!((w3_e3f() - exact).abs() <= 1e-15);
    assert!((entropy_oracle(&psi) - exact).abs() <= 1e-12);
}

#[test]
fn ghz_and_product_states() {
    let s = 0.5f64.sqrt();
    let mut ghz = [c(0.0, 0.0); 8];
    ghz[0] = c(s, 0.0);
    ghz[7] = c(s, 0.0);
    assert!((e3f_pure(&ghz) - 1.0).abs() < 1e-12);
    let bell_times_zero = embed_single_excitation(&[c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)]);
    assert!(e3f_pure(&bell_times_zero).abs() < 1e-12);
}

#[test]
fn phase_corrections_undo_state_phases() {
    let rho = w3_with_phases(PI / 3.0, PI / 5.0);
    let best = fidelity_phase_optimized(&rho).unwrap();
    assert!((best.fidelity - 1.0).abs() < 1e-12);
    assert!((best.phi2 + PI / 3.0).abs() < 1e-8, "{}", best.phi2);
    assert!((best.phi3 + PI / 5.0).abs() < 1e-8, "{}", best.phi3);
    assert!((fidelity_at(&rho, best.phi2, best.phi3).unwrap() - 1.0).abs() < 1e-12);
    let plain = fidelity(&rho, &TargetState::w(3)).unwrap();
    assert!(plain < 0.9);
    let matched = TargetState {
        kind: TargetKind::W(3),
        phases: vec![0.0, PI / 3.0, PI / 5.0],
    };
    assert!((fidelity(&rho, &matched).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn maximally_mixed_excitation() {
    let slots: Vec<ReducedDensityMatrix> = (1..4)
        .map(|i| {
            let mut v = [c(0.0, 0.0); 4];
            v[i] = c(1.0, 0.0);
            pure(v)
        })
        .collect();
    let rho = mixture(&[(1.0 / 3.0, &slots[0]), (1.0 / 3.0, &slots[1]), (1.0 / 3.0, &slots[2])]);
    let f = fidelity_phase_optimized(&rho).unwrap();
    assert!((f.fidelity - 1.0 / 3.0).abs() < 1e-12);
    let e = e3f_mixed(&rho, &quick()).unwrap();
    assert!(e.value.abs() < 1e-6, "{}", e.value);
    assert_eq!(e.rank, 3);
}

#[test]
fn vacuum_admixture_lowers_the_entanglement() {
    let w = w3_with_phases(0.0, 0.0);
    let vac = pure([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let mut last = f64::INFINITY;
    for p in [1.0, 0.9, 0.75, 0.5, 0.25] {
        let rho = mixture(&[(p, &w), (1.0 - p, &vac)]);
        let e = e3f_mixed(&rho, &quick()).unwrap().value;
        assert!(e <= p * w3_e3f() + 1e-9, "p={p}: {e}");
        assert!(e <= last + 1e-6, "p={p}: {e} > {last}");
        last = e;
    }
}

#[test]
fn metrics_reject_wrong_sizes() {
    let rho = ReducedDensityMatrix::from_partial(vec![0, 1], &[c(0.0, 0.0), c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
    assert!(fidelity_phase_optimized(&rho).is_err());
    assert!(e3f_mixed(&rho, &quick()).is_err());
    let bell = TargetState { kind: TargetKind::Bell, phases: Vec::new() };
    assert!((fidelity(&rho, &bell).unwrap() - 0.98).abs() < 1e-12);
    let odd = TargetState { kind: TargetKind::W(3), phases: vec![0.0] };
    assert!(odd.amplitudes().is_err());
}

fn amplitude() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
}

fn vector() -> impl Strategy<Value = [C64; 4]> {
    prop::array::uniform4(amplitude()).prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
}

fn density(rank: usize) -> impl Strategy<Value = ReducedDensityMatrix> {
    (prop::collection::vec(vector(), rank), prop::collection::vec(0.05f64..1.0, rank)).prop_map(|(vs, ws)| {
        let total: f64 = ws.iter().sum();
        let states: Vec<ReducedDensityMatrix> = vs.into_iter().map(pure).collect();
        let parts: Vec<(f64, &ReducedDensityMatrix)> = ws.iter().map(|w| w / total).zip(&states).collect();
        mixture(&parts)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pure_entropy_matches_the_oracle(v in vector(), extra in prop::array::uniform4(amplitude())) {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let u: [C64; 4] = std::array::from_fn(|i| v[i] / norm);
        let psi = embed_single_excitation(&u);
        prop_assert!((e3f_pure(&psi) - entropy_oracle(&psi)).abs() < 1e-12);
        // Generic three-qubit states, not just single-excitation ones.
        let mut g = [c(0.0, 0.0); 8];
        g[..4].copy_from_slice(&u);
        g[4..].copy_from_slice(&extra);
        let n = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        g.iter_mut().for_each(|z| *z /= n);
        let e = e3f_pure(&g);
        prop_assert!((e - entropy_oracle(&g)).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
    }

    #[test]
    fn rank_one_mixed_equals_pure(v in vector()) {
        let rho = pure(v);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let u: [C64; 4] = std::array::from_fn(|i| v[i] / norm);
        let e = e3f_mixed(&rho, &quick()).unwrap();
        prop_assert!((e.value - entropy_oracle(&embed_single_excitation(&u))).abs() < 1e-6);
    }

    #[test]
    fn mixed_entropy_never_exceeds_the_spectral_average(rho in (2usize..=4).prop_flat_map(density)) {
        let e = e3f_mixed(&rho, &quick()).unwrap();
        let oracle = spectral_oracle(&rho);
        prop_assert!((e.spectral - oracle).abs() < 1e-8);
        prop_assert!(e.value <= oracle + 1e-12);
        prop_assert!(e.value >= -1e-12);
    }

    #[test]
    fn local_phases_do_not_change_the_optimum(rho in density(3), p2 in -PI..PI, p3 in -PI..PI) {
        let mut rotated = rho.clone();
        let phase = [0.0, 0.0, p2, p3];
        for i in 0..4 {
            for j in 0..4 {
                rotated.matrix[(i, j)] *= C64::from_polar(1.0, phase[i] - phase[j]);
            }
        }
        let a = fidelity_phase_optimized(&rho).unwrap();
        let b = fidelity_phase_optimized(&rotated).unwrap();
        prop_assert!((a.fidelity - b.fidelity).abs() < 1e-9);
        let plain = fidelity(&rho, &TargetState::w(3)).unwrap();
        prop_assert!(a.fidelity >= plain - 1e-12);
    }
}
