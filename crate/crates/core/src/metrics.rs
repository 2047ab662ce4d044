//! W-state fidelity and three-qubit entanglement of formation.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::decoherence::ReducedDensityMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// `E_3F(|W_3⟩) = log₂3 − 2/3`.
pub fn w3_e3f() -> f64 {
    3f64.log2() - 2.0 / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum TargetKind {
    W(usize),
    Bell,
}

/// Ideal state on `{|0…0⟩, |1_1⟩, …, |1_N⟩}` with optional per-site phases.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub kind: TargetKind,
    /// Phase of each single-excitation component; empty means all zero.
    pub phases: Vec<f64>,
}

impl TargetState {
    pub fn w(n: usize) -> Self {
        Self {
            kind: TargetKind::W(n),
            phases: Vec::new(),
        }
    }

    pub fn sites(&self) -> usize {
        match self.kind {
            TargetKind::W(n) => n,
            TargetKind::Bell => 2,
        }
    }

    pub fn amplitudes(&self) -> Result<Vec<C64>> {
        let n = self.sites();
        if n == 0 {
            return Err(Error::domain("target needs at least one site"));
        }
        if !self.phases.is_empty() && self.phases.len() != n {
            return Err(Error::domain(format!("{} phases for {n} sites", self.phases.len())));
        }
        let a = 1.0 / (n as f64).sqrt();
        let mut v = vec![C64::default()];
        v.extend((0..n).map(|j| C64::from_polar(a, self.phases.get(j).copied().unwrap_or(0.0))));
        Ok(v)
    }
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &ReducedDensityMatrix, target: &TargetState) -> Result<f64> {
    let psi = target.amplitudes()?;
    if psi.len() != rho.dim() {
        return Err(Error::domain("target and density matrix sizes differ"));
    }
    let mut f = C64::default();
    for (a, pa) in psi.iter().enumerate() {
        for (b, pb) in psi.iter().enumerate() {
            f += pa.conj() * rho.matrix[(a, b)] * pb;
        }
    }
    Ok(f.re)
}

/// Best W₃ fidelity over local Z corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFidelity {
    pub fidelity: f64,
    /// Corrections on sites 2 and 3 that, applied to the state, maximise the
    /// overlap with the phase-free `|W₃⟩`; wrapped into `(-π, π]`.
    pub phi2: f64,
    pub phi3: f64,
}

struct W3Terms {
    diag: f64,
    a: C64,
    b: C64,
    c: C64,
}

impl W3Terms {
    fn new(rho: &ReducedDensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::domain(format!(
                "W₃ fidelity needs a 4-dimensional state, got {}",
                rho.dim()
            )));
        }
        let m = &rho.matrix;
        Ok(Self {
            diag: m[(1, 1)].re + m[(2, 2)].re + m[(3, 3)].re,
            a: m[(1, 2)],
            b: m[(1, 3)],
            c: m[(2, 3)],
        })
    }

    /// Overlap with `(|1⟩ + e^{iθ₂}|2⟩ + e^{iθ₃}|3⟩)/√3`.
    fn value(&self, t2: f64, t3: f64) -> f64 {
        let e = |t: f64| C64::from_polar(1.0, t);
        (self.diag + 2.0 * ((self.a * e(t2)).re + (self.b * e(t3)).re + (self.c * e(t3 - t2)).re))
            / 3.0
    }

    fn grad_hess(&self, t2: f64, t3: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let e = |t: f64| C64::from_polar(1.0, t);
        let (a, b, c) = (self.a * e(t2), self.b * e(t3), self.c * e(t3 - t2));
        let k = 2.0 / 3.0;
        let g = [k * (-a.im + c.im), k * (-b.im - c.im)];
        let h = [
            [k * (-a.re - c.re), k * c.re],
            [k * c.re, k * (-b.re - c.re)],
        ];
        (g, h)
    }
}

fn wrap(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// W₃ fidelity after applying the corrections `(φ₂, φ₃)`.
pub fn fidelity_at(rho: &ReducedDensityMatrix, phi2: f64, phi3: f64) -> Result<f64> {
    Ok(W3Terms::new(rho)?.value(-phi2, -phi3))
}

/// Maximises the W₃ fidelity over two local phases: a 64×64 grid, then
/// Newton refinement from the best cell.
pub fn fidelity_phase_optimized(rho: &ReducedDensityMatrix) -> Result<PhaseFidelity> {
    let terms = W3Terms::new(rho)?;
    const GRID: usize = 64;
    let step = TAU / GRID as f64;
    let (mut t2, mut t3, mut best) = (0.0, 0.0, terms.value(0.0, 0.0));
    for i in 0..GRID {
        for j in 0..GRID {
            let (x, y) = (i as f64 * step, j as f64 * step);
            let v = terms.value(x, y);
            if v > best {
                (t2, t3, best) = (x, y, v);
            }
        }
    }
    for _ in 0..50 {
        let (g, h) = terms.grad_hess(t2, t3);
        if g[0].hypot(g[1]) < 1e-15 {
            break;
        }
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let newton = h[0][0] < 0.0 && det > 0.0;
        let (d2, d3) = if newton {
            (
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            )
        } else {
            (step * g[0].signum(), step * g[1].signum())
        };
        let mut scale = 1.0;
        let mut moved = false;
        while scale > 1e-6 {
            let v = terms.value(t2 + scale * d2, t3 + scale * d3);
            if v >= best {
                t2 += scale * d2;
                t3 += scale * d3;
                moved = v > best;
                best = v;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(PhaseFidelity {
        fidelity: best,
        phi2: wrap(-t2),
        phi3: wrap(-t3),
    })
}

/// Whether `F` certifies W-class tripartite entanglement.
pub fn fidelity_witness(f: f64) -> bool {
    f > 2.0 / 3.0
}

fn binary_entropy_of_eigen(x: f64, off: f64) -> f64 {
    // Eigenvalues of [[1-x, o], [o*, x]] with |o| = off.
    let r = ((1.0 - 2.0 * x).powi(2) + 4.0 * off * off).sqrt().min(1.0);
    let lo = 0.5 * (1.0 - r);
    let hi = 1.0 - lo;
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    h(lo) + h(hi)
}

/// Entropy in bits of a 2×2 density matrix.
fn qubit_entropy(m: [[C64; 2]; 2]) -> f64 {
    let tr = m[0][0].re + m[1][1].re;
    if tr <= 0.0 {
        return 0.0;
    }
    binary_entropy_of_eigen(m[1][1].re / tr, m[0][1].norm() / tr)
}

/// `min_i S(ρ_i)` in bits for a three-qubit pure state; qubit 1 is the most
/// significant bit of the index (so `|1_1⟩` is entry 4).
pub fn e3f_pure(psi: &[C64; 8]) -> f64 {
    (0..3)
        .map(|q| {
            let bit = 4 >> q;
            let mut m = [[C64::default(); 2]; 2];
            for i in 0..8 {
                if i & bit != 0 {
                    continue;
                }
                let (z, o) = (psi[i], psi[i | bit]);
                m[0][0] += z * z.conj();
                m[0][1] += z * o.conj();
                m[1][0] += o * z.conj();
                m[1][1] += o * o.conj();
            }
            qubit_entropy(m)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Embeds `(a, b₁, b₂, b₃)` on `{|000⟩, |100⟩, |010⟩, |001⟩}`.
pub fn embed_single_excitation(v: &[C64; 4]) -> [C64; 8] {
    let mut psi = [C64::default(); 8];
    psi[0] = v[0];
    psi[4] = v[1];
    psi[2] = v[2];
    psi[1] = v[3];
    psi
}

/// `‖ω‖²·E_3F(ω/‖ω‖)` for an unnormalized single-excitation vector.
fn weighted_e3f(w: &[C64; 4]) -> f64 {
    let p: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if p < 1e-300 {
        return 0.0;
    }
    (1..4)
        .map(|i| binary_entropy_of_eigen(w[i].norm_sqr() / p, (w[0] * w[i].conj()).norm() / p))
        .fold(f64::INFINITY, f64::min)
        * p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E3fOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    /// Smallest rotation angle tried by the pattern search.
    pub min_step: f64,
}

impl Default for E3fOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0x5eed,
            max_evals: 40_000,
            min_step: 1e-7,
        }
    }
}

/// Upper bound on the mixed-state `E_3F` with search diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct E3fEstimate {
    pub value: f64,
    /// Average pure-state `E_3F` over the spectral decomposition.
    pub spectral: f64,
    /// Largest minus smallest restart result.
    pub spread: f64,
    pub converged: bool,
    pub rank: usize,
}

/// Eigen-decomposition weighted vectors `√λ_j v_j`, dropping `λ_j < 10⁻¹²`.
fn weighted_eigenvectors(rho: &ReducedDensityMatrix) -> Result<Vec<[C64; 4]>> {
    if rho.dim() != 4 {
        return Err(Error::domain(format!(
            "E_3F needs vacuum plus three single-excitation slots, got dimension {}",
            rho.dim()
        )));
    }
    let h: DMatrix<C64> = (&rho.matrix + rho.matrix.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    if let Some(low) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if low < -1e-10 {
            return Err(Error::domain(format!("density matrix has eigenvalue {low:e} < 0")));
        }
    }
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    Ok(order
        .into_iter()
        .filter(|&j| eig.eigenvalues[j] >= 1e-12)
        .map(|j| {
            let s = eig.eigenvalues[j].sqrt();
            std::array::from_fn(|i| eig.eigenvectors[(i, j)] * s)
        })
        .collect())
}

/// First `n` columns of a Haar-random `m×m` unitary (Gram–Schmidt on
/// complex Gaussian columns).
fn random_isometry(rng: &mut ChaCha20Rng, m: usize, n: usize) -> Vec<Vec<C64>> {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..m)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for c in &cols {
            let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(c).for_each(|(x, a)| *x -= proj * a);
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    cols
}

/// Greedy pattern search over Givens rotations of the ensemble rows.
fn pattern_search(rows: &mut [[C64; 4]], opts: &E3fOptions) -> f64 {
    let m = rows.len();
    let mut contrib: Vec<f64> = rows.iter().map(weighted_e3f).collect();
    let mut evals = 0usize;
    let mut step = PI / 4.0;
    let mix = |x: &[C64; 4], y: &[C64; 4], c: f64, s: C64| -> ([C64; 4], [C64; 4]) {
        (
            std::array::from_fn(|k| x[k] * c - s * y[k]),
            std::array::from_fn(|k| s.conj() * x[k] + y[k] * c),
        )
    };
    while step >= opts.min_step && evals < opts.max_evals {
        let mut improved = false;
        for i in 0..m {
            for j in i + 1..m {
                for (theta, phase) in [(step, 0.0), (-step, 0.0), (step, PI / 2.0), (-step, PI / 2.0)] {
                    let s = C64::from_polar(theta.sin(), phase);
                    let (ni, nj) = mix(&rows[i], &rows[j], theta.cos(), s);
                    let (ei, ej) = (weighted_e3f(&ni), weighted_e3f(&nj));
                    evals += 1;
                    if ei + ej < contrib[i] + contrib[j] - 1e-15 {
                        rows[i] = ni;
                        rows[j] = nj;
                        contrib[i] = ei;
                        contrib[j] = ej;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    contrib.iter().sum()
}

/// Minimises the average pure-state `E_3F` over decompositions
/// `|ω_k⟩ = Σ_j U_{kj} √λ_j |v_j⟩` with `M = 2·rank` members. Restart 0 starts
/// from the spectral decomposition; the rest from Haar-random isometries.
pub fn e3f_mixed(rho: &ReducedDensityMatrix, opts: &E3fOptions) -> Result<E3fEstimate> {
    let w = weighted_eigenvectors(rho)?;
    let rank = w.len();
    let spectral: f64 = w.iter().map(weighted_e3f).sum();
    if rank <= 1 {
        return Ok(E3fEstimate {
            value: spectral,
            spectral,
            spread: 0.0,
            converged: true,
            rank,
        });
    }
    let m = 2 * rank;
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut results = Vec::with_capacity(opts.restarts.max(1));
    for restart in 0..opts.restarts.max(1) {
        let mut rows = vec![[C64::default(); 4]; m];
        if restart == 0 {
            rows[..rank].copy_from_slice(&w);
        } else {
            let u = random_isometry(&mut rng, m, rank);
            for (k, row) in rows.iter_mut().enumerate() {
                for (j, wj) in w.iter().enumerate() {
                    for i in 0..4 {
                        row[i] += u[j][k] * wj[i];
                    }
                }
            }
        }
        results.push(pattern_search(&mut rows, opts));
    }
    let best = results.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = results.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = worst - best;
    Ok(E3fEstimate {
        value: best.min(spectral),
        spectral,
        spread,
        converged: spread <= 1e-3,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w3() -> ReducedDensityMatrix {
        let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
        ReducedDensityMatrix::from_partial(vec![0, 1, 2], &[C64::default(), a, a, a]).unwrap()
    }

    #[test]
    fn pure_w3_entropy_is_exact() {
        let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let psi = embed_single_excitation(&[C64::default(), a, a, a]);
        assert!((e3f_pure(&psi) - w3_e3f()).abs() <= 1e-12);
        let mut prod = [C64::default(); 8];
        prod[4] = C64::new(1.0, 0.0);
        assert_eq!(e3f_pure(&prod), 0.0);
    }

    #[test]
    fn w3_fidelity_is_one_at_zero_phase() {
        let f = fidelity_phase_optimized(&w3()).unwrap();
        assert!((f.fidelity - 1.0).abs() < 1e-12);
        assert!(f.phi2.abs() < 1e-8 && f.phi3.abs() < 1e-8);
        assert!(fidelity_witness(0.67) && !fidelity_witness(2.0 / 3.0) && !fidelity_witness(0.0));
    }

    #[test]
    fn rank_one_mixed_matches_pure() {
        let e = e3f_mixed(&w3(), &E3fOptions::default()).unwrap();
        assert!((e.value - w3_e3f()).abs() < 1e-6);
    }
}
