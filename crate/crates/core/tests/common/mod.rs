#![allow(dead_code)]

use fqst_core::decoherence::ReducedDensityMatrix;
use fqst_core::metrics::embed_single_excitation;
use fqst_core::C64;

/// Smallest single-qubit entropy by explicit partial traces over the
/// eight-dimensional register (qubit 1 is the leading tensor factor).
pub fn entropy_oracle(psi: &[C64; 8]) -> f64 {
    let mut best = f64::INFINITY;
    for q in 0..3 {
        let mut r = [[C64::default(); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for rest in 0..4 {
                    let idx = |bit: usize| {
                        let (hi, lo) = (rest >> (2 - q), rest & ((1 << (2 - q)) - 1));
                        (hi << (3 - q)) | (bit << (2 - q)) | lo
                    };
                    r[a][b] += psi[idx(a)] * psi[idx(b)].conj();
                }
            }
        }
        let tr = r[0][0].re + r[1][1].re;
        let det = (r[0][0] * r[1][1] - r[0][1] * r[1][0]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let h = |x: f64| if x > 1e-300 { -x * x.log2() } else { 0.0 };
        best = best.min(h(tr / 2.0 + disc) + h(tr / 2.0 - disc));
    }
    best
}

/// Spectral-ensemble average entropy of a vacuum-plus-three-sites state.
pub fn spectral_oracle(rho: &ReducedDensityMatrix) -> f64 {
    let eig = rho.matrix.clone().symmetric_eigen();
    (0..4)
        .filter(|&j| eig.eigenvalues[j] > 1e-12)
        .map(|j| {
            let v: [C64; 4] = std::array::from_fn(|i| eig.eigenvectors[(i, j)]);
            eig.eigenvalues[j] * entropy_oracle(&embed_single_excitation(&v))
        })
        .sum()
}
