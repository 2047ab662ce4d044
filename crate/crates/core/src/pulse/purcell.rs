//! Sech emission through a Purcell filter: qubit → resonator → filter → line.

use crate::error::{Error, Result};

use super::shapes::logistic_pair;

/// Emission control for a node whose resonator reaches the line through a
/// filter of linewidth `κ` coupled with strength `g_p`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PurcellControl {
    kappa: f64,
    g_p: f64,
    n: f64,
}

/// Largest `(κ/g_p)²` for which `|q(t)|² ≥ 0` holds at all times.
///
/// `|q|² = (n - 1 + s² - a² s³(1-s))/n` with `s = 1/(1+e^{κt})`, so the bound is
/// `min_s (n-1+s²)/(s³(1-s))`, attained where `2s³ - s² + 4(n-1)s - 3(n-1) = 0`.
pub fn purcell_ratio_bound(n: f64) -> f64 {
    if n == 1.0 {
        return 4.0;
    }
    let c = n - 1.0;
    let f = |s: f64| 2.0 * s * s * s - s * s + 4.0 * c * s - 3.0 * c;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    (c + s * s) / (s * s * s * (1.0 - s))
}

/// Largest filter linewidth `κ` compatible with `g_p` and fraction `n`.
pub fn purcell_max_kappa(n: f64, g_p: f64) -> f64 {
    g_p * purcell_ratio_bound(n).sqrt()
}

impl PurcellControl {
    pub fn new(kappa: f64, g_p: f64, n: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0 && g_p.is_finite() && g_p > 0.0) {
            return Err(Error::domain("Purcell rates κ and g_p must be positive"));
        }
        if n.is_nan() || n < 1.0 {
            return Err(Error::domain(format!("fraction n = {n} must satisfy n >= 1")));
        }
        let a2 = (kappa / g_p).powi(2);
        let bound = purcell_ratio_bound(n);
        if a2 > bound * (1.0 + 1e-12) {
            let kmax = g_p * bound.sqrt();
            return Err(Error::infeasible(
                format!(
                    "Purcell filter needs κ <= {:.6} g_p for n = {n}; got κ = {:.6} g_p",
                    bound.sqrt(),
                    kappa / g_p
                ),
                Some(kmax),
            ));
        }
        Ok(Self { kappa, g_p, n })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn g_p(&self) -> f64 {
        self.g_p
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    fn ratio2(&self) -> f64 {
        (self.kappa / self.g_p).powi(2)
    }

    /// Qubit–resonator control `g(t)` (rad/s).
    pub fn coupling(&self, t: f64) -> f64 {
        let (s, sc) = logistic_pair(self.kappa * t);
        let a2 = self.ratio2();
        // Numerator 2 + a²s(4s-3) and |q|²n - (n-1) = s²[(1-2s)² + (4-a²)s(1-s)],
        // written so the removable zero at κ = 2g_p, n = 1 cancels analytically.
        let d = 1.0 - 2.0 * s;
        let extra = (4.0 - a2) * s * sc;
        let num = 2.0 * (4.0 * s - 1.0) * (-d) + (a2 - 4.0) * s * (4.0 * s - 3.0);
        let root = (s * sc).sqrt();
        if self.n == 1.0 && a2 == 4.0 {
            // κ = 2g_p exactly: |q| = s(1-2s) changes sign smoothly.
            return self.g_p * root * (4.0 * s - 1.0) / s;
        }
        let inner = (self.n - 1.0) + s * s * (d * d + extra);
        self.g_p * root * num / (2.0 * inner.max(0.0).sqrt())
    }

    /// Ideal qubit population `|q(t)|²` along the protocol.
    pub fn qubit_population(&self, t: f64) -> f64 {
        let (s, sc) = logistic_pair(self.kappa * t);
        let a2 = self.ratio2();
        let d = 1.0 - 2.0 * s;
        ((self.n - 1.0) + s * s * (d * d + (4.0 - a2) * s * sc)) / self.n
    }

    /// Ideal intermediate-resonator population `|r(t)|² = a² s³(1-s)/n`.
    pub fn resonator_population(&self, t: f64) -> f64 {
        let (s, sc) = logistic_pair(self.kappa * t);
        self.ratio2() * s * s * s * sc / self.n
    }

    /// Time and value of the largest resonator population: `t_m = -ln 3/κ`,
    /// `|r|² = 27κ²/(256 g_p² n)`.
    pub fn peak_resonator_population(&self) -> (f64, f64) {
        (
            -(3f64.ln()) / self.kappa,
            27.0 * self.ratio2() / (256.0 * self.n),
        )
    }
}

/// `g(t)` of the Purcell-filtered sech emission.
pub fn purcell_coupling(t: f64, n: f64, kappa: f64, g_p: f64) -> Result<f64> {
    Ok(PurcellControl::new(kappa, g_p, n)?.coupling(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert_eq!(purcell_ratio_bound(1.0), 4.0);
        let k2 = purcell_max_kappa(2.0, 1.0);
        assert!((k2 - 3.8).abs() < 0.01, "{k2}");
        assert!(PurcellControl::new(2.0, 1.0, 1.0).is_ok());
        let err = PurcellControl::new(2.1, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Infeasible { bound: Some(b), .. } if (b - 2.0).abs() < 1e-12));
        assert!(PurcellControl::new(3.0, 1.0, 2.0).is_ok());
    }

    #[test]
    fn control_matches_unsimplified_formula() {
        // g(t) as printed: e^x(2(1+e^x)²g_p² + (1-3e^x)κ²)cosh(x/2) / ((1+e^x)⁴ g_p √(...)).
        let (kappa, gp) = (1.7, 1.0);
        for &n in &[1.0, 2.0, 3.5] {
            let c = PurcellControl::new(kappa, gp, n).unwrap();
            for i in -30..=30 {
                let x = i as f64 * 0.3;
                let t = x / kappa;
                let e = x.exp();
                let num = e * (2.0 * (1.0 + e).powi(2) * gp * gp + (1.0 - 3.0 * e) * kappa * kappa)
                    * (0.5 * x).cosh();
                let q = e * ((1.0 + e).powi(2) * (2.0 + e) * gp * gp + kappa * kappa)
                    / ((1.0 + e).powi(4) * gp * gp);
                let den = (1.0 + e).powi(4) * gp * (n - q).sqrt();
                let want = num / den;
                let got = c.coupling(t);
                // The printed form loses digits to n - q ≈ s² at late times.
                assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn boundary_control_is_finite_through_the_removable_zero() {
        let c = PurcellControl::new(2.0, 1.0, 1.0).unwrap();
        for i in -100..=100 {
            let t = i as f64 * 1e-3;
            assert!(c.coupling(t).is_finite());
        }
        assert!((c.coupling(0.0) - 1.0).abs() < 1e-12);
    }
}
