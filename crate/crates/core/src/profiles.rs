//! Analytic test functions built directly from their Fourier coefficients.
//!
//! Coefficients below `1e−18` of the peak are set to exact zero, which keeps
//! the active window sets small.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::{Field, GridSpec};

const CUTOFF: f64 = 1e-18;

/// `amp · e^{iξ0·(x−c)} · exp(−|x−c|²/(2w²))` with `c` the torus center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    pub amp: f64,
    pub width: f64,
    /// Modulation along the first axis.
    pub xi0: f64,
}

impl Gaussian {
    pub fn new(amp: f64, width: f64, xi0: f64) -> Self {
        Gaussian { amp, width, xi0 }
    }

    /// Spectral field of the periodized Gaussian.
    pub fn field(&self, grid: &GridSpec) -> Field {
        let d = grid.dim();
        let l = grid.length();
        let c = 0.5 * l;
        let w = self.width;
        let norm = self.amp * (w * (2.0 * PI).sqrt() / l).powi(d as i32);
        let xi0 = self.xi0;
        let raw = Field::from_spectral_fn(*grid, |xi| {
            let mut e = 0.0;
            let mut phase = 0.0;
            for (a, &x) in xi.iter().enumerate() {
                let s = if a == 0 { x - xi0 } else { x };
                e += s * s;
                phase -= c * x;
            }
            let mag = norm * (-0.5 * w * w * e).exp();
            // e^{−iξ·c} with c = L/2 and the modulation phase e^{iξ0 c}
            Complex64::from_polar(mag, phase + xi0 * c)
        });
        truncate(raw)
    }

    /// `|S(t)u|` at the center of the Gaussian, for `ξ0 = 0`.
    pub fn free_peak(&self, d: usize, t: f64) -> f64 {
        let w2 = self.width * self.width;
        self.amp * (1.0 + 4.0 * t * t / (w2 * w2)).powf(-0.25 * d as f64)
    }

    /// Width `sqrt(w² + 4t²/w²)` of the freely evolved Gaussian.
    pub fn free_width(&self, t: f64) -> f64 {
        let w = self.width;
        (w * w + 4.0 * t * t / (w * w)).sqrt()
    }

    /// Time at which the evolved width reaches a quarter of the torus.
    pub fn wrap_time(&self, grid: &GridSpec) -> f64 {
        let w = self.width;
        let target = grid.length() / 4.0;
        if target <= w {
            return 0.0;
        }
        0.5 * w * (target * target - w * w).sqrt()
    }
}

/// Zeroes coefficients below the relative cutoff.
pub fn truncate(f: Field) -> Field {
    let max = f.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let thr = max * CUTOFF;
    f.map_values(|z| if z.norm() < thr { Complex64::new(0.0, 0.0) } else { z })
}

/// Compactly supported spectral bump `b(ξ/r)` centered at `center`, scaled by `amp`.
pub fn spectral_bump(grid: &GridSpec, center: &[f64], radius: f64, amp: Complex64) -> Field {
    let center = center.to_vec();
    Field::from_spectral_fn(*grid, move |xi| {
        let mut v = 1.0;
        for (a, &x) in xi.iter().enumerate() {
            let t = (x - center[a]) / radius;
            if t.abs() >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            v *= (1.0 - 1.0 / (1.0 - t * t)).exp();
        }
        amp * v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;

    #[test]
    fn matches_physical_samples() {
        let g = GridSpec::new(1, 512, 8).unwrap();
        let ga = Gaussian::new(1.5, 2.0, 3.0);
        let f = ga.field(&g).idft().unwrap();
        let c = 0.5 * g.length();
        let direct = Field::from_physical_fn(g, |x| {
            let y = x[0] - c;
            Complex64::from_polar(1.5 * (-y * y / 8.0).exp(), 3.0 * y)
        });
        assert!(f.rel_l2_distance(&direct).unwrap() < 1e-13);
        let l2 = f.lp_norm(Exponent::integer(2)).unwrap();
        let exact = 1.5 * (2.0 * PI.sqrt()).sqrt();
        assert!((l2 - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn bump_has_compact_support() {
        let g = GridSpec::new(1, 128, 8).unwrap();
        let b = spectral_bump(&g, &[1.0], 0.25, Complex64::new(1.0, 0.0));
        for (i, z) in b.values().iter().enumerate() {
            if (g.xi(g.mode(i)) - 1.0).abs() >= 0.25 {
                assert_eq!(z.norm(), 0.0);
            }
        }
        assert_eq!(b.values()[g.slot(8).unwrap()].re, (1.0f64 - 1.0).exp());
    }
}
