//! The unit-cube window `ψ` and its dilates, plus the low-pass cutoff `σ`.
//!
//! The 1-d profile is a normalized bump, `h(t) = b(t) / Σ_m b(t − m)`, so the
//! integer translates of `h` sum to one at evaluation precision. `ψ` is the
//! tensor product of `h` over the axes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

pub const SUPPORT_RADIUS: f64 = 0.75;
pub const PLATEAU_RADIUS: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// `exp(−1/((3/4)² − t²))`, infinitely smooth.
    Smooth,
    /// `((3/4)² − t²)^{m+1}`, of class `C^m`.
    Polynomial { order: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowFamily {
    profile: Profile,
}

impl Default for WindowFamily {
    fn default() -> Self {
        WindowFamily::smooth()
    }
}

impl WindowFamily {
    pub fn smooth() -> Self {
        WindowFamily {
            profile: Profile::Smooth,
        }
    }

    /// A `C^m` window built from a polynomial bump; `m ≥ 4`.
    pub fn with_smoothness(order: u32) -> Result<Self> {
        if order < 4 {
            return Err(Error::Precondition(format!("window smoothness {order} is below 4")));
        }
        Ok(WindowFamily {
            profile: Profile::Polynomial { order },
        })
    }

    pub fn profile_kind(&self) -> Profile {
        self.profile
    }

    /// Number of continuous derivatives, `None` for `C^∞`.
    pub fn smoothness(&self) -> Option<u32> {
        match self.profile {
            Profile::Smooth => None,
            Profile::Polynomial { order } => Some(order),
        }
    }

    #[inline]
    fn bump(&self, t: f64) -> f64 {
        let g = SUPPORT_RADIUS * SUPPORT_RADIUS - t * t;
        if g <= 0.0 {
            return 0.0;
        }
        match self.profile {
            Profile::Smooth => (-1.0 / g).exp(),
            Profile::Polynomial { order } => g.powi(order as i32 + 1),
        }
    }

    /// The profile `h`.
    #[inline]
    pub fn h(&self, t: f64) -> f64 {
        let b = self.bump(t);
        if b == 0.0 {
            return 0.0;
        }
        let r = t.round();
        let s = self.bump(t - r + 1.0) + self.bump(t - r) + self.bump(t - r - 1.0);
        b / s
    }

    /// `ψ(ξ) = Π h(ξ_i)`.
    pub fn eval_psi(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&t| self.h(t)).product()
    }

    /// Window values on one axis at scale `j`, shift `k`: `(slot, h(2^{−j}ξ_m − k))`
    /// for every lattice mode where the value is nonzero.
    pub fn axis_support(&self, grid: &GridSpec, j: i32, k: i64) -> Vec<(usize, f64)> {
        // mode m hits the window iff |m·2^{−j}/P − k| < 3/4
        let scale = grid.period() as f64 * (j as f64).exp2();
        let lo = ((k as f64 - SUPPORT_RADIUS) * scale).floor() as i64;
        let hi = ((k as f64 + SUPPORT_RADIUS) * scale).ceil() as i64;
        let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        for m in lo..=hi {
            let Some(slot) = grid.slot(m) else { continue };
            let v = self.h(window_arg(grid, j, m) - k as f64);
            if v > 0.0 {
                out.push((slot, v));
            }
        }
        out
    }

    /// Sparse tensor-product mask `ψ_{j,k}` on the lattice.
    pub fn sparse_mask(&self, grid: &GridSpec, j: i32, k: &[i64]) -> Result<SparseMask> {
        grid.check_scale(j)?;
        if k.len() != grid.dim() {
            return Err(Error::Precondition(format!(
                "shift has {} components on a {}-d grid",
                k.len(),
                grid.dim()
            )));
        }
        Ok(SparseMask {
            axes: k.iter().map(|&ki| self.axis_support(grid, j, ki)).collect(),
        })
    }

    /// Dense spectral field holding `ψ(2^{−j}ξ_m − k)`.
    pub fn spectral_mask(&self, grid: &GridSpec, j: i32, k: &[i64]) -> Result<Field> {
        let mask = self.sparse_mask(grid, j, k)?;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.size()];
        mask.for_each(grid, |flat, w| values[flat] = Complex64::new(w, 0.0));
        Field::new(*grid, values, crate::grid::Domain::Spectral)
    }
}

/// `2^{−j}ξ_m`, computed so that it agrees bit-for-bit with `ξ_m` on the
/// grid dilated by `−j`.
#[inline]
pub fn window_arg(grid: &GridSpec, j: i32, m: i64) -> f64 {
    grid.xi(m) * (-(j as f64)).exp2()
}

/// Per-axis nonzero values of a tensor-product window.
#[derive(Clone, Debug)]
pub struct SparseMask {
    pub axes: Vec<Vec<(usize, f64)>>,
}

impl SparseMask {
    pub fn is_empty(&self) -> bool {
        self.axes.iter().any(|a| a.is_empty())
    }

    /// Visits `(flat index, weight)` over the support box.
    pub fn for_each<F: FnMut(usize, f64)>(&self, grid: &GridSpec, mut f: F) {
        if self.is_empty() {
            return;
        }
        let d = self.axes.len();
        let mut pos = vec![0usize; d];
        let mut idx = vec![0usize; d];
        loop {
            let mut w = 1.0;
            for a in 0..d {
                let (slot, v) = self.axes[a][pos[a]];
                idx[a] = slot;
                w *= v;
            }
            f(grid.flatten(&idx), w);
            let mut a = d;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                pos[a] += 1;
                if pos[a] < self.axes[a].len() {
                    break;
                }
                pos[a] = 0;
            }
        }
    }
}

/// Lattice audit of one scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleAudit {
    pub j: i32,
    /// `max_m |Σ_k ψ_{j,k}(ξ_m) − 1|`.
    pub partition_error: f64,
    /// Lattice points where two windows at index distance ≥ 2 are both nonzero.
    pub support_violations: usize,
    /// Lattice points inside a plateau where the window is not exactly 1.
    pub plateau_violations: usize,
}

/// Audits partition of unity, support and plateau on every valid scale. The
/// window is a tensor product, so one axis decides the `d`-dimensional case.
pub fn window_audit(w: &WindowFamily, grid: &GridSpec) -> Vec<ScaleAudit> {
    let (lo, hi) = grid.scale_range();
    let half = grid.n() as i64 / 2;
    (lo..=hi)
        .map(|j| {
            let mut err = 0.0_f64;
            let mut support = 0;
            let mut plateau = 0;
            for m in -half..half {
                let t = window_arg(grid, j, m);
                let k0 = t.round() as i64;
                let vals: Vec<(i64, f64)> = (k0 - 2..=k0 + 2).map(|k| (k, w.h(t - k as f64))).collect();
                let sum: f64 = vals.iter().map(|(_, v)| v).sum();
                err = err.max((sum - 1.0).abs());
                let live: Vec<i64> = vals.iter().filter(|(_, v)| *v > 0.0).map(|(k, _)| *k).collect();
                if live.iter().any(|a| live.iter().any(|b| (a - b).abs() >= 2)) {
                    support += 1;
                }
                if vals
                    .iter()
                    .any(|&(k, v)| (t - k as f64).abs() <= PLATEAU_RADIUS && v != 1.0)
                {
                    plateau += 1;
                }
            }
            ScaleAudit {
                j,
                partition_error: err,
                support_violations: support,
                plateau_violations: plateau,
            }
        })
        .collect()
}

/// Smooth step: 1 on `|t| ≤ 1`, 0 on `|t| ≥ 2`.
pub fn lowpass_profile(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let x = 2.0 - a;
        let e = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
        let (p, q) = (e(x), e(1.0 - x));
        p / (p + q)
    }
}

/// `σ(ξ) = Π g(ξ_i)`.
pub fn eval_sigma(xi: &[f64]) -> f64 {
    xi.iter().map(|&t| lowpass_profile(t)).product()
}

/// Scales at which `σ_j` is resolved: the transition band holds at least
/// four lattice points, and the cutoff is not yet identically one.
pub fn lowpass_range(grid: &GridSpec) -> (i32, i32) {
    let lo = 2 - grid.log2_period();
    let hi = grid.log2_n() - 1 - grid.log2_period() + 1;
    (lo, hi)
}

/// Spectral field holding `σ(2^{−j}ξ_m)`.
pub fn build_lowpass(grid: &GridSpec, j: i32) -> Result<Field> {
    let (lo, hi) = lowpass_range(grid);
    if j < lo || j > hi {
        return Err(Error::ScaleOutOfRange { j, lo, hi });
    }
    let s = (-(j as f64)).exp2();
    Ok(Field::from_spectral_fn(*grid, |xi| {
        Complex64::new(xi.iter().map(|&t| lowpass_profile(t * s)).product(), 0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_plateau_and_support() {
        for w in [WindowFamily::smooth(), WindowFamily::with_smoothness(4).unwrap()] {
            assert_eq!(w.h(0.0), 1.0);
            assert_eq!(w.h(0.25), 1.0);
            assert_eq!(w.h(-0.2), 1.0);
            assert_eq!(w.h(0.8), 0.0);
            assert_eq!(w.h(0.75), 0.0);
            assert!((w.h(0.5) + w.h(-0.5) - 1.0).abs() < 1e-15);
            assert!((w.h(0.5) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn partition_of_unity_on_reals() {
        let w = WindowFamily::smooth();
        for i in 0..=4000 {
            let t = -3.0 + 6.0 * i as f64 / 4000.0;
            let s: f64 = (-5..=5).map(|m| w.h(t - m as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14, "t={t}: {s}");
        }
    }

    #[test]
    fn low_smoothness_rejected() {
        assert!(WindowFamily::with_smoothness(3).is_err());
    }

    #[test]
    fn psi_is_tensor_product() {
        let w = WindowFamily::smooth();
        assert_eq!(w.eval_psi(&[0.0, 0.0]), 1.0);
        assert_eq!(w.eval_psi(&[0.9, 0.0]), 0.0);
        let h = w.h(0.5);
        assert_eq!(w.eval_psi(&[0.5, 0.5]), h * h);
    }

    #[test]
    fn masks_cover_the_lattice() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(1, 256, 8).unwrap();
        let (lo, hi) = g.scale_range();
        for j in lo..=hi {
            let mut total = vec![0.0; g.n()];
            let kmax = (g.nyquist() * (-(j as f64)).exp2()).ceil() as i64 + 1;
            for k in -kmax..=kmax {
                let m = w.sparse_mask(&g, j, &[k]).unwrap();
                m.for_each(&g, |i, v| total[i] += v);
            }
            for t in total {
                assert!((t - 1.0).abs() < 1e-12);
            }
        }
        assert!(w.sparse_mask(&g, hi + 1, &[0]).is_err());
    }

    #[test]
    fn audit_is_clean() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(1, 512, 16).unwrap();
        let a = window_audit(&w, &g);
        assert_eq!(a.len() as i32, g.scale_range().1 - g.scale_range().0 + 1);
        for s in a {
            assert!(s.partition_error < 1e-12);
            assert_eq!((s.support_violations, s.plateau_violations), (0, 0));
        }
    }

    #[test]
    fn distant_masks_are_disjoint() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(2, 64, 8).unwrap();
        let a = w.spectral_mask(&g, 0, &[0, 0]).unwrap();
        let b = w.spectral_mask(&g, 0, &[2, -1]).unwrap();
        let overlap: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x * y).norm()).sum();
        assert_eq!(overlap, 0.0);
        let far = w.spectral_mask(&g, 0, &[5, 0]).unwrap();
        assert_eq!(far.values()[0].re, 0.0);
        assert_eq!(a.values()[0].re, 1.0);
    }

    #[test]
    fn lowpass_values() {
        let g = GridSpec::new(1, 64, 4).unwrap();
        let s = build_lowpass(&g, 0).unwrap();
        assert_eq!(s.values()[0].re, 1.0);
        let slot = g.slot(12).unwrap(); // ξ = 3
        assert_eq!(s.values()[slot].re, 0.0);
        assert_eq!(eval_sigma(&[1.0, -1.0]), 1.0);
        assert!((lowpass_profile(1.5) - 0.5).abs() < 1e-15);
    }
}
