//! Periodic grids, sampled fields and their discrete Fourier analysis.
//!
//! A [`GridSpec`] describes the torus `[0, 2πP)^d` sampled at `N` points per
//! axis. Spectral fields hold torus Fourier coefficients `a_m` at the
//! frequencies `ξ_m = m/P`, normalized so that
//!
//! ```text
//! f(x_n) = Σ_m a_m e^{i x_n·ξ_m},      ‖f‖₂² = (2πP)^d Σ_m |a_m|².
//! ```
//!
//! Spectral values are stored in FFT order: storage index `i` on an axis
//! holds `m = i` for `i < N/2` and `m = i − N` otherwise.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::fft;
use crate::numeric::kahan_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Physical,
    Spectral,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Physical => write!(f, "physical"),
            Domain::Spectral => write!(f, "spectral"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    n: usize,
    p: u64,
}

impl GridSpec {
    /// Validates `N`, `P` powers of two with `N ≥ 4P`.
    pub fn new(d: usize, n: usize, p: u64) -> Result<Self> {
        let g = Self::relaxed(d, n, p)?;
        if (n as u128) < 4 * p as u128 {
            return Err(Error::InvalidGrid(format!("N = {n} is below 4P = {}", 4 * p as u128)));
        }
        Ok(g)
    }

    /// Grid produced by dyadic dilation; only the power-of-two shape is required.
    fn relaxed(d: usize, n: usize, p: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidGrid(format!("N = {n} is not a power of two ≥ 2")));
        }
        if !p.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("P = {p} is not a power of two")));
        }
        if n.checked_pow(d as u32).is_none() {
            return Err(Error::InvalidGrid("N^d overflows".into()));
        }
        Ok(GridSpec { d, n, p })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> u64 {
        self.p
    }

    pub fn log2_n(&self) -> i32 {
        self.n.trailing_zeros() as i32
    }

    pub fn log2_period(&self) -> i32 {
        self.p.trailing_zeros() as i32
    }

    /// Total number of samples `N^d`.
    pub fn size(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Torus side length `L = 2πP`.
    pub fn length(&self) -> f64 {
        2.0 * PI * self.p as f64
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Cell volume `Δx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Nyquist bound `Ξ = N/(2P)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.p as f64)
    }

    /// Signed frequency index of storage position `i` on one axis.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Storage position of signed mode `m`, if it lies in `[−N/2, N/2)`.
    #[inline]
    pub fn slot(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m < -half || m >= half {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.n as i64) as usize)
        }
    }

    /// Frequency `ξ = m/P` of signed mode `m`.
    #[inline]
    pub fn xi(&self, m: i64) -> f64 {
        m as f64 / self.p as f64
    }

    /// Per-axis storage indices of a flat row-major index (axis 0 slowest).
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.d).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Scale range `[j_min, j_max]` on which unit-window operators are resolved.
    pub fn scale_range(&self) -> (i32, i32) {
        let lo = 3 - self.log2_period();
        let hi = self.log2_n() - 1 - self.log2_period() - 2;
        (lo, hi)
    }

    pub fn check_scale(&self, j: i32) -> Result<()> {
        let (lo, hi) = self.scale_range();
        if j < lo || j > hi {
            Err(Error::ScaleOutOfRange { j, lo, hi })
        } else {
            Ok(())
        }
    }

    /// Grid after the metadata dilation `x ↦ 2^m x`.
    pub fn dilated(&self, m: i32) -> Result<Self> {
        let lp = self.log2_period() - m;
        if !(0..=62).contains(&lp) {
            return Err(Error::DilationOutOfRange { m, period: self.p });
        }
        Self::relaxed(self.d, self.n, 1u64 << lp)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} N={} P={}", self.d, self.n, self.p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
    domain: Domain,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.size(),
                values.len()
            )));
        }
        Ok(Field { grid, values, domain })
    }

    pub fn zeros(grid: GridSpec, domain: Domain) -> Self {
        Field {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.size()],
            domain,
        }
    }

    /// Samples `f` at the grid points `x_n = n·Δx`.
    pub fn from_physical_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let h = grid.spacing();
        let values = (0..grid.size())
            .into_par_iter()
            .map_init(
                || (vec![0usize; grid.d], vec![0.0; grid.d]),
                |(idx, x), flat| {
                    grid.unflatten(flat, idx);
                    for a in 0..grid.d {
                        x[a] = idx[a] as f64 * h;
                    }
                    f(x)
                },
            )
            .collect();
        Field {
            grid,
            values,
            domain: Domain::Physical,
        }
    }

    /// Sets the coefficient at each lattice frequency `ξ_m` to `a(ξ_m)`.
    pub fn from_spectral_fn<F>(grid: GridSpec, a: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.size())
            .into_par_iter()
            .map_init(
                || (vec![0usize; grid.d], vec![0.0; grid.d]),
                |(idx, xi), flat| {
                    grid.unflatten(flat, idx);
                    for ax in 0..grid.d {
                        xi[ax] = grid.xi(grid.mode(idx[ax]));
                    }
                    a(xi)
                },
            )
            .collect();
        Field {
            grid,
            values,
            domain: Domain::Spectral,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn expect(&self, d: Domain) -> Result<()> {
        if self.domain != d {
            Err(Error::WrongDomain {
                expected: d,
                found: self.domain,
            })
        } else {
            Ok(())
        }
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }

    /// Torus Fourier coefficients of a physical field.
    pub fn dft(&self) -> Result<Field> {
        self.expect(Domain::Physical)?;
        let mut v = self.values.clone();
        fft::transform(&mut v, self.grid.d, self.grid.n, false);
        let s = 1.0 / self.grid.size() as f64;
        v.iter_mut().for_each(|z| *z *= s);
        Ok(Field {
            grid: self.grid,
            values: v,
            domain: Domain::Spectral,
        })
    }

    pub fn idft(&self) -> Result<Field> {
        self.expect(Domain::Spectral)?;
        let mut v = self.values.clone();
        fft::transform(&mut v, self.grid.d, self.grid.n, true);
        Ok(Field {
            grid: self.grid,
            values: v,
            domain: Domain::Physical,
        })
    }

    pub fn to_spectral(&self) -> Field {
        match self.domain {
            Domain::Spectral => self.clone(),
            Domain::Physical => self.dft().expect("domain checked"),
        }
    }

    pub fn to_physical(&self) -> Field {
        match self.domain {
            Domain::Physical => self.clone(),
            Domain::Spectral => self.idft().expect("domain checked"),
        }
    }

    /// Riemann-sum `L^p` norm of a physical field.
    pub fn lp_norm(&self, p: Exponent) -> Result<f64> {
        self.expect(Domain::Physical)?;
        p.check_lebesgue()?;
        Ok(lp_of_samples(&self.values, self.grid.cell_volume(), p))
    }

    /// `L²` norm via Plancherel; valid in either domain.
    pub fn l2_norm(&self) -> f64 {
        match self.domain {
            Domain::Physical => lp_of_samples(&self.values, self.grid.cell_volume(), Exponent::integer(2)),
            Domain::Spectral => {
                let s = kahan_sum(self.values.iter().map(|z| z.norm_sqr()));
                (self.grid.length().powi(self.grid.d as i32) * s).sqrt()
            }
        }
    }

    /// `f_λ(x) = f(2^m x)`: same samples on the torus of period `P·2^{−m}`.
    pub fn dilate_dyadic(&self, m: i32) -> Result<Field> {
        Ok(Field {
            grid: self.grid.dilated(m)?,
            values: self.values.clone(),
            domain: self.domain,
        })
    }

    /// Applies the Fourier multiplier `(1 + |ξ|²)^{s/2}`; keeps the domain.
    pub fn bessel_multiplier(&self, s: f64) -> Field {
        self.spectral_multiplier(|xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            Complex64::new((1.0 + r2).powf(0.5 * s), 0.0)
        })
    }

    /// Multiplies the coefficients by `m(ξ)`; returns a field in the input's domain.
    pub fn spectral_multiplier<M>(&self, m: M) -> Field
    where
        M: Fn(&[f64]) -> Complex64 + Sync,
    {
        let mut spec = self.to_spectral();
        let grid = self.grid;
        spec.values.par_iter_mut().enumerate().for_each_init(
            || (vec![0usize; grid.d], vec![0.0; grid.d]),
            |(idx, xi), (flat, z)| {
                grid.unflatten(flat, idx);
                for a in 0..grid.d {
                    xi[a] = grid.xi(grid.mode(idx[a]));
                }
                *z *= m(xi);
            },
        );
        match self.domain {
            Domain::Spectral => spec,
            Domain::Physical => spec.idft().expect("spectral"),
        }
    }

    pub fn map_values<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> Field {
        Field {
            grid: self.grid,
            values: self.values.par_iter().map(|z| f(*z)).collect(),
            domain: self.domain,
        }
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map_values(|z| z * c)
    }

    fn zip_with<F: Fn(Complex64, Complex64) -> Complex64 + Sync>(&self, other: &Field, f: F) -> Result<Field> {
        self.same_grid(other)?;
        if self.domain != other.domain {
            return Err(Error::WrongDomain {
                expected: self.domain,
                found: other.domain,
            });
        }
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(a, b)| f(*a, *b))
                .collect(),
            domain: self.domain,
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product of two physical fields.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.expect(Domain::Physical)?;
        self.zip_with(other, |a, b| a * b)
    }

    /// Relative `L²` distance `‖self − other‖₂ / ‖other‖₂` (absolute if `other = 0`).
    pub fn rel_l2_distance(&self, other: &Field) -> Result<f64> {
        let a = self.to_physical();
        let b = other.to_physical();
        let diff = a.sub(&b)?.l2_norm();
        let base = b.l2_norm();
        Ok(if base > 0.0 { diff / base } else { diff })
    }

    /// Indices whose magnitude exceeds `1e−300`.
    pub fn nonzero_indices(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 1e-300)
            .map(|(i, _)| i)
            .collect()
    }
}

/// `(Σ |v|^p Δ)^{1/p}` with max-rescaling; `p = ∞` gives `max |v|`.
pub(crate) fn lp_of_samples(values: &[Complex64], cell: f64, p: Exponent) -> f64 {
    let max = values.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    match p {
        Exponent::Infinity => max,
        Exponent::Finite(_) => {
            if max == 0.0 {
                return 0.0;
            }
            let pv = p.value();
            let s = if pv == 2.0 {
                kahan_sum(values.iter().map(|z| {
                    let r = z.norm() / max;
                    r * r
                }))
            } else if pv == 1.0 {
                kahan_sum(values.iter().map(|z| z.norm() / max))
            } else {
                kahan_sum(values.iter().map(|z| (z.norm() / max).powf(pv)))
            };
            max * (s * cell).powf(1.0 / pv)
        }
    }
}

/// `⟨f, g⟩ = Σ f ḡ Δx^d` on a shared grid.
pub fn pairing(f: &Field, g: &Field) -> Result<Complex64> {
    f.same_grid(g)?;
    let a = f.to_physical();
    let b = g.to_physical();
    let prods: Vec<Complex64> = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).collect();
    let re = kahan_sum(prods.iter().map(|z| z.re));
    let im = kahan_sum(prods.iter().map(|z| z.im));
    Ok(Complex64::new(re, im) * f.grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_field(grid: GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.size())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(grid, v, Domain::Physical).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1, 64, 16).is_ok());
        assert!(GridSpec::new(1, 32, 16).is_err());
        assert!(GridSpec::new(1, 96, 4).is_err());
        assert!(GridSpec::new(1, 64, 3).is_err());
        assert!(GridSpec::new(0, 64, 1).is_err());
    }

    #[test]
    fn scale_range_matches_formula() {
        let g = GridSpec::new(1, 1024, 128).unwrap();
        // j_min = ⌈log₂(8/128)⌉ = −4, j_max = ⌊log₂(4/4)⌋ = 0
        assert_eq!(g.scale_range(), (-4, 0));
    }

    #[test]
    fn constant_has_single_coefficient() {
        let g = GridSpec::new(2, 16, 2).unwrap();
        let f = Field::from_physical_fn(g, |_| c(1.0));
        let a = f.dft().unwrap();
        assert!((a.values()[0] - c(1.0)).norm() < 1e-15);
        assert!(a.values()[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn pure_mode_is_orthogonal() {
        let g = GridSpec::new(1, 64, 4).unwrap();
        let m0 = -7_i64;
        let xi0 = g.xi(m0);
        let f = Field::from_physical_fn(g, |x| Complex64::from_polar(1.0, xi0 * x[0]));
        let a = f.dft().unwrap();
        for (i, z) in a.values().iter().enumerate() {
            let want = if g.mode(i) == m0 { 1.0 } else { 0.0 };
            assert!((z - c(want)).norm() < 1e-13);
        }
    }

    #[test]
    fn round_trip_and_plancherel() {
        let g = GridSpec::new(2, 32, 4).unwrap();
        let f = random_field(g, 3);
        let back = f.dft().unwrap().idft().unwrap();
        assert!(back.rel_l2_distance(&f).unwrap() < 1e-12);
        let direct = f.lp_norm(Exponent::integer(2)).unwrap();
        let spectral = f.dft().unwrap().l2_norm();
        assert!(((direct * direct - spectral * spectral) / (direct * direct)).abs() < 1e-10);
    }

    #[test]
    fn wrong_domain_is_rejected() {
        let g = GridSpec::new(1, 16, 2).unwrap();
        let f = Field::zeros(g, Domain::Spectral);
        assert!(matches!(f.dft(), Err(Error::WrongDomain { .. })));
        assert!(f.lp_norm(Exponent::integer(2)).is_err());
        assert!(f.to_physical().idft().is_err());
    }

    #[test]
    fn constant_lp_norms() {
        let g = GridSpec::new(2, 16, 1).unwrap();
        let f = Field::from_physical_fn(g, |_| c(1.0));
        let two = f.lp_norm(Exponent::integer(2)).unwrap();
        assert!((two - 2.0 * PI).abs() < 1e-12);
        assert_eq!(f.lp_norm(Exponent::Infinity).unwrap(), 1.0);
        assert!(f.lp_norm(Exponent::Finite(crate::exponent::r(1, 2))).is_err());
    }

    #[test]
    fn gaussian_lp_matches_integral() {
        let g = GridSpec::new(1, 512, 8).unwrap();
        let xc = PI * 8.0;
        let f = Field::from_physical_fn(g, |x| c((-(x[0] - xc).powi(2) / 2.0).exp()));
        for p in [1.0, 2.0, 3.0, 4.0] {
            let exact = (2.0 * PI / p).sqrt().powf(1.0 / p);
            let got = f
                .lp_norm(Exponent::Finite(
                    crate::exponent::parse_rational(&p.to_string()).unwrap(),
                ))
                .unwrap();
            assert!((got - exact).abs() < 1e-8, "p={p}: {got} vs {exact}");
        }
    }

    #[test]
    fn dilation_scales_norms_exactly() {
        let g = GridSpec::new(1, 128, 8).unwrap();
        let f = random_field(g, 9);
        for m in [-2, 0, 1, 3] {
            let fl = f.dilate_dyadic(m).unwrap();
            for p in [1, 2, 4] {
                let p = Exponent::integer(p);
                let want = 2f64.powf(-(m as f64) / p.value()) * f.lp_norm(p).unwrap();
                let got = fl.lp_norm(p).unwrap();
                assert!((got - want).abs() <= 1e-13 * want);
            }
            assert_eq!(
                fl.lp_norm(Exponent::Infinity).unwrap(),
                f.lp_norm(Exponent::Infinity).unwrap()
            );
        }
        assert!(f.dilate_dyadic(4).is_err());
    }

    #[test]
    fn dilated_pure_mode_doubles_frequency() {
        let g = GridSpec::new(1, 64, 4).unwrap();
        let xi0 = g.xi(5);
        let f = Field::from_physical_fn(g, |x| Complex64::from_polar(1.0, xi0 * x[0]));
        let a = f.dilate_dyadic(1).unwrap().dft().unwrap();
        let gp = *a.grid();
        assert_eq!(gp.period(), 2);
        let slot = (0..64).find(|&i| (a.values()[i] - c(1.0)).norm() < 1e-12).unwrap();
        assert_eq!(gp.xi(gp.mode(slot)), 2.0 * xi0);
    }

    #[test]
    fn bessel_multiplier_on_modes() {
        let g = GridSpec::new(1, 64, 2).unwrap();
        let f = Field::from_physical_fn(g, |_| c(1.0));
        assert!(f.bessel_multiplier(2.0).rel_l2_distance(&f).unwrap() < 1e-14);
        let xi0 = g.xi(3);
        let e = Field::from_physical_fn(g, |x| Complex64::from_polar(1.0, xi0 * x[0]));
        let got = e.bessel_multiplier(2.0);
        let want = e.scale(c(1.0 + xi0 * xi0));
        assert!(got.rel_l2_distance(&want).unwrap() < 1e-13);
        assert!(e.bessel_multiplier(0.0).rel_l2_distance(&e).unwrap() < 1e-14);
    }

    #[test]
    fn pairing_identities() {
        let g = GridSpec::new(1, 64, 2).unwrap();
        let f = random_field(g, 1);
        let ff = pairing(&f, &f).unwrap();
        assert!((ff.re - f.l2_norm().powi(2)).abs() < 1e-10 * ff.re);
        let a = Field::from_physical_fn(g, |x| Complex64::from_polar(1.0, x[0]));
        let b = Field::from_physical_fn(g, |x| Complex64::from_polar(1.0, 2.0 * x[0]));
        assert!(pairing(&a, &b).unwrap().norm() < 1e-12);
    }
}
