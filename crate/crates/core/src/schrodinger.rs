//! The free Schrödinger group `S(t) = e^{itΔ}`, the Duhamel operator and the
//! dispersive and Strichartz checks.
//!
//! `S(t)` multiplies coefficients by `e^{−it|ξ|²}`. The Duhamel operator is
//! `𝒜F(t) = ∫_{t0}^t S(t−τ)F(τ)dτ` with the composite trapezoid rule on the
//! trajectory's nodes; with `u = S(t)u₀ + i𝒜F` one has `i∂_t u + Δu + F = 0`.

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::decomp::piece_norms;
use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, Exponent, Rational};
use crate::grid::{Domain, Field, GridSpec};
use crate::harness::report::{RatioReport, ReportBuilder};
use crate::norms::mj_norm;
use crate::norms::spacetime::window_time_profiles;
use crate::numeric::{fit_slope, trapezoid_weights, weighted_power_mean};
use crate::profiles::Gaussian;
use crate::trajectory::Trajectory;
use crate::windows::WindowFamily;

/// `S(t)u₀`, returned in the input's domain.
pub fn propagate(u0: &Field, t: f64) -> Field {
    u0.spectral_multiplier(|xi| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        Complex64::from_polar(1.0, -t * r2)
    })
}

/// Phase table `e^{−iτ|ξ_m|²}` in storage order.
fn phases(grid: &GridSpec, tau: f64) -> Vec<Complex64> {
    let unit = Field::from_spectral_fn(*grid, |xi| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        Complex64::from_polar(1.0, -tau * r2)
    });
    unit.into_values()
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Ok(0.0);
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(Error::Precondition("Duhamel needs a uniform time grid".into()));
        }
    }
    Ok(dt)
}

/// `𝒜F(t)` at a node `t` of `F`'s time grid, as a physical field.
pub fn duhamel(forcing: &Trajectory, t: f64) -> Result<Field> {
    let n = forcing.node_index(t)?;
    uniform_step(forcing.times())?;
    let grid = *forcing.grid();
    let tw = trapezoid_weights(&forcing.times()[..=n]);
    let terms: Vec<Vec<Complex64>> = (0..=n)
        .into_par_iter()
        .map(|m| {
            let spec = forcing.fields()[m].to_spectral();
            let ph = phases(&grid, t - forcing.times()[m]);
            spec.values().iter().zip(&ph).map(|(a, p)| a * p * tw[m]).collect()
        })
        .collect();
    let mut acc = vec![Complex64::zero(); grid.size()];
    for term in &terms {
        for (a, v) in acc.iter_mut().zip(term) {
            *a += v;
        }
    }
    Field::new(grid, acc, Domain::Spectral)?.idft()
}

/// `𝒜F` at every node, by the recursion
/// `A_n = S(Δt)(A_{n−1} + Δt/2·F_{n−1}) + Δt/2·F_n`. Spectral output.
pub fn duhamel_all(forcing: &Trajectory) -> Result<Vec<Field>> {
    let dt = uniform_step(forcing.times())?;
    let grid = *forcing.grid();
    let ph = phases(&grid, dt);
    let specs: Vec<Field> = forcing.fields().par_iter().map(|f| f.to_spectral()).collect();
    let mut out = Vec::with_capacity(specs.len());
    let mut acc = vec![Complex64::zero(); grid.size()];
    out.push(Field::new(grid, acc.clone(), Domain::Spectral)?);
    let h = 0.5 * dt;
    for n in 1..specs.len() {
        let prev = specs[n - 1].values();
        let cur = specs[n].values();
        for i in 0..acc.len() {
            acc[i] = ph[i] * (acc[i] + h * prev[i]) + h * cur[i];
        }
        out.push(Field::new(grid, acc.clone(), Domain::Spectral)?);
    }
    Ok(out)
}

/// A space-time exponent pair `(γ, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentPair {
    pub gamma: Exponent,
    pub p: Exponent,
}

impl ExponentPair {
    pub fn new(gamma: Exponent, p: Exponent) -> Self {
        ExponentPair { gamma, p }
    }

    /// Parses `"γ,p"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (g, p) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected γ,p in {s:?}")))?;
        Ok(ExponentPair::new(g.parse()?, p.parse()?))
    }

    /// `2/γ(p) = d(1/2 − 1/p)`.
    pub fn two_over_gamma_p(d: usize, p: Exponent) -> Rational {
        Rational::from_integer(d as i64) * (Rational::new(1, 2) - p.reciprocal())
    }

    /// `δ(p, γ) = 2/γ(p) − 2/γ`.
    pub fn delta(&self, d: usize) -> Rational {
        Self::two_over_gamma_p(d, self.p) - Rational::from_integer(2) * self.gamma.reciprocal()
    }

    pub fn is_admissible(&self, d: usize) -> bool {
        let two = Rational::from_integer(2);
        let half = Rational::new(1, 2);
        let p_ok = self.p.reciprocal() <= half;
        let g_ok = self.gamma.reciprocal() <= half;
        let strich = two * self.gamma.reciprocal() <= Self::two_over_gamma_p(d, self.p);
        let endpoint = d == 2 && self.gamma == Exponent::integer(2) && self.p.is_infinite();
        p_ok && g_ok && strich && !endpoint
    }

    pub fn check(&self, d: usize) -> Result<()> {
        if self.is_admissible(d) {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!(
                "(γ, p) = ({}, {}) in d = {d}",
                self.gamma, self.p
            )))
        }
    }
}

impl std::fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.gamma, self.p)
    }
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Ratios `‖S(t)u₀‖_{M^[j]_{p,q}} / (⟨2^{2j}t⟩^{d|1/2−1/p|} ‖u₀‖_{M^[j]_{p,q}})`.
#[allow(clippy::too_many_arguments)]
pub fn check_propagator_mj_bound(
    w: &WindowFamily,
    corpus: &[(String, Field)],
    j_list: &[i32],
    p: Exponent,
    q: Exponent,
    t_list: &[f64],
) -> Result<RatioReport> {
    let mut b = ReportBuilder::new("propagator_mj_bound").param("p", p).param("q", q);
    let d = corpus.first().map_or(1, |(_, f)| f.grid().dim());
    let expo = d as f64 * (0.5 - rational_to_f64(p.reciprocal())).abs();
    for (idx, (tag, u0)) in corpus.iter().enumerate() {
        let u0 = u0.to_spectral();
        for &j in j_list {
            let base = mj_norm(w, &u0, j, p, q)?;
            if base == 0.0 {
                continue;
            }
            for &t in t_list {
                let lhs = mj_norm(w, &propagate(&u0, t), j, p, q)?;
                let bound = bracket((2.0 * j as f64).exp2() * t).powf(expo) * base;
                b.push(idx, tag, format!("j={j},t={t}"), format!("t={t}"), lhs / bound);
            }
        }
    }
    Ok(b.finish(corpus.len().div_ceil(2), 4.0))
}

/// Ratios `‖□_{j,k}S(t)u₀‖_p / (min(|t|^{−2/γ(p)}, 2^{4j/γ(p)}) ‖u₀‖_{p'})`,
/// maximized over `k`, grouped by `j`.
pub fn check_dispersive_decay(
    w: &WindowFamily,
    corpus: &[(String, Field)],
    pair: ExponentPair,
    j_list: &[i32],
    t_list: &[f64],
) -> Result<RatioReport> {
    let d = corpus.first().map_or(1, |(_, f)| f.grid().dim());
    pair.check(d)?;
    let p = pair.p;
    let pc = p.conjugate()?;
    let s = rational_to_f64(ExponentPair::two_over_gamma_p(d, p));
    let mut b = ReportBuilder::new("dispersive_decay")
        .param("pair", pair)
        .param("two_over_gamma_p", s);
    for (idx, (tag, u0)) in corpus.iter().enumerate() {
        let rhs0 = u0.to_physical().lp_norm(pc)?;
        let spec = u0.to_spectral();
        for &j in j_list {
            for &t in t_list {
                let ut = propagate(&spec, t);
                let best = piece_norms(w, &ut, j, p)?
                    .into_iter()
                    .map(|(_, v)| v)
                    .fold(0.0, f64::max);
                let m = (t.abs().powf(-s)).min((4.0 * j as f64 * s / 2.0).exp2());
                b.push(idx, tag, format!("j={j},t={t}"), format!("j={j}"), best / (m * rhs0));
            }
        }
    }
    Ok(b.finish(corpus.len().div_ceil(2), 4.0))
}

/// Largest relative jump of the dispersive ratio across `t = 2^{−2j}`, comparing
/// `t(1 ± eps)` against the value at the crossover.
pub fn crossover_jump(w: &WindowFamily, u0: &Field, pair: ExponentPair, j: i32, eps: f64) -> Result<f64> {
    let d = u0.grid().dim();
    let s = rational_to_f64(ExponentPair::two_over_gamma_p(d, pair.p));
    let tc = (-2.0 * j as f64).exp2();
    let rhs0 = u0.to_physical().lp_norm(pair.p.conjugate()?)?;
    let spec = u0.to_spectral();
    let ratio = |t: f64| -> Result<f64> {
        let best = piece_norms(w, &propagate(&spec, t), j, pair.p)?
            .into_iter()
            .map(|(_, v)| v)
            .fold(0.0, f64::max);
        let m = (t.powf(-s)).min((2.0 * j as f64 * s).exp2());
        Ok(best / (m * rhs0))
    };
    let mid = ratio(tc)?;
    let lo = ratio(tc * (1.0 - eps))?;
    let hi = ratio(tc * (1.0 + eps))?;
    Ok(((lo - mid).abs().max((hi - mid).abs())) / mid)
}

/// Log-log slope of `t ↦ ‖S(t)u₀‖_p` over `n` log-spaced times in `[t0, t1]`.
pub fn decay_slope(u0: &Field, p: Exponent, t0: f64, t1: f64, n: usize) -> Result<f64> {
    let spec = u0.to_spectral();
    let ts: Vec<f64> = (0..n)
        .map(|i| (t0.ln() + (t1.ln() - t0.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let norms: Vec<f64> = ts
        .par_iter()
        .map(|&t| propagate(&spec, t).idft().and_then(|f| f.lp_norm(p)))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok(fit_slope(&x, &y))
}

/// `‖F‖_{L^γ_t L^p_x}` with trapezoid weights.
pub fn spacetime_lp(traj: &Trajectory, gamma: Exponent, p: Exponent) -> Result<f64> {
    let v: Vec<f64> = traj
        .fields()
        .par_iter()
        .map(|f| f.to_physical().lp_norm(p))
        .collect::<Result<_>>()?;
    Ok(weighted_power_mean(&v, &trapezoid_weights(traj.times()), gamma))
}

/// Scale-adapted data for the Strichartz checks: a Gaussian of width
/// `2^{−j}·w` modulated to `2^j·ξ0`, on a time window `[0, 2^{−2j}T]`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledData {
    pub width: f64,
    pub xi0: f64,
}

impl ScaledData {
    pub fn at_scale(&self, j: i32) -> Gaussian {
        let s = (j as f64).exp2();
        Gaussian::new(1.0, self.width / s, self.xi0 * s)
    }
}

/// `‖□_{j,k}S(t)u₀‖_{L^γ_t([0,T_j]) L^p_x} / (2^{2j(1/γ(p)−1/γ)}‖u₀‖₂)`, maximized
/// over `k`, grouped by `j`. `T_j = 2^{−2j}T` and `u₀` is scale-adapted.
pub fn check_strichartz_homogeneous(
    w: &WindowFamily,
    grid: &GridSpec,
    data: &[ScaledData],
    pair: ExponentPair,
    j_list: &[i32],
    t_final: f64,
    steps: usize,
) -> Result<RatioReport> {
    let d = grid.dim();
    pair.check(d)?;
    let expo = rational_to_f64(pair.delta(d)) / 2.0;
    let mut b = ReportBuilder::new("strichartz_homogeneous")
        .param("pair", pair)
        .param("T", t_final)
        .param("steps", steps);
    for (idx, dat) in data.iter().enumerate() {
        for &j in j_list {
            let u0 = dat.at_scale(j).field(grid);
            let tj = t_final * (-2.0 * j as f64).exp2();
            let dt = tj / steps as f64;
            let traj = Trajectory::sample(0.0, dt, steps, |t| propagate(&u0, t))?;
            let tw = trapezoid_weights(traj.times());
            let best = window_time_profiles(w, &traj, j, pair.p)?
                .values()
                .map(|v| weighted_power_mean(v, &tw, pair.gamma))
                .fold(0.0, f64::max);
            let bound = (2.0 * j as f64 * expo).exp2() * u0.l2_norm();
            b.push(
                idx,
                "gaussian",
                format!("j={j},width={},xi0={}", dat.width, dat.xi0),
                format!("j={j}"),
                best / bound,
            );
        }
    }
    Ok(b.finish(data.len().div_ceil(2), 4.0))
}

/// `‖□_{j,k}𝒜F‖_{L^β_t L^r_x} / (2^{2j(1/γ(p)−1/γ) + 2j(1/γ(r)−1/β)} ‖F‖_{L^{γ'}_t L^{p'}_x})`
/// for scale-adapted forcing `F(t,x) = χ(t/T_j)·u_j(x)` with a smooth time bump `χ`
/// on `[0, T_j]`, measured over `[0, 2T_j]`.
#[allow(clippy::too_many_arguments)]
pub fn check_strichartz_inhomogeneous(
    w: &WindowFamily,
    grid: &GridSpec,
    data: &[ScaledData],
    pair1: ExponentPair,
    pair2: ExponentPair,
    j_list: &[i32],
    t_final: f64,
    steps: usize,
) -> Result<RatioReport> {
    let d = grid.dim();
    pair1.check(d)?;
    pair2.check(d)?;
    let e1 = rational_to_f64(pair1.delta(d)) / 2.0;
    let e2 = rational_to_f64(pair2.delta(d)) / 2.0;
    let gc = pair1.gamma.conjugate()?;
    let pc = pair1.p.conjugate()?;
    let mut b = ReportBuilder::new("strichartz_inhomogeneous")
        .param("pair1", pair1)
        .param("pair2", pair2)
        .param("T", t_final)
        .param("steps", steps);
    for (idx, dat) in data.iter().enumerate() {
        for &j in j_list {
            let u = dat.at_scale(j).field(grid);
            let tj = t_final * (-2.0 * j as f64).exp2();
            let dt = 2.0 * tj / steps as f64;
            let forcing = Trajectory::sample(0.0, dt, steps, |t| {
                let s = t / tj;
                let chi = if s > 0.0 && s < 1.0 {
                    (4.0 - 1.0 / (s * (1.0 - s))).exp()
                } else {
                    0.0
                };
                u.scale(Complex64::new(chi, 0.0))
            })?;
            let a = duhamel_all(&forcing)?;
            let traj = Trajectory::new(forcing.times().to_vec(), a)?;
            let tw = trapezoid_weights(traj.times());
            let best = window_time_profiles(w, &traj, j, pair2.p)?
                .values()
                .map(|v| weighted_power_mean(v, &tw, pair2.gamma))
                .fold(0.0, f64::max);
            let rhs = spacetime_lp(&forcing, gc, pc)?;
            let bound = (2.0 * j as f64 * (e1 + e2)).exp2() * rhs;
            b.push(
                idx,
                "gaussian_bump",
                format!("j={j},width={},xi0={}", dat.width, dat.xi0),
                format!("j={j}"),
                best / bound,
            );
        }
    }
    Ok(b.finish(data.len().div_ceil(2), 4.0))
}

/// Centered-difference residual `‖i∂_t u + Δu + F‖₂` at interior nodes for
/// `u = S(t)u₀ + i𝒜F`, maximized over nodes.
pub fn duhamel_residual(u0: &Field, forcing: &Trajectory) -> Result<f64> {
    let dt = uniform_step(forcing.times())?;
    let a = duhamel_all(forcing)?;
    let u0s = u0.to_spectral();
    let i = Complex64::i();
    let us: Vec<Field> = forcing
        .times()
        .iter()
        .zip(&a)
        .map(|(&t, an)| propagate(&u0s, t).add(&an.scale(i)))
        .collect::<Result<_>>()?;
    let mut worst = 0.0_f64;
    for n in 1..us.len() - 1 {
        let dudt = us[n + 1].sub(&us[n - 1])?.scale(Complex64::new(0.5 / dt, 0.0));
        let lap = us[n].spectral_multiplier(|xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            Complex64::new(-r2, 0.0)
        });
        let res = dudt.scale(i).add(&lap)?.add(&forcing.fields()[n].to_spectral())?;
        worst = worst.max(res.l2_norm());
    }
    Ok(worst)
}

/// Exponent pair whose `δ` vanishes: `γ = γ(p)` when finite.
pub fn sharp_pair(d: usize, p: Exponent) -> Result<ExponentPair> {
    let two_g = ExponentPair::two_over_gamma_p(d, p);
    let gamma = Exponent::from_reciprocal(two_g / Rational::from_integer(2))?;
    Ok(ExponentPair::new(gamma, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(g: GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.size())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(g, v, Domain::Physical).unwrap()
    }

    #[test]
    fn unitary_group() {
        let g = GridSpec::new(1, 256, 4).unwrap();
        let u = random(g, 1);
        assert!(propagate(&u, 0.0).rel_l2_distance(&u).unwrap() < 1e-15);
        for t in [0.1, 1.0, 7.3] {
            let n = propagate(&u, t).l2_norm();
            assert!((n - u.l2_norm()).abs() < 1e-12 * n);
        }
        let ts = propagate(&propagate(&u, 0.3), 0.4);
        assert!(ts.rel_l2_distance(&propagate(&u, 0.7)).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_peak_closed_form() {
        let g = GridSpec::new(1, 2048, 64).unwrap();
        let ga = Gaussian::new(1.0, 1.0, 0.0);
        let u0 = ga.field(&g);
        let mid = g.n() / 2;
        for t in [0.25, 0.5, 1.0] {
            let ut = propagate(&u0, t).idft().unwrap();
            let got = ut.values()[mid].norm();
            assert!((got - ga.free_peak(1, t)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn duhamel_paths_agree_and_trivia() {
        let g = GridSpec::new(1, 128, 4).unwrap();
        let f = random(g, 2);
        let forcing = Trajectory::sample(0.0, 0.05, 10, |t| propagate(&f, 0.5 * t)).unwrap();
        let all = duhamel_all(&forcing).unwrap();
        for n in [0, 3, 10] {
            let t = forcing.times()[n];
            let direct = duhamel(&forcing, t).unwrap();
            let rec = all[n].idft().unwrap();
            if n == 0 {
                assert_eq!(direct.l2_norm(), 0.0);
            } else {
                assert!(rec.rel_l2_distance(&direct).unwrap() < 1e-12);
            }
        }
        assert!(duhamel(&forcing, 0.123).is_err());
    }

    #[test]
    fn duhamel_of_free_flow_is_t_times_flow() {
        let g = GridSpec::new(1, 256, 8).unwrap();
        let u = Gaussian::new(1.0, 1.0, 0.0).field(&g);
        let t = 1.0;
        let err = |steps: usize| {
            let forcing = Trajectory::sample(0.0, t / steps as f64, steps, |s| propagate(&u, s)).unwrap();
            let got = duhamel(&forcing, t).unwrap();
            let want = propagate(&u, t).scale(Complex64::new(t, 0.0));
            got.rel_l2_distance(&want).unwrap()
        };
        assert!(err(16) < 1e-12);
    }

    #[test]
    fn residual_is_second_order() {
        let g = GridSpec::new(1, 128, 4).unwrap();
        let u0 = Gaussian::new(1.0, 1.0, 0.0).field(&g);
        let h = Gaussian::new(0.5, 1.5, 1.0).field(&g);
        let res = |steps: usize| {
            let dt = 0.5 / steps as f64;
            let forcing = Trajectory::sample(0.0, dt, steps, |t| h.scale(Complex64::new((-t).exp(), 0.0))).unwrap();
            duhamel_residual(&u0, &forcing).unwrap()
        };
        let (a, b) = (res(32), res(64));
        let order = (a / b).log2();
        assert!(order > 1.8 && order < 2.2, "order {order}");
    }

    #[test]
    fn admissibility() {
        let e = |s: &str| s.parse::<Exponent>().unwrap();
        assert!(ExponentPair::new(e("8"), e("4")).is_admissible(1));
        assert!(ExponentPair::new(e("inf"), e("2")).is_admissible(1));
        assert!(!ExponentPair::new(e("4"), e("4")).is_admissible(1));
        assert!(!ExponentPair::new(e("2"), e("inf")).is_admissible(2));
        assert!(!ExponentPair::new(e("2"), e("inf")).is_admissible(1));
        assert_eq!(sharp_pair(1, e("4")).unwrap().gamma, e("8"));
    }

    #[test]
    fn energy_endpoint_ratio() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(1, 1024, 32).unwrap();
        let pair = ExponentPair::new(Exponent::Infinity, Exponent::integer(2));
        let data = [ScaledData { width: 1.0, xi0: 0.0 }];
        let r = check_strichartz_homogeneous(&w, &g, &data, pair, &[0, -1], 1.0, 8).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-12);
    }
}
