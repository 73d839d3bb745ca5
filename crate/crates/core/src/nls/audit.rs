//! Empirical contraction constants and a blowup diagnostic.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::picard::{picard_map, solve_window, sup_relative};
use super::{nonlinearity_eval, NLSProblem, Nonlinearity, SolverConfig};
use crate::error::Result;
use crate::grid::{Domain, Field};
use crate::norms::{evaluate, NormSpec};
use crate::schrodinger::propagate;
use crate::trajectory::Trajectory;
use crate::windows::WindowFamily;

const PAIRS: usize = 6;
const SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `M = 2‖u₀‖₂`.
    pub ball_radius: f64,
    pub window_length: f64,
    /// Largest `sup_t‖𝒯u − 𝒯v‖₂ / sup_t‖u − v‖₂` over the sampled pairs.
    pub factor: f64,
    /// `factor ≤ 1/2`.
    pub contracts: bool,
    /// `⌈ln(tol)/ln(factor)⌉`, absent when the factor is 0 or at least 1.
    pub predicted_iterations: Option<usize>,
    pub observed_iterations: usize,
    pub converged: bool,
    /// Relative gap between `(e^{λ|u₀|²} − 1)u₀` and its first series term.
    pub series_gap: Option<f64>,
}

/// Smooth perturbation with `‖η‖₂ = size`, spectrum inside `|ξ|_∞ ≤ Ξ/4`.
fn perturbation(u0: &Field, rng: &mut ChaCha8Rng, size: f64) -> Field {
    let grid = *u0.grid();
    let band = grid.nyquist() / 4.0;
    let mut v = vec![Complex64::new(0.0, 0.0); grid.size()];
    let mut idx = vec![0usize; grid.dim()];
    for (flat, z) in v.iter_mut().enumerate() {
        grid.unflatten(flat, &mut idx);
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        let r2: f64 = idx.iter().map(|&s| (grid.xi(grid.mode(s)) / band).powi(2)).sum();
        if r2 < 1.0 {
            *z = Complex64::new(re, im) * (1.0 - r2);
        }
    }
    let f = Field::new(grid, v, Domain::Spectral).expect("grid-sized");
    let n = f.l2_norm();
    f.scale(Complex64::new(size / n, 0.0))
}

/// Samples pairs `u, v` in the ball of radius `M` on the first window and
/// measures how much one Picard step contracts their distance.
pub fn contraction_audit(problem: &NLSProblem, config: &SolverConfig) -> Result<ContractionReport> {
    config.validate()?;
    let u0 = problem.u0.to_spectral();
    let m0 = u0.l2_norm();
    let len = problem.horizon / config.windows as f64;
    let n = config.steps_per_window;
    let dt = len / n as f64;
    let free: Vec<Field> = (0..=n).into_par_iter().map(|k| propagate(&u0, k as f64 * dt)).collect();
    let mut factor = 0.0_f64;
    if m0 > 0.0 {
        for pair in 0..PAIRS {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            rng.set_stream(pair as u64);
            let a = perturbation(&u0, &mut rng, 0.25 * m0);
            let b = perturbation(&u0, &mut rng, 0.25 * m0);
            let shift = |eta: &Field| -> Result<Vec<Field>> {
                free.iter()
                    .enumerate()
                    .map(|(k, f)| f.add(&propagate(eta, k as f64 * dt)))
                    .collect()
            };
            let (u, v) = (shift(&a)?, shift(&b)?);
            let (tu, tv) = (picard_map(problem, &free, &u, dt)?, picard_map(problem, &free, &v, dt)?);
            let sup = |x: &[Field], y: &[Field]| -> Result<f64> {
                let mut s = 0.0_f64;
                for (p, q) in x.iter().zip(y) {
                    s = s.max(p.sub(q)?.l2_norm());
                }
                Ok(s)
            };
            let den = sup(&u, &v)?;
            if den > 0.0 {
                factor = factor.max(sup(&tu, &tv)? / den);
            }
        }
    }
    let w = solve_window(problem, config, &u0, len)?;
    let predicted =
        (factor > 0.0 && factor < 1.0).then(|| (config.tolerance.ln() / factor.ln()).ceil().max(1.0) as usize);
    let series_gap = match problem.nonlinearity {
        Nonlinearity::Exponential { lambda } if m0 > 0.0 => {
            let direct = nonlinearity_eval(&u0, &problem.nonlinearity)?;
            let lead = nonlinearity_eval(&u0, &Nonlinearity::Power { kappa: 1, lambda })?;
            Some(sup_relative(&[direct], &[lead])?)
        }
        _ => None,
    };
    Ok(ContractionReport {
        ball_radius: 2.0 * m0,
        window_length: len,
        factor,
        contracts: factor <= 0.5,
        predicted_iterations: predicted,
        observed_iterations: w.iterations,
        converged: w.converged,
        series_gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub initial_norm: f64,
    pub peak_norm: f64,
    /// First time the norm exceeded `threshold × initial`, or the failure time.
    pub flag_time: Option<f64>,
    pub reason: Option<String>,
    /// Last time at which the solution was still under control; the maximal
    /// existence time of the computed flow is at least this.
    pub existence_lower_bound: f64,
    pub samples: Vec<(f64, f64)>,
}

impl BlowupReport {
    pub fn flagged(&self) -> bool {
        self.flag_time.is_some()
    }
}

/// Tracks `spec` along the trajectory. `failure_time` is where a Picard run
/// stopped, if it did. This is a diagnostic and never certifies blowup.
pub fn blowup_monitor(
    traj: &Trajectory,
    spec: &NormSpec,
    threshold: f64,
    failure_time: Option<f64>,
) -> Result<BlowupReport> {
    let w = WindowFamily::smooth();
    let values: Vec<f64> = traj
        .fields()
        .par_iter()
        .map(|f| evaluate(&w, f, spec))
        .collect::<Result<_>>()?;
    let initial = values[0];
    let peak = values.iter().copied().fold(0.0, f64::max);
    let samples: Vec<(f64, f64)> = traj.times().iter().copied().zip(values.iter().copied()).collect();
    let hit = samples
        .iter()
        .position(|&(_, v)| !v.is_finite() || v > threshold * initial && initial > 0.0);
    let (flag_time, reason, bound) = match (hit, failure_time) {
        (Some(k), _) => (
            Some(samples[k].0),
            Some("threshold".to_string()),
            samples[k.saturating_sub(1)].0,
        ),
        (None, Some(t)) => (Some(t), Some("picard_failure".to_string()), t),
        (None, None) => (None, None, *traj.times().last().expect("nonempty")),
    };
    Ok(BlowupReport {
        initial_norm: initial,
        peak_norm: peak,
        flag_time,
        reason,
        existence_lower_bound: bound,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{r, Exponent};
    use crate::grid::GridSpec;
    use crate::norms::Family;
    use crate::numeric::fit_slope;
    use crate::profiles::Gaussian;

    fn problem(amp: f64, lambda: f64) -> NLSProblem {
        let g = GridSpec::new(1, 256, 8).unwrap();
        NLSProblem::new(
            Nonlinearity::Power { kappa: 1, lambda },
            Gaussian::new(amp, 2.0, 0.0).field(&g),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn linear_map_has_zero_factor() {
        let rep = contraction_audit(&problem(1.0, 0.0), &SolverConfig::default()).unwrap();
        assert_eq!(rep.factor, 0.0);
        assert!(rep.contracts && rep.converged);
    }

    #[test]
    fn factor_scales_like_square_amplitude() {
        let amps = [0.05, 0.1, 0.2];
        let f: Vec<f64> = amps
            .iter()
            .map(|&a| {
                contraction_audit(&problem(a, 1.0), &SolverConfig::default())
                    .unwrap()
                    .factor
                    .ln()
            })
            .collect();
        let x: Vec<f64> = amps.iter().map(|a: &f64| a.ln()).collect();
        let s = fit_slope(&x, &f);
        assert!((s - 2.0).abs() < 0.4, "{s}");
    }

    #[test]
    fn linear_flow_never_flags() {
        let p = problem(1.0, 0.0);
        let tr = Trajectory::sample(0.0, 0.1, 5, |t| propagate(&p.u0, t)).unwrap();
        let spec = NormSpec::new(
            Family::FrakNeg,
            Exponent::integer(2),
            Exponent::integer(1),
            Exponent::integer(1),
            r(1, 2),
        );
        assert!(!blowup_monitor(&tr, &spec, 1e3, None).unwrap().flagged());
        assert!(!blowup_monitor(&tr, &spec, f64::INFINITY, None).unwrap().flagged());
        let rep = blowup_monitor(&tr, &spec, 1e3, Some(0.3)).unwrap();
        assert_eq!(rep.flag_time, Some(0.3));
    }
}
