//! Picard iteration on the Duhamel formula, window by window.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{nonlinearity_eval, NLSProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::exponent::{format_rational, Exponent};
use crate::grid::Field;
use crate::norms::{canonical_split, frak_norm, mj_norm, script_norm_upper, Decomposition, NormSpec};
use crate::schrodinger::{duhamel_all, propagate};
use crate::trajectory::{NormHistory, Trajectory};

/// Bookkeeping for one accepted (or failed) window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub t_start: f64,
    pub length: f64,
    pub iterations: usize,
    pub increment: f64,
    /// Largest ratio of successive increments observed.
    pub contraction: f64,
    pub halvings: usize,
}

#[derive(Debug)]
pub struct PicardRun {
    pub trajectory: Trajectory,
    /// Times of the rows in `trajectory.history`.
    pub history_times: Vec<f64>,
    pub windows: Vec<WindowRecord>,
    /// `M = 2‖u₀‖₂`.
    pub ball_radius: f64,
    /// Largest `L²` norm over every iterate at every node.
    pub max_iterate_norm: f64,
    /// Set when the run stopped early; the trajectory is then partial.
    pub failure: Option<Error>,
}

impl PicardRun {
    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }

    /// The norm history as CSV, first column `t`.
    pub fn history_csv(&self) -> String {
        self.trajectory
            .history
            .as_ref()
            .map_or_else(String::new, |h| h.to_csv(&self.history_times))
    }

    /// Whether every iterate stayed in the ball of radius `M`.
    pub fn resident(&self) -> bool {
        self.max_iterate_norm <= self.ball_radius
    }
}

pub(crate) struct WindowSolve {
    pub fields: Vec<Field>,
    pub iterations: usize,
    pub increment: f64,
    pub contraction: f64,
    pub converged: bool,
    pub max_norm: f64,
}

/// `sup_k ‖a_k − b_k‖₂ / sup_k ‖a_k‖₂`.
pub(crate) fn sup_relative(a: &[Field], b: &[Field]) -> Result<f64> {
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        num = num.max(x.sub(y)?.l2_norm());
        den = den.max(x.l2_norm());
    }
    Ok(if num == 0.0 { 0.0 } else { num / den })
}

/// `𝒯u(t_k) = S(t_k)u_start + i𝒜F(u)(t_k)` on nodes `t_k = k·dt`.
pub(crate) fn picard_map(problem: &NLSProblem, free: &[Field], u: &[Field], dt: f64) -> Result<Vec<Field>> {
    let forcing: Vec<Field> = u
        .par_iter()
        .map(|f| nonlinearity_eval(f, &problem.nonlinearity))
        .collect::<Result<_>>()?;
    let times = (0..forcing.len()).map(|k| k as f64 * dt).collect();
    let a = duhamel_all(&Trajectory::new(times, forcing)?)?;
    free.iter()
        .zip(a)
        .map(|(s, a)| s.add(&a.scale(Complex64::i())))
        .collect()
}

pub(crate) fn solve_window(
    problem: &NLSProblem,
    config: &SolverConfig,
    start: &Field,
    length: f64,
) -> Result<WindowSolve> {
    let n = config.steps_per_window;
    let dt = length / n as f64;
    let start = start.to_spectral();
    let free: Vec<Field> = (0..=n)
        .into_par_iter()
        .map(|k| propagate(&start, k as f64 * dt))
        .collect();
    let mut u = free.clone();
    let mut max_norm = u.iter().map(|f| f.l2_norm()).fold(0.0, f64::max);
    let mut prev_inc = f64::NAN;
    let mut contraction = 0.0_f64;
    for it in 1..=config.max_iterations {
        let next = picard_map(problem, &free, &u, dt)?;
        let inc = sup_relative(&next, &u)?;
        max_norm = next.iter().map(|f| f.l2_norm()).fold(max_norm, f64::max);
        if prev_inc.is_finite() && prev_inc > 1e3 * config.tolerance {
            contraction = contraction.max(inc / prev_inc);
        }
        u = next;
        if inc < config.tolerance {
            return Ok(WindowSolve {
                fields: u,
                iterations: it,
                increment: inc,
                contraction,
                converged: true,
                max_norm,
            });
        }
        if contraction > 1.0 {
            return Ok(WindowSolve {
                fields: u,
                iterations: it,
                increment: inc,
                contraction,
                converged: false,
                max_norm,
            });
        }
        prev_inc = inc;
    }
    Ok(WindowSolve {
        fields: u,
        iterations: config.max_iterations,
        increment: prev_inc,
        contraction,
        converged: false,
        max_norm,
    })
}

/// Solves the problem over `[0, T]`. Windows whose contraction factor exceeds
/// the target, or that fail to converge, are halved and retried.
pub fn picard_solve(problem: &NLSProblem, config: &SolverConfig) -> Result<PicardRun> {
    config.validate()?;
    let u0 = problem.u0.to_spectral();
    let ball = 2.0 * u0.l2_norm();
    let mut traj = Trajectory::new(vec![0.0], vec![u0.clone()])?;
    let mut records = Vec::new();
    let mut t = 0.0;
    let base = problem.horizon / config.windows as f64;
    let mut max_norm = u0.l2_norm();
    let mut failure = None;
    while problem.horizon - t > 1e-12 * problem.horizon {
        let mut len = base.min(problem.horizon - t);
        let mut halvings = 0;
        let start = traj.last().clone();
        let accepted = loop {
            let w = match solve_window(problem, config, &start, len) {
                Ok(w) => w,
                Err(e) => break Err(e),
            };
            max_norm = max_norm.max(w.max_norm);
            let ok = w.converged && w.contraction <= config.contraction_target;
            if ok || halvings >= config.max_halvings {
                let rec = WindowRecord {
                    t_start: t,
                    length: len,
                    iterations: w.iterations,
                    increment: w.increment,
                    contraction: w.contraction,
                    halvings,
                };
                break Ok((w, rec));
            }
            len *= 0.5;
            halvings += 1;
        };
        match accepted {
            Err(e) => {
                failure = Some(e);
                break;
            }
            Ok((w, rec)) => {
                let converged = w.converged;
                let iterations = rec.iterations;
                let increment = rec.increment;
                records.push(rec);
                if !converged {
                    failure = Some(Error::NonConvergence {
                        t_start: t,
                        iterations,
                        increment,
                    });
                    break;
                }
                let dt = len / config.steps_per_window as f64;
                let mut times: Vec<f64> = (0..w.fields.len()).map(|k| t + k as f64 * dt).collect();
                let last = w.fields.len() - 1;
                times[last] = if problem.horizon - (t + len) < 1e-12 * problem.horizon {
                    problem.horizon
                } else {
                    t + len
                };
                t = times[last];
                traj.extend(Trajectory::new(times, w.fields)?)?;
            }
        }
    }
    let (history, history_times) = norm_history(&traj, &u0, config)?;
    traj.history = Some(history);
    Ok(PicardRun {
        trajectory: traj,
        history_times,
        windows: records,
        ball_radius: ball,
        max_iterate_norm: max_norm,
        failure,
    })
}

/// Column label of a tracked norm; script families carry an `_upper` suffix.
pub fn track_label(spec: &NormSpec) -> String {
    let suffix = if spec.family.is_script() { "_upper" } else { "" };
    format!(
        "{}{}[p={};q={};r={};w={}]",
        spec.family,
        suffix,
        spec.p,
        spec.q,
        spec.r,
        format_rational(spec.w)
    )
}

/// Decomposition of `u(t)` inherited from `u₀`: the pieces of `u₀` propagated
/// linearly, with the nonlinear remainder `u(t) − S(t)u₀` added to the top scale.
pub fn inherited_decomposition(u0_split: &Decomposition, u0: &Field, u: &Field, t: f64) -> Result<Decomposition> {
    let remainder = u.to_spectral().sub(&propagate(&u0.to_spectral(), t))?;
    let n = u0_split.pieces().len();
    let pieces = u0_split
        .pieces()
        .iter()
        .enumerate()
        .map(|(i, (j, f))| {
            let p = propagate(&f.to_spectral(), t);
            Ok((*j, if i + 1 == n { p.add(&remainder)? } else { p }))
        })
        .collect::<Result<Vec<_>>>()?;
    Decomposition::new(pieces)
}

fn norm_history(traj: &Trajectory, u0: &Field, config: &SolverConfig) -> Result<(NormHistory, Vec<f64>)> {
    let mut columns = vec!["L2".to_string(), "M0_21".to_string()];
    columns.extend(config.track.iter().map(track_label));
    let splits: Vec<Option<Decomposition>> = config
        .track
        .iter()
        .map(|s| {
            if s.family.is_script() {
                Ok(Some(canonical_split(u0, &s.scale_set(u0.grid())?)?))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let nodes: Vec<usize> = (0..traj.len())
        .filter(|&k| k % config.history_stride == 0 || k + 1 == traj.len())
        .collect();
    let rows: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&k| {
            let u = &traj.fields()[k];
            let t = traj.times()[k];
            let mut row = vec![
                u.l2_norm(),
                mj_norm(&config.window, u, 0, Exponent::integer(2), Exponent::integer(1))?,
            ];
            for (spec, split) in config.track.iter().zip(&splits) {
                row.push(match split {
                    Some(dec) => script_norm_upper(&config.window, &inherited_decomposition(dec, u0, u, t)?, spec)?,
                    None => frak_norm(&config.window, u, spec)?,
                });
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let times = nodes.iter().map(|&k| traj.times()[k]).collect();
    Ok((NormHistory { columns, rows }, times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, GridSpec};
    use crate::nls::{NLSProblem, Nonlinearity};
    use crate::profiles::Gaussian;

    fn setup(amp: f64, lambda: f64) -> NLSProblem {
        let g = GridSpec::new(1, 256, 8).unwrap();
        let u0 = Gaussian::new(amp, 2.0, 0.0).field(&g);
        NLSProblem::new(Nonlinearity::Power { kappa: 1, lambda }, u0, 0.5).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = GridSpec::new(1, 128, 8).unwrap();
        let p = NLSProblem::new(
            Nonlinearity::Power { kappa: 1, lambda: 1.0 },
            Field::zeros(g, Domain::Spectral),
            0.25,
        )
        .unwrap();
        let run = picard_solve(&p, &SolverConfig::default()).unwrap();
        assert!(run.converged());
        assert!(run.trajectory.fields().iter().all(|f| f.l2_norm() == 0.0));
    }

    #[test]
    fn linear_limit_is_free_flow() {
        let p = setup(1.0, 0.0);
        let run = picard_solve(&p, &SolverConfig::default()).unwrap();
        for (t, u) in run.trajectory.times().iter().zip(run.trajectory.fields()) {
            let free = propagate(&p.u0, *t);
            assert!(u.rel_l2_distance(&free).unwrap() < 1e-13);
        }
        assert_eq!(run.trajectory.times().last().copied(), Some(0.5));
    }

    #[test]
    fn gauge_covariance() {
        let p = setup(0.5, 1.0);
        let rot = Complex64::from_polar(1.0, 0.7);
        let q = NLSProblem::new(p.nonlinearity, p.u0.scale(rot), p.horizon).unwrap();
        let a = picard_solve(&p, &SolverConfig::default()).unwrap();
        let b = picard_solve(&q, &SolverConfig::default()).unwrap();
        let d = b
            .trajectory
            .last()
            .rel_l2_distance(&a.trajectory.last().scale(rot))
            .unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn history_columns() {
        let p = setup(0.3, -1.0);
        let cfg = SolverConfig {
            track: vec![NormSpec::new(
                crate::norms::Family::ScriptNeg,
                Exponent::integer(2),
                Exponent::integer(1),
                Exponent::integer(1),
                crate::exponent::r(1, 4),
            )],
            history_stride: 8,
            ..Default::default()
        };
        let run = picard_solve(&p, &cfg).unwrap();
        let h = run.trajectory.history.as_ref().unwrap();
        assert_eq!(h.columns.len(), 3);
        assert!(h.columns[2].starts_with("script_neg_upper"));
        assert!(run.resident());
    }
}
