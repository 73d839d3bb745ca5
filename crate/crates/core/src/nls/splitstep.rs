//! Strang splitting: half a linear step, the exact nonlinear phase, half a
//! linear step.

use super::{nonlinear_phase, NLSProblem};
use crate::error::{Error, Result};
use crate::schrodinger::propagate;
use crate::trajectory::Trajectory;

/// Integrates to the horizon with `⌈T/dt⌉` equal steps, returning every step.
/// For the power nonlinearity the mass is conserved to rounding.
pub fn splitstep_reference(problem: &NLSProblem, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidSpec(format!("step {dt} must be positive")));
    }
    let steps = (problem.horizon / dt).ceil().max(1.0) as usize;
    let h = problem.horizon / steps as f64;
    let mut u = problem.u0.to_spectral();
    let mut times = Vec::with_capacity(steps + 1);
    let mut fields = Vec::with_capacity(steps + 1);
    times.push(0.0);
    fields.push(u.clone());
    for n in 1..=steps {
        let half = propagate(&u, 0.5 * h);
        let kicked = nonlinear_phase(&half, &problem.nonlinearity, h)?.to_spectral();
        u = propagate(&kicked, 0.5 * h);
        times.push(if n == steps { problem.horizon } else { n as f64 * h });
        fields.push(u.clone());
    }
    Trajectory::new(times, fields)
}
