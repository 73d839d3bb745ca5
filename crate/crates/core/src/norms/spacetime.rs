//! Space-time norms along trajectories.

use std::collections::BTreeMap;

use super::{weight, NormSpec};
use crate::decomp::piece_norms;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::numeric::{lq_norm, trapezoid_weights, weighted_power_mean};
use crate::trajectory::Trajectory;
use crate::windows::WindowFamily;

/// Per-`k` time profiles `t ↦ ‖□_{j,k} u(t)‖_p`, keyed by `k`.
pub fn window_time_profiles(
    w: &WindowFamily,
    traj: &Trajectory,
    j: i32,
    p: Exponent,
) -> Result<BTreeMap<Vec<i64>, Vec<f64>>> {
    let n = traj.len();
    let mut out: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for (i, f) in traj.fields().iter().enumerate() {
        for (k, v) in piece_norms(w, f, j, p)? {
            out.entry(k).or_insert_with(|| vec![0.0; n])[i] = v;
        }
    }
    Ok(out)
}

/// `(Σ_k ‖□_{j,k} u‖^q_{L^γ_t L^p_x})^{1/q}` with trapezoid weights in time.
pub fn spacetime_w_norm(
    w: &WindowFamily,
    traj: &Trajectory,
    j: i32,
    gamma: Exponent,
    p: Exponent,
    q: Exponent,
) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::Precondition(
            "space-time norms need at least two time samples".into(),
        ));
    }
    gamma.check_lebesgue()?;
    q.check_lebesgue()?;
    let tw = trapezoid_weights(traj.times());
    let profiles = window_time_profiles(w, traj, j, p)?;
    let per_k: Vec<f64> = profiles.values().map(|v| weighted_power_mean(v, &tw, gamma)).collect();
    Ok(lq_norm(&per_k, q))
}

/// `ℓ^r_j` of `2^{jw}‖u_j‖_{W^[j]_{γ,p,q}}` over trajectory pieces `u = Σ u_j`.
pub fn script_spacetime_upper(
    w: &WindowFamily,
    pieces: &[(i32, Trajectory)],
    gamma: Exponent,
    spec: &NormSpec,
) -> Result<f64> {
    if !spec.family.is_script() {
        return Err(Error::InvalidSpec(format!("{} is not a script family", spec.family)));
    }
    if pieces.is_empty() {
        return Ok(0.0);
    }
    let allowed = spec.scale_set(pieces[0].1.grid())?;
    let mut v = Vec::with_capacity(pieces.len());
    for (j, u) in pieces {
        if !allowed.contains(j) {
            return Err(Error::InvalidSpec(format!(
                "piece at scale {j} lies outside the scale set of {}",
                spec.family
            )));
        }
        v.push(weight(*j, spec.w) * spacetime_w_norm(w, u, *j, gamma, spec.p, spec.q)?);
    }
    Ok(lq_norm(&v, spec.r))
}

/// Norm of the intersection of two space-time families: the larger value.
pub fn script_spacetime_intersection(
    w: &WindowFamily,
    pieces_a: &[(i32, Trajectory)],
    spec_a: &NormSpec,
    pieces_b: &[(i32, Trajectory)],
    spec_b: &NormSpec,
    gamma: Exponent,
) -> Result<f64> {
    let a = script_spacetime_upper(w, pieces_a, gamma, spec_a)?;
    let b = script_spacetime_upper(w, pieces_b, gamma, spec_b)?;
    Ok(a.max(b))
}
