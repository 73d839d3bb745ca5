//! Lacunary data `f = Σ_j c_j e^{ix·k_j} φ(2^j x)` with `k_j = (j, 0, …, 0)`,
//! `supp φ̂ ⊂ [−1/8, 1/8]^d` and `c_j = 1/(j ln²|j|)`, summed over
//! `−J < j ≤ −10`.
//!
//! The sum lies in `𝓜^{d/p}_{p,1}` for every `J` while its `M⁰_{p̃,1}` norm
//! diverges. Scales below `−20` need periods beyond any literal grid, so
//! [`verify_supercritical_norms`] evaluates each piece on its own adapted
//! grid. Two exact facts make that possible:
//!
//! - each piece sits inside the plateau of the unit window at `k_j`, so
//!   `‖f‖_{M⁰_{p̃,1}} = Σ_j ‖f_j‖_{p̃}`;
//! - an integer modulation only relabels windows, so
//!   `‖f_j‖_{M^{[j]}_{p,1}} = |c_j| ‖φ(2^j·)‖_{M^{[j]}_{p,1}}`.
//!
//! [`cross_check`] confirms both on a literal grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{box_op, DecompIndex};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{Field, GridSpec};
use crate::norms::{mj_norm, Decomposition};
use crate::profiles::spectral_bump;
use crate::windows::WindowFamily;

/// Finest scale carrying a piece.
pub const TOP_SCALE: i32 = -10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    Plain,
    /// Extra factor `2^{j/κ}`.
    Kappa(u32),
}

impl ExponentMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "plain" => Ok(ExponentMode::Plain),
            t => t
                .strip_prefix("kappa")
                .map(|r| r.trim_matches(|c| c == '(' || c == ')' || c == '=' || c == ':'))
                .and_then(|r| r.parse::<u32>().ok())
                .filter(|&k| k >= 1)
                .map(ExponentMode::Kappa)
                .ok_or_else(|| Error::Parse(format!("exponent mode {s:?}: expected plain or kappa(K)"))),
        }
    }

    /// `c_j`.
    pub fn coefficient(&self, j: i32) -> f64 {
        let n = j as f64;
        let base = 1.0 / (n * n.abs().ln().powi(2));
        match self {
            ExponentMode::Plain => base,
            ExponentMode::Kappa(k) => base * (n / *k as f64).exp2(),
        }
    }
}

/// Scales `−J < j ≤ −10`, coarsest first.
pub fn scales(big_j: u32) -> Vec<i32> {
    (1 - big_j as i32..=TOP_SCALE).collect()
}

fn piece(grid: &GridSpec, j: i32, mode: ExponentMode) -> Field {
    let d = grid.dim();
    let mut center = vec![0.0; d];
    center[0] = j as f64;
    let amp = ((-j) as f64).exp2() / grid.period() as f64;
    spectral_bump(
        grid,
        &center,
        (j as f64).exp2() / 8.0,
        Complex64::new(amp.powi(d as i32) * mode.coefficient(j), 0.0),
    )
}

/// The truncated sum on `grid` and its pieces `f_j`.
pub fn supercritical_family(big_j: u32, mode: ExponentMode, grid: &GridSpec) -> Result<(Field, Decomposition)> {
    let (lo, _) = grid.scale_range();
    if big_j > 10 && -(big_j as i32) < lo + 1 {
        return Err(Error::Precondition(format!(
            "J = {big_j} needs scales down to {} but {grid} stops at {lo}",
            -(big_j as i32)
        )));
    }
    if big_j > 10 && grid.nyquist() < big_j as f64 + 2.0 {
        return Err(Error::Precondition(format!(
            "{grid} cannot hold modulation frequency {big_j}"
        )));
    }
    let pieces: Vec<(i32, Field)> = scales(big_j).into_iter().map(|j| (j, piece(grid, j, mode))).collect();
    let mut sum = Field::zeros(*grid, crate::grid::Domain::Spectral);
    for (_, f) in &pieces {
        sum = sum.add(f)?;
    }
    Ok((sum, Decomposition::new(pieces)?))
}

/// `max(‖□_{j,κ}g − g‖, ‖□_{j,κ±e_a}g‖) / ‖g‖` for a piece `g` centered at the
/// window index `κ`.
fn support_residual(w: &WindowFamily, g: &Field, j: i32, center: &[i64]) -> Result<f64> {
    let norm = g.l2_norm();
    let own = box_op(w, g, &DecompIndex::new(j, center.to_vec()))?;
    let mut worst = own.rel_l2_distance(g)?;
    for a in 0..center.len() {
        for s in [-1, 1] {
            let mut k = center.to_vec();
            k[a] += s;
            worst = worst.max(box_op(w, g, &DecompIndex::new(j, k))?.l2_norm() / norm);
        }
    }
    Ok(worst)
}

/// One row of the divergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupercriticalRow {
    pub big_j: u32,
    pub ptilde: Exponent,
    /// `‖f‖_{M⁰_{p̃,1}}`.
    pub m0: f64,
    /// `Σ_j 2^{jd/p}‖f_j‖_{M^{[j]}_{p,1}}`, an upper bound for `‖f‖_{𝓜^{d/p}_{p,1}}`.
    pub script_upper: f64,
    /// `‖□_{k_j}f‖_{p̃}` at the coarsest scale, a lower bound for `m0`.
    pub coarsest_term: f64,
    /// `2^{Jd/p̃}/(J ln²J)`.
    pub reference_rate: f64,
    /// Ratio of `m0` to the previous row with the same `p̃`.
    pub growth: Option<f64>,
    /// Worst support-identity residual over the pieces.
    pub support_residual: f64,
}

struct PieceData {
    j: i32,
    lp: Vec<f64>,
    mj: f64,
    residual: f64,
}

/// Builds the table for every `J` in `j_list` and `p̃` in `ptilde_list`, with
/// pieces evaluated on grids `base.dilated(j)`. `base` must resolve scale 0
/// and hold `φ̂` inside the plateau: `N ≥ 8P`, `P ≥ 8`.
pub fn verify_supercritical_norms(
    w: &WindowFamily,
    j_list: &[u32],
    ptilde_list: &[Exponent],
    p: Exponent,
    mode: ExponentMode,
    base: &GridSpec,
) -> Result<Vec<SupercriticalRow>> {
    p.check_lebesgue()?;
    for pt in ptilde_list {
        pt.check_lebesgue()?;
    }
    base.check_scale(0)?;
    if base.period() < 8 || base.nyquist() < 1.0 {
        return Err(Error::InvalidGrid(format!("{base} cannot resolve the profile")));
    }
    if let Some(&bad) = j_list.iter().find(|&&j| j < 10) {
        return Err(Error::Precondition(format!("J = {bad} below 10")));
    }
    let d = base.dim();
    let phi = spectral_bump(
        base,
        &vec![0.0; d],
        0.125,
        Complex64::new((1.0 / base.period() as f64).powi(d as i32), 0.0),
    );
    let top = j_list.iter().copied().max().unwrap_or(10);
    let data: Vec<PieceData> = scales(top)
        .into_par_iter()
        .map(|j| {
            let g = phi.dilate_dyadic(j)?;
            let c = mode.coefficient(j).abs();
            Ok(PieceData {
                j,
                lp: ptilde_list
                    .iter()
                    .map(|&pt| Ok(c * g.to_physical().lp_norm(pt)?))
                    .collect::<Result<_>>()?,
                mj: c * mj_norm(w, &g, j, p, Exponent::integer(1))?,
                residual: support_residual(w, &g, j, &vec![0; d])?,
            })
        })
        .collect::<Result<_>>()?;
    let dd = d as f64;
    let mut rows = Vec::new();
    for (ip, &pt) in ptilde_list.iter().enumerate() {
        let mut prev: Option<f64> = None;
        for &big_j in j_list {
            let lo = 1 - big_j as i32;
            let used: Vec<&PieceData> = data.iter().filter(|x| x.j >= lo).collect();
            let m0 = used.iter().map(|x| x.lp[ip]).fold(0.0, |a, b| a + b);
            let script = used
                .iter()
                .map(|x| (x.j as f64 * dd / p.value()).exp2() * x.mj)
                .fold(0.0, |a, b| a + b);
            let coarsest = used.first().map_or(0.0, |x| x.lp[ip]);
            let jf = big_j as f64;
            let rows_growth = prev.filter(|&v| v > 0.0).map(|v| m0 / v);
            rows.push(SupercriticalRow {
                big_j,
                ptilde: pt,
                m0,
                script_upper: script,
                coarsest_term: coarsest,
                reference_rate: (jf * dd / pt.value()).exp2() / (jf * jf.ln().powi(2)),
                growth: rows_growth,
                support_residual: used.iter().map(|x| x.residual).fold(0.0, f64::max),
            });
            prev = Some(m0);
        }
    }
    Ok(rows)
}

/// Literal-grid confirmation of the facts behind the per-piece route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    /// Worst modulated support-identity residual.
    pub support_residual: f64,
    /// `|‖f‖_{M⁰_{p̃,1}} − Σ_j ‖f_j‖_{p̃}|` relative.
    pub plateau_gap: f64,
    /// Worst relative gap between `‖f_j‖_{M^{[j]}_{p,1}}` and the unmodulated
    /// piece evaluated through dilation.
    pub modulation_gap: f64,
}

pub fn cross_check(
    w: &WindowFamily,
    big_j: u32,
    mode: ExponentMode,
    grid: &GridSpec,
    p: Exponent,
    ptilde: Exponent,
) -> Result<CrossCheck> {
    let (f, dec) = supercritical_family(big_j, mode, grid)?;
    let d = grid.dim();
    let m0 = mj_norm(w, &f, 0, ptilde, Exponent::integer(1))?;
    let mut sum = 0.0;
    let mut support = 0.0_f64;
    let mut modulation = 0.0_f64;
    for (j, fj) in dec.pieces() {
        sum += fj.to_physical().lp_norm(ptilde)?;
        let mut k = vec![0i64; d];
        k[0] = *j as i64 * (1i64 << (-j));
        support = support.max(support_residual(w, fj, *j, &k)?);
        let direct = mj_norm(w, fj, *j, p, Exponent::integer(1))?;
        let unmod = spectral_bump(
            grid,
            &vec![0.0; d],
            (*j as f64).exp2() / 8.0,
            Complex64::new(fj.values().iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0),
        );
        let via = (-(*j as f64) * d as f64 / p.value()).exp2()
            * mj_norm(w, &unmod.dilate_dyadic(-j)?, 0, p, Exponent::integer(1))?;
        modulation = modulation.max((direct - via).abs() / via);
    }
    Ok(CrossCheck {
        support_residual: support,
        plateau_gap: if m0 > 0.0 { (m0 - sum).abs() / m0 } else { 0.0 },
        modulation_gap: modulation,
    })
}
