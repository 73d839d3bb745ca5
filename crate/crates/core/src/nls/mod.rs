//! Nonlinear Schrödinger equation `i∂_t u + Δu + F(u) = 0` on the torus.
//!
//! With `u = S(t)u₀ + i𝒜F(u)` the power case `F(u) = λ|u|^{2κ}u` is focusing
//! for `λ > 0`. The exponential case is `F(u) = (e^{λ|u|²} − 1)u`.

pub mod audit;
pub mod picard;
pub mod splitstep;
pub mod supercritical;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::norms::NormSpec;
use crate::windows::WindowFamily;

pub use audit::{blowup_monitor, contraction_audit, BlowupReport, ContractionReport};
pub use picard::{picard_solve, PicardRun, WindowRecord};
pub use splitstep::splitstep_reference;
pub use supercritical::{supercritical_family, verify_supercritical_norms, ExponentMode, SupercriticalRow};

/// Largest admissible `λ|u|²` in the exponential nonlinearity.
pub const EXP_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    Power { kappa: u32, lambda: f64 },
    Exponential { lambda: f64 },
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Nonlinearity::Power { kappa, lambda } => {
                if kappa < 1 {
                    return Err(Error::InvalidSpec("kappa must be at least 1".into()));
                }
                if !lambda.is_finite() {
                    return Err(Error::InvalidSpec("coupling must be finite".into()));
                }
            }
            Nonlinearity::Exponential { lambda } => {
                if !lambda.is_finite() {
                    return Err(Error::InvalidSpec("coupling must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn coupling(&self) -> f64 {
        match *self {
            Nonlinearity::Power { lambda, .. } | Nonlinearity::Exponential { lambda } => lambda,
        }
    }

    /// `F(u)/u` as a function of `|u|²`, real for both families.
    fn gain(&self, m2: f64) -> Result<f64> {
        match *self {
            Nonlinearity::Power { kappa, lambda } => Ok(lambda * m2.powi(kappa as i32)),
            Nonlinearity::Exponential { lambda } => {
                let a = lambda * m2;
                if a > EXP_LIMIT {
                    return Err(Error::Overflow(format!("λ|u|² = {a:e} exceeds {EXP_LIMIT}")));
                }
                Ok(a.exp_m1())
            }
        }
    }
}

/// Pointwise `F(u)` as a physical field.
pub fn nonlinearity_eval(u: &Field, nl: &Nonlinearity) -> Result<Field> {
    let phys = u.to_physical();
    let mut out = Vec::with_capacity(phys.values().len());
    for z in phys.values() {
        let g = nl.gain(z.norm_sqr())?;
        let v = z * g;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Overflow(format!(
                "nonlinearity is not finite at |u| = {:e}",
                z.norm()
            )));
        }
        out.push(v);
    }
    Field::new(*u.grid(), out, crate::grid::Domain::Physical)
}

/// Exact nonlinear substep `u ↦ u·e^{i·dt·F(u)/u}`; the modulus is invariant.
pub(crate) fn nonlinear_phase(u: &Field, nl: &Nonlinearity, dt: f64) -> Result<Field> {
    let phys = u.to_physical();
    let mut out = Vec::with_capacity(phys.values().len());
    for z in phys.values() {
        let g = nl.gain(z.norm_sqr())?;
        out.push(z * Complex64::from_polar(1.0, g * dt));
    }
    Field::new(*u.grid(), out, crate::grid::Domain::Physical)
}

#[derive(Clone, Debug)]
pub struct NLSProblem {
    pub grid: GridSpec,
    pub nonlinearity: Nonlinearity,
    pub u0: Field,
    pub horizon: f64,
}

impl NLSProblem {
    pub fn new(nonlinearity: Nonlinearity, u0: Field, horizon: f64) -> Result<Self> {
        nonlinearity.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidSpec(format!("horizon {horizon} must be positive")));
        }
        Ok(NLSProblem {
            grid: *u0.grid(),
            nonlinearity,
            u0,
            horizon,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Time steps in each Picard window.
    pub steps_per_window: usize,
    /// Initial number of windows covering the horizon.
    pub windows: usize,
    /// Relative sup-in-time `L²` increment at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// How many times a window may be halved when the observed contraction
    /// factor exceeds `contraction_target` or iteration stalls.
    pub max_halvings: usize,
    pub contraction_target: f64,
    /// Extra norms recorded in the history.
    pub track: Vec<NormSpec>,
    /// Record the history at every `history_stride`-th node.
    pub history_stride: usize,
    pub window: WindowFamily,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            steps_per_window: 32,
            windows: 4,
            tolerance: 1e-10,
            max_iterations: 50,
            max_halvings: 6,
            contraction_target: 0.5,
            track: Vec::new(),
            history_stride: 1,
            window: WindowFamily::smooth(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_window < 8 {
            return Err(Error::InvalidSpec("at least 8 steps per window".into()));
        }
        if self.windows == 0 {
            return Err(Error::InvalidSpec("at least one window".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidSpec("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSpec("at least one Picard iteration".into()));
        }
        if !(self.contraction_target > 0.0 && self.contraction_target < 1.0) {
            return Err(Error::InvalidSpec("contraction target must lie in (0, 1)".into()));
        }
        if self.history_stride == 0 {
            return Err(Error::InvalidSpec("history stride must be positive".into()));
        }
        for s in &self.track {
            s.validate(1)?;
        }
        Ok(())
    }
}
