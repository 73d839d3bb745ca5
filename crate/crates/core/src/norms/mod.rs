//! Single-scale, modulation and scaling-limit norms.
//!
//! Every norm is built from the single-scale quantity
//!
//! ```text
//! ‖f‖_{M^[j]_{p,q}} = ‖ ‖□_{j,k} f‖_{L^p} ‖_{ℓ^q_k}
//! ```
//!
//! The sup/ℓ^r families over a range of scales (`frak_*`) weight each scale by
//! `2^{jw}`. The decomposition families (`script_*`) are infima over splittings
//! `f = Σ f_j`; only the value at a given splitting is computed, which is an
//! upper bound for the norm.

pub mod regime;
pub mod spacetime;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decomp::piece_norms;
use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, Exponent, Rational};
use crate::grid::{Domain, Field};
use crate::numeric::lq_norm;
use crate::windows::{build_lowpass, WindowFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    FeichtingerS,
    SingleScale,
    FrakNeg,
    FrakPos,
    FrakDot,
    ScriptNeg,
    ScriptPos,
    ScriptDot,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::FeichtingerS,
        Family::SingleScale,
        Family::FrakNeg,
        Family::FrakPos,
        Family::FrakDot,
        Family::ScriptNeg,
        Family::ScriptPos,
        Family::ScriptDot,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::FeichtingerS => "feichtinger_s",
            Family::SingleScale => "single_scale_j",
            Family::FrakNeg => "frak_neg",
            Family::FrakPos => "frak_pos",
            Family::FrakDot => "frak_dot",
            Family::ScriptNeg => "script_neg",
            Family::ScriptPos => "script_pos",
            Family::ScriptDot => "script_dot",
        }
    }

    pub fn is_frak(&self) -> bool {
        matches!(self, Family::FrakNeg | Family::FrakPos | Family::FrakDot)
    }

    pub fn is_script(&self) -> bool {
        matches!(self, Family::ScriptNeg | Family::ScriptPos | Family::ScriptDot)
    }

    /// Natural scale bounds before grid truncation; `None` is unbounded.
    pub fn natural_scales(&self) -> (Option<i32>, Option<i32>) {
        match self {
            Family::FrakNeg | Family::ScriptNeg => (None, Some(0)),
            Family::FrakPos | Family::ScriptPos => (Some(0), None),
            Family::FeichtingerS => (Some(0), Some(0)),
            _ => (None, None),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == t || (t == "single_scale" && *f == Family::SingleScale))
            .ok_or_else(|| Error::Parse(format!("unknown norm family {s:?}")))
    }
}

/// Which norm to evaluate, with exact exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSpec {
    pub family: Family,
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    #[serde(with = "crate::exponent::rational_serde")]
    pub w: Rational,
    /// Explicit `[J_lo, J_hi]`; `None` uses the full valid range.
    pub scales: Option<(i32, i32)>,
}

impl NormSpec {
    pub fn new(family: Family, p: Exponent, q: Exponent, r: Exponent, w: Rational) -> Self {
        NormSpec {
            family,
            p,
            q,
            r,
            w,
            scales: None,
        }
    }

    pub fn with_scales(mut self, lo: i32, hi: i32) -> Self {
        self.scales = Some((lo, hi));
        self
    }

    /// `d(1/p + 1/q − 1)`.
    pub fn threshold_a(&self, d: usize) -> Rational {
        regime::threshold_a(d, self.p, self.q)
    }

    /// Checks exponent ranges and the weight condition of the `frak_*` families.
    pub fn validate(&self, d: usize) -> Result<()> {
        self.p.check_lebesgue()?;
        self.q.check_lebesgue()?;
        self.r.check_lebesgue()?;
        let a = self.threshold_a(d);
        let w = self.w;
        let bad = |why: &str| Err(Error::InvalidSpec(format!("{}: {why}", self.family)));
        match self.family {
            Family::FrakNeg if w < a => bad("weight below d(1/p+1/q-1)"),
            Family::FrakPos if w.is_positive() => bad("weight must be ≤ 0"),
            Family::FrakDot if w < a || w.is_positive() => bad("weight must lie in [d(1/p+1/q-1), 0]"),
            _ => Ok(()),
        }?;
        if let Some((lo, hi)) = self.scales {
            if lo > hi {
                return Err(Error::InvalidSpec(format!("empty truncation [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Scales summed over on this grid: the family's natural set, the grid's
    /// valid range and the optional truncation, intersected.
    pub fn scale_set(&self, grid: &crate::grid::GridSpec) -> Result<Vec<i32>> {
        let (glo, ghi) = grid.scale_range();
        let (nlo, nhi) = self.family.natural_scales();
        let mut lo = nlo.map_or(glo, |v| v.max(glo));
        let mut hi = nhi.map_or(ghi, |v| v.min(ghi));
        if let Some((tlo, thi)) = self.scales {
            for j in [tlo, thi] {
                grid.check_scale(j)?;
            }
            lo = lo.max(tlo);
            hi = hi.min(thi);
        }
        if lo > hi {
            return Err(Error::InvalidSpec(format!("{} has no scales on {grid}", self.family)));
        }
        Ok((lo..=hi).collect())
    }

    pub fn weight(&self, j: i32) -> f64 {
        weight(j, self.w)
    }
}

/// `family:p=4,q=4/3,r=inf,w=3/10[,jlo=-6,jhi=0]`.
impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:p={},q={},r={},w={}",
            self.family,
            self.p,
            self.q,
            self.r,
            crate::exponent::format_rational(self.w)
        )?;
        if let Some((lo, hi)) = self.scales {
            write!(f, ",jlo={lo},jhi={hi}")?;
        }
        Ok(())
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (fam, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("norm spec {s:?} lacks ':'")))?;
        let family: Family = fam.parse()?;
        let one = Exponent::integer(1);
        let mut spec = NormSpec::new(family, one, one, one, Rational::zero());
        let (mut lo, mut hi) = (None, None);
        for kv in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))?;
            let int = |v: &str| v.trim().parse::<i32>().map_err(|e| Error::Parse(format!("{v:?}: {e}")));
            match k.trim() {
                "p" => spec.p = v.parse()?,
                "q" => spec.q = v.parse()?,
                "r" => spec.r = v.parse()?,
                "w" => spec.w = crate::exponent::parse_rational(v)?,
                "jlo" => lo = Some(int(v)?),
                "jhi" => hi = Some(int(v)?),
                other => return Err(Error::Parse(format!("unknown norm spec key {other:?}"))),
            }
        }
        match (lo, hi) {
            (Some(a), Some(b)) => spec.scales = Some((a, b)),
            (None, None) => {}
            _ => return Err(Error::Parse("jlo and jhi go together".into())),
        }
        Ok(spec)
    }
}

/// `2^{jw}`.
pub fn weight(j: i32, w: Rational) -> f64 {
    (j as f64 * rational_to_f64(w)).exp2()
}

/// `‖f‖_{M^[j]_{p,q}}`.
pub fn mj_norm(w: &WindowFamily, f: &Field, j: i32, p: Exponent, q: Exponent) -> Result<f64> {
    q.check_lebesgue()?;
    let pieces = piece_norms(w, f, j, p)?;
    let v: Vec<f64> = pieces.into_iter().map(|(_, n)| n).collect();
    Ok(lq_norm(&v, q))
}

/// `2^{−jd/p} ‖f_λ‖_{M^[0]_{p,q}}` with `f_λ = f(2^{−j}·)`, an independent
/// route to `mj_norm` through dyadic dilation.
pub fn mj_norm_oracle(w: &WindowFamily, f: &Field, j: i32, p: Exponent, q: Exponent) -> Result<f64> {
    let dilated = f.dilate_dyadic(-j)?;
    let base = mj_norm(w, &dilated, 0, p, q)?;
    let d = f.grid().dim() as f64;
    Ok((-(j as f64) * d / p.value()).exp2() * base)
}

/// `‖{⟨k⟩^s ‖□_k f‖_p}‖_{ℓ^q}`.
pub fn modulation_norm(w: &WindowFamily, f: &Field, p: Exponent, q: Exponent, s: f64) -> Result<f64> {
    q.check_lebesgue()?;
    let pieces = piece_norms(w, f, 0, p)?;
    let v: Vec<f64> = pieces
        .into_iter()
        .map(|(k, n)| {
            let k2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
            (1.0 + k2).powf(0.5 * s) * n
        })
        .collect();
    Ok(lq_norm(&v, q))
}

/// Weighted scale profile `(j, 2^{jw} ‖f‖_{M^[j]_{p,q}})` of a `frak_*` norm.
pub fn frak_vanishing_profile(w: &WindowFamily, f: &Field, spec: &NormSpec) -> Result<Vec<(i32, f64)>> {
    if !spec.family.is_frak() {
        return Err(Error::InvalidSpec(format!("{} is not a frak family", spec.family)));
    }
    spec.validate(f.grid().dim())?;
    let spectral = f.to_spectral();
    spec.scale_set(f.grid())?
        .into_iter()
        .map(|j| Ok((j, spec.weight(j) * mj_norm(w, &spectral, j, spec.p, spec.q)?)))
        .collect()
}

/// `ℓ^r` (sup for `r = ∞`) of the weighted profile.
pub fn frak_norm(w: &WindowFamily, f: &Field, spec: &NormSpec) -> Result<f64> {
    let profile = frak_vanishing_profile(w, f, spec)?;
    let v: Vec<f64> = profile.into_iter().map(|(_, x)| x).collect();
    Ok(lq_norm(&v, spec.r))
}

/// A splitting `f = Σ_j f_j` with distinct scales.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pieces: Vec<(i32, Field)>,
}

impl Decomposition {
    pub fn new(mut pieces: Vec<(i32, Field)>) -> Result<Self> {
        pieces.sort_by_key(|(j, _)| *j);
        for w in pieces.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSpec(format!("scale {} repeated", w[0].0)));
            }
            w[0].1.same_grid(&w[1].1)?;
        }
        Ok(Decomposition { pieces })
    }

    pub fn empty() -> Self {
        Decomposition { pieces: Vec::new() }
    }

    /// `{f_0 = f}`.
    pub fn trivial(f: &Field) -> Self {
        Decomposition {
            pieces: vec![(0, f.clone())],
        }
    }

    /// Telescoping low-pass split over `[j_lo, j_hi]`:
    /// `f_{j_hi} = (I − σ_{j_hi−1})f`, `f_j = (σ_j − σ_{j−1})f`, `f_{j_lo} = σ_{j_lo} f`.
    pub fn lowpass_split(f: &Field, j_lo: i32, j_hi: i32) -> Result<Self> {
        if j_lo > j_hi {
            return Err(Error::InvalidSpec(format!("empty split range [{j_lo}, {j_hi}]")));
        }
        if j_lo == j_hi {
            return Ok(Decomposition {
                pieces: vec![(j_lo, f.clone())],
            });
        }
        let grid = *f.grid();
        let spec = f.to_spectral();
        let sigmas: Vec<Field> = (j_lo..j_hi).map(|j| build_lowpass(&grid, j)).collect::<Result<_>>()?;
        let one = Complex64::new(1.0, 0.0);
        let mut pieces = Vec::new();
        for (i, j) in (j_lo..=j_hi).enumerate() {
            let mult: Vec<Complex64> = (0..grid.size())
                .map(|n| {
                    let upper = if j == j_hi { one } else { sigmas[i].values()[n] };
                    let lower = if j == j_lo {
                        Complex64::zero()
                    } else {
                        sigmas[i - 1].values()[n]
                    };
                    (upper - lower) * spec.values()[n]
                })
                .collect();
            let piece = Field::new(grid, mult, Domain::Spectral)?;
            pieces.push((
                j,
                if f.domain() == Domain::Physical {
                    piece.idft()?
                } else {
                    piece
                },
            ));
        }
        Ok(Decomposition { pieces })
    }

    pub fn pieces(&self) -> &[(i32, Field)] {
        &self.pieces
    }

    pub fn scales(&self) -> Vec<i32> {
        self.pieces.iter().map(|(j, _)| *j).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// `Σ_j f_j` in the physical domain, `None` when empty.
    pub fn sum(&self) -> Option<Field> {
        let mut it = self.pieces.iter();
        let first = it.next()?.1.to_physical();
        Some(it.fold(first, |acc, (_, f)| acc.add(&f.to_physical()).expect("same grid")))
    }

    /// Relative `L²` mismatch between `Σ f_j` and `f`.
    pub fn sum_error(&self, f: &Field) -> Result<f64> {
        match self.sum() {
            Some(s) => s.rel_l2_distance(f),
            None => Ok(f.l2_norm()),
        }
    }
}

/// `ℓ^r_j` of `2^{jw} ‖f_j‖_{M^[j]_{p,q}}` for a given splitting, an upper
/// bound for the `script_*` norm of `Σ f_j`.
pub fn script_norm_upper(w: &WindowFamily, dec: &Decomposition, spec: &NormSpec) -> Result<f64> {
    if !spec.family.is_script() {
        return Err(Error::InvalidSpec(format!("{} is not a script family", spec.family)));
    }
    spec.validate(1)?;
    if dec.is_empty() {
        return Ok(0.0);
    }
    let grid = *dec.pieces[0].1.grid();
    let allowed = spec.scale_set(&grid)?;
    let mut v = Vec::with_capacity(dec.pieces.len());
    for (j, fj) in &dec.pieces {
        if !allowed.contains(j) {
            return Err(Error::InvalidSpec(format!(
                "piece at scale {j} lies outside the scale set of {}",
                spec.family
            )));
        }
        v.push(spec.weight(*j) * mj_norm(w, fj, *j, spec.p, spec.q)?);
    }
    Ok(lq_norm(&v, spec.r))
}

/// Value of any family: `frak_*` directly, `script_*` at the canonical
/// low-pass split over its scale set, `feichtinger_s` with `s = w`, and
/// `single_scale_j` at the (single) truncation scale.
pub fn evaluate(w: &WindowFamily, f: &Field, spec: &NormSpec) -> Result<f64> {
    let grid = *f.grid();
    match spec.family {
        Family::FeichtingerS => modulation_norm(w, f, spec.p, spec.q, rational_to_f64(spec.w)),
        Family::SingleScale => {
            let (lo, hi) = spec
                .scales
                .ok_or_else(|| Error::InvalidSpec("single_scale_j needs a scale".into()))?;
            if lo != hi {
                return Err(Error::InvalidSpec("single_scale_j takes exactly one scale".into()));
            }
            mj_norm(w, f, lo, spec.p, spec.q)
        }
        fam if fam.is_frak() => frak_norm(w, f, spec),
        _ => {
            let set = spec.scale_set(&grid)?;
            let dec = canonical_split(f, &set)?;
            script_norm_upper(w, &dec, spec)
        }
    }
}

/// Low-pass split over a scale set, clipped to where the cutoffs resolve.
pub fn canonical_split(f: &Field, set: &[i32]) -> Result<Decomposition> {
    let lo = *set
        .first()
        .ok_or_else(|| Error::InvalidSpec("empty scale set".into()))?;
    let hi = *set.last().expect("nonempty");
    let (llo, lhi) = crate::windows::lowpass_range(f.grid());
    Decomposition::lowpass_split(f, lo.max(llo), hi.min(lhi + 1).max(lo.max(llo)))
}
