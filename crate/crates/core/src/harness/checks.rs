//! Ratio checks for the inequalities of the frequency-uniform theory.
//!
//! Every check returns `LHS / bound` ratios; constants are reported, never
//! asserted.

use num_complex::Complex64;
use rayon::prelude::*;

use super::corpus::{Corpus, CorpusEntry};
use super::report::{RatioReport, ReportBuilder};
use super::HarnessConfig;
use crate::decomp::{box_op, piece_norms, DecompIndex};
use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, Exponent, Rational};
use crate::fft;
use crate::grid::{pairing, Domain, Field};
use crate::norms::regime::{threshold_a, threshold_b};
use crate::norms::{frak_norm, mj_norm, script_norm_upper, Decomposition, Family, NormSpec};
use crate::windows::{lowpass_profile, WindowFamily};

struct Row {
    params: String,
    group: String,
    ratio: f64,
}

fn row(params: String, group: impl ToString, ratio: f64) -> Row {
    Row {
        params,
        group: group.to_string(),
        ratio,
    }
}

/// Evaluates `f` on every entry in parallel and pushes the rows in corpus order.
fn sweep<F>(b: &mut ReportBuilder, corpus: &Corpus, f: F) -> Result<()>
where
    F: Fn(usize, &CorpusEntry) -> Result<Vec<Row>> + Sync,
{
    let rows: Vec<Vec<Row>> = corpus
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| f(i, e))
        .collect::<Result<_>>()?;
    for (i, rs) in rows.into_iter().enumerate() {
        for r in rs {
            b.push(i, &corpus.entries[i].tag, r.params, r.group, r.ratio);
        }
    }
    Ok(())
}

fn finish(b: ReportBuilder, corpus: &Corpus, cfg: &HarnessConfig) -> RatioReport {
    b.finish(corpus.len().div_ceil(2), cfg.spread_threshold)
}

fn inv(p: Exponent) -> f64 {
    rational_to_f64(p.reciprocal())
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn check_scales(corpus: &Corpus, js: &[i32]) -> Result<()> {
    for &j in js {
        corpus.grid.check_scale(j)?;
    }
    Ok(())
}

/// `‖h^{(n)}‖_{L²(ℝ)}` for `n = 0..=order`, by spectral differentiation of
/// samples on `[−2, 2)`.
pub fn profile_derivative_norms(w: &WindowFamily, order: usize) -> Vec<f64> {
    const M: usize = 1 << 14;
    let len = 4.0;
    let dx = len / M as f64;
    let samples: Vec<Complex64> = (0..M).map(|i| Complex64::new(w.h(-2.0 + i as f64 * dx), 0.0)).collect();
    let mut spec = samples;
    fft::transform(&mut spec, 1, M, false);
    (0..=order)
        .map(|n| {
            let mut v: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let k = if i < M / 2 { i as f64 } else { i as f64 - M as f64 };
                    let omega = 2.0 * std::f64::consts::PI * k / len;
                    z * Complex64::new(0.0, omega).powu(n as u32)
                })
                .collect();
            if n > 0 {
                v[M / 2] = Complex64::new(0.0, 0.0);
            }
            fft::transform(&mut v, 1, M, true);
            let s: f64 = v.iter().map(|z| (z / M as f64).norm_sqr()).sum();
            (s * dx).sqrt()
        })
        .collect()
}

/// `‖ψ‖₂^{1−d/2L} (Σ_{|α|=L} ‖∂^α ψ‖₂)^{d/2L}` for the tensor window `ψ`.
/// The value is the same for every `ψ_{j,k}`.
pub fn sobolev_factor(w: &WindowFamily, d: usize, order: usize) -> Result<f64> {
    if order < d / 2 + 1 {
        return Err(Error::Precondition(format!(
            "derivative order {order} must be at least {} in dimension {d}",
            d / 2 + 1
        )));
    }
    let c = profile_derivative_norms(w, order);
    let l2 = c[0].powi(d as i32);
    let mut total = 0.0;
    let mut alpha = vec![0usize; d];
    multi_indices(&mut alpha, 0, order, &mut |a| {
        total += a.iter().map(|&n| c[n]).product::<f64>();
    });
    let e = d as f64 / (2.0 * order as f64);
    Ok(l2.powf(1.0 - e) * total.powf(e))
}

fn multi_indices(alpha: &mut [usize], axis: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
    if axis + 1 == alpha.len() {
        alpha[axis] = left;
        f(alpha);
        return;
    }
    for n in 0..=left {
        alpha[axis] = n;
        multi_indices(alpha, axis + 1, left - n, f);
    }
}

/// `max_k ‖□_{j,k} f‖_r / (S·‖f‖_r)` per entry and scale, `S` the Sobolev factor.
pub fn check_bernstein_multiplier(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    r: Exponent,
    order: usize,
) -> Result<RatioReport> {
    let d = corpus.grid.dim();
    let s = sobolev_factor(&cfg.window, d, order)?;
    check_scales(corpus, &cfg.j_list)?;
    let mut b = ReportBuilder::new("bernstein_multiplier")
        .param("r", r)
        .param("L", order)
        .param("sobolev_factor", s);
    sweep(&mut b, corpus, |_, e| {
        let norm = e.field.to_physical().lp_norm(r)?;
        cfg.j_list
            .iter()
            .map(|&j| {
                let best = piece_norms(&cfg.window, &e.field, j, r)?
                    .into_iter()
                    .map(|(_, v)| v)
                    .fold(0.0, f64::max);
                Ok(row(format!("j={j}"), format!("j={j}"), safe_ratio(best, s * norm)))
            })
            .collect()
    })?;
    Ok(finish(b, corpus, cfg))
}

/// Restricts `f̂` to `|ξ|_∞ < R` and compresses it by the integer factor `s`
/// around `ξ0` (along the first axis): `ĝ(ξ0 + η) = f̂_R(sη)`.
fn compress(f: &Field, radius: f64, s: i64, shift: i64) -> Result<Field> {
    let grid = *f.grid();
    let spec = f.to_spectral();
    let d = grid.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.size()];
    let mut idx = vec![0usize; d];
    let mut src = vec![0usize; d];
    for (flat, z) in out.iter_mut().enumerate() {
        grid.unflatten(flat, &mut idx);
        let mut cut = 1.0;
        let mut ok = true;
        for a in 0..d {
            let m = grid.mode(idx[a]) - if a == 0 { shift } else { 0 };
            match grid.slot(s * m) {
                Some(sl) => {
                    src[a] = sl;
                    cut *= lowpass_profile(2.0 * grid.xi(s * m) / radius);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && cut > 0.0 {
            *z = spec.values()[grid.flatten(&src)] * cut;
        }
    }
    Field::new(grid, out, Domain::Spectral)
}

/// `‖g‖_q / (b^{d(1/p−1/q)} ‖g‖_p)` for entries compressed into `B(ξ0, b)`,
/// grouped by `b`. Every radius must divide the largest one.
pub fn check_bernstein_pq(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    p: Exponent,
    q: Exponent,
    b_list: &[f64],
    xi0_list: &[f64],
) -> Result<RatioReport> {
    if p.reciprocal() < q.reciprocal() {
        return Err(Error::InvalidExponent(format!("need p ≤ q, got p={p}, q={q}")));
    }
    let grid = corpus.grid;
    let d = grid.dim() as f64;
    let big = b_list.iter().copied().fold(0.0, f64::max);
    let mut factors = Vec::new();
    for &b in b_list {
        let s = big / b;
        if b <= 0.0 || (s - s.round()).abs() > 1e-12 {
            return Err(Error::Precondition(format!("radius {b} does not divide {big}")));
        }
        factors.push((b, s.round() as i64));
    }
    let per = grid.period() as f64;
    let mut shifts = Vec::new();
    for &xi0 in xi0_list {
        let m = (xi0 * per).round() as i64;
        if (m as f64 / per + big).abs() > grid.nyquist() - 2.0 || (m as f64 / per - big).abs() > grid.nyquist() - 2.0 {
            return Err(Error::Precondition(format!(
                "ball around {xi0} leaves the Nyquist margin"
            )));
        }
        shifts.push(m);
    }
    let expo = d * (inv(p) - inv(q));
    let mut b = ReportBuilder::new("bernstein_pq")
        .param("p", p)
        .param("q", q)
        .param("radius", big);
    sweep(&mut b, corpus, |_, e| {
        let mut rows = Vec::new();
        for &(rad, s) in &factors {
            for &m in &shifts {
                let g = compress(&e.field, big, s, m)?.idft()?;
                let lp = g.lp_norm(p)?;
                if lp == 0.0 {
                    continue;
                }
                let lq = g.lp_norm(q)?;
                let xi0 = m as f64 / per;
                rows.push(row(
                    format!("b={rad},xi0={xi0}"),
                    format!("b={rad}"),
                    lq / (rad.powf(expo) * lp),
                ));
            }
        }
        Ok(rows)
    })?;
    Ok(finish(b, corpus, cfg))
}

/// Both sides of the dilation sandwich for `λ = 2^m`:
/// lower `λ^{θ∧}‖f‖_{M⁰} / (λ^{d/p}‖f_λ‖_{M⁰})` and upper
/// `λ^{d/p}‖f_λ‖_{M⁰} / (λ^{θ∨}‖f‖_{M⁰})`, grouped by `m`.
pub fn check_dilation_bounds(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    p: Exponent,
    q: Exponent,
) -> Result<(RatioReport, RatioReport)> {
    let grid = corpus.grid;
    let d = grid.dim();
    for &m in &cfg.m_list {
        if m < 0 {
            return Err(Error::Precondition(format!("dilation exponent {m} must be ≥ 0")));
        }
        grid.dilated(m)?.check_scale(0)?;
    }
    let a = threshold_a(d, p, q);
    let bb = threshold_b(d, p, q);
    let zero = Rational::from_integer(0);
    let lo = rational_to_f64(zero.min(a).min(bb));
    let hi = rational_to_f64(zero.max(a).max(bb));
    let dp = d as f64 * inv(p);
    let mut lower = ReportBuilder::new("dilation_bounds.lower")
        .param("p", p)
        .param("q", q)
        .param("theta_min", lo);
    let mut upper = ReportBuilder::new("dilation_bounds.upper")
        .param("p", p)
        .param("q", q)
        .param("theta_max", hi);
    let rows: Vec<Vec<(i32, f64, f64)>> = corpus
        .entries
        .par_iter()
        .map(|e| {
            let base = mj_norm(&cfg.window, &e.field, 0, p, q)?;
            cfg.m_list
                .iter()
                .map(|&m| {
                    let lam = (m as f64).exp2();
                    let dil = lam.powf(dp) * mj_norm(&cfg.window, &e.field.dilate_dyadic(m)?, 0, p, q)?;
                    Ok((
                        m,
                        safe_ratio(lam.powf(lo) * base, dil),
                        safe_ratio(dil, lam.powf(hi) * base),
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    for (i, rs) in rows.into_iter().enumerate() {
        let tag = &corpus.entries[i].tag;
        for (m, l, u) in rs {
            lower.push(i, tag, format!("m={m}"), format!("m={m}"), l);
            upper.push(i, tag, format!("m={m}"), format!("m={m}"), u);
        }
    }
    Ok((finish(lower, corpus, cfg), finish(upper, corpus, cfg)))
}

/// `‖f‖_{M^[j]} / (2^{−(j−i)μ₀}‖f‖_{M^[i]})` over pairs `i ≤ j` of the sweep,
/// `μ₀ = 0 ∧ d(1/q−1/p) ∧ d(1/p+1/q−1)`, grouped by the pair.
pub fn check_scale_comparison(corpus: &Corpus, cfg: &HarnessConfig, p: Exponent, q: Exponent) -> Result<RatioReport> {
    check_scales(corpus, &cfg.j_list)?;
    let d = corpus.grid.dim();
    let mu0 = rational_to_f64(
        Rational::from_integer(0)
            .min(threshold_a(d, p, q))
            .min(threshold_b(d, p, q)),
    );
    let mut js = cfg.j_list.clone();
    js.sort_unstable();
    let mut b = ReportBuilder::new("scale_comparison")
        .param("p", p)
        .param("q", q)
        .param("mu0", mu0);
    sweep(&mut b, corpus, |_, e| {
        let norms: Vec<f64> = js
            .iter()
            .map(|&j| mj_norm(&cfg.window, &e.field, j, p, q))
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for (a, &i) in js.iter().enumerate() {
            for (c, &j) in js.iter().enumerate().skip(a) {
                let bound = (-((j - i) as f64) * mu0).exp2() * norms[a];
                rows.push(row(
                    format!("i={i},j={j}"),
                    format!("i={i},j={j}"),
                    safe_ratio(norms[c], bound),
                ));
            }
        }
        Ok(rows)
    })?;
    Ok(finish(b, corpus, cfg))
}

/// `‖g‖_{M⁰_{p̃,q}} / (2^{jd(1/p+1/q−1/p̃−1)}‖g‖_{M^[j]_{p,q}})`, grouped by `j`.
pub fn check_embedding(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    p: Exponent,
    q: Exponent,
    pt: Exponent,
) -> Result<RatioReport> {
    if pt.reciprocal() > p.reciprocal() {
        return Err(Error::InvalidExponent(format!("need p̃ ≥ p, got p̃={pt}, p={p}")));
    }
    check_scales(corpus, &cfg.j_list)?;
    let d = corpus.grid.dim() as f64;
    let expo = d * (inv(p) + inv(q) - inv(pt) - 1.0);
    let mut b = ReportBuilder::new("embedding")
        .param("p", p)
        .param("q", q)
        .param("p_tilde", pt);
    sweep(&mut b, corpus, |_, e| {
        let top = mj_norm(&cfg.window, &e.field, 0, pt, q)?;
        cfg.j_list
            .iter()
            .map(|&j| {
                let bound = (j as f64 * expo).exp2() * mj_norm(&cfg.window, &e.field, j, p, q)?;
                Ok(row(format!("j={j}"), format!("j={j}"), safe_ratio(top, bound)))
            })
            .collect()
    })?;
    Ok(finish(b, corpus, cfg))
}

/// `‖□₀f‖_∞ / (2^{jd(1/p+1/q−1)}‖f‖_{M^[j]_{p,q}})`, grouped by `j`.
pub fn check_lowfreq_lower_bound(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    p: Exponent,
    q: Exponent,
) -> Result<RatioReport> {
    check_scales(corpus, &cfg.j_list)?;
    let d = corpus.grid.dim();
    let a = rational_to_f64(threshold_a(d, p, q));
    let mut b = ReportBuilder::new("lowfreq_lower_bound").param("p", p).param("q", q);
    sweep(&mut b, corpus, |_, e| {
        let low = box_op(&cfg.window, &e.field, &DecompIndex::new(0, vec![0; d]))?.lp_norm(Exponent::Infinity)?;
        cfg.j_list
            .iter()
            .map(|&j| {
                let bound = (j as f64 * a).exp2() * mj_norm(&cfg.window, &e.field, j, p, q)?;
                Ok(row(format!("j={j}"), format!("j={j}"), safe_ratio(low, bound)))
            })
            .collect()
    })?;
    Ok(finish(b, corpus, cfg))
}

/// Circular mean of `|f|²` along each axis, a translation that centers `f`.
fn centroid(f: &Field) -> Vec<f64> {
    let phys = f.to_physical();
    let grid = *f.grid();
    let l = grid.length();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.dim()];
    let mut idx = vec![0usize; grid.dim()];
    for (flat, z) in phys.values().iter().enumerate() {
        grid.unflatten(flat, &mut idx);
        for (a, &i) in idx.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / grid.n() as f64;
            acc[a] += Complex64::from_polar(z.norm_sqr(), theta);
        }
    }
    acc.iter()
        .map(|c| c.arg().rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI) * l)
        .collect()
}

/// Radius `δ` of the largest cube around the origin on which
/// `|f̂(ξ) − f̂(0)| < |f̂(0)|/2` for `f` translated to its centroid, capped at 1.
pub fn flatness_radius(f: &Field) -> f64 {
    let spec = f.to_spectral();
    let grid = *f.grid();
    let c = centroid(f);
    let a0 = spec.values()[0];
    let mut idx = vec![0usize; grid.dim()];
    let mut delta = 1.0_f64;
    for (flat, z) in spec.values().iter().enumerate() {
        grid.unflatten(flat, &mut idx);
        let phase: f64 = idx.iter().zip(&c).map(|(&s, c)| grid.xi(grid.mode(s)) * c).sum();
        if (z * Complex64::from_polar(1.0, phase) - a0).norm() >= 0.5 * a0.norm() {
            let r = idx.iter().map(|&s| grid.xi(grid.mode(s)).abs()).fold(0.0, f64::max);
            delta = delta.min(r);
        }
    }
    delta
}

/// `|f̂(0)| δ^{d/q} / (2^{jd(1/p+1/q−1)}‖f‖_{M^[j]_{p,q}})` for Schwartz-type
/// entries and scales `2^j ≤ δ`, grouped by `j`. Entries with `f̂(0) = 0`
/// or a flatness radius below the finest scale are skipped.
pub fn check_schwartz_lower_bound(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    p: Exponent,
    q: Exponent,
) -> Result<RatioReport> {
    let grid = corpus.grid;
    let d = grid.dim();
    let (jlo, _) = grid.scale_range();
    let a = rational_to_f64(threshold_a(d, p, q));
    let vol = grid.length().powi(d as i32);
    let js: Vec<i32> = (jlo..=0).collect();
    let mut b = ReportBuilder::new("schwartz_lower_bound").param("p", p).param("q", q);
    let rows: Vec<Option<(Vec<Row>, f64)>> = corpus
        .entries
        .par_iter()
        .map(|e| {
            if !matches!(e.tag.as_str(), "gaussian" | "modulated_gaussian" | "bump_train") {
                return Ok(None);
            }
            let fhat0 = vol * e.field.to_spectral().values()[0].norm();
            let peak = vol
                * e.field
                    .to_spectral()
                    .values()
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
            if fhat0 <= 1e-3 * peak {
                return Ok(None);
            }
            let delta = flatness_radius(&e.field);
            let scale = fhat0 * delta.powf(d as f64 * inv(q));
            let mut rows = Vec::new();
            let mut floor = f64::INFINITY;
            for &j in js.iter().filter(|&&j| (j as f64).exp2() <= delta) {
                let v = (j as f64 * a).exp2() * mj_norm(&cfg.window, &e.field, j, p, q)?;
                floor = floor.min(v / scale);
                rows.push(row(format!("j={j},delta={delta:.6}"), format!("j={j}"), scale / v));
            }
            Ok(if rows.is_empty() { None } else { Some((rows, floor)) })
        })
        .collect::<Result<_>>()?;
    let mut skipped = 0;
    let mut floor = f64::INFINITY;
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            None => skipped += 1,
            Some((rs, fl)) => {
                floor = floor.min(fl);
                for x in rs {
                    b.push(i, &corpus.entries[i].tag, x.params, x.group, x.ratio);
                }
            }
        }
    }
    b.set_param("floor", if floor.is_finite() { floor } else { 0.0 });
    b.note(format!(
        "{skipped} entries skipped: not Schwartz-type, f̂(0) = 0 or flatness radius below 2^{jlo}"
    ));
    Ok(finish(b, corpus, cfg))
}

/// Index of the partner used by the pair checks: the first entry of the
/// block of six that `i` belongs to, a centered Gaussian.
fn partner(i: usize) -> usize {
    i - i % super::corpus::TAGS.len()
}

/// Bilinear estimate `‖fg‖_{M^[j]_{p,1}} / (2^{id/p}‖f‖_{M^[j]_{p,1}}‖g‖_{M^[i]_{p,1}})`
/// for `i ≤ j` in the sweep, grouped by `i`; and the product estimate for the
/// induced splitting `fg = Σ_k (f_k Σ_{i≤k} g_i + g_k Σ_{i<k} f_i)`.
pub fn check_algebra(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    p: Exponent,
    mu: Rational,
    r: Exponent,
) -> Result<(RatioReport, RatioReport)> {
    let grid = corpus.grid;
    let d = grid.dim();
    let dp = Rational::from_integer(d as i64) * p.reciprocal();
    let zero = Rational::from_integer(0);
    let r_one = r == Exponent::integer(1);
    if mu < zero || mu > dp || (!r_one && mu == dp) {
        return Err(Error::InvalidSpec(format!(
            "weight {mu} outside the algebra range for p={p}, r={r}"
        )));
    }
    check_scales(corpus, &cfg.j_list)?;
    let one = Exponent::integer(1);
    let mut js = cfg.j_list.clone();
    js.sort_unstable();
    let dpf = rational_to_f64(dp);
    let spec = NormSpec::new(Family::ScriptNeg, p, one, r, mu);
    let set = spec.scale_set(&grid)?;
    let mut bil = ReportBuilder::new("algebra.bilinear").param("p", p);
    let mut prod = ReportBuilder::new("algebra.product")
        .param("p", p)
        .param("mu", crate::exponent::format_rational(mu))
        .param("r", r);
    let out: Vec<(Vec<Row>, f64)> = corpus
        .entries
        .par_iter()
        .enumerate()
        .map(|(a, e)| {
            let g = &corpus.entries[partner(a)].field;
            let fp = e.field.to_physical();
            let gp = g.to_physical();
            let fg = fp.mul(&gp)?;
            let fj: Vec<f64> = js
                .iter()
                .map(|&j| mj_norm(&cfg.window, &fp, j, p, one))
                .collect::<Result<_>>()?;
            let gi: Vec<f64> = js
                .iter()
                .map(|&j| mj_norm(&cfg.window, &gp, j, p, one))
                .collect::<Result<_>>()?;
            let pj: Vec<f64> = js
                .iter()
                .map(|&j| mj_norm(&cfg.window, &fg, j, p, one))
                .collect::<Result<_>>()?;
            let mut rows = Vec::new();
            for (x, &i) in js.iter().enumerate() {
                for (y, &j) in js.iter().enumerate().skip(x) {
                    let bound = (i as f64 * dpf).exp2() * fj[y] * gi[x];
                    rows.push(row(format!("i={i},j={j}"), format!("i={i}"), safe_ratio(pj[y], bound)));
                }
            }
            let df = crate::norms::canonical_split(&fp, &set)?;
            let dg = crate::norms::canonical_split(&gp, &set)?;
            let h = induced_product(&df, &dg)?;
            let num = script_norm_upper(&cfg.window, &h, &spec)?;
            let den = script_norm_upper(&cfg.window, &df, &spec)? * script_norm_upper(&cfg.window, &dg, &spec)?;
            Ok((rows, safe_ratio(num, den)))
        })
        .collect::<Result<_>>()?;
    for (a, (rows, pr)) in out.into_iter().enumerate() {
        let tag = &corpus.entries[a].tag;
        for x in rows {
            bil.push(a, tag, x.params, x.group, x.ratio);
        }
        prod.push(a, tag, format!("partner={}", partner(a)), "product", pr);
    }
    Ok((finish(bil, corpus, cfg), finish(prod, corpus, cfg)))
}

/// Splitting of `fg` at scale `k`: `f_k Σ_{i≤k} g_i + g_k Σ_{i<k} f_i`.
pub fn induced_product(df: &Decomposition, dg: &Decomposition) -> Result<Decomposition> {
    let mut scales: Vec<i32> = df.scales();
    scales.extend(dg.scales());
    scales.sort_unstable();
    scales.dedup();
    let grid = match df.pieces().first().or(dg.pieces().first()) {
        Some((_, f)) => *f.grid(),
        None => return Ok(Decomposition::empty()),
    };
    let zero = Field::zeros(grid, Domain::Physical);
    let piece = |d: &Decomposition, k: i32| {
        d.pieces()
            .iter()
            .find(|(j, _)| *j == k)
            .map_or_else(|| zero.clone(), |(_, f)| f.to_physical())
    };
    let mut fsum = zero.clone();
    let mut gsum = zero.clone();
    let mut out = Vec::new();
    for &k in &scales {
        let fk = piece(df, k);
        let gk = piece(dg, k);
        gsum = gsum.add(&gk)?;
        let h = fk.mul(&gsum)?.add(&gk.mul(&fsum)?)?;
        fsum = fsum.add(&fk)?;
        out.push((k, h));
    }
    Decomposition::new(out)
}

/// `|⟨f,g⟩| / (‖g‖_{𝔐^{−μ}_{p',q',r'}} · U(f))` with `U` the `script_neg`
/// upper bound of three splittings of `f`, grouped by splitting.
pub fn check_duality_pairing(
    corpus: &Corpus,
    cfg: &HarnessConfig,
    p: Exponent,
    q: Exponent,
    mu: Rational,
    r: Exponent,
) -> Result<RatioReport> {
    let grid = corpus.grid;
    let fspec = NormSpec::new(Family::ScriptNeg, p, q, r, mu);
    let gspec = NormSpec::new(Family::FrakNeg, p.conjugate()?, q.conjugate()?, r.conjugate()?, -mu);
    gspec.validate(grid.dim())?;
    let set = fspec.scale_set(&grid)?;
    let finest = set[0];
    let mut b = ReportBuilder::new("duality_pairing")
        .param("p", p)
        .param("q", q)
        .param("mu", crate::exponent::format_rational(mu))
        .param("r", r);
    sweep(&mut b, corpus, |a, e| {
        let mut rows = Vec::new();
        for (label, gi) in [("self", a), ("partner", partner(a))] {
            let g = &corpus.entries[gi].field;
            let lhs = pairing(&e.field.to_physical(), &g.to_physical())?.norm();
            let gn = frak_norm(&cfg.window, g, &gspec)?;
            let decs = [
                ("canonical", crate::norms::canonical_split(&e.field, &set)?),
                ("trivial", Decomposition::trivial(&e.field)),
                ("finest", Decomposition::new(vec![(finest, e.field.clone())])?),
            ];
            for (name, dec) in decs {
                let u = script_norm_upper(&cfg.window, &dec, &fspec)?;
                rows.push(row(format!("g={label},split={name}"), name, safe_ratio(lhs, gn * u)));
            }
        }
        Ok(rows)
    })?;
    Ok(finish(b, corpus, cfg))
}

/// `‖f_λ‖ / (λ^{ρ−d/p}‖f‖)` for a `frak_*` norm and `λ = 2^m`, grouped by `m`;
/// for `frak_dot` also the reverse ratio.
pub fn check_scaling_limit(corpus: &Corpus, cfg: &HarnessConfig, id: &str, spec: &NormSpec) -> Result<RatioReport> {
    if !spec.family.is_frak() {
        return Err(Error::InvalidSpec(format!("{} is not a frak family", spec.family)));
    }
    let grid = corpus.grid;
    spec.validate(grid.dim())?;
    for &m in &cfg.m_list {
        spec.scale_set(&grid.dilated(m)?)?;
    }
    let expo = rational_to_f64(spec.w) - grid.dim() as f64 * inv(spec.p);
    let two_sided = spec.family == Family::FrakDot;
    let mut b = ReportBuilder::new(id)
        .param("family", spec.family)
        .param("p", spec.p)
        .param("q", spec.q)
        .param("r", spec.r)
        .param("rho", crate::exponent::format_rational(spec.w));
    sweep(&mut b, corpus, |_, e| {
        let base = frak_norm(&cfg.window, &e.field, spec)?;
        let mut rows = Vec::new();
        for &m in &cfg.m_list {
            let lam = (m as f64).exp2();
            let scaled = frak_norm(&cfg.window, &e.field.dilate_dyadic(m)?, spec)?;
            let bound = lam.powf(expo) * base;
            rows.push(row(format!("m={m}"), format!("m={m}"), safe_ratio(scaled, bound)));
            if two_sided {
                rows.push(row(
                    format!("m={m},lower"),
                    format!("m={m},lower"),
                    safe_ratio(bound, scaled),
                ));
            }
        }
        Ok(rows)
    })?;
    Ok(finish(b, corpus, cfg))
}
