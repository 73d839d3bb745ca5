//! Frequency-uniform decomposition operators `□_{j,k} = 𝓕^{-1} ψ_{j,k} 𝓕`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::fft;
use crate::grid::{lp_of_samples, Domain, Field, GridSpec};
use crate::numeric::kahan_sum;
use crate::windows::{window_arg, SparseMask, WindowFamily, SUPPORT_RADIUS};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecompIndex {
    pub j: i32,
    pub k: Vec<i64>,
}

impl DecompIndex {
    pub fn new(j: i32, k: Vec<i64>) -> Self {
        DecompIndex { j, k }
    }
}

fn masked_spectrum(grid: &GridSpec, spec: &[Complex64], mask: &SparseMask) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); grid.size()];
    mask.for_each(grid, |i, w| out[i] = spec[i] * w);
    out
}

/// `□_{j,k} f` as a physical field.
pub fn box_op(w: &WindowFamily, f: &Field, idx: &DecompIndex) -> Result<Field> {
    let spec = f.to_spectral();
    let mask = w.sparse_mask(f.grid(), idx.j, &idx.k)?;
    let mut v = masked_spectrum(f.grid(), spec.values(), &mask);
    fft::transform(&mut v, f.grid().dim(), f.grid().n(), true);
    Field::new(*f.grid(), v, Domain::Physical)
}

/// `ψ_{j,k} f̂` as a spectral field.
pub fn box_spectrum(w: &WindowFamily, f: &Field, idx: &DecompIndex) -> Result<Field> {
    let spec = f.to_spectral();
    let mask = w.sparse_mask(f.grid(), idx.j, &idx.k)?;
    Field::new(
        *f.grid(),
        masked_spectrum(f.grid(), spec.values(), &mask),
        Domain::Spectral,
    )
}

/// Window shifts `k` on one axis whose support contains mode `m`.
fn axis_candidates(w: &WindowFamily, grid: &GridSpec, j: i32, m: i64) -> Vec<i64> {
    let t = window_arg(grid, j, m);
    let lo = (t - SUPPORT_RADIUS).floor() as i64;
    let hi = (t + SUPPORT_RADIUS).ceil() as i64;
    (lo..=hi).filter(|&k| w.h(t - k as f64) > 0.0).collect()
}

/// All `k` whose window meets the nonzero coefficients of `spec`, sorted.
pub fn active_indices(w: &WindowFamily, spec: &Field, j: i32) -> Result<Vec<Vec<i64>>> {
    if spec.domain() != Domain::Spectral {
        return Err(Error::WrongDomain {
            expected: Domain::Spectral,
            found: spec.domain(),
        });
    }
    let grid = spec.grid();
    grid.check_scale(j)?;
    let d = grid.dim();
    let per_slot: Vec<Vec<i64>> = (0..grid.n())
        .map(|i| axis_candidates(w, grid, j, grid.mode(i)))
        .collect();
    let mut set = BTreeSet::new();
    let mut idx = vec![0usize; d];
    for flat in spec.nonzero_indices() {
        grid.unflatten(flat, &mut idx);
        let lists: Vec<&Vec<i64>> = idx.iter().map(|&i| &per_slot[i]).collect();
        for_each_product(&lists, |k| {
            set.insert(k.to_vec());
        });
    }
    Ok(set.into_iter().collect())
}

fn for_each_product<F: FnMut(&[i64])>(lists: &[&Vec<i64>], mut f: F) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let d = lists.len();
    let mut pos = vec![0usize; d];
    let mut cur: Vec<i64> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&cur);
        let mut a = d;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            pos[a] += 1;
            if pos[a] < lists[a].len() {
                cur[a] = lists[a][pos[a]];
                break;
            }
            pos[a] = 0;
            cur[a] = lists[a][0];
        }
    }
}

/// `‖□_{j,k} f‖_p` for every active `k`, in sorted `k` order.
pub fn piece_norms(w: &WindowFamily, f: &Field, j: i32, p: Exponent) -> Result<Vec<(Vec<i64>, f64)>> {
    p.check_lebesgue()?;
    let spec = f.to_spectral();
    let ks = active_indices(w, &spec, j)?;
    let grid = *f.grid();
    let cell = grid.cell_volume();
    let norms: Vec<f64> = ks
        .par_iter()
        .map(|k| {
            let mask = w.sparse_mask(&grid, j, k).expect("scale checked");
            let mut v = masked_spectrum(&grid, spec.values(), &mask);
            fft::transform(&mut v, grid.dim(), grid.n(), true);
            lp_of_samples(&v, cell, p)
        })
        .collect();
    Ok(ks.into_iter().zip(norms).collect())
}

/// `Σ_{k active} □_{j,k} f`, returned in the input's domain.
pub fn reconstruct(w: &WindowFamily, f: &Field, j: i32) -> Result<Field> {
    let spec = f.to_spectral();
    let grid = *f.grid();
    let ks = active_indices(w, &spec, j)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.size()];
    for k in &ks {
        let mask = w.sparse_mask(&grid, j, k)?;
        mask.for_each(&grid, |i, m| acc[i] += spec.values()[i] * m);
    }
    let out = Field::new(grid, acc, Domain::Spectral)?;
    Ok(match f.domain() {
        Domain::Spectral => out,
        Domain::Physical => out.idft()?,
    })
}

/// `max ‖□_{j,k}□_{j,l} f‖₂` over active pairs with `|k − l|_∞ ≥ 2`.
///
/// Pairs at distance 2 and 3 are evaluated on the lattice; farther windows are
/// strictly farther apart than those.
pub fn almost_orthogonality_check(w: &WindowFamily, f: &Field, j: i32) -> Result<f64> {
    let spec = f.to_spectral();
    let grid = *f.grid();
    let ks = active_indices(w, &spec, j)?;
    let active: BTreeSet<Vec<i64>> = ks.iter().cloned().collect();
    let vol = grid.length().powi(grid.dim() as i32);
    let worst = ks
        .par_iter()
        .map(|k| {
            let mk = w.sparse_mask(&grid, j, k).expect("scale checked");
            let mut worst = 0.0_f64;
            let offsets: Vec<Vec<i64>> = offsets(grid.dim(), 3);
            for off in offsets {
                let dist = off.iter().map(|o| o.abs()).max().unwrap_or(0);
                if dist < 2 {
                    continue;
                }
                let l: Vec<i64> = k.iter().zip(&off).map(|(a, b)| a + b).collect();
                if !active.contains(&l) {
                    continue;
                }
                let ml = w.sparse_mask(&grid, j, &l).expect("scale checked");
                let mut dense = vec![0.0; grid.size()];
                ml.for_each(&grid, |i, v| dense[i] = v);
                let mut terms = Vec::new();
                mk.for_each(&grid, |i, v| {
                    let z = spec.values()[i] * v * dense[i];
                    terms.push(z.norm_sqr());
                });
                worst = worst.max((vol * kahan_sum(terms)).sqrt());
            }
            worst
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst)
}

fn offsets(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side: Vec<i64> = (-r..=r).collect();
    let lists: Vec<&Vec<i64>> = vec![&side; d];
    let mut out = Vec::new();
    for_each_product(&lists, |o| out.push(o.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mode(grid: GridSpec, k: &[i64]) -> Field {
        let k = k.to_vec();
        Field::from_physical_fn(grid, move |x| {
            let ph: f64 = x.iter().zip(&k).map(|(a, b)| a * *b as f64).sum();
            Complex64::from_polar(1.0, ph)
        })
    }

    fn random_band(grid: GridSpec, seed: u64, band: f64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<Complex64> = (0..grid.size())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = Field::new(grid, v, Domain::Spectral).unwrap();
        f.spectral_multiplier(|xi| {
            let inside = xi.iter().all(|x| x.abs() <= band);
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
    }

    #[test]
    fn plateau_capture_and_miss() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(1, 128, 8).unwrap();
        let f = mode(g, &[3]);
        let same = box_op(&w, &f, &DecompIndex::new(0, vec![3])).unwrap();
        assert!(same.rel_l2_distance(&f).unwrap() < 1e-13);
        let miss = box_op(&w, &f, &DecompIndex::new(0, vec![4])).unwrap();
        assert!(miss.l2_norm() < 1e-13);
    }

    #[test]
    fn active_indices_examples() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(1, 256, 8).unwrap();
        let f = Field::from_spectral_fn(g, |xi| Complex64::new(if xi[0] == -5.0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(active_indices(&w, &f, 0).unwrap(), vec![vec![-5]]);
        let z = Field::zeros(g, Domain::Spectral);
        assert!(active_indices(&w, &z, 0).unwrap().is_empty());
        let full = Field::from_spectral_fn(g, |_| Complex64::new(1.0, 0.0));
        let ks = active_indices(&w, &full, 0).unwrap();
        let want: Vec<Vec<i64>> = (-16..=16).map(|k| vec![k]).collect();
        assert_eq!(ks, want);
    }

    #[test]
    fn reconstruction_all_scales() {
        let w = WindowFamily::smooth();
        for g in [GridSpec::new(1, 512, 16).unwrap(), GridSpec::new(2, 64, 8).unwrap()] {
            let f = random_band(g, 5, g.nyquist() - 2.0).to_physical();
            let (lo, hi) = g.scale_range();
            for j in lo..=hi {
                let r = reconstruct(&w, &f, j).unwrap();
                assert!(r.rel_l2_distance(&f).unwrap() < 1e-11, "j={j}");
            }
        }
    }

    #[test]
    fn almost_orthogonal() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(1, 512, 16).unwrap();
        let f = random_band(g, 8, 12.0);
        let (lo, hi) = g.scale_range();
        for j in lo..=hi {
            assert!(almost_orthogonality_check(&w, &f, j).unwrap() <= 1e-12 * f.l2_norm());
        }
    }

    #[test]
    fn out_of_range_scale_errors() {
        let w = WindowFamily::smooth();
        let g = GridSpec::new(1, 128, 8).unwrap();
        let f = Field::zeros(g, Domain::Physical);
        assert!(matches!(
            box_op(&w, &f, &DecompIndex::new(5, vec![0])),
            Err(Error::ScaleOutOfRange { .. })
        ));
    }
}
