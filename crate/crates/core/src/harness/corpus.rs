//! Seeded test-function corpus.
//!
//! Entry `i` draws from its own ChaCha stream, so a corpus of size `n` is a
//! prefix of every larger corpus with the same seed. Every spectrum lives in
//! the cube `|ξ|_∞ ≤ Ξ/2 − 2`, which keeps products of two entries away from
//! the Nyquist band.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::profiles::{spectral_bump, truncate, Gaussian};

pub const TAGS: [&str; 6] = [
    "gaussian",
    "modulated_gaussian",
    "pure_mode",
    "bump_train",
    "random_bandlimited",
    "supercritical_truncated",
];

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub tag: String,
    /// Generation parameters, `key=value` separated by `;`.
    pub params: String,
    /// Spectral, unit `L²` norm.
    pub field: Field,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub seed: u64,
    pub grid: GridSpec,
    pub entries: Vec<CorpusEntry>,
}

/// Serializable summary of a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub seed: u64,
    pub grid: String,
    pub band: f64,
    pub entries: Vec<(String, String)>,
}

/// Half-width of the cube holding every corpus spectrum.
pub fn band_limit(grid: &GridSpec) -> f64 {
    grid.nyquist() / 2.0 - 2.0
}

impl Corpus {
    pub fn generate(grid: GridSpec, seed: u64, size: usize) -> Result<Self> {
        let band = band_limit(&grid);
        if band < 2.0 {
            return Err(Error::InvalidGrid(format!(
                "{grid}: corpus band {band} leaves no room inside the Nyquist margin"
            )));
        }
        let entries = (0..size).map(|i| entry(&grid, seed, i, band)).collect::<Result<_>>()?;
        Ok(Corpus { seed, grid, entries })
    }

    pub fn empty(grid: GridSpec, seed: u64) -> Self {
        Corpus {
            seed,
            grid,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The first `n` entries.
    pub fn prefix(&self, n: usize) -> Corpus {
        Corpus {
            seed: self.seed,
            grid: self.grid,
            entries: self.entries[..n.min(self.len())].to_vec(),
        }
    }

    /// `(tag, field)` pairs, the form taken by the propagator checks.
    pub fn tagged(&self) -> Vec<(String, Field)> {
        self.entries.iter().map(|e| (e.tag.clone(), e.field.clone())).collect()
    }

    pub fn summary(&self) -> CorpusSummary {
        CorpusSummary {
            seed: self.seed,
            grid: self.grid.to_string(),
            band: band_limit(&self.grid),
            entries: self.entries.iter().map(|e| (e.tag.clone(), e.params.clone())).collect(),
        }
    }
}

fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Zeroes everything outside `|ξ|_∞ ≤ band`.
fn clip(f: Field, band: f64) -> Field {
    f.spectral_multiplier(move |xi| {
        if xi.iter().all(|x| x.abs() <= band) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn normalize(f: Field) -> Result<Field> {
    let n = f.l2_norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Precondition("corpus entry has no energy".into()));
    }
    Ok(f.scale(Complex64::new(1.0 / n, 0.0)))
}

fn random_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

fn entry(grid: &GridSpec, seed: u64, i: usize, band: f64) -> Result<CorpusEntry> {
    let mut rng = rng_for(seed, i);
    let d = grid.dim();
    let p = grid.period() as f64;
    let tag = TAGS[i % TAGS.len()];
    let (field, params) = match tag {
        "gaussian" => {
            // the first entries sit at the ends of the width range
            let width = match i / TAGS.len() {
                0 => 1.5,
                1 => 16.0,
                _ => log_uniform(&mut rng, 1.5, 16.0),
            };
            (Gaussian::new(1.0, width, 0.0).field(grid), format!("width={width:.6}"))
        }
        "modulated_gaussian" => {
            let width = log_uniform(&mut rng, 2.0, 12.0);
            let reach = band - 6.0 / width;
            let xi0 = (rng.gen_range(-reach..reach) * p).round() / p;
            (
                Gaussian::new(1.0, width, xi0).field(grid),
                format!("width={width:.6};xi0={xi0}"),
            )
        }
        "pure_mode" => {
            let lim = (band * p).floor() as i64;
            let modes: Vec<i64> = (0..d)
                .map(|a| {
                    if i < TAGS.len() && a == 0 {
                        0
                    } else {
                        rng.gen_range(-lim..=lim)
                    }
                })
                .collect();
            let slots: Vec<usize> = modes.iter().map(|&m| grid.slot(m).expect("inside band")).collect();
            let mut v = vec![Complex64::new(0.0, 0.0); grid.size()];
            v[grid.flatten(&slots)] = random_phase(&mut rng);
            let label = modes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(":");
            (
                Field::new(*grid, v, crate::grid::Domain::Spectral)?,
                format!("mode={label}"),
            )
        }
        "bump_train" => {
            let radius = rng.gen_range(0.5..2.0);
            let center: Vec<f64> = (0..d)
                .map(|_| (rng.gen_range(-(band - radius)..(band - radius)) * p).round() / p)
                .collect();
            let count = rng.gen_range(1..=4usize);
            let span = grid.length() / 4.0;
            let shifts: Vec<(Vec<f64>, Complex64)> = (0..count)
                .map(|_| {
                    let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-span..span)).collect();
                    (c, random_phase(&mut rng))
                })
                .collect();
            let bump = spectral_bump(grid, &center, radius, Complex64::new(1.0, 0.0));
            let train = bump.spectral_multiplier(move |xi| {
                shifts
                    .iter()
                    .map(|(c, a)| {
                        let ph: f64 = c.iter().zip(xi).map(|(c, x)| c * x).sum();
                        a * Complex64::from_polar(1.0, -ph)
                    })
                    .sum()
            });
            (train, format!("radius={radius:.6};count={count}"))
        }
        "random_bandlimited" => {
            let b = rng.gen_range(1.0..band);
            let mut v = vec![Complex64::new(0.0, 0.0); grid.size()];
            let mut idx = vec![0usize; d];
            for (flat, z) in v.iter_mut().enumerate() {
                grid.unflatten(flat, &mut idx);
                let inside = idx.iter().all(|&s| grid.xi(grid.mode(s)).abs() < b);
                // draw for every slot so the stream position does not depend on `b`
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                if inside {
                    let taper: f64 = idx
                        .iter()
                        .map(|&s| {
                            let t = grid.xi(grid.mode(s)) / b;
                            (1.0 - t * t).max(0.0)
                        })
                        .product();
                    *z = Complex64::new(re, im) * taper;
                }
            }
            (
                Field::new(*grid, v, crate::grid::Domain::Spectral)?,
                format!("band={b:.6}"),
            )
        }
        _ => {
            // lacunary bumps at ξ_l = band·2^{−l}
            let levels = (0..8)
                .take_while(|&l| band * (-(l as f64)).exp2() * 0.25 >= 4.0 / p)
                .count()
                .max(1);
            let mut acc = Field::zeros(*grid, crate::grid::Domain::Spectral);
            for l in 0..levels {
                let c0 = band * (-(l as f64)).exp2() * 0.75;
                let radius = c0 / 3.0;
                let coeff = 1.0 / ((l + 1) as f64 * ((l + 2) as f64).ln().powi(2));
                let mut center = vec![0.0; d];
                center[0] = (c0 * p).round() / p;
                let piece = spectral_bump(grid, &center, radius, random_phase(&mut rng) * coeff);
                acc = acc.add(&piece)?;
            }
            (acc, format!("levels={levels}"))
        }
    };
    let field = normalize(truncate(clip(field.to_spectral(), band)))?;
    Ok(CorpusEntry {
        tag: tag.to_string(),
        params,
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_consistent_and_band_limited() {
        let g = GridSpec::new(1, 1024, 32).unwrap();
        let a = Corpus::generate(g, 7, 12).unwrap();
        let b = Corpus::generate(g, 7, 6).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.field.values(), y.field.values());
            assert_eq!(x.params, y.params);
        }
        let band = band_limit(&g);
        for e in &a.entries {
            assert!((e.field.l2_norm() - 1.0).abs() < 1e-12);
            for i in e.field.nonzero_indices() {
                assert!(g.xi(g.mode(i)).abs() <= band, "{} leaks", e.tag);
            }
        }
        let tags: Vec<&str> = a.entries.iter().map(|e| e.tag.as_str()).collect();
        assert_eq!(&tags[..6], &TAGS);
    }

    #[test]
    fn seeds_differ() {
        let g = GridSpec::new(1, 1024, 32).unwrap();
        let a = Corpus::generate(g, 1, 6).unwrap();
        let b = Corpus::generate(g, 2, 6).unwrap();
        assert_ne!(a.entries[4].field.values(), b.entries[4].field.values());
    }

    #[test]
    fn two_dimensional() {
        let g = GridSpec::new(2, 128, 4).unwrap();
        let c = Corpus::generate(g, 3, 6).unwrap();
        assert_eq!(c.len(), 6);
        for e in &c.entries {
            assert!(e.field.l2_norm() > 0.99);
        }
    }
}
