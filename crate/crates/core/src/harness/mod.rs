//! Corpus-driven verification of the inequalities of the theory.

pub mod checks;
pub mod corpus;
pub mod report;

use rayon::prelude::*;

use crate::error::Result;
use crate::exponent::{r, Exponent};
use crate::grid::GridSpec;
use crate::norms::{Family, NormSpec};
use crate::windows::WindowFamily;

pub use corpus::Corpus;
pub use report::{RatioEntry, RatioReport, ReportBuilder};

#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub window: WindowFamily,
    /// Scales swept by the per-scale checks.
    pub j_list: Vec<i32>,
    /// Dyadic dilation exponents `λ = 2^m`.
    pub m_list: Vec<i32>,
    pub spread_threshold: f64,
}

impl HarnessConfig {
    /// `j ∈ {0, −1, …, J_lo + 1}` and `m ∈ {0, 1, 2, 3}`, clipped to what the grid resolves.
    pub fn defaults(grid: &GridSpec) -> Self {
        let (lo, hi) = grid.scale_range();
        let j_list = (lo + 1..=0.min(hi)).rev().collect();
        let m_list = (0..=3)
            .filter(|&m| grid.dilated(m).is_ok_and(|g| g.check_scale(0).is_ok()))
            .collect();
        HarnessConfig {
            window: WindowFamily::smooth(),
            j_list,
            m_list,
            spread_threshold: 4.0,
        }
    }
}

type Job = fn(&Corpus, &HarnessConfig) -> Result<Vec<RatioReport>>;

fn e(n: i64) -> Exponent {
    Exponent::integer(n)
}

fn four_thirds() -> Exponent {
    Exponent::from_reciprocal(r(3, 4)).expect("valid")
}

const REGISTRY: [(&str, Job); 11] = [
    ("algebra", |c, g| {
        let (a, b) = checks::check_algebra(c, g, e(2), r(1, 4), e(1))?;
        Ok(vec![a, b])
    }),
    ("bernstein_multiplier", |c, g| {
        let order = c.grid.dim() / 2 + 1;
        Ok(vec![checks::check_bernstein_multiplier(c, g, e(1), order)?])
    }),
    ("bernstein_pq", |c, g| {
        Ok(vec![checks::check_bernstein_pq(
            c,
            g,
            e(2),
            Exponent::Infinity,
            &[1.0, 2.0, 4.0],
            &[0.0, 2.5],
        )?])
    }),
    ("dilation_bounds", |c, g| {
        let (a, b) = checks::check_dilation_bounds(c, g, e(4), four_thirds())?;
        Ok(vec![a, b])
    }),
    ("duality_pairing", |c, g| {
        Ok(vec![checks::check_duality_pairing(
            c,
            g,
            four_thirds(),
            four_thirds(),
            r(1, 4),
            e(2),
        )?])
    }),
    ("embedding", |c, g| {
        Ok(vec![checks::check_embedding(c, g, e(2), e(1), e(4))?])
    }),
    ("lowfreq_lower_bound", |c, g| {
        Ok(vec![checks::check_lowfreq_lower_bound(c, g, e(2), e(1))?])
    }),
    ("scale_comparison", |c, g| {
        Ok(vec![checks::check_scale_comparison(c, g, e(2), e(1))?])
    }),
    ("scaling_limit", |c, g| {
        let spec = NormSpec::new(Family::FrakNeg, e(4), four_thirds(), Exponent::Infinity, r(3, 10));
        Ok(vec![checks::check_scaling_limit(c, g, "scaling_limit", &spec)?])
    }),
    ("scaling_limit_dot", |c, g| {
        let spec = NormSpec::new(Family::FrakDot, e(4), e(4), Exponent::Infinity, r(-1, 4));
        Ok(vec![checks::check_scaling_limit(c, g, "scaling_limit_dot", &spec)?])
    }),
    ("schwartz_lower_bound", |c, g| {
        Ok(vec![checks::check_schwartz_lower_bound(c, g, e(1), e(1))?])
    }),
];

/// Names of the registered checks, in report order.
pub fn registry() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

/// Runs every registered check; reports come back ordered by check id.
pub fn run_all(corpus: &Corpus, config: &HarnessConfig) -> Result<Vec<RatioReport>> {
    if corpus.is_empty() {
        return Ok(Vec::new());
    }
    let mut out: Vec<RatioReport> = REGISTRY
        .par_iter()
        .map(|(_, job)| job(corpus, config))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.sort_by(|a, b| a.check.cmp(&b.check));
    Ok(out)
}

/// All reports as one CSV table.
pub fn reports_csv(reports: &[RatioReport]) -> String {
    let mut s = String::from(RatioReport::csv_header());
    for r in reports {
        s.push_str(&r.to_csv_rows());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_gives_no_reports() {
        let g = GridSpec::new(1, 1024, 32).unwrap();
        let c = Corpus::empty(g, 1);
        assert!(run_all(&c, &HarnessConfig::defaults(&g)).unwrap().is_empty());
        assert!(registry().len() >= 10);
    }

    #[test]
    fn default_sweeps() {
        let g = GridSpec::new(1, 4096, 128).unwrap();
        let c = HarnessConfig::defaults(&g);
        assert_eq!(c.j_list, vec![0, -1, -2, -3]);
        assert_eq!(c.m_list, vec![0, 1, 2, 3]);
    }
}
