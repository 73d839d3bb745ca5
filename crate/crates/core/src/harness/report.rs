use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One measured ratio `LHS / bound` in a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    /// Position of the datum in its corpus; drives the growth statistic.
    pub entry: usize,
    pub tag: String,
    pub params: String,
    /// Swept-parameter value this ratio belongs to for the spread statistic.
    pub group: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub check: String,
    pub params: BTreeMap<String, String>,
    pub entries: Vec<RatioEntry>,
    /// Empirical constant: the largest ratio.
    pub max_ratio: f64,
    /// Largest ratio over the whole corpus divided by the largest over its first half.
    pub growth: f64,
    /// Largest over smallest per-group maximum.
    pub spread: f64,
    pub spread_threshold: f64,
    pub finite: bool,
    pub stable: bool,
    pub uniform: bool,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl RatioReport {
    pub fn to_csv_rows(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.check,
                quote(&format!("{params};{}", e.params)),
                e.tag,
                quote(&e.group),
                e.ratio
            ));
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "check,params,entry_tag,group,ratio\n"
    }
}

fn quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct ReportBuilder {
    check: String,
    params: BTreeMap<String, String>,
    entries: Vec<RatioEntry>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(check: &str) -> Self {
        ReportBuilder {
            check: check.to_string(),
            params: BTreeMap::new(),
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, k: &str, v: impl ToString) -> Self {
        self.params.insert(k.to_string(), v.to_string());
        self
    }

    pub fn set_param(&mut self, k: &str, v: impl ToString) {
        self.params.insert(k.to_string(), v.to_string());
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn push(&mut self, entry: usize, tag: &str, params: String, group: impl ToString, ratio: f64) {
        self.entries.push(RatioEntry {
            entry,
            tag: tag.to_string(),
            params,
            group: group.to_string(),
            ratio,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Closes the report. `half` is the corpus prefix length used for the
    /// growth statistic (entries with `entry < half`).
    pub fn finish(self, half: usize, spread_threshold: f64) -> RatioReport {
        let finite = self.entries.iter().all(|e| e.ratio.is_finite() && e.ratio >= 0.0);
        let max_ratio = self.entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
        let half_max = self
            .entries
            .iter()
            .filter(|e| e.entry < half)
            .map(|e| e.ratio)
            .fold(0.0, f64::max);
        let growth = if max_ratio == 0.0 {
            1.0
        } else if half_max == 0.0 {
            f64::INFINITY
        } else {
            max_ratio / half_max
        };
        let mut groups: BTreeMap<&str, f64> = BTreeMap::new();
        for e in &self.entries {
            let g = groups.entry(e.group.as_str()).or_insert(0.0);
            *g = g.max(e.ratio);
        }
        let positive: Vec<f64> = groups.values().copied().filter(|v| *v > 0.0).collect();
        let spread = if positive.is_empty() {
            1.0
        } else {
            let hi = positive.iter().copied().fold(0.0, f64::max);
            let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
            hi / lo
        };
        let stable = growth < 2.0;
        let uniform = spread < spread_threshold;
        RatioReport {
            check: self.check,
            params: self.params,
            entries: self.entries,
            max_ratio,
            growth,
            spread,
            spread_threshold,
            finite,
            stable,
            uniform,
            pass: finite && stable && uniform,
            notes: self.notes,
        }
    }
}
