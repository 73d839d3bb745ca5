use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

/// Time-sampled fields on a shared grid, with an optional norm history.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<Field>,
    pub history: Option<NormHistory>,
}

/// Named per-time norm columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormHistory {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NormHistory {
    pub fn to_csv(&self, times: &[f64]) -> String {
        let mut out = String::from("t");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (t, row) in times.iter().zip(&self.rows) {
            out.push_str(&format!("{t}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(Error::Precondition(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::Precondition("empty trajectory".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("times must increase strictly".into()));
        }
        for f in &fields[1..] {
            f.same_grid(&fields[0])?;
        }
        Ok(Trajectory {
            times,
            fields,
            history: None,
        })
    }

    /// Samples `f(t)` on `t_n = t0 + n·dt`, `n = 0..=steps`.
    pub fn sample<F: Fn(f64) -> Field>(t0: f64, dt: f64, steps: usize, f: F) -> Result<Self> {
        let times: Vec<f64> = (0..=steps).map(|n| t0 + n as f64 * dt).collect();
        let fields = times.iter().map(|&t| f(t)).collect();
        Trajectory::new(times, fields)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn grid(&self) -> &GridSpec {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &Field {
        self.fields.last().expect("nonempty")
    }

    /// Index of the node equal to `t` within a relative tolerance.
    pub fn node_index(&self, t: f64) -> Result<usize> {
        let scale = self.times.last().unwrap().abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * scale)
            .ok_or(Error::TimeOutOfRange { t })
    }

    /// Applies `g` to every field.
    pub fn map<G: Fn(&Field) -> Field>(&self, g: G) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            fields: self.fields.iter().map(g).collect(),
            history: None,
        }
    }

    /// Appends `other`, dropping its first node when it repeats our last time.
    pub fn extend(&mut self, other: Trajectory) -> Result<()> {
        let last = *self.times.last().unwrap();
        let skip = usize::from((other.times[0] - last).abs() <= 1e-12 * last.abs().max(1.0));
        for (t, f) in other.times.into_iter().zip(other.fields).skip(skip) {
            if t <= last {
                return Err(Error::Precondition("appended times overlap".into()));
            }
            f.same_grid(&self.fields[0])?;
            self.times.push(t);
            self.fields.push(f);
        }
        Ok(())
    }
}
