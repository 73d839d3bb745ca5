//! `key=value` run files for `nls-run`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use uniscale::nls::{ExponentMode, Nonlinearity};
use uniscale::norms::NormSpec;
use uniscale::{Error, Result};

/// Initial data source.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    File(PathBuf),
    Gaussian { amp: f64, width: f64 },
    Supercritical { big_j: u32, mode: ExponentMode },
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::File(p) => write!(f, "{}", p.display()),
            InitialData::Gaussian { amp, width } => write!(f, "gaussian:{amp},{width}"),
            InitialData::Supercritical { big_j, mode } => match mode {
                ExponentMode::Plain => write!(f, "supercritical:{big_j},plain"),
                ExponentMode::Kappa(k) => write!(f, "supercritical:{big_j},kappa({k})"),
            },
        }
    }
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("gaussian:") {
            let (a, w) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("gaussian data needs amp,width: {s:?}")))?;
            return Ok(InitialData::Gaussian {
                amp: num(a)?,
                width: num(w)?,
            });
        }
        if let Some(rest) = s.strip_prefix("supercritical:") {
            let (j, m) = rest.split_once(',').unwrap_or((rest, "plain"));
            let big_j = j
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("supercritical J {j:?}: {e}")))?;
            return Ok(InitialData::Supercritical {
                big_j,
                mode: ExponentMode::parse(m)?,
            });
        }
        if s.is_empty() {
            return Err(Error::Parse("empty u0".into()));
        }
        Ok(InitialData::File(PathBuf::from(s)))
    }
}

fn num(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("{s:?} is not finite")));
    }
    Ok(v)
}

fn int<T: FromStr>(key: &str, s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim().parse().map_err(|e| Error::Parse(format!("{key}={s:?}: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub n: usize,
    pub p: u64,
    pub nonlinearity: Nonlinearity,
    pub u0: InitialData,
    pub horizon: f64,
    pub windows: usize,
    pub steps: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub track: Vec<NormSpec>,
    /// Write a snapshot every this many nodes (the final node is always written).
    pub snapshot_stride: usize,
    /// Blowup flag level, as a multiple of the initial tracked norm.
    pub threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 1,
            n: 256,
            p: 8,
            nonlinearity: Nonlinearity::Power { kappa: 1, lambda: -1.0 },
            u0: InitialData::Gaussian { amp: 0.1, width: 2.0 },
            horizon: 0.5,
            windows: 4,
            steps: 32,
            tolerance: 1e-10,
            max_iterations: 50,
            track: Vec::new(),
            snapshot_stride: 32,
            threshold: 1e3,
        }
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let mut kind = "power".to_string();
        let mut kappa = 1u32;
        let mut lambda = -1.0;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", no + 1)))?;
            let v = v.trim();
            match k.trim() {
                "d" => c.d = int("d", v)?,
                "N" => c.n = int("N", v)?,
                "P" => c.p = int("P", v)?,
                "nonlinearity" => kind = v.to_string(),
                "kappa" => kappa = int("kappa", v)?,
                "lambda" => lambda = num(v)?,
                "u0" => c.u0 = v.parse()?,
                "T" => c.horizon = num(v)?,
                "windows" => c.windows = int("windows", v)?,
                "steps" => c.steps = int("steps", v)?,
                "tolerance" => c.tolerance = num(v)?,
                "max_iterations" => c.max_iterations = int("max_iterations", v)?,
                "snapshot_stride" => c.snapshot_stride = int("snapshot_stride", v)?,
                "threshold" => c.threshold = v.parse().map_err(|e| Error::Parse(format!("threshold: {e}")))?,
                "track" => {
                    c.track = v
                        .split(';')
                        .filter(|t| !t.trim().is_empty())
                        .map(|t| t.trim().parse())
                        .collect::<Result<_>>()?
                }
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", no + 1))),
            }
        }
        c.nonlinearity = match kind.as_str() {
            "power" => Nonlinearity::Power { kappa, lambda },
            "exp" => Nonlinearity::Exponential { lambda },
            other => return Err(Error::Parse(format!("nonlinearity {other:?}: expected power or exp"))),
        };
        c.nonlinearity.validate()?;
        if c.snapshot_stride == 0 {
            return Err(Error::Parse("snapshot_stride must be positive".into()));
        }
        Ok(c)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d={}", self.d)?;
        writeln!(f, "N={}", self.n)?;
        writeln!(f, "P={}", self.p)?;
        match self.nonlinearity {
            Nonlinearity::Power { kappa, lambda } => {
                writeln!(f, "nonlinearity=power")?;
                writeln!(f, "kappa={kappa}")?;
                writeln!(f, "lambda={lambda}")?;
            }
            Nonlinearity::Exponential { lambda } => {
                writeln!(f, "nonlinearity=exp")?;
                writeln!(f, "lambda={lambda}")?;
            }
        }
        writeln!(f, "u0={}", self.u0)?;
        writeln!(f, "T={}", self.horizon)?;
        writeln!(f, "windows={}", self.windows)?;
        writeln!(f, "steps={}", self.steps)?;
        writeln!(f, "tolerance={}", self.tolerance)?;
        writeln!(f, "max_iterations={}", self.max_iterations)?;
        writeln!(f, "snapshot_stride={}", self.snapshot_stride)?;
        writeln!(f, "threshold={}", self.threshold)?;
        let track: Vec<String> = self.track.iter().map(|s| s.to_string()).collect();
        writeln!(f, "track={}", track.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "d=1\nN=512\nP=16\nnonlinearity=exp\nlambda=0.3\nu0=supercritical:12,kappa(2)\nT=0.25\n\
                    track=frak_neg:p=2,q=1,r=1,w=1/2;script_neg:p=2,q=1,r=1,w=1/4\n";
        let c: RunConfig = text.parse().unwrap();
        assert_eq!(c.nonlinearity, Nonlinearity::Exponential { lambda: 0.3 });
        assert_eq!(c.track.len(), 2);
        let again: RunConfig = c.to_string().parse().unwrap();
        assert_eq!(again, c);
        assert_eq!(
            RunConfig::default().to_string().parse::<RunConfig>().unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn rejects_bad_lines() {
        assert!("colour=blue".parse::<RunConfig>().is_err());
        assert!("N".parse::<RunConfig>().is_err());
        assert!("nonlinearity=cubic".parse::<RunConfig>().is_err());
        assert!("kappa=0".parse::<RunConfig>().is_err());
        assert!("u0=gaussian:1".parse::<RunConfig>().is_err());
    }
}
