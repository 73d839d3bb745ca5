//! The UFD1 text format for fields.
//!
//! ```text
//! UFD1 d=1 N=8 P=2 domain=physical
//! 1.0000000000000000e0 0.0000000000000000e0
//! ...
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Domain, Field, GridSpec};

pub fn write<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let g = field.grid();
    writeln!(
        w,
        "UFD1 d={} N={} P={} domain={}",
        g.dim(),
        g.n(),
        g.period(),
        field.domain()
    )?;
    for z in field.values() {
        writeln!(w, "{:.16e} {:.16e}", z.re, z.im)?;
    }
    Ok(())
}

pub fn read<R: BufRead>(r: R) -> Result<Field> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty UFD1 input".into()))??;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("UFD1") {
        return Err(Error::Parse("missing UFD1 magic".into()));
    }
    let (mut d, mut n, mut p, mut domain) = (None, None, None, None);
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {kv:?}")))?;
        let num = || {
            v.parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad value for {k}: {v:?}")))
        };
        match k {
            "d" => d = Some(num()? as usize),
            "N" => n = Some(num()? as usize),
            "P" => p = Some(num()?),
            "domain" => {
                domain = Some(match v {
                    "physical" => Domain::Physical,
                    "spectral" => Domain::Spectral,
                    _ => return Err(Error::Parse(format!("unknown domain {v:?}"))),
                })
            }
            _ => return Err(Error::Parse(format!("unknown header key {k:?}"))),
        }
    }
    let missing = |name: &str| Error::Parse(format!("header lacks {name}"));
    let grid = GridSpec::new(
        d.ok_or_else(|| missing("d"))?,
        n.ok_or_else(|| missing("N"))?,
        p.ok_or_else(|| missing("P"))?,
    )?;
    let domain = domain.ok_or_else(|| missing("domain"))?;
    let mut values = Vec::with_capacity(grid.size());
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut it = t.split_whitespace();
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Parse(format!("short line {t:?}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad number in {t:?}")))
        };
        let re = parse(it.next())?;
        let im = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("extra tokens in {t:?}")));
        }
        values.push(Complex64::new(re, im));
    }
    if values.len() != grid.size() {
        return Err(Error::Parse(format!(
            "header promises {} values, found {}",
            grid.size(),
            values.len()
        )));
    }
    Field::new(grid, values, domain)
}

pub fn save(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    let f = std::fs::File::open(path)?;
    read(std::io::BufReader::new(f))
}
