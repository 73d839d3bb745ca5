mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use uniscale::decomp::{active_indices, box_op, DecompIndex};
use uniscale::exponent::parse_rational;
use uniscale::harness::corpus::Corpus;
use uniscale::harness::{reports_csv, run_all, HarnessConfig, RatioReport};
use uniscale::nls::{
    blowup_monitor, contraction_audit, picard_solve, supercritical_family, verify_supercritical_norms, ExponentMode,
    NLSProblem, SolverConfig,
};
use uniscale::norms::regime::{classify_label, emit_region_table};
use uniscale::norms::{evaluate, frak_vanishing_profile, Family, NormSpec};
use uniscale::profiles::Gaussian;
use uniscale::schrodinger::{
    check_dispersive_decay, check_propagator_mj_bound, check_strichartz_homogeneous, check_strichartz_inhomogeneous,
    ExponentPair, ScaledData,
};
use uniscale::windows::window_audit;
use uniscale::{ufd, Error, Exponent, GridSpec, Result, WindowFamily};

use config::{InitialData, RunConfig};

#[derive(Parser)]
#[command(
    name = "uniscale",
    version,
    about = "Frequency-uniform decompositions, scaling-limit norms and NLS runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long = "N", default_value_t = 1024)]
    n: usize,
    #[arg(long = "P", default_value_t = 16)]
    p: u64,
}

impl GridArgs {
    fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.d, self.n, self.p)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Partition-of-unity, support and plateau audit of the windows on every valid scale.
    WindowCheck {
        #[command(flatten)]
        grid: GridArgs,
        /// Finite smoothness order (at least 4); the default window is C^∞.
        #[arg(long)]
        smoothness: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes every nonzero piece at scale j as UFD1 plus a JSON-lines manifest.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        j: i32,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluates a norm of a UFD1 field.
    Norm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value = "2")]
        q: String,
        #[arg(long, default_value = "1")]
        r: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        w: String,
        #[arg(long, allow_hyphen_values = true)]
        jlo: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        jhi: Option<i32>,
        /// CSV destination of the per-scale table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs every registered inequality check on a seeded corpus.
    Harness {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 24)]
        size: usize,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ratio table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Propagator, dispersive and Strichartz ratio checks.
    SchrodingerCheck {
        /// Exponent pair `gamma,p`.
        #[arg(long, default_value = "4,inf")]
        pair: String,
        #[arg(long = "T", default_value = "2")]
        t: f64,
        /// Scale range `lo..hi`.
        #[arg(long, default_value = "-3..0", allow_hyphen_values = true)]
        j: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long = "N", default_value_t = 4096)]
        n: usize,
        #[arg(long = "P", default_value_t = 64)]
        p: u64,
        #[arg(long, default_value_t = 12)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solves NLS by Picard iteration from a `key=value` run file.
    NlsRun {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "nls-out")]
        out_dir: PathBuf,
    },
    /// Divergence table of the lacunary supercritical family.
    Supercritical {
        /// Largest truncation; rows run from 10 up to it in steps of `--step`.
        #[arg(long = "J", default_value_t = 22)]
        big_j: u32,
        #[arg(long, default_value_t = 4)]
        step: u32,
        /// Comma-separated list.
        #[arg(long, default_value = "2")]
        ptilde: String,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value = "plain")]
        mode: String,
        #[arg(long = "N", default_value_t = 2048)]
        n: usize,
        #[arg(long = "P", default_value_t = 256)]
        period: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regime of a norm family, or the region table over (1/p, 1/q).
    Regime {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value = "2")]
        q: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        w: String,
        #[arg(long)]
        family: String,
        /// Emit the region table at this resolution instead of one label.
        #[arg(long)]
        table: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn exponent(s: &str) -> Result<Exponent> {
    s.parse()
}

fn window_check(grid: GridArgs, smoothness: Option<u32>, out: Option<&Path>) -> Result<()> {
    let g = grid.grid()?;
    let w = match smoothness {
        Some(m) => WindowFamily::with_smoothness(m)?,
        None => WindowFamily::smooth(),
    };
    let audit = window_audit(&w, &g);
    let worst = audit.iter().map(|a| a.partition_error).fold(0.0, f64::max);
    let support: usize = audit.iter().map(|a| a.support_violations).sum();
    let plateau: usize = audit.iter().map(|a| a.plateau_violations).sum();
    println!("{g}");
    println!("j,partition_error,support_violations,plateau_violations");
    for a in &audit {
        println!(
            "{},{:e},{},{}",
            a.j, a.partition_error, a.support_violations, a.plateau_violations
        );
    }
    println!("max partition error {worst:e}; support violations {support}; plateau violations {plateau}");
    if let Some(p) = out {
        let doc = json!({
            "grid": g.to_string(),
            "scales": audit,
            "max_partition_error": worst,
            "support_violations": support,
            "plateau_violations": plateau,
        });
        fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(())
}

fn decompose(input: &Path, j: i32, out_dir: &Path) -> Result<()> {
    let f = ufd::load(input)?;
    f.grid().check_scale(j)?;
    let w = WindowFamily::smooth();
    fs::create_dir_all(out_dir)?;
    let spec = f.to_spectral();
    let mut manifest = String::new();
    for k in active_indices(&w, &spec, j)? {
        let piece = box_op(&w, &spec, &DecompIndex::new(j, k.clone()))?;
        let label: Vec<String> = k.iter().map(|v| v.to_string()).collect();
        let name = format!("box_j{j}_k{}.ufd", label.join("_"));
        ufd::save(&piece, out_dir.join(&name))?;
        let line = json!({
            "j": j,
            "k": k,
            "l2": piece.l2_norm(),
            "linf": piece.lp_norm(Exponent::Infinity)?,
            "file": name,
        });
        manifest.push_str(&line.to_string());
        manifest.push('\n');
    }
    fs::write(out_dir.join("manifest.jsonl"), manifest)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn norm(
    input: &Path,
    family: &str,
    p: &str,
    q: &str,
    r: &str,
    w: &str,
    scales: (Option<i32>, Option<i32>),
    out: Option<&Path>,
) -> Result<()> {
    let f = ufd::load(input)?;
    let family: Family = family.parse()?;
    let mut spec = NormSpec::new(family, exponent(p)?, exponent(q)?, exponent(r)?, parse_rational(w)?);
    match scales {
        (Some(lo), Some(hi)) => spec = spec.with_scales(lo, hi),
        (None, None) => {}
        (Some(j), None) | (None, Some(j)) if family == Family::SingleScale => spec = spec.with_scales(j, j),
        _ => return Err(Error::InvalidSpec("--jlo and --jhi go together".into())),
    }
    spec.validate(f.grid().dim())?;
    let win = WindowFamily::smooth();
    let value = evaluate(&win, &f, &spec)?;
    println!("{spec} = {value:e}");
    let mut table = String::from("j,weighted_mj_norm\n");
    if family.is_frak() {
        for (j, v) in frak_vanishing_profile(&win, &f, &spec)? {
            table.push_str(&format!("{j},{v:e}\n"));
        }
    }
    emit(out, &table)
}

fn harness(seed: u64, grid: GridArgs, size: usize, out: Option<&Path>, csv: Option<&Path>) -> Result<()> {
    let g = grid.grid()?;
    let corpus = Corpus::generate(g, seed, size)?;
    let cfg = HarnessConfig::defaults(&g);
    let reports = run_all(&corpus, &cfg)?;
    print_reports(&reports);
    if let Some(p) = out {
        let doc = json!({
            "seed": seed,
            "corpus": corpus.summary(),
            "reports": reports,
        });
        fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    if let Some(p) = csv {
        fs::write(p, reports_csv(&reports))?;
    }
    Ok(())
}

fn print_reports(reports: &[RatioReport]) {
    for r in reports {
        println!(
            "{:<28} {} max={:.4e} growth={:.3} spread={:.3}",
            r.check,
            if r.pass { "PASS" } else { "FAIL" },
            r.max_ratio,
            r.growth,
            r.spread
        );
    }
}

fn scale_range(s: &str) -> Result<Vec<i32>> {
    let bad = || Error::Parse(format!("scale range {s:?}: expected lo..hi"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let lo: i32 = a.trim().parse().map_err(|_| bad())?;
    let hi: i32 = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).rev().collect())
}

#[allow(clippy::too_many_arguments)]
fn schrodinger_check(
    pair: &str,
    t: f64,
    j: &str,
    seed: u64,
    grid: GridArgs,
    size: usize,
    out: Option<&Path>,
) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("T = {t} must be positive")));
    }
    let g = grid.grid()?;
    let pair = ExponentPair::parse(pair)?;
    pair.check(g.dim())?;
    let js = scale_range(j)?;
    for &s in &js {
        g.check_scale(s)?;
    }
    let w = WindowFamily::smooth();
    let corpus = Corpus::generate(g, seed, size)?.tagged();
    let ts: Vec<f64> = (0..5).map(|i| t * (-(4 - i) as f64).exp2()).collect();
    let data = [ScaledData { width: 1.5, xi0: 0.0 }, ScaledData { width: 3.0, xi0: 1.0 }];
    let reports = vec![
        check_propagator_mj_bound(&w, &corpus, &js, pair.p, Exponent::integer(1), &ts)?,
        check_dispersive_decay(&w, &corpus, pair, &js, &ts)?,
        check_strichartz_homogeneous(&w, &g, &data, pair, &js, t, 64)?,
        check_strichartz_inhomogeneous(&w, &g, &data, pair, pair, &js, t, 64)?,
    ];
    print_reports(&reports);
    emit(out, &reports_csv(&reports))
}

fn nls_run(config: &Path, out_dir: &Path) -> Result<()> {
    let text = fs::read_to_string(config)?;
    let cfg: RunConfig = text.parse()?;
    let grid = GridSpec::new(cfg.d, cfg.n, cfg.p)?;
    let u0 = match &cfg.u0 {
        InitialData::File(p) => {
            let rel = if p.is_relative() {
                config.parent().unwrap_or(Path::new(".")).join(p)
            } else {
                p.clone()
            };
            let f = ufd::load(rel)?;
            if *f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            f
        }
        InitialData::Gaussian { amp, width } => Gaussian::new(*amp, *width, 0.0).field(&grid),
        InitialData::Supercritical { big_j, mode } => supercritical_family(*big_j, *mode, &grid)?.0,
    };
    let problem = NLSProblem::new(cfg.nonlinearity, u0, cfg.horizon)?;
    let solver = SolverConfig {
        steps_per_window: cfg.steps,
        windows: cfg.windows,
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        track: cfg.track.clone(),
        ..Default::default()
    };
    solver.validate()?;
    let audit = contraction_audit(&problem, &solver)?;
    let run = picard_solve(&problem, &solver)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("history.csv"), run.history_csv())?;
    let traj = &run.trajectory;
    let last = traj.len() - 1;
    let mut index = String::from("node,t,file\n");
    for (k, (t, f)) in traj.times().iter().zip(traj.fields()).enumerate() {
        if k % cfg.snapshot_stride == 0 || k == last {
            let name = format!("u_{k:05}.ufd");
            ufd::save(f, out_dir.join(&name))?;
            index.push_str(&format!("{k},{t},{name}\n"));
        }
    }
    fs::write(out_dir.join("snapshots.csv"), index)?;
    let watch = cfg.track.first().cloned().unwrap_or_else(|| {
        NormSpec::new(
            Family::FrakNeg,
            Exponent::integer(2),
            Exponent::integer(1),
            Exponent::integer(1),
            uniscale::exponent::r(cfg.d as i64, 2),
        )
    });
    let failure_time = run.failure.as_ref().map(|_| *traj.times().last().expect("nonempty"));
    let blowup = blowup_monitor(traj, &watch, cfg.threshold, failure_time)?;
    let summary = json!({
        "config": cfg.to_string(),
        "final_time": traj.times().last(),
        "nodes": traj.len(),
        "ball_radius": run.ball_radius,
        "max_iterate_norm": run.max_iterate_norm,
        "resident": run.resident(),
        "windows": run.windows,
        "contraction": audit,
        "blowup": {
            "norm": watch.to_string(),
            "flag_time": blowup.flag_time,
            "reason": blowup.reason,
            "existence_lower_bound": blowup.existence_lower_bound,
            "initial": blowup.initial_norm,
            "peak": blowup.peak_norm,
        },
        "failure": run.failure.as_ref().map(|e| e.to_string()),
    });
    fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    println!(
        "t_final={} nodes={} windows={} contraction={:.3e}",
        traj.times().last().expect("nonempty"),
        traj.len(),
        run.windows.len(),
        audit.factor
    );
    if let Some(t) = blowup.flag_time {
        println!("norm flag at t={t} ({})", blowup.reason.as_deref().unwrap_or(""));
    }
    match run.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn supercritical(
    big_j: u32,
    step: u32,
    ptilde: &str,
    p: &str,
    mode: &str,
    n: usize,
    period: u64,
    out: Option<&Path>,
) -> Result<()> {
    if big_j < 10 || step == 0 {
        return Err(Error::Precondition("need J ≥ 10 and a positive step".into()));
    }
    let base = GridSpec::new(1, n, period)?;
    let pts: Vec<Exponent> = ptilde.split(',').map(exponent).collect::<Result<_>>()?;
    let mut js: Vec<u32> = (0..)
        .map(|i| big_j.saturating_sub(i * step))
        .take_while(|&j| j >= 10)
        .collect();
    js.dedup();
    js.reverse();
    let rows = verify_supercritical_norms(
        &WindowFamily::smooth(),
        &js,
        &pts,
        exponent(p)?,
        ExponentMode::parse(mode)?,
        &base,
    )?;
    let mut csv = String::from("J,ptilde,m0,script_upper,coarsest_term,reference_rate,growth,support_residual\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{:e},{:e},{:e},{:e},{},{:e}\n",
            r.big_j,
            r.ptilde,
            r.m0,
            r.script_upper,
            r.coarsest_term,
            r.reference_rate,
            r.growth.map_or(String::new(), |g| format!("{g}")),
            r.support_residual
        ));
    }
    emit(out, &csv)
}

fn regime(d: usize, p: &str, q: &str, w: &str, family: &str, table: Option<u32>, out: Option<&Path>) -> Result<()> {
    let family: Family = family.parse()?;
    let w = parse_rational(w)?;
    match table {
        Some(res) => emit(out, &emit_region_table(d, family, w, res)?),
        None => {
            let label = classify_label(d, exponent(p)?, exponent(q)?, w, family)?;
            emit(out, &format!("{label}\n"))
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::WindowCheck { grid, smoothness, out } => window_check(grid, smoothness, out.as_deref()),
        Command::Decompose { input, j, out_dir } => decompose(&input, j, &out_dir),
        Command::Norm {
            input,
            family,
            p,
            q,
            r,
            w,
            jlo,
            jhi,
            out,
        } => norm(&input, &family, &p, &q, &r, &w, (jlo, jhi), out.as_deref()),
        Command::Harness {
            seed,
            grid,
            size,
            out,
            csv,
        } => harness(seed, grid, size, out.as_deref(), csv.as_deref()),
        Command::SchrodingerCheck {
            pair,
            t,
            j,
            seed,
            d,
            n,
            p,
            size,
            out,
        } => schrodinger_check(&pair, t, &j, seed, GridArgs { d, n, p }, size, out.as_deref()),
        Command::NlsRun { config, out_dir } => nls_run(&config, &out_dir),
        Command::Supercritical {
            big_j,
            step,
            ptilde,
            p,
            mode,
            n,
            period,
            out,
        } => supercritical(big_j, step, &ptilde, &p, &mode, n, period, out.as_deref()),
        Command::Regime {
            d,
            p,
            q,
            w,
            family,
            table,
            out,
        } => regime(d, &p, &q, &w, &family, table, out.as_deref()),
    }
}

fn threads() -> Result<()> {
    let Ok(v) = std::env::var("UNISCALE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse(format!("UNISCALE_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Precondition(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match threads().and_then(|_| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric_failure() { 3 } else { 2 })
        }
    }
}
