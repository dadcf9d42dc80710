//! Command-line driver.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{gaussian_signal, weight_field, write_signal, GaussianSpec, WeightKind};
use crate::report::{emit_report, file_stem};
use crate::system::{build_system, normalize_system, ChannelSpec, ShearletSystem, SignMode};
use crate::transform::{forward, weighted_spectral_identity, write_coefficients};
use crate::verify::{analyze, energy_report, run_verifiers, IdentityReport, Report, VerifierSpec};

#[derive(Debug, Parser)]
#[command(name = "shearlet", version, about = "Continuous shearlet transform and uncertainty-inequality checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the admissibility probes (overrides `seed` in the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the system and check admissibility.
    Admissibility(Common),
    /// Compute coefficients; write signal and coefficient dumps when enabled.
    Transform(Common),
    /// Energy identity per signal.
    Energy(Common),
    /// Run one verifier by name, or `all`.
    Verify {
        which: String,
        #[command(flatten)]
        common: Common,
    },
    /// Refinement ladder over (N, J, K).
    Convergence(Common),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Admissibility(c) | Command::Transform(c) | Command::Energy(c) | Command::Convergence(c) => c,
        Command::Verify { common, .. } => common,
    }
}

/// Runs a subcommand; `Ok(false)` means some check failed.
pub fn run(cmd: &Command) -> Result<bool> {
    let c = common(cmd);
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output));
    let job = || -> Result<bool> {
        match cmd {
            Command::Admissibility(_) => admissibility(&cfg, &out),
            Command::Transform(_) => transform(&cfg, &out),
            Command::Energy(_) => energy(&cfg, &out),
            Command::Verify { which, .. } => verify(&cfg, which, &out),
            Command::Convergence(_) => convergence(&cfg, &out),
        }
    };
    match c.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(job)
        }
        None => job(),
    }
}

/// The configured system, normalized when requested.
pub fn system_for(cfg: &RunConfig, channels: &ChannelSpec, samples: usize) -> Result<ShearletSystem> {
    let grid = crate::grid::SpatialGrid::new(cfg.dimension, cfg.grid.half_extent, samples)?;
    let sys = build_system(&cfg.generator, &grid, channels, &cfg.build_options())?;
    if cfg.system.normalize {
        normalize_system(&sys)
    } else {
        Ok(sys)
    }
}

fn configured_system(cfg: &RunConfig) -> Result<ShearletSystem> {
    system_for(cfg, &cfg.channels, cfg.grid.samples)
}

fn stamp_all(cfg: &RunConfig, reports: &mut [Report]) {
    let (hash, echo) = (cfg.hash(), cfg.echo());
    reports.iter_mut().for_each(|r| r.stamp(&hash, &echo));
}

fn finish(cfg: &RunConfig, out: &Path, stem: &str, mut reports: Vec<Report>) -> Result<bool> {
    stamp_all(cfg, &mut reports);
    emit_report(out, stem, &reports)?;
    let failures = reports.iter().filter(|r| r.is_failure()).count();
    for r in &reports {
        let (lhs, rhs, slack) = r.row();
        let mark = if r.pass() { "pass" } else if r.coverage_degraded() { "flag" } else { "FAIL" };
        println!("{mark}  {:<48} {:<16} lhs={lhs:.6e} rhs={rhs:.6e} slack={slack:.3e}", r.name(), r.signal());
    }
    println!("{} record(s), {failures} failure(s) -> {}", reports.len(), out.display());
    Ok(failures == 0)
}

fn admissibility(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let grid = cfg.grid()?;
    let raw = build_system(&cfg.generator, &grid, &cfg.channels, &cfg.build_options())?;
    let n = cfg.dimension;
    let mirror = if cfg.channels.sign == SignMode::Mirrored { 2.0 } else { 1.0 };
    let reduction = mirror * cfg.generator.admissibility_reduction(n);
    let rel = (raw.c_psi() - reduction).abs() / reduction.max(f64::MIN_POSITIVE);
    let cv = raw.admissibility.coefficient_of_variation;
    let probes_ok = raw.admissibility.probes.len() >= 32;
    let pass = cv <= 0.02 && rel <= 0.02 && probes_ok;
    let normalized = normalize_system(&raw)?;
    let body = json!({
        "config_hash": cfg.hash(),
        "config": cfg.echo(),
        "system": crate::system::manifest(&raw),
        "c_psi": raw.c_psi(),
        "coefficient_of_variation": cv,
        "in_cone_probes": raw.admissibility.probes.len(),
        "reduction_oracle": reduction,
        "reduction_relative_error": rel,
        "normalized_amplitude": normalized.generator.amplitude,
        "normalized_c_psi": normalized.c_psi(),
        "pass": pass,
    });
    std::fs::create_dir_all(out)?;
    write_json(&out.join("admissibility.json"), &body)?;
    println!(
        "c_psi={:.6e} cv={:.3e} probes={} reduction={:.6e} rel={:.3e} {}",
        raw.c_psi(),
        cv,
        raw.admissibility.probes.len(),
        reduction,
        rel,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(pass)
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn signals(cfg: &RunConfig, sys: &ShearletSystem) -> Result<Vec<(GaussianSpec, crate::grid::SampledSignal)>> {
    cfg.expanded_signals()
        .into_iter()
        .map(|s| gaussian_signal(&sys.grid, &s, true).map(|f| (s, f)))
        .collect()
}

fn energy(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let sys = configured_system(cfg)?;
    let mut reports = Vec::new();
    for (spec, f) in signals(cfg, &sys)? {
        let a = analyze(&f, &spec.label, &sys, &[])?;
        reports.push(Report::Identity(energy_report(&a, cfg.tolerances.equality_tolerance)));
    }
    finish(cfg, out, "energy", reports)
}

fn transform(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let sys = configured_system(cfg)?;
    std::fs::create_dir_all(out)?;
    let mut reports = Vec::new();
    for (spec, f) in signals(cfg, &sys)? {
        let stem = file_stem(&spec.label);
        if cfg.transform.dump_signals {
            let mut w = BufWriter::new(File::create(out.join(format!("{stem}.shsg")))?);
            write_signal(&mut w, &f)?;
        }
        if cfg.transform.dump_coefficients {
            let coeffs = forward(&f, &sys)?;
            let mut w = BufWriter::new(File::create(out.join(format!("{stem}.shlc")))?);
            write_coefficients(&mut w, &coeffs)?;
        }
        let a = analyze(&f, &spec.label, &sys, &[])?;
        reports.push(Report::Identity(energy_report(&a, cfg.tolerances.equality_tolerance)));
    }
    finish(cfg, out, "transform", reports)
}

fn verify(cfg: &RunConfig, which: &str, out: &Path) -> Result<bool> {
    let sys = configured_system(cfg)?;
    let mut reports = Vec::new();
    let mut matched = false;
    for (spec, f) in signals(cfg, &sys)? {
        let list: Vec<VerifierSpec> =
            cfg.verifiers_for(&spec).into_iter().filter(|v| which == "all" || v.name() == which).collect();
        if list.is_empty() {
            continue;
        }
        matched = true;
        reports.extend(run_verifiers(&f, &spec.label, &sys, &list, &cfg.tolerances)?);
    }
    if !matched {
        return Err(Error::Config(format!("no configured verifier named `{which}`")));
    }
    let stem = if which == "all" { "reports".to_string() } else { format!("reports-{which}") };
    finish(cfg, out, &stem, reports)
}

/// One rung of the ladder for one signal.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LadderPoint {
    pub samples: usize,
    pub scales: usize,
    pub shears: usize,
    pub channels: usize,
    pub c_psi: f64,
    pub coefficient_of_variation: f64,
    pub energy_ratio: f64,
    pub energy_deviation: f64,
    pub log_identity_error: f64,
}

pub fn ladder(cfg: &RunConfig, spec: &GaussianSpec) -> Result<Vec<LadderPoint>> {
    let mut points = Vec::new();
    for level in &cfg.convergence.levels {
        let mut ch = cfg.channels.clone();
        ch.scales = level.scales;
        ch.shears = level.shears;
        let sys = system_for(cfg, &ch, level.samples)?;
        let f = gaussian_signal(&sys.grid, spec, true)?;
        let a = analyze(&f, &spec.label, &sys, &[])?;
        let ratio = a.coefficient_energy() / (a.c_psi * a.norm_sq);
        let w = weight_field(&sys.grid, WeightKind::FrequencyLog)?;
        let ident = weighted_spectral_identity(&f, &sys, &w)?;
        points.push(LadderPoint {
            samples: level.samples,
            scales: level.scales,
            shears: level.shears,
            channels: sys.channel_count(),
            c_psi: sys.c_psi(),
            coefficient_of_variation: sys.admissibility.coefficient_of_variation,
            energy_ratio: ratio,
            energy_deviation: (ratio - 1.0).abs(),
            log_identity_error: ident.relative_error,
        });
    }
    Ok(points)
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn convergence(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let spec = cfg.expanded_signals().into_iter().next().expect("validated config has a signal");
    let points = ladder(cfg, &spec)?;
    let devs: Vec<f64> = points.iter().map(|p| p.energy_deviation).collect();
    let monotone = strictly_decreasing(&devs);
    let echo = cfg.echo();
    let hash = cfg.hash();
    let mut reports = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let tol = if i == 0 { cfg.tolerances.equality_tolerance } else { 0.02 };
        let mut r = IdentityReport {
            name: format!("energy_identity@N={},J={},K={}", p.samples, p.scales, p.shears),
            signal: spec.label.clone(),
            lhs: p.energy_ratio,
            rhs: 1.0,
            relative_error: p.energy_deviation,
            pass: p.energy_deviation <= tol,
            tolerance: tol,
            c_psi: p.c_psi,
            uncovered_mass: 0.0,
            coverage_degraded: false,
            config_hash: String::new(),
            config: Value::Null,
            notes: Vec::new(),
            metadata: Default::default(),
        };
        r.metadata.insert("ladder".into(), serde_json::to_value(p).map_err(|e| Error::Format(e.to_string()))?);
        reports.push(Report::Identity(r));
    }
    std::fs::create_dir_all(out)?;
    write_json(
        &out.join("convergence-ladder.json"),
        &json!({ "config_hash": hash, "config": echo, "signal": spec.label, "levels": points, "strictly_decreasing": monotone }),
    )?;
    println!("energy deviation strictly decreasing: {monotone}");
    Ok(finish(cfg, out, "convergence", reports)? && monotone)
}
