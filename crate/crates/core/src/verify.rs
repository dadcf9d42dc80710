//! Both sides of each uncertainty inequality, evaluated on one signal and one
//! discretized system, plus empirical constants where the inequality only
//! asserts existence.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::grid::{
    region_mask, weight_field, weighted_norm_sq, Domain, RegionSpec, SampledSignal, SpatialGrid, WeightKind,
};
use crate::group::abs_det_scaling;
use crate::specfun::{pitt_constant, uncertainty_constants};
use crate::sum::{pairwise, pairwise_map};
use crate::system::ShearletSystem;
use crate::transform::ChannelEngine;

/// Coverage below this fraction flags a report as coverage-degraded.
pub const COVERAGE_THRESHOLD: f64 = 0.999;
/// How far c_psi may sit from 1 for verifiers that need a normalized system.
pub const NORMALIZED_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    /// Relative tolerance for inequalities.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Relative tolerance for the equality cases (Pitt at λ = 0, empty E₁).
    #[serde(default = "default_equality_tolerance")]
    pub equality_tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_equality_tolerance() -> f64 {
    0.05
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerance: default_tolerance(), equality_tolerance: default_equality_tolerance() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub signal: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Oriented so that a nonnegative slack means the inequality holds.
    pub slack: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub c_psi: f64,
    pub uncovered_mass: f64,
    pub coverage_degraded: bool,
    pub config_hash: String,
    pub config: Value,
    pub notes: Vec<String>,
    pub metadata: BTreeMap<String, Value>,
}

pub fn pass_predicate(lhs: f64, rhs: f64, tolerance: f64) -> bool {
    let slack = lhs - rhs;
    slack >= -tolerance * lhs.abs().max(rhs.abs()).max(1.0)
}

impl InequalityReport {
    fn new(name: impl Into<String>, a: &SignalAnalysis, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let mut notes = Vec::new();
        let degraded = a.coverage < COVERAGE_THRESHOLD;
        if degraded {
            notes.push(format!("coverage-degraded: {:.3e} of the spectral mass is outside the covered cone", 1.0 - a.coverage));
        }
        notes.extend(a.notes.iter().cloned());
        Self {
            name: name.into(),
            signal: a.label.clone(),
            lhs,
            rhs,
            slack: lhs - rhs,
            pass: pass_predicate(lhs, rhs, tolerance),
            tolerance,
            c_psi: a.c_psi,
            uncovered_mass: 1.0 - a.coverage,
            coverage_degraded: degraded,
            config_hash: String::new(),
            config: Value::Null,
            notes,
            metadata: BTreeMap::new(),
        }
    }

    fn meta(mut self, key: &str, v: Value) -> Self {
        self.metadata.insert(key.into(), v);
        self
    }

    fn equality(self, tolerance: f64) -> Self {
        let gap = relative_gap(self.lhs, self.rhs);
        self.meta("equality_gap", json!(gap))
            .meta("equality_tolerance", json!(tolerance))
            .meta("equality_pass", json!(gap <= tolerance))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalConstantReport {
    pub name: String,
    pub signal: String,
    /// Smallest constant for which the inequality holds on these inputs.
    pub constant: f64,
    pub c_psi: f64,
    pub uncovered_mass: f64,
    pub coverage_degraded: bool,
    pub config_hash: String,
    pub config: Value,
    pub inputs: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub metadata: BTreeMap<String, Value>,
}

impl EmpiricalConstantReport {
    fn new(name: impl Into<String>, a: &SignalAnalysis, constant: f64) -> Self {
        let mut notes = vec!["minimal for these inputs only; universality is not claimed".to_string()];
        let degraded = a.coverage < COVERAGE_THRESHOLD;
        if degraded {
            notes.push(format!("coverage-degraded: {:.3e} of the spectral mass is outside the covered cone", 1.0 - a.coverage));
        }
        notes.extend(a.notes.iter().cloned());
        Self {
            name: name.into(),
            signal: a.label.clone(),
            constant,
            c_psi: a.c_psi,
            uncovered_mass: 1.0 - a.coverage,
            coverage_degraded: degraded,
            config_hash: String::new(),
            config: Value::Null,
            inputs: BTreeMap::new(),
            notes,
            metadata: BTreeMap::new(),
        }
    }
}

/// An identity checked to a relative tolerance (energy, Moyal, weighted
/// spectral identities).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub signal: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub c_psi: f64,
    pub uncovered_mass: f64,
    pub coverage_degraded: bool,
    pub config_hash: String,
    pub config: Value,
    pub notes: Vec<String>,
    pub metadata: BTreeMap<String, Value>,
}

impl IdentityReport {
    pub fn new(name: impl Into<String>, a: &SignalAnalysis, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let err = relative_gap(lhs, rhs);
        let degraded = a.coverage < COVERAGE_THRESHOLD;
        let mut notes = Vec::new();
        if degraded {
            notes.push(format!("coverage-degraded: {:.3e} of the spectral mass is outside the covered cone", 1.0 - a.coverage));
        }
        notes.extend(a.notes.iter().cloned());
        Self {
            name: name.into(),
            signal: a.label.clone(),
            lhs,
            rhs,
            relative_error: err,
            pass: err <= tolerance,
            tolerance,
            c_psi: a.c_psi,
            uncovered_mass: 1.0 - a.coverage,
            coverage_degraded: degraded,
            config_hash: String::new(),
            config: Value::Null,
            notes,
            metadata: BTreeMap::new(),
        }
    }
}

/// `energy / (c_psi ‖f‖²)` as an identity report.
pub fn energy_report(a: &SignalAnalysis, tolerance: f64) -> IdentityReport {
    let e = a.coefficient_energy();
    let rhs = a.c_psi * a.norm_sq;
    let mut r = IdentityReport::new("energy_identity", a, e, rhs, tolerance);
    r.metadata.insert("ratio".into(), json!(if rhs > 0.0 { e / rhs } else { f64::NAN }));
    r.metadata.insert("norm_sq".into(), json!(a.norm_sq));
    r
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Report {
    Inequality(InequalityReport),
    Constant(EmpiricalConstantReport),
    Identity(IdentityReport),
}

impl Report {
    pub fn name(&self) -> &str {
        match self {
            Report::Inequality(r) => &r.name,
            Report::Constant(r) => &r.name,
            Report::Identity(r) => &r.name,
        }
    }

    pub fn signal(&self) -> &str {
        match self {
            Report::Inequality(r) => &r.signal,
            Report::Constant(r) => &r.signal,
            Report::Identity(r) => &r.signal,
        }
    }

    /// Constants pass when finite and nonnegative.
    pub fn pass(&self) -> bool {
        match self {
            Report::Inequality(r) => r.pass,
            Report::Constant(r) => r.constant.is_finite() && r.constant >= 0.0,
            Report::Identity(r) => r.pass,
        }
    }

    pub fn coverage_degraded(&self) -> bool {
        match self {
            Report::Inequality(r) => r.coverage_degraded,
            Report::Constant(r) => r.coverage_degraded,
            Report::Identity(r) => r.coverage_degraded,
        }
    }

    /// A failed check on a coverage-degraded signal is flagged, not fatal.
    pub fn is_failure(&self) -> bool {
        !self.pass() && !self.coverage_degraded()
    }

    /// (lhs, rhs, slack) for the summary table; a constant is listed as lhs
    /// with rhs 0.
    pub fn row(&self) -> (f64, f64, f64) {
        match self {
            Report::Inequality(r) => (r.lhs, r.rhs, r.slack),
            Report::Constant(r) => (r.constant, 0.0, r.constant),
            Report::Identity(r) => (r.lhs, r.rhs, r.lhs - r.rhs),
        }
    }

    pub fn stamp(&mut self, hash: &str, config: &Value) {
        match self {
            Report::Inequality(r) => {
                r.config_hash = hash.into();
                r.config = config.clone();
            }
            Report::Constant(r) => {
                r.config_hash = hash.into();
                r.config = config.clone();
            }
            Report::Identity(r) => {
                r.config_hash = hash.into();
                r.config = config.clone();
            }
        }
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// A spatial weight applied to coefficient moduli.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightRequest {
    /// `|t|^p`
    Power(f64),
    Log,
    LogSobolev,
    /// Indicator of `ℝⁿ ∖ E`.
    Complement(RegionSpec),
}

impl WeightRequest {
    pub fn key(&self) -> String {
        match self {
            WeightRequest::Power(p) => format!("pow:{p}"),
            WeightRequest::Log => "log".into(),
            WeightRequest::LogSobolev => "log_sobolev".into(),
            WeightRequest::Complement(r) => format!("tail:{}", serde_json::to_string(r).unwrap_or_default()),
        }
    }

    fn build(&self, grid: &SpatialGrid) -> Result<(Vec<f64>, Vec<String>)> {
        Ok(match self {
            WeightRequest::Power(p) => (weight_field(grid, WeightKind::SpatialPower(*p))?.values, Vec::new()),
            WeightRequest::Log => (weight_field(grid, WeightKind::SpatialLog)?.values, Vec::new()),
            WeightRequest::LogSobolev => (weight_field(grid, WeightKind::SpatialLogSobolev)?.values, Vec::new()),
            WeightRequest::Complement(r) => {
                let m = region_mask(grid, r, true, Domain::Spatial)?;
                (m.mask, m.warnings)
            }
        })
    }
}

/// Everything the verifiers need from one forward pass over a signal.
#[derive(Clone, Debug)]
pub struct SignalAnalysis {
    pub label: String,
    pub signal: SampledSignal,
    pub spectrum: SampledSignal,
    pub c_psi: f64,
    pub norm_sq: f64,
    pub coverage: f64,
    pub haar: Vec<f64>,
    pub notes: Vec<String>,
    keys: Vec<String>,
    weights: Vec<Vec<f64>>,
    /// `[weight][channel]`: `hⁿ Σ_t w(t)|SH(ch,t)|²` without the Haar factor.
    per_channel: Vec<Vec<f64>>,
    energy: Vec<f64>,
}

impl SignalAnalysis {
    /// `Σ_ch haar · hⁿ Σ w|SH|²`.
    pub fn moment(&self, w: &WeightRequest) -> Result<f64> {
        let per = self.channel_moments(w)?;
        Ok(pairwise_map(per.len(), &|i| self.haar[i] * per[i]))
    }

    pub fn channel_moments(&self, w: &WeightRequest) -> Result<&[f64]> {
        let key = w.key();
        let i = self
            .keys
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::Precondition(format!("weight {key} was not requested in the analysis pass")))?;
        Ok(&self.per_channel[i])
    }

    pub fn coefficient_energy(&self) -> f64 {
        pairwise_map(self.energy.len(), &|i| self.haar[i] * self.energy[i])
    }

    pub fn channel_energies(&self) -> &[f64] {
        &self.energy
    }

    pub fn spatial_weight(&self, w: &WeightRequest) -> Option<&[f64]> {
        let key = w.key();
        self.keys.iter().position(|k| *k == key).map(|i| self.weights[i].as_slice())
    }

    pub fn spectral_moment(&self, kind: WeightKind) -> Result<f64> {
        let w = weight_field(&self.spectrum.grid, kind)?;
        if w.domain != Domain::Frequency {
            return domain("spectral moment needs a frequency weight");
        }
        weighted_norm_sq(&self.spectrum, &w.values)
    }

    /// `∫_{E or its complement} |f̂|²`.
    pub fn spectral_mass(&self, region: &RegionSpec, complement: bool) -> Result<f64> {
        let m = region_mask(&self.spectrum.grid, region, complement, Domain::Frequency)?;
        weighted_norm_sq(&self.spectrum, &m.mask)
    }

    pub fn spatial_mass(&self, region: &RegionSpec, complement: bool) -> Result<f64> {
        let m = region_mask(&self.signal.grid, region, complement, Domain::Spatial)?;
        weighted_norm_sq(&self.signal, &m.mask)
    }
}

/// One forward pass: for every channel, the plain energy and each requested
/// weighted moment of the coefficients. Channels are streamed.
pub fn analyze(
    f: &SampledSignal,
    label: &str,
    system: &ShearletSystem,
    requests: &[WeightRequest],
) -> Result<SignalAnalysis> {
    let mut keys: Vec<String> = Vec::new();
    let mut weights = Vec::new();
    let mut notes = Vec::new();
    for r in requests {
        let k = r.key();
        if keys.contains(&k) {
            continue;
        }
        let (w, warn) = r.build(&system.grid)?;
        notes.extend(warn);
        keys.push(k);
        weights.push(w);
    }
    let engine = ChannelEngine::new(f, system)?;
    let dv = system.grid.cell_volume();
    let rows: Vec<(f64, Vec<f64>)> = engine.visit(|_, _, c| {
        let e = dv * pairwise_map(c.len(), &|i| c[i].norm_sqr());
        let m = weights.iter().map(|w| dv * pairwise_map(c.len(), &|i| w[i] * c[i].norm_sqr())).collect();
        (e, m)
    });
    let energy: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let per_channel = (0..keys.len()).map(|k| rows.iter().map(|r| r.1[k]).collect()).collect();
    let spectrum = SampledSignal::new(system.grid.clone(), engine.spectrum().to_vec(), Domain::Frequency)?;
    let coverage = system.coverage(&spectrum);
    notes.extend(f.notes.iter().cloned());
    Ok(SignalAnalysis {
        label: label.to_string(),
        signal: f.clone(),
        norm_sq: f.norm_sq(),
        spectrum,
        c_psi: system.c_psi(),
        coverage,
        haar: system.channels.channels.iter().map(|c| c.haar).collect(),
        notes,
        keys,
        weights,
        per_channel,
        energy,
    })
}

fn require_normalized(c: f64, what: &str) -> Result<()> {
    if (c - 1.0).abs() > NORMALIZED_TOL {
        return Err(Error::Precondition(format!("{what} needs a normalized system (c_psi = 1), got c_psi = {c}")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return domain(format!("Pitt exponent must lie in [0, 1), got {lambda}"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("local exponent must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// Which inequality to evaluate, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifierSpec {
    Pitt {
        lambdas: Vec<f64>,
    },
    Beckner,
    Heisenberg,
    SobolevLog,
    NazarovConcentration {
        regions: Vec<RegionSpec>,
    },
    NazarovConstant {
        pairs: Vec<RegionPair>,
    },
    Local {
        regions: Vec<RegionSpec>,
        alphas: Vec<f64>,
    },
    LocalSobolev,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionPair {
    /// Spatial region.
    pub e1: RegionSpec,
    /// Frequency region.
    pub e2: RegionSpec,
}

impl VerifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            VerifierSpec::Pitt { .. } => "pitt",
            VerifierSpec::Beckner => "beckner",
            VerifierSpec::Heisenberg => "heisenberg",
            VerifierSpec::SobolevLog => "sobolev_log",
            VerifierSpec::NazarovConcentration { .. } => "nazarov_concentration",
            VerifierSpec::NazarovConstant { .. } => "nazarov_constant",
            VerifierSpec::Local { .. } => "local",
            VerifierSpec::LocalSobolev => "local_sobolev",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            VerifierSpec::Pitt { lambdas } => lambdas.iter().try_for_each(|&l| check_lambda(l)),
            VerifierSpec::NazarovConcentration { regions } => regions.iter().try_for_each(|r| r.validate(n)),
            VerifierSpec::NazarovConstant { pairs } => {
                pairs.iter().try_for_each(|p| p.e1.validate(n).and_then(|_| p.e2.validate(n)))
            }
            VerifierSpec::Local { regions, alphas } => {
                alphas.iter().try_for_each(|&a| check_alpha(a))?;
                regions.iter().try_for_each(|r| r.validate(n))
            }
            _ => Ok(()),
        }
    }

    /// Number of records this verifier produces per signal.
    pub fn record_count(&self) -> usize {
        match self {
            VerifierSpec::Pitt { lambdas } => lambdas.len(),
            VerifierSpec::NazarovConcentration { regions } => regions.len(),
            VerifierSpec::NazarovConstant { pairs } => pairs.len(),
            VerifierSpec::Local { regions, alphas } => regions.len() * alphas.len(),
            _ => 1,
        }
    }

    pub fn weights(&self) -> Vec<WeightRequest> {
        match self {
            VerifierSpec::Pitt { lambdas } => lambdas.iter().map(|&l| WeightRequest::Power(l)).collect(),
            VerifierSpec::Beckner => vec![WeightRequest::Log],
            VerifierSpec::Heisenberg | VerifierSpec::LocalSobolev => vec![WeightRequest::Power(2.0)],
            VerifierSpec::SobolevLog => vec![WeightRequest::LogSobolev],
            VerifierSpec::NazarovConcentration { regions } => {
                regions.iter().map(|r| WeightRequest::Complement(r.clone())).collect()
            }
            VerifierSpec::NazarovConstant { pairs } => {
                pairs.iter().map(|p| WeightRequest::Complement(p.e1.clone())).collect()
            }
            VerifierSpec::Local { alphas, .. } => alphas.iter().map(|&a| WeightRequest::Power(2.0 * a)).collect(),
        }
    }

    pub fn evaluate(&self, a: &SignalAnalysis, system: &ShearletSystem, opts: &VerifyOptions) -> Result<Vec<Report>> {
        Ok(match self {
            VerifierSpec::Pitt { lambdas } => lambdas
                .iter()
                .map(|&l| pitt_from(a, l, opts).map(Report::Inequality))
                .collect::<Result<_>>()?,
            VerifierSpec::Beckner => vec![Report::Inequality(beckner_from(a, opts)?)],
            VerifierSpec::Heisenberg => vec![Report::Inequality(heisenberg_from(a, opts)?)],
            VerifierSpec::SobolevLog => vec![Report::Inequality(sobolev_log_from(a, opts)?)],
            VerifierSpec::NazarovConcentration { regions } => regions
                .iter()
                .map(|r| nazarov_concentration_from(a, r, opts).map(Report::Inequality))
                .collect::<Result<_>>()?,
            VerifierSpec::NazarovConstant { pairs } => pairs
                .iter()
                .map(|p| nazarov_constant_from(a, &p.e1, &p.e2).map(Report::Constant))
                .collect::<Result<_>>()?,
            VerifierSpec::Local { regions, alphas } => {
                let mut out = Vec::new();
                for r in regions {
                    for &al in alphas {
                        out.push(Report::Constant(local_from(a, system, r, al)?));
                    }
                }
                out
            }
            VerifierSpec::LocalSobolev => vec![Report::Inequality(local_sobolev_from(a, opts)?)],
        })
    }
}

/// The verifier list used by `verify all`: every inequality with the
/// standard parameter sets, regions placed relative to the signal modulation.
pub fn default_verifiers(n: usize, modulation: &[f64]) -> Vec<VerifierSpec> {
    let origin = vec![0.0; n];
    let mut nu = modulation.to_vec();
    nu.resize(n, 0.0);
    vec![
        VerifierSpec::Pitt { lambdas: vec![0.0, 0.25, 0.5, 0.75] },
        VerifierSpec::Beckner,
        VerifierSpec::Heisenberg,
        VerifierSpec::SobolevLog,
        VerifierSpec::NazarovConcentration {
            regions: vec![
                RegionSpec::Empty,
                RegionSpec::ball(origin.clone(), 1.0),
                RegionSpec::boxed(origin.clone(), vec![2.0; n]),
            ],
        },
        VerifierSpec::NazarovConstant {
            pairs: vec![RegionPair { e1: RegionSpec::ball(origin, 2.0), e2: RegionSpec::ball(nu.clone(), 1.0) }],
        },
        VerifierSpec::Local { regions: vec![RegionSpec::ball(nu, 1.0)], alphas: vec![0.25, 0.5, 0.75] },
        VerifierSpec::LocalSobolev,
    ]
}

/// Runs `verifiers` on one signal from a single analysis pass.
pub fn run_verifiers(
    f: &SampledSignal,
    label: &str,
    system: &ShearletSystem,
    verifiers: &[VerifierSpec],
    opts: &VerifyOptions,
) -> Result<Vec<Report>> {
    let n = system.dim();
    for v in verifiers {
        v.validate(n)?;
    }
    let requests: Vec<WeightRequest> = verifiers.iter().flat_map(|v| v.weights()).collect();
    let a = analyze(f, label, system, &requests)?;
    let mut out = Vec::new();
    for v in verifiers {
        out.extend(v.evaluate(&a, system, opts)?);
    }
    Ok(out)
}

fn single(f: &SampledSignal, system: &ShearletSystem, v: VerifierSpec, opts: &VerifyOptions) -> Result<Report> {
    let mut r = run_verifiers(f, "signal", system, std::slice::from_ref(&v), opts)?;
    Ok(r.remove(0))
}

fn expect_inequality(r: Report) -> InequalityReport {
    match r {
        Report::Inequality(r) => r,
        _ => unreachable!("verifier returns an inequality report"),
    }
}

fn expect_constant(r: Report) -> EmpiricalConstantReport {
    match r {
        Report::Constant(r) => r,
        _ => unreachable!("verifier returns a constant report"),
    }
}

pub fn verify_pitt(f: &SampledSignal, system: &ShearletSystem, lambda: f64, opts: &VerifyOptions) -> Result<InequalityReport> {
    single(f, system, VerifierSpec::Pitt { lambdas: vec![lambda] }, opts).map(expect_inequality)
}

pub fn verify_beckner(f: &SampledSignal, system: &ShearletSystem, opts: &VerifyOptions) -> Result<InequalityReport> {
    single(f, system, VerifierSpec::Beckner, opts).map(expect_inequality)
}

pub fn verify_heisenberg(f: &SampledSignal, system: &ShearletSystem, opts: &VerifyOptions) -> Result<InequalityReport> {
    single(f, system, VerifierSpec::Heisenberg, opts).map(expect_inequality)
}

pub fn verify_sobolev_log(f: &SampledSignal, system: &ShearletSystem, opts: &VerifyOptions) -> Result<InequalityReport> {
    single(f, system, VerifierSpec::SobolevLog, opts).map(expect_inequality)
}

pub fn verify_nazarov_concentration(
    f: &SampledSignal,
    system: &ShearletSystem,
    e1: &RegionSpec,
    opts: &VerifyOptions,
) -> Result<InequalityReport> {
    single(f, system, VerifierSpec::NazarovConcentration { regions: vec![e1.clone()] }, opts).map(expect_inequality)
}

pub fn nazarov_empirical_constant(
    f: &SampledSignal,
    system: &ShearletSystem,
    e1: &RegionSpec,
    e2: &RegionSpec,
) -> Result<EmpiricalConstantReport> {
    let v = VerifierSpec::NazarovConstant { pairs: vec![RegionPair { e1: e1.clone(), e2: e2.clone() }] };
    single(f, system, v, &VerifyOptions::default()).map(expect_constant)
}

pub fn verify_local(f: &SampledSignal, system: &ShearletSystem, e: &RegionSpec, alpha: f64) -> Result<EmpiricalConstantReport> {
    let v = VerifierSpec::Local { regions: vec![e.clone()], alphas: vec![alpha] };
    single(f, system, v, &VerifyOptions::default()).map(expect_constant)
}

pub fn verify_local_sobolev(f: &SampledSignal, system: &ShearletSystem, opts: &VerifyOptions) -> Result<InequalityReport> {
    single(f, system, VerifierSpec::LocalSobolev, opts).map(expect_inequality)
}

/// `C_λ Σ haar ∫|t|^λ|SH|² ≥ c ∫|ξ|^{−λ}|f̂|²`.
pub fn pitt_from(a: &SignalAnalysis, lambda: f64, opts: &VerifyOptions) -> Result<InequalityReport> {
    check_lambda(lambda)?;
    let n = a.spectrum.grid.dim();
    let c_lambda = pitt_constant(lambda, n)?;
    let moment = a.moment(&WeightRequest::Power(lambda))?;
    let spectral = a.spectral_moment(WeightKind::FrequencyPower(-lambda))?;
    let r = InequalityReport::new(format!("pitt(lambda={lambda})"), a, c_lambda * moment, a.c_psi * spectral, opts.tolerance)
        .meta("lambda", json!(lambda))
        .meta("c_lambda", json!(c_lambda))
        .meta("coefficient_moment", json!(moment))
        .meta("spectral_moment", json!(spectral));
    Ok(if lambda == 0.0 { r.equality(opts.equality_tolerance) } else { r })
}

/// `Σ haar ∫ln|t||SH|² + c ∫ln|ξ||f̂|² ≥ c (ψ(n/4) − ln π) ‖f‖²`.
pub fn beckner_from(a: &SignalAnalysis, opts: &VerifyOptions) -> Result<InequalityReport> {
    let n = a.spectrum.grid.dim();
    let k = uncertainty_constants(n)?;
    let coeff = a.moment(&WeightRequest::Log)?;
    let spectral = a.spectral_moment(WeightKind::FrequencyLog)?;
    Ok(InequalityReport::new("beckner", a, coeff + a.c_psi * spectral, a.c_psi * k.beckner * a.norm_sq, opts.tolerance)
        .meta("beckner_constant", json!(k.beckner))
        .meta("coefficient_log_moment", json!(coeff))
        .meta("spectral_log_moment", json!(spectral))
        .meta("norm_sq", json!(a.norm_sq)))
}

/// `{Σ haar ∫|t|²|SH|²}^{1/2} {∫|ξ|²|f̂|²}^{1/2} ≥ e^{ψ(n/4)−ln π} ‖f‖²`.
pub fn heisenberg_from(a: &SignalAnalysis, opts: &VerifyOptions) -> Result<InequalityReport> {
    require_normalized(a.c_psi, "the Heisenberg deduction")?;
    let n = a.spectrum.grid.dim();
    let k = uncertainty_constants(n)?;
    let t2 = a.moment(&WeightRequest::Power(2.0))?;
    let g = a.spectral_moment(WeightKind::FrequencyPower(2.0))?;
    let lhs = (t2 * g).sqrt();
    let mut r = InequalityReport::new("heisenberg", a, lhs, k.heisenberg_digamma * a.norm_sq, opts.tolerance)
        .meta("coefficient_second_moment", json!(t2))
        .meta("spectral_second_moment", json!(g))
        .meta("digamma_bound", json!(k.heisenberg_digamma * a.norm_sq));
    if let Some(p) = k.heisenberg_stated {
        let bound = p * a.norm_sq;
        r = r
            .meta("stated_bound", json!(bound))
            .meta("stated_bound_slack", json!(lhs - bound))
            .meta("stated_bound_holds", json!(pass_predicate(lhs, bound, opts.tolerance)));
        r.notes.push("pass is judged against exp(psi(n/4) - ln pi); the 1/(4 pi) bound is recorded only".into());
    }
    Ok(r)
}

/// `Σ haar ∫ln((1+|t|²)/2)|SH|² + c ∫ln|ξ||f̂|² ≥ ψ(n/2) c ‖f‖²`.
pub fn sobolev_log_from(a: &SignalAnalysis, opts: &VerifyOptions) -> Result<InequalityReport> {
    let n = a.spectrum.grid.dim();
    let k = uncertainty_constants(n)?;
    let coeff = a.moment(&WeightRequest::LogSobolev)?;
    let spectral = a.spectral_moment(WeightKind::FrequencyLog)?;
    Ok(InequalityReport::new("sobolev_log", a, coeff + a.c_psi * spectral, k.sobolev * a.c_psi * a.norm_sq, opts.tolerance)
        .meta("sobolev_constant", json!(k.sobolev))
        .meta("coefficient_moment", json!(coeff))
        .meta("spectral_log_moment", json!(spectral)))
}

fn region_label(r: &RegionSpec) -> String {
    match r {
        RegionSpec::Empty => "empty".into(),
        RegionSpec::Ball { radius, .. } => format!("ball(r={radius})"),
        RegionSpec::Box { half_widths, .. } => format!("box(w={half_widths:?})"),
    }
}

/// Tail concentration: `Σ haar ∫_{E₁ᶜ}|SH|² ≥ c ∫_{E₁ᶜ}|f|²`. lhs is the
/// coefficient tail, rhs the scaled signal tail.
pub fn nazarov_concentration_from(a: &SignalAnalysis, e1: &RegionSpec, opts: &VerifyOptions) -> Result<InequalityReport> {
    let coeff = a.moment(&WeightRequest::Complement(e1.clone()))?;
    let tail = a.spatial_mass(e1, true)?;
    let n = a.spectrum.grid.dim();
    let r = InequalityReport::new(
        format!("nazarov_concentration(E1={})", region_label(e1)),
        a,
        coeff,
        a.c_psi * tail,
        opts.tolerance,
    )
    .meta("region", json!(e1))
    .meta("region_measure", json!(e1.measure(n)));
    Ok(if matches!(e1, RegionSpec::Empty) { r.equality(opts.equality_tolerance) } else { r })
}

/// Smallest root of `K e^{KM} = ratio` (ratio > 1, M > 0) by bisection.
pub fn solve_proof_form(ratio: f64, m: f64) -> f64 {
    let target = ratio.ln();
    let g = |k: f64| k.ln() + k * m - target;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while g(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return lo;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `D = Σ haar ∫_{E₁ᶜ}|SH|² + c ∫_{E₂ᶜ}|f̂|²`; the smallest K with
/// `D ≥ c‖f‖²/(K e^{K|E₁||E₂|})`, and the variant without the K prefactor.
pub fn nazarov_constant_from(a: &SignalAnalysis, e1: &RegionSpec, e2: &RegionSpec) -> Result<EmpiricalConstantReport> {
    let n = a.spectrum.grid.dim();
    let coeff_tail = a.moment(&WeightRequest::Complement(e1.clone()))?;
    let spec_tail = a.spectral_mass(e2, true)?;
    let d = coeff_tail + a.c_psi * spec_tail;
    let p = a.c_psi * a.norm_sq;
    let (m1, m2) = (e1.measure(n), e2.measure(n));
    let m = m1 * m2;
    let name = format!("nazarov_constant(E1={}, E2={})", region_label(e1), region_label(e2));
    let (proof, statement, note) = if m == 0.0 || d >= p || !(d > 0.0) {
        let why = if d > 0.0 { "tails carry all the energy; any K works" } else { "tails vanish; no finite K" };
        (if d > 0.0 { 0.0 } else { f64::INFINITY }, if d > 0.0 { 0.0 } else { f64::INFINITY }, Some(why))
    } else {
        let ratio = p / d;
        (solve_proof_form(ratio, m), ratio.ln() / m, None)
    };
    let mut r = EmpiricalConstantReport::new(name, a, proof);
    if let Some(why) = note {
        r.notes.push(why.into());
    }
    r.inputs.insert("e1".into(), json!(e1));
    r.inputs.insert("e2".into(), json!(e2));
    r.inputs.insert("e1_measure".into(), json!(m1));
    r.inputs.insert("e2_measure".into(), json!(m2));
    r.metadata.insert("tail_energy".into(), json!(d));
    r.metadata.insert("coefficient_tail".into(), json!(coeff_tail));
    r.metadata.insert("spectral_tail".into(), json!(spec_tail));
    r.metadata.insert("total_energy".into(), json!(p));
    r.metadata.insert("statement_form_constant".into(), json!(statement));
    Ok(r)
}

/// Minimal `K_α` in `Σ haar ∫|t|^{2α}|SH|² ≥ c ∫_E|f̂|² / (K_α|E|^α)`, with
/// the classical constant for f and the per-channel mediant bound.
pub fn local_from(a: &SignalAnalysis, system: &ShearletSystem, e: &RegionSpec, alpha: f64) -> Result<EmpiricalConstantReport> {
    check_alpha(alpha)?;
    let n = a.spectrum.grid.dim();
    let w = WeightRequest::Power(2.0 * alpha);
    let lhs = a.moment(&w)?;
    if !(lhs > 0.0) {
        return Err(Error::Precondition("local inequality needs a nonzero signal".into()));
    }
    let measure = e.measure(n);
    if !(measure > 0.0) {
        return domain("local inequality needs a region of positive measure");
    }
    let mask = region_mask(&a.spectrum.grid, e, false, Domain::Frequency)?;
    let localized = weighted_norm_sq(&a.spectrum, &mask.mask)?;
    let em = measure.powf(alpha);
    let k = a.c_psi * localized / (em * lhs);

    let spatial_w = a.spatial_weight(&w).expect("weight requested above");
    let f_moment = weighted_norm_sq(&a.signal, spatial_w)?;
    let classical = if f_moment > 0.0 { localized / (em * f_moment) } else { f64::INFINITY };

    // Per channel, g_c = SH f(a, s, ·) and ĝ_c = |det A|^{1/2} f̂ ψ̂(Mᵀξ).
    let dxi = a.spectrum.grid.freq_cell_volume();
    let moments = a.channel_moments(&w)?;
    let mut localized_channels = Vec::with_capacity(moments.len());
    let mut best = 0.0f64;
    for (ch, filt) in system.filters.iter().enumerate() {
        let det = abs_det_scaling(system.channels.channels[ch].a, n);
        let loc = dxi
            * det
            * pairwise_map(filt.index.len(), &|j| {
                let i = filt.index[j] as usize;
                mask.mask[i] * a.spectrum.values[i].norm_sqr() * filt.value[j] * filt.value[j]
            });
        localized_channels.push(a.haar[ch] * loc);
        if moments[ch] > 0.0 {
            best = best.max(loc / (em * moments[ch]));
        }
    }
    let channel_localized = pairwise(&localized_channels);
    let ratio = if channel_localized > 0.0 { a.c_psi * localized / channel_localized } else { 1.0 };
    let bound = best * ratio;
    let consistent = k <= bound * (1.0 + 1e-9) + 1e-300;

    let name = format!("local(E={}, alpha={alpha})", region_label(e));
    let mut r = EmpiricalConstantReport::new(name, a, k);
    if localized == 0.0 {
        r.notes.push("no spectral mass in E; K_alpha = 0".into());
    }
    r.notes.extend(mask.warnings);
    r.inputs.insert("region".into(), json!(e));
    r.inputs.insert("region_measure".into(), json!(measure));
    r.inputs.insert("alpha".into(), json!(alpha));
    r.metadata.insert("coefficient_moment".into(), json!(lhs));
    r.metadata.insert("localized_spectral_mass".into(), json!(localized));
    r.metadata.insert("classical_constant".into(), json!(classical));
    r.metadata.insert("localized_energy_ratio".into(), json!(ratio));
    r.metadata.insert("channel_max_constant".into(), json!(best));
    r.metadata.insert("mediant_bound".into(), json!(bound));
    r.metadata.insert("mediant_consistent".into(), json!(consistent));
    Ok(r)
}

/// `Σ haar ∫|t|²|SH|² ≥ 2 e^{ψ(n/2)} ‖f‖³/‖∇f‖ − ‖f‖²`, with ‖∇f‖² the
/// spectral moment `∫|ξ|²|f̂|²`.
pub fn local_sobolev_from(a: &SignalAnalysis, opts: &VerifyOptions) -> Result<InequalityReport> {
    require_normalized(a.c_psi, "the local Sobolev inequality")?;
    let n = a.spectrum.grid.dim();
    let k = uncertainty_constants(n)?;
    let t2 = a.moment(&WeightRequest::Power(2.0))?;
    let g = a.spectral_moment(WeightKind::FrequencyPower(2.0))?;
    if !(g > 0.0) {
        return Err(Error::Precondition("spectral gradient norm must be positive".into()));
    }
    let norm = a.norm_sq.sqrt();
    // Computed for the unit-normalized signal, then scaled back by ‖f‖².
    let unit_g = g / a.norm_sq;
    let e = k.sobolev.exp();
    let rhs_unit = 2.0 * e / unit_g.sqrt() - 1.0;
    let calculus_unit = 2.0 * e / (2.0 * PI * unit_g.sqrt()) - 1.0;
    Ok(InequalityReport::new("local_sobolev", a, t2, rhs_unit * a.norm_sq, opts.tolerance)
        .meta("normalization_factor", json!(norm))
        .meta("gradient_norm_spectral", json!(g.sqrt()))
        .meta("gradient_norm_calculus", json!(2.0 * PI * g.sqrt()))
        .meta("calculus_variant_rhs", json!(calculus_unit * a.norm_sq))
        .meta("calculus_variant_slack", json!(t2 - calculus_unit * a.norm_sq)))
}
