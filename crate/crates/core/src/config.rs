//! Run configuration (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{GaussianSpec, SpatialGrid};
use crate::system::{BandPolicy, BuildOptions, ChannelSpec, GeneratorSpec};
use crate::verify::{default_verifiers, VerifierSpec, VerifyOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// L: the box is [−L, L)ⁿ.
    pub half_extent: f64,
    /// N samples per axis.
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Rescale the generator so that c_psi = 1.
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default)]
    pub band_policy: BandPolicy,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn yes() -> bool {
    true
}

fn default_probes() -> usize {
    64
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self { normalize: true, band_policy: BandPolicy::Truncate, probes: default_probes() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub samples: usize,
    pub scales: usize,
    pub shears: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub levels: Vec<Level>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            levels: vec![
                Level { samples: 128, scales: 12, shears: 13 },
                Level { samples: 256, scales: 24, shears: 25 },
                Level { samples: 256, scales: 48, shears: 49 },
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default)]
    pub dump_signals: bool,
    #[serde(default)]
    pub dump_coefficients: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: String,
    pub grid: GridConfig,
    pub generator: GeneratorSpec,
    pub channels: ChannelSpec,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub tolerances: VerifyOptions,
    pub signals: Vec<GaussianSpec>,
    /// Each signal is replaced by its dilations `c^{−n/2} f(x/c)` for these c.
    #[serde(default)]
    pub dilations: Vec<f64>,
    /// Empty means the standard list, with frequency regions centred on each
    /// signal's modulation.
    #[serde(default)]
    pub verifiers: Vec<VerifierSpec>,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
}

fn default_seed() -> u64 {
    0x5eed
}

fn default_output() -> String {
    "out".into()
}

/// 1-based (line, column) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let head = &text[..offset.min(text.len())];
    let line = head.matches('\n').count() + 1;
    let col = head.rfind('\n').map_or(head.len(), |p| head.len() - p - 1) + 1;
    (line, col)
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    Error::Config(format!("{origin}:{line}:{col}: {msg}"))
                }
                None => Error::Config(format!("{origin}: {msg}")),
            }
        })?;
        cfg.validate().map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        self.grid()?;
        self.generator.validate(n)?;
        crate::system::channel_set(&self.channels, n)?;
        if self.signals.is_empty() {
            return Err(Error::Config("at least one signal is required".into()));
        }
        for (i, s) in self.signals.iter().enumerate() {
            let ok = s.center.len() == n
                && s.sigma.len() == n
                && s.sigma.iter().all(|v| *v > 0.0)
                && (s.modulation.is_empty() || s.modulation.len() == n)
                && (s.hermite.is_empty() || s.hermite.len() == n);
            if !ok {
                return Err(Error::Config(format!("signal #{i}: vectors must have length {n} and sigma must be positive")));
            }
        }
        if self.dilations.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::Config("dilation factors must be positive".into()));
        }
        for v in &self.verifiers {
            v.validate(n)?;
        }
        if !(self.tolerances.tolerance >= 0.0 && self.tolerances.equality_tolerance >= 0.0) {
            return Err(Error::Config("tolerances must be non-negative".into()));
        }
        if self.convergence.levels.is_empty() {
            return Err(Error::Config("convergence ladder needs at least one level".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.dimension, self.grid.half_extent, self.grid.samples)
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions { band_policy: self.system.band_policy, probes: self.system.probes, probe_seed: self.seed }
    }

    /// Signals after the dilation expansion, with labels filled in.
    pub fn expanded_signals(&self) -> Vec<GaussianSpec> {
        let mut out = Vec::new();
        for (i, s) in self.signals.iter().enumerate() {
            let base = if s.label.is_empty() { format!("signal{i}") } else { s.label.clone() };
            if self.dilations.is_empty() {
                out.push(s.clone().with_label(base));
            } else {
                for &c in &self.dilations {
                    out.push(s.dilated(c).with_label(format!("{base}@c={c}")));
                }
            }
        }
        out
    }

    pub fn verifiers_for(&self, signal: &GaussianSpec) -> Vec<VerifierSpec> {
        if self.verifiers.is_empty() {
            default_verifiers(self.dimension, &signal.modulation)
        } else {
            self.verifiers.clone()
        }
    }

    /// Canonical JSON echo embedded in every report.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serializable")
    }

    /// SHA-256 of the canonical JSON echo, hex.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.echo()).expect("config is serializable");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// The n = 2 default: classical generator, N = 128, L = 8, 12 scales in
/// [1/16, 1], 13 shears, and a family of modulated Gaussians.
pub fn default_config() -> RunConfig {
    let widths = [1.5, 1.8, 2.1, 2.5, 3.0];
    let shapes = [(1.0, 1.0, "iso"), (1.25, 0.8, "wide"), (0.8, 1.25, "tall")];
    let mut signals = Vec::new();
    for &w in &widths {
        for &(p, q, tag) in &shapes {
            signals.push(GaussianSpec {
                label: format!("{tag}-{w}"),
                center: vec![0.0, 0.0],
                sigma: vec![round6(w * p), round6(w * q)],
                modulation: vec![2.9, 0.0],
                hermite: Vec::new(),
            });
        }
    }
    RunConfig {
        dimension: 2,
        seed: default_seed(),
        output: default_output(),
        grid: GridConfig { half_extent: 8.0, samples: 128 },
        generator: GeneratorSpec::classical(),
        channels: ChannelSpec::default_2d(),
        system: SystemConfig::default(),
        tolerances: VerifyOptions::default(),
        signals,
        dilations: Vec::new(),
        verifiers: default_verifiers(2, &[2.9, 0.0]),
        transform: TransformConfig::default(),
        convergence: ConvergenceConfig::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = default_config();
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::from_toml(&text, "x").unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "dimension = 2\n[grid]\nhalf_extent = 8.0\nsamples = \"many\"\n";
        let err = RunConfig::from_toml(text, "c.toml").unwrap_err().to_string();
        assert!(err.contains("c.toml:4:"), "{err}");
    }

    #[test]
    fn dilations_expand() {
        let mut cfg = default_config();
        cfg.signals.truncate(1);
        cfg.dilations = vec![0.5, 1.0, 2.0];
        let s = cfg.expanded_signals();
        assert_eq!(s.len(), 3);
        assert_eq!(s[2].sigma[0], 3.0);
        assert!(s[0].label.ends_with("@c=0.5"));
    }
}
