//! Frequency-domain shearlet generators, the discretized (a, s) channel set,
//! per-channel filters ψ̂(M_saᵀξ) and numerical admissibility.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::grid::{Domain, SampledSignal, SpatialGrid};
use crate::group::{abs_det_scaling, haar_weight, msa_transpose_apply, shear_gain, signed_root};
use crate::quad;
use crate::sum::{pairwise, pairwise_map};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorKind {
    /// `w(ξ₁) ∏ v(ξ_k/ξ₁)` with `w = (1−x²)^p`, `x` the position of `ln|ξ₁|`
    /// inside `[ln r₀, ln r₁]` rescaled to [−1, 1], and `v(u) = (1−(u/ω)²)^q`.
    Classical { band: [f64; 2], radial_order: u32, angular_half_width: f64, angular_order: u32 },
    /// `|ξ₁|^{2m−n+1} e^{−πξ₁²/β²} ∏ e^{−πξ_k²/(κ²ξ₁²)}`; its spatial form is
    /// a Hermite-Gaussian in closed form.
    GaussianDerivative { order: u32, beta: f64, kappa: f64 },
}

// Unknown keys are rejected by the tagged kind; serde cannot deny them on a
// struct with a flattened field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// Relative amplitude below which a smooth window counts as zero when a
/// support interval is needed.
const ESSENTIAL_EPS: f64 = 1e-8;

impl GeneratorSpec {
    pub fn classical() -> Self {
        Self {
            kind: GeneratorKind::Classical { band: [0.5, 2.0], radial_order: 3, angular_half_width: 1.0, angular_order: 3 },
            amplitude: 1.0,
        }
    }

    pub fn gaussian_derivative(order: u32, beta: f64, kappa: f64) -> Self {
        Self { kind: GeneratorKind::GaussianDerivative { order, beta, kappa }, amplitude: 1.0 }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return domain("generator amplitude must be finite and non-negative");
        }
        match self.kind {
            GeneratorKind::Classical { band, radial_order, angular_half_width, angular_order } => {
                if !(band[0] > 0.0 && band[1] > band[0]) {
                    return domain("classical band must satisfy 0 < r0 < r1");
                }
                if radial_order == 0 || angular_order == 0 || !(angular_half_width > 0.0) {
                    return domain("classical window orders must be >= 1 and half-width > 0");
                }
            }
            GeneratorKind::GaussianDerivative { order, beta, kappa } => {
                if 2 * order as i64 - n as i64 + 1 < 1 {
                    return domain("gaussian-derivative order too small for this dimension");
                }
                if !(beta > 0.0 && kappa > 0.0) {
                    return domain("beta and kappa must be positive");
                }
            }
        }
        Ok(())
    }

    fn radial(&self, r: f64, n: usize) -> f64 {
        let r = r.abs();
        if r == 0.0 {
            return 0.0;
        }
        match self.kind {
            GeneratorKind::Classical { band, radial_order, .. } => {
                let (l0, l1) = (band[0].ln(), band[1].ln());
                let x = (2.0 * r.ln() - l0 - l1) / (l1 - l0);
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - x * x).powi(radial_order as i32)
                }
            }
            GeneratorKind::GaussianDerivative { order, beta, .. } => {
                let p = 2 * order as i32 - n as i32 + 1;
                r.powi(p) * (-PI * r * r / (beta * beta)).exp()
            }
        }
    }

    fn angular(&self, u: f64) -> f64 {
        match self.kind {
            GeneratorKind::Classical { angular_half_width, angular_order, .. } => {
                let x = u / angular_half_width;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - x * x).powi(angular_order as i32)
                }
            }
            GeneratorKind::GaussianDerivative { kappa, .. } => (-PI * u * u / (kappa * kappa)).exp(),
        }
    }

    /// ψ̂ at one frequency point.
    pub fn eval_hat(&self, eta: &[f64]) -> f64 {
        let n = eta.len();
        let e1 = eta[0];
        if e1 == 0.0 || self.amplitude == 0.0 {
            return 0.0;
        }
        let mut v = self.amplitude * self.radial(e1, n);
        if v == 0.0 {
            return 0.0;
        }
        for &ek in &eta[1..] {
            v *= self.angular(ek / e1);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    /// Interval of |ξ₁| carrying the radial window (exact for compact windows).
    pub fn radial_support(&self, n: usize) -> (f64, f64) {
        match self.kind {
            GeneratorKind::Classical { band, .. } => (band[0], band[1]),
            GeneratorKind::GaussianDerivative { order, beta, .. } => {
                let p = (2 * order as i32 - n as i32 + 1) as f64;
                let peak_r = beta * (p / (2.0 * PI)).sqrt();
                let peak = self.radial(peak_r, n);
                let cut = |mut lo: f64, mut hi: f64, rising: bool| {
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        let above = self.radial(mid, n) >= ESSENTIAL_EPS * peak;
                        if above == rising {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    0.5 * (lo + hi)
                };
                (cut(0.0, peak_r, true), cut(peak_r, peak_r + 20.0 * beta, false))
            }
        }
    }

    /// Half-width of the angular window in `u = ξ_k/ξ₁`.
    pub fn angular_support(&self) -> f64 {
        match self.kind {
            GeneratorKind::Classical { angular_half_width, .. } => angular_half_width,
            GeneratorKind::GaussianDerivative { kappa, .. } => kappa * (ESSENTIAL_EPS.recip().ln() / PI).sqrt(),
        }
    }

    /// `∫₀^∞ |w(r)|²/r dr · (∫ |v(u)|² du)^{n−1}`: the admissibility constant
    /// of the untruncated parameter set a > 0, s ∈ ℝ^{n−1}.
    pub fn admissibility_reduction(&self, n: usize) -> f64 {
        let (rlo, rhi) = self.radial_support(n);
        let (t, tw) = quad::mapped(200, rlo.ln(), rhi.ln());
        let radial: f64 = t.iter().zip(&tw).map(|(x, w)| w * self.radial(x.exp(), n).powi(2)).sum();
        let um = self.angular_support();
        let (u, uw) = quad::mapped(200, -um, um);
        let angular: f64 = u.iter().zip(&uw).map(|(x, w)| w * self.angular(*x).powi(2)).sum();
        self.amplitude.powi(2) * radial * angular.powi(n as i32 - 1)
    }

    /// `∫|ψ̂|² dξ`.
    pub fn hat_norm_sq(&self, n: usize) -> f64 {
        let (rlo, rhi) = self.radial_support(n);
        let (t, tw) = quad::mapped(200, rlo, rhi);
        let radial: f64 =
            t.iter().zip(&tw).map(|(r, w)| w * self.radial(*r, n).powi(2) * r.powi(n as i32 - 1)).sum();
        let um = self.angular_support();
        let (u, uw) = quad::mapped(200, -um, um);
        let angular: f64 = u.iter().zip(&uw).map(|(x, w)| w * self.angular(*x).powi(2)).sum();
        2.0 * self.amplitude.powi(2) * radial * angular.powi(n as i32 - 1)
    }

    /// Closed-form spatial generator, available for the gaussian-derivative kind.
    pub fn eval_spatial(&self, y: &[f64]) -> Option<f64> {
        let GeneratorKind::GaussianDerivative { order, beta, kappa } = self.kind else {
            return None;
        };
        let n = y.len();
        let m = order as i32;
        let b = 1.0 / (beta * beta) + kappa * kappa * y[1..].iter().map(|v| v * v).sum::<f64>();
        let u = y[0] * (PI / b).sqrt();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        Some(
            self.amplitude
                * kappa.powi(n as i32 - 1)
                * b.powf(-0.5)
                * sign
                * (4.0 * PI * b).powi(-m)
                * hermite(2 * order, u)
                * (-u * u).exp(),
        )
    }
}

fn hermite(k: u32, u: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * u);
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = 2.0 * u * h1 - 2.0 * j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignMode {
    #[default]
    Positive,
    Mirrored,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub scales: usize,
    pub shear_max: f64,
    pub shears: usize,
    #[serde(default)]
    pub sign: SignMode,
}

impl ChannelSpec {
    pub fn default_2d() -> Self {
        Self { a_min: 1.0 / 16.0, a_max: 1.0, scales: 12, shear_max: 1.5, shears: 13, sign: SignMode::Positive }
    }

    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        out.scales = (self.scales - 1) * factor + 1;
        out.shears = (self.shears - 1) * factor + 1;
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Channel {
    pub a: f64,
    pub s: Vec<f64>,
    pub scale_index: usize,
    pub shear_index: Vec<usize>,
    /// Δa·Δs
    pub measure: f64,
    /// Δa·Δs/|a|^{n+1}
    pub haar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelSet {
    pub spec: ChannelSpec,
    pub scale_nodes: Vec<f64>,
    pub scale_weights: Vec<f64>,
    pub shear_nodes: Vec<f64>,
    pub shear_weights: Vec<f64>,
    pub channels: Vec<Channel>,
}

pub fn channel_set(spec: &ChannelSpec, n: usize) -> Result<ChannelSet> {
    if !(spec.a_min > 0.0 && spec.a_max > spec.a_min) {
        return domain("scale range must satisfy 0 < a_min < a_max");
    }
    if spec.scales < 2 {
        return domain("need at least two scale nodes");
    }
    if spec.shears % 2 == 0 || spec.shears < 3 || !(spec.shear_max > 0.0) {
        return domain("shear count must be odd and >= 3, shear range positive");
    }
    let j_last = (spec.scales - 1) as f64;
    let dln = (spec.a_max / spec.a_min).ln() / j_last;
    let scale_nodes: Vec<f64> = (0..spec.scales)
        .map(|j| if j == spec.scales - 1 { spec.a_max } else { spec.a_min * (j as f64 * dln).exp() })
        .collect();
    let scale_weights: Vec<f64> = scale_nodes
        .iter()
        .enumerate()
        .map(|(j, a)| a * dln * if j == 0 || j == spec.scales - 1 { 0.5 } else { 1.0 })
        .collect();
    let k_last = (spec.shears - 1) as f64;
    let ds = 2.0 * spec.shear_max / k_last;
    let mid = spec.shears / 2;
    let shear_nodes: Vec<f64> = (0..spec.shears).map(|k| (k as f64 - mid as f64) * ds).collect();
    let shear_weights: Vec<f64> =
        (0..spec.shears).map(|k| ds * if k == 0 || k == spec.shears - 1 { 0.5 } else { 1.0 }).collect();

    let signs: &[f64] = match spec.sign {
        SignMode::Positive => &[1.0],
        SignMode::Mirrored => &[1.0, -1.0],
    };
    let per_scale = spec.shears.pow(n as u32 - 1);
    let mut channels = Vec::with_capacity(signs.len() * spec.scales * per_scale);
    for &sign in signs {
        for (j, (&a, &da)) in scale_nodes.iter().zip(&scale_weights).enumerate() {
            for c in 0..per_scale {
                let mut rest = c;
                let mut idx = vec![0; n - 1];
                for slot in idx.iter_mut().rev() {
                    *slot = rest % spec.shears;
                    rest /= spec.shears;
                }
                let s: Vec<f64> = idx.iter().map(|&k| shear_nodes[k]).collect();
                let dsw: f64 = idx.iter().map(|&k| shear_weights[k]).product();
                let a = sign * a;
                channels.push(Channel {
                    a,
                    s,
                    scale_index: j,
                    shear_index: idx,
                    measure: da * dsw,
                    haar: da * dsw * haar_weight(a, n)?,
                });
            }
        }
    }
    Ok(ChannelSet { spec: spec.clone(), scale_nodes, scale_weights, shear_nodes, shear_weights, channels })
}

/// Nonzero samples of one channel filter on the frequency lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseFilter {
    pub index: Vec<u32>,
    pub value: Vec<f64>,
}

impl SparseFilter {
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (&i, &v) in self.index.iter().zip(&self.value) {
            out[i as usize] = v;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BandPolicy {
    /// Reject systems whose channel pass-bands leave the Nyquist box.
    Strict,
    /// Keep them; the part of the band outside the box is dropped and recorded.
    #[default]
    Truncate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildOptions {
    #[serde(default)]
    pub band_policy: BandPolicy,
    #[serde(default = "default_probe_count")]
    pub probes: usize,
    #[serde(default = "default_probe_seed")]
    pub probe_seed: u64,
}

fn default_probe_count() -> usize {
    64
}

fn default_probe_seed() -> u64 {
    0x5eed
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { band_policy: BandPolicy::Truncate, probes: default_probe_count(), probe_seed: default_probe_seed() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelBand {
    /// Pass-band leaves the Nyquist box.
    pub exceeds_nyquist: bool,
    /// Fraction of the continuous filter energy represented on the lattice.
    pub captured: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityResult {
    pub c_psi: f64,
    pub probes: Vec<Vec<f64>>,
    pub c_psi_field: Vec<f64>,
    pub coefficient_of_variation: f64,
    pub excluded_probes: usize,
    pub truncation_note: String,
}

/// The set of frequencies whose whole (a, s) orbit of relevant channels lies
/// inside the truncated parameter box and the Nyquist box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveredCone {
    pub xi1_min: f64,
    pub xi1_max: f64,
    pub shear_max: f64,
    pub angular: f64,
    pub r_hi: f64,
    pub exponent: f64,
    pub nyquist: Vec<f64>,
}

impl CoveredCone {
    pub fn contains(&self, xi: &[f64]) -> bool {
        let x1 = xi[0].abs();
        if !(x1 >= self.xi1_min && x1 <= self.xi1_max) {
            return false;
        }
        if xi.iter().zip(&self.nyquist).any(|(x, ny)| x.abs() > *ny) {
            return false;
        }
        let spread = self.angular * (self.r_hi / x1).powf(self.exponent);
        xi[1..].iter().all(|xk| (xk / xi[0]).abs() + spread <= self.shear_max)
    }

    pub fn is_empty(&self) -> bool {
        self.xi1_min >= self.xi1_max
    }
}

#[derive(Clone, Debug)]
pub struct ShearletSystem {
    pub generator: GeneratorSpec,
    pub channels: ChannelSet,
    pub grid: SpatialGrid,
    pub options: BuildOptions,
    pub filters: Vec<SparseFilter>,
    pub bands: Vec<ChannelBand>,
    pub cone: CoveredCone,
    pub admissibility: AdmissibilityResult,
}

impl ShearletSystem {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.channels.len()
    }

    pub fn c_psi(&self) -> f64 {
        self.admissibility.c_psi
    }

    /// Fraction of spectral mass of `spectrum` lying in the covered cone.
    pub fn coverage(&self, spectrum: &SampledSignal) -> f64 {
        let total = pairwise_map(spectrum.values.len(), &|i| spectrum.values[i].norm_sqr());
        if total == 0.0 {
            return 1.0;
        }
        let mask = self.cone_mask();
        let inside = pairwise_map(spectrum.values.len(), &|i| mask[i] * spectrum.values[i].norm_sqr());
        inside / total
    }

    /// Indicator of the covered cone on the frequency lattice.
    pub fn cone_mask(&self) -> Vec<f64> {
        let mut xi = vec![0.0; self.dim()];
        (0..self.grid.len())
            .map(|i| {
                self.grid.frequency(i, &mut xi);
                if self.cone.contains(&xi) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Admissibility density `Σ_ch Δa Δs |ψ̂(M_saᵀξ)|² / |a|^{(n²−n+1)/n}` at one ξ.
    pub fn c_psi_at(&self, xi: &[f64]) -> f64 {
        admissibility_density(&self.generator, &self.channels, xi)
    }

    pub fn dense_filter(&self, ch: usize) -> Vec<f64> {
        self.filters[ch].to_dense(self.grid.len())
    }
}

fn admissibility_density(generator: &GeneratorSpec, channels: &ChannelSet, xi: &[f64]) -> f64 {
    let n = xi.len();
    let expo = (n * n - n + 1) as f64 / n as f64;
    let mut eta = vec![0.0; n];
    let terms: Vec<f64> = channels
        .channels
        .iter()
        .map(|c| {
            msa_transpose_apply(c.a, &c.s, xi, &mut eta);
            let v = generator.eval_hat(&eta);
            v * v * c.measure / c.a.abs().powf(expo)
        })
        .collect();
    pairwise(&terms)
}

pub fn covered_cone(generator: &GeneratorSpec, channels: &ChannelSpec, grid: &SpatialGrid) -> CoveredCone {
    let n = grid.dim();
    let (r_lo, r_hi) = generator.radial_support(n);
    let nyquist: Vec<f64> = (0..n).map(|k| grid.nyquist(k)).collect();
    CoveredCone {
        xi1_min: r_hi / channels.a_max,
        xi1_max: (r_lo / channels.a_min).min(nyquist[0]),
        shear_max: channels.shear_max,
        angular: generator.angular_support(),
        r_hi,
        exponent: 1.0 - 1.0 / n as f64,
        nyquist,
    }
}

/// Uniform random probes inside the covered cone, deterministic in `seed`.
pub fn cone_probes(cone: &CoveredCone, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = cone.nyquist.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if cone.is_empty() {
        return out;
    }
    let mut attempts = 0usize;
    while out.len() < count && attempts < 1_000_000 {
        attempts += 1;
        let mag = rng.gen_range(cone.xi1_min..=cone.xi1_max);
        let x1 = if rng.gen_bool(0.5) { mag } else { -mag };
        let mut xi = vec![x1];
        for _ in 1..n {
            xi.push(mag * rng.gen_range(-cone.shear_max..=cone.shear_max));
        }
        if cone.contains(&xi) {
            out.push(xi);
        }
    }
    out
}

fn channel_filter(generator: &GeneratorSpec, grid: &SpatialGrid, c: &Channel) -> SparseFilter {
    let n = grid.dim();
    let mut xi = vec![0.0; n];
    let mut eta = vec![0.0; n];
    let mut index = Vec::new();
    let mut value = Vec::new();
    let r = signed_root(c.a, n);
    let (r_lo, r_hi) = generator.radial_support(n);
    let compact = matches!(generator.kind, GeneratorKind::Classical { .. });
    for i in 0..grid.len() {
        grid.frequency(i, &mut xi);
        if compact {
            let e1 = (c.a * xi[0]).abs();
            if e1 <= r_lo || e1 >= r_hi {
                continue;
            }
        }
        eta[0] = c.a * xi[0];
        for k in 1..n {
            eta[k] = r * (c.s[k - 1] * xi[0] + xi[k]);
        }
        let v = generator.eval_hat(&eta);
        if v != 0.0 {
            index.push(i as u32);
            value.push(v);
        }
    }
    SparseFilter { index, value }
}

/// Per-axis frequency extent of a channel's pass-band.
pub fn channel_reach(generator: &GeneratorSpec, c: &Channel) -> Vec<f64> {
    let n = c.s.len() + 1;
    let (_, r_hi) = generator.radial_support(n);
    let um = generator.angular_support();
    let x1 = r_hi / c.a.abs();
    let mut out = vec![x1];
    out.extend(c.s.iter().map(|s| (s.abs() + um * shear_gain(c.a, n)) * x1));
    out
}

fn channel_band(generator: &GeneratorSpec, grid: &SpatialGrid, c: &Channel, f: &SparseFilter) -> ChannelBand {
    let n = grid.dim();
    let exceeds = channel_reach(generator, c).iter().enumerate().any(|(k, r)| *r > grid.nyquist(k));
    let discrete = grid.freq_cell_volume() * pairwise_map(f.value.len(), &|i| f.value[i] * f.value[i]);
    let continuous = generator.hat_norm_sq(n) / abs_det_scaling(c.a, n);
    let captured = if continuous > 0.0 { (discrete / continuous).min(1.0) } else { 0.0 };
    ChannelBand { exceeds_nyquist: exceeds, captured }
}

pub fn build_system(
    generator: &GeneratorSpec,
    grid: &SpatialGrid,
    channels: &ChannelSpec,
    options: &BuildOptions,
) -> Result<ShearletSystem> {
    let n = grid.dim();
    generator.validate(n)?;
    let set = channel_set(channels, n)?;
    let filters: Vec<SparseFilter> = set.channels.par_iter().map(|c| channel_filter(generator, grid, c)).collect();
    let bands: Vec<ChannelBand> =
        set.channels.iter().zip(&filters).map(|(c, f)| channel_band(generator, grid, c, f)).collect();
    let offending: Vec<usize> = bands.iter().enumerate().filter(|(_, b)| b.exceeds_nyquist).map(|(i, _)| i).collect();
    if options.band_policy == BandPolicy::Strict && !offending.is_empty() {
        let list = offending
            .iter()
            .map(|&i| format!("#{i}(a={:.4},s={:?})", set.channels[i].a, set.channels[i].s))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::Aliasing { count: offending.len(), channels: list });
    }
    let cone = covered_cone(generator, channels, grid);
    let probes = cone_probes(&cone, options.probes, options.probe_seed);
    let mut system = ShearletSystem {
        generator: generator.clone(),
        channels: set,
        grid: grid.clone(),
        options: options.clone(),
        filters,
        bands,
        cone,
        admissibility: AdmissibilityResult {
            c_psi: 0.0,
            probes: Vec::new(),
            c_psi_field: Vec::new(),
            coefficient_of_variation: 0.0,
            excluded_probes: 0,
            truncation_note: String::new(),
        },
    };
    system.admissibility = admissibility(&system, &probes);
    Ok(system)
}

pub fn admissibility(system: &ShearletSystem, probes: &[Vec<f64>]) -> AdmissibilityResult {
    let (inside, outside): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) =
        probes.iter().partition(|xi| system.cone.contains(xi));
    let field: Vec<f64> = inside.par_iter().map(|xi| system.c_psi_at(xi)).collect();
    let count = field.len().max(1) as f64;
    let mean = pairwise(&field) / count;
    let var = pairwise(&field.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>()) / count;
    let cv = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };
    let truncated = system.bands.iter().filter(|b| b.exceeds_nyquist).count();
    let dead = system.bands.iter().filter(|b| b.captured < 1e-12).count();
    let spec = &system.channels.spec;
    let mut note = format!(
        "(a,s) truncated to [{}, {}] x [-{}, {}]^{}; covered |xi_1| in [{:.4}, {:.4}]",
        spec.a_min,
        spec.a_max,
        spec.shear_max,
        spec.shear_max,
        system.dim() - 1,
        system.cone.xi1_min,
        system.cone.xi1_max
    );
    if truncated > 0 {
        note.push_str(&format!("; {truncated} channel(s) cut at Nyquist ({dead} fully outside)"));
    }
    if !outside.is_empty() {
        note.push_str(&format!("; {} probe(s) outside the covered cone excluded", outside.len()));
    }
    AdmissibilityResult {
        c_psi: mean,
        probes: inside.into_iter().cloned().collect(),
        c_psi_field: field,
        coefficient_of_variation: cv,
        excluded_probes: outside.len(),
        truncation_note: note,
    }
}

/// Rescale the generator amplitude so that the probe-averaged C_ψ becomes 1.
pub fn normalize_system(system: &ShearletSystem) -> Result<ShearletSystem> {
    let c = system.c_psi();
    if !(c > 0.0) {
        return Err(Error::Precondition("cannot normalize a system with c_psi = 0".into()));
    }
    let mut generator = system.generator.clone();
    generator.amplitude *= c.powf(-0.5);
    let filters: Vec<SparseFilter> = system
        .channels
        .channels
        .par_iter()
        .map(|ch| channel_filter(&generator, &system.grid, ch))
        .collect();
    let mut out = ShearletSystem { generator, filters, ..system.clone() };
    out.admissibility = admissibility(&out, &system.admissibility.probes);
    Ok(out)
}

pub fn manifest(system: &ShearletSystem) -> serde_json::Value {
    let ch = &system.channels;
    json!({
        "generator": system.generator,
        "grid": {
            "n": system.dim(),
            "half_extent": system.grid.half_extents(),
            "samples": system.grid.sizes(),
        },
        "channels": {
            "spec": ch.spec,
            "count": ch.channels.len(),
            "scale_nodes": ch.scale_nodes,
            "scale_weights": ch.scale_weights,
            "shear_nodes": ch.shear_nodes,
            "shear_weights": ch.shear_weights,
            "truncated_at_nyquist": system.bands.iter().filter(|b| b.exceeds_nyquist).count(),
        },
        "covered_cone": system.cone,
        "c_psi": system.admissibility.c_psi,
        "coefficient_of_variation": system.admissibility.coefficient_of_variation,
        "probes_used": system.admissibility.probes.len(),
        "truncation_note": system.admissibility.truncation_note,
    })
}

/// Frequency-domain samples of ψ̂ on the grid lattice (for inspection/tests).
pub fn evaluate_generator_hat(spec: &GeneratorSpec, points: &[Vec<f64>]) -> Vec<f64> {
    points.iter().map(|p| spec.eval_hat(p)).collect()
}

/// ψ̂ sampled on the full frequency lattice of a grid.
pub fn generator_spectrum(spec: &GeneratorSpec, grid: &SpatialGrid) -> SampledSignal {
    SampledSignal::from_fn(grid, Domain::Frequency, |xi| num_complex::Complex64::new(spec.eval_hat(xi), 0.0))
}
