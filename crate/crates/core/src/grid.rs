//! Periodic sampling grids, the e^{-2πiξ·x} Fourier transform on them, test
//! signals, weight fields, region masks and discrete weighted norms.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::sum::pairwise_map;

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid {
    half_extents: Vec<f64>,
    sizes: Vec<usize>,
}

impl SpatialGrid {
    /// Isotropic grid: `size` samples per axis on `[-l, l)`.
    pub fn new(n: usize, l: f64, size: usize) -> Result<Self> {
        Self::with_axes(vec![l; n], vec![size; n])
    }

    pub fn with_axes(half_extents: Vec<f64>, sizes: Vec<usize>) -> Result<Self> {
        if half_extents.len() != sizes.len() || sizes.len() < 2 {
            return Err(Error::Grid("need matching per-axis extents and sizes, n >= 2".into()));
        }
        for (&l, &size) in half_extents.iter().zip(&sizes) {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Grid(format!("half-extent must be positive, got {l}")));
            }
            if size < 16 || !size.is_power_of_two() {
                return Err(Error::Grid(format!("sample count must be a power of two >= 16, got {size}")));
            }
        }
        Ok(Self { half_extents, sizes })
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, axis: usize) -> usize {
        self.sizes[axis]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn half_extent(&self, axis: usize) -> f64 {
        self.half_extents[axis]
    }

    pub fn half_extents(&self) -> &[f64] {
        &self.half_extents
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_extents[axis] / self.sizes[axis] as f64
    }

    pub fn freq_spacing(&self, axis: usize) -> f64 {
        0.5 / self.half_extents[axis]
    }

    /// Largest representable |ξ_k|, i.e. `N/(4L)`.
    pub fn nyquist(&self, axis: usize) -> f64 {
        0.5 / self.spacing(axis)
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> Vec<usize> {
        let n = self.dim();
        let mut strides = vec![1; n];
        for k in (0..n - 1).rev() {
            strides[k] = strides[k + 1] * self.sizes[k + 1];
        }
        strides
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    pub fn freq_cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.freq_spacing(k)).product()
    }

    pub fn cell_volume_for(&self, d: Domain) -> f64 {
        match d {
            Domain::Spatial => self.cell_volume(),
            Domain::Frequency => self.freq_cell_volume(),
        }
    }

    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            out[k] = idx % self.sizes[k];
            idx /= self.sizes[k];
        }
    }

    pub fn point(&self, mut idx: usize, out: &mut [f64]) {
        for k in (0..self.dim()).rev() {
            let j = idx % self.sizes[k];
            idx /= self.sizes[k];
            out[k] = -self.half_extents[k] + j as f64 * self.spacing(k);
        }
    }

    /// Physical frequency of a lattice index in the unshifted DFT layout.
    pub fn frequency(&self, mut idx: usize, out: &mut [f64]) {
        for k in (0..self.dim()).rev() {
            let size = self.sizes[k];
            let j = idx % size;
            idx /= size;
            out[k] = signed_index(j, size) as f64 * self.freq_spacing(k);
        }
    }

    pub fn coords(&self, d: Domain, idx: usize, out: &mut [f64]) {
        match d {
            Domain::Spatial => self.point(idx, out),
            Domain::Frequency => self.frequency(idx, out),
        }
    }

    /// Linear index of x = 0 in the spatial layout.
    pub fn spatial_origin(&self) -> usize {
        let strides = self.strides();
        (0..self.dim()).map(|k| self.sizes[k] / 2 * strides[k]).sum()
    }

    /// Index shift corresponding to a spatial translation by whole cells.
    pub fn shift_index(&self, idx: usize, cells: &[i64]) -> usize {
        let mut m = vec![0; self.dim()];
        self.unravel(idx, &mut m);
        let strides = self.strides();
        (0..self.dim())
            .map(|k| (m[k] as i64 + cells[k]).rem_euclid(self.sizes[k] as i64) as usize * strides[k])
            .sum()
    }
}

fn signed_index(j: usize, size: usize) -> i64 {
    if j < size / 2 {
        j as i64
    } else {
        j as i64 - size as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Spatial,
    Frequency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub domain: Domain,
    pub notes: Vec<String>,
}

impl SampledSignal {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, domain, notes: Vec::new() })
    }

    pub fn zeros(grid: &SpatialGrid, domain: Domain) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            domain,
            notes: Vec::new(),
        }
    }

    pub fn from_fn(grid: &SpatialGrid, domain: Domain, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.coords(domain, i, &mut x);
                f(&x)
            })
            .collect();
        Self { grid: grid.clone(), values, domain, notes: Vec::new() }
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.cell_volume_for(self.domain) * pairwise_map(self.values.len(), &|i| self.values[i].norm_sqr())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    /// `h^n Σ f conj(g)`.
    pub fn inner(&self, other: &SampledSignal) -> Complex64 {
        let dv = self.grid.cell_volume_for(self.domain);
        let re = pairwise_map(self.values.len(), &|i| (self.values[i] * other.values[i].conj()).re);
        let im = pairwise_map(self.values.len(), &|i| (self.values[i] * other.values[i].conj()).im);
        Complex64::new(re, im) * dv
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Cached per-axis FFT plans plus the phase pattern that accounts for the
/// `-L` grid offset. Shareable across threads.
#[derive(Clone)]
pub struct FourierPlan {
    grid: SpatialGrid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    parity: Vec<f64>,
}

impl FourierPlan {
    pub fn new(grid: &SpatialGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid.sizes().iter().map(|&s| planner.plan_fft_forward(s)).collect();
        let inverse = grid.sizes().iter().map(|&s| planner.plan_fft_inverse(s)).collect();
        let mut m = vec![0; grid.dim()];
        let parity = (0..grid.len())
            .map(|i| {
                grid.unravel(i, &mut m);
                if m.iter().sum::<usize>() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        Self { grid: grid.clone(), forward, inverse, parity }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// `f̂(ξ_m) = h^n (-1)^{Σm} DFT[f]_m`, the Riemann sum of ∫f e^{-2πiξ·x}dx.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        run_axes(&self.grid, &self.forward, data);
        let scale = self.grid.cell_volume();
        for (v, p) in data.iter_mut().zip(&self.parity) {
            *v *= scale * p;
        }
    }

    /// Exact inverse of [`Self::forward_in_place`].
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        let scale = self.grid.freq_cell_volume();
        for (v, p) in data.iter_mut().zip(&self.parity) {
            *v *= scale * p;
        }
        run_axes(&self.grid, &self.inverse, data);
    }
}

fn run_axes(grid: &SpatialGrid, plans: &[Arc<dyn Fft<f64>>], data: &mut [Complex64]) {
    let total = data.len();
    let strides = grid.strides();
    let max_scratch = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
    let mut scratch = vec![Complex64::new(0.0, 0.0); max_scratch];
    for (k, plan) in plans.iter().enumerate() {
        let nk = grid.size(k);
        let stride = strides[k];
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = nk * stride;
        let mut buf = vec![Complex64::new(0.0, 0.0); block];
        for o in 0..total / block {
            let chunk = &mut data[o * block..(o + 1) * block];
            for i in 0..nk {
                for j in 0..stride {
                    buf[j * nk + i] = chunk[i * stride + j];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..nk {
                for j in 0..stride {
                    chunk[i * stride + j] = buf[j * nk + i];
                }
            }
        }
    }
}

pub fn fourier(signal: &SampledSignal, direction: Direction) -> Result<SampledSignal> {
    let expected = match direction {
        Direction::Forward => Domain::Spatial,
        Direction::Inverse => Domain::Frequency,
    };
    if signal.domain != expected {
        return Err(Error::Precondition(format!(
            "{direction:?} transform expects a {expected:?} signal, got {:?}",
            signal.domain
        )));
    }
    let plan = FourierPlan::new(&signal.grid);
    let mut out = signal.clone();
    match direction {
        Direction::Forward => {
            plan.forward_in_place(&mut out.values);
            out.domain = Domain::Frequency;
        }
        Direction::Inverse => {
            plan.inverse_in_place(&mut out.values);
            out.domain = Domain::Spatial;
        }
    }
    Ok(out)
}

/// Modulated, optionally Hermite-weighted Gaussian
/// `∏ H_{k_i}(√(2π)(x_i−c_i)/σ_i) · exp{−π Σ (x_i−c_i)²/σ_i²} · e^{2πi x·ν}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    #[serde(default)]
    pub label: String,
    pub center: Vec<f64>,
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub modulation: Vec<f64>,
    #[serde(default)]
    pub hermite: Vec<u32>,
}

impl GaussianSpec {
    pub fn isotropic(n: usize, sigma: f64) -> Self {
        Self {
            label: String::new(),
            center: vec![0.0; n],
            sigma: vec![sigma; n],
            modulation: vec![0.0; n],
            hermite: Vec::new(),
        }
    }

    pub fn with_modulation(mut self, nu: &[f64]) -> Self {
        self.modulation = nu.to_vec();
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Spec of `c^{-n/2} f(x/c)`.
    pub fn dilated(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.center.iter_mut().for_each(|x| *x *= c);
        out.sigma.iter_mut().for_each(|x| *x *= c);
        out.modulation.iter_mut().for_each(|x| *x /= c);
        out
    }

    fn modulation_at(&self, k: usize) -> f64 {
        self.modulation.get(k).copied().unwrap_or(0.0)
    }

    fn order_at(&self, k: usize) -> u32 {
        self.hermite.get(k).copied().unwrap_or(0)
    }

    /// Standard deviation of |f|² along an axis (Hermite factors widen it).
    pub fn spatial_std(&self, k: usize) -> f64 {
        let base = self.sigma[k] / (2.0 * PI.sqrt());
        base * (2.0 * self.order_at(k) as f64 + 1.0).sqrt()
    }

    /// Standard deviation of |f̂|² along an axis.
    pub fn spectral_std(&self, k: usize) -> f64 {
        let base = 1.0 / (2.0 * PI.sqrt() * self.sigma[k]);
        base * (2.0 * self.order_at(k) as f64 + 1.0).sqrt()
    }
}

fn hermite_poly(k: u32, u: f64) -> f64 {
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

/// Chernoff upper bound `erfc(z) ≤ e^{−z²}` for z ≥ 0; 2 otherwise.
fn erfc_bound(z: f64) -> f64 {
    if z <= 0.0 {
        2.0
    } else {
        (-z * z).exp()
    }
}

/// Largest tail mass of |f|² outside the grid box allowed by [`gaussian_signal`].
pub const TAIL_MASS_LIMIT: f64 = 1e-12;

pub fn gaussian_signal(grid: &SpatialGrid, spec: &GaussianSpec, normalize: bool) -> Result<SampledSignal> {
    let n = grid.dim();
    if spec.center.len() != n || spec.sigma.len() != n {
        return domain(format!("Gaussian spec must have {n} center and sigma entries"));
    }
    if spec.modulation.len() > n || spec.hermite.len() > n {
        return domain("modulation/hermite vectors longer than the dimension");
    }
    if spec.sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return domain("Gaussian widths must be positive");
    }
    let mut inside = 1.0;
    for k in 0..n {
        let sd = spec.spatial_std(k) * 2f64.sqrt();
        let l = grid.half_extent(k);
        let c = spec.center[k];
        let tail = 0.5 * erfc_bound((l - c) / sd) + 0.5 * erfc_bound((l + c) / sd);
        inside *= 1.0 - tail;
    }
    let tail = 1.0 - inside;
    if tail >= TAIL_MASS_LIMIT {
        return Err(Error::Support(format!(
            "Gaussian tail mass {tail:.3e} outside the grid exceeds {TAIL_MASS_LIMIT:.0e}"
        )));
    }
    let mut out = SampledSignal::from_fn(grid, Domain::Spatial, |x| {
        let mut env = 1.0;
        let mut phase = 0.0;
        for k in 0..n {
            let d = (x[k] - spec.center[k]) / spec.sigma[k];
            env *= (-PI * d * d).exp();
            let order = spec.order_at(k);
            if order > 0 {
                env *= hermite_poly(order, (2.0 * PI).sqrt() * d);
            }
            phase += x[k] * spec.modulation_at(k);
        }
        Complex64::from_polar(env, 2.0 * PI * phase)
    });
    let mut spectral_tail = 0.0f64;
    for k in 0..n {
        let nu = spec.modulation_at(k);
        let sd = spec.spectral_std(k) * 2f64.sqrt();
        let ny = grid.nyquist(k);
        spectral_tail += 0.5 * erfc_bound((ny - nu) / sd) + 0.5 * erfc_bound((ny + nu) / sd);
    }
    if spectral_tail > 1e-10 {
        out.notes.push(format!("spectral tail beyond Nyquist ~{spectral_tail:.2e}"));
    }
    if normalize {
        let norm = out.norm_sq().sqrt();
        if norm == 0.0 {
            return domain("cannot normalize a zero signal");
        }
        for v in &mut out.values {
            *v /= norm;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "snake_case")]
pub enum WeightKind {
    /// `|t|^p`, p ≥ 0
    SpatialPower(f64),
    /// `ln|t|`
    SpatialLog,
    /// `ln((1+|t|²)/2)`
    SpatialLogSobolev,
    /// `|ξ|^p`, p > −n
    FrequencyPower(f64),
    /// `ln|ξ|`
    FrequencyLog,
}

impl WeightKind {
    pub fn domain(&self) -> Domain {
        match self {
            WeightKind::SpatialPower(_) | WeightKind::SpatialLog | WeightKind::SpatialLogSobolev => Domain::Spatial,
            WeightKind::FrequencyPower(_) | WeightKind::FrequencyLog => Domain::Frequency,
        }
    }

    /// Negative powers and logarithms; smooth weights keep their point value.
    pub fn singular_at_origin(&self) -> bool {
        match *self {
            WeightKind::SpatialPower(p) | WeightKind::FrequencyPower(p) => p < 0.0,
            WeightKind::SpatialLog | WeightKind::FrequencyLog => true,
            WeightKind::SpatialLogSobolev => false,
        }
    }

    fn radial(&self, r: f64) -> f64 {
        match *self {
            WeightKind::SpatialPower(p) | WeightKind::FrequencyPower(p) => {
                if p == 0.0 {
                    1.0
                } else {
                    r.powf(p)
                }
            }
            WeightKind::SpatialLog | WeightKind::FrequencyLog => r.ln(),
            WeightKind::SpatialLogSobolev => (0.5 * (1.0 + r * r)).ln(),
        }
    }

    /// `∫₀¹ g(τρ) τ^{n−1} dτ` for the radial profile g, where closed forms exist.
    fn radial_moment(&self, rho: f64, n: usize) -> Option<f64> {
        let nf = n as f64;
        match *self {
            WeightKind::SpatialPower(p) | WeightKind::FrequencyPower(p) => Some(rho.powf(p) / (p + nf)),
            WeightKind::SpatialLog | WeightKind::FrequencyLog => Some(rho.ln() / nf - 1.0 / (nf * nf)),
            WeightKind::SpatialLogSobolev => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    pub kind: WeightKind,
    pub domain: Domain,
    pub values: Vec<f64>,
}

const CELL_RULE_ORDER: usize = 24;

/// Mean of a radial weight over the box `∏[−δ_k, δ_k]`, by splitting the box
/// into 2n pyramids with apex at the origin. The radial integral is exact; the
/// remaining face integral has a smooth integrand and uses Gauss-Legendre.
pub fn origin_cell_average(kind: WeightKind, half_widths: &[f64]) -> f64 {
    let n = half_widths.len();
    let volume: f64 = half_widths.iter().map(|d| 2.0 * d).product();
    let mut total = 0.0;
    for axis in 0..n {
        let others: Vec<usize> = (0..n).filter(|&k| k != axis).collect();
        let rules: Vec<(Vec<f64>, Vec<f64>)> = others
            .iter()
            .map(|&k| quad::mapped(CELL_RULE_ORDER, -half_widths[k], half_widths[k]))
            .collect();
        let count = CELL_RULE_ORDER.pow(others.len() as u32);
        let mut face = 0.0;
        for c in 0..count {
            let mut rest = c;
            let mut w = 1.0;
            let mut r2 = half_widths[axis] * half_widths[axis];
            for (x, wts) in &rules {
                let j = rest % CELL_RULE_ORDER;
                rest /= CELL_RULE_ORDER;
                w *= wts[j];
                r2 += x[j] * x[j];
            }
            let rho = r2.sqrt();
            let moment = kind.radial_moment(rho, n).unwrap_or_else(|| {
                let (t, tw) = quad::mapped(CELL_RULE_ORDER, 0.0, 1.0);
                t.iter().zip(&tw).map(|(t, tw)| tw * kind.radial(t * rho) * t.powi(n as i32 - 1)).sum()
            });
            face += w * moment;
        }
        total += 2.0 * half_widths[axis] * face;
    }
    total / volume
}

pub fn weight_field(grid: &SpatialGrid, kind: WeightKind) -> Result<WeightField> {
    let n = grid.dim();
    match kind {
        WeightKind::SpatialPower(p) if !(p >= 0.0) => return domain(format!("spatial power must be >= 0, got {p}")),
        WeightKind::FrequencyPower(p) if !(p > -(n as f64)) => {
            return domain(format!("frequency power must exceed -n, got {p}"))
        }
        _ => {}
    }
    let d = kind.domain();
    let mut x = vec![0.0; n];
    let mut values: Vec<f64> = (0..grid.len())
        .map(|i| {
            grid.coords(d, i, &mut x);
            kind.radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
        })
        .collect();
    let (origin, half): (usize, Vec<f64>) = match d {
        Domain::Spatial => (grid.spatial_origin(), (0..n).map(|k| 0.5 * grid.spacing(k)).collect()),
        Domain::Frequency => (0, (0..n).map(|k| 0.5 * grid.freq_spacing(k)).collect()),
    };
    if kind.singular_at_origin() {
        values[origin] = origin_cell_average(kind, &half);
    }
    Ok(WeightField { kind, domain: d, values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Empty,
    Ball { center: Vec<f64>, radius: f64 },
    Box { center: Vec<f64>, half_widths: Vec<f64> },
}

impl RegionSpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        RegionSpec::Ball { center, radius }
    }

    pub fn boxed(center: Vec<f64>, half_widths: Vec<f64>) -> Self {
        RegionSpec::Box { center, half_widths }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            RegionSpec::Empty => Ok(()),
            RegionSpec::Ball { center, radius } => {
                if center.len() != n || !(*radius > 0.0) {
                    return domain("ball needs an n-vector center and a positive radius");
                }
                Ok(())
            }
            RegionSpec::Box { center, half_widths } => {
                if center.len() != n || half_widths.len() != n || half_widths.iter().any(|w| !(*w > 0.0)) {
                    return domain("box needs n-vector center and positive half-widths");
                }
                Ok(())
            }
        }
    }

    /// Lebesgue measure in closed form.
    pub fn measure(&self, n: usize) -> f64 {
        match self {
            RegionSpec::Empty => 0.0,
            RegionSpec::Ball { radius, .. } => {
                let nf = n as f64;
                PI.powf(nf / 2.0) * radius.powf(nf) / crate::specfun::gamma(nf / 2.0 + 1.0).unwrap()
            }
            RegionSpec::Box { half_widths, .. } => half_widths.iter().map(|w| 2.0 * w).product(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            RegionSpec::Empty => false,
            RegionSpec::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
            }
            RegionSpec::Box { center, half_widths } => {
                x.iter().zip(center).zip(half_widths).all(|((a, c), w)| (a - c).abs() <= *w)
            }
        }
    }

    /// Same shape with measure multiplied by `factor`.
    pub fn scaled_measure(&self, factor: f64, n: usize) -> Self {
        let lin = factor.powf(1.0 / n as f64);
        match self {
            RegionSpec::Empty => RegionSpec::Empty,
            RegionSpec::Ball { center, radius } => RegionSpec::Ball { center: center.clone(), radius: radius * lin },
            RegionSpec::Box { center, half_widths } => RegionSpec::Box {
                center: center.clone(),
                half_widths: half_widths.iter().map(|w| w * lin).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionMask {
    pub mask: Vec<f64>,
    /// Closed-form measure of the region itself (not of the mask).
    pub measure: f64,
    pub warnings: Vec<String>,
}

pub fn region_mask(grid: &SpatialGrid, region: &RegionSpec, complement: bool, on: Domain) -> Result<RegionMask> {
    let n = grid.dim();
    region.validate(n)?;
    let mut x = vec![0.0; n];
    let mut hits = 0usize;
    let mask = (0..grid.len())
        .map(|i| {
            grid.coords(on, i, &mut x);
            let inside = region.contains(&x);
            hits += inside as usize;
            if inside != complement {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if hits == 0 && !matches!(region, RegionSpec::Empty) {
        warnings.push("region does not intersect the sampled domain".into());
    }
    Ok(RegionMask { mask, measure: region.measure(n), warnings })
}

/// `dV Σ w |f|²` with the cell volume of the signal's domain.
pub fn weighted_norm_sq(signal: &SampledSignal, weights: &[f64]) -> Result<f64> {
    if weights.len() != signal.values.len() {
        return Err(Error::Grid(format!(
            "weight length {} does not match signal length {}",
            weights.len(),
            signal.values.len()
        )));
    }
    let dv = signal.grid.cell_volume_for(signal.domain);
    Ok(dv * pairwise_map(weights.len(), &|i| weights[i] * signal.values[i].norm_sqr()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientNorm {
    /// `∫|ξ|²|f̂|² dξ`
    pub spectral: f64,
    /// `∫|∇f|² dx = (2π)² ∫|ξ|²|f̂|² dξ`
    pub calculus: f64,
}

pub fn spectral_gradient_norm_sq(signal: &SampledSignal) -> Result<GradientNorm> {
    let spectrum = fourier(signal, Direction::Forward)?;
    let w = weight_field(&signal.grid, WeightKind::FrequencyPower(2.0))?;
    let spectral = weighted_norm_sq(&spectrum, &w.values)?;
    Ok(GradientNorm { spectral, calculus: 4.0 * PI * PI * spectral })
}

pub const SIGNAL_MAGIC: &[u8; 4] = b"SHSG";
pub const SIGNAL_VERSION: u16 = 1;

/// Header: magic, version (u16), n (u32), N per axis (u32), L per axis (f64);
/// then interleaved (re, im) f64 samples in row-major order. Little-endian.
pub fn write_signal(w: &mut impl Write, signal: &SampledSignal) -> Result<()> {
    w.write_all(SIGNAL_MAGIC)?;
    w.write_all(&SIGNAL_VERSION.to_le_bytes())?;
    write_grid_header(w, &signal.grid)?;
    write_complex(w, &signal.values)
}

pub fn read_signal(r: &mut impl Read) -> Result<SampledSignal> {
    expect_magic(r, SIGNAL_MAGIC)?;
    let version = read_u16(r)?;
    if version != SIGNAL_VERSION {
        return Err(Error::Format(format!("unsupported signal dump version {version}")));
    }
    let grid = read_grid_header(r)?;
    let values = read_complex(r, grid.len())?;
    SampledSignal::new(grid, values, Domain::Spatial)
}

pub(crate) fn write_grid_header(w: &mut impl Write, grid: &SpatialGrid) -> Result<()> {
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for &s in grid.sizes() {
        w.write_all(&(s as u32).to_le_bytes())?;
    }
    for &l in grid.half_extents() {
        w.write_all(&l.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_grid_header(r: &mut impl Read) -> Result<SpatialGrid> {
    let n = read_u32(r)? as usize;
    if !(2..=8).contains(&n) {
        return Err(Error::Format(format!("implausible dimension {n}")));
    }
    let sizes = (0..n).map(|_| read_u32(r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let ls = (0..n).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    SpatialGrid::with_axes(ls, sizes)
}

pub(crate) fn write_complex(w: &mut impl Write, values: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub(crate) fn read_complex(r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect())
}

pub(crate) fn expect_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!("bad magic {m:?}, expected {magic:?}")));
    }
    Ok(())
}

pub(crate) fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
