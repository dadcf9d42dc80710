//! The continuous shearlet transform on the grid: FFT filter bank, a direct
//! spatial-quadrature oracle, and the Moyal / energy / weighted spectral
//! identities.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::grid::{
    expect_magic, read_complex, read_f64, read_grid_header, read_u16, read_u32, write_complex, write_grid_header,
    Direction, Domain, FourierPlan, SampledSignal, SpatialGrid, WeightField,
};
use crate::group::{abs_det_scaling, msa_inverse_apply};
use crate::interp::PeriodicCubic;
use crate::sum::{pairwise, pairwise_map};
use crate::system::{Channel, GeneratorKind, GeneratorSpec, ShearletSystem};

/// Default ceiling for materialized coefficient fields.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    pub grid: SpatialGrid,
    pub channels: Vec<Channel>,
    /// One array per channel, in channel order (scale-major, then shear).
    pub values: Vec<Vec<Complex64>>,
    pub c_psi: f64,
}

fn check_grid(f: &SampledSignal, system: &ShearletSystem) -> Result<()> {
    if f.domain != Domain::Spatial {
        return Err(Error::Precondition("transform expects a spatial signal".into()));
    }
    if f.grid != system.grid {
        return Err(Error::Grid("signal grid does not match the system grid".into()));
    }
    Ok(())
}

/// Spectrum of a spatial signal on the system's lattice.
pub fn spectrum(f: &SampledSignal) -> Result<SampledSignal> {
    crate::grid::fourier(f, Direction::Forward)
}

/// Computes channel coefficients from a precomputed spectrum.
pub struct ChannelEngine<'a> {
    system: &'a ShearletSystem,
    plan: FourierPlan,
    spectrum: Vec<Complex64>,
}

impl<'a> ChannelEngine<'a> {
    pub fn new(f: &SampledSignal, system: &'a ShearletSystem) -> Result<Self> {
        check_grid(f, system)?;
        let plan = FourierPlan::new(&system.grid);
        let mut spec = f.values.clone();
        plan.forward_in_place(&mut spec);
        Ok(Self { system, plan, spectrum: spec })
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn plan(&self) -> &FourierPlan {
        &self.plan
    }

    /// Spectrum of the channel's coefficient function:
    /// `|det A_a|^{1/2} f̂(ξ) conj(ψ̂(M_saᵀξ))`.
    pub fn channel_spectrum(&self, ch: usize, out: &mut [Complex64]) {
        let c = &self.system.channels.channels[ch];
        let amp = abs_det_scaling(c.a, self.system.dim()).sqrt();
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let filter = &self.system.filters[ch];
        for (&i, &v) in filter.index.iter().zip(&filter.value) {
            out[i as usize] = self.spectrum[i as usize] * (amp * v);
        }
    }

    pub fn channel(&self, ch: usize, out: &mut [Complex64]) {
        self.channel_spectrum(ch, out);
        self.plan.inverse_in_place(out);
    }

    /// Runs `visit` on every channel's coefficients in parallel; results come
    /// back in channel order.
    pub fn visit<R: Send>(&self, visit: impl Fn(usize, &Channel, &[Complex64]) -> R + Sync) -> Vec<R> {
        let len = self.system.grid.len();
        (0..self.system.channel_count())
            .into_par_iter()
            .map_init(
                || vec![Complex64::new(0.0, 0.0); len],
                |buf, ch| {
                    self.channel(ch, buf);
                    visit(ch, &self.system.channels.channels[ch], buf)
                },
            )
            .collect()
    }
}

pub fn forward(f: &SampledSignal, system: &ShearletSystem) -> Result<CoefficientField> {
    forward_with_budget(f, system, DEFAULT_MEMORY_BUDGET)
}

pub fn forward_with_budget(f: &SampledSignal, system: &ShearletSystem, budget: usize) -> Result<CoefficientField> {
    let bytes = system.channel_count() * system.grid.len() * std::mem::size_of::<Complex64>();
    if bytes > budget {
        return Err(Error::Precondition(format!(
            "coefficient field needs {bytes} bytes, over the {budget}-byte budget; use the channel visitor"
        )));
    }
    let engine = ChannelEngine::new(f, system)?;
    let values = engine.visit(|_, _, c| c.to_vec());
    Ok(CoefficientField {
        grid: system.grid.clone(),
        channels: system.channels.channels.clone(),
        values,
        c_psi: system.c_psi(),
    })
}

/// `Σ_ch haar · hⁿ Σ_t w(t) |SH(ch, t)|²`.
pub fn weighted_energy(coeffs: &CoefficientField, weights: Option<&[f64]>) -> f64 {
    let dv = coeffs.grid.cell_volume();
    let per: Vec<f64> = coeffs
        .values
        .par_iter()
        .zip(&coeffs.channels)
        .map(|(v, c)| {
            let s = match weights {
                Some(w) => pairwise_map(v.len(), &|i| w[i] * v[i].norm_sqr()),
                None => pairwise_map(v.len(), &|i| v[i].norm_sqr()),
            };
            c.haar * dv * s
        })
        .collect();
    pairwise(&per)
}

pub fn energy(coeffs: &CoefficientField) -> f64 {
    weighted_energy(coeffs, None)
}

/// Spatial samples of the generator used by the direct oracle.
pub enum SpatialGenerator {
    /// Closed form (gaussian-derivative kind).
    Exact(GeneratorSpec),
    /// Inverse FFT of ψ̂ on a fine table grid, evaluated by cubic interpolation;
    /// zero outside the table box.
    Table { grid: SpatialGrid, values: Vec<Complex64> },
}

impl SpatialGenerator {
    pub fn for_generator(spec: &GeneratorSpec, n: usize) -> Result<Self> {
        match spec.kind {
            GeneratorKind::GaussianDerivative { .. } => Ok(Self::Exact(spec.clone())),
            GeneratorKind::Classical { .. } => {
                let size = if n == 2 { 1024 } else { 64 };
                let grid = SpatialGrid::new(n, 32.0, size)?;
                let mut values = crate::system::generator_spectrum(spec, &grid).values;
                FourierPlan::new(&grid).inverse_in_place(&mut values);
                Ok(Self::Table { grid, values })
            }
        }
    }

    fn eval_with(&self, table: Option<&PeriodicCubic<'_>>, y: &[f64]) -> Complex64 {
        match self {
            Self::Exact(spec) => Complex64::new(spec.eval_spatial(y).unwrap_or(0.0), 0.0),
            Self::Table { grid, .. } => {
                if (0..grid.dim()).any(|k| y[k].abs() >= grid.half_extent(k)) {
                    return Complex64::new(0.0, 0.0);
                }
                table.expect("table interpolator").eval(y)
            }
        }
    }
}

/// Upsampling factor for the oracle's quadrature grid.
pub const ORACLE_UPSAMPLE: usize = 4;

/// Precomputed trigonometric interpolant of `f` on a finer grid, for repeated
/// oracle evaluations.
pub struct OracleContext {
    fine: SampledSignal,
    psi: SpatialGenerator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleValue {
    pub value: Complex64,
    pub notes: Vec<String>,
}

impl OracleContext {
    pub fn new(f: &SampledSignal, system: &ShearletSystem, upsample: usize) -> Result<Self> {
        check_grid(f, system)?;
        if upsample == 0 || !upsample.is_power_of_two() {
            return domain("upsample factor must be a power of two");
        }
        Ok(Self { fine: upsample_signal(f, upsample)?, psi: SpatialGenerator::for_generator(&system.generator, f.grid.dim())? })
    }

    /// `hⁿ Σ f(x) conj(|det M|^{−1/2} ψ(M^{−1}(x−t)))` on the fine grid.
    pub fn eval(&self, a: f64, s: &[f64], t: &[f64]) -> Result<OracleValue> {
        let grid = &self.fine.grid;
        let n = grid.dim();
        if a == 0.0 || s.len() + 1 != n || t.len() != n {
            return domain("oracle parameters do not match the dimension");
        }
        let amp = abs_det_scaling(a, n).powf(-0.5);
        let table = match &self.psi {
            SpatialGenerator::Table { grid, values } => Some(PeriodicCubic::new(grid, values)),
            SpatialGenerator::Exact(_) => None,
        };
        let (terms, edge): (Vec<Complex64>, Vec<f64>) = (0..grid.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], vec![0.0; n], vec![0usize; n]),
                |(x, y, m), i| {
                    grid.point(i, x);
                    for k in 0..n {
                        x[k] -= t[k];
                    }
                    msa_inverse_apply(a, s, x, y);
                    let psi = self.psi.eval_with(table.as_ref(), y) * amp;
                    grid.unravel(i, m);
                    let on_edge = (0..n).any(|k| m[k] == 0 || m[k] == grid.size(k) - 1);
                    (self.fine.values[i] * psi.conj(), if on_edge { psi.norm() } else { 0.0 })
                },
            )
            .unzip();
        let re = pairwise_map(terms.len(), &|i| terms[i].re);
        let im = pairwise_map(terms.len(), &|i| terms[i].im);
        let value = Complex64::new(re, im) * grid.cell_volume();
        let mut notes = Vec::new();
        let edge_max = edge.iter().cloned().fold(0.0, f64::max);
        if edge_max > 1e-10 * amp {
            notes.push(format!("truncation: analyzing function reaches the grid boundary ({edge_max:.2e})"));
        }
        Ok(OracleValue { value, notes })
    }
}

/// Exact band-limited upsampling by zero-padding the spectrum.
pub fn upsample_signal(f: &SampledSignal, factor: usize) -> Result<SampledSignal> {
    let grid = &f.grid;
    let n = grid.dim();
    let fine_grid = SpatialGrid::with_axes(grid.half_extents().to_vec(), grid.sizes().iter().map(|s| s * factor).collect())?;
    let plan = FourierPlan::new(grid);
    let mut spec = f.values.clone();
    plan.forward_in_place(&mut spec);
    let mut fine = vec![Complex64::new(0.0, 0.0); fine_grid.len()];
    let fine_strides = fine_grid.strides();
    let mut m = vec![0usize; n];
    for (i, v) in spec.iter().enumerate() {
        grid.unravel(i, &mut m);
        let mut j = 0;
        for k in 0..n {
            let size = grid.size(k);
            let signed = if m[k] < size / 2 { m[k] as i64 } else { m[k] as i64 - size as i64 };
            let fine_size = fine_grid.size(k) as i64;
            j += (signed.rem_euclid(fine_size) as usize) * fine_strides[k];
        }
        fine[j] = *v;
    }
    FourierPlan::new(&fine_grid).inverse_in_place(&mut fine);
    let mut out = SampledSignal::new(fine_grid, fine, Domain::Spatial)?;
    out.notes = f.notes.clone();
    Ok(out)
}

pub fn direct_oracle(f: &SampledSignal, a: f64, s: &[f64], t: &[f64], system: &ShearletSystem) -> Result<OracleValue> {
    OracleContext::new(f, system, ORACLE_UPSAMPLE)?.eval(a, s, t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative_error: f64,
}

/// `Σ haar hⁿ Σ_t SH f conj(SH g)` against `c_ψ ⟨f, g⟩`; the error is relative
/// to `c_ψ ‖f‖ ‖g‖`.
pub fn moyal(f: &SampledSignal, g: &SampledSignal, system: &ShearletSystem) -> Result<IdentityCheck> {
    let ef = ChannelEngine::new(f, system)?;
    let eg = ChannelEngine::new(g, system)?;
    let len = system.grid.len();
    let dv = system.grid.cell_volume();
    let per: Vec<Complex64> = (0..system.channel_count())
        .into_par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len]),
            |(bf, bg), ch| {
                ef.channel(ch, bf);
                eg.channel(ch, bg);
                let re = pairwise_map(len, &|i| (bf[i] * bg[i].conj()).re);
                let im = pairwise_map(len, &|i| (bf[i] * bg[i].conj()).im);
                Complex64::new(re, im) * (dv * system.channels.channels[ch].haar)
            },
        )
        .collect();
    let lhs = Complex64::new(pairwise(&per.iter().map(|z| z.re).collect::<Vec<_>>()), pairwise(&per.iter().map(|z| z.im).collect::<Vec<_>>()));
    let c = system.c_psi();
    let rhs = f.inner(g) * c;
    let scale = c * (f.norm_sq() * g.norm_sq()).sqrt();
    let relative_error = if scale > 0.0 { (lhs - rhs).norm() / scale } else { (lhs - rhs).norm() };
    Ok(IdentityCheck { lhs, rhs, relative_error })
}

/// `Σ haar ∫ w(ξ) |F_t[SH f](ξ)|² dξ` against `c_ψ ∫ w |f̂|²`. The channel
/// spectra are obtained by Fourier-transforming the computed coefficients.
/// The error is relative to `c_ψ ∫ |w| |f̂|²`.
pub fn weighted_spectral_identity(f: &SampledSignal, system: &ShearletSystem, w: &WeightField) -> Result<IdentityCheck> {
    if w.domain != Domain::Frequency {
        return Err(Error::Precondition("weighted spectral identity needs a frequency weight".into()));
    }
    let engine = ChannelEngine::new(f, system)?;
    let dxi = system.grid.freq_cell_volume();
    let per = engine.visit(|_, c, coeffs| {
        let mut spec = coeffs.to_vec();
        engine.plan().forward_in_place(&mut spec);
        c.haar * dxi * pairwise_map(spec.len(), &|i| w.values[i] * spec[i].norm_sqr())
    });
    let lhs = pairwise(&per);
    let fhat = engine.spectrum();
    let c = system.c_psi();
    let rhs = c * dxi * pairwise_map(fhat.len(), &|i| w.values[i] * fhat[i].norm_sqr());
    let scale = c * dxi * pairwise_map(fhat.len(), &|i| w.values[i].abs() * fhat[i].norm_sqr());
    let relative_error = if scale > 0.0 { (lhs - rhs).abs() / scale } else { (lhs - rhs).abs() };
    Ok(IdentityCheck { lhs: Complex64::new(lhs, 0.0), rhs: Complex64::new(rhs, 0.0), relative_error })
}

pub const COEFF_MAGIC: &[u8; 4] = b"SHLC";
pub const COEFF_VERSION: u16 = 1;

/// Header: magic, version (u16), n (u32), N per axis (u32), L per axis (f64),
/// channel count (u32), then per channel a, s₁..s_{n−1}, haar weight (f64);
/// then each channel's interleaved complex f64 samples. Little-endian.
pub fn write_coefficients(w: &mut impl Write, coeffs: &CoefficientField) -> Result<()> {
    w.write_all(COEFF_MAGIC)?;
    w.write_all(&COEFF_VERSION.to_le_bytes())?;
    write_grid_header(w, &coeffs.grid)?;
    w.write_all(&(coeffs.channels.len() as u32).to_le_bytes())?;
    for c in &coeffs.channels {
        w.write_all(&c.a.to_le_bytes())?;
        for s in &c.s {
            w.write_all(&s.to_le_bytes())?;
        }
        w.write_all(&c.haar.to_le_bytes())?;
    }
    for v in &coeffs.values {
        write_complex(w, v)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientDump {
    pub grid: SpatialGrid,
    /// (a, s, haar) per channel.
    pub channels: Vec<(f64, Vec<f64>, f64)>,
    pub values: Vec<Vec<Complex64>>,
}

pub fn read_coefficients(r: &mut impl Read) -> Result<CoefficientDump> {
    expect_magic(r, COEFF_MAGIC)?;
    let version = read_u16(r)?;
    if version != COEFF_VERSION {
        return Err(Error::Format(format!("unsupported coefficient dump version {version}")));
    }
    let grid = read_grid_header(r)?;
    let count = read_u32(r)? as usize;
    let n = grid.dim();
    let mut channels = Vec::with_capacity(count);
    for _ in 0..count {
        let a = read_f64(r)?;
        let s = (0..n - 1).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
        let haar = read_f64(r)?;
        channels.push((a, s, haar));
    }
    let values = (0..count).map(|_| read_complex(r, grid.len())).collect::<Result<Vec<_>>>()?;
    Ok(CoefficientDump { grid, channels, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian_signal, GaussianSpec};

    #[test]
    fn upsampling_preserves_samples() {
        let grid = SpatialGrid::new(2, 8.0, 32).unwrap();
        let f = gaussian_signal(&grid, &GaussianSpec::isotropic(2, 2.0).with_modulation(&[0.5, 0.25]), true).unwrap();
        let fine = upsample_signal(&f, 4).unwrap();
        let strides = fine.grid.strides();
        let mut m = [0usize; 2];
        for i in (0..grid.len()).step_by(37) {
            grid.unravel(i, &mut m);
            let j = 4 * m[0] * strides[0] + 4 * m[1] * strides[1];
            assert!((fine.values[j] - f.values[i]).norm() < 1e-12);
        }
    }
}
