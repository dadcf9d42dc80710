//! Shearlet group arithmetic: parabolic scaling, shearing, composition,
//! inversion, Haar weights and the unitary action on sampled functions.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::grid::{Domain, SampledSignal};
use crate::interp;

/// Real root convention used throughout: `sgn(a)|a|^{1/n}`.
pub fn signed_root(a: f64, n: usize) -> f64 {
    a.signum() * a.abs().powf(1.0 / n as f64)
}

/// Factor multiplying the second shear in the group law, `|a|^{1-1/n}`.
/// Equals `a / signed_root(a, n)`, so it is positive for both signs of `a`.
pub fn shear_gain(a: f64, n: usize) -> f64 {
    a.abs().powf(1.0 - 1.0 / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub a: f64,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
}

impl GroupElement {
    pub fn new(a: f64, s: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && a != 0.0) {
            return domain(format!("invalid scale a = {a}"));
        }
        if t.len() < 2 {
            return domain("dimension must be at least 2");
        }
        if s.len() + 1 != t.len() {
            return domain(format!(
                "shear length {} does not match dimension {}",
                s.len(),
                t.len()
            ));
        }
        Ok(Self { a, s, t })
    }

    pub fn identity(n: usize) -> Self {
        Self { a: 1.0, s: vec![0.0; n - 1], t: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn matrix(&self) -> GroupMatrix {
        msa_from_parts(self.a, &self.s)
    }
}

/// Dense row-major n×n matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMatrix {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl GroupMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn mul(&self, other: &GroupMatrix) -> GroupMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                entries[i * n + j] = acc;
            }
        }
        GroupMatrix { n, entries }
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v).map(|(m, x)| m * x).sum();
        }
    }

    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        for j in 0..self.n {
            let mut acc = 0.0;
            for i in 0..self.n {
                acc += self.get(i, j) * v[i];
            }
            out[j] = acc;
        }
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs()))
                .unwrap();
            if m[p * n + c] == 0.0 {
                return 0.0;
            }
            if p != c {
                for j in 0..n {
                    m.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let pivot = m[c * n + c];
            det *= pivot;
            for i in c + 1..n {
                let f = m[i * n + c] / pivot;
                for j in c..n {
                    m[i * n + j] -= f * m[c * n + j];
                }
            }
        }
        det
    }
}

pub fn scaling_matrix(a: f64, n: usize) -> Result<GroupMatrix> {
    if !(a.is_finite() && a != 0.0) {
        return domain(format!("invalid scale a = {a}"));
    }
    if n < 2 {
        return domain("dimension must be at least 2");
    }
    let mut m = GroupMatrix::identity(n);
    let r = signed_root(a, n);
    m.entries[0] = a;
    for k in 1..n {
        m.entries[k * n + k] = r;
    }
    Ok(m)
}

pub fn shear_matrix(s: &[f64], n: usize) -> Result<GroupMatrix> {
    if n < 2 || s.len() + 1 != n {
        return domain(format!("shear length {} does not match dimension {n}", s.len()));
    }
    let mut m = GroupMatrix::identity(n);
    m.entries[1..n].copy_from_slice(s);
    Ok(m)
}

pub fn msa_matrix(a: f64, s: &[f64], n: usize) -> Result<GroupMatrix> {
    Ok(shear_matrix(s, n)?.mul(&scaling_matrix(a, n)?))
}

/// `S_s A_a` written out: first row `(a, r s)`, diagonal `r` below, with `r = sgn(a)|a|^{1/n}`.
fn msa_from_parts(a: f64, s: &[f64]) -> GroupMatrix {
    let n = s.len() + 1;
    let r = signed_root(a, n);
    let mut m = GroupMatrix::identity(n);
    m.entries[0] = a;
    for k in 1..n {
        m.entries[k] = r * s[k - 1];
        m.entries[k * n + k] = r;
    }
    m
}

/// `M_sa^{-1} v = A_a^{-1} S_{-s} v`.
pub fn msa_inverse_apply(a: f64, s: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    let r = signed_root(a, n);
    let mut first = v[0];
    for k in 1..n {
        first -= s[k - 1] * v[k];
    }
    out[0] = first / a;
    for k in 1..n {
        out[k] = v[k] / r;
    }
}

/// `M_saᵀ ξ = (a ξ₁, r (s_k ξ₁ + ξ_k))`.
pub fn msa_transpose_apply(a: f64, s: &[f64], xi: &[f64], out: &mut [f64]) {
    let n = xi.len();
    let r = signed_root(a, n);
    out[0] = a * xi[0];
    for k in 1..n {
        out[k] = r * (s[k - 1] * xi[0] + xi[k]);
    }
}

pub fn abs_det_scaling(a: f64, n: usize) -> f64 {
    a.abs().powf((2 * n - 1) as f64 / n as f64)
}

pub fn group_compose(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    let n = g.dim();
    if h.dim() != n {
        return domain(format!("dimension mismatch: {n} vs {}", h.dim()));
    }
    let gain = shear_gain(g.a, n);
    let s = g.s.iter().zip(&h.s).map(|(x, y)| x + gain * y).collect();
    let mut mt = vec![0.0; n];
    g.matrix().apply(&h.t, &mut mt);
    let t = g.t.iter().zip(&mt).map(|(x, y)| x + y).collect();
    GroupElement::new(g.a * h.a, s, t)
}

pub fn group_inverse(g: &GroupElement) -> GroupElement {
    let n = g.dim();
    let gain = shear_gain(g.a, n);
    let s = g.s.iter().map(|x| -x / gain).collect();
    let mut t = vec![0.0; n];
    msa_inverse_apply(g.a, &g.s, &g.t, &mut t);
    for x in &mut t {
        *x = -*x;
    }
    GroupElement { a: 1.0 / g.a, s, t }
}

pub fn haar_weight(a: f64, n: usize) -> Result<f64> {
    if !(a.is_finite() && a != 0.0) {
        return domain(format!("invalid scale a = {a}"));
    }
    Ok(a.abs().powi(-(n as i32 + 1)))
}

/// Relative threshold below which samples of ψ count as outside its support
/// for the truncation check.
const SUPPORT_EPS: f64 = 1e-8;

/// `|det M|^{-1/2} ψ(M^{-1}(x - t))` on the same grid, by periodic cubic
/// interpolation of the samples of ψ.
pub fn apply_unitary(g: &GroupElement, psi: &SampledSignal) -> Result<SampledSignal> {
    let grid = &psi.grid;
    let n = grid.dim();
    if psi.domain != Domain::Spatial {
        return Err(Error::Precondition("apply_unitary expects a spatial signal".into()));
    }
    if g.dim() != n {
        return domain(format!("group dimension {} does not match grid dimension {n}", g.dim()));
    }
    let amp = abs_det_scaling(g.a, n).powf(-0.5);
    let table = interp::PeriodicCubic::new(grid, &psi.values);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut x = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut y = vec![0.0; n];
    for (idx, out) in values.iter_mut().enumerate() {
        grid.point(idx, &mut x);
        for k in 0..n {
            d[k] = x[k] - g.t[k];
        }
        msa_inverse_apply(g.a, &g.s, &d, &mut y);
        *out = table.eval(&y) * amp;
    }

    let mut notes = psi.notes.clone();
    let peak = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let m = g.matrix();
    let mut escaped = false;
    for (idx, v) in psi.values.iter().enumerate() {
        if v.norm() <= SUPPORT_EPS * peak {
            continue;
        }
        grid.point(idx, &mut y);
        m.apply(&y, &mut x);
        if (0..n).any(|k| {
            let xk = x[k] + g.t[k];
            xk < -grid.half_extent(k) || xk >= grid.half_extent(k)
        }) {
            escaped = true;
            break;
        }
    }
    if escaped {
        notes.push("truncation: transformed support exceeds the grid".into());
    }
    Ok(SampledSignal { grid: grid.clone(), values, domain: Domain::Spatial, notes })
}
