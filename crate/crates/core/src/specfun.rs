//! Gamma, digamma and the sharp constants built from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Euler gamma on the positive axis.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("gamma requires x > 0, got {x}"));
    }
    if x < 0.5 {
        return Ok(gamma(x + 1.0)? / x);
    }
    if x.fract() == 0.0 && x <= 23.0 {
        return Ok((1..x as u64).product::<u64>() as f64);
    }
    if x > 171.0 {
        return Ok(ln_gamma(x)?.exp());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("ln_gamma requires x > 0, got {x}"));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// ψ = Γ'/Γ by upward recurrence to x ≥ 6 and the asymptotic series through B₁₂.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("digamma requires x > 0, got {x}"));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 6.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * 691.0 / 32760.0)))));
    Ok(shift + x.ln() - 0.5 / x - series)
}

/// `C_λ = π^λ [Γ((n−λ)/4) / Γ((n+λ)/4)]²`.
pub fn pitt_constant(lambda: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return domain(format!("Pitt exponent must lie in [0, 1), got {lambda}"));
    }
    if n < 2 {
        return domain("dimension must be at least 2");
    }
    pitt_constant_unchecked(lambda, n)
}

/// Same formula without the range check on λ; used for finite differences at 0.
pub fn pitt_constant_unchecked(lambda: f64, n: usize) -> Result<f64> {
    let n = n as f64;
    let ratio = gamma((n - lambda) / 4.0)? / gamma((n + lambda) / 4.0)?;
    Ok(PI.powf(lambda) * ratio * ratio)
}

/// `C'_0 = ln π − ψ(n/4)`, the λ-derivative of `C_λ` at zero.
pub fn pitt_derivative_at_zero(n: usize) -> Result<f64> {
    if n < 2 {
        return domain("dimension must be at least 2");
    }
    Ok(PI.ln() - digamma(n as f64 / 4.0)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyConstants {
    pub n: usize,
    /// `ψ(n/4) − ln π`
    pub beckner: f64,
    /// `ψ(n/2)`
    pub sobolev: f64,
    /// `1/(4π)`, only defined for n = 2.
    pub heisenberg_stated: Option<f64>,
    /// `exp(ψ(n/4) − ln π)`
    pub heisenberg_digamma: f64,
}

pub fn uncertainty_constants(n: usize) -> Result<UncertaintyConstants> {
    if n < 2 {
        return domain("dimension must be at least 2");
    }
    let beckner = digamma(n as f64 / 4.0)? - PI.ln();
    Ok(UncertaintyConstants {
        n,
        beckner,
        sobolev: digamma(n as f64 / 2.0)?,
        heisenberg_stated: (n == 2).then(|| 1.0 / (4.0 * PI)),
        heisenberg_digamma: beckner.exp(),
    })
}
