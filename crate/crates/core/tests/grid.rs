use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use shearlet_core::grid::*;
use shearlet_core::Error;

fn grid2() -> SpatialGrid {
    SpatialGrid::new(2, 8.0, 128).unwrap()
}

fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn unit_gaussian(grid: &SpatialGrid) -> SampledSignal {
    SampledSignal::from_fn(grid, Domain::Spatial, |x| {
        Complex64::new((-PI * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })
}

#[test]
fn grid_examples() {
    let g = grid2();
    assert_eq!(g.spacing(0), 0.125);
    assert_eq!(g.freq_spacing(0), 0.0625);
    let fine = SpatialGrid::new(2, 8.0, 256).unwrap();
    assert_eq!(fine.spacing(1), 0.0625);
    assert_eq!(fine.freq_spacing(1), 0.0625);
    assert_eq!(SpatialGrid::new(3, 4.0, 32).unwrap().cell_volume(), 0.015625);
    assert!(SpatialGrid::new(2, 8.0, 100).is_err());
    assert!(SpatialGrid::new(2, 8.0, 8).is_err());
    assert!(SpatialGrid::new(2, 0.0, 64).is_err());
    let mut x = [0.0; 2];
    g.point(0, &mut x);
    assert_eq!(x, [-8.0, -8.0]);
    g.point(g.spatial_origin(), &mut x);
    assert_eq!(x, [0.0, 0.0]);
}

#[test]
fn gaussian_is_self_dual() {
    let g = grid2();
    let f = unit_gaussian(&g);
    let fh = fourier(&f, Direction::Forward).unwrap();
    let expect = SampledSignal::from_fn(&g, Domain::Frequency, |xi| {
        Complex64::new((-PI * xi.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    });
    assert!(max_err(&fh.values, &expect.values) <= 1e-8);
    assert!((fh.norm_sq() - f.norm_sq()).abs() <= 1e-10);
    let back = fourier(&fh, Direction::Inverse).unwrap();
    assert!(max_err(&back.values, &f.values) <= 1e-12);
    assert!(matches!(fourier(&fh, Direction::Forward), Err(Error::Precondition(_)) | Err(Error::Domain(_))));
}

#[test]
fn translation_multiplies_by_phase() {
    let g = grid2();
    let tau = [0.75, -1.25];
    let f = unit_gaussian(&g);
    let shifted = SampledSignal::from_fn(&g, Domain::Spatial, |x| {
        let r2 = (x[0] - tau[0]).powi(2) + (x[1] - tau[1]).powi(2);
        Complex64::new((-PI * r2).exp(), 0.0)
    });
    let a = fourier(&f, Direction::Forward).unwrap();
    let b = fourier(&shifted, Direction::Forward).unwrap();
    let mut xi = [0.0; 2];
    let err = (0..g.len())
        .map(|i| {
            g.frequency(i, &mut xi);
            let phase = Complex64::from_polar(1.0, -2.0 * PI * (xi[0] * tau[0] + xi[1] * tau[1]));
            (b.values[i] - a.values[i] * phase).norm()
        })
        .fold(0.0, f64::max);
    assert!(err <= 1e-8, "{err}");
}

#[test]
fn modulation_shifts_spectrum() {
    let g = grid2();
    let nu = [1.5, -0.625];
    let plain = gaussian_signal(&g, &GaussianSpec::isotropic(2, 1.0), true).unwrap();
    let modulated = gaussian_signal(&g, &GaussianSpec::isotropic(2, 1.0).with_modulation(&nu), true).unwrap();
    let a = fourier(&plain, Direction::Forward).unwrap();
    let b = fourier(&modulated, Direction::Forward).unwrap();
    let cells = [-(nu[0] / g.freq_spacing(0)) as i64, -(nu[1] / g.freq_spacing(1)) as i64];
    let mut xi = [0.0; 2];
    let mut err: f64 = 0.0;
    for i in 0..g.len() {
        g.frequency(i, &mut xi);
        if xi[0].abs() > 5.0 || xi[1].abs() > 5.0 {
            continue;
        }
        // f̂_ν(ξ + ν) = f̂(ξ); compare at the shifted lattice index.
        let j = g.shift_index(i, &[-cells[0], -cells[1]]);
        err = err.max((b.values[j] - a.values[i]).norm());
    }
    assert!(err <= 1e-8, "{err}");
}

#[test]
fn gaussian_normalization_and_spreads() {
    let g = grid2();
    let f = gaussian_signal(&g, &GaussianSpec::isotropic(2, 1.0), true).unwrap();
    assert!((f.norm_sq() - 1.0).abs() <= 1e-12);
    let spec = GaussianSpec { label: String::new(), center: vec![0.0; 2], sigma: vec![2.0, 0.5], modulation: vec![], hermite: vec![] };
    let f = gaussian_signal(&g, &spec, true).unwrap();
    let fh = fourier(&f, Direction::Forward).unwrap();
    let moment = |s: &SampledSignal, axis: usize| {
        let mut x = [0.0; 2];
        let w: Vec<f64> = (0..g.len())
            .map(|i| {
                g.coords(s.domain, i, &mut x);
                x[axis] * x[axis]
            })
            .collect();
        weighted_norm_sq(s, &w).unwrap()
    };
    // σ = (2, 1/2): wider in x₁, hence narrower in ξ₁.
    assert!(moment(&f, 0) > moment(&f, 1));
    assert!(moment(&fh, 0) < moment(&fh, 1));
    assert!((moment(&f, 0) - spec.spatial_std(0).powi(2)).abs() < 1e-10);
    assert!((moment(&fh, 1) - spec.spectral_std(1).powi(2)).abs() < 1e-9, "{} {}", moment(&fh, 1), spec.spectral_std(1).powi(2));
}

#[test]
fn tail_violation_is_a_support_error() {
    let g = grid2();
    assert!(matches!(gaussian_signal(&g, &GaussianSpec::isotropic(2, 10.0), true), Err(Error::Support(_))));
    let off = GaussianSpec { center: vec![7.5, 0.0], ..GaussianSpec::isotropic(2, 1.0) };
    assert!(matches!(gaussian_signal(&g, &off, true), Err(Error::Support(_))));
}

#[test]
fn weight_examples() {
    let g = grid2();
    let w = weight_field(&g, WeightKind::SpatialPower(0.0)).unwrap();
    assert!(w.values.iter().all(|v| *v == 1.0));
    let w = weight_field(&g, WeightKind::SpatialLog).unwrap();
    let idx = g.shift_index(g.spatial_origin(), &[8, 0]);
    let mut x = [0.0; 2];
    g.point(idx, &mut x);
    assert_eq!(x, [1.0, 0.0]);
    assert_eq!(w.values[idx], 0.0);
    assert!(weight_field(&g, WeightKind::SpatialPower(-0.5)).is_err());
    assert!(weight_field(&g, WeightKind::FrequencyPower(-2.0)).is_err());
}

/// Adaptive Simpson on [a, b].
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

/// Mean of g(|x|) over [−1, 1]², by symmetry 8× the triangle 0 ≤ y ≤ x ≤ 1.
fn square_mean(g: &dyn Fn(f64) -> f64) -> f64 {
    let outer = |x: f64| if x == 0.0 { 0.0 } else { simpson(&|y| g((x * x + y * y).sqrt()), 0.0, x, 1e-13) };
    // The outer integrand is singular at 0 for ln; split off a tiny interval.
    let eps = 1e-9;
    8.0 * simpson(&outer, eps, 1.0, 1e-12) / 4.0
}

#[test]
fn origin_cell_matches_quadrature() {
    let p = origin_cell_average(WeightKind::FrequencyPower(-0.5), &[1.0, 1.0]);
    assert!((p - 1.249_986_334_329_248_3).abs() < 1e-10, "{p}");
    assert!((p - square_mean(&|r| r.powf(-0.5))).abs() < 1e-6);
    let l = origin_cell_average(WeightKind::SpatialLog, &[1.0, 1.0]);
    assert!((l + 0.368_028_246_322_579).abs() < 1e-10, "{l}");
    assert!((l - square_mean(&|r| r.ln())).abs() < 1e-6);
    let s = origin_cell_average(WeightKind::SpatialLogSobolev, &[0.5, 0.5]);
    let q = square_mean(&|r| (0.5 * (1.0 + 0.25 * r * r)).ln());
    assert!((s - q).abs() < 1e-8, "{s} {q}");
    let g = grid2();
    let w = weight_field(&g, WeightKind::FrequencyPower(-0.5)).unwrap();
    let d = 0.5 * g.freq_spacing(0);
    assert_eq!(w.values[0], origin_cell_average(WeightKind::FrequencyPower(-0.5), &[d, d]));
}

#[test]
fn origin_cell_refines_consistently() {
    // Halving the cell rescales homogeneous weights by 2^{-p} and shifts ln by −ln 2.
    for p in [-0.75, -0.25, 0.5, 2.0] {
        let k = WeightKind::FrequencyPower(p);
        let a = origin_cell_average(k, &[0.1, 0.1]);
        let b = origin_cell_average(k, &[0.05, 0.05]);
        assert!((b - a * 2f64.powf(-p)).abs() <= 1e-12 * a.abs());
    }
    let a = origin_cell_average(WeightKind::FrequencyLog, &[0.1, 0.1]);
    let b = origin_cell_average(WeightKind::FrequencyLog, &[0.05, 0.05]);
    assert!((b - (a - 2f64.ln())).abs() <= 1e-12);
}

#[test]
fn region_examples() {
    let g = grid2();
    let whole = RegionSpec::boxed(vec![0.0, 0.0], vec![8.0, 8.0]);
    let m = region_mask(&g, &whole, false, Domain::Spatial).unwrap();
    assert!(m.mask.iter().all(|v| *v == 1.0));
    assert_eq!(m.measure, 256.0);
    let ball = RegionSpec::ball(vec![0.5, 0.0], 1.0);
    let m = region_mask(&g, &ball, false, Domain::Spatial).unwrap();
    assert!((m.measure - PI).abs() < 1e-15);
    let c = region_mask(&g, &ball, true, Domain::Spatial).unwrap();
    assert!(m.mask.iter().zip(&c.mask).all(|(a, b)| a + b == 1.0));
    let far = RegionSpec::ball(vec![100.0, 0.0], 1.0);
    assert!(!region_mask(&g, &far, false, Domain::Spatial).unwrap().warnings.is_empty());
    assert_eq!(RegionSpec::Empty.measure(2), 0.0);
    assert!(RegionSpec::ball(vec![0.0], 1.0).validate(2).is_err());
}

#[test]
fn mask_measure_within_boundary_layer() {
    let g = grid2();
    let h = g.spacing(0);
    for (r, perimeter) in [
        (RegionSpec::ball(vec![0.3, -0.2], 1.0), 2.0 * PI),
        (RegionSpec::ball(vec![0.0, 0.0], 2.5), 5.0 * PI),
        (RegionSpec::boxed(vec![0.1, 0.0], vec![2.0, 1.3]), 2.0 * (4.0 + 2.6)),
    ] {
        let m = region_mask(&g, &r, false, Domain::Spatial).unwrap();
        let discrete = g.cell_volume() * m.mask.iter().sum::<f64>();
        assert!((discrete - m.measure).abs() <= 4.0 * perimeter * h, "{r:?}");
    }
}

#[test]
fn weighted_norm_examples() {
    let g = grid2();
    let f = gaussian_signal(&g, &GaussianSpec::isotropic(2, 1.0), true).unwrap();
    assert!((weighted_norm_sq(&f, &vec![1.0; g.len()]).unwrap() - 1.0).abs() <= 1e-12);
    let t2 = weight_field(&g, WeightKind::SpatialPower(2.0)).unwrap();
    // ∫|x|² e^{−2π|x|²} / ∫ e^{−2π|x|²} = n/(4π) = 1/(2π) for n = 2.
    let m2 = weighted_norm_sq(&f, &t2.values).unwrap();
    assert!((m2 - 1.0 / (2.0 * PI)).abs() < 1e-6, "{m2}");
    let ball = RegionSpec::ball(vec![0.0, 0.0], 0.7);
    let m = region_mask(&g, &ball, false, Domain::Spatial).unwrap();
    let c = region_mask(&g, &ball, true, Domain::Spatial).unwrap();
    let sum = weighted_norm_sq(&f, &m.mask).unwrap() + weighted_norm_sq(&f, &c.mask).unwrap();
    assert!((sum - f.norm_sq()).abs() <= 1e-15);
    assert!(weighted_norm_sq(&f, &[1.0; 3]).is_err());
}

#[test]
fn gradient_examples() {
    let g = grid2();
    let f = gaussian_signal(&g, &GaussianSpec::isotropic(2, 1.0), true).unwrap();
    let gn = spectral_gradient_norm_sq(&f).unwrap();
    assert!((gn.spectral - 0.159_154_943_091_895_35).abs() < 1e-9, "{}", gn.spectral);
    assert!((gn.calculus - 4.0 * PI * PI * gn.spectral).abs() < 1e-12);
    let wide = gaussian_signal(&g, &GaussianSpec::isotropic(2, 1.0).dilated(2.0), true).unwrap();
    let gw = spectral_gradient_norm_sq(&wide).unwrap();
    assert!((gw.spectral - gn.spectral / 4.0).abs() < 1e-6 * gn.spectral);
    assert_eq!(spectral_gradient_norm_sq(&SampledSignal::zeros(&g, Domain::Spatial)).unwrap().spectral, 0.0);
}

#[test]
fn signal_dump_round_trip() {
    let g = SpatialGrid::with_axes(vec![8.0, 4.0], vec![32, 16]).unwrap();
    let spec = GaussianSpec { label: String::new(), center: vec![0.5, 0.0], sigma: vec![1.5, 1.0], modulation: vec![1.0, 0.5], hermite: vec![1, 0] };
    let f = gaussian_signal(&g, &spec, true).unwrap();
    let mut buf = Vec::new();
    write_signal(&mut buf, &f).unwrap();
    assert_eq!(&buf[..4], b"SHSG");
    assert_eq!(buf.len(), 4 + 2 + 4 + 2 * 4 + 2 * 8 + 32 * 16 * 16);
    let back = read_signal(&mut buf.as_slice()).unwrap();
    assert_eq!(back.grid, f.grid);
    assert_eq!(back.values, f.values);
    buf[0] = b'X';
    assert!(read_signal(&mut buf.as_slice()).is_err());
}

fn band_limited() -> impl Strategy<Value = Vec<(f64, f64, f64, f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, 0.8f64..2.0, -3.0f64..3.0, -3.0f64..3.0), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn plancherel_on_random_signals(parts in band_limited()) {
        let g = SpatialGrid::new(2, 8.0, 64).unwrap();
        let f = SampledSignal::from_fn(&g, Domain::Spatial, |x| {
            parts.iter().map(|&(c0, c1, s, n0, n1)| {
                let r2 = (x[0] - c0).powi(2) + (x[1] - c1).powi(2);
                Complex64::from_polar((-PI * r2 / (s * s)).exp(), 2.0 * PI * (n0 * x[0] + n1 * x[1]))
            }).sum()
        });
        let fh = fourier(&f, Direction::Forward).unwrap();
        prop_assert!((fh.norm_sq() - f.norm_sq()).abs() <= 1e-10 * f.norm_sq());
        let back = fourier(&fh, Direction::Inverse).unwrap();
        prop_assert!(max_err(&back.values, &f.values) <= 1e-12 * 4.0);
    }

    #[test]
    fn region_measure_scales(r in 0.1f64..3.0, factor in 0.1f64..10.0, n in 2usize..4) {
        let ball = RegionSpec::ball(vec![0.0; n], r);
        let scaled = ball.scaled_measure(factor, n);
        prop_assert!((scaled.measure(n) - factor * ball.measure(n)).abs() <= 1e-12 * scaled.measure(n));
    }
}
