use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use shearlet_core::grid::{fourier, Direction, SpatialGrid};
use shearlet_core::group::scaling_matrix;
use shearlet_core::system::*;
use shearlet_core::Error;

fn grid() -> SpatialGrid {
    SpatialGrid::new(2, 8.0, 128).unwrap()
}

fn default_system() -> ShearletSystem {
    build_system(&GeneratorSpec::classical(), &grid(), &ChannelSpec::default_2d(), &BuildOptions::default()).unwrap()
}

#[test]
fn generator_examples() {
    let g = GeneratorSpec::classical();
    assert_eq!(evaluate_generator_hat(&g, &[vec![0.0, 0.0], vec![0.0, 1.0]]), vec![0.0, 0.0]);
    assert_eq!(evaluate_generator_hat(&g, &[vec![3.0, 0.0], vec![0.3, 0.0], vec![1.0, 1.5]]), vec![0.0; 3]);
    // Dense scan of w·v: the maximum is finite and sits inside the band.
    let (mut best, mut at) = (0.0, [0.0, 0.0]);
    for i in 0..=600 {
        for j in 0..=200 {
            let xi = [-3.0 + 0.01 * i as f64, -2.0 + 0.02 * j as f64];
            let v = g.eval_hat(&xi);
            assert!(v.is_finite() && v >= 0.0);
            if v > best {
                best = v;
                at = xi;
            }
        }
    }
    assert!(at[0].abs() >= 0.5 && at[0].abs() <= 2.0, "{at:?}");
    assert!((best - 1.0).abs() < 1e-12);
}

#[test]
fn gaussian_derivative_spatial_form_matches_fft() {
    let g = GeneratorSpec::gaussian_derivative(4, 0.9, 1.0);
    let grid = SpatialGrid::new(2, 8.0, 128).unwrap();
    let spatial = fourier(&generator_spectrum(&g, &grid), Direction::Inverse).unwrap();
    let mut y = [0.0; 2];
    let peak = spatial.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut err: f64 = 0.0;
    for i in 0..grid.len() {
        grid.point(i, &mut y);
        let v = g.eval_spatial(&y).unwrap();
        err = err.max((spatial.values[i].re - v).abs().max(spatial.values[i].im.abs()));
    }
    assert!(err <= 1e-6 * peak, "{err} vs {peak}");
    assert!(GeneratorSpec::classical().eval_spatial(&[0.0, 0.0]).is_none());
}

fn channel_at(sys: &ShearletSystem, a: f64, s: f64) -> usize {
    sys.channels.channels.iter().position(|c| c.a == a && c.s[0] == s).unwrap()
}

#[test]
fn identity_channel_is_the_generator() {
    let sys = default_system();
    let ch = channel_at(&sys, 1.0, 0.0);
    let expect = generator_spectrum(&sys.generator, &sys.grid);
    let dense = sys.dense_filter(ch);
    let d = dense.iter().zip(&expect.values).map(|(a, b)| (a - b.re).abs()).fold(0.0, f64::max);
    // Sparse storage drops values below its threshold.
    assert!(d <= 1e-15, "{d}");
}

#[test]
fn filters_use_the_transpose_action() {
    let sys = default_system();
    let g = &sys.generator;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut xi = [0.0; 2];
    for _ in 0..20 {
        let ch = rng.gen_range(0..sys.channel_count());
        let c = &sys.channels.channels[ch];
        let f = &sys.filters[ch];
        let dense = sys.dense_filter(ch);
        // Half the draws land on the support, half anywhere.
        let idx = if rng.gen_bool(0.5) && !f.index.is_empty() {
            f.index[rng.gen_range(0..f.index.len())] as usize
        } else {
            rng.gen_range(0..sys.grid.len())
        };
        sys.grid.frequency(idx, &mut xi);
        let (a, s) = (c.a, c.s[0]);
        let eta = [a * xi[0], a.signum() * a.abs().sqrt() * (s * xi[0] + xi[1])];
        let oracle = g.eval_hat(&eta);
        assert!((dense[idx] - oracle).abs() <= 1e-14, "ch {ch} at {xi:?}: {} vs {oracle}", dense[idx]);
    }
}

#[test]
fn doubling_keeps_shared_filters_bit_identical() {
    let coarse = default_system();
    let spec = ChannelSpec { shears: 25, ..ChannelSpec::default_2d() };
    let fine = build_system(&GeneratorSpec::classical(), &grid(), &spec, &BuildOptions::default()).unwrap();
    let by_node: HashMap<(u64, u64), usize> = fine
        .channels
        .channels
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.a.to_bits(), c.s[0].to_bits()), i))
        .collect();
    let mut shared = 0;
    for (i, c) in coarse.channels.channels.iter().enumerate() {
        let j = by_node[&(c.a.to_bits(), c.s[0].to_bits())];
        assert_eq!(coarse.filters[i], fine.filters[j]);
        shared += 1;
    }
    assert_eq!(shared, coarse.channel_count());
}

#[test]
fn channel_set_invariants() {
    let set = channel_set(&ChannelSpec::default_2d(), 2).unwrap();
    assert_eq!(set.channels.len(), 12 * 13);
    assert!(set.scale_nodes.windows(2).all(|w| w[0] < w[1]));
    assert!(set.shear_nodes.windows(2).all(|w| w[0] < w[1]));
    assert!(set.channels.iter().all(|c| c.measure > 0.0 && c.haar > 0.0));
    let three = channel_set(&ChannelSpec { shears: 5, ..ChannelSpec::default_2d() }, 3).unwrap();
    assert_eq!(three.channels.len(), 12 * 25);
    let mirrored = channel_set(&ChannelSpec { sign: SignMode::Mirrored, ..ChannelSpec::default_2d() }, 2).unwrap();
    assert_eq!(mirrored.channels.len(), 2 * 12 * 13);
    assert!(channel_set(&ChannelSpec { shears: 12, ..ChannelSpec::default_2d() }, 2).is_err());
    assert!(channel_set(&ChannelSpec { a_min: 0.0, ..ChannelSpec::default_2d() }, 2).is_err());
    assert!(channel_set(&ChannelSpec { scales: 1, ..ChannelSpec::default_2d() }, 2).is_err());
}

#[test]
fn admissibility_is_flat_and_matches_reduction() {
    let sys = default_system();
    let adm = &sys.admissibility;
    assert!(adm.probes.len() >= 32);
    assert!(adm.coefficient_of_variation <= 0.02, "{}", adm.coefficient_of_variation);
    let reduction = sys.generator.admissibility_reduction(2);
    let rel = (adm.c_psi - reduction).abs() / reduction;
    assert!(rel <= 0.02, "{} vs {reduction}", adm.c_psi);
    assert!(adm.probes.iter().all(|p| sys.cone.contains(p)));
    assert!(!adm.truncation_note.is_empty());
}

#[test]
fn probes_outside_the_cone_are_excluded() {
    let sys = default_system();
    let probes = vec![vec![3.0, 0.3], vec![0.0, 1.0], vec![100.0, 0.0]];
    let adm = admissibility(&sys, &probes);
    assert_eq!(adm.excluded_probes, 2);
    assert_eq!(adm.probes.len(), 1);
    assert!(adm.truncation_note.contains("excluded"));
}

#[test]
fn zero_generator_has_zero_c_psi() {
    let g = GeneratorSpec { amplitude: 0.0, ..GeneratorSpec::classical() };
    let sys = build_system(&g, &grid(), &ChannelSpec::default_2d(), &BuildOptions::default()).unwrap();
    assert_eq!(sys.c_psi(), 0.0);
    assert!(matches!(normalize_system(&sys), Err(Error::Precondition(_))));
}

#[test]
fn normalization_is_exact_and_idempotent() {
    let sys = normalize_system(&default_system()).unwrap();
    assert!((sys.c_psi() - 1.0).abs() <= 1e-10);
    let again = normalize_system(&sys).unwrap();
    assert!((again.generator.amplitude - sys.generator.amplitude).abs() <= 1e-12);
    let d = sys.filters.iter().zip(&again.filters).flat_map(|(a, b)| a.value.iter().zip(&b.value)).map(|(x, y)| (x - y).abs());
    assert!(d.fold(0.0, f64::max) <= 1e-12);
}

#[test]
fn strict_policy_reports_aliasing() {
    let opts = BuildOptions { band_policy: BandPolicy::Strict, ..BuildOptions::default() };
    let err = build_system(&GeneratorSpec::classical(), &grid(), &ChannelSpec::default_2d(), &opts).unwrap_err();
    let Error::Aliasing { count, channels } = err else { panic!("expected aliasing error") };
    assert!(count > 0 && channels.contains("a="));
    // Coarse scales only stay inside the Nyquist box.
    let safe = ChannelSpec { a_min: 0.5, a_max: 1.0, scales: 4, shear_max: 0.5, shears: 5, sign: SignMode::Positive };
    let fine = SpatialGrid::new(2, 8.0, 256).unwrap();
    assert!(build_system(&GeneratorSpec::classical(), &fine, &safe, &opts).is_ok());
}

#[test]
fn accepted_filters_stay_inside_nyquist() {
    let sys = default_system();
    let mut xi = [0.0; 2];
    for (f, band) in sys.filters.iter().zip(&sys.bands) {
        for &i in &f.index {
            sys.grid.frequency(i as usize, &mut xi);
            assert!(xi[0].abs() <= sys.grid.nyquist(0) && xi[1].abs() <= sys.grid.nyquist(1));
        }
        assert!(band.captured >= 0.0 && band.captured <= 1.0);
    }
}

#[test]
fn exponent_identity() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let a: f64 = rng.gen_range(1.0 / 16.0..16.0);
        for n in [2usize, 3] {
            let nf = n as f64;
            let lhs = a.powi(n as i32 + 1) / scaling_matrix(a, n).unwrap().det().abs();
            let rhs = a.powf((nf * nf - nf + 1.0) / nf);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }
}

#[test]
fn refinement_increments_shrink() {
    let g = GeneratorSpec::classical();
    let base = ChannelSpec::default_2d();
    let means: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|&f| build_system(&g, &grid(), &base.refined(f), &BuildOptions::default()).unwrap().c_psi())
        .collect();
    let steps: Vec<f64> = means.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(steps.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn zero_frequency_is_outside_the_cone() {
    let sys = default_system();
    assert!(!sys.cone.contains(&[0.0, 0.0]));
    assert_eq!(sys.c_psi_at(&[0.0, 0.5]), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn enlarging_scale_range_never_decreases_c_psi(extra in 1usize..6, x1 in 0.6f64..3.5, u in -1.0f64..1.0) {
        let base = ChannelSpec::default_2d();
        let dln = (base.a_max / base.a_min).ln() / (base.scales - 1) as f64;
        let wider = ChannelSpec {
            a_min: base.a_min * (-(extra as f64) * dln).exp(),
            scales: base.scales + extra,
            ..base.clone()
        };
        let g = GeneratorSpec::classical();
        let small = build_system(&g, &grid(), &base, &BuildOptions { probes: 0, ..BuildOptions::default() }).unwrap();
        let large = build_system(&g, &grid(), &wider, &BuildOptions { probes: 0, ..BuildOptions::default() }).unwrap();
        let xi = [x1, u * x1];
        prop_assert!(large.c_psi_at(&xi) >= small.c_psi_at(&xi) * (1.0 - 1e-12));
    }

    #[test]
    fn generator_is_nonnegative_and_even(x in -4.0f64..4.0, y in -4.0f64..4.0) {
        for g in [GeneratorSpec::classical(), GeneratorSpec::gaussian_derivative(4, 0.9, 1.0)] {
            let v = g.eval_hat(&[x, y]);
            prop_assert!(v >= 0.0 && v.is_finite());
            prop_assert_eq!(v, g.eval_hat(&[-x, -y]));
        }
    }
}
