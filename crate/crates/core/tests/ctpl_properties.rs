use proptest::prelude::*;
use rand::Rng;

use vnoise_core::ctpl::{self, AutotuneOptions, CtplDensity, CtplParams};
use vnoise_core::quadrature::integrate;
use vnoise_core::SeedTree;

/// Mass of the normalized density by quadrature in `s = ln x`, which makes
/// both the essential zero at the origin and the tempered tail smooth.
fn total_mass(params: &CtplParams) -> f64 {
    let density = CtplDensity::new(*params).unwrap();
    let lo = (params.c / 2000.0).ln();
    let hi = (60.0 / params.lambda).ln();
    integrate(
        |s| density.pdf(s.exp()) * s.exp(),
        lo,
        hi,
        1e-12,
        1e-12,
        20_000,
    )
    .unwrap()
    .value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn density_integrates_to_one(c in 0.2..10.0f64, lambda in 1e-3..1.0f64) {
        let p = CtplParams::new(c, lambda, 40.0, 0.05).unwrap();
        let mass = total_mass(&p);
        prop_assert!((mass - 1.0).abs() <= 1e-8, "mass {mass}");
    }

    #[test]
    fn identical_seeds_give_identical_streams(seed in any::<u64>(), c in 0.5..5.0f64, lambda in 0.0..0.1f64) {
        let p = CtplParams::new(c, lambda, 40.0, 0.05).unwrap();
        let draw = |s: u64| {
            let mut rng = SeedTree::new(s).rng();
            (0..32).map(|_| ctpl::sample_radius(&p, &mut rng).unwrap().radius).collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(seed), draw(seed));
    }

    #[test]
    fn clipped_radius_never_exceeds_r_max(seed in any::<u64>(), r_max in 0.5..80.0f64) {
        let p = CtplParams::new(1.0, 0.001, r_max, 0.05).unwrap();
        let mut rng = SeedTree::new(seed).rng();
        for _ in 0..64 {
            let s = ctpl::sample_radius(&p, &mut rng).unwrap();
            prop_assert!(s.radius <= r_max);
            prop_assert_eq!(s.clipped, s.radius == r_max);
        }
    }

    #[test]
    fn planar_displacement_has_sampled_length(seed in any::<u64>(), x in -1e3..1e3f64, y in -1e3..1e3f64) {
        let p = CtplParams::new(2.0, 0.01, 30.0, 0.05).unwrap();
        let mut a = SeedTree::new(seed).rng();
        let mut b = SeedTree::new(seed).rng();
        let moved = ctpl::perturb_point(&[x, y], &p, &mut a).unwrap();
        let radius = ctpl::sample_radius(&p, &mut b).unwrap().radius;
        let len = ((moved[0] - x).powi(2) + (moved[1] - y).powi(2)).sqrt();
        prop_assert!((len - radius).abs() <= 1e-9 * (1.0 + x.abs() + y.abs()));
    }
}

/// Kolmogorov–Smirnov distance of ascending `xs` against `cdf`.
fn ks_distance(xs: &[f64], cdf: &[f64]) -> f64 {
    let n = xs.len() as f64;
    cdf.iter()
        .enumerate()
        .map(|(i, f)| ((i + 1) as f64 / n - f).max(f - i as f64 / n))
        .fold(0.0, f64::max)
}

#[test]
fn clipping_leaves_the_law_below_r_max_unchanged() {
    for (i, (c, lambda, r_max)) in [(1.0, 0.006, 40.0), (3.0, 0.05, 20.0), (0.5, 0.2, 10.0)]
        .into_iter()
        .enumerate()
    {
        let p = CtplParams::new(c, lambda, r_max, 0.05).unwrap();
        let mut rng = SeedTree::new(91).child(i as u64).rng();
        let mut kept = Vec::new();
        for _ in 0..20_000 {
            let s = ctpl::sample_radius(&p, &mut rng).unwrap();
            if !s.clipped {
                kept.push(s.radius);
            }
        }
        kept.sort_by(f64::total_cmp);
        let density = CtplDensity::new(p).unwrap();
        let below = density.cdf(r_max).unwrap();
        let cdf: Vec<f64> = density
            .cdf_sorted(&kept)
            .unwrap()
            .iter()
            .map(|f| f / below)
            .collect();
        let d = ks_distance(&kept, &cdf);
        // 0.001-level critical value
        assert!(d < 1.95 / (kept.len() as f64).sqrt(), "case {i}: D = {d}");
    }
}

#[test]
fn calibrated_clip_rate_is_at_most_delta() {
    let opts = AutotuneOptions {
        tol: 2e-4,
        max_iter: 40,
        n_mc: 400_000,
    };
    for (i, c) in [1.0, 4.0].into_iter().enumerate() {
        let (p, _) = ctpl::calibrate(c, 40.0, 0.05, &opts, 17 + i as u64).unwrap();
        let mut rng = SeedTree::new(5).child(i as u64).rng();
        let n = 200_000;
        let clipped = (0..n)
            .filter(|_| ctpl::sample_radius(&p, &mut rng).unwrap().clipped)
            .count();
        let rate = clipped as f64 / n as f64;
        let sigma = (0.05 * 0.95 / n as f64).sqrt();
        assert!(
            rate <= 0.05 + 2e-4 + 3.0 * sigma,
            "c = {c}: clip rate {rate}"
        );
    }
}

#[test]
fn tail_is_nonincreasing_in_lambda() {
    let lambdas = [0.0, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1];
    let tails: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let p = CtplParams::new(1.0, l, 40.0, 0.05).unwrap();
            ctpl::estimate_tail(&p, 40.0, 200_000, &mut SeedTree::new(3).rng()).unwrap()
        })
        .collect();
    for w in tails.windows(2) {
        assert!(w[1] <= w[0], "{tails:?}");
    }
}

#[test]
fn displacement_directions_are_uniform() {
    let p = CtplParams::new(1.0, 0.01, 40.0, 0.05).unwrap();
    let mut rng = SeedTree::new(11).rng();
    let bins = 36;
    let n = 36_000;
    let mut counts = vec![0usize; bins];
    for _ in 0..n {
        let x0 = rng.random_range(-10.0..10.0);
        let q = ctpl::perturb_point(&[x0, 0.0], &p, &mut rng).unwrap();
        let theta = q[1].atan2(q[0] - x0).rem_euclid(std::f64::consts::TAU);
        counts[((theta / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = n as f64 / bins as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    // chi-square 0.999 quantile with 35 degrees of freedom
    assert!(chi2 < 66.6, "chi2 = {chi2}");
}
