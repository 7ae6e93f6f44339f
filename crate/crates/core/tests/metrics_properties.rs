use proptest::prelude::*;

use vnoise_core::ctpl::CtplParams;
use vnoise_core::metrics::{self, observability_test, s3i_signed, Oracle, Regime};
use vnoise_core::reference::{default_reference_graph, ReferenceVariant};
use vnoise_core::SeedTree;

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 2..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn s3i_is_antisymmetric(a in sample(), b in sample()) {
        match (s3i_signed(&a, &b), s3i_signed(&b, &a)) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x, -y);
                prop_assert_eq!(x.abs(), y.abs());
            }
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn cantelli_threshold_decreases_in_alpha(
        mu in 0.0..10.0f64,
        sigma in 0.01..5.0f64,
        a1 in 0.001..0.999f64,
        a2 in 0.001..0.999f64,
    ) {
        let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
        let t_lo = observability_test(0.0, mu, sigma, lo).unwrap().threshold;
        let t_hi = observability_test(0.0, mu, sigma, hi).unwrap().threshold;
        prop_assert!(t_hi <= t_lo);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn replication_is_a_function_of_the_seed(seed in any::<u64>()) {
        let g = default_reference_graph(ReferenceVariant::Heterogeneous);
        let (p1, p2) = (
            CtplParams::new(1.0, 0.006, 40.0, 0.05).unwrap(),
            CtplParams::new(3.0, 0.015, 40.0, 0.05).unwrap(),
        );
        let a = Regime { graph: &g, noise: &p1 };
        let b = Regime { graph: &g, noise: &p2 };
        let run = || metrics::s3i_replicated(a, b, 4, 6, 0.05, Oracle::Strong, SeedTree::new(seed)).unwrap();
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn observed_co_spectrality_is_sandwiched() {
    for (i, (variant, c, lambda)) in [
        (ReferenceVariant::Heterogeneous, 1.0, 0.006),
        (ReferenceVariant::Heterogeneous, 5.0, 0.021),
        (ReferenceVariant::Uniform, 3.0, 0.015),
    ]
    .into_iter()
    .enumerate()
    {
        let g = default_reference_graph(variant);
        let p = CtplParams::new(c, lambda, 40.0, 0.05).unwrap();
        let root = SeedTree::new(77).child(i as u64);
        let n = 400;
        let d = metrics::sample_distances(&g, &p, n, Oracle::Strong, root.named("strong"))
            .unwrap()
            .values;
        let gaps: Vec<f64> = d.chunks(2).map(|w| (w[0] - w[1]).abs()).collect();
        let lower = metrics::mean(&gaps);
        let lower_se = (metrics::sample_variance(&gaps) / gaps.len() as f64).sqrt();
        let upper = 2.0 * metrics::mean(&d);
        let upper_se = 2.0 * (metrics::sample_variance(&d) / n as f64).sqrt();
        let obs = metrics::sc_observed(&g, &p, n, &mut root.named("weak").rng()).unwrap();
        let lo_tol = 3.0 * (lower_se.powi(2) + obs.std_error.powi(2)).sqrt();
        let hi_tol = 3.0 * (upper_se.powi(2) + obs.std_error.powi(2)).sqrt();
        assert!(
            obs.mean >= lower - lo_tol,
            "case {i}: {} < {lower}",
            obs.mean
        );
        assert!(
            obs.mean <= upper + hi_tol,
            "case {i}: {} > {upper}",
            obs.mean
        );
    }
}
