mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::graph_strategy;
use vnoise_core::spectral::{self, solver_tolerance, spectrum, wasserstein2, Spectrum};

fn spectrum_strategy(max_len: usize) -> impl Strategy<Value = Spectrum> {
    prop::collection::vec(0.0..100.0f64, 1..=max_len).prop_map(Spectrum::from_values)
}

fn symmetric(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut it = entries.iter().cycle();
    for i in 0..n {
        for j in i..n {
            let v = *it.next().unwrap();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbation_chain_holds(
        g in graph_strategy(10, 400.0),
        jitter in prop::collection::vec((-20.0..20.0f64, -20.0..20.0f64), 10),
    ) {
        let coords = g
            .vertices()
            .iter()
            .zip(&jitter)
            .map(|(v, (dx, dy))| vec![v.coords[0] + dx, v.coords[1] + dy])
            .collect();
        let h = g.with_coords(coords).unwrap();
        let cert = spectral::weyl_certificate(&g.laplacian(), &h.laplacian()).unwrap();
        let tol = solver_tolerance(cert.frob_norm_e.max(g.laplacian().norm()));
        prop_assert!(cert.chain_holds(tol), "{cert:?}");
    }

    #[test]
    fn wasserstein_is_a_metric(a in spectrum_strategy(8), b in spectrum_strategy(8), c in spectrum_strategy(8)) {
        let ab = wasserstein2(&a, &b).unwrap();
        let ba = wasserstein2(&b, &a).unwrap();
        let bc = wasserstein2(&b, &c).unwrap();
        let ac = wasserstein2(&a, &c).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, ba);
        prop_assert!(wasserstein2(&a, &a).unwrap() <= 1e-9);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn equal_size_wasserstein_is_rms_of_sorted_differences(
        pairs in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), 1..12),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (a, b) = (Spectrum::from_values(x), Spectrum::from_values(y));
        let rms = (a.values.iter().zip(&b.values).map(|(p, q)| (p - q).powi(2)).sum::<f64>()
            / a.len() as f64)
            .sqrt();
        let direct = wasserstein2(&a, &b).unwrap();
        prop_assert!((direct - rms).abs() <= 1e-9 * (1.0 + rms));
        // duplicating every atom leaves the law unchanged but forces the
        // unequal-size quantile path
        let doubled = Spectrum::from_values(a.values.iter().flat_map(|&v| [v, v]).collect());
        let refined = wasserstein2(&doubled, &b).unwrap();
        prop_assert!((refined - rms).abs() <= 1e-9 * (1.0 + rms));
    }

    #[test]
    fn block_diagonal_spectrum_is_the_union(
        n in 1usize..5,
        m in 1usize..5,
        e1 in prop::collection::vec(-10.0..10.0f64, 15),
        e2 in prop::collection::vec(-10.0..10.0f64, 15),
    ) {
        let (a, b) = (symmetric(n, &e1), symmetric(m, &e2));
        let mut block = DMatrix::zeros(n + m, n + m);
        block.view_mut((0, 0), (n, n)).copy_from(&a);
        block.view_mut((n, n), (m, m)).copy_from(&b);
        let mut union = spectrum(&a).unwrap().values;
        union.extend(spectrum(&b).unwrap().values);
        let union = Spectrum::from_values(union);
        let whole = spectrum(&block).unwrap();
        let tol = solver_tolerance(whole.max_abs().max(1.0));
        for (p, q) in whole.values.iter().zip(&union.values) {
            prop_assert!((p - q).abs() <= tol, "{p} vs {q}");
        }
    }

    #[test]
    fn degree_bound_holds_on_random_perturbations(
        g in graph_strategy(10, 400.0),
        jitter in prop::collection::vec((-20.0..20.0f64, -20.0..20.0f64), 10),
    ) {
        let coords = g
            .vertices()
            .iter()
            .zip(&jitter)
            .map(|(v, (dx, dy))| vec![v.coords[0] + dx, v.coords[1] + dy])
            .collect();
        let h = g.with_coords(coords).unwrap();
        prop_assert!(spectral::degree_controlled_bound(&g, &h).unwrap().holds);
    }
}
