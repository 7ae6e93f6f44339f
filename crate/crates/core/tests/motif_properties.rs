use proptest::prelude::*;

use vnoise_core::ctpl::CtplParams;
use vnoise_core::motif::{self, canonical_motif, extremal_displacement, numeric_extremal_oracle};
use vnoise_core::reference::{default_reference_graph, ReferenceVariant};
use vnoise_core::spectral::{frobenius_norm, operator_norm, solver_tolerance};
use vnoise_core::{SeedTree, WeightKernel};

fn extremal_kernel() -> impl Strategy<Value = WeightKernel> {
    prop_oneof![
        Just(WeightKernel::Identity),
        (0.1..3.0f64, 0.0..5.0f64)
            .prop_map(|(slope, offset)| WeightKernel::Affine { slope, offset }),
        (0.01..1.0f64, 1.0..2.5f64)
            .prop_map(|(scale, exponent)| WeightKernel::Power { scale, exponent }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_motifs_respect_packing(n in 1usize..=6, r in 0.1..50.0f64, slack in 0.0..100.0f64) {
        let m = canonical_motif(n, 2.0 * r + slack, r).unwrap();
        prop_assert_eq!(m.degree(), n);
        if n > 1 {
            prop_assert!(m.min_angular_separation() >= std::f64::consts::PI / 3.0 - 1e-12);
        }
    }

    #[test]
    fn more_than_six_spokes_are_rejected(n in 7usize..32) {
        prop_assert!(canonical_motif(n, 100.0, 50.0).is_err());
    }

    #[test]
    fn grid_oracle_never_beats_closed_form(
        n in 1usize..=6,
        r in 0.5..50.0f64,
        slack in 0.0..100.0f64,
        kernel in extremal_kernel(),
    ) {
        let m = canonical_motif(n, 2.0 * r + slack, r).unwrap();
        let closed = extremal_displacement(&m, r, kernel).unwrap().delta_wd;
        let coarse = numeric_extremal_oracle(&m, r, kernel, 24).unwrap();
        let fine = numeric_extremal_oracle(&m, r, kernel, 96).unwrap();
        let scale = closed.abs().max(1.0);
        prop_assert!(coarse <= closed + 1e-9 * scale);
        prop_assert!(fine <= closed + 1e-9 * scale);
        // grid error shrinks with refinement
        prop_assert!(closed - fine <= 0.02 * scale, "closed {closed} fine {fine}");
    }

    #[test]
    fn extremal_change_grows_with_radius(
        n in 1usize..=6,
        r1 in 0.5..25.0f64,
        dr in 0.0..25.0f64,
        kernel in extremal_kernel(),
    ) {
        let r2 = r1 + dr;
        let m = canonical_motif(n, 2.0 * r2 + 1.0, r2).unwrap();
        let a = extremal_displacement(&m, r1, kernel).unwrap().delta_wd;
        let b = extremal_displacement(&m, r2, kernel).unwrap().delta_wd;
        prop_assert!(b >= a - 1e-9 * a.abs().max(1.0), "{a} > {b}");
    }

    #[test]
    fn disjoint_blocks_add_in_quadrature(seed in any::<u64>(), c in 0.5..5.0f64, uniform in any::<bool>()) {
        let g = default_reference_graph(if uniform { ReferenceVariant::Uniform } else { ReferenceVariant::Heterogeneous });
        let p = CtplParams::new(c, 0.01, 40.0, 0.05).unwrap();
        let h = g.apply_vertex_noise(&p, &mut SeedTree::new(seed).rng(), None).unwrap();
        let tiling = motif::greedy_tiling(&g);
        let blocks: Vec<_> = tiling.iter().map(|m| motif::motif_block(&g, &h, m).unwrap()).collect();
        let mut sum = blocks[0].clone();
        for b in &blocks[1..] {
            sum += b;
        }
        let sum_sq: f64 = blocks.iter().map(|b| frobenius_norm(b).powi(2)).sum();
        prop_assert!((frobenius_norm(&sum).powi(2) - sum_sq).abs() <= 1e-10 * sum_sq);
        let max_op = blocks.iter().map(|b| operator_norm(b).unwrap()).fold(0.0, f64::max);
        prop_assert!((operator_norm(&sum).unwrap() - max_op).abs() <= solver_tolerance(max_op));
    }
}

#[test]
fn greedy_tiling_is_deterministic() {
    for v in [
        ReferenceVariant::Heterogeneous,
        ReferenceVariant::Unconstrained,
        ReferenceVariant::Uniform,
    ] {
        let g = default_reference_graph(v);
        assert_eq!(motif::greedy_tiling(&g), motif::greedy_tiling(&g.clone()));
    }
}
