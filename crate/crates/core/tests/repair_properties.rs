mod common;

use proptest::prelude::*;

use common::sparse_violation_graph;
use vnoise_core::ctpl::CtplParams;
use vnoise_core::reference::{default_reference_graph, ReferenceVariant};
use vnoise_core::repair::{detect_violations, repair, RepairLog};
use vnoise_core::SeedTree;

const EPS: f64 = 10.0;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn repair_terminates_clean_and_monotone(seed in any::<u64>()) {
        let g = sparse_violation_graph(&mut SeedTree::new(seed).rng(), EPS);
        let (h, log) = repair(&g, EPS).unwrap();
        prop_assert!(detect_violations(&h, EPS).unwrap().is_empty());
        prop_assert!(log.is_monotone());
        prop_assert!(log.phi_trace.len() <= log.phi_trace[0].phi);
        prop_assert_eq!(log.phi_trace.len(), log.edits.len() + 1);
    }

    #[test]
    fn repaired_weights_come_from_geometry(seed in any::<u64>()) {
        let g = sparse_violation_graph(&mut SeedTree::new(seed).rng(), EPS);
        let (h, _) = repair(&g, EPS).unwrap();
        let kernel = h.kernel();
        for e in h.edges() {
            prop_assert_eq!(h.edge_weight(e), kernel.evaluate(h.edge_length(e)));
        }
    }

    #[test]
    fn noise_skips_subdivision_vertices(seed in any::<u64>()) {
        let g = sparse_violation_graph(&mut SeedTree::new(seed).rng(), EPS);
        let (h, _) = repair(&g, EPS).unwrap();
        let p = CtplParams::new(1.0, 0.01, 40.0, 0.05).unwrap();
        let noisy = h.apply_vertex_noise(&p, &mut SeedTree::new(seed).named("noise").rng(), None).unwrap();
        for (before, after) in h.vertices().iter().zip(noisy.vertices()) {
            if before.subdivision {
                prop_assert_eq!(&before.coords, &after.coords);
            } else {
                prop_assert_ne!(&before.coords, &after.coords);
            }
        }
    }

    #[test]
    fn repair_log_round_trips(seed in any::<u64>()) {
        let g = sparse_violation_graph(&mut SeedTree::new(seed).rng(), EPS);
        let (_, log) = repair(&g, EPS).unwrap();
        prop_assert_eq!(RepairLog::from_json(&log.to_json().unwrap()).unwrap(), log);
    }
}

#[test]
fn violations_are_ordered_by_severity() {
    let g = default_reference_graph(ReferenceVariant::Unconstrained);
    let v = detect_violations(&g, EPS).unwrap();
    assert!(!v.is_empty());
    assert!(v.windows(2).all(|w| w[0].severity >= w[1].severity));
}
