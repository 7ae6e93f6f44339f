#![no_main]

use libfuzzer_sys::fuzz_target;
use vnoise_core::graph::check_constraints;
use vnoise_core::EmbeddedGraph;

// Accepted documents must re-serialize to an equal graph, and the
// constraint checker must not panic on anything the parser accepts.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(g) = EmbeddedGraph::from_json(text) else {
        return;
    };
    let again = EmbeddedGraph::from_json(&g.to_json().expect("serialize")).expect("round trip");
    assert!(g.same_combinatorics(&again));
    if g.dim() == 2 && g.vertex_count() <= 64 {
        let _ = check_constraints(&g, 1.0, 2.0);
    }
});
